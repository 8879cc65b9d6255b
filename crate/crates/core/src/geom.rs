//! Disks on the unit sphere as rays in Minkowski space R^{1,3}.
//!
//! A 4-vector `(a, b, c, d)` names the circle `a t - b x - c y - d z = 0` on
//! the light cone section `t = 1`, and the disk on the side where that form is
//! negative. Positive multiples name the same disk, negation names the
//! complementary disk. Real disks are spacelike (`<D,D> < 0`); after scaling to
//! `<D,D> = -1` (de Sitter coordinates) the inversive distance of two disks is
//! just their Lorentz inner product.

use std::ops::Neg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Homogeneous disk coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk4 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Disk4 {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Disk4 { a, b, c, d }
    }

    pub const fn from_array(v: [f64; 4]) -> Self {
        Disk4 { a: v[0], b: v[1], c: v[2], d: v[3] }
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn scale(self, s: f64) -> Self {
        Disk4::new(s * self.a, s * self.b, s * self.c, s * self.d)
    }

    /// `b² + c² + d² - a²`, i.e. `-<D,D>`. Positive for real disks.
    pub fn spacelike_norm2(self) -> f64 {
        self.b * self.b + self.c * self.c + self.d * self.d - self.a * self.a
    }

    pub fn euclid_norm(self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    pub fn spatial(self) -> [f64; 3] {
        [self.b, self.c, self.d]
    }

    pub fn is_normalized(self) -> bool {
        (lorentz_inner(self, self) + 1.0).abs() <= tol::NORM
    }
}

impl Neg for Disk4 {
    type Output = Disk4;
    fn neg(self) -> Disk4 {
        self.scale(-1.0)
    }
}

/// `<u, v> = a a' - b b' - c c' - d d'`.
pub fn lorentz_inner(u: Disk4, v: Disk4) -> f64 {
    u.a * v.a - u.b * v.b - u.c * v.c - u.d * v.d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiskClass {
    Real,
    Point,
    Imaginary,
}

/// Sign of `b²+c²+d²-a²`, with a relative band of [`tol::LIGHT`] around zero.
pub fn classify_disk(d: Disk4) -> Result<DiskClass> {
    let scale = d.a * d.a + d.b * d.b + d.c * d.c + d.d * d.d;
    if scale == 0.0 {
        return Err(Error::ZeroVector);
    }
    let s = d.spacelike_norm2() / scale;
    Ok(if s > tol::LIGHT {
        DiskClass::Real
    } else if s < -tol::LIGHT {
        DiskClass::Imaginary
    } else {
        DiskClass::Point
    })
}

/// Positive rescaling to `<D,D> = -1`.
pub fn normalize_desitter(d: Disk4) -> Result<Disk4> {
    match classify_disk(d) {
        Ok(DiskClass::Real) => Ok(d.scale(1.0 / d.spacelike_norm2().sqrt())),
        Err(Error::ZeroVector) => Err(Error::ZeroVector),
        _ => Err(Error::NotRealDisk),
    }
}

/// Inversive distance of two real disks (any positive scaling accepted).
pub fn inversive_distance(d1: Disk4, d2: Disk4) -> Result<f64> {
    Ok(lorentz_inner(normalize_desitter(d1)?, normalize_desitter(d2)?))
}

/// A point of the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpherePoint {
    /// Projects any nonzero vector radially onto the sphere.
    pub fn from_vec(v: [f64; 3]) -> Self {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        SpherePoint { x: v[0] / n, y: v[1] / n, z: v[2] / n }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Great-circle distance.
    pub fn angle_to(self, o: SpherePoint) -> f64 {
        let cross = cross(self.to_array(), o.to_array());
        norm3(cross).atan2(dot3(self.to_array(), o.to_array()))
    }
}

/// Spherical center and radius of a real disk.
///
/// The disk is `{p : v̂·p > a/|v|}` with `v = (b, c, d)`, so the center is `v̂`
/// and `cos ρ = a/|v|`. `ρ < π/2` exactly when `a > 0`.
pub fn spherical_center_radius(d: Disk4) -> Result<(SpherePoint, f64)> {
    let d = normalize_desitter(d)?;
    let v = d.spatial();
    let s = norm3(v);
    // On de Sitter space |v| = 1/sin ρ and a = cot ρ.
    let rho = 1.0f64.atan2(d.a);
    debug_assert!(s > 0.0);
    Ok((SpherePoint::from_vec(v), rho))
}

/// Apex of the cone tangent to the sphere along a disk's boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConicalCap {
    /// Affine point `(b, c, d)/a`.
    Finite([f64; 3]),
    /// Point at infinity in direction `(b, c, d)` (great circles).
    AtInfinity([f64; 3]),
}

/// Conical cap of a real disk. Disks with `a < 0` use the cap of their
/// complement, which has the same affine expression `(b, c, d)/a`.
pub fn conical_cap(d: Disk4) -> Result<ConicalCap> {
    let d = normalize_desitter(d)?;
    if d.a.abs() <= tol::LIGHT {
        let v = d.spatial();
        let n = norm3(v);
        return Ok(ConicalCap::AtInfinity([v[0] / n, v[1] / n, v[2] / n]));
    }
    Ok(ConicalCap::Finite([d.b / d.a, d.c / d.a, d.d / d.a]))
}

/// Type of a coaxial family or of a triple's orthocircle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PencilKind {
    Hyperbolic,
    Parabolic,
    Elliptic,
}

/// Lorentz normal of the hyperplane spanned by three disks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthoDisk {
    pub coords: Disk4,
    pub kind: PencilKind,
}

pub fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn minor(rows: &[[f64; 4]; 3], skip: usize) -> f64 {
    let mut m = [[0.0; 3]; 3];
    for (r, row) in rows.iter().enumerate() {
        let mut k = 0;
        for (c, &x) in row.iter().enumerate() {
            if c != skip {
                m[r][k] = x;
                k += 1;
            }
        }
    }
    det3(m)
}

/// Orthodisk of a triple via the 3×3 minors of its coordinate matrix.
///
/// `<C, D>` equals the 4×4 determinant with `D` prepended to the triple, so
/// `C` is Lorentz-orthogonal to each input and odd permutations negate it.
pub fn orthodisk(d1: Disk4, d2: Disk4, d3: Disk4) -> Result<OrthoDisk> {
    let rows = [d1.to_array(), d2.to_array(), d3.to_array()];
    let c = Disk4::new(minor(&rows, 0), minor(&rows, 1), -minor(&rows, 2), minor(&rows, 3));
    let scale = d1.euclid_norm() * d2.euclid_norm() * d3.euclid_norm();
    if c.euclid_norm() <= tol::DET * scale {
        return Err(Error::DegenerateTriple);
    }
    let s = c.spacelike_norm2() / (c.euclid_norm() * c.euclid_norm());
    let kind = if s > tol::LIGHT {
        PencilKind::Hyperbolic
    } else if s < -tol::LIGHT {
        PencilKind::Elliptic
    } else {
        PencilKind::Parabolic
    };
    Ok(OrthoDisk { coords: c, kind })
}

/// `det(D4; D1; D2; D3)`: zero when `D4` lies in the c-plane of the triple,
/// otherwise its sign tells the side.
pub fn coplanarity_det(face: [Disk4; 3], d4: Disk4) -> Result<f64> {
    let o = orthodisk(face[0], face[1], face[2])?;
    Ok(lorentz_inner(o.coords, d4))
}

/// Determinant threshold matching [`coplanarity_det`] for the given rows.
pub fn det_tolerance(face: [Disk4; 3], d4: Disk4) -> f64 {
    tol::DET * face.iter().map(|d| d.euclid_norm()).product::<f64>() * d4.euclid_norm()
}

/// Type of the coaxial family spanned by two real disks.
pub fn coaxial_classify(d1: Disk4, d2: Disk4) -> Result<PencilKind> {
    let n1 = normalize_desitter(d1)?;
    let n2 = normalize_desitter(d2)?;
    let same = |u: Disk4, v: Disk4| {
        u.to_array().iter().zip(v.to_array()).all(|(x, y)| (x - y).abs() <= tol::INV * (1.0 + x.abs()))
    };
    if same(n1, n2) || same(n1, -n2) {
        return Err(Error::SameBoundary);
    }
    let d = lorentz_inner(n1, n2).abs();
    Ok(if (d - 1.0).abs() <= tol::INV {
        PencilKind::Parabolic
    } else if d > 1.0 {
        PencilKind::Hyperbolic
    } else {
        PencilKind::Elliptic
    })
}

/// Disk in the extended plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanarDisk {
    /// Center `(x, y)` and signed radius; `r < 0` is the exterior of the circle.
    Circle { x: f64, y: f64, r: f64 },
    /// Half-plane `{p : n·p < offset}` with unit normal `n`.
    Line { nx: f64, ny: f64, offset: f64 },
}

impl PlanarDisk {
    pub fn circle(x: f64, y: f64, r: f64) -> Self {
        PlanarDisk::Circle { x, y, r }
    }
}

/// Inversive distance computed directly in the plane.
pub fn inversive_distance_planar(p: PlanarDisk, q: PlanarDisk) -> f64 {
    use PlanarDisk::*;
    match (p, q) {
        (Circle { x: x1, y: y1, r: r1 }, Circle { x: x2, y: y2, r: r2 }) => {
            let d2 = (x2 - x1).powi(2) + (y2 - y1).powi(2);
            (d2 - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)
        }
        (Circle { x, y, r }, Line { nx, ny, offset }) | (Line { nx, ny, offset }, Circle { x, y, r }) => {
            // Signed distance from the center to the line, positive when the
            // center lies outside the half-plane.
            (nx * x + ny * y - offset) / r
        }
        (Line { nx: a1, ny: b1, .. }, Line { nx: a2, ny: b2, .. }) => -(a1 * a2 + b1 * b2),
    }
}

/// Lifts a planar disk to the sphere by inverse stereographic projection from
/// the north pole onto the plane `z = 0`. Returns de Sitter coordinates;
/// interior disks (`r > 0`) avoid the north pole.
pub fn stereographic_lift(p: PlanarDisk) -> Disk4 {
    match p {
        PlanarDisk::Circle { x, y, r } => {
            let q = x * x + y * y - r * r;
            let s = 1.0 / (2.0 * r);
            Disk4::new((1.0 + q) * s, 2.0 * x * s, 2.0 * y * s, (q - 1.0) * s)
        }
        PlanarDisk::Line { nx, ny, offset } => {
            let n = (nx * nx + ny * ny).sqrt();
            let (nx, ny, h) = (nx / n, ny / n, offset / n);
            Disk4::new(-h, -nx, -ny, -h)
        }
    }
}

/// Stereographic image of a real disk. Returns the line form when the
/// boundary passes through the north pole (within [`tol::LIGHT`]).
pub fn stereographic_drop(d: Disk4) -> Result<PlanarDisk> {
    let d = normalize_desitter(d)?;
    let k = d.a - d.d;
    if k.abs() <= tol::LIGHT {
        let n = (d.b * d.b + d.c * d.c).sqrt();
        return Ok(PlanarDisk::Line { nx: -d.b / n, ny: -d.c / n, offset: -d.a / n });
    }
    let r = 1.0 / k;
    Ok(PlanarDisk::Circle { x: d.b * r, y: d.c * r, r })
}

/// An element of O⁺(1,3): preserves the Lorentz form and the time direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzMap {
    m: [[f64; 4]; 4],
}

const G: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

impl LorentzMap {
    /// Validates `mᵀ G m = G` (relative to the entry scale) and `m₀₀ > 0`.
    pub fn new(m: [[f64; 4]; 4]) -> Result<Self> {
        let scale = m.iter().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    s += m[k][i] * G[k] * m[k][j];
                }
                let want = if i == j { G[i] } else { 0.0 };
                if (s - want).abs() > tol::NORM * 10.0 * scale * scale {
                    return Err(Error::NotLorentz);
                }
            }
        }
        if m[0][0] <= 0.0 {
            return Err(Error::NotLorentz);
        }
        Ok(LorentzMap { m })
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        LorentzMap { m }
    }

    pub fn matrix(&self) -> [[f64; 4]; 4] {
        self.m
    }

    /// Spatial rotation by `angle` about a unit axis (right-hand rule).
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let n = norm3(axis);
        let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let r = [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ];
        let mut m = [[0.0; 4]; 4];
        m[0][0] = 1.0;
        for i in 0..3 {
            for j in 0..3 {
                m[i + 1][j + 1] = r[i][j];
            }
        }
        LorentzMap { m }
    }

    /// Boost with the given rapidity along a unit direction.
    pub fn boost(dir: [f64; 3], rapidity: f64) -> Self {
        let n = norm3(dir);
        if n == 0.0 || rapidity == 0.0 {
            return Self::identity();
        }
        let u = [dir[0] / n, dir[1] / n, dir[2] / n];
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        let mut m = [[0.0; 4]; 4];
        m[0][0] = ch;
        for i in 0..3 {
            m[0][i + 1] = sh * u[i];
            m[i + 1][0] = sh * u[i];
            for j in 0..3 {
                m[i + 1][j + 1] = if i == j { 1.0 } else { 0.0 } + (ch - 1.0) * u[i] * u[j];
            }
        }
        LorentzMap { m }
    }

    /// Boost by rapidity vector `u` (direction and magnitude).
    pub fn boost_vec(u: [f64; 3]) -> Self {
        Self::boost(u, norm3(u))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LorentzMap) -> Self {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = (0..4).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        LorentzMap { m }
    }

    /// `G mᵀ G`.
    pub fn inverse(&self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = G[i] * self.m[j][i] * G[j];
            }
        }
        LorentzMap { m }
    }

    pub fn apply(&self, d: Disk4) -> Disk4 {
        let v = d.to_array();
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|k| self.m[i][k] * v[k]).sum();
        }
        Disk4::from_array(out)
    }

    /// Action on points of the sphere (lightlike rays with `t = 1`).
    pub fn apply_point(&self, p: SpherePoint) -> SpherePoint {
        let v = self.apply(Disk4::new(1.0, p.x, p.y, p.z));
        SpherePoint::from_vec([v.b / v.a, v.c / v.a, v.d / v.a])
    }
}

pub fn apply_lorentz(m: &LorentzMap, d: Disk4) -> Disk4 {
    m.apply(d)
}

/// Basis of the Lorentz algebra: rotations about x, y, z then boosts along
/// x, y, z. Each `X` satisfies `Xᵀ G + G X = 0`.
pub fn lorentz_generators() -> [[[f64; 4]; 4]; 6] {
    let mut gens = [[[0.0; 4]; 4]; 6];
    // Rotation about axis k mixes the other two spatial coordinates.
    for (k, (i, j)) in [(2usize, 3usize), (3, 1), (1, 2)].into_iter().enumerate() {
        gens[k][i][j] = -1.0;
        gens[k][j][i] = 1.0;
    }
    for k in 0..3 {
        gens[3 + k][0][k + 1] = 1.0;
        gens[3 + k][k + 1][0] = 1.0;
    }
    gens
}

pub fn apply_generator(x: &[[f64; 4]; 4], d: Disk4) -> Disk4 {
    let v = d.to_array();
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|k| x[i][k] * v[k]).sum();
    }
    Disk4::from_array(out)
}

/// All de Sitter-normalized disks `D'` with spatial coordinates `(b', c', ·)`
/// and `<D, D'> = δ`. At most two exist; a double root is reported once.
///
/// The constraints are a line `a a' - d d' = δ + b b' + c c'` and the
/// hyperbola `a'² - d'² = b'² + c'² - 1` in the `(a', d')` plane.
pub fn solve_disk_given_bc(d: Disk4, delta: f64, b1: f64, c1: f64) -> Vec<Disk4> {
    let k = delta + d.b * b1 + d.c * c1;
    let h = b1 * b1 + c1 * c1 - 1.0;
    let nn = d.a * d.a + d.d * d.d;
    if nn == 0.0 {
        return Vec::new();
    }
    // Line: p0 + t * (d, a), with p0 the foot of the normal (a, -d).
    let p0 = [k * d.a / nn, -k * d.d / nn];
    let dir = [d.d, d.a];
    // (p0a + t da)² - (p0d + t dd)² = h
    let qa = dir[0] * dir[0] - dir[1] * dir[1];
    let qb = 2.0 * (p0[0] * dir[0] - p0[1] * dir[1]);
    let qc = p0[0] * p0[0] - p0[1] * p0[1] - h;
    let mut ts = Vec::new();
    let scale = qa.abs().max(qb.abs()).max(qc.abs()).max(1e-300);
    if qa.abs() <= 1e-14 * scale {
        if qb.abs() > 1e-14 * scale {
            ts.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        let dtol = 1e-12 * (qb * qb).max((4.0 * qa * qc).abs()).max(1e-300);
        if disc < -dtol {
            return Vec::new();
        }
        if disc.abs() <= dtol {
            ts.push(-qb / (2.0 * qa));
        } else {
            let sq = disc.sqrt();
            // Stable quadratic roots.
            let q = -0.5 * (qb + qb.signum() * sq);
            let q = if q == 0.0 { -0.5 * sq } else { q };
            ts.push(q / qa);
            if q != 0.0 {
                ts.push(qc / q);
            }
        }
    }
    let mut out: Vec<Disk4> = Vec::new();
    for t in ts {
        let cand = Disk4::new(p0[0] + t * dir[0], b1, c1, p0[1] + t * dir[1]);
        if cand.spacelike_norm2() <= 0.0 {
            continue;
        }
        let norm_ok = (lorentz_inner(cand, cand) + 1.0).abs() <= 1e-8;
        let dist_ok = (lorentz_inner(d, cand) - delta).abs() <= 1e-8;
        let dup = out.iter().any(|o| (o.a - cand.a).abs() + (o.d - cand.d).abs() <= 1e-9);
        if norm_ok && dist_ok && !dup {
            out.push(cand);
        }
    }
    out
}

/// Overlap angle `arccos d` for a shallow inversive distance.
pub fn overlap_angle(d: f64) -> f64 {
    d.clamp(-1.0, 1.0).acos()
}

pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
