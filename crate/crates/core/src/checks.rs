//! Geometric predicates over a configuration realizing a complex.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::complex::{four_cycles, EdgeWeights, TriangulatedPolyhedron};
use crate::error::{Error, Result};
use crate::geom::{
    conical_cap, cross, det3, det_tolerance, dot3, lorentz_inner, norm3, normalize_desitter, orthodisk,
    spherical_center_radius, ConicalCap, Disk4, LorentzMap,
};
use crate::tol;

/// One disk per vertex, in de Sitter coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    pub disks: Vec<Disk4>,
}

impl Configuration {
    /// Wraps disks as given. Callers are responsible for normalization.
    pub fn new(disks: Vec<Disk4>) -> Self {
        Configuration { disks }
    }

    /// Normalizes every disk, failing on point or imaginary ones.
    pub fn normalized(disks: Vec<Disk4>) -> Result<Self> {
        Ok(Configuration { disks: disks.into_iter().map(normalize_desitter).collect::<Result<_>>()? })
    }

    pub fn len(&self) -> usize {
        self.disks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disks.is_empty()
    }

    /// `<D_i, D_j>`, the inversive distance when both disks are normalized.
    pub fn inversive(&self, i: usize, j: usize) -> f64 {
        lorentz_inner(self.disks[i], self.disks[j])
    }

    /// Largest `|<D,D> + 1|` over all disks.
    pub fn max_norm_error(&self) -> f64 {
        self.disks.iter().map(|&d| (lorentz_inner(d, d) + 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn transform(&self, m: &LorentzMap) -> Configuration {
        Configuration { disks: self.disks.iter().map(|&d| m.apply(d)).collect() }
    }

    pub fn centers(&self) -> Result<Vec<[f64; 3]>> {
        self.disks.iter().map(|&d| spherical_center_radius(d).map(|(c, _)| c.to_array())).collect()
    }

    /// Achieved inversive distance on every edge.
    pub fn edge_values(&self, p: &TriangulatedPolyhedron) -> Vec<f64> {
        p.edges().iter().map(|&(i, j)| self.inversive(i, j)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeodesicWitness {
    Antipodal { edge: (usize, usize) },
    VertexOnArc { vertex: usize, edge: (usize, usize) },
    Crossing { edges: [(usize, usize); 2] },
    Orientation { face: [usize; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicResult {
    pub geodesic: bool,
    pub witness: Option<GeodesicWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexWitness {
    pub face: [usize; 3],
    pub vertex: usize,
    pub det: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexResult {
    pub convex: bool,
    pub strictly_convex: bool,
    pub witness: Option<ConvexWitness>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShallowMode {
    /// Edge values in `[0, 1]`.
    Shallow,
    /// Additionally no 4-cycle with all edge values zero.
    Strict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShallowWitness {
    Edge { edge: (usize, usize), value: f64 },
    ZeroCycle { cycle: [usize; 4] },
    BelowTarget { edge: (usize, usize), value: f64, target: f64 },
    NonEdge { pair: (usize, usize), value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShallowResult {
    pub ok: bool,
    pub witness: Option<ShallowWitness>,
}

/// Aggregated monitor outcome for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub geodesic: bool,
    pub geodesic_witness: Option<GeodesicWitness>,
    pub convex: bool,
    pub strictly_convex: bool,
    pub convex_witness: Option<ConvexWitness>,
    pub shallow: bool,
    pub shallow_witness: Option<ShallowWitness>,
    pub nonedge_separation: bool,
    pub nonedge_witness: Option<ShallowWitness>,
    pub min_spherical_radius: f64,
}

impl MonitorReport {
    pub fn passed(&self) -> bool {
        self.geodesic && self.strictly_convex && self.shallow && self.nonedge_separation
    }
}

fn on_arc(p: [f64; 3], q: [f64; 3], v: [f64; 3]) -> bool {
    let n = cross(p, q);
    let nn = norm3(n);
    dot3(n, v).abs() <= tol::DET * nn.max(tol::DET) && dot3(cross(p, v), n) > 0.0 && dot3(cross(v, q), n) > 0.0
}

fn sign(x: f64) -> i8 {
    if x > tol::DET {
        1
    } else if x < -tol::DET {
        -1
    } else {
        0
    }
}

/// Proper crossing of minor arcs `ab` and `cd` (no touching).
fn arcs_cross(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> bool {
    let acb = -sign(det3([a, b, c]));
    let bda = sign(det3([a, b, d]));
    if acb == 0 || acb != bda {
        return false;
    }
    let cbd = -sign(det3([c, d, b]));
    if cbd != acb {
        return false;
    }
    sign(det3([c, d, a])) == acb
}

/// Whether the centers joined by minor arcs triangulate the sphere.
pub fn is_geodesic(p: &TriangulatedPolyhedron, cfg: &Configuration) -> Result<GeodesicResult> {
    let c = cfg.centers()?;
    for &(i, j) in p.edges() {
        let s = [c[i][0] + c[j][0], c[i][1] + c[j][1], c[i][2] + c[j][2]];
        if norm3(s) <= 1e-9 {
            return Err(Error::AntipodalEdge(i, j));
        }
    }
    let fail = |w| Ok(GeodesicResult { geodesic: false, witness: Some(w) });
    for v in 0..p.n() {
        for &(i, j) in p.edges() {
            if v != i && v != j && on_arc(c[i], c[j], c[v]) {
                return fail(GeodesicWitness::VertexOnArc { vertex: v, edge: (i, j) });
            }
        }
    }
    let edges = p.edges();
    for (x, &(i, j)) in edges.iter().enumerate() {
        for &(k, l) in &edges[x + 1..] {
            if i == k || i == l || j == k || j == l {
                continue;
            }
            if arcs_cross(c[i], c[j], c[k], c[l]) {
                return fail(GeodesicWitness::Crossing { edges: [(i, j), (k, l)] });
            }
        }
    }
    let mut orient = 0;
    for f in p.faces() {
        let s = sign(det3([c[f[0]], c[f[1]], c[f[2]]]));
        if s == 0 || (orient != 0 && s != orient) {
            return fail(GeodesicWitness::Orientation { face: *f });
        }
        orient = s;
    }
    Ok(GeodesicResult { geodesic: true, witness: None })
}

/// No face's c-plane separates the other disks (strictly: none lies on it).
pub fn is_convex(p: &TriangulatedPolyhedron, cfg: &Configuration) -> Result<ConvexResult> {
    let d = &cfg.disks;
    let mut strict_witness: Option<ConvexWitness> = None;
    for f in p.faces() {
        let tri = [d[f[0]], d[f[1]], d[f[2]]];
        let o = orthodisk(tri[0], tri[1], tri[2])?.coords;
        let mut face_sign = 0.0;
        for v in 0..p.n() {
            if f.contains(&v) {
                continue;
            }
            let det = lorentz_inner(o, d[v]);
            let t = det_tolerance(tri, d[v]);
            if det.abs() <= t {
                if strict_witness.is_none() {
                    strict_witness = Some(ConvexWitness { face: *f, vertex: v, det });
                }
                continue;
            }
            if face_sign == 0.0 {
                face_sign = det.signum();
            } else if det.signum() != face_sign {
                return Ok(ConvexResult {
                    convex: false,
                    strictly_convex: false,
                    witness: Some(ConvexWitness { face: *f, vertex: v, det }),
                });
            }
        }
    }
    Ok(ConvexResult { convex: true, strictly_convex: strict_witness.is_none(), witness: strict_witness })
}

fn edge_bounds(
    p: &TriangulatedPolyhedron,
    cfg: &Configuration,
    mode: ShallowMode,
    weights: Option<&EdgeWeights>,
    tol: f64,
) -> Option<ShallowWitness> {
    for &(i, j) in p.edges() {
        let value = cfg.inversive(i, j);
        if !(-tol..=1.0 + tol).contains(&value) {
            return Some(ShallowWitness::Edge { edge: (i, j), value });
        }
    }
    if mode == ShallowMode::Strict {
        for c in four_cycles(p) {
            if (0..4).all(|r| cfg.inversive(c[r], c[(r + 1) % 4]).abs() <= tol) {
                return Some(ShallowWitness::ZeroCycle { cycle: c });
            }
        }
    }
    if let Some(w) = weights {
        for (e, &(i, j)) in p.edges().iter().enumerate() {
            let value = cfg.inversive(i, j);
            if value < w.get(e) - tol {
                return Some(ShallowWitness::BelowTarget { edge: (i, j), value, target: w.get(e) });
            }
        }
    }
    None
}

fn nonedge_bounds(p: &TriangulatedPolyhedron, cfg: &Configuration, tol: f64) -> Option<ShallowWitness> {
    for i in 0..p.n() {
        for j in i + 1..p.n() {
            if p.has_edge(i, j) {
                continue;
            }
            let value = cfg.inversive(i, j);
            if value < 1.0 - tol {
                return Some(ShallowWitness::NonEdge { pair: (i, j), value });
            }
        }
    }
    None
}

/// Edge values in the shallow range, non-adjacent disks at least tangent,
/// and, when `weights` is given, every edge at or above its target.
pub fn shallow_bounds_check(
    p: &TriangulatedPolyhedron,
    cfg: &Configuration,
    mode: ShallowMode,
    weights: Option<&EdgeWeights>,
    tol: f64,
) -> ShallowResult {
    let witness = edge_bounds(p, cfg, mode, weights, tol).or_else(|| nonedge_bounds(p, cfg, tol));
    ShallowResult { ok: witness.is_none(), witness }
}

/// Smallest distance of any disk's radius from 0 or π.
pub fn min_radius(cfg: &Configuration) -> Result<f64> {
    let mut m = f64::INFINITY;
    for &d in &cfg.disks {
        let (_, r) = spherical_center_radius(d)?;
        m = m.min(r.min(PI - r));
    }
    Ok(m)
}

/// Euclidean convexity of the conical caps; false if any disk is not
/// strictly proper.
pub fn cap_polyhedron_convex(p: &TriangulatedPolyhedron, cfg: &Configuration) -> Result<bool> {
    let mut pts = Vec::with_capacity(cfg.len());
    for &d in &cfg.disks {
        if d.a <= tol::LIGHT {
            return Ok(false);
        }
        match conical_cap(d)? {
            ConicalCap::Finite(x) => pts.push(x),
            ConicalCap::AtInfinity(_) => return Ok(false),
        }
    }
    for f in p.faces() {
        let [a, b, c] = [pts[f[0]], pts[f[1]], pts[f[2]]];
        let sub = |x: [f64; 3], y: [f64; 3]| [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
        let n = cross(sub(b, a), sub(c, a));
        let scale = norm3(n);
        let mut s = 0.0;
        for v in 0..p.n() {
            if f.contains(&v) {
                continue;
            }
            let h = dot3(n, sub(pts[v], a)) / scale;
            if h.abs() <= tol::DET {
                return Ok(false);
            }
            if s == 0.0 {
                s = h.signum();
            } else if h.signum() != s {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Runs every predicate. Antipodal edges count as a geodesy failure.
pub fn monitor(
    p: &TriangulatedPolyhedron,
    cfg: &Configuration,
    weights: Option<&EdgeWeights>,
    mode: ShallowMode,
    tol: f64,
) -> Result<MonitorReport> {
    let geo = match is_geodesic(p, cfg) {
        Ok(g) => g,
        Err(Error::AntipodalEdge(i, j)) => {
            GeodesicResult { geodesic: false, witness: Some(GeodesicWitness::Antipodal { edge: (i, j) }) }
        }
        Err(e) => return Err(e),
    };
    let conv = is_convex(p, cfg)?;
    let shallow_witness = edge_bounds(p, cfg, mode, weights, tol);
    let nonedge_witness = nonedge_bounds(p, cfg, tol);
    Ok(MonitorReport {
        geodesic: geo.geodesic,
        geodesic_witness: geo.witness,
        convex: conv.convex,
        strictly_convex: conv.strictly_convex,
        convex_witness: conv.witness,
        shallow: shallow_witness.is_none(),
        shallow_witness,
        nonedge_separation: nonedge_witness.is_none(),
        nonedge_witness,
        min_spherical_radius: min_radius(cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use approx::assert_abs_diff_eq;

    /// Six caps of radius π/4 centered on the coordinate axes, in the
    /// octahedron's vertex order.
    pub(crate) fn octahedral_packing() -> Configuration {
        let axes = [[0., 0., 1.], [1., 0., 0.], [0., 1., 0.], [-1., 0., 0.], [0., -1., 0.], [0., 0., -1.]];
        // cos ρ = a / |v| with ρ = π/4 and |v|² - a² = 1 gives a = 1, |v| = √2.
        let s = 2f64.sqrt();
        Configuration::new(axes.iter().map(|c| Disk4::new(1.0, s * c[0], s * c[1], s * c[2])).collect())
    }

    #[test]
    fn octahedral_packing_is_tangent() {
        let p = generators::octahedron();
        let cfg = octahedral_packing();
        assert!(cfg.max_norm_error() < 1e-15);
        for &(i, j) in p.edges() {
            assert_abs_diff_eq!(cfg.inversive(i, j), 1.0, epsilon = 1e-15);
        }
        // Antipodal caps: (cos²ρ - cos π)/sin²ρ = 3 with ρ = π/4.
        assert_abs_diff_eq!(cfg.inversive(0, 5), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn octahedral_packing_passes_everything() {
        let p = generators::octahedron();
        let cfg = octahedral_packing();
        assert!(is_geodesic(&p, &cfg).unwrap().geodesic);
        let c = is_convex(&p, &cfg).unwrap();
        assert!(c.convex && c.strictly_convex);
        assert!(cap_polyhedron_convex(&p, &cfg).unwrap());
        assert!(shallow_bounds_check(&p, &cfg, ShallowMode::Shallow, None, tol::INV).ok);
        assert!(shallow_bounds_check(&p, &cfg, ShallowMode::Strict, None, tol::INV).ok);
        let r = monitor(&p, &cfg, None, ShallowMode::Strict, 1e-10).unwrap();
        assert!(r.passed());
        assert_abs_diff_eq!(r.min_spherical_radius, PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn displaced_center_crosses() {
        let p = generators::octahedron();
        let mut cfg = octahedral_packing();
        // Vertex 1 pulled across the arc from 0 to 2.
        let u = [-1.0f64, 0.3, 0.2];
        let k = 2f64.sqrt() / norm3(u);
        cfg.disks[1] = Disk4::new(1.0, k * u[0], k * u[1], k * u[2]);
        let g = is_geodesic(&p, &cfg).unwrap();
        assert!(!g.geodesic);
        assert!(g.witness.is_some());
    }

    #[test]
    fn vertex_on_arc() {
        let p = generators::tetrahedron();
        // Vertex 3 sits on the arc between 0 and 1.
        let pts = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5f64.sqrt(), 0.5f64.sqrt(), 0.0]];
        let cfg = Configuration::new(pts.iter().map(|c| Disk4::new(2.0, 3.0 * c[0], 3.0 * c[1], 3.0 * c[2])).collect());
        let cfg = Configuration::normalized(cfg.disks).unwrap();
        let g = is_geodesic(&p, &cfg).unwrap();
        assert_eq!(g.witness, Some(GeodesicWitness::VertexOnArc { vertex: 3, edge: (0, 1) }));
    }

    #[test]
    fn antipodal_edge_is_an_error() {
        let p = generators::octahedron();
        let mut cfg = octahedral_packing();
        cfg.disks[1] = Disk4::new(1.0, 0.0, 0.0, -2f64.sqrt());
        assert!(matches!(is_geodesic(&p, &cfg), Err(Error::AntipodalEdge(0, 1))));
    }

    #[test]
    fn reflected_disk_breaks_convexity() {
        let p = generators::octahedron();
        let mut cfg = octahedral_packing();
        cfg.disks[2] = -cfg.disks[2];
        assert!(!is_convex(&p, &cfg).unwrap().convex);
        assert!(!cap_polyhedron_convex(&p, &cfg).unwrap());
    }

    #[test]
    fn tetrahedra_are_convex() {
        let p = generators::tetrahedron();
        let cfg = Configuration::normalized(vec![
            Disk4::new(0.2, 1.0, 0.1, 0.0),
            Disk4::new(0.1, -0.3, 1.0, 0.2),
            Disk4::new(-0.4, 0.0, -0.5, 1.0),
            Disk4::new(0.3, -0.6, -0.6, -0.7),
        ])
        .unwrap();
        assert!(is_convex(&p, &cfg).unwrap().convex);
    }

    #[test]
    fn growing_a_disk_breaks_the_bounds() {
        let p = generators::octahedron();
        let base = octahedral_packing();
        // Grow disk 0 about its center until an edge leaves [0, 1]; bisect for
        // the crossing radius and compare with the closed form.
        let cap = |rho: f64| Disk4::new(rho.cos() / rho.sin(), 0.0, 0.0, 1.0 / rho.sin());
        let ok = |rho: f64| {
            let mut cfg = base.clone();
            cfg.disks[0] = cap(rho);
            shallow_bounds_check(&p, &cfg, ShallowMode::Shallow, None, 1e-12).ok
        };
        assert!(ok(PI / 4.0));
        let (mut lo, mut hi) = (PI / 4.0, PI / 2.0 + 0.1);
        assert!(!ok(hi));
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Orthogonal to a π/4 cap at distance π/2: cos ρ·cos π/4 = 0 gives ρ = π/2.
        assert_abs_diff_eq!(lo, PI / 2.0, epsilon = 1e-9);
        let mut cfg = base.clone();
        cfg.disks[0] = cap(PI / 2.0 + 0.05);
        let r = shallow_bounds_check(&p, &cfg, ShallowMode::Shallow, None, 1e-12);
        assert!(matches!(r.witness, Some(ShallowWitness::Edge { edge: (0, 1), .. })));
    }

    #[test]
    fn radius_floor() {
        let hemis = Configuration::new(vec![Disk4::new(0., 1., 0., 0.), Disk4::new(0., 0., 0., 1.)]);
        assert_abs_diff_eq!(min_radius(&hemis).unwrap(), PI / 2.0, epsilon = 1e-15);
        let small = |rho: f64| Disk4::new(rho.cos() / rho.sin(), 1.0 / rho.sin(), 0.0, 0.0);
        let mut cfg = hemis.clone();
        cfg.disks.push(small(0.1));
        assert_abs_diff_eq!(min_radius(&cfg).unwrap(), 0.1, epsilon = 1e-14);
        let mut cfg = hemis;
        cfg.disks.push(small(PI - 0.05));
        assert_abs_diff_eq!(min_radius(&cfg).unwrap(), 0.05, epsilon = 1e-14);
    }
}
