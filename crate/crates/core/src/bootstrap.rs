//! Starting tangency packing on the sphere for a given complex.
//!
//! One face is sent to infinity: its three disks get radius 1 and every
//! other disk's radius is found by Newton's method on the interior angle
//! sums. The planar layout is lifted to the sphere and boosted so that the
//! largest disk is as small as possible.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::checks::Configuration;
use crate::complex::TriangulatedPolyhedron;
use crate::error::{Error, Result};
use crate::geom::{inversive_distance_planar, stereographic_lift, Disk4, LorentzMap, PlanarDisk};
use crate::rigidity::{assemble_rigidity, measurement};
use crate::tol;

#[derive(Clone, Debug, PartialEq)]
pub struct PlanarPacking {
    pub disks: Vec<PlanarDisk>,
    /// Face whose interstice contains the point at infinity.
    pub outer_face: [usize; 3],
}

/// Angle at the vertex of radius `rv` in the triangle of centers of three
/// mutually tangent circles.
fn corner_angle(rv: f64, ra: f64, rb: f64) -> f64 {
    2.0 * ((ra * rb / ((rv + ra) * (rv + rb))).sqrt()).asin()
}

/// First face around a highest-degree vertex.
pub fn default_outer_face(p: &TriangulatedPolyhedron) -> [usize; 3] {
    let hub = (0..p.n()).max_by_key(|&v| (p.degree(v), std::cmp::Reverse(v))).unwrap();
    *p.faces().iter().find(|f| f.contains(&hub)).unwrap()
}

/// Radii with the outer face's disks fixed at 1 and angle sums `2π` at every
/// other vertex.
pub fn tangency_radii(p: &TriangulatedPolyhedron, outer: [usize; 3]) -> Result<Vec<f64>> {
    let n = p.n();
    let mut slot = vec![usize::MAX; n];
    let interior: Vec<usize> = (0..n).filter(|v| !outer.contains(v)).collect();
    for (s, &v) in interior.iter().enumerate() {
        slot[v] = s;
    }
    let k = interior.len();
    let mut u = vec![0.0f64; n];

    let residual = |u: &[f64]| -> DVector<f64> {
        let r: Vec<f64> = u.iter().map(|x| x.exp()).collect();
        let mut f = DVector::from_element(k, -2.0 * PI);
        for t in p.faces() {
            for q in 0..3 {
                let (v, a, b) = (t[q], t[(q + 1) % 3], t[(q + 2) % 3]);
                if slot[v] != usize::MAX {
                    f[slot[v]] += corner_angle(r[v], r[a], r[b]);
                }
            }
        }
        f
    };

    let mut f = residual(&u);
    let mut iters = 0;
    // A few extra steps past the tolerance tighten the radii of tiny disks.
    let mut polish = 0;
    loop {
        if f.amax() < 1e-12 {
            polish += 1;
            if polish > 3 {
                break;
            }
        }
        iters += 1;
        if iters > 100_000 {
            return Err(Error::NonConvergent(format!("angle sums off by {:e}", f.amax())));
        }
        let r: Vec<f64> = u.iter().map(|x| x.exp()).collect();
        let mut jac = DMatrix::zeros(k, k);
        for t in p.faces() {
            let h = (r[t[0]] * r[t[1]] * r[t[2]] / (r[t[0]] + r[t[1]] + r[t[2]])).sqrt();
            for q in 0..3 {
                let (v, a, b) = (t[q], t[(q + 1) % 3], t[(q + 2) % 3]);
                if slot[v] == usize::MAX {
                    continue;
                }
                for w in [a, b] {
                    let g = h / (r[v] + r[w]);
                    jac[(slot[v], slot[v])] -= g;
                    if slot[w] != usize::MAX {
                        jac[(slot[v], slot[w])] += g;
                    }
                }
            }
        }
        let step = jac.lu().solve(&(-&f)).ok_or_else(|| Error::NonConvergent("singular angle Jacobian".into()))?;
        let f0 = f.norm();
        let mut t = 1.0;
        loop {
            let mut trial = u.clone();
            for (s, &v) in interior.iter().enumerate() {
                trial[v] += t * step[s];
            }
            let ft = residual(&trial);
            if ft.norm() <= (1.0 - 1e-4 * t) * f0 || t < 1e-12 {
                if t < 1e-12 && ft.norm() >= f0 {
                    if polish > 0 {
                        return Ok(u.into_iter().map(f64::exp).collect());
                    }
                    return Err(Error::NonConvergent(format!("line search stalled at {:e}", f.amax())));
                }
                u = trial;
                f = ft;
                break;
            }
            t *= 0.5;
        }
    }
    Ok(u.into_iter().map(f64::exp).collect())
}

/// Planar tangency packing realizing the complex.
pub fn tangency_pack(p: &TriangulatedPolyhedron) -> Result<PlanarPacking> {
    tangency_pack_with_outer(p, default_outer_face(p))
}

pub fn tangency_pack_with_outer(p: &TriangulatedPolyhedron, outer: [usize; 3]) -> Result<PlanarPacking> {
    let r = tangency_radii(p, outer)?;
    let n = p.n();
    let mut pos: Vec<Option<[f64; 2]>> = vec![None; n];
    // The outer face is drawn clockwise so every other face is counterclockwise.
    let [o0, o1, o2] = outer;
    pos[o0] = Some([0.0, 0.0]);
    pos[o1] = Some([r[o0] + r[o1], 0.0]);
    let a0 = corner_angle(r[o0], r[o1], r[o2]);
    pos[o2] = Some([(r[o0] + r[o2]) * a0.cos(), -(r[o0] + r[o2]) * a0.sin()]);
    let mut placed = 3;
    while placed < n {
        let before = placed;
        for t in p.faces() {
            for q in 0..3 {
                let (a, b, x) = (t[q], t[(q + 1) % 3], t[(q + 2) % 3]);
                if let (Some(pa), Some(pb), None) = (pos[a], pos[b], pos[x]) {
                    // Intersect the circles of radius r_a + r_x and r_b + r_x,
                    // taking the point on the left of a -> b.
                    let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                    let len = dx.hypot(dy);
                    let (la, lb) = (r[a] + r[x], r[b] + r[x]);
                    let along = (la * la - lb * lb + len * len) / (2.0 * len);
                    let across = (la * la - along * along).max(0.0).sqrt();
                    let (ux, uy) = (dx / len, dy / len);
                    pos[x] = Some([pa[0] + along * ux - across * uy, pa[1] + along * uy + across * ux]);
                    placed += 1;
                }
            }
        }
        if placed == before {
            return Err(Error::NonConvergent("layout did not reach every vertex".into()));
        }
    }
    let pos: Vec<[f64; 2]> = pos.into_iter().map(Option::unwrap).collect();

    // Center the picture and fit it inside the disk of radius 0.9.
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in 0..n {
        for k in 0..2 {
            lo[k] = lo[k].min(pos[v][k] - r[v]);
            hi[k] = hi[k].max(pos[v][k] + r[v]);
        }
    }
    let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let extent = (0..n).map(|v| (pos[v][0] - mid[0]).hypot(pos[v][1] - mid[1]) + r[v]).fold(0.0, f64::max);
    let s = 0.9 / extent;
    let disks: Vec<PlanarDisk> =
        (0..n).map(|v| PlanarDisk::circle(s * (pos[v][0] - mid[0]), s * (pos[v][1] - mid[1]), s * r[v])).collect();

    // Rounding in the planar formula grows like 1 / (r_i r_j) for coordinates
    // of unit size.
    for &(i, j) in p.edges() {
        let d = inversive_distance_planar(disks[i], disks[j]);
        let scale = (1.0 / (s * s * r[i] * r[j])).max(1.0);
        if (d - 1.0).abs() > tol::TANGENCY * scale {
            return Err(Error::NonConvergent(format!("edge ({i}, {j}) off tangency by {:e}", d - 1.0)));
        }
    }
    Ok(PlanarPacking { disks, outer_face: outer })
}

/// Lifts every planar disk to the sphere without normalizing the picture.
pub fn lift(pp: &PlanarPacking) -> Configuration {
    Configuration::new(pp.disks.iter().map(|&d| stereographic_lift(d)).collect())
}

/// Largest of `a` and `1 / a` over all disks; infinite once a disk reaches a
/// hemisphere.
fn spread(cfg: &[Disk4], m: &LorentzMap) -> f64 {
    cfg.iter()
        .map(|&d| {
            let a = m.apply(d).a;
            if a > 0.0 {
                a.max(1.0 / a)
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Boost balancing the smallest disk against the largest: minimizes the
/// largest of `a` and `1 / a`. The planar layout lifts into one hemisphere so
/// the search starts, and stays, with every disk strictly proper.
/// Found by a deterministic pattern search over rapidity vectors.
pub fn balancing_boost(cfg: &Configuration) -> LorentzMap {
    let mut dirs = Vec::new();
    for x in -1i32..=1 {
        for y in -1i32..=1 {
            for z in -1i32..=1 {
                if (x, y, z) != (0, 0, 0) {
                    let n = ((x * x + y * y + z * z) as f64).sqrt();
                    dirs.push([x as f64 / n, y as f64 / n, z as f64 / n]);
                }
            }
        }
    }
    let mut u = [0.0f64; 3];
    let mut best = spread(&cfg.disks, &LorentzMap::identity());
    let mut step = 1.0;
    let mut iters = 0;
    while step > 1e-10 && iters < 100_000 {
        iters += 1;
        let mut improved = None;
        for d in &dirs {
            let cand = [u[0] + step * d[0], u[1] + step * d[1], u[2] + step * d[2]];
            let v = spread(&cfg.disks, &LorentzMap::boost_vec(cand));
            if v < best - 1e-15 && improved.is_none_or(|(b, _)| v < b) {
                improved = Some((v, cand));
            }
        }
        match improved {
            Some((v, cand)) => {
                best = v;
                u = cand;
            }
            None => step *= 0.5,
        }
    }
    LorentzMap::boost_vec(u)
}

/// Lifted, boosted and renormalized packing; every disk strictly proper.
pub fn lift_and_normalize(pp: &PlanarPacking) -> Result<Configuration> {
    let lifted = lift(pp);
    let m = balancing_boost(&lifted);
    let cfg = Configuration::normalized(lifted.transform(&m).disks).map_err(|_| Error::NormalizationFailed)?;
    if cfg.disks.iter().any(|d| d.a <= 0.0) {
        return Err(Error::NormalizationFailed);
    }
    Ok(cfg)
}

/// Gauss-Newton steps (minimum-norm, through the SVD of the rigidity matrix)
/// pulling every edge back to tangency after the boost amplified rounding.
fn polish(p: &TriangulatedPolyhedron, cfg: Configuration) -> Result<Configuration> {
    let m = p.num_edges();
    let mut want = DVector::from_element(m + p.n(), -0.5);
    want.rows_mut(0, m).fill(1.0);
    let mut cfg = cfg;
    let mut r = measurement(p, &cfg) - &want;
    for _ in 0..12 {
        if r.amax() < 1e-14 {
            break;
        }
        let j = assemble_rigidity(p, &cfg);
        let Ok(dx) = j.mat.svd(true, true).solve(&r, 1e-12) else { break };
        let mut t = 1.0;
        let mut next = None;
        while t > 1e-3 {
            let moved = cfg
                .disks
                .iter()
                .enumerate()
                .map(|(v, d)| {
                    let s = |k: usize| t * dx[4 * v + k];
                    Disk4::new(d.a - s(0), d.b - s(1), d.c - s(2), d.d - s(3))
                })
                .collect();
            if let Ok(c) = Configuration::normalized(moved) {
                let rc = measurement(p, &c) - &want;
                if rc.amax() < r.amax() {
                    next = Some((c, rc));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((c, rc)) = next else { break };
        cfg = c;
        r = rc;
    }
    Ok(cfg)
}

/// Tangency packing on the sphere for `p`.
pub fn bootstrap(p: &TriangulatedPolyhedron) -> Result<Configuration> {
    let cfg = polish(p, lift_and_normalize(&tangency_pack(p)?)?)?;
    if cfg.disks.iter().any(|d| d.a <= 0.0) {
        return Err(Error::NormalizationFailed);
    }
    for &(i, j) in p.edges() {
        let d = cfg.inversive(i, j);
        if (d - 1.0).abs() > tol::TANGENCY * (cfg.disks[i].a * cfg.disks[j].a).max(1.0) {
            return Err(Error::NonConvergent(format!("edge ({i}, {j}) off tangency by {:e} on the sphere", d - 1.0)));
        }
    }
    Ok(cfg)
}
