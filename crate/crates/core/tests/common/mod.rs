#![allow(dead_code)]

use katflow::geom::{norm3, Disk4, LorentzMap};
use katflow::{bootstrap, solve, Configuration, EdgeWeights, FlowOptions, TriangulatedPolyhedron};
use rand::Rng;

/// Normalized disk with the given center and spherical radius.
pub fn cap(center: [f64; 3], rho: f64) -> Disk4 {
    let n = norm3(center);
    let k = 1.0 / (rho.sin() * n);
    Disk4::new(rho.cos() / rho.sin(), k * center[0], k * center[1], k * center[2])
}

pub fn unit_vector(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = norm3(v);
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

pub fn random_cap(rng: &mut impl Rng) -> Disk4 {
    cap(unit_vector(rng), rng.random_range(0.05..3.0))
}

pub fn random_rotation(rng: &mut impl Rng) -> LorentzMap {
    LorentzMap::rotation(unit_vector(rng), rng.random_range(0.0..std::f64::consts::TAU))
}

/// Random restricted Lorentz map with rapidity at most `max_rapidity`.
pub fn random_lorentz(rng: &mut impl Rng, max_rapidity: f64) -> LorentzMap {
    let b = LorentzMap::boost(unit_vector(rng), rng.random_range(0.0..max_rapidity));
    random_rotation(rng).compose(&b)
}

/// Point of the sphere at angle `theta` from `c`, in direction `phi` around it.
pub fn point_at(c: [f64; 3], theta: f64, phi: f64) -> [f64; 3] {
    let helper = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = katflow::geom::cross(c, helper);
    let nu = norm3(u);
    let u = [u[0] / nu, u[1] / nu, u[2] / nu];
    let v = katflow::geom::cross(c, u);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    std::array::from_fn(|k| ct * c[k] + st * (cp * u[k] + sp * v[k]))
}

/// Signed value that is negative exactly on the interior of the disk.
pub fn side(d: Disk4, q: [f64; 3]) -> f64 {
    d.a - d.b * q[0] - d.c * q[1] - d.d * q[2]
}

/// Solved configuration for the given targets, starting from the tangency
/// packing.
pub fn solved(p: &TriangulatedPolyhedron, w: &EdgeWeights) -> Configuration {
    let cfg = bootstrap(p).unwrap();
    solve(p, w, &cfg, &FlowOptions::default()).unwrap().cfg
}
