mod common;

use std::f64::consts::PI;

use common::*;
use katflow::geom::{
    coplanarity_det, det_tolerance, inversive_distance, inversive_distance_planar, lorentz_inner, normalize_desitter,
    orthodisk, spherical_center_radius, stereographic_lift, Disk4, LorentzMap, PlanarDisk,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn planar_circle() -> impl Strategy<Value = PlanarDisk> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.05..2.0f64).prop_map(|(x, y, r)| PlanarDisk::circle(x, y, r))
}

fn planar_line() -> impl Strategy<Value = PlanarDisk> {
    (0.0..2.0 * PI, -2.0..2.0f64).prop_map(|(t, h)| PlanarDisk::Line { nx: t.cos(), ny: t.sin(), offset: h })
}

fn planar_disk() -> impl Strategy<Value = PlanarDisk> {
    prop_oneof![4 => planar_circle(), 1 => planar_line()]
}

fn disk4() -> impl Strategy<Value = Disk4> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.05..3.0f64).prop_filter_map("center", |(x, y, z, rho)| {
        let n = (x * x + y * y + z * z).sqrt();
        (n > 0.1).then(|| cap([x, y, z], rho))
    })
}

fn lorentz() -> impl Strategy<Value = LorentzMap> {
    (any::<u64>(), 0.0..2.0f64).prop_map(|(s, r)| random_lorentz(&mut ChaCha8Rng::seed_from_u64(s), r))
}

/// Plane formula written out independently of the library.
fn plane_oracle(p: PlanarDisk, q: PlanarDisk) -> f64 {
    match (p, q) {
        (PlanarDisk::Circle { x: x1, y: y1, r: r1 }, PlanarDisk::Circle { x: x2, y: y2, r: r2 }) => {
            let d2 = (x1 - x2).powi(2) + (y1 - y2).powi(2);
            (d2 - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)
        }
        (PlanarDisk::Circle { x, y, r }, PlanarDisk::Line { nx, ny, offset })
        | (PlanarDisk::Line { nx, ny, offset }, PlanarDisk::Circle { x, y, r }) => (nx * x + ny * y - offset) / r,
        (PlanarDisk::Line { nx: a, ny: b, .. }, PlanarDisk::Line { nx: c, ny: d, .. }) => -(a * c + b * d),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lift_preserves_inversive_distance(p in planar_disk(), q in planar_disk()) {
        let want = plane_oracle(p, q);
        prop_assume!(want.abs() < 1e3);
        prop_assert!((inversive_distance_planar(p, q) - want).abs() <= 1e-10 * want.abs().max(1.0));
        let got = inversive_distance(stereographic_lift(p), stereographic_lift(q)).unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn spherical_formula_matches(c1 in disk4(), c2 in disk4()) {
        let (p1, r1) = spherical_center_radius(c1).unwrap();
        let (p2, r2) = spherical_center_radius(c2).unwrap();
        let th = p1.angle_to(p2);
        let want = (r1.cos() * r2.cos() - th.cos()) / (r1.sin() * r2.sin());
        let got = inversive_distance(c1, c2).unwrap();
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn lorentz_maps_preserve_inversive_distance(m in lorentz(), d1 in disk4(), d2 in disk4()) {
        let before = inversive_distance(d1, d2).unwrap();
        let after = inversive_distance(m.apply(d1), m.apply(d2)).unwrap();
        prop_assert!((before - after).abs() <= 1e-10 * before.abs().max(1.0));
    }

    #[test]
    fn orthodisk_is_orthogonal(d1 in disk4(), d2 in disk4(), d3 in disk4()) {
        let o = orthodisk(d1, d2, d3).unwrap().coords;
        let scale = o.euclid_norm();
        prop_assume!(scale > 1e-3);
        for d in [d1, d2, d3] {
            prop_assert!(lorentz_inner(o, d).abs() / (scale * d.euclid_norm()) < 1e-12);
        }
        prop_assert!(coplanarity_det([d1, d2, d3], d1).unwrap().abs() <= det_tolerance([d1, d2, d3], d1));
    }

    #[test]
    fn scaling_and_sign(d1 in disk4(), d2 in disk4(), s in 1e-3..1e3f64) {
        let d = inversive_distance(d1, d2).unwrap();
        prop_assert!((inversive_distance(d1.scale(s), d2).unwrap() - d).abs() <= 1e-10 * d.abs().max(1.0));
        prop_assert_eq!(inversive_distance(-d1, d2).unwrap(), -d);
        let n = normalize_desitter(d1.scale(s)).unwrap();
        prop_assert!((lorentz_inner(n, n) + 1.0).abs() < 1e-12);
    }
}

/// Three half-planes bounded by lines through one point with pairwise
/// overlaps at most a right angle; moved by a random Lorentz map.
#[test]
fn parabolic_triples_have_angle_sum_pi() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut done = 0;
    while done < 500 {
        let (a, b) = (rng.random_range(PI / 2.0..PI), rng.random_range(PI / 2.0..PI));
        let g = 2.0 * PI - a - b;
        if !(PI / 2.0..=PI).contains(&g) {
            continue;
        }
        let t0 = rng.random_range(0.0..2.0 * PI);
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let m = random_lorentz(&mut rng, 1.5);
        let disks: Vec<Disk4> = [t0, t0 + a, t0 + a + b]
            .iter()
            .map(|&t| {
                let (nx, ny) = (t.cos(), t.sin());
                m.apply(stereographic_lift(PlanarDisk::Line { nx, ny, offset: nx * p[0] + ny * p[1] }))
            })
            .collect();
        let mut sum = 0.0;
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let d = inversive_distance(disks[i], disks[j]).unwrap();
            assert!((-1e-12..=1.0 + 1e-12).contains(&d));
            sum += d.clamp(-1.0, 1.0).acos();
        }
        assert!((sum - PI).abs() < 1e-8, "angle sum {sum}");
        done += 1;
    }
}

/// Five disks whose boundaries pass through one point never have all
/// pairwise overlaps shallow.
#[test]
fn no_five_shallow_disks_through_a_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut least = f64::INFINITY;
    for _ in 0..20_000 {
        let q = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let m = random_lorentz(&mut rng, 1.0);
        let disks: Vec<Disk4> = (0..5)
            .map(|_| {
                let t = rng.random_range(0.0..2.0 * PI);
                let (nx, ny) = (t.cos(), t.sin());
                m.apply(stereographic_lift(PlanarDisk::Line { nx, ny, offset: nx * q[0] + ny * q[1] }))
            })
            .collect();
        let mut worst: f64 = 0.0;
        for i in 0..5 {
            for j in i + 1..5 {
                let d = inversive_distance(disks[i], disks[j]).unwrap();
                worst = worst.max(-d).max(d - 1.0);
            }
        }
        least = least.min(worst);
    }
    assert!(least > 0.0, "smallest violation {least}");
}
