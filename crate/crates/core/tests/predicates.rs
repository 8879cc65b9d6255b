mod common;

use common::*;
use katflow::checks::{is_convex, is_geodesic, shallow_bounds_check};
use katflow::geom::{dot3, norm3, spherical_center_radius, Disk4};
use katflow::{generators, monitor, tol, Configuration, EdgeWeights, ShallowMode, TriangulatedPolyhedron};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixtures() -> Vec<(TriangulatedPolyhedron, Configuration)> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let oct = generators::octahedron();
    let ico = generators::icosahedron();
    let w_oct = EdgeWeights::uniform(&oct, 0.5);
    let w_ico =
        EdgeWeights::from_vec(&ico, (0..ico.num_edges()).map(|_| rng.random_range(0.2..1.0)).collect()).unwrap();
    let rnd = generators::random_triangulation(14, 3);
    vec![
        (oct.clone(), solved(&oct, &w_oct)),
        (ico.clone(), solved(&ico, &w_ico)),
        (rnd.clone(), katflow::bootstrap(&rnd).unwrap()),
    ]
}

fn cross3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    dot3(katflow::geom::cross(a, b), c)
}

#[test]
fn rotations_leave_every_predicate_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (p, cfg) in fixtures() {
        let base = monitor(&p, &cfg, None, ShallowMode::Strict, 1e-9).unwrap();
        assert!(base.passed());
        for _ in 0..20 {
            let moved = cfg.transform(&random_rotation(&mut rng));
            let r = monitor(&p, &moved, None, ShallowMode::Strict, 1e-9).unwrap();
            assert_eq!(r.geodesic, base.geodesic);
            assert_eq!(r.strictly_convex, base.strictly_convex);
            assert_eq!(r.shallow, base.shallow);
            assert!((r.min_spherical_radius - base.min_spherical_radius).abs() < 1e-9);
        }
    }
}

#[test]
fn small_boosts_leave_predicates_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (p, cfg) in fixtures() {
        for _ in 0..20 {
            let moved = cfg.transform(&random_lorentz(&mut rng, 0.2));
            let moved = Configuration::normalized(moved.disks).unwrap();
            assert!(is_geodesic(&p, &moved).unwrap().geodesic);
            let c = is_convex(&p, &moved).unwrap();
            assert!(c.convex && c.strictly_convex);
            assert!(shallow_bounds_check(&p, &moved, ShallowMode::Strict, None, 1e-9).ok);
        }
    }
}

/// Point `q` lies in the spherical triangle `abc`, boundary included up to
/// `eps`.
fn in_triangle(a: [f64; 3], b: [f64; 3], c: [f64; 3], q: [f64; 3], eps: f64) -> bool {
    let s = cross3(a, b, c).signum();
    s * cross3(a, b, q) >= -eps && s * cross3(b, c, q) >= -eps && s * cross3(c, a, q) >= -eps
}

#[test]
fn disks_lie_in_their_links() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (p, cfg) in fixtures() {
        let centers = cfg.centers().unwrap();
        for v in 0..p.n() {
            let (c, rho) = spherical_center_radius(cfg.disks[v]).unwrap();
            let faces: Vec<[usize; 3]> = p.faces().iter().copied().filter(|f| f.contains(&v)).collect();
            for _ in 0..100 {
                let q = point_at(c.to_array(), rho, rng.random_range(0.0..std::f64::consts::TAU));
                let inside = faces.iter().any(|f| in_triangle(centers[f[0]], centers[f[1]], centers[f[2]], q, 1e-9));
                assert!(inside, "boundary point of disk {v} outside its link");
            }
        }
    }
}

fn slerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    let om = dot3(a, b).clamp(-1.0, 1.0).acos();
    let (sa, sb) = (((1.0 - t) * om).sin() / om.sin(), (t * om).sin() / om.sin());
    std::array::from_fn(|k| sa * a[k] + sb * b[k])
}

fn arc_clear_of(d: Disk4, a: [f64; 3], b: [f64; 3]) -> bool {
    let scale = norm3(d.spatial());
    (0..=400).all(|k| side(d, slerp(a, b, k as f64 / 400.0)) >= -1e-9 * scale)
}

#[test]
fn third_disk_stays_off_the_opposite_arc() {
    for (p, cfg) in fixtures() {
        let centers = cfg.centers().unwrap();
        for f in p.faces() {
            for q in 0..3 {
                let (i, j, k) = (f[q], f[(q + 1) % 3], f[(q + 2) % 3]);
                assert!(arc_clear_of(cfg.disks[k], centers[i], centers[j]), "face {f:?}");
            }
        }
    }
}

/// Proper disks only: see the next test for a triple with one disk larger than
/// a hemisphere.
#[test]
fn shallow_random_triples_obey_the_arc_lemma() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut tested = 0;
    while tested < 300 {
        let d: Vec<Disk4> =
            (0..3).map(|_| cap(unit_vector(&mut rng), rng.random_range(0.05..std::f64::consts::FRAC_PI_2))).collect();
        let shallow = [(0, 1), (1, 2), (0, 2)].iter().all(|&(a, b)| {
            let x = katflow::geom::lorentz_inner(d[a], d[b]);
            (0.0..=1.0).contains(&x)
        });
        if !shallow {
            continue;
        }
        let c: Vec<[f64; 3]> = d.iter().map(|&x| spherical_center_radius(x).unwrap().0.to_array()).collect();
        assert!(arc_clear_of(d[2], c[0], c[1]), "{d:?}");
        tested += 1;
    }
}

#[test]
fn a_disk_past_a_hemisphere_can_cross_the_arc() {
    let d = [
        Disk4::new(-1.153982701178363, 1.3521108303960818, 0.7074357945470061, 0.05483587820192373),
        Disk4::new(0.1520831997757188, -0.5670750253405145, -0.3222227619209589, -0.7731285190633606),
        Disk4::new(-0.383818819851144, 0.23382926334439144, -0.370677042532472, 0.9773634391643286),
    ];
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        assert!((0.0..=1.0).contains(&katflow::geom::lorentz_inner(d[a], d[b])));
    }
    let c: Vec<[f64; 3]> = d.iter().map(|&x| spherical_center_radius(x).unwrap().0.to_array()).collect();
    assert!(!arc_clear_of(d[2], c[0], c[1]));
}

#[test]
fn geodesic_check_rejects_a_folded_vertex() {
    let (p, mut cfg) = fixtures().remove(0);
    // Reflect one disk through the origin of its spatial part: the center
    // jumps to the far side of the sphere.
    let d = cfg.disks[0];
    cfg.disks[0] = Disk4::new(d.a, -d.b, -d.c, d.d);
    let r = monitor(&p, &cfg, None, ShallowMode::Strict, tol::INV).unwrap();
    assert!(!r.passed());
}
