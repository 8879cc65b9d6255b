use katflow::complex::{kat_conditions_check, three_cycles};
use katflow::{generators, EdgeWeights, TriangulatedPolyhedron};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn build_ignores_face_order(n in 5usize..40, seed in any::<u64>(), shuffle in any::<u64>()) {
        let p = generators::random_triangulation(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle);
        let mut faces = p.faces().to_vec();
        faces.shuffle(&mut rng);
        for f in &mut faces {
            f.rotate_left(rng.random_range(0..3));
        }
        let q = TriangulatedPolyhedron::build(&faces).unwrap();
        prop_assert_eq!(&q, &p);
        for v in 0..n {
            prop_assert_eq!(q.neighbors(v), p.neighbors(v));
        }
    }

    #[test]
    fn tangency_weights_satisfy_the_cycle_conditions(n in 5usize..40, seed in any::<u64>()) {
        let p = generators::random_triangulation(n, seed);
        prop_assert!(kat_conditions_check(&p, &EdgeWeights::uniform(&p, 1.0)).is_empty());
    }

    #[test]
    fn faces_are_three_cycles(n in 4usize..40, seed in any::<u64>()) {
        let p = generators::random_triangulation(n, seed);
        let cycles = three_cycles(&p);
        for f in p.faces() {
            let mut s = *f;
            s.sort_unstable();
            prop_assert!(cycles.contains(&s));
        }
        prop_assert_eq!(p.num_edges(), 3 * n - 6);
    }
}

#[test]
fn standard_solids() {
    for (p, n, deg) in [(generators::octahedron(), 6, 4), (generators::icosahedron(), 12, 5)] {
        assert_eq!(p.n(), n);
        assert_eq!(p.faces().len(), 2 * n - 4);
        assert!((0..n).all(|v| p.degree(v) == deg));
    }
}
