//! Fixed inputs shared by the benchmarks.

use katflow::{bootstrap, generators, Configuration, EdgeWeights, TriangulatedPolyhedron};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named complexes of increasing size.
pub fn complexes() -> Vec<(String, TriangulatedPolyhedron)> {
    let mut out = vec![
        ("octahedron".to_string(), generators::octahedron()),
        ("icosahedron".to_string(), generators::icosahedron()),
    ];
    for n in [20, 30] {
        out.push((format!("random{n}"), generators::random_triangulation(n, 1)));
    }
    out
}

pub fn packing(p: &TriangulatedPolyhedron) -> Configuration {
    bootstrap(p).expect("benchmark complexes bootstrap")
}

/// Targets uniform in `[0.4, 1]`, redrawn until the KAT conditions hold.
pub fn targets(p: &TriangulatedPolyhedron, seed: u64) -> EdgeWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let w = EdgeWeights::from_vec(p, (0..p.num_edges()).map(|_| rng.random_range(0.4..=1.0)).collect()).unwrap();
        if katflow::kat_conditions_check(p, &w).is_empty() {
            return w;
        }
    }
}
