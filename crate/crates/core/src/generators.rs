//! Standard and random triangulated spheres.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::TriangulatedPolyhedron;

fn build(faces: &[[usize; 3]]) -> TriangulatedPolyhedron {
    TriangulatedPolyhedron::build(faces).expect("built-in face list is valid")
}

pub fn tetrahedron() -> TriangulatedPolyhedron {
    build(&[[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]])
}

/// Poles 0 and 5, equator 1-2-3-4. Faces are counterclockwise seen from
/// outside when vertices sit at 0 = +z, 1 = +x, 2 = +y, 3 = -x, 4 = -y,
/// 5 = -z.
pub fn octahedron() -> TriangulatedPolyhedron {
    bipyramid(4)
}

/// Suspension of a `k`-gon: apex 0, equator `1..=k`, apex `k + 1`.
pub fn bipyramid(k: usize) -> TriangulatedPolyhedron {
    assert!(k >= 3);
    let s = k + 1;
    let mut faces = Vec::with_capacity(2 * k);
    for r in 0..k {
        let (a, b) = (1 + r, 1 + (r + 1) % k);
        faces.push([0, a, b]);
        faces.push([s, b, a]);
    }
    build(&faces)
}

/// Vertex 0 on top, upper ring 1..=5, lower ring 6..=10, vertex 11 below.
pub fn icosahedron() -> TriangulatedPolyhedron {
    let mut faces = Vec::with_capacity(20);
    for r in 0..5 {
        let (u0, u1) = (1 + r, 1 + (r + 1) % 5);
        let (l0, l1) = (6 + r, 6 + (r + 1) % 5);
        faces.push([0, u0, u1]);
        faces.push([u0, l0, u1]);
        faces.push([u1, l0, l1]);
        faces.push([11, l1, l0]);
    }
    build(&faces)
}

/// Random simplicial sphere on `n >= 4` vertices: stellar subdivisions of a
/// tetrahedron followed by random degree-preserving-safe edge flips.
pub fn random_triangulation(n: usize, seed: u64) -> TriangulatedPolyhedron {
    assert!(n >= 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut faces: Vec<[usize; 3]> = tetrahedron().faces().to_vec();
    for v in 4..n {
        let f = rng.random_range(0..faces.len());
        let [a, b, c] = faces.swap_remove(f);
        faces.push([a, b, v]);
        faces.push([b, c, v]);
        faces.push([c, a, v]);
    }
    let flips = 4 * n;
    for _ in 0..flips {
        let f = rng.random_range(0..faces.len());
        let r = rng.random_range(0..3);
        try_flip(&mut faces, f, r);
    }
    build(&faces)
}

/// Flips the edge opposite position `r + 2` of face `f` if the result stays
/// simplicial.
fn try_flip(faces: &mut [[usize; 3]], f: usize, r: usize) -> bool {
    let t = faces[f];
    let (u, v, a) = (t[r], t[(r + 1) % 3], t[(r + 2) % 3]);
    let Some(g) = faces.iter().position(|s| (0..3).any(|q| s[q] == v && s[(q + 1) % 3] == u)) else {
        return false;
    };
    let s = faces[g];
    let q = (0..3).find(|&q| s[q] == v).unwrap();
    let b = s[(q + 2) % 3];
    let deg = |x: usize| faces.iter().filter(|s| s.contains(&x)).count();
    if a == b || deg(u) <= 3 || deg(v) <= 3 {
        return false;
    }
    let adjacent =
        faces.iter().any(|s| (0..3).any(|q| (s[q] == a && s[(q + 1) % 3] == b) || (s[q] == b && s[(q + 1) % 3] == a)));
    if adjacent {
        return false;
    }
    faces[f] = [a, u, b];
    faces[g] = [b, v, a];
    true
}
