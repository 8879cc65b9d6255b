//! Triangulated spheres with per-edge target inversive distances.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// A simplicial 2-sphere with consistently oriented faces.
///
/// Faces are stored rotated so the smallest vertex comes first, then sorted,
/// so two face lists describing the same oriented complex build identical
/// values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangulatedPolyhedron {
    n: usize,
    faces: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
    edge_index: BTreeMap<(usize, usize), usize>,
    edge_faces: Vec<[usize; 2]>,
    neighbors: Vec<Vec<usize>>,
}

fn canonical_face(f: [usize; 3]) -> [usize; 3] {
    let m = (0..3).min_by_key(|&i| f[i]).unwrap();
    [f[m], f[(m + 1) % 3], f[(m + 2) % 3]]
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriangulatedPolyhedron {
    /// Validates a face list and builds the derived structures.
    pub fn build(faces: &[[usize; 3]]) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::NotTriangulation("no faces".into()));
        }
        let n = faces.iter().flatten().max().unwrap() + 1;
        let mut used = vec![false; n];
        for f in faces {
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::NotTriangulation(format!("degenerate face {f:?}")));
            }
            for &v in f {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::NotTriangulation(format!("vertex {v} belongs to no face")));
        }

        let mut canon: Vec<[usize; 3]> = faces.iter().map(|&f| canonical_face(f)).collect();
        canon.sort_unstable();
        let mut seen = HashSet::new();
        for f in &canon {
            let mut s = *f;
            s.sort_unstable();
            if !seen.insert(s) {
                return Err(Error::NotTriangulation(format!("face {f:?} repeated")));
            }
        }

        // Undirected edge -> faces and the direction each face traverses it.
        let mut incid: BTreeMap<(usize, usize), Vec<(usize, bool)>> = BTreeMap::new();
        for (fi, f) in canon.iter().enumerate() {
            for r in 0..3 {
                let (u, v) = (f[r], f[(r + 1) % 3]);
                incid.entry(sorted_pair(u, v)).or_default().push((fi, u < v));
            }
        }
        for (&(u, v), inc) in &incid {
            if inc.len() != 2 {
                return Err(Error::NotTriangulation(format!("edge ({u}, {v}) borders {} faces", inc.len())));
            }
            if inc[0].1 == inc[1].1 {
                return Err(Error::BadOrientation(u, v));
            }
        }

        let edges: Vec<(usize, usize)> = incid.keys().copied().collect();
        let edge_index: BTreeMap<_, _> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let edge_faces: Vec<[usize; 2]> = incid.values().map(|inc| [inc[0].0, inc[1].0]).collect();

        let m = edges.len();
        if n + canon.len() != m + 2 || 3 * canon.len() != 2 * m {
            return Err(Error::NotTriangulation(format!(
                "Euler characteristic {} (n = {n}, m = {m}, f = {})",
                n as i64 - m as i64 + canon.len() as i64,
                canon.len()
            )));
        }

        // Cyclic neighbor order: in face (v, a, b) the neighbor after a is b.
        let mut succ: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
        for f in &canon {
            for r in 0..3 {
                succ[f[r]].insert(f[(r + 1) % 3], f[(r + 2) % 3]);
            }
        }
        let mut neighbors = Vec::with_capacity(n);
        for (v, s) in succ.iter().enumerate() {
            let start = *s.keys().next().unwrap();
            let mut ring = vec![start];
            let mut cur = s[&start];
            while cur != start {
                if ring.len() > s.len() {
                    break;
                }
                ring.push(cur);
                cur = match s.get(&cur) {
                    Some(&x) => x,
                    None => return Err(Error::NotTriangulation(format!("link of vertex {v} is not a cycle"))),
                };
            }
            if ring.len() != s.len() {
                return Err(Error::NotTriangulation(format!("link of vertex {v} is not a single cycle")));
            }
            neighbors.push(ring);
        }

        let p = TriangulatedPolyhedron { n, faces: canon, edges, edge_index, edge_faces, neighbors };
        if n < 4 {
            return Err(Error::NotTriangulation(format!("only {n} vertices")));
        }
        if let Some(cut) = p.find_small_cut() {
            return Err(Error::NotThreeConnected(cut));
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edge_index.get(&sorted_pair(i, j)).copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge_index(i, j).is_some()
    }

    /// The two faces bordering an edge.
    pub fn edge_faces(&self, e: usize) -> [usize; 2] {
        self.edge_faces[e]
    }

    /// Neighbors of `v` in cyclic order consistent with the face orientation.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn is_tetrahedron(&self) -> bool {
        self.n == 4
    }

    /// Index of the face with this vertex set, in any order.
    pub fn face_index(&self, tri: [usize; 3]) -> Option<usize> {
        let mut s = tri;
        s.sort_unstable();
        self.faces.iter().position(|f| {
            let mut g = *f;
            g.sort_unstable();
            g == s
        })
    }

    /// Edge indices of a face, in the order `(f0 f1, f1 f2, f2 f0)`.
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        let t = self.faces[f];
        [
            self.edge_index(t[0], t[1]).unwrap(),
            self.edge_index(t[1], t[2]).unwrap(),
            self.edge_index(t[2], t[0]).unwrap(),
        ]
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        self.neighbors
            .iter()
            .map(|r| {
                let mut s = r.clone();
                s.sort_unstable();
                s
            })
            .collect()
    }

    /// A vertex cut of size below 3, if any.
    fn find_small_cut(&self) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let connected_without = |removed: &[usize]| {
            let start = (0..self.n).find(|v| !removed.contains(v)).unwrap();
            let mut seen = vec![false; self.n];
            for &r in removed {
                seen[r] = true;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut count = 1 + removed.len();
            while let Some(v) = stack.pop() {
                for &u in &adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        count += 1;
                        stack.push(u);
                    }
                }
            }
            count == self.n
        };
        if !connected_without(&[]) {
            return Some(Vec::new());
        }
        if self.n <= 64 {
            for a in 0..self.n {
                if !connected_without(&[a]) {
                    return Some(vec![a]);
                }
            }
            for a in 0..self.n {
                for b in a + 1..self.n {
                    if self.n > 4 && !connected_without(&[a, b]) {
                        return Some(vec![a, b]);
                    }
                }
            }
            return None;
        }
        // Larger inputs: remove each vertex in turn and look for an
        // articulation point of the rest.
        for a in 0..self.n {
            if let Some(b) = articulation_point(&adj, a) {
                let mut cut = vec![a, b];
                cut.sort_unstable();
                return Some(cut);
            }
        }
        None
    }
}

/// Lowest articulation point of the graph with `skip` deleted, if any.
fn articulation_point(adj: &[Vec<usize>], skip: usize) -> Option<usize> {
    let n = adj.len();
    let root = if skip == 0 { 1 } else { 0 };
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut is_art = vec![false; n];
    let mut timer = 0;
    // Iterative DFS: (vertex, parent, next neighbor position).
    let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
    disc[root] = timer;
    low[root] = timer;
    timer += 1;
    let mut root_children = 0;
    while let Some(&mut (v, parent, ref mut pos)) = stack.last_mut() {
        if *pos < adj[v].len() {
            let u = adj[v][*pos];
            *pos += 1;
            if u == skip || u == parent {
                continue;
            }
            if disc[u] == usize::MAX {
                disc[u] = timer;
                low[u] = timer;
                timer += 1;
                if v == root {
                    root_children += 1;
                }
                stack.push((u, v, 0));
            } else {
                low[v] = low[v].min(disc[u]);
            }
        } else {
            stack.pop();
            if let Some(&(p, _, _)) = stack.last() {
                low[p] = low[p].min(low[v]);
                if p != root && low[v] >= disc[p] {
                    is_art[p] = true;
                }
            }
        }
    }
    if disc.iter().enumerate().any(|(v, &d)| v != skip && d == usize::MAX) {
        // `skip` alone already disconnects the graph.
        return Some(root);
    }
    if root_children > 1 {
        is_art[root] = true;
    }
    is_art.iter().position(|&a| a)
}

/// How a weight value is expressed on input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightUnit {
    #[default]
    Inversive,
    AngleRadians,
    AngleDegrees,
}

impl WeightUnit {
    pub fn to_inversive(self, v: f64) -> f64 {
        match self {
            WeightUnit::Inversive => v,
            WeightUnit::AngleRadians => v.cos(),
            WeightUnit::AngleDegrees => v.to_radians().cos(),
        }
    }
}

/// Target inversive distance per edge, indexed like
/// [`TriangulatedPolyhedron::edges`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeWeights {
    values: Vec<f64>,
}

impl EdgeWeights {
    pub fn uniform(p: &TriangulatedPolyhedron, w: f64) -> Self {
        EdgeWeights { values: vec![w; p.num_edges()] }
    }

    pub fn from_vec(p: &TriangulatedPolyhedron, values: Vec<f64>) -> Result<Self> {
        if values.len() != p.num_edges() {
            return Err(Error::BadWeights(format!("{} values for {} edges", values.len(), p.num_edges())));
        }
        let w = EdgeWeights { values };
        w.validate_shallow()?;
        Ok(w)
    }

    /// Builds weights from `(i, j, value, unit)` entries; every edge must
    /// appear exactly once.
    pub fn from_entries(p: &TriangulatedPolyhedron, entries: &[(usize, usize, f64, WeightUnit)]) -> Result<Self> {
        let mut values = vec![f64::NAN; p.num_edges()];
        for &(i, j, v, unit) in entries {
            let e = p.edge_index(i, j).ok_or_else(|| Error::BadWeights(format!("({i}, {j}) is not an edge")))?;
            if !values[e].is_nan() {
                return Err(Error::BadWeights(format!("edge ({i}, {j}) weighted twice")));
            }
            let x = unit.to_inversive(v);
            if !x.is_finite() {
                return Err(Error::BadWeights(format!("edge ({i}, {j}) has non-finite weight")));
            }
            values[e] = x;
        }
        if let Some(e) = values.iter().position(|v| v.is_nan()) {
            let (i, j) = p.edges()[e];
            return Err(Error::BadWeights(format!("edge ({i}, {j}) has no weight")));
        }
        EdgeWeights::from_vec(p, values)
    }

    fn validate_shallow(&self) -> Result<()> {
        for (e, &v) in self.values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::BadWeights(format!("edge {e} weight {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn get(&self, e: usize) -> f64 {
        self.values[e]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn set(&mut self, e: usize, v: f64) {
        self.values[e] = v;
    }

    pub fn angle(&self, e: usize) -> f64 {
        self.values[e].clamp(-1.0, 1.0).acos()
    }
}

/// A cycle that breaks one of the KAT hypotheses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KatViolation {
    /// Non-facial triangle whose overlap angles sum to at least π.
    ThreeCycle { cycle: [usize; 3], angle_sum: f64 },
    /// 4-cycle with angle sum 2π not bounding two adjacent faces.
    FourCycle { cycle: [usize; 4], angle_sum: f64 },
}

/// All 3-cycles as sorted triples.
pub fn three_cycles(p: &TriangulatedPolyhedron) -> Vec<[usize; 3]> {
    let adj = p.adjacency();
    let mut out = Vec::new();
    for &(i, j) in p.edges() {
        for &k in &adj[j] {
            if k > j && p.has_edge(i, k) {
                out.push([i, j, k]);
            }
        }
    }
    out
}

/// All 4-cycles `[v0, v1, v2, v3]` (edges v0v1, v1v2, v2v3, v3v0), each listed
/// once with `v0 < v2`, `v1 < v3` and `v0 < v1`.
pub fn four_cycles(p: &TriangulatedPolyhedron) -> Vec<[usize; 4]> {
    let adj: Vec<BTreeSet<usize>> = p.adjacency().into_iter().map(|v| v.into_iter().collect()).collect();
    let mut out = Vec::new();
    for i in 0..p.n() {
        for k in i + 1..p.n() {
            let common: Vec<usize> = adj[i].intersection(&adj[k]).copied().collect();
            for a in 0..common.len() {
                for b in a + 1..common.len() {
                    let (j, l) = (common[a], common[b]);
                    // Each cycle has two diagonals; keep the one holding the
                    // smallest vertex.
                    if i < j {
                        out.push([i, j, k, l]);
                    }
                }
            }
        }
    }
    out
}

fn cycle_edges(p: &TriangulatedPolyhedron, c: &[usize]) -> Vec<usize> {
    (0..c.len()).map(|r| p.edge_index(c[r], c[(r + 1) % c.len()]).unwrap()).collect()
}

fn bounds_two_faces(p: &TriangulatedPolyhedron, c: [usize; 4]) -> bool {
    let [a, b, cc, d] = c;
    (p.has_edge(a, cc) && p.face_index([a, b, cc]).is_some() && p.face_index([a, cc, d]).is_some())
        || (p.has_edge(b, d) && p.face_index([b, cc, d]).is_some() && p.face_index([b, d, a]).is_some())
}

/// Lists every cycle violating the KAT hypotheses; empty means they hold.
pub fn kat_conditions_check(p: &TriangulatedPolyhedron, w: &EdgeWeights) -> Vec<KatViolation> {
    let mut out = Vec::new();
    for c in three_cycles(p) {
        let sum: f64 = cycle_edges(p, &c).iter().map(|&e| w.angle(e)).sum();
        if sum >= PI - tol::ANGLE && p.face_index(c).is_none() {
            out.push(KatViolation::ThreeCycle { cycle: c, angle_sum: sum });
        }
    }
    for c in four_cycles(p) {
        let sum: f64 = cycle_edges(p, &c).iter().map(|&e| w.angle(e)).sum();
        if (sum - 2.0 * PI).abs() <= tol::ANGLE && !bounds_two_faces(p, c) {
            out.push(KatViolation::FourCycle { cycle: c, angle_sum: sum });
        }
    }
    out
}

/// 4-cycles whose four weights are exactly zero.
pub fn zero_four_cycles(p: &TriangulatedPolyhedron, w: &EdgeWeights) -> Vec<[usize; 4]> {
    four_cycles(p).into_iter().filter(|c| cycle_edges(p, c).iter().all(|&e| w.get(e) == 0.0)).collect()
}

/// True iff no 4-cycle has all four weights exactly zero.
pub fn strictly_shallow_check(p: &TriangulatedPolyhedron, w: &EdgeWeights) -> bool {
    zero_four_cycles(p, w).is_empty()
}
