//! Jacobian of the edge/vertex measurement map and its pinned reductions.
//!
//! Rows are edges (in complex order) followed by vertices; columns are the
//! four coordinates of each disk in vertex order.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::checks::Configuration;
use crate::complex::TriangulatedPolyhedron;
use crate::error::{Error, Result};
use crate::geom::{apply_generator, lorentz_generators, lorentz_inner, Disk4};
use crate::tol;

const SIGN: [f64; 4] = [1.0, -1.0, -1.0, -1.0];
const COORD: [char; 4] = ['a', 'b', 'c', 'd'];

#[derive(Clone, Debug, PartialEq)]
pub struct RigidityMatrix {
    pub mat: DMatrix<f64>,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl RigidityMatrix {
    pub fn row_label(&self, r: usize) -> String {
        match self.edges.get(r) {
            Some(&(i, j)) => format!("e{i}-{j}"),
            None => format!("v{}", r - self.edges.len()),
        }
    }

    pub fn col_label(c: usize) -> String {
        format!("{}{}", COORD[c % 4], c / 4)
    }

    /// Labelled dense dump, one row per line.
    pub fn dump(&self) -> String {
        dump_matrix(&self.mat, |r| self.row_label(r), Self::col_label)
    }
}

pub fn dump_matrix(m: &DMatrix<f64>, row: impl Fn(usize) -> String, col: impl Fn(usize) -> String) -> String {
    let mut s = String::new();
    let _ = write!(s, "# {}x{}\nrow", m.nrows(), m.ncols());
    for c in 0..m.ncols() {
        let _ = write!(s, " {}", col(c));
    }
    s.push('\n');
    for r in 0..m.nrows() {
        s.push_str(&row(r));
        for c in 0..m.ncols() {
            let _ = write!(s, " {:e}", m[(r, c)]);
        }
        s.push('\n');
    }
    s
}

fn put(mat: &mut DMatrix<f64>, r: usize, v: usize, d: Disk4) {
    for (k, x) in d.to_array().into_iter().enumerate() {
        mat[(r, 4 * v + k)] = SIGN[k] * x;
    }
}

/// Jacobian over an arbitrary edge list on `n` disks.
pub fn assemble_from_edges(n: usize, edges: &[(usize, usize)], cfg: &Configuration) -> RigidityMatrix {
    let m = edges.len();
    let mut mat = DMatrix::zeros(m + n, 4 * n);
    for (r, &(i, j)) in edges.iter().enumerate() {
        put(&mut mat, r, i, cfg.disks[j]);
        put(&mut mat, r, j, cfg.disks[i]);
    }
    for v in 0..n {
        put(&mut mat, m + v, v, cfg.disks[v]);
    }
    RigidityMatrix { mat, n, edges: edges.to_vec() }
}

pub fn assemble_rigidity(p: &TriangulatedPolyhedron, cfg: &Configuration) -> RigidityMatrix {
    assemble_from_edges(p.n(), p.edges(), cfg)
}

/// Edge inner products followed by half the vertex self-products.
pub fn measurement(p: &TriangulatedPolyhedron, cfg: &Configuration) -> DVector<f64> {
    let m = p.num_edges();
    let mut f = DVector::zeros(m + p.n());
    for (r, &(i, j)) in p.edges().iter().enumerate() {
        f[r] = cfg.inversive(i, j);
    }
    for v in 0..p.n() {
        f[m + v] = 0.5 * lorentz_inner(cfg.disks[v], cfg.disks[v]);
    }
    f
}

/// Singular values above `tol_rank · σ_max`.
pub fn numeric_rank(mat: &DMatrix<f64>, tol_rank: f64) -> usize {
    if mat.is_empty() {
        return 0;
    }
    let sv = mat.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol_rank * smax).count()
}

/// `σ_max / σ_min`, infinite for singular input.
pub fn condition_number(mat: &DMatrix<f64>) -> f64 {
    let sv = mat.singular_values();
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

/// Infinitesimal motions of the configuration under the six Lorentz
/// generators, as vectors in the 4n coordinate space.
pub fn lorentz_tangents(cfg: &Configuration) -> Vec<DVector<f64>> {
    lorentz_generators()
        .iter()
        .map(|x| {
            DVector::from_iterator(4 * cfg.len(), cfg.disks.iter().flat_map(|&d| apply_generator(x, d).to_array()))
        })
        .collect()
}

/// Generator fixing both `di` and `dj`, from the null space of the 8×6
/// system; `None` when that null space is not one-dimensional.
pub fn residual_generator(di: Disk4, dj: Disk4) -> Option<[[f64; 4]; 4]> {
    let gens = lorentz_generators();
    let mut a = DMatrix::zeros(8, 6);
    for (g, x) in gens.iter().enumerate() {
        let (u, v) = (apply_generator(x, di).to_array(), apply_generator(x, dj).to_array());
        for k in 0..4 {
            a[(k, g)] = u[k];
            a[(4 + k, g)] = v[k];
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t?;
    let (imin, smin) = svd.singular_values.argmin();
    let smax = svd.singular_values.max();
    if smin > 1e-8 * smax {
        return None;
    }
    let alpha = vt.row(imin);
    let mut out = [[0.0; 4]; 4];
    for (g, x) in gens.iter().enumerate() {
        for r in 0..4 {
            for c in 0..4 {
                out[r][c] += alpha[g] * x[r][c];
            }
        }
    }
    Some(out)
}

/// `J` with six pinning columns removed.
#[derive(Clone, Debug)]
pub struct SquareMatrix {
    pub mat: DMatrix<f64>,
    pub face: [usize; 3],
    /// Removed column indices, ascending.
    pub removed: [usize; 6],
    /// Spatial coordinate (1, 2 or 3) of the third disk that was removed.
    pub k_coord: usize,
    pub rank: usize,
}

/// Removes `b, c, d` of the first face disk, `b, c` of the second and the
/// given spatial coordinate of the third. Fails with `SingularAtPin` when the
/// result is rank deficient.
pub fn square_matrix_with_column(j: &RigidityMatrix, face: [usize; 3], k_coord: usize) -> Result<SquareMatrix> {
    assert!((1..4).contains(&k_coord));
    let [vi, vj, vk] = face;
    let mut removed = [4 * vi + 1, 4 * vi + 2, 4 * vi + 3, 4 * vj + 1, 4 * vj + 2, 4 * vk + k_coord];
    removed.sort_unstable();
    let keep: Vec<usize> = (0..j.mat.ncols()).filter(|c| !removed.contains(c)).collect();
    let mat = j.mat.select_columns(&keep);
    let rank = numeric_rank(&mat, tol::RANK);
    if rank < mat.nrows().min(mat.ncols()) {
        return Err(Error::SingularAtPin);
    }
    Ok(SquareMatrix { mat, face, removed, k_coord, rank })
}

/// Square reduction of `J` for a pinned face, trying the third disk's spatial
/// columns in decreasing order of how strongly the motion fixing the first
/// two disks moves them.
pub fn square_matrix(j: &RigidityMatrix, face: [usize; 3], cfg: &Configuration) -> Result<SquareMatrix> {
    let [vi, vj, vk] = face;
    let mut order = [1, 2, 3];
    if let Some(x) = residual_generator(cfg.disks[vi], cfg.disks[vj]) {
        let vel = apply_generator(&x, cfg.disks[vk]).to_array();
        order.sort_by(|&p, &q| vel[q].abs().total_cmp(&vel[p].abs()));
    }
    for k in order {
        if let Ok(s) = square_matrix_with_column(j, face, k) {
            return Ok(s);
        }
    }
    Err(Error::SingularAtPin)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Edge(usize),
    Vertex(usize),
}

/// `J` without the pinned face's three edge rows, three vertex rows and
/// twelve columns.
#[derive(Clone, Debug)]
pub struct UnmarkedMatrix {
    pub mat: DMatrix<f64>,
    pub face: [usize; 3],
    pub rows: Vec<RowKind>,
    /// Unpinned vertices in column-block order.
    pub free_vertices: Vec<usize>,
    edge_row: Vec<Option<usize>>,
}

impl UnmarkedMatrix {
    /// Row of an edge, `None` for pinned face edges.
    pub fn edge_row(&self, e: usize) -> Option<usize> {
        self.edge_row[e]
    }

    pub fn dump(&self) -> String {
        let fv = &self.free_vertices;
        dump_matrix(
            &self.mat,
            |r| match self.rows[r] {
                RowKind::Edge(e) => format!("e{e}"),
                RowKind::Vertex(v) => format!("v{v}"),
            },
            |c| format!("{}{}", COORD[c % 4], fv[c / 4]),
        )
    }

    /// Solves `J_u x = rhs` without a conditioning check.
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.mat.clone().lu().solve(rhs).ok_or(Error::IllConditioned(f64::INFINITY))
    }

    /// Spreads a reduced vector over all `n` disks, zero on the pinned face.
    pub fn expand(&self, x: &DVector<f64>, n: usize) -> Vec<Disk4> {
        let mut out = vec![Disk4::new(0.0, 0.0, 0.0, 0.0); n];
        for (b, &v) in self.free_vertices.iter().enumerate() {
            out[v] = Disk4::new(x[4 * b], x[4 * b + 1], x[4 * b + 2], x[4 * b + 3]);
        }
        out
    }

    pub fn condition_number(&self) -> f64 {
        condition_number(&self.mat)
    }
}

pub fn unmarked_matrix(j: &RigidityMatrix, face: [usize; 3]) -> Result<UnmarkedMatrix> {
    let n = j.n;
    if n <= 4 {
        return Err(Error::TooSmall(n));
    }
    let m = j.edges.len();
    let mut rows = Vec::with_capacity(4 * n - 12);
    let mut edge_row = vec![None; m];
    for (e, &(a, b)) in j.edges.iter().enumerate() {
        if face.contains(&a) && face.contains(&b) {
            continue;
        }
        edge_row[e] = Some(rows.len());
        rows.push(RowKind::Edge(e));
    }
    let free_vertices: Vec<usize> = (0..n).filter(|v| !face.contains(v)).collect();
    rows.extend(free_vertices.iter().map(|&v| RowKind::Vertex(v)));
    let row_idx: Vec<usize> = rows
        .iter()
        .map(|r| match *r {
            RowKind::Edge(e) => e,
            RowKind::Vertex(v) => m + v,
        })
        .collect();
    let cols: Vec<usize> = free_vertices.iter().flat_map(|&v| 4 * v..4 * v + 4).collect();
    let mat = j.mat.select_rows(&row_idx).select_columns(&cols);
    debug_assert_eq!(mat.nrows(), mat.ncols());
    Ok(UnmarkedMatrix { mat, face, rows, free_vertices, edge_row })
}

/// Velocity of the unpinned disks that lowers edge `e` at unit rate and holds
/// every other constraint fixed.
pub fn flow_velocity(ju: &UnmarkedMatrix, e: usize) -> Result<DVector<f64>> {
    let row = ju.edge_row(e).ok_or_else(|| Error::Precondition(format!("edge {e} belongs to the pinned face")))?;
    let cond = ju.condition_number();
    if !(cond <= tol::COND_MAX) {
        return Err(Error::IllConditioned(cond));
    }
    let mut rhs = DVector::zeros(ju.mat.nrows());
    rhs[row] = -1.0;
    let x = ju.solve(&rhs)?;
    let res = (&ju.mat * &x - &rhs).norm();
    if res > 1e-8 {
        return Err(Error::IllConditioned(cond));
    }
    Ok(x)
}
