//! Numerical tolerances shared across the crate.
//!
//! All of these are absolute unless noted. They assume desk-scale inputs
//! (a few hundred disks at most, de Sitter coordinates of moderate size).

/// `|<D,D> + 1|` bound for a de Sitter-normalized disk.
pub const NORM: f64 = 1e-12;

/// Band around zero used to call a Minkowski norm lightlike.
pub const LIGHT: f64 = 1e-10;

/// Lorentz-orthogonality residual.
pub const ORTHO: f64 = 1e-10;

/// Relative determinant tolerance; multiplied by the product of row norms.
pub const DET: f64 = 1e-10;

/// Agreement of inversive distances computed along two routes.
pub const INV: f64 = 1e-10;

/// Angle-sum equality in the KAT cycle conditions.
pub const ANGLE: f64 = 1e-9;

/// Relative singular-value threshold for numeric rank.
pub const RANK: f64 = 1e-8;

/// Condition number beyond which the unmarked rigidity matrix is treated as
/// singular.
pub const COND_MAX: f64 = 1e10;

/// Terminal accuracy of a single edge flow.
pub const TARGET: f64 = 1e-10;

/// Allowed drift of non-free edges during a flow.
pub const DRIFT: f64 = 1e-8;

/// Planar tangency accuracy of the bootstrap packing.
pub const TANGENCY: f64 = 1e-10;

/// Terminal residual of the epsilon-limit procedure.
pub const LIMIT: f64 = 1e-6;

/// Smallest epsilon level tried by the limit procedure (2^-20).
pub const EPS_MIN: f64 = 1.0 / 1_048_576.0;
