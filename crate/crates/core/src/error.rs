use thiserror::Error;

use crate::checks::MonitorReport;
use crate::complex::KatViolation;
use crate::flow::FlowFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("disk is not real (point or imaginary)")]
    NotRealDisk,
    #[error("zero vector does not define a disk")]
    ZeroVector,
    #[error("disk triple is linearly dependent")]
    DegenerateTriple,
    #[error("disks share a boundary circle")]
    SameBoundary,
    #[error("matrix is not a time-orientation preserving Lorentz map")]
    NotLorentz,
    #[error("edge ({0}, {1}) joins antipodal disk centers")]
    AntipodalEdge(usize, usize),

    #[error("face list is not a triangulated sphere: {0}")]
    NotTriangulation(String),
    #[error("graph is not 3-connected (cut {0:?})")]
    NotThreeConnected(Vec<usize>),
    #[error("faces are not consistently oriented at edge ({0}, {1})")]
    BadOrientation(usize, usize),
    #[error("invalid edge weights: {0}")]
    BadWeights(String),
    #[error("weights violate the KAT cycle conditions ({} violations)", .0.len())]
    KatViolation(Vec<KatViolation>),
    #[error("the tetrahedron is excluded by the KAT hypotheses")]
    Tetrahedron,

    #[error("square rigidity matrix is singular for every spatial column of the third pinned disk")]
    SingularAtPin,
    #[error("complex is too small for a pinned face reduction (n = {0})")]
    TooSmall(usize),
    #[error("unmarked rigidity matrix is ill-conditioned (cond = {0:e})")]
    IllConditioned(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no face avoids the free edge ({0}, {1})")]
    NoValidPin(usize, usize),
    #[error("flow stopped early: {}", .0.reason)]
    Flow(Box<FlowFailure>),
    #[error("monitor violation: {0:?}")]
    MonitorViolation(Box<MonitorReport>),
    #[error("iteration did not converge: {0}")]
    NonConvergent(String),
    #[error("no boost in the search family makes every disk strictly proper")]
    NormalizationFailed,

    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
