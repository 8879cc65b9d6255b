//! Circle packings on the sphere with prescribed overlaps, computed by
//! flowing one edge at a time from a tangency packing.
//!
//! Disks are 4-vectors in Minkowski space ([`geom`]); a configuration is
//! moved along the null directions of its rigidity matrix ([`rigidity`],
//! [`flow`]) starting from a packing built in [`bootstrap`].

pub mod bootstrap;
pub mod checks;
pub mod complex;
pub mod error;
pub mod flow;
pub mod generators;
pub mod geom;
pub mod io;
pub mod render;
pub mod rigidity;
pub mod tol;

pub use bootstrap::{bootstrap, lift_and_normalize, tangency_pack, PlanarPacking};
pub use checks::{monitor, Configuration, MonitorReport, ShallowMode};
pub use complex::{
    kat_conditions_check, strictly_shallow_check, EdgeWeights, KatViolation, TriangulatedPolyhedron, WeightUnit,
};
pub use error::{Error, Result};
pub use flow::{
    epsilon_schedule, integrate_edge_flow, schedule_edges, solve, FlowFailure, FlowOptions, FlowState, FlowTrace,
    SolveReport, StopReason,
};
pub use geom::{inversive_distance, lorentz_inner, Disk4, LorentzMap, PlanarDisk, SpherePoint};
pub use io::{ProblemFile, SolutionFile};
pub use render::{render_svg, RenderOptions};
pub use rigidity::{assemble_rigidity, numeric_rank, RigidityMatrix};
