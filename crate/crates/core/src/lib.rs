//! Cellular sheaves on graphs.
//!
//! Sheaf coboundary and Laplacian operators, sheaf cohomology `H⁰`/`H¹`,
//! linear and nonlinear sheaf diffusion, proximal operators for node
//! objectives and edge potentials, homological programs solved by ADMM, and
//! a message-passing simulation of the distributed solver.

pub mod cochain;
pub mod cohomology;
pub mod convex;
pub mod distsim;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod homprog;
pub mod linalg;
pub mod operators;
pub mod sheaf;

pub use cochain::{Cochain0, Cochain1};
pub use cohomology::{
    coboundary_rank, global_section_basis, h0_dimension, h1_dimension, is_global_section, SectionBasis,
    DEFAULT_NULL_TOL,
};
pub use convex::{EdgePotential, NodeObjective, ProxQuery};
pub use distsim::{
    audit_locality, run_distributed, run_distributed_from, DistConfig, DistOutcome, ExecutionMode, LocalityReport,
    LocalityViolation, MessageKind, RoundLog,
};
pub use dynamics::{
    estimate_spectral_bound, harmonic_projection, linear_heat_flow, nonlinear_heat_flow, FlowConfig, FlowStatus,
    FlowTrace,
};
pub use error::{Result, SheafError};
pub use graph::{EdgeSide, Graph, OrientedEdge};
pub use homprog::{
    admm_solve, admm_solve_from, check_feasibility, program_objective, AdmmConfig, AdmmOutcome, Feasibility,
    HomologicalProgram, IterateState, ProgramMode, SolveStatus, SolveTrace, XUpdateDamping,
};
pub use linalg::LinearMap;
pub use operators::{
    apply_coboundary, apply_coboundary_transpose, apply_laplacian, coboundary_dense, dirichlet_energy, laplacian_dense,
};
pub use sheaf::{CellularSheaf, EdgeRestrictions, SheafParts, ValidationReport};
