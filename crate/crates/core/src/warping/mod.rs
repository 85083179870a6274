//! The Schrödingerisation engine: warped initial data on an auxiliary
//! p-grid, Fourier diagonalisation in p, per-mode evolution and recovery.

pub mod evolve;
pub mod field;
pub mod grid;
pub mod pipeline;
pub mod recover;

pub use evolve::{assemble_schrodinger, evolve, evolve_time_dependent, EvolveScheme, SchrodingerSystem};
pub use field::{warp_initial, TransformPlan, WarpedField};
pub use grid::{build_pgrid, estimate_left_boundary, estimate_left_boundary_with, left_speed, PGrid, SpeedEstimate};
pub use pipeline::{prepare, schrodingerize_and_solve, PipelineOptions, SolveReport};
pub use recover::{recover_fit, recover_integral, recover_integral_from, recover_point, Recovery, RecoveryOptions};
