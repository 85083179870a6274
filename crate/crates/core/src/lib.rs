//! Schrödingerisation of linear PDEs with physical boundary and interface
//! conditions: semi-discrete builders, the warped-phase engine, a
//! Hamiltonian-preserving Liouville solver and exact solutions.

pub mod builders;
pub mod complexity;
pub mod config;
pub mod csvio;
pub mod error;
pub mod experiments;
pub mod liouville;
pub mod oracles;
pub mod linalg;
pub mod ode;
pub mod warping;

pub use error::{Result, SchrError, Stage};
pub use linalg::{SparseMatrix, TripletBuilder, C64};
