//! Query-count estimate for simulating a sparse Hamiltonian:
//! s·h·ln(s·h/ε)/ln(ln(h/ε)) with h = ∫₀ᵀ ‖H‖_max dt.

use crate::error::{Result, SchrError};
use crate::warping::SchrodingerSystem;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityEstimate {
    pub sparsity: usize,
    pub h_max1: f64,
    pub epsilon: f64,
    pub estimate: f64,
}

impl ComplexityEstimate {
    pub fn order_of_magnitude(&self) -> i32 {
        self.estimate.log10().floor() as i32
    }
}

/// Time-independent H of the given sparsity and max entry, simulated to T.
pub fn estimate_complexity(sparsity: usize, max_entry: f64, t_end: f64, epsilon: f64) -> Result<ComplexityEstimate> {
    if sparsity == 0 || !(max_entry > 0.0) || !(t_end > 0.0) {
        return Err(SchrError::InvalidInput("sparsity, max entry and T must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SchrError::InvalidInput("ε must lie in (0, 1)".into()));
    }
    let h = t_end * max_entry;
    if h / epsilon <= std::f64::consts::E {
        return Err(SchrError::OutOfRegime(format!("h/ε = {:.3e} is not above e; the log-log factor degenerates", h / epsilon)));
    }
    let s = sparsity as f64;
    let estimate = s * h * (s * h / epsilon).ln() / (h / epsilon).ln().ln();
    Ok(ComplexityEstimate { sparsity, h_max1: h, epsilon, estimate })
}

/// Sparsity from the union block pattern; the max entry is bounded by
/// max|μ|·‖H1‖_max + ‖H2‖_max.
pub fn estimate_for_system(sys: &SchrodingerSystem, t_end: f64, epsilon: f64) -> Result<ComplexityEstimate> {
    let p = &sys.pair;
    let s = (0..p.n())
        .map(|i| {
            let mut cols: Vec<usize> = p.h1.row(i).chain(p.h2.row(i)).map(|(j, _)| j).collect();
            cols.sort_unstable();
            cols.dedup();
            cols.len()
        })
        .max()
        .unwrap_or(0)
        .max(1);
    let bound = sys.grid.max_abs_mode() * p.h1.max_abs() + p.h2.max_abs();
    estimate_complexity(s, bound, t_end, epsilon)
}
