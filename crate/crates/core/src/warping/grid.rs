use std::f64::consts::PI;

use crate::error::{Result, SchrError};
use crate::linalg::hermitian_extremes;
use crate::ode::HermitianPair;

/// Periodic auxiliary grid on [L, R): nodes p_k = L + k·dp and modes
/// μ_l = 2πl/(R − L) for l = −Np/2 .. Np/2 − 1, stored in ascending l.
#[derive(Clone, Debug, PartialEq)]
pub struct PGrid {
    pub l: f64,
    pub r: f64,
    pub l0: f64,
    pub np: usize,
    pub dp: f64,
    pub nodes: Vec<f64>,
    pub modes: Vec<f64>,
}

impl PGrid {
    /// Integer mode number of storage slot `s`.
    pub fn mode_number(&self, s: usize) -> i64 {
        s as i64 - (self.np / 2) as i64
    }

    pub fn max_abs_mode(&self) -> f64 {
        self.modes.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// First node strictly above `p`.
    pub fn first_node_above(&self, p: f64) -> Option<usize> {
        self.nodes.iter().position(|&x| x > p)
    }
}

pub fn build_pgrid(l: f64, r: f64, l0: f64, np: usize) -> Result<PGrid> {
    if np == 0 || np % 2 != 0 {
        return Err(SchrError::InvalidInput(format!("Np must be even and positive, got {np}")));
    }
    if !(l < l0 && l0 <= 0.0 && 0.0 < r) {
        return Err(SchrError::InvalidInput(format!("need L < L0 <= 0 < R, got L = {l}, L0 = {l0}, R = {r}")));
    }
    let dp = (r - l) / np as f64;
    let nodes = (0..np).map(|k| l + k as f64 * dp).collect();
    let half = (np / 2) as i64;
    let modes = (-half..half).map(|m| 2.0 * PI * m as f64 / (r - l)).collect();
    Ok(PGrid { l, r, l0, np, dp, nodes, modes })
}

/// How the largest left-moving speed s_* is obtained from H1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpeedEstimate {
    /// |λ_min(H1)| from an eigen-solve.
    Eigen,
    /// The Gershgorin lower bound of H1, which never underestimates.
    Gershgorin,
}

pub fn left_speed(pair: &HermitianPair, how: SpeedEstimate) -> Result<f64> {
    let lo = match how {
        SpeedEstimate::Eigen => hermitian_extremes(&pair.h1)?.0,
        SpeedEstimate::Gershgorin => pair.h1.gershgorin().0,
    };
    Ok((-lo).max(0.0))
}

/// L = L0 − s_*·T with s_* from the eigenvalues of H1.
pub fn estimate_left_boundary(pair: &HermitianPair, t: f64, l0: f64) -> Result<f64> {
    estimate_left_boundary_with(pair, t, l0, SpeedEstimate::Eigen)
}

pub fn estimate_left_boundary_with(pair: &HermitianPair, t: f64, l0: f64, how: SpeedEstimate) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(SchrError::InvalidInput(format!("T must be non-negative, got {t}")));
    }
    Ok(l0 - left_speed(pair, how)? * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;

    fn diag_pair(d: f64) -> HermitianPair {
        HermitianPair { h1: SparseMatrix::from_real_rows(&[vec![d]]), h2: SparseMatrix::zeros(1, 1) }
    }

    #[test]
    fn small_grid_nodes_and_modes() {
        let g = build_pgrid(-1.0, 1.0, -0.5, 4).unwrap();
        assert_eq!(g.nodes, vec![-1.0, -0.5, 0.0, 0.5]);
        assert_eq!(g.modes, vec![-2.0 * PI, -PI, 0.0, PI]);
        let g = build_pgrid(-4.0, 4.0, -1.0, 8).unwrap();
        assert_eq!(g.dp, 1.0);
        for (s, m) in g.modes.iter().enumerate() {
            assert_eq!(*m, 2.0 * PI * g.mode_number(s) as f64 / 8.0);
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(build_pgrid(-1.0, 1.0, -0.5, 5).is_err());
        assert!(build_pgrid(-1.0, 1.0, -2.0, 4).is_err());
        assert!(build_pgrid(-1.0, -0.1, -0.5, 4).is_err());
    }

    #[test]
    fn left_boundary_examples() {
        assert_eq!(estimate_left_boundary(&diag_pair(-3.0), 0.0, -1.0).unwrap(), -1.0);
        assert!((estimate_left_boundary(&diag_pair(-3.0), 2.0, -1.0).unwrap() + 7.0).abs() < 1e-12);
    }
}
