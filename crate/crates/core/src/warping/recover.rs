use super::field::WarpedField;
use super::grid::PGrid;
use crate::error::{Result, SchrError};
use crate::linalg::{C64, ZERO};

/// How u is read back from v(t, p) = e^{−p}u(t) on p > 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recovery {
    /// u = e^{p_k}·v(p_k) at one node.
    Point,
    /// u = e^{p_k0}·∫_{p_k0} v dp, left Riemann sum.
    Integral,
    /// Least-squares fit of v ≈ e^{−p}u over a window of nodes.
    Fit,
}

impl std::str::FromStr for Recovery {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "point" => Ok(Recovery::Point),
            "integral" => Ok(Recovery::Integral),
            "fit" => Ok(Recovery::Fit),
            _ => Err(format!("unknown recovery '{s}' (point, integral, fit)")),
        }
    }
}

/// Recovery route plus node selection. The first node used is the first
/// one above `front + margin`, where the front is how far right-moving
/// components (positive eigenvalues of H1) can have carried the p < 0 data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecoveryOptions {
    pub route: Recovery,
    pub margin: f64,
    pub window: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions { route: Recovery::Fit, margin: 0.5, window: 1.0 }
    }
}

pub fn recover_point(w: &WarpedField, grid: &PGrid, k: usize) -> Result<Vec<C64>> {
    let p = *grid
        .nodes
        .get(k)
        .ok_or_else(|| SchrError::InvalidInput(format!("node {k} out of range")))?;
    if !(p > 0.0) {
        return Err(SchrError::InvalidInput(format!("recovery node must have p > 0, got p = {p}")));
    }
    let f = p.exp();
    Ok((0..w.n).map(|i| w.get(i, k) * f).collect())
}

/// u = dp·Σ_{p_k ≥ 0} v(p_k), with no correction for the truncation at R.
pub fn recover_integral(w: &WarpedField, grid: &PGrid) -> Vec<C64> {
    let start = grid.nodes.iter().position(|&p| p >= 0.0).unwrap_or(grid.np);
    (0..w.n)
        .map(|i| w.component(i)[start..].iter().sum::<C64>() * grid.dp)
        .collect()
}

/// u = e^{p_k0}·dp·Σ_{k ≥ k0} v(p_k).
pub fn recover_integral_from(w: &WarpedField, grid: &PGrid, k0: usize) -> Vec<C64> {
    let f = grid.nodes[k0].exp() * grid.dp;
    (0..w.n).map(|i| w.component(i)[k0..].iter().sum::<C64>() * f).collect()
}

/// Least-squares projection onto e^{−p} over nodes in [p_k0, p_k0 + window].
pub fn recover_fit(w: &WarpedField, grid: &PGrid, k0: usize, window: f64) -> Vec<C64> {
    let p0 = grid.nodes[k0];
    let ks: Vec<usize> = (k0..grid.np).take_while(|&k| grid.nodes[k] <= p0 + window).collect();
    // weights relative to p0 keep the sums well scaled
    let e: Vec<f64> = ks.iter().map(|&k| (p0 - grid.nodes[k]).exp()).collect();
    let ee: f64 = e.iter().map(|x| x * x).sum();
    let scale = p0.exp() / ee;
    (0..w.n)
        .map(|i| {
            let s: C64 = ks.iter().zip(&e).fold(ZERO, |acc, (&k, &ek)| acc + w.get(i, k) * ek);
            s * scale
        })
        .collect()
}

/// Index of the first node used for recovery.
pub fn recovery_start(grid: &PGrid, front: f64, margin: f64) -> Result<usize> {
    let p = front.max(0.0) + margin.max(0.0);
    match grid.first_node_above(p) {
        Some(k) if grid.nodes[k] > 0.0 => Ok(k),
        _ => Err(SchrError::InvalidInput(format!(
            "no grid node above p = {p:.4} (R = {}); increase R or reduce T",
            grid.r
        ))),
    }
}

pub fn recover(w: &WarpedField, grid: &PGrid, front: f64, opts: &RecoveryOptions) -> Result<(Vec<C64>, usize)> {
    let k0 = recovery_start(grid, front, opts.margin)?;
    let u = match opts.route {
        Recovery::Point => recover_point(w, grid, k0)?,
        Recovery::Integral => recover_integral_from(w, grid, k0),
        Recovery::Fit => recover_fit(w, grid, k0, opts.window),
    };
    Ok((u, k0))
}
