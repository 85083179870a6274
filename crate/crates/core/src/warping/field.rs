use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use super::grid::PGrid;
use crate::error::{Result, SchrError};
use crate::linalg::{C64, ZERO};

/// n components × Np auxiliary values, component-major: entry (i, k) sits
/// at `i·Np + k`. Holds either p-space values or Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedField {
    pub n: usize,
    pub np: usize,
    pub values: Vec<C64>,
}

impl WarpedField {
    pub fn zeros(n: usize, np: usize) -> Self {
        WarpedField { n, np, values: vec![ZERO; n * np] }
    }

    pub fn component(&self, i: usize) -> &[C64] {
        &self.values[i * self.np..(i + 1) * self.np]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.values[i * self.np..(i + 1) * self.np]
    }

    pub fn get(&self, i: usize, k: usize) -> C64 {
        self.values[i * self.np + k]
    }

    /// The n-vector at auxiliary index k.
    pub fn column(&self, k: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.get(i, k)).collect()
    }

    pub fn set_column(&mut self, k: usize, v: &[C64]) {
        for (i, x) in v.iter().enumerate() {
            self.values[i * self.np + k] = *x;
        }
    }

    pub fn norm2(&self) -> f64 {
        crate::linalg::norm2(&self.values)
    }
}

/// values[i][k] = u0[i]·e^{−α|p_k|} for p_k < 0 and u0[i]·e^{−p_k} otherwise.
pub fn warp_initial(u0: &[C64], grid: &PGrid, alpha_neg: f64) -> Result<WarpedField> {
    if !(alpha_neg >= 1.0) {
        return Err(SchrError::InvalidInput(format!("alpha_neg must be >= 1, got {alpha_neg}")));
    }
    let profile: Vec<f64> = grid
        .nodes
        .iter()
        .map(|&p| if p < 0.0 { (-alpha_neg * p.abs()).exp() } else { (-p).exp() })
        .collect();
    let np = grid.np;
    let mut w = WarpedField::zeros(u0.len(), np);
    for (i, &u) in u0.iter().enumerate() {
        for k in 0..np {
            w.values[i * np + k] = u * profile[k];
        }
    }
    Ok(w)
}

/// Discrete Fourier pair on the p-grid: Φ[j][l] = e^{iμ_l(p_j − L)} and
/// Φ^{-1} = Φ†/Np, applied with an FFT.
#[derive(Clone)]
pub struct TransformPlan {
    pub grid: PGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformPlan").field("np", &self.grid.np).finish()
    }
}

impl TransformPlan {
    pub fn new(grid: &PGrid) -> Self {
        let mut planner = FftPlanner::new();
        TransformPlan {
            grid: grid.clone(),
            forward: planner.plan_fft_forward(grid.np),
            inverse: planner.plan_fft_inverse(grid.np),
        }
    }

    /// Dense Φ. Since μ_l(p_j − L) = 2π·l·j/Np this is evaluated from the
    /// integer phase to avoid round-off in the product.
    pub fn basis(&self) -> DMatrix<C64> {
        let np = self.grid.np;
        DMatrix::from_fn(np, np, |j, s| phase(self.grid.mode_number(s), j, np))
    }

    pub fn inverse_basis(&self) -> DMatrix<C64> {
        self.basis().adjoint() / C64::new(self.grid.np as f64, 0.0)
    }

    fn check(&self, w: &WarpedField) -> Result<()> {
        if w.np != self.grid.np || w.values.len() != w.n * w.np {
            return Err(SchrError::Shape { expected: self.grid.np, got: w.np });
        }
        Ok(())
    }

    /// w̃ = (I ⊗ Φ^{-1}) w
    pub fn to_fourier(&self, w: &WarpedField) -> Result<WarpedField> {
        self.check(w)?;
        let np = self.grid.np;
        let half = np / 2;
        let scale = 1.0 / np as f64;
        let mut out = w.clone();
        let mut buf = vec![ZERO; np];
        for i in 0..w.n {
            buf.copy_from_slice(w.component(i));
            self.forward.process(&mut buf);
            let dst = out.component_mut(i);
            // slot s holds l = s − Np/2, i.e. FFT bin (s + Np/2) mod Np
            for (s, d) in dst.iter_mut().enumerate() {
                *d = buf[(s + half) % np] * scale;
            }
        }
        Ok(out)
    }

    /// w = (I ⊗ Φ) w̃
    pub fn from_fourier(&self, wt: &WarpedField) -> Result<WarpedField> {
        self.check(wt)?;
        let np = self.grid.np;
        let half = np / 2;
        let mut out = wt.clone();
        let mut buf = vec![ZERO; np];
        for i in 0..wt.n {
            let src = wt.component(i);
            for (s, v) in src.iter().enumerate() {
                buf[(s + half) % np] = *v;
            }
            self.inverse.process(&mut buf);
            out.component_mut(i).copy_from_slice(&buf);
        }
        Ok(out)
    }
}

fn phase(l: i64, j: usize, np: usize) -> C64 {
    let m = (l * j as i64).rem_euclid(np as i64);
    let theta = 2.0 * std::f64::consts::PI * m as f64 / np as f64;
    C64::new(theta.cos(), theta.sin())
}
