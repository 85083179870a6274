use rayon::prelude::*;

use super::field::WarpedField;
use super::grid::PGrid;
use crate::error::{Result, SchrError};
use crate::linalg::{band_cost, hermitian_eigh, solve_shifted_hermitian, BorderedLu, SparseMatrix, C64, I, ONE, ZERO};
use crate::ode::HermitianPair;

/// The Fourier-space system d w̃_l/dt = B_l w̃_l with B_l = −iμ_l·H1 + i·H2.
/// Modes never couple, so only H1, H2 and the grid are stored and blocks
/// are formed on demand.
#[derive(Clone, Debug)]
pub struct SchrodingerSystem {
    pub pair: HermitianPair,
    pub grid: PGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvolveScheme {
    BackwardEuler,
    /// Trapezoidal rule; time-dependent generators are frozen at mid-step.
    CrankNicolson,
    ForwardEuler,
    ExactBlockExponential,
}

pub fn assemble_schrodinger(pair: &HermitianPair, grid: &PGrid) -> SchrodingerSystem {
    SchrodingerSystem { pair: pair.clone(), grid: grid.clone() }
}

impl SchrodingerSystem {
    pub fn n(&self) -> usize {
        self.pair.n()
    }

    /// B_l for storage slot `s`.
    pub fn block(&self, s: usize) -> SparseMatrix {
        block_of(&self.pair, self.grid.modes[s])
    }

    /// i·B_l = μ_l·H1 − H2, Hermitian by construction.
    pub fn hamiltonian_block(&self, s: usize) -> SparseMatrix {
        hamiltonian_of(&self.pair, self.grid.modes[s])
    }

    pub fn blocks(&self) -> Vec<SparseMatrix> {
        (0..self.grid.np).map(|s| self.block(s)).collect()
    }

    /// Bound on Δt·max_l ‖B_l‖₂ from max|μ|·‖H1‖₂ + ‖H2‖₂, with the
    /// norms bounded by Gershgorin discs.
    pub fn forward_euler_bound(&self, dt: f64) -> f64 {
        dt * (self.grid.max_abs_mode() * spectral_bound(&self.pair.h1) + spectral_bound(&self.pair.h2))
    }
}

fn spectral_bound(h: &SparseMatrix) -> f64 {
    let (lo, hi) = h.gershgorin();
    lo.abs().max(hi.abs())
}

fn block_of(pair: &HermitianPair, mu: f64) -> SparseMatrix {
    SparseMatrix::lin_comb(C64::new(0.0, -mu), &pair.h1, I, &pair.h2)
}

fn hamiltonian_of(pair: &HermitianPair, mu: f64) -> SparseMatrix {
    SparseMatrix::lin_comb(C64::new(mu, 0.0), &pair.h1, C64::new(-1.0, 0.0), &pair.h2)
}

// above this the backward-Euler blocks are solved iteratively
const DIRECT_COST_PER_ROW: usize = 64;
const CG_TOL: f64 = 1e-13;
const CG_MAX_ITER: usize = 5000;
const CG_ACCEPT: f64 = 1e-10;

enum BlockSolver {
    Direct(BorderedLu),
    Iterative(SparseMatrix),
}

impl BlockSolver {
    // factors I − h·B
    fn new(pair: &HermitianPair, mu: f64, h: f64, s: usize, step: usize, grid: &PGrid) -> Result<Self> {
        let n = pair.n();
        let b = block_of(pair, mu);
        let m = SparseMatrix::lin_comb(ONE, &SparseMatrix::identity(n), C64::new(-h, 0.0), &b);
        if n <= 64 || band_cost(&m) <= DIRECT_COST_PER_ROW * n {
            let lu = BorderedLu::factor(&m).map_err(|_| SchrError::Singular { step, mode: Some(grid.mode_number(s)) })?;
            Ok(BlockSolver::Direct(lu))
        } else {
            Ok(BlockSolver::Iterative(hamiltonian_of(pair, mu)))
        }
    }

    // x ← (I − h·B)^{-1} x
    fn solve(&self, x: &mut Vec<C64>, h: f64, step: usize, mode: i64) -> Result<()> {
        match self {
            BlockSolver::Direct(lu) => lu.solve_in_place(x),
            BlockSolver::Iterative(k) => {
                // I − h·B = I + ih·K with K = iB Hermitian
                let y = x.clone();
                let (_, res) = solve_shifted_hermitian(k, h, &y, x, CG_TOL, CG_MAX_ITER);
                if !(res <= CG_ACCEPT) {
                    return Err(SchrError::NoConvergence { step, mode, residual: res });
                }
            }
        }
        Ok(())
    }
}

fn columns(w: &WarpedField) -> Vec<Vec<C64>> {
    (0..w.np).map(|s| w.column(s)).collect()
}

fn from_columns(n: usize, cols: Vec<Vec<C64>>) -> WarpedField {
    let mut w = WarpedField::zeros(n, cols.len());
    for (s, c) in cols.iter().enumerate() {
        w.set_column(s, c);
    }
    w
}

fn check_shapes(sys_n: usize, grid: &PGrid, w: &WarpedField) -> Result<()> {
    if w.n != sys_n {
        return Err(SchrError::Shape { expected: sys_n, got: w.n });
    }
    if w.np != grid.np {
        return Err(SchrError::Shape { expected: grid.np, got: w.np });
    }
    Ok(())
}

/// Evolve every mode block independently from 0 to `t_end`.
pub fn evolve(sys: &SchrodingerSystem, w0: &WarpedField, t_end: f64, nt: usize, scheme: EvolveScheme) -> Result<WarpedField> {
    check_shapes(sys.n(), &sys.grid, w0)?;
    if t_end == 0.0 {
        return Ok(w0.clone());
    }
    if !(t_end > 0.0) || (nt == 0 && scheme != EvolveScheme::ExactBlockExponential) {
        return Err(SchrError::InvalidInput(format!("need T > 0 and Nt >= 1 (T = {t_end}, Nt = {nt})")));
    }
    let dt = t_end / nt.max(1) as f64;
    if scheme == EvolveScheme::ForwardEuler {
        let bound = sys.forward_euler_bound(dt);
        if bound > 1.0 {
            log::warn!("forward Euler on skew-Hermitian blocks: Δt·max‖B_l‖ bound = {bound:.3e} > 1");
        } else {
            log::info!("forward Euler stability bound Δt·max‖B_l‖ = {bound:.3e}");
        }
    }
    let cols = columns(w0);
    let out: Result<Vec<Vec<C64>>> = cols
        .into_par_iter()
        .enumerate()
        .map(|(s, mut x)| {
            let mu = sys.grid.modes[s];
            let mode = sys.grid.mode_number(s);
            match scheme {
                EvolveScheme::BackwardEuler => {
                    let solver = BlockSolver::new(&sys.pair, mu, dt, s, 1, &sys.grid)?;
                    for m in 0..nt {
                        solver.solve(&mut x, dt, m + 1, mode)?;
                    }
                }
                EvolveScheme::CrankNicolson => {
                    let b = block_of(&sys.pair, mu);
                    let solver = BlockSolver::new(&sys.pair, mu, 0.5 * dt, s, 1, &sys.grid)?;
                    for m in 0..nt {
                        cn_step(&b, &solver, &mut x, dt, m + 1, mode)?;
                    }
                }
                EvolveScheme::ForwardEuler => {
                    let b = block_of(&sys.pair, mu);
                    let mut bx = vec![ZERO; x.len()];
                    for _ in 0..nt {
                        b.matvec_into(&x, &mut bx);
                        for (xi, d) in x.iter_mut().zip(&bx) {
                            *xi += d * dt;
                        }
                    }
                }
                EvolveScheme::ExactBlockExponential => {
                    x = exp_apply(&hamiltonian_of(&sys.pair, mu), t_end, &x)?;
                }
            }
            Ok(x)
        })
        .collect();
    Ok(from_columns(w0.n, out?))
}

// x ← (I − Δt/2·B)^{-1}(I + Δt/2·B) x
fn cn_step(b: &SparseMatrix, solver: &BlockSolver, x: &mut Vec<C64>, dt: f64, step: usize, mode: i64) -> Result<()> {
    let bx = b.matvec(x);
    for (xi, d) in x.iter_mut().zip(&bx) {
        *xi += d * (0.5 * dt);
    }
    solver.solve(x, 0.5 * dt, step, mode)
}

// e^{−iTK} x for Hermitian K via K = U Λ U†
fn exp_apply(k: &SparseMatrix, t: f64, x: &[C64]) -> Result<Vec<C64>> {
    let n = k.nrows();
    if n > 256 {
        log::warn!("exact block exponential on a {n}×{n} block; intended for small verification runs");
    }
    let (lam, u) = hermitian_eigh(k.to_dense())?;
    let xv = nalgebra::DVector::from_column_slice(x);
    let mut y = u.adjoint() * xv;
    for (yi, l) in y.iter_mut().zip(lam) {
        *yi *= C64::new(0.0, -l * t).exp();
    }
    Ok((u * y).iter().copied().collect())
}

/// Blocks rebuilt at every step from `pair_at(t_{m+1})` (backward Euler)
/// or `pair_at(t_{m+1/2})` (Crank–Nicolson).
pub fn evolve_time_dependent(
    pair_at: &(dyn Fn(f64) -> Result<HermitianPair> + Sync),
    grid: &PGrid,
    w0: &WarpedField,
    t_end: f64,
    nt: usize,
    scheme: EvolveScheme,
) -> Result<WarpedField> {
    if t_end == 0.0 {
        return Ok(w0.clone());
    }
    if !matches!(scheme, EvolveScheme::BackwardEuler | EvolveScheme::CrankNicolson) {
        return Err(SchrError::InvalidInput(
            "time-dependent generators are evolved with backward Euler or Crank-Nicolson only".into(),
        ));
    }
    let cn = scheme == EvolveScheme::CrankNicolson;
    if !(t_end > 0.0) || nt == 0 {
        return Err(SchrError::InvalidInput(format!("need T > 0 and Nt >= 1 (T = {t_end}, Nt = {nt})")));
    }
    let dt = t_end / nt as f64;
    let mut cols = columns(w0);
    for m in 0..nt {
        let t1 = dt * (m as f64 + if cn { 0.5 } else { 1.0 });
        let pair = pair_at(t1)?;
        check_shapes(pair.n(), grid, w0)?;
        cols.par_iter_mut().enumerate().try_for_each(|(s, x)| -> Result<()> {
            let mu = grid.modes[s];
            let mode = grid.mode_number(s);
            if cn {
                let solver = BlockSolver::new(&pair, mu, 0.5 * dt, s, m + 1, grid)?;
                cn_step(&block_of(&pair, mu), &solver, x, dt, m + 1, mode)
            } else {
                let solver = BlockSolver::new(&pair, mu, dt, s, m + 1, grid)?;
                solver.solve(x, dt, m + 1, mode)
            }
        })?;
    }
    Ok(from_columns(w0.n, cols))
}
