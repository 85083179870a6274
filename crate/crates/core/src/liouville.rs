//! Finite-volume solver for the 1-D Liouville equation
//! f_t + c(x)·sign(ξ)·f_x − c'(x)|ξ|·f_ξ = 0 with Hamiltonian-preserving
//! fluxes at speed discontinuities.
//!
//! Speeds are stored as one-sided limits at every x-edge: `c_left[e]` is the
//! limit from inside cell e−1 and `c_right[e]` the limit from inside cell e.
//! At an edge, the flux value seen from the left cell is `f_plus` and the
//! one seen from the right cell is `f_minus`.

use rayon::prelude::*;

use crate::error::{Result, SchrError};
use crate::linalg::{SparseMatrix, TripletBuilder, C64};
use crate::ode::{LinearOdeSystem, MatrixFn, SourceFn};

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMesh {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
    pub xi_lo: f64,
    pub xi_hi: f64,
    pub m: usize,
    pub dx: f64,
    pub dxi: f64,
    pub c_left: Vec<f64>,
    pub c_right: Vec<f64>,
}

impl PhaseMesh {
    pub fn new(
        (x_lo, x_hi, n): (f64, f64, usize),
        (xi_lo, xi_hi, m): (f64, f64, usize),
        c_left: Vec<f64>,
        c_right: Vec<f64>,
    ) -> Result<Self> {
        if !(x_lo < x_hi) || n == 0 {
            return Err(SchrError::InvalidInput("x-range must be non-empty".into()));
        }
        if m == 0 || m % 2 != 0 || !(xi_lo < 0.0) || (xi_lo + xi_hi).abs() > 1e-12 * xi_hi.abs() {
            return Err(SchrError::InvalidInput("ξ-grid must be symmetric about 0 with an even cell count".into()));
        }
        if c_left.len() != n + 1 || c_right.len() != n + 1 {
            return Err(SchrError::Shape { expected: n + 1, got: c_left.len().min(c_right.len()) });
        }
        if c_left.iter().chain(&c_right).any(|c| !(*c > 0.0)) {
            return Err(SchrError::InvalidInput("wave speeds must be positive".into()));
        }
        Ok(PhaseMesh {
            x_lo,
            x_hi,
            n,
            xi_lo,
            xi_hi,
            m,
            dx: (x_hi - x_lo) / n as f64,
            dxi: (xi_hi - xi_lo) / m as f64,
            c_left,
            c_right,
        })
    }

    /// Constant speed c⁻ left of `x_interface` and c⁺ right of it; the
    /// interface must lie on an x-edge.
    pub fn piecewise_constant(
        x: (f64, f64, usize),
        xi: (f64, f64, usize),
        x_interface: f64,
        c_minus: f64,
        c_plus: f64,
    ) -> Result<Self> {
        let (x_lo, x_hi, n) = x;
        let dx = (x_hi - x_lo) / n as f64;
        let pos = (x_interface - x_lo) / dx;
        let e0 = pos.round();
        if (pos - e0).abs() > 1e-9 || e0 < 0.0 || e0 > n as f64 {
            return Err(SchrError::InvalidInput("speed discontinuity must lie on an x-edge".into()));
        }
        let e0 = e0 as usize;
        let c_left = (0..=n).map(|e| if e <= e0 { c_minus } else { c_plus }).collect();
        let c_right = (0..=n).map(|e| if e < e0 { c_minus } else { c_plus }).collect();
        Self::new(x, xi, c_left, c_right)
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.dx
    }

    pub fn x_edge(&self, e: usize) -> f64 {
        self.x_lo + e as f64 * self.dx
    }

    pub fn xi_center(&self, j: usize) -> f64 {
        self.xi_lo + (j as f64 + 0.5) * self.dxi
    }

    /// Index of the center −ξ_j.
    pub fn mirror(&self, j: usize) -> usize {
        self.m - 1 - j
    }

    /// c_i = (c⁻_{i−1/2} + c⁺_{i+1/2})/2 with both limits taken inside cell i.
    pub fn cell_speed(&self, i: usize) -> f64 {
        0.5 * (self.c_right[i] + self.c_left[i + 1])
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.m + j
    }

    pub fn len(&self) -> usize {
        self.n * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_abs_xi(&self) -> f64 {
        self.xi_center(self.m - 1).abs().max(self.xi_center(0).abs())
    }

    pub fn interface_edges(&self) -> Vec<usize> {
        (1..self.n).filter(|&e| self.c_left[e] != self.c_right[e]).collect()
    }
}

/// Cell averages f_ij, row-major in i.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    pub n: usize,
    pub m: usize,
    pub values: Vec<f64>,
}

impl PhaseField {
    pub fn zeros(mesh: &PhaseMesh) -> Self {
        PhaseField { n: mesh.n, m: mesh.m, values: vec![0.0; mesh.len()] }
    }

    pub fn from_fn(mesh: &PhaseMesh, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let values = (0..mesh.len())
            .into_par_iter()
            .map(|k| f(mesh.x_center(k / mesh.m), mesh.xi_center(k % mesh.m)))
            .collect();
        PhaseField { n: mesh.n, m: mesh.m, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transmission {
    pub a_t: f64,
    pub a_r: f64,
}

/// a_R = ((c⁺ − c⁻)/(c⁺ + c⁻))², a_T = 1 − a_R.
pub fn transmission_coefficients(c_minus: f64, c_plus: f64) -> Result<Transmission> {
    if !(c_minus > 0.0 && c_plus > 0.0) {
        return Err(SchrError::InvalidInput("wave speeds must be positive".into()));
    }
    let r = (c_plus - c_minus) / (c_plus + c_minus);
    let a_r = r * r;
    Ok(Transmission { a_t: 1.0 - a_r, a_r })
}

/// ξ₁⁺ = √(ρ²(ξ₁⁻)² + (ρ² − 1)(ξ₂)²) with ρ = c⁻/c⁺.
pub fn refracted_velocity_2d(xi1_minus: f64, xi2: f64, rho: f64) -> Result<f64> {
    if !(xi1_minus > 0.0) {
        return Err(SchrError::InvalidInput("incoming normal velocity must be positive".into()));
    }
    let rad = rho * rho * xi1_minus * xi1_minus + (rho * rho - 1.0) * xi2 * xi2;
    if rad < 0.0 {
        return Err(SchrError::OutOfRegime(format!("total internal reflection (radicand {rad:.3e})")));
    }
    Ok(rad.sqrt())
}

/// Linear combination of at most three cell values.
#[derive(Clone, Copy, Debug, Default)]
struct Terms {
    idx: [usize; 3],
    w: [f64; 3],
    len: usize,
}

impl Terms {
    fn one(idx: usize) -> Self {
        Terms { idx: [idx, 0, 0], w: [1.0, 0.0, 0.0], len: 1 }
    }

    fn push(&mut self, idx: usize, w: f64) {
        if w != 0.0 {
            self.idx[self.len] = idx;
            self.w[self.len] = w;
            self.len += 1;
        }
    }

    fn eval(&self, f: &[f64]) -> f64 {
        (0..self.len).map(|k| self.w[k] * f[self.idx[k]]).sum()
    }

    fn emit(&self, scale: f64, out: &mut Vec<(usize, f64)>) {
        for k in 0..self.len {
            out.push((self.idx[k], scale * self.w[k]));
        }
    }
}

/// Linear interpolation of cell i at velocity ξ′; zero when ξ′ is outside
/// the ξ-range, nearest center when it falls beyond the outermost centers.
/// The flag reports either event.
fn interp_terms(mesh: &PhaseMesh, i: usize, xi: f64, scale: f64, t: &mut Terms) -> bool {
    if xi < mesh.xi_lo || xi > mesh.xi_hi {
        return true;
    }
    let x0 = mesh.xi_center(0);
    let kf = ((xi - x0) / mesh.dxi).floor();
    if kf < 0.0 {
        t.push(mesh.idx(i, 0), scale);
        return true;
    }
    let k = kf as usize;
    if k + 1 >= mesh.m {
        t.push(mesh.idx(i, mesh.m - 1), scale);
        return true;
    }
    let w = (xi - mesh.xi_center(k)) / mesh.dxi;
    t.push(mesh.idx(i, k), scale * (1.0 - w));
    t.push(mesh.idx(i, k + 1), scale * w);
    false
}

/// (plus, minus, off-grid flag) stencils at edge e for velocity j.
fn edge_terms(mesh: &PhaseMesh, e: usize, j: usize) -> (Terms, Terms, bool) {
    let xi = mesh.xi_center(j);
    let n = mesh.n;
    // zero inflow through the outer boundaries
    if e == 0 {
        return if xi > 0.0 { (Terms::default(), Terms::default(), false) } else {
            let t = Terms::one(mesh.idx(0, j));
            (t, t, false)
        };
    }
    if e == n {
        return if xi < 0.0 { (Terms::default(), Terms::default(), false) } else {
            let t = Terms::one(mesh.idx(n - 1, j));
            (t, t, false)
        };
    }
    let (cl, cr) = (mesh.c_left[e], mesh.c_right[e]);
    if cl == cr {
        let t = Terms::one(if xi > 0.0 { mesh.idx(e - 1, j) } else { mesh.idx(e, j) });
        return (t, t, false);
    }
    let tr = transmission_coefficients(cl, cr).expect("mesh speeds are positive");
    let mj = mesh.mirror(j);
    let mut other = Terms::default();
    if xi > 0.0 {
        // right-side value: transmitted from the left at c⁻|ξ′| = c⁺|ξ_j|,
        // plus the reflection of the left-moving −ξ_j on the right
        let off = interp_terms(mesh, e - 1, (cr / cl) * xi, tr.a_t, &mut other);
        other.push(mesh.idx(e, mj), tr.a_r);
        (Terms::one(mesh.idx(e - 1, j)), other, off)
    } else {
        let off = interp_terms(mesh, e, (cl / cr) * xi, tr.a_t, &mut other);
        other.push(mesh.idx(e - 1, mj), tr.a_r);
        (other, Terms::one(mesh.idx(e, j)), off)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeFlux {
    /// value seen from the left cell
    pub f_plus: f64,
    /// value seen from the right cell
    pub f_minus: f64,
}

/// Numerical x-flux values at edge `e` (0..=N) for velocity index j.
pub fn hp_flux_x(f: &PhaseField, e: usize, j: usize, mesh: &PhaseMesh) -> EdgeFlux {
    let (p, m, off) = edge_terms(mesh, e, j);
    if off {
        log::debug!("refracted velocity off the ξ-grid at edge {e}, j = {j}");
    }
    EdgeFlux { f_plus: p.eval(&f.values), f_minus: m.eval(&f.values) }
}

fn xi_coefficient(mesh: &PhaseMesh, i: usize) -> f64 {
    mesh.c_left[i + 1] - mesh.c_right[i]
}

/// Upwind ξ-difference for cell (i, j): backward when the ξ-velocity
/// −(c⁺_{i+1/2} − c⁻_{i−1/2})|ξ_j|/(ΔxΔξ) is non-negative, forward otherwise.
/// Missing neighbours are zero.
pub fn xi_flux_difference(f: &PhaseField, i: usize, j: usize, mesh: &PhaseMesh) -> f64 {
    let kappa = xi_coefficient(mesh, i);
    let at = |jj: isize| if jj < 0 || jj >= mesh.m as isize { 0.0 } else { f.get(i, jj as usize) };
    let j = j as isize;
    if -kappa >= 0.0 {
        at(j) - at(j - 1)
    } else {
        at(j + 1) - at(j)
    }
}

// coefficients of row (i, j) of the semi-discrete operator
fn row_terms(mesh: &PhaseMesh, i: usize, j: usize, out: &mut Vec<(usize, f64)>) -> bool {
    out.clear();
    let xi = mesh.xi_center(j);
    let s = -mesh.cell_speed(i) * xi.signum() / mesh.dx;
    let (plus_r, _, off_r) = edge_terms(mesh, i + 1, j);
    let (_, minus_l, off_l) = edge_terms(mesh, i, j);
    plus_r.emit(s, out);
    minus_l.emit(-s, out);
    let kappa = xi_coefficient(mesh, i);
    if kappa != 0.0 {
        let coef = kappa * xi.abs() / (mesh.dx * mesh.dxi);
        let (a, b) = if -kappa >= 0.0 { (j as isize, j as isize - 1) } else { (j as isize + 1, j as isize) };
        for (jj, w) in [(a, coef), (b, -coef)] {
            if jj >= 0 && (jj as usize) < mesh.m {
                out.push((mesh.idx(i, jj as usize), w));
            }
        }
    }
    off_r || off_l
}

/// df/dt of the semi-discrete scheme, evaluated without forming a matrix.
pub fn liouville_rhs(f: &PhaseField, mesh: &PhaseMesh) -> PhaseField {
    let mut out = PhaseField::zeros(mesh);
    let off = rhs_into(&f.values, mesh, &mut out.values);
    if off > 0 {
        log::debug!("{off} flux evaluations used off-grid refracted velocities");
    }
    out
}

fn rhs_into(f: &[f64], mesh: &PhaseMesh, out: &mut [f64]) -> usize {
    out.par_chunks_mut(mesh.m)
        .enumerate()
        .map(|(i, row)| {
            let mut buf = Vec::with_capacity(12);
            let mut off = 0;
            for (j, r) in row.iter_mut().enumerate() {
                if row_terms(mesh, i, j, &mut buf) {
                    off += 1;
                }
                *r = buf.iter().map(|&(k, w)| w * f[k]).sum();
            }
            off
        })
        .sum()
}

/// Sparse operator A with A·vec(f) = vec(liouville_rhs(f)).
pub fn assemble_liouville_operator(mesh: &PhaseMesh, cap: usize) -> Result<SparseMatrix> {
    let n = mesh.len();
    if n > cap {
        return Err(SchrError::SizeCap { size: n, cap });
    }
    let mut t = TripletBuilder::with_capacity(n, n, 6 * n);
    let mut buf = Vec::with_capacity(12);
    for i in 0..mesh.n {
        for j in 0..mesh.m {
            row_terms(mesh, i, j, &mut buf);
            for &(k, w) in &buf {
                t.push(mesh.idx(i, j), k, C64::new(w, 0.0));
            }
        }
    }
    Ok(t.build())
}

/// Default cap on N·M for matrix assembly.
pub const LIOUVILLE_CAP: usize = 250_000;

/// Homogeneous linear system for the phase-space density (zero inflow).
pub fn assemble_liouville_matrix(mesh: &PhaseMesh, initial: &PhaseField) -> Result<LinearOdeSystem> {
    let a = assemble_liouville_operator(mesh, LIOUVILLE_CAP)?;
    let u0 = initial.values.iter().map(|&v| C64::new(v, 0.0)).collect();
    LinearOdeSystem::new(MatrixFn::Constant(a), SourceFn::Zero, u0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CflBound {
    /// bound for the Hamiltonian-preserving scheme
    pub dt: f64,
    /// bound for a direct upwind discretisation that differentiates c across jumps
    pub dt_direct_upwind: f64,
}

pub fn cfl_timestep(mesh: &PhaseMesh, safety: f64) -> CflBound {
    let cmax = (0..mesh.n).map(|i| mesh.cell_speed(i)).fold(0.0, f64::max);
    let xmax = mesh.max_abs_xi();
    let kmax = (0..mesh.n).map(|i| xi_coefficient(mesh, i).abs()).fold(0.0, f64::max);
    let jump = (0..=mesh.n).map(|e| (mesh.c_right[e] - mesh.c_left[e]).abs()).fold(kmax, f64::max);
    let transport = mesh.dx / cmax;
    let hp = if kmax > 0.0 { mesh.dxi / (kmax * xmax / mesh.dx) } else { f64::INFINITY };
    let direct = if jump > 0.0 { mesh.dx * mesh.dxi / (jump * xmax) } else { f64::INFINITY };
    CflBound { dt: safety * transport.min(hp), dt_direct_upwind: safety * transport.min(direct) }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStats {
    /// smallest value seen over all steps
    pub min_value: f64,
    /// steps after which some value was negative (below −1e-14)
    pub negative_steps: usize,
}

/// Forward Euler with the matrix-free right-hand side.
pub fn forward_euler(f0: &PhaseField, mesh: &PhaseMesh, t_end: f64, nt: usize) -> Result<(PhaseField, StepStats)> {
    if nt == 0 || !(t_end >= 0.0) {
        return Err(SchrError::InvalidInput("need T >= 0 and Nt >= 1".into()));
    }
    let dt = t_end / nt as f64;
    let cfl = cfl_timestep(mesh, 1.0);
    if dt > cfl.dt * (1.0 + 1e-12) {
        log::warn!("Δt = {dt:.4e} exceeds the CFL bound {:.4e}", cfl.dt);
    }
    let mut f = f0.clone();
    let mut rhs = vec![0.0; mesh.len()];
    let mut stats = StepStats { min_value: f.min(), negative_steps: 0 };
    let mut off_total = 0;
    for _ in 0..nt {
        off_total += rhs_into(&f.values, mesh, &mut rhs);
        f.values.par_iter_mut().zip(&rhs).for_each(|(v, r)| *v += dt * r);
        let mn = f.min();
        if !mn.is_finite() {
            return Err(SchrError::OutOfRegime("forward Euler produced non-finite values".into()));
        }
        stats.min_value = stats.min_value.min(mn);
        if mn < -1e-14 {
            stats.negative_steps += 1;
        }
    }
    if off_total > 0 {
        log::info!("{off_total} flux evaluations used off-grid refracted velocities");
    }
    Ok((f, stats))
}
