use super::evolve::{assemble_schrodinger, evolve, evolve_time_dependent, EvolveScheme, SchrodingerSystem};
use super::field::{warp_initial, TransformPlan, WarpedField};
use super::grid::{build_pgrid, PGrid, SpeedEstimate};
use super::recover::{recover, RecoveryOptions};
use crate::error::{Result, SchrError, Stage};
use crate::linalg::{hermitian_extremes, norm2, C64};
use crate::ode::{augment_scaled, hermitian_split, HermitianPair, LinearOdeSystem};

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub t_end: f64,
    pub nt: usize,
    pub np: usize,
    pub r: f64,
    pub l0: f64,
    pub alpha_neg: f64,
    pub scheme: EvolveScheme,
    pub recovery: RecoveryOptions,
    pub speed: SpeedEstimate,
    /// Scale the augmentation by θ = max(1, max_t ‖b(t)‖).
    pub scale_augmentation: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            t_end: 1.0,
            nt: 100,
            np: 64,
            r: 10.0,
            l0: -1.0,
            alpha_neg: 10.0,
            scheme: EvolveScheme::BackwardEuler,
            recovery: RecoveryOptions::default(),
            speed: SpeedEstimate::Eigen,
            scale_augmentation: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Recovered state at T (auxiliary component removed).
    pub u: Vec<C64>,
    /// Recovered auxiliary component divided by θ; exactly 1 in exact arithmetic.
    pub aux: Option<C64>,
    pub theta: f64,
    pub grid: PGrid,
    /// Right-moving front max(λ_max(H1), 0)·T.
    pub front: f64,
    pub left_speed: f64,
    pub recovery_node: usize,
    /// Share of ‖w‖² in the leftmost 5% of p-nodes after evolution.
    pub left_mass_fraction: f64,
    pub warnings: Vec<String>,
}

/// Homogeneous system handed to the engine plus augmentation data.
pub struct Prepared {
    pub system: LinearOdeSystem,
    pub augmented: bool,
    pub theta: f64,
    pub grid: PGrid,
    pub left_speed: f64,
    pub max_eigenvalue: f64,
}

const EIGEN_SAMPLES: usize = 21;

fn step_times(t_end: f64, nt: usize) -> Vec<f64> {
    (0..=nt).map(|m| t_end * m as f64 / nt as f64).collect()
}

fn sample(times: &[f64], k: usize) -> Vec<f64> {
    if times.len() <= k {
        return times.to_vec();
    }
    (0..k).map(|i| times[i * (times.len() - 1) / (k - 1)]).collect()
}

/// Augment if needed, split, estimate the left boundary and build the grid.
pub fn prepare(system: &LinearOdeSystem, opts: &PipelineOptions) -> Result<Prepared> {
    if opts.nt == 0 {
        return Err(SchrError::InvalidInput("Nt must be >= 1".into()));
    }
    if !(opts.t_end >= 0.0 && opts.t_end.is_finite()) {
        return Err(SchrError::InvalidInput("T must be finite and >= 0".into()));
    }
    let times = step_times(opts.t_end, opts.nt);
    let augmented = system.has_source();
    let (sys, theta) = if augmented {
        let mut theta: f64 = 1.0;
        if opts.scale_augmentation {
            for &t in &times {
                if let Some(b) = system.b_at(t).map_err(|e| e.at(Stage::Augment))? {
                    theta = theta.max(norm2(&b));
                }
            }
        }
        (augment_scaled(system, theta), theta)
    } else {
        (system.clone(), 1.0)
    };
    let constant = sys.is_constant();
    let eigen_times = if constant { vec![0.0] } else { sample(&times, EIGEN_SAMPLES) };
    let mut left = 0.0f64;
    let mut right = f64::NEG_INFINITY;
    for &t in &eigen_times {
        let pair = split_at(&sys, t)?;
        let (lo, hi) = hermitian_extremes(&pair.h1).map_err(|e| e.at(Stage::LeftBoundary))?;
        right = right.max(hi);
        if opts.speed == SpeedEstimate::Eigen {
            left = left.max(-lo);
        }
    }
    if opts.speed == SpeedEstimate::Gershgorin {
        let g_times = if constant { vec![0.0] } else { times.clone() };
        for &t in &g_times {
            let pair = split_at(&sys, t)?;
            left = left.max(-pair.h1.gershgorin().0);
        }
    }
    let l = opts.l0 - left * opts.t_end;
    let l = if l < opts.l0 { l } else { opts.l0 - 1e-12_f64.max(opts.l0.abs() * 1e-12) };
    let grid = build_pgrid(l, opts.r, opts.l0, opts.np).map_err(|e| e.at(Stage::Grid))?;
    Ok(Prepared { system: sys, augmented, theta, grid, left_speed: left, max_eigenvalue: right })
}

fn split_at(sys: &LinearOdeSystem, t: f64) -> Result<HermitianPair> {
    let a = sys.a_at(t).map_err(|e| e.at(Stage::Split))?;
    hermitian_split(&a).map_err(|e| e.at(Stage::Split))
}

/// The Fourier-space system at time t (the generator is constant for
/// constant systems).
pub fn assembled_system(prepared: &Prepared, t: f64) -> Result<SchrodingerSystem> {
    Ok(assemble_schrodinger(&split_at(&prepared.system, t)?, &prepared.grid))
}

/// Full pipeline: augment → split → L → grid → warp → transform → evolve →
/// inverse transform → recover.
pub fn schrodingerize_and_solve(system: &LinearOdeSystem, opts: &PipelineOptions) -> Result<SolveReport> {
    let prep = prepare(system, opts)?;
    let mut warnings = Vec::new();
    let grid = &prep.grid;
    let front = prep.max_eigenvalue.max(0.0) * opts.t_end;
    if opts.t_end == 0.0 {
        // nothing to evolve; hand back the data untouched
        return Ok(SolveReport {
            u: system.u0.clone(),
            aux: prep.augmented.then_some(C64::new(1.0, 0.0)),
            theta: prep.theta,
            grid: prep.grid.clone(),
            front,
            left_speed: prep.left_speed,
            recovery_node: grid.first_node_above(0.0).unwrap_or(0),
            left_mass_fraction: 0.0,
            warnings,
        });
    }
    if !prep.augmented && prep.max_eigenvalue > 1e-10 {
        warnings.push(format!("H1 has a positive eigenvalue {:.3e}; the system is not dissipative", prep.max_eigenvalue));
    }
    let plan = TransformPlan::new(grid);
    let w0 = warp_initial(&prep.system.u0, grid, opts.alpha_neg).map_err(|e| e.at(Stage::Transform))?;
    let wt0 = plan.to_fourier(&w0).map_err(|e| e.at(Stage::Transform))?;
    let wt = if prep.system.is_constant() {
        let sys = assembled_system(&prep, 0.0)?;
        if opts.scheme == EvolveScheme::ForwardEuler {
            let b = sys.forward_euler_bound(opts.t_end / opts.nt as f64);
            if b > 1.0 {
                warnings.push(format!("forward Euler stability bound {b:.3e} exceeds 1"));
            }
        }
        evolve(&sys, &wt0, opts.t_end, opts.nt, opts.scheme).map_err(|e| e.at(Stage::Evolve))?
    } else {
        let sys = &prep.system;
        let pair_at = |t: f64| split_at(sys, t);
        evolve_time_dependent(&pair_at, grid, &wt0, opts.t_end, opts.nt, opts.scheme).map_err(|e| e.at(Stage::Evolve))?
    };
    let w = plan.from_fourier(&wt).map_err(|e| e.at(Stage::Transform))?;
    let left_mass_fraction = left_mass(&w);
    if left_mass_fraction > 1e-6 {
        warnings.push(format!("left-edge mass fraction {left_mass_fraction:.3e}: waves may have wrapped around p = L"));
    }
    let (mut u, k0) = recover(&w, grid, front, &opts.recovery).map_err(|e| e.at(Stage::Recover))?;
    let aux = if prep.augmented {
        let a = u.pop().expect("augmented state has an auxiliary component");
        Some(a / prep.theta)
    } else {
        None
    };
    for msg in &warnings {
        log::warn!("{msg}");
    }
    Ok(SolveReport {
        u,
        aux,
        theta: prep.theta,
        grid: prep.grid.clone(),
        front,
        left_speed: prep.left_speed,
        recovery_node: k0,
        left_mass_fraction,
        warnings,
    })
}

/// Share of ‖w‖² in the leftmost 5% of auxiliary nodes.
pub fn left_mass(w: &WarpedField) -> f64 {
    let edge = ((w.np as f64) * 0.05).ceil() as usize;
    let mut left = 0.0;
    let mut total = 0.0;
    for i in 0..w.n {
        for (k, v) in w.component(i).iter().enumerate() {
            let m = v.norm_sqr();
            total += m;
            if k < edge {
                left += m;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        left / total
    }
}
