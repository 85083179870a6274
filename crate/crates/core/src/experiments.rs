//! The model problems wired end to end: build, solve by either route,
//! compare with the exact solution, write CSVs and a plot script.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::builders::{
    build_advection_interface, build_convection_inflow, build_heat_dirichlet, build_heat_mixed, build_stefan,
    stefan_coefficients, stefan_jump_residuals, Boundary, Continuity, InterfaceSpec, Mesh1D, StefanProblem,
};
use crate::complexity::{estimate_for_system, ComplexityEstimate};
use crate::config::{scheme_name, Experiment, ExperimentConfig, Route};
use crate::csvio::{plot_script, write_error_summary, Table, PHASE_HEADER, SOLUTION_HEADER};
use crate::error::{Result, SchrError};
use crate::liouville::{
    assemble_liouville_matrix, cfl_timestep, forward_euler, transmission_coefficients, PhaseField, PhaseMesh,
};
use crate::ode::{direct_integrate, LinearOdeSystem, TimeScheme};
use crate::oracles::{
    cell_average, error_norms, exact_convection, exact_heat, exact_interface_advection, exact_optics_t1, exact_stefan,
    interface_bump, optics_initial, relative_linf, stefan_source, ErrorReport, StefanParams,
};
use crate::warping::pipeline::{assembled_system, prepare};
use crate::warping::{schrodingerize_and_solve, PipelineOptions, RecoveryOptions, SpeedEstimate};

/// Numeric solution at T on the experiment's output points.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub config: ExperimentConfig,
    pub x: Vec<f64>,
    /// ξ-coordinates for phase-space runs
    pub xi: Option<Vec<f64>>,
    pub numeric: Vec<f64>,
    pub exact: Vec<f64>,
    pub weights: Vec<f64>,
    pub errors: ErrorReport,
    pub relative_linf: f64,
    /// Direct integration on the same discretisation, when requested.
    pub direct: Option<Vec<f64>>,
    pub direct_errors: Option<ErrorReport>,
    /// Named diagnostics (left boundary, θ, residuals, ...).
    pub diagnostics: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

/// Engine options for an experiment. The model problems use the
/// Gershgorin speed, which is how their left boundaries are quoted.
pub fn pipeline_options(cfg: &ExperimentConfig) -> PipelineOptions {
    PipelineOptions {
        t_end: cfg.t_end,
        nt: cfg.nt,
        np: cfg.np,
        r: cfg.r,
        l0: cfg.l0,
        alpha_neg: cfg.alpha_neg,
        scheme: cfg.scheme,
        recovery: RecoveryOptions { route: cfg.recovery, ..RecoveryOptions::default() },
        speed: SpeedEstimate::Gershgorin,
        scale_augmentation: true,
    }
}

pub const INTERFACE_HALF_WIDTH: f64 = 10.0;
pub const OPTICS_BOX: f64 = 4.0;

/// Semi-discrete system, output nodes and exact values at T for the 1-D
/// experiments.
pub struct Problem1D {
    pub system: LinearOdeSystem,
    pub nodes: Vec<f64>,
    pub exact: Vec<f64>,
    pub dx: f64,
}

pub fn stefan_problem(p: StefanParams) -> StefanProblem {
    StefanProblem {
        beta_minus: p.beta_minus,
        beta_plus: p.beta_plus,
        alpha: Arc::new(move |t| p.alpha(t)),
        source: Arc::new(move |t, x| stefan_source(t, x, &p)),
        left: Boundary::from_fn(move |t| exact_stefan(t, 0.0, &p)),
        right: Boundary::from_fn(move |t| exact_stefan(t, 10.0, &p)),
    }
}

pub fn interface_spec() -> InterfaceSpec {
    InterfaceSpec { position: 0.0, c_minus: 2.0, c_plus: 1.0, continuity: Continuity::Flux }
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem1D> {
    let t = cfg.t_end;
    let pi = std::f64::consts::PI;
    let (system, nodes, exact, dx) = match cfg.experiment {
        Experiment::ConvectionInflow => {
            let mesh = Mesh1D::new(0.0, 10.0, cfg.nx)?;
            let sys = build_convection_inflow(&mesh, Boundary::from_fn(|s| (-s).exp()), &|x| x.exp())?;
            let nodes: Vec<f64> = (1..=mesh.nx).map(|j| mesh.x(j)).collect();
            let ex = nodes.iter().map(|&x| exact_convection(t, x)).collect();
            (sys, nodes, ex, mesh.dx)
        }
        Experiment::HeatDirichlet => {
            let mesh = Mesh1D::new(0.0, 10.0, cfg.nx)?;
            let sys = build_heat_dirichlet(&mesh, Boundary::Zero, Boundary::Zero, &|x| (pi * x).sin())?;
            let nodes: Vec<f64> = (1..mesh.nx).map(|j| mesh.x(j)).collect();
            let ex = nodes.iter().map(|&x| exact_heat(t, x)).collect();
            (sys, nodes, ex, mesh.dx)
        }
        Experiment::HeatMixed => {
            let mesh = Mesh1D::new(0.0, 10.0, cfg.nx)?;
            let h = Boundary::from_fn(move |s| pi * (-pi * pi * s).exp() * (10.0 * pi).cos());
            let sys = build_heat_mixed(&mesh, Boundary::Zero, h, &|x| (pi * x).sin())?;
            let nodes: Vec<f64> = (1..=mesh.nx).map(|j| mesh.x(j)).collect();
            let ex = nodes.iter().map(|&x| exact_heat(t, x)).collect();
            (sys, nodes, ex, mesh.dx)
        }
        Experiment::AdvectionInterface => {
            let a = INTERFACE_HALF_WIDTH;
            let mesh = Mesh1D::new(-a, a, 2 * cfg.nx)?;
            let spec = interface_spec();
            let u0 = move |x: f64| interface_bump(x, a);
            let (sys, grid) = build_advection_interface(&mesh, &spec, Boundary::Zero, &u0)?;
            let nodes = grid.nodes();
            let ex = nodes
                .iter()
                .map(|&x| exact_interface_advection(t, x, &u0, spec.c_minus, spec.c_plus, spec.rho()))
                .collect();
            (sys, nodes, ex, mesh.dx)
        }
        Experiment::Stefan => {
            let p = StefanParams::default();
            let mesh = Mesh1D::new(0.0, 10.0, cfg.nx)?;
            let sys = build_stefan(&mesh, &stefan_problem(p), &|x| exact_stefan(0.0, x, &p))?;
            let nodes: Vec<f64> = (1..mesh.nx).map(|j| mesh.x(j)).collect();
            let ex = nodes.iter().map(|&x| exact_stefan(t, x, &p)).collect();
            (sys, nodes, ex, mesh.dx)
        }
        Experiment::OpticsHp => return Err(SchrError::Config("optics-hp is a phase-space experiment".into())),
    };
    Ok(Problem1D { system, nodes, exact, dx })
}

fn real_parts(u: &[crate::C64]) -> Vec<f64> {
    u.iter().map(|z| z.re).collect()
}

/// Builds and solves without touching the filesystem.
pub fn solve_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    if cfg.experiment == Experiment::OpticsHp {
        return solve_optics(cfg);
    }
    let prob = build_problem(cfg)?;
    let mut diagnostics = Vec::new();
    let mut warnings = Vec::new();
    let schrodinger = |diagnostics: &mut Vec<(String, f64)>, warnings: &mut Vec<String>| -> Result<Vec<f64>> {
        let rep = schrodingerize_and_solve(&prob.system, &pipeline_options(cfg))?;
        diagnostics.push(("left_boundary".into(), rep.grid.l));
        diagnostics.push(("left_speed".into(), rep.left_speed));
        diagnostics.push(("front".into(), rep.front));
        diagnostics.push(("theta".into(), rep.theta));
        diagnostics.push(("recovery_node".into(), rep.grid.nodes[rep.recovery_node]));
        diagnostics.push(("left_mass_fraction".into(), rep.left_mass_fraction));
        if let Some(a) = rep.aux {
            diagnostics.push(("aux_deviation".into(), (a - 1.0).norm()));
        }
        warnings.extend(rep.warnings);
        Ok(real_parts(&rep.u))
    };
    let direct = || -> Result<Vec<f64>> {
        let tr = direct_integrate(&prob.system, TimeScheme::BackwardEuler, cfg.t_end, cfg.nt)?;
        Ok(real_parts(tr.last()))
    };
    let numeric = match cfg.route {
        Route::Schrodinger => schrodinger(&mut diagnostics, &mut warnings)?,
        Route::Direct => direct()?,
    };
    let weights = vec![prob.dx; numeric.len()];
    let errors = error_norms(&numeric, &prob.exact, &weights);
    let (direct_sol, direct_errors) = if cfg.compare_oracle && cfg.route == Route::Schrodinger {
        let d = direct()?;
        let e = error_norms(&d, &prob.exact, &weights);
        diagnostics.push(("direct_relative_linf".into(), relative_linf(&d, &prob.exact)));
        (Some(d), Some(e))
    } else {
        (None, None)
    };
    match cfg.experiment {
        Experiment::AdvectionInterface => {
            let spec = interface_spec();
            let o = cfg.nx - 1;
            diagnostics.push(("flux_residual".into(), (spec.c_minus * numeric[o] - spec.c_plus * numeric[o + 1]).abs()));
        }
        Experiment::Stefan => stefan_diagnostics(cfg, &numeric, &mut diagnostics)?,
        _ => {}
    }
    let relative_linf = relative_linf(&numeric, &prob.exact);
    Ok(Outcome {
        config: cfg.clone(),
        x: prob.nodes,
        xi: None,
        numeric,
        exact: prob.exact,
        weights,
        errors,
        relative_linf,
        direct: direct_sol,
        direct_errors,
        diagnostics,
        warnings,
    })
}

fn stefan_diagnostics(cfg: &ExperimentConfig, numeric: &[f64], diag: &mut Vec<(String, f64)>) -> Result<()> {
    let mesh = Mesh1D::new(0.0, 10.0, cfg.nx)?;
    let problem = stefan_problem(StefanParams::default());
    let mut dmin = f64::INFINITY;
    for m in 0..=cfg.nt {
        let c = stefan_coefficients(&mesh, &problem, cfg.t_end * m as f64 / cfg.nt as f64)?;
        dmin = dmin.min(c.d_k).min(c.d_k1);
    }
    diag.push(("min_denominator".into(), dmin));
    let (ju, jf) = stefan_jump_residuals(&mesh, &problem, numeric, cfg.t_end)?;
    diag.push(("jump_u".into(), ju));
    diag.push(("jump_flux".into(), jf));
    Ok(())
}

pub fn optics_mesh(n: usize, m: usize) -> Result<PhaseMesh> {
    PhaseMesh::piecewise_constant((-OPTICS_BOX, OPTICS_BOX, n), (-OPTICS_BOX, OPTICS_BOX, m), 0.0, 0.6, 0.2)
}

/// Cell averages (4×4 midpoints) of the initial density.
pub fn optics_initial_field(mesh: &PhaseMesh) -> PhaseField {
    let (dx, dxi) = (mesh.dx, mesh.dxi);
    PhaseField::from_fn(mesh, |x, xi| cell_average(&optics_initial, x, xi, dx, dxi, 4))
}

/// Cell averages of the exact density; available at T = 0 and T = 1 only.
pub fn optics_exact_field(mesh: &PhaseMesh, t: f64) -> Result<PhaseField> {
    if t == 0.0 {
        return Ok(optics_initial_field(mesh));
    }
    if t != 1.0 {
        return Err(SchrError::Config("the optics exact solution is known at T = 0 and T = 1 only".into()));
    }
    let tr = transmission_coefficients(0.6, 0.2)?;
    let (dx, dxi) = (mesh.dx, mesh.dxi);
    let f = move |x: f64, xi: f64| exact_optics_t1(x, xi, tr.a_t, tr.a_r);
    Ok(PhaseField::from_fn(mesh, |x, xi| cell_average(&f, x, xi, dx, dxi, 4)))
}

fn solve_optics(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mesh = optics_mesh(cfg.nx, cfg.m)?;
    let f0 = optics_initial_field(&mesh);
    let exact = optics_exact_field(&mesh, cfg.t_end)?;
    let cfl = cfl_timestep(&mesh, cfg.safety);
    let tr = transmission_coefficients(0.6, 0.2)?;
    let mut diagnostics = vec![
        ("a_t".to_string(), tr.a_t),
        ("a_r".to_string(), tr.a_r),
        ("cfl_dt".to_string(), cfl.dt),
        ("cfl_dt_direct_upwind".to_string(), cfl.dt_direct_upwind),
    ];
    let mut warnings = Vec::new();
    let direct = |diagnostics: &mut Vec<(String, f64)>, warnings: &mut Vec<String>| -> Result<Vec<f64>> {
        if cfg.t_end == 0.0 {
            return Ok(f0.values.clone());
        }
        let dt = cfg.t_end / cfg.nt as f64;
        if dt > cfl.dt {
            warnings.push(format!("time step {dt:.4e} exceeds the CFL bound {:.4e}", cfl.dt));
        }
        let (f, stats) = forward_euler(&f0, &mesh, cfg.t_end, cfg.nt)?;
        diagnostics.push(("min_value".into(), stats.min_value));
        diagnostics.push(("negative_steps".into(), stats.negative_steps as f64));
        Ok(f.values)
    };
    let numeric = match cfg.route {
        Route::Direct => direct(&mut diagnostics, &mut warnings)?,
        Route::Schrodinger => {
            let sys = assemble_liouville_matrix(&mesh, &f0)?;
            let rep = schrodingerize_and_solve(&sys, &pipeline_options(cfg))?;
            diagnostics.push(("left_boundary".into(), rep.grid.l));
            diagnostics.push(("front".into(), rep.front));
            diagnostics.push(("left_mass_fraction".into(), rep.left_mass_fraction));
            warnings.extend(rep.warnings);
            real_parts(&rep.u)
        }
    };
    let weights = vec![mesh.dx * mesh.dxi; numeric.len()];
    let errors = error_norms(&numeric, &exact.values, &weights);
    let (direct_sol, direct_errors) = if cfg.compare_oracle && cfg.route == Route::Schrodinger {
        let d = direct(&mut diagnostics, &mut warnings)?;
        let e = error_norms(&d, &exact.values, &weights);
        (Some(d), Some(e))
    } else {
        (None, None)
    };
    let (x, xi) = (0..mesh.len()).map(|k| (mesh.x_center(k / mesh.m), mesh.xi_center(k % mesh.m))).unzip();
    let relative_linf = relative_linf(&numeric, &exact.values);
    Ok(Outcome {
        config: cfg.clone(),
        x,
        xi: Some(xi),
        numeric,
        exact: exact.values,
        weights,
        errors,
        relative_linf,
        direct: direct_sol,
        direct_errors,
        diagnostics,
        warnings,
    })
}

/// Query-count estimate for the experiment's Schrödinger system at t = 0.
pub fn experiment_complexity(cfg: &ExperimentConfig, epsilon: f64) -> Result<ComplexityEstimate> {
    cfg.validate()?;
    let system = if cfg.experiment == Experiment::OpticsHp {
        let mesh = optics_mesh(cfg.nx, cfg.m)?;
        assemble_liouville_matrix(&mesh, &optics_initial_field(&mesh))?
    } else {
        build_problem(cfg)?.system
    };
    let prep = prepare(&system, &pipeline_options(cfg))?;
    let t_end = if cfg.t_end > 0.0 { cfg.t_end } else { 1.0 };
    estimate_for_system(&assembled_system(&prep, 0.0)?, t_end, epsilon)
}

/// Files written by `run_experiment`.
#[derive(Clone, Debug)]
pub struct Written {
    pub solution: PathBuf,
    pub errors: PathBuf,
    pub direct: Option<PathBuf>,
    pub plot: PathBuf,
}

fn solution_table(o: &Outcome, values: &[f64]) -> Result<Table> {
    match &o.xi {
        Some(xi) => Table::new(&PHASE_HEADER, vec![o.x.clone(), xi.clone(), values.to_vec(), o.exact.clone()]),
        None => {
            let err = values.iter().zip(&o.exact).map(|(a, b)| (a - b).abs()).collect();
            Table::new(&SOLUTION_HEADER, vec![o.x.clone(), values.to_vec(), o.exact.clone(), err])
        }
    }
}

pub fn write_outcome(o: &Outcome, dir: &Path) -> Result<Written> {
    fs::create_dir_all(dir)?;
    let name = o.config.experiment.name();
    let sol_name = format!("{name}_solution.csv");
    let solution = dir.join(&sol_name);
    solution_table(o, &o.numeric)?.write(&solution)?;
    let errors = dir.join(format!("{name}_errors.csv"));
    write_error_summary(&errors, &o.errors)?;
    let mut direct_name = None;
    let direct = match &o.direct {
        Some(d) => {
            let n = format!("{name}_direct.csv");
            let p = dir.join(&n);
            solution_table(o, d)?.write(&p)?;
            if let Some(e) = &o.direct_errors {
                write_error_summary(&dir.join(format!("{name}_direct_errors.csv")), e)?;
            }
            direct_name = Some(n);
            Some(p)
        }
        None => None,
    };
    let title = format!("{name}, T = {}, Nt = {}, {}", o.config.t_end, o.config.nt, scheme_name(o.config.scheme));
    let plot = dir.join(format!("{name}_plot.gp"));
    fs::write(&plot, plot_script(&title, &sol_name, direct_name.as_deref(), o.xi.is_some()))?;
    Ok(Written { solution, errors, direct, plot })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Outcome, Written)> {
    let o = solve_experiment(cfg)?;
    let w = write_outcome(&o, &cfg.out)?;
    Ok((o, w))
}

/// One refinement level of a sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub nx: usize,
    pub np: usize,
    pub nt: usize,
    pub h: f64,
    pub errors: ErrorReport,
    /// observed orders against the previous level (NaN on the first)
    pub order_linf: f64,
    pub order_l1: f64,
}

/// Level k uses Nx·2^k, Np·2^k, Nt·2^k (and M·2^k for optics).
pub fn sweep(cfg: &ExperimentConfig, levels: usize) -> Result<Vec<SweepRow>> {
    if levels == 0 {
        return Err(SchrError::Config("a sweep needs at least one level".into()));
    }
    let mut rows: Vec<SweepRow> = Vec::with_capacity(levels);
    for k in 0..levels {
        let f = 1usize << k;
        let mut c = cfg.clone();
        c.nx *= f;
        c.np *= f;
        c.nt *= f;
        c.m *= f;
        let o = solve_experiment(&c)?;
        let h = spacing(&c);
        let (order_linf, order_l1) = match rows.last() {
            Some(p) => {
                let r = (p.h / h).ln();
                ((p.errors.l_inf / o.errors.l_inf).ln() / r, (p.errors.l1 / o.errors.l1).ln() / r)
            }
            None => (f64::NAN, f64::NAN),
        };
        rows.push(SweepRow { nx: c.nx, np: c.np, nt: c.nt, h, errors: o.errors, order_linf, order_l1 });
    }
    Ok(rows)
}

fn spacing(c: &ExperimentConfig) -> f64 {
    match c.experiment {
        Experiment::AdvectionInterface => INTERFACE_HALF_WIDTH / c.nx as f64,
        Experiment::OpticsHp => 2.0 * OPTICS_BOX / c.nx as f64,
        _ => 10.0 / c.nx as f64,
    }
}

pub fn sweep_table(rows: &[SweepRow]) -> Result<Table> {
    let col = |f: &dyn Fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    Table::new(
        &["nx", "np", "nt", "h", "l_inf", "l2", "l1", "order_linf", "order_l1"],
        vec![
            col(&|r| r.nx as f64),
            col(&|r| r.np as f64),
            col(&|r| r.nt as f64),
            col(&|r| r.h),
            col(&|r| r.errors.l_inf),
            col(&|r| r.errors.l2),
            col(&|r| r.errors.l1),
            col(&|r| r.order_linf),
            col(&|r| r.order_l1),
        ],
    )
}
