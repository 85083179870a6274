//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//! Frozen reference values come from direct integration on the same
//! discretisation, run once before these checks were written.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schrodingerisation::builders::{build_convection_inflow, build_heat_dirichlet, stefan_jump_residuals, Boundary, Mesh1D};
use schrodingerisation::complexity::estimate_complexity;
use schrodingerisation::config::{Experiment, ExperimentConfig, Route};
use schrodingerisation::experiments::{
    build_problem, optics_initial_field, optics_mesh, pipeline_options, solve_experiment, stefan_problem, Outcome,
};
use schrodingerisation::liouville::{
    assemble_liouville_matrix, cfl_timestep, hp_flux_x, transmission_coefficients, PhaseField,
};
use schrodingerisation::linalg::{hermitian_eigenvalues, I};
use schrodingerisation::ode::{augment, direct_integrate, hermitian_split, relative_l2, HermitianPair, LinearOdeSystem, TimeScheme};
use schrodingerisation::oracles::{exact_stefan, StefanParams};
use schrodingerisation::warping::pipeline::{assembled_system, prepare};
use schrodingerisation::warping::{build_pgrid, evolve, schrodingerize_and_solve, EvolveScheme, PipelineOptions, WarpedField};
use schrodingerisation::Result;

// direct backward Euler at the default discretisations (absolute L∞)
const CONVECTION_DIRECT_LINF: f64 = 661.4556;
const HEAT_DIRICHLET_DIRECT_LINF: f64 = 8.905630e-3;
const HEAT_MIXED_DIRECT_LINF: f64 = 1.589980e-2;
const STEFAN_DIRECT_LINF: f64 = 855.26;
// forward Euler with the interface flux, N = M = 200, Nt = 1000
const OPTICS_DIRECT_L1: f64 = 0.2610;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict { pass, detail }
    }
}

fn cfg(e: Experiment) -> ExperimentConfig {
    ExperimentConfig::defaults(e)
}

fn diag(o: &Outcome, k: &str) -> f64 {
    o.diagnostic(k).unwrap_or(f64::NAN)
}

/// Least-squares slope of log(err) against log(h), sign flipped.
fn fitted_order(h: &[f64], err: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// r_finest ≤ C·h_finest with C the largest r/h over the coarser levels.
fn bounded_by_ch(h: &[f64], r: &[f64]) -> (bool, f64) {
    let k = h.len() - 1;
    let c = (0..k).map(|i| r[i] / h[i]).fold(0.0, f64::max);
    (r[k] <= c * h[k], c)
}

fn criterion_1() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let levels = [(64usize, 50usize), (128, 100), (256, 200)];
    let mut worst_fine: f64 = 0.0;
    let mut non_monotone = 0;
    for trial in 0..50 {
        let n = rng.gen_range(2..=8);
        let sys = common::random_system(&mut rng, n, trial % 2 == 1);
        let reference = direct_integrate(&sys, TimeScheme::BackwardEuler, 1.0, 2000)?;
        let mut errs = Vec::new();
        for &(np, nt) in &levels {
            let opts = PipelineOptions { np, nt, ..PipelineOptions::default() };
            let rep = schrodingerize_and_solve(&sys, &opts)?;
            errs.push(relative_l2(&rep.u, reference.last()));
        }
        if !errs.windows(2).all(|w| w[1] < w[0]) {
            non_monotone += 1;
        }
        worst_fine = worst_fine.max(errs[2]);
    }
    Ok(Verdict::new(
        non_monotone == 0 && worst_fine < 1e-2,
        format!("worst finest relative l2 {worst_fine:.3e} (< 1e-2), non-monotone trials {non_monotone}"),
    ))
}

fn experiment_system(e: Experiment) -> Result<(LinearOdeSystem, PipelineOptions)> {
    let mut c = cfg(e);
    if e == Experiment::OpticsHp {
        c.nx = 50;
        c.m = 50;
        let mesh = optics_mesh(c.nx, c.m)?;
        return Ok((assemble_liouville_matrix(&mesh, &optics_initial_field(&mesh))?, pipeline_options(&c)));
    }
    Ok((build_problem(&c)?.system, pipeline_options(&c)))
}

fn criterion_2() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_defect: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for e in Experiment::ALL {
        let (system, opts) = experiment_system(e)?;
        let prep = prepare(&system, &opts)?;
        let sys = assembled_system(&prep, 0.0)?;
        for s in 0..sys.grid.np {
            let b = sys.block(s);
            let scale = b.max_abs().max(f64::MIN_POSITIVE);
            worst_defect = worst_defect.max(b.scale(I).hermitian_defect() / scale);
        }
        let k = sys.n().min(64);
        let pair = HermitianPair { h1: sys.pair.h1.leading_block(k), h2: sys.pair.h2.leading_block(k) };
        let grid = build_pgrid(prep.grid.l, prep.grid.r, prep.grid.l0, 16)?;
        let small = schrodingerisation::warping::assemble_schrodinger(&pair, &grid);
        let w0 = WarpedField { n: k, np: 16, values: common::random_vector(&mut rng, k * 16, 1.0) };
        let w1 = evolve(&small, &w0, 1.0, 1, EvolveScheme::ExactBlockExponential)?;
        worst_norm = worst_norm.max((w1.norm2() - w0.norm2()).abs());
    }
    Ok(Verdict::new(
        worst_defect <= 1e-13 && worst_norm <= 1e-11,
        format!("max relative Hermitian defect {worst_defect:.2e} (<= 1e-13), max norm drift {worst_norm:.2e} (<= 1e-11)"),
    ))
}

fn max_rel_mismatch(got: &[f64], want: &mut [f64]) -> f64 {
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    got.iter().zip(want.iter()).map(|(g, w)| (g - w).abs() / w.abs()).fold(0.0, f64::max)
}

fn criterion_3() -> Result<Verdict> {
    let pi = std::f64::consts::PI;
    let nx = 64usize;
    let mesh = Mesh1D::new(0.0, 10.0, nx)?;
    let conv = build_convection_inflow(&mesh, Boundary::Zero, &|_| 0.0)?;
    let got = hermitian_eigenvalues(&hermitian_split(&conv.a_at(0.0)?)?.h1)?;
    let mut want: Vec<f64> = (1..=nx)
        .map(|j| -(2.0 / mesh.dx) * (j as f64 * pi / (2.0 * (nx + 1) as f64)).sin().powi(2))
        .collect();
    let e_conv = if got.len() == want.len() { max_rel_mismatch(&got, &mut want) } else { f64::INFINITY };
    let heat = build_heat_dirichlet(&mesh, Boundary::Zero, Boundary::Zero, &|_| 0.0)?;
    let got = hermitian_eigenvalues(&hermitian_split(&heat.a_at(0.0)?)?.h1)?;
    let mut want: Vec<f64> = (1..nx)
        .map(|j| -(4.0 / (mesh.dx * mesh.dx)) * (j as f64 * pi / (2.0 * nx as f64)).sin().powi(2))
        .collect();
    let e_heat = if got.len() == want.len() { max_rel_mismatch(&got, &mut want) } else { f64::INFINITY };
    Ok(Verdict::new(
        e_conv <= 1e-10 && e_heat <= 1e-10,
        format!("convection {e_conv:.2e}, heat {e_heat:.2e} (<= 1e-10 relative)"),
    ))
}

fn oracle_relative(e: Experiment, frozen: f64, aux: &mut Vec<(Experiment, f64)>) -> Result<(bool, String, Outcome)> {
    let mut c = cfg(e);
    c.compare_oracle = true;
    let o = solve_experiment(&c)?;
    let direct_rel = diag(&o, "direct_relative_linf");
    let direct_abs = o.direct_errors.map(|d| d.l_inf).unwrap_or(f64::NAN);
    let ok = o.relative_linf <= 2.0 * direct_rel && o.errors.l_inf <= 2.0 * frozen;
    if let Some(a) = o.diagnostic("aux_deviation") {
        aux.push((e, a));
    }
    let msg = format!(
        "{e}: rel {:.4e} vs 2x direct {:.4e}, abs {:.4e} vs 2x frozen {:.4e} (live direct {:.4e})",
        o.relative_linf,
        2.0 * direct_rel,
        o.errors.l_inf,
        2.0 * frozen,
        direct_abs
    );
    Ok((ok, msg, o))
}

fn criterion_4(aux: &mut Vec<(Experiment, f64)>) -> Result<Verdict> {
    let (ok, msg, o) = oracle_relative(Experiment::ConvectionInflow, CONVECTION_DIRECT_LINF, aux)?;
    Ok(Verdict::new(ok, format!("{msg}; L = {:.4}", diag(&o, "left_boundary"))))
}

fn criterion_5(aux: &mut Vec<(Experiment, f64)>) -> Result<Verdict> {
    let (ok_d, msg_d, o) = oracle_relative(Experiment::HeatDirichlet, HEAT_DIRICHLET_DIRECT_LINF, aux)?;
    let l = diag(&o, "left_boundary");
    let ok_l = (l + 18.1233).abs() <= 5e-4;
    let (ok_m, msg_m, _) = oracle_relative(Experiment::HeatMixed, HEAT_MIXED_DIRECT_LINF, aux)?;
    Ok(Verdict::new(ok_d && ok_l && ok_m, format!("L = {l:.5} (-18.1233 +- 5e-4); {msg_d}; {msg_m}")))
}

fn criterion_6() -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [0.1, 0.5, 1.0] {
        let (mut h, mut l1, mut flux) = (Vec::new(), Vec::new(), Vec::new());
        for k in 0..3usize {
            let mut c = cfg(Experiment::AdvectionInterface);
            c.t_end = t;
            // at T = 0.1 the residual is still pre-asymptotic below Nx = 100
            c.nx = 100 << k;
            c.np = 512 << k;
            c.nt = ((1000.0 * t).round() as usize) << k;
            let o = solve_experiment(&c)?;
            h.push(10.0 / c.nx as f64);
            l1.push(o.errors.l1);
            flux.push(diag(&o, "flux_residual"));
        }
        let order = fitted_order(&h, &l1);
        let decreasing = l1.windows(2).all(|w| w[1] < w[0]);
        // C is the largest residual/Δx over the sweep; the residual must
        // shrink like Δx for that C to bound further refinements
        let cst = flux.iter().zip(&h).map(|(r, d)| r / d).fold(0.0, f64::max);
        let flux_order = fitted_order(&h, &flux);
        pass &= flux_order >= 0.8 && decreasing && order >= 0.8;
        parts.push(format!(
            "T={t}: L1 order {order:.3}, flux residual {:.2e} = {:.3}*dx with C = {cst:.3}, residual order {flux_order:.3}",
            flux[2],
            flux[2] / h[2]
        ));
    }
    Ok(Verdict::new(pass, parts.join("; ")))
}

fn criterion_7(aux: &mut Vec<(Experiment, f64)>) -> Result<Verdict> {
    let c = cfg(Experiment::Stefan);
    let o = solve_experiment(&c)?;
    if let Some(a) = o.diagnostic("aux_deviation") {
        aux.push((Experiment::Stefan, a));
    }
    let err_ok = o.errors.l_inf <= 2.0 * STEFAN_DIRECT_LINF;
    let dmin = diag(&o, "min_denominator");
    // residuals of the direct solution at N = 50, 100, 200 (Nt = N)
    let p = StefanParams::default();
    let problem = stefan_problem(p);
    let (mut h, mut ju, mut jf) = (Vec::new(), Vec::new(), Vec::new());
    for n in [50usize, 100, 200] {
        let mesh = Mesh1D::new(0.0, 10.0, n)?;
        let sys = schrodingerisation::builders::build_stefan(&mesh, &problem, &|x| exact_stefan(0.0, x, &p))?;
        let tr = direct_integrate(&sys, TimeScheme::BackwardEuler, 1.0, n)?;
        let u: Vec<f64> = tr.last().iter().map(|z| z.re).collect();
        let (a, b) = stefan_jump_residuals(&mesh, &problem, &u, 1.0)?;
        h.push(mesh.dx);
        ju.push(a);
        jf.push(b);
    }
    let (ok_u, cu) = bounded_by_ch(&h, &ju);
    let (ok_f, cf) = bounded_by_ch(&h, &jf);
    Ok(Verdict::new(
        err_ok && dmin > 0.0 && ok_u && ok_f,
        format!(
            "L_inf {:.4e} (<= {:.4e}); min D {dmin:.3e}; direct [u] {:.2e} <= {:.2e}, [bu_x] {:.2e} <= {:.2e}; \
             Schrodinger [u] {:.2e}, [bu_x] {:.2e}",
            o.errors.l_inf,
            2.0 * STEFAN_DIRECT_LINF,
            ju[2],
            cu * h[2],
            jf[2],
            cf * h[2],
            diag(&o, "jump_u"),
            diag(&o, "jump_flux")
        ),
    ))
}

/// Checks c⁻|ξ⁻| = c⁺|ξ⁺| at every interface edge by feeding a field
/// linear in ξ on one side and reading the velocity back from the flux.
fn interface_relation(n: usize) -> Result<(bool, f64)> {
    let mesh = optics_mesh(n, n)?;
    let tr = transmission_coefficients(0.6, 0.2)?;
    let inner = |v: f64| v >= mesh.xi_center(0) && v <= mesh.xi_center(mesh.m - 1);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for e in mesh.interface_edges() {
        let (cl, cr) = (mesh.c_left[e], mesh.c_right[e]);
        let xe = mesh.x_edge(e);
        let from_left = PhaseField::from_fn(&mesh, |x, xi| if x < xe { 1.0 + xi } else { 0.0 });
        let from_right = PhaseField::from_fn(&mesh, |x, xi| if x > xe { 1.0 + xi } else { 0.0 });
        for j in 0..mesh.m {
            let xi = mesh.xi_center(j);
            let (val, c_other) = if xi > 0.0 {
                if !inner(cr / cl * xi) {
                    continue;
                }
                (hp_flux_x(&from_left, e, j, &mesh).f_minus, cl)
            } else {
                if !inner(cl / cr * xi) {
                    continue;
                }
                (hp_flux_x(&from_right, e, j, &mesh).f_plus, cr)
            };
            let xi_other = val / tr.a_t - 1.0;
            let c_here = if xi > 0.0 { cr } else { cl };
            worst = worst.max((c_other * xi_other.abs() - c_here * xi.abs()).abs());
            checked += 1;
        }
    }
    Ok((checked > 0 && worst <= 1e-12, worst))
}

fn criterion_8() -> Result<Verdict> {
    let tr = transmission_coefficients(0.6, 0.2)?;
    let coeff_ok = (tr.a_r - 0.25).abs() <= 1e-14 && (tr.a_t - 0.75).abs() <= 1e-14;
    let base = cfg(Experiment::OpticsHp);
    let o200 = solve_experiment(&base)?;
    let dt = base.t_end / base.nt as f64;
    let cfl_ok = dt <= cfl_timestep(&optics_mesh(base.nx, base.m)?, base.safety).dt;
    let positive = diag(&o200, "negative_steps") == 0.0 && diag(&o200, "min_value") >= -1e-14;
    let mut fine = base.clone();
    fine.nx *= 2;
    fine.m *= 2;
    fine.nt *= 2;
    let o400 = solve_experiment(&fine)?;
    let (rel_ok, rel_worst) = interface_relation(16)?;
    let mut schr = Vec::new();
    for n in [26usize, 50] {
        let mut c = base.clone();
        c.route = Route::Schrodinger;
        c.nx = n;
        c.m = n;
        c.nt = 100;
        schr.push(solve_experiment(&c)?.errors.l1);
    }
    let pass = coeff_ok
        && cfl_ok
        && positive
        && o200.errors.l1 < OPTICS_DIRECT_L1
        && o400.errors.l1 < o200.errors.l1
        && rel_ok
        && schr[1] < schr[0];
    Ok(Verdict::new(
        pass,
        format!(
            "a_R {} a_T {}; L1 N=200 {:.5} (< {OPTICS_DIRECT_L1}), N=400 {:.5}; min value {:.2e}; \
             interface relation defect {rel_worst:.1e}; Schrodinger L1 N=26 {:.4}, N=50 {:.4}",
            tr.a_r,
            tr.a_t,
            o200.errors.l1,
            o400.errors.l1,
            diag(&o200, "min_value"),
            schr[0],
            schr[1]
        ),
    ))
}

fn criterion_9(aux: &[(Experiment, f64)]) -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    let mut check = |sys: &LinearOdeSystem, t: f64, nt: usize| -> Result<()> {
        let tr = direct_integrate(&augment(sys), TimeScheme::BackwardEuler, t, nt)?;
        for s in &tr.states {
            worst = worst.max((s[s.len() - 1] - 1.0).norm());
        }
        runs += 1;
        Ok(())
    };
    for e in [Experiment::ConvectionInflow, Experiment::HeatMixed, Experiment::Stefan] {
        let c = cfg(e);
        check(&build_problem(&c)?.system, c.t_end, c.nt)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let n = rng.gen_range(2..=8);
        check(&common::random_system(&mut rng, n, true), 1.0, 200)?;
    }
    let reported: Vec<String> = aux.iter().map(|(e, a)| format!("{e} {a:.2e}")).collect();
    Ok(Verdict::new(
        worst <= 1e-10,
        format!(
            "{runs} augmented direct runs, max |last - 1| {worst:.2e} (<= 1e-10); Schrodinger aux deviation: {}",
            reported.join(", ")
        ),
    ))
}

fn criterion_10() -> Result<Verdict> {
    let ts = [0.5, 1.0, 2.0];
    let inv_eps = [1e2, 1e3, 1e4];
    let ss = [2usize, 4, 8];
    let mut grid = [[[0.0f64; 3]; 3]; 3];
    for (a, &t) in ts.iter().enumerate() {
        for (b, &ie) in inv_eps.iter().enumerate() {
            for (c, &s) in ss.iter().enumerate() {
                grid[a][b][c] = estimate_complexity(s, 10.0, t, 1.0 / ie)?.estimate;
            }
        }
    }
    let mut monotone = true;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let v = grid[a][b][c];
                if a + 1 < 3 {
                    monotone &= grid[a + 1][b][c] > v;
                }
                if b + 1 < 3 {
                    monotone &= grid[a][b + 1][c] > v;
                }
                if c + 1 < 3 {
                    monotone &= grid[a][b][c + 1] > v;
                }
            }
        }
    }
    // s = 4, max entry 2, T = 1.5, ε = 1e-3: 12·ln(12000)/ln(ln(3000))
    let spot = estimate_complexity(4, 2.0, 1.5, 1e-3)?.estimate;
    let spot_ok = (spot - 54.1822560977217).abs() <= 1e-9;
    Ok(Verdict::new(monotone && spot_ok, format!("lattice monotone {monotone}, spot value {spot:.10} (54.1822560977)")))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut aux = Vec::new();
    let mut all = true;
    let mut report = |k: usize, r: Result<Verdict>, t: Instant| {
        let (pass, detail) = match r {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= pass;
        println!(
            "criterion {k}: {} {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    };
    let t = Instant::now();
    report(1, criterion_1(), t);
    let t = Instant::now();
    report(2, criterion_2(), t);
    let t = Instant::now();
    report(3, criterion_3(), t);
    let t = Instant::now();
    report(4, criterion_4(&mut aux), t);
    let t = Instant::now();
    report(5, criterion_5(&mut aux), t);
    let t = Instant::now();
    report(6, criterion_6(), t);
    let t = Instant::now();
    report(7, criterion_7(&mut aux), t);
    let t = Instant::now();
    report(8, criterion_8(), t);
    let t = Instant::now();
    report(9, criterion_9(&aux), t);
    let t = Instant::now();
    report(10, criterion_10(), t);
    println!("acceptance: {} in {:.1} s", if all { "all criteria PASS" } else { "FAILURES" }, started.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
