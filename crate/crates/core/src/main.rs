use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use schrodingerisation::complexity::estimate_complexity;
use schrodingerisation::config::{parse_config_text, resolve, Experiment, ExperimentConfig};
use schrodingerisation::csvio::fmt_f64;
use schrodingerisation::experiments::{experiment_complexity, run_experiment, sweep, sweep_table};
use schrodingerisation::SchrError;

#[derive(Parser)]
#[command(name = "schr", version, about = "Schrödingerisation experiments with exact-solution checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write CSVs plus a plot script
    Run(RunArgs),
    /// Run at successively doubled resolutions and fit observed orders
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Hamiltonian-simulation query estimate
    Complexity {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        /// Use explicit inputs instead of an experiment's assembled system
        #[arg(long, requires = "max_entry")]
        sparsity: Option<usize>,
        #[arg(long)]
        max_entry: Option<f64>,
    },
    /// List the available experiments
    List,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    l0: Option<f64>,
    #[arg(long)]
    alpha_neg: Option<f64>,
    #[arg(long)]
    safety: Option<f64>,
    /// backward-euler, crank-nicolson, forward-euler or exact
    #[arg(long)]
    scheme: Option<String>,
    /// point, integral or fit
    #[arg(long)]
    recovery: Option<String>,
    /// schrodinger or direct
    #[arg(long)]
    route: Option<String>,
    /// Also integrate the semi-discrete system directly and report both
    #[arg(long)]
    compare_oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig, SchrError> {
        let file = match &self.config {
            Some(p) => parse_config_text(&std::fs::read_to_string(p)?)?,
            None => Vec::new(),
        };
        let exp = self.experiment.as_deref().map(str::parse::<Experiment>).transpose()?;
        let mut o: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push((k.to_string(), v));
            }
        };
        put("nx", self.nx.map(|v| v.to_string()));
        put("np", self.np.map(|v| v.to_string()));
        put("nt", self.nt.map(|v| v.to_string()));
        put("m", self.m.map(|v| v.to_string()));
        put("T", self.t.map(|v| v.to_string()));
        put("R", self.r.map(|v| v.to_string()));
        put("l0", self.l0.map(|v| v.to_string()));
        put("alpha-neg", self.alpha_neg.map(|v| v.to_string()));
        put("safety", self.safety.map(|v| v.to_string()));
        put("scheme", self.scheme.clone());
        put("recovery", self.recovery.clone());
        put("route", self.route.clone());
        put("compare-oracle", self.compare_oracle.then(|| "true".to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        resolve(exp, &file, &o)
    }
}

fn exit_code(e: &SchrError) -> u8 {
    match e.root() {
        SchrError::Config(_) | SchrError::InvalidInput(_) => 1,
        SchrError::Io(_) => 3,
        _ => 2,
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("SCHR_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not set thread count: {e}");
                }
            }
            _ => log::warn!("ignoring SCHR_THREADS = '{v}'"),
        }
    }
}

fn run(cli: Cli) -> Result<(), SchrError> {
    match cli.command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<20} {}", e.name(), e.describe());
            }
        }
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let (o, w) = run_experiment(&cfg)?;
            println!("experiment {}  nx {}  np {}  nt {}  T {}", cfg.experiment, cfg.nx, cfg.np, cfg.nt, cfg.t_end);
            println!("l_inf {}  l2 {}  l1 {}  rel_linf {}", fmt_f64(o.errors.l_inf), fmt_f64(o.errors.l2), fmt_f64(o.errors.l1), fmt_f64(o.relative_linf));
            if let Some(d) = &o.direct_errors {
                println!("direct l_inf {}  l2 {}  l1 {}", fmt_f64(d.l_inf), fmt_f64(d.l2), fmt_f64(d.l1));
            }
            for (k, v) in &o.diagnostics {
                println!("{k} {}", fmt_f64(*v));
            }
            for msg in &o.warnings {
                eprintln!("warning: {msg}");
            }
            println!("wrote {}", w.solution.display());
            println!("wrote {}", w.errors.display());
            if let Some(d) = &w.direct {
                println!("wrote {}", d.display());
            }
            println!("wrote {}", w.plot.display());
        }
        Command::Sweep { run, levels } => {
            let cfg = run.resolve()?;
            let rows = sweep(&cfg, levels)?;
            let table = sweep_table(&rows)?;
            std::fs::create_dir_all(&cfg.out)?;
            let path = cfg.out.join(format!("{}_sweep.csv", cfg.experiment));
            table.write(&path)?;
            println!("{:>6} {:>6} {:>7} {:>12} {:>12} {:>12} {:>8} {:>8}", "nx", "np", "nt", "h", "l_inf", "l1", "p_inf", "p_1");
            for r in &rows {
                println!(
                    "{:>6} {:>6} {:>7} {:>12.4e} {:>12.4e} {:>12.4e} {:>8.3} {:>8.3}",
                    r.nx, r.np, r.nt, r.h, r.errors.l_inf, r.errors.l1, r.order_linf, r.order_l1
                );
            }
            println!("wrote {}", path.display());
        }
        Command::Complexity { run, epsilon, sparsity, max_entry } => {
            let est = match (sparsity, max_entry) {
                (Some(s), Some(h)) => estimate_complexity(s, h, run.t.unwrap_or(1.0), epsilon)?,
                _ => experiment_complexity(&run.resolve()?, epsilon)?,
            };
            println!("sparsity {}", est.sparsity);
            println!("h_max1 {}", fmt_f64(est.h_max1));
            println!("epsilon {}", fmt_f64(est.epsilon));
            println!("estimate {} (~1e{})", fmt_f64(est.estimate), est.order_of_magnitude());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
