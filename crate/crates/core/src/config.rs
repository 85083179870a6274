//! Experiment configuration: built-in defaults, then `key = value` files,
//! then command-line overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Result, SchrError};
use crate::warping::{EvolveScheme, Recovery};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    ConvectionInflow,
    HeatDirichlet,
    HeatMixed,
    AdvectionInterface,
    Stefan,
    OpticsHp,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::ConvectionInflow,
        Experiment::HeatDirichlet,
        Experiment::HeatMixed,
        Experiment::AdvectionInterface,
        Experiment::Stefan,
        Experiment::OpticsHp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ConvectionInflow => "convection-inflow",
            Experiment::HeatDirichlet => "heat-dirichlet",
            Experiment::HeatMixed => "heat-mixed",
            Experiment::AdvectionInterface => "advection-interface",
            Experiment::Stefan => "stefan",
            Experiment::OpticsHp => "optics-hp",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Experiment::ConvectionInflow => "u_t + u_x = 0 on [0,10], inflow e^{-t}, exact e^{x-t}",
            Experiment::HeatDirichlet => "u_t = u_xx on [0,10], zero Dirichlet data, exact e^{-pi^2 t} sin(pi x)",
            Experiment::HeatMixed => "u_t = u_xx on [0,10], Dirichlet at 0, Neumann at 10",
            Experiment::AdvectionInterface => "u_t + c(x)u_x = 0 on [-10,10], c = 2 | 1, flux continuity",
            Experiment::Stefan => "diffusion with beta = 1 | 2 across alpha(t) = t/2 + 1/4 on [0,10]",
            Experiment::OpticsHp => "Liouville equation on [-4,4]^2, speeds 0.6 | 0.2, reflection and refraction",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = SchrError;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| SchrError::Config(format!("unknown experiment '{s}'")))
    }
}

/// Whether the run goes through the Schrödinger engine or integrates the
/// semi-discrete system directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Schrodinger,
    Direct,
}

impl FromStr for Route {
    type Err = SchrError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schrodinger" => Ok(Route::Schrodinger),
            "direct" => Ok(Route::Direct),
            _ => Err(SchrError::Config(format!("unknown route '{s}' (schrodinger, direct)"))),
        }
    }
}

pub fn parse_scheme(s: &str) -> Result<EvolveScheme> {
    match s {
        "backward-euler" | "be" => Ok(EvolveScheme::BackwardEuler),
        "crank-nicolson" | "cn" => Ok(EvolveScheme::CrankNicolson),
        "forward-euler" | "fe" => Ok(EvolveScheme::ForwardEuler),
        "exact" => Ok(EvolveScheme::ExactBlockExponential),
        _ => Err(SchrError::Config(format!("unknown scheme '{s}' (backward-euler, crank-nicolson, forward-euler, exact)"))),
    }
}

pub fn scheme_name(s: EvolveScheme) -> &'static str {
    match s {
        EvolveScheme::BackwardEuler => "backward-euler",
        EvolveScheme::CrankNicolson => "crank-nicolson",
        EvolveScheme::ForwardEuler => "forward-euler",
        EvolveScheme::ExactBlockExponential => "exact",
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub nx: usize,
    pub np: usize,
    pub nt: usize,
    /// ξ-cells, optics only
    pub m: usize,
    pub t_end: f64,
    pub r: f64,
    pub l0: f64,
    pub alpha_neg: f64,
    pub safety: f64,
    pub scheme: EvolveScheme,
    pub recovery: Recovery,
    pub compare_oracle: bool,
    pub out: PathBuf,
    pub seed: u64,
    pub route: Route,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            nx: 64,
            np: 64,
            nt: 100,
            m: 0,
            t_end: 1.0,
            r: 10.0,
            l0: -1.0,
            alpha_neg: 10.0,
            safety: 0.9,
            scheme: EvolveScheme::BackwardEuler,
            recovery: Recovery::Fit,
            compare_oracle: false,
            out: PathBuf::from("results"),
            seed: 0,
            route: Route::Schrodinger,
        };
        let heat_t = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
        match experiment {
            Experiment::ConvectionInflow => base,
            Experiment::HeatDirichlet => ExperimentConfig { nx: 65, t_end: heat_t, ..base },
            Experiment::HeatMixed => ExperimentConfig { np: 512, t_end: heat_t, ..base },
            Experiment::AdvectionInterface => ExperimentConfig { nx: 100, np: 256, nt: 1000, ..base },
            // θ ~ 4e8 here, so the e^{-R} wrap-around jump needs a larger R,
            // and backward Euler's p-transport error dominates at Nt = 100
            Experiment::Stefan => ExperimentConfig {
                nx: 100,
                np: 4096,
                r: 40.0,
                scheme: EvolveScheme::CrankNicolson,
                ..base
            },
            Experiment::OpticsHp => ExperimentConfig { nx: 200, m: 200, nt: 1000, np: 128, route: Route::Direct, ..base },
        }
    }

    /// Set one field from its textual form; keys match the flag names
    /// without the leading dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| SchrError::Config(format!("invalid value '{v}' for {key}")))
        }
        match key {
            "experiment" => {
                // switching experiment resets to its defaults but keeps plumbing
                let keep = (self.out.clone(), self.seed, self.compare_oracle);
                *self = Self::defaults(value.parse()?);
                (self.out, self.seed, self.compare_oracle) = keep;
            }
            "nx" => self.nx = num(key, value)?,
            "np" => self.np = num(key, value)?,
            "nt" => self.nt = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "T" | "t" => self.t_end = num(key, value)?,
            "R" | "r" => self.r = num(key, value)?,
            "l0" => self.l0 = num(key, value)?,
            "alpha-neg" | "alpha_neg" => self.alpha_neg = num(key, value)?,
            "safety" => self.safety = num(key, value)?,
            "scheme" => self.scheme = parse_scheme(value)?,
            "recovery" => self.recovery = value.parse().map_err(SchrError::Config)?,
            "compare-oracle" | "compare_oracle" => self.compare_oracle = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = num(key, value)?,
            "route" => self.route = value.parse()?,
            _ => return Err(SchrError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SchrError::Config(m.to_string()));
        if self.nx == 0 || self.np == 0 || self.nt == 0 {
            return bad("Nx, Np and Nt must be positive");
        }
        if self.np % 2 != 0 {
            return bad("Np must be even");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("T must be finite and non-negative");
        }
        if !(self.r > 0.0) || !(self.l0 < 0.0) || !(self.alpha_neg > 0.0) || !(self.safety > 0.0) {
            return bad("need R > 0, L0 < 0, alpha-neg > 0 and safety > 0");
        }
        match self.experiment {
            Experiment::OpticsHp => {
                if self.m == 0 || self.m % 2 != 0 || self.nx % 2 != 0 {
                    return bad("optics needs even N and M");
                }
            }
            Experiment::AdvectionInterface | Experiment::Stefan | Experiment::HeatDirichlet | Experiment::HeatMixed => {
                if self.nx < 4 {
                    return bad("Nx must be at least 4");
                }
            }
            Experiment::ConvectionInflow => {}
        }
        Ok(())
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| SchrError::Config(format!("line {}: expected 'key = value'", ln + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Defaults of `experiment` (taken from the file when it names one), then
/// file entries, then overrides, all as (key, value) pairs.
pub fn resolve(
    experiment: Option<Experiment>,
    file: &[(String, String)],
    overrides: &[(String, String)],
) -> Result<ExperimentConfig> {
    let from_file = file.iter().rev().find(|(k, _)| k == "experiment").map(|(_, v)| v.parse()).transpose()?;
    let exp = experiment.or(from_file).unwrap_or(Experiment::ConvectionInflow);
    let mut cfg = ExperimentConfig::defaults(exp);
    for (k, v) in file.iter().chain(overrides) {
        if k != "experiment" {
            cfg.set(k, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("heat".parse::<Experiment>().is_err());
    }

    #[test]
    fn precedence() {
        let file = parse_config_text("# comment\nexperiment = heat-mixed\nnp = 128  # inline\nnt=40\n").unwrap();
        let cfg = resolve(None, &file, &[("nt".into(), "7".into())]).unwrap();
        assert_eq!(cfg.experiment, Experiment::HeatMixed);
        assert_eq!((cfg.nx, cfg.np, cfg.nt), (64, 128, 7));
        let cfg = resolve(Some(Experiment::Stefan), &file, &[]).unwrap();
        assert_eq!((cfg.experiment, cfg.np, cfg.nt), (Experiment::Stefan, 128, 40));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(parse_config_text("nx 5").is_err());
        assert!(resolve(None, &[], &[("np".into(), "63".into())]).is_err());
        assert!(resolve(None, &[], &[("T".into(), "-1".into())]).is_err());
        assert!(resolve(None, &[], &[("bogus".into(), "1".into())]).is_err());
        assert!(resolve(None, &[], &[("scheme".into(), "rk4".into())]).is_err());
    }

    #[test]
    fn experiment_defaults() {
        let c = ExperimentConfig::defaults(Experiment::HeatDirichlet);
        assert_eq!((c.nx - 1, c.np), (64, 64));
        let c = ExperimentConfig::defaults(Experiment::OpticsHp);
        assert_eq!((c.nx, c.m, c.nt, c.route), (200, 200, 1000, Route::Direct));
    }
}
