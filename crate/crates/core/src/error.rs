use thiserror::Error;

/// Pipeline stage that produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Augment,
    Split,
    LeftBoundary,
    Grid,
    Transform,
    Evolve,
    Recover,
    Build,
    Direct,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Augment => "augment",
            Stage::Split => "hermitian-split",
            Stage::LeftBoundary => "left-boundary",
            Stage::Grid => "p-grid",
            Stage::Transform => "transform",
            Stage::Evolve => "evolve",
            Stage::Recover => "recover",
            Stage::Build => "build",
            Stage::Direct => "direct-integrate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum SchrError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular solve at step {step}{}", mode.map(|m| format!(", mode {m}")).unwrap_or_default())]
    Singular { step: usize, mode: Option<i64> },
    #[error("iterative solve did not converge at step {step}, mode {mode} (residual {residual:.3e})")]
    NoConvergence { step: usize, mode: i64, residual: f64 },
    #[error("eigen-solver failure: {0}")]
    Eigen(String),
    #[error("size cap exceeded: {size} > {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("immersed-interface denominator not positive at t = {t}, k = {k}: D = {value}")]
    NonPositiveDenominator { t: f64, k: usize, value: f64 },
    #[error("interface position {alpha} outside the admissible interior at t = {t}")]
    InterfaceOutside { t: f64, alpha: f64 },
    #[error("out of regime: {0}")]
    OutOfRegime(String),
    #[error("{stage}: {source}")]
    AtStage {
        stage: Stage,
        #[source]
        source: Box<SchrError>,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SchrError {
    pub fn at(self, stage: Stage) -> SchrError {
        match self {
            e @ SchrError::AtStage { .. } => e,
            e => SchrError::AtStage { stage, source: Box::new(e) },
        }
    }

    /// Innermost error, with stage tags stripped.
    pub fn root(&self) -> &SchrError {
        match self {
            SchrError::AtStage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, SchrError>;
