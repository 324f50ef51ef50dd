use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: ({0}, {1}) vs ({2}, {3})")]
    Dimension(usize, usize, usize, usize),
    #[error("zero divisor {value:e} for k = {k:?}, l - lbar = {l:?} at step {step}")]
    ZeroDivisor { step: usize, k: Vec<i32>, l: Vec<i32>, value: f64 },
    #[error("divisor {value:e} below the non-resonance floor {floor:e} for k = {k:?}, l - lbar = {l:?} at step {step}")]
    Resonance { step: usize, k: Vec<i32>, l: Vec<i32>, value: f64, floor: f64 },
    #[error("model: {0}")]
    Model(String),
    #[error("config: {0}")]
    Config(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("integration: {0}")]
    Integration(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn is_resonance(&self) -> bool {
        matches!(self, Error::ZeroDivisor { .. } | Error::Resonance { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
