//! Crate-wide error type and process exit-code mapping.

/// Errors produced anywhere in the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed config text, unknown key, or an invariant violation on a
    /// configured value. `line` is 1-based when the offense is tied to a
    /// specific config line.
    #[error("config error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    /// An argument outside the mathematical domain of a closed-form relation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integration step drove the carrier density negative; the step size
    /// is too large for the current trajectory.
    #[error("carrier density went negative at t = {t:.6e} s (reduce dt)")]
    NegativeCarrierDensity { t: f64 },

    /// An integration step drove the photon density negative.
    #[error("photon density went negative at t = {t:.6e} s (reduce dt)")]
    NegativePhotonDensity { t: f64 },

    /// An iterative solve did not reach its residual tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// Operating current at or below the lasing threshold.
    #[error("current {current:.6e} A is at or below threshold {threshold:.6e} A")]
    BelowThreshold { current: f64, threshold: f64 },

    /// A trace too short or too coarsely sampled for eye analysis.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// One logic level has no samples in the eye measurement window.
    #[error("missing level: {0}")]
    MissingLevel(String),

    /// No grid point satisfies the optimizer's feasibility constraint.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 simulation, 4 infeasible.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) | Error::Io(_) => 2,
            Error::NegativeCarrierDensity { .. }
            | Error::NegativePhotonDensity { .. }
            | Error::NoConvergence(_)
            | Error::BelowThreshold { .. }
            | Error::InsufficientData(_)
            | Error::MissingLevel(_) => 3,
            Error::Infeasible(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config { line: None, msg: msg.into() }
    }

    pub fn config_at(line: usize, msg: impl Into<String>) -> Self {
        Error::Config { line: Some(line), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
