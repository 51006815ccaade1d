use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: String },

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("a+b on log plane k={k}")]
    LogPlane { k: u32 },

    #[error("parameters outside region O_{k}: {reason}")]
    Region { k: i32, reason: String },

    #[error("quadrature did not reach tolerance {tol:e} after {levels} levels (estimate {estimate:e})")]
    MaxRefinement { tol: f64, levels: usize, estimate: f64 },

    #[error("truncation at N_max={n_max} too short; need about {suggested}")]
    Truncation { n_max: usize, suggested: usize },

    #[error("division not exact at step {step}, order {order}: {coefficient}")]
    DivisionNotExact {
        step: String,
        order: usize,
        coefficient: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
