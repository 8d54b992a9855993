use thiserror::Error;

/// Errors raised by the bound computations and their inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("shape mismatch in {component}: {detail}")]
    Shape {
        component: &'static str,
        detail: String,
    },

    #[error("no convergence after {iterations} iterations (best estimate {best}, gap {gap:e})")]
    NonConvergence {
        iterations: usize,
        best: f64,
        gap: f64,
        best_input: Vec<f64>,
    },

    #[error("margin changes sign more than once; crossings near e = {crossings:?}")]
    Ambiguous { crossings: Vec<f64> },

    #[error("search space holds {size:e} candidates, above the enumeration limit of {limit:e}")]
    SearchSpaceTooLarge { size: f64, limit: f64 },

    #[error(
        "extrapolation residual {residual:e} exceeds tolerance {tol:e}; raw sequence {sequence:?}"
    )]
    FitResidual {
        residual: f64,
        tol: f64,
        sequence: Vec<(f64, f64)>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "[0, 1]",
        })
    }
}

pub(crate) fn check_alphabet(name: &'static str, d: usize) -> Result<()> {
    if d >= 2 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: d as f64,
            expected: ">= 2",
        })
    }
}
