use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("colatitude {r} is within the pole margin {margin}")]
    PoleMargin { r: f64, margin: f64 },

    #[error("operation requires {required}, metric is `{label}`")]
    Family {
        required: &'static str,
        label: String,
    },

    #[error("step size underflow at arc length {s}")]
    StepFailure { s: f64 },

    #[error("no return to the section within horizon {horizon}")]
    NoReturn { horizon: f64 },

    #[error("trajectory covers [{covered_start}, {covered_end}], window needs [{start}, {end}]")]
    WindowNotCovered {
        start: f64,
        end: f64,
        covered_start: f64,
        covered_end: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
