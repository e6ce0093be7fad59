use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,

    #[error("evaluation point {0} is at a pole")]
    EvalAtPole(Complex64),

    #[error("transfer function is improper (numerator degree {num} > denominator degree {den})")]
    ImproperTf { num: usize, den: usize },

    #[error("initial-value limit diverges: numerator and denominator have equal degree")]
    Unbounded,

    #[error("final value theorem does not apply: pole at {0}")]
    FvtInvalid(Complex64),

    #[error("degenerate limits: x_max == x_min == {0}")]
    DegenerateLimits(f64),

    #[error("droop design denominator is not positive ({0})")]
    NegativeDroop(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("nodal admittance system is singular")]
    SingularSystem,

    #[error("numerical divergence at t = {t} s: |deviation| of {channel} exceeded 0.5 p.u.")]
    NumericalDivergence { t: f64, channel: &'static str },

    #[error("trace has not settled: {channel} moved by {spread:.3e} (relative) over the settling window")]
    NotSettled { channel: &'static str, spread: f64 },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
