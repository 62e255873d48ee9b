use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {theta} is outside the analytic domain ({lower}, {upper})")]
    Domain { theta: f64, lower: f64, upper: f64 },
    #[error("no positive Lundberg root: mean increment {mean} is not negative")]
    NoPositiveRoot { mean: f64 },
    #[error("operation not supported for this model: {0}")]
    UnsupportedModel(&'static str),
    #[error("Wiener-Hopf factorization failed: {0}")]
    Factorization(&'static str),
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: &'static str, reason: &'static str },
    #[error("root finding did not converge: {0}")]
    RootFinding(&'static str),
    #[error("quadrature did not reach tolerance (estimate {value}, error {error})")]
    Quadrature { value: f64, error: f64 },
    #[error("record batches differ in model, policy, level or measure")]
    MixedBatch,
    #[error("no ruined paths in batch")]
    NoRuins,
    #[error("tilted estimate requires every path to ruin, {0} did not")]
    IncompleteTilted(u64),
    #[error("ruin constant needs an empirically calibrated Cramér constant for this model")]
    NeedsEmpiricalUpsilon,
}
