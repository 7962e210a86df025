//! Shared error type for every module in the crate.

use crate::functions::MonotoneWitness;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the library.
///
/// Variants distinguish bad input from capability limits (dimension caps,
/// unsupported derivative orders) and from verdict-style failures that carry
/// a witness.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("rejected input: {0}")]
    RejectedInput(String),

    /// The request is outside what this build supports (dimension caps,
    /// derivative order caps, quadrature order caps).
    #[error("capability limit: {0}")]
    Capability(String),

    /// A function-spec document failed to parse or named an unknown kind.
    #[error("invalid function spec: {0}")]
    FunctionParse(String),

    /// A transform was requested for a function that failed the sampled
    /// Bernstein criterion; the witness reproduces the violation.
    #[error("function failed the Bernstein criterion ({})", witness_summary(.0))]
    NotBernstein(MonotoneWitness),

    /// A spectral coefficient that must be nonnegative came out negative:
    /// the function does not send the given distances to squared Euclidean.
    #[error("negative-type violation: eigenvalue {lambda} at character index {chi}")]
    NegativeType { chi: usize, lambda: f64 },
}

fn witness_summary(w: &MonotoneWitness) -> String {
    match w {
        MonotoneWitness::Difference {
            order, base, value, ..
        } => {
            format!("order-{order} difference at x={base} evaluates to {value}")
        }
        MonotoneWitness::DerivativeSign { order, x, value } => {
            format!("order-{order} derivative sign at x={x}: {value}")
        }
        MonotoneWitness::ValueAtZero { value } => format!("f(0)={value} is not 0"),
        MonotoneWitness::NegativeValue { x, value } => format!("f({x})={value} is negative"),
    }
}
