use thiserror::Error;

/// Errors raised while building a market or pricing a claim on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The short rate does not lie strictly between the down and up returns,
    /// so the one-step state prices would leave (0, 1).
    #[error("OutOfRange: no-arbitrage requires d < r < u (d={d}, r={r}, u={u})")]
    OutOfRange { d: f64, r: f64, u: f64 },

    #[error("NoArbitrageViolated: D < R < U fails (D={down}, R={rate}, U={up})")]
    NoArbitrageViolated { down: f64, rate: f64, up: f64 },

    #[error("EnumerationCapExceeded: {steps} steps exceeds the path enumeration cap of {cap}")]
    EnumerationCapExceeded { steps: usize, cap: usize },

    #[error("StrikeOffLattice: strike {strike} is not a terminal lattice node")]
    StrikeOffLattice { strike: f64 },

    #[error("PathDependentPayoffRejected: payoff `{kind}` needs the full trajectory")]
    PathDependentPayoffRejected { kind: &'static str },

    #[error("Unreachable: {target} cannot be reached from strike {strike} in {steps} backward steps")]
    Unreachable { strike: f64, target: f64, steps: usize },

    #[error("trajectory has {got} moves, expected {expected}")]
    TrajectoryLength { expected: usize, got: usize },

    #[error("valuation time {t} with {ups} up moves is outside the lattice of {steps} steps")]
    InvalidTime { t: usize, ups: usize, steps: usize },

    #[error("invalid payoff: {0}")]
    InvalidPayoff(String),
}

pub type Result<T> = std::result::Result<T, PricingError>;
