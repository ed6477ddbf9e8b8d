//! Shared benchmark fixtures.

use binohedge::{BsmParams, LatticeParams, Payoff};

/// The two-step lattice stretched to `steps` steps.
pub fn lattice(steps: usize) -> LatticeParams {
    LatticeParams::new(100.0, 0.2, -0.1, 0.04, steps).expect("valid lattice")
}

/// A recombining lattice with `steps` steps.
pub fn recombining(steps: usize) -> LatticeParams {
    let u = 0.05;
    LatticeParams::new(100.0, u, 1.0 / (1.0 + u) - 1.0, 0.01, steps)
        .and_then(LatticeParams::recombining)
        .expect("valid lattice")
}

pub fn asian(strike: f64) -> Payoff {
    Payoff::AsianArithmetic { strike }
}

pub fn daily_market() -> BsmParams {
    BsmParams::new(0.1, 0.2, 0.04, 1.0, 1.0 / 365.0).expect("valid market")
}
