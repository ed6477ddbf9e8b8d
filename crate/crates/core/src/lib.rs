//! Binomial lattice pricing built from static hedges.
//!
//! Claims are priced by replicating them with one-step Arrow-Debreu
//! securities: trajectory securities aggregate into any path-dependent
//! claim, degenerate digitals aggregate into European claims, and the
//! digitals can equally be read off a backward random walk on an extended
//! state space. The [`asymptotics`] module studies lattices that mimic a
//! Black-Scholes-Merton market as the step shrinks.
//!
//! All prices are in numeraire units (see [`lattice`]) unless a function
//! says otherwise.

pub mod asymptotics;
pub mod digital;
pub mod error;
pub mod exact;
pub mod format;
pub mod hedging;
pub mod lattice;
pub mod math;
pub mod payoff;
pub mod walk;

pub use asymptotics::{
    bsm_call_reference, convergence_study, dq_dmu, dx_adjustment, map_to_lattice, risk_neutral_step_mean,
    risk_neutral_variance_approx, risk_neutral_variance_exact, BsmParams, ConvergenceRow,
};
pub use digital::{backward_induction_price, digital_from_ad, price_digital, price_european_crr, DigitalSpec};
pub use error::{PricingError, Result};
pub use hedging::{
    hedge_ledger, price_path_ad, price_path_dependent, replicate_one_step, risk_neutral_q, AdInstrument,
    HedgeStep, OneStepHedge, RiskNeutralWeight,
};
pub use lattice::{
    from_nominal, terminal_price, to_nominal, LatticeParams, NumerairePrice, StateIndex, Trajectory,
    ENUMERATION_CAP,
};
pub use payoff::{evaluate_payoff, BarrierDirection, BarrierKnock, Payoff};
pub use walk::{
    backward_hit_probability, build_value_grid, invariance_sum, simulate_backward_walk,
    standard_crr_invariance_counterexample, BackwardWalkConfig, ProbabilityReport, ValueGrid, WalkEstimate,
};
