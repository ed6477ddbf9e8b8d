//! Backward random walk on the extended state space.
//!
//! A degenerate digital struck at `K` is replicated backward from maturity:
//! the wealth at a state is pushed to its two predecessors with weights `q`
//! (the predecessor one up move below) and `1 - q` (one down move above).
//! Extending the state space to every `S0 (1+u)^k (1+d)^l` lets this
//! recursion branch freely, so at each time the values form the distribution
//! of a random walk started at `K`. Its mass at `S0` after `T` steps is the
//! digital price, and the total mass never changes.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digital::price_european_crr;
use crate::error::{PricingError, Result};
use crate::format::fmt_sig;
use crate::hedging::{risk_neutral_q, RiskNeutralWeight};
use crate::lattice::{LatticeParams, StateIndex};
use crate::math::CompensatedSum;
use crate::payoff::Payoff;

type Layer = BTreeMap<StateIndex, f64>;

/// Distribution of the backward walk started at `start`, one layer per
/// calendar time `0..=steps` (`layers[steps]` is the unit mass at `start`).
fn walk_layers(start: StateIndex, steps: usize, q: RiskNeutralWeight) -> Vec<Layer> {
    let mut layers = vec![Layer::new(); steps + 1];
    layers[steps].insert(start, 1.0);
    for t in (0..steps).rev() {
        let (earlier, later) = layers.split_at_mut(t + 1);
        let target = &mut earlier[t];
        for (&state, &value) in &later[0] {
            *target.entry(state.undo_up()).or_insert(0.0) += q.up() * value;
            *target.entry(state.undo_down()).or_insert(0.0) += q.down() * value;
        }
    }
    layers
}

/// Replication values of the unit digital at one strike.
#[derive(Debug, Clone, PartialEq)]
pub struct StrikeGrid {
    pub strike: f64,
    pub node: StateIndex,
    /// Payoff at the strike, `f(K)`.
    pub weight: f64,
    /// Unit-digital values per time; `weight` times these is `V_f^(K)`.
    pub layers: Vec<Layer>,
}

/// Replication values `(state, t) -> value` over the finite support reached
/// backward from a set of strikes.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGrid {
    params: LatticeParams,
    strikes: Vec<StrikeGrid>,
    layers: Vec<Layer>,
}

impl ValueGrid {
    pub fn steps(&self) -> usize {
        self.params.steps
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn strikes(&self) -> &[StrikeGrid] {
        &self.strikes
    }

    /// Aggregate value at `(state, t)`; zero off the support.
    pub fn value(&self, state: StateIndex, t: usize) -> f64 {
        self.layers.get(t).and_then(|l| l.get(&state)).copied().unwrap_or(0.0)
    }

    pub fn layer(&self, t: usize) -> Option<&Layer> {
        self.layers.get(t)
    }

    /// `sum_K f(K)`.
    pub fn total_payoff(&self) -> f64 {
        self.strikes.iter().map(|s| s.weight).collect::<CompensatedSum>().value()
    }

    /// CSV rows `t,state,price,value`, time ascending then state order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,state,price,value")?;
        for (t, layer) in self.layers.iter().enumerate() {
            for (state, value) in layer {
                writeln!(
                    out,
                    "{t},{state},{},{}",
                    fmt_sig(state.price(&self.params)),
                    fmt_sig(*value)
                )?;
            }
        }
        Ok(())
    }
}

/// Builds per-strike and aggregate replication grids for a terminal-state
/// payoff over an explicit, finite list of terminal-node strikes.
pub fn build_value_grid(params: &LatticeParams, payoff: &Payoff, strikes: &[f64]) -> Result<ValueGrid> {
    if !payoff.is_terminal() {
        return Err(PricingError::PathDependentPayoffRejected { kind: payoff.kind() });
    }
    payoff.validate()?;
    let q = risk_neutral_q(params)?;
    let steps = params.steps;

    let mut seen = Vec::new();
    let mut grids = Vec::with_capacity(strikes.len());
    for &strike in strikes {
        let x = params
            .match_terminal_node(strike)
            .ok_or(PricingError::StrikeOffLattice { strike })?;
        if seen.contains(&x) {
            return Err(PricingError::InvalidParameter {
                field: "strikes",
                reason: format!("strike {strike} listed twice"),
            });
        }
        seen.push(x);
        let node = StateIndex::from_exponents(params, x as i64, (steps - x) as i64);
        let weight = payoff.terminal_value(params.terminal_node_price(x)).expect("terminal payoff");
        grids.push(StrikeGrid { strike, node, weight, layers: walk_layers(node, steps, q) });
    }

    let mut layers = vec![Layer::new(); steps + 1];
    for grid in &grids {
        for (agg, unit) in layers.iter_mut().zip(&grid.layers) {
            for (&state, &v) in unit {
                *agg.entry(state).or_insert(0.0) += grid.weight * v;
            }
        }
    }
    Ok(ValueGrid { params: params.clone(), strikes: grids, layers })
}

/// Total replication value over all states at time `t`.
pub fn invariance_sum(grid: &ValueGrid, t: usize) -> Result<f64> {
    let layer = grid.layer(t).ok_or(PricingError::InvalidTime { t, ups: 0, steps: grid.steps() })?;
    Ok(layer.values().copied().collect::<CompensatedSum>().value())
}

/// On the standard tree, the bond is worth 1 at time 0 while summing its
/// unit payoff over the terminal states gives `T + 1`.
pub fn standard_crr_invariance_counterexample(params: &LatticeParams) -> Result<(f64, f64)> {
    let bond = Payoff::Constant { value: 1.0 };
    let value = price_european_crr(params, &bond, 0, 0)?.value;
    let mass: f64 = params
        .terminal_prices()
        .into_iter()
        .map(|s| bond.terminal_value(s).expect("terminal payoff"))
        .sum();
    Ok((value, mass))
}

/// Setup of the backward walk started at a strike.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardWalkConfig {
    pub lattice: LatticeParams,
    pub start: f64,
    pub steps: usize,
    pub q: RiskNeutralWeight,
    pub mc_paths: u64,
    pub seed: u64,
}

impl BackwardWalkConfig {
    pub fn new(lattice: &LatticeParams, start: f64, mc_paths: u64, seed: u64) -> Result<Self> {
        if mc_paths == 0 {
            return Err(PricingError::InvalidParameter {
                field: "mc_paths",
                reason: "must be at least 1".into(),
            });
        }
        if !(start.is_finite() && start > 0.0) {
            return Err(PricingError::InvalidParameter {
                field: "start",
                reason: format!("strike must be finite and > 0, got {start}"),
            });
        }
        let q = risk_neutral_q(lattice)?;
        Ok(Self { lattice: lattice.clone(), start, steps: lattice.steps, q, mc_paths, seed })
    }

    /// Start state relative to `target`, or `Unreachable`.
    fn start_state(&self, target: f64) -> Result<(LatticeParams, StateIndex)> {
        let unreachable = PricingError::Unreachable { strike: self.start, target, steps: self.steps };
        if !(target.is_finite() && target > 0.0) {
            return Err(unreachable);
        }
        let rebased = LatticeParams { s0: target, ..self.lattice.clone() };
        let x = rebased.match_terminal_node(self.start).ok_or(unreachable)?;
        let state = StateIndex::from_exponents(&rebased, x as i64, (self.steps - x) as i64);
        Ok((rebased, state))
    }
}

/// Exact probability that the backward walk from the strike sits at
/// `target` after `T` steps.
pub fn backward_hit_probability(config: &BackwardWalkConfig, target: f64) -> Result<f64> {
    let (rebased, start) = config.start_state(target)?;
    let layers = walk_layers(start, config.steps, config.q);
    Ok(layers[0].get(&StateIndex::origin(&rebased)).copied().unwrap_or(0.0))
}

/// Monte Carlo estimate of a hit probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkEstimate {
    pub estimate: f64,
    /// `sqrt(p (1 - p) / n)` at the estimate.
    pub std_error: f64,
    pub hits: u64,
    pub mc_paths: u64,
    pub seed: u64,
}

/// Number of independent RNG streams; fixed so the estimate depends only on
/// the seed and path count.
const STREAMS: u64 = 64;

/// Simulates the backward walk `mc_paths` times and counts hits of `target`.
pub fn simulate_backward_walk(config: &BackwardWalkConfig, target: f64) -> Result<WalkEstimate> {
    let (rebased, start) = config.start_state(target)?;
    let origin = StateIndex::origin(&rebased);
    let n = config.mc_paths;
    let q = config.q.up();
    let steps = config.steps;

    let hits: u64 = (0..STREAMS)
        .into_par_iter()
        .map(|stream| {
            let paths = n / STREAMS + u64::from(stream < n % STREAMS);
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream);
            let mut hits = 0u64;
            for _ in 0..paths {
                let mut state = start;
                for _ in 0..steps {
                    state = if rng.gen::<f64>() < q { state.undo_up() } else { state.undo_down() };
                }
                hits += u64::from(state == origin);
            }
            hits
        })
        .sum();

    let estimate = hits as f64 / n as f64;
    Ok(WalkEstimate {
        estimate,
        std_error: (estimate * (1.0 - estimate) / n as f64).sqrt(),
        hits,
        mc_paths: n,
        seed: config.seed,
    })
}

/// Exact and simulated hit probabilities side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityReport {
    pub exact: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub mc_paths: u64,
    pub seed: u64,
}

pub fn probability_report(config: &BackwardWalkConfig, target: f64) -> Result<ProbabilityReport> {
    let exact = backward_hit_probability(config, target)?;
    let mc = simulate_backward_walk(config, target)?;
    Ok(ProbabilityReport {
        exact,
        estimate: mc.estimate,
        std_error: mc.std_error,
        mc_paths: mc.mc_paths,
        seed: mc.seed,
    })
}
