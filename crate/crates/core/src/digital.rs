//! Degenerate digital options and the European pricing formula they add up to.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::hedging::{check_cap, price_path_ad, risk_neutral_q, RiskNeutralWeight};
use crate::lattice::{LatticeParams, NumerairePrice, Trajectory};
use crate::math::{binomial_pmf, CompensatedSum};
use crate::payoff::Payoff;

/// A digital paying one numeraire unit iff `S_T` is the terminal node with
/// `strike_index` up moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DigitalSpec {
    pub strike_index: usize,
    pub strike: f64,
}

impl DigitalSpec {
    pub fn from_index(params: &LatticeParams, strike_index: usize) -> Result<Self> {
        if strike_index > params.steps {
            return Err(PricingError::InvalidParameter {
                field: "strike_index",
                reason: format!("{strike_index} exceeds {} steps", params.steps),
            });
        }
        Ok(Self { strike_index, strike: params.terminal_node_price(strike_index) })
    }

    pub fn from_strike(params: &LatticeParams, strike: f64) -> Result<Self> {
        let strike_index = params
            .match_terminal_node(strike)
            .ok_or(PricingError::StrikeOffLattice { strike })?;
        Ok(Self { strike_index, strike })
    }

    fn check(&self, params: &LatticeParams) -> Result<()> {
        match params.match_terminal_node(self.strike) {
            Some(x) if x == self.strike_index => Ok(()),
            _ => Err(PricingError::StrikeOffLattice { strike: self.strike }),
        }
    }
}

/// `C(T, x0) q^x0 (1-q)^(T-x0)`.
pub fn price_digital(params: &LatticeParams, spec: &DigitalSpec) -> Result<NumerairePrice> {
    spec.check(params)?;
    let q = risk_neutral_q(params)?;
    let value = binomial_pmf(params.steps as u64, spec.strike_index as u64, q.up());
    Ok(NumerairePrice::new(value, 0))
}

/// The digital as the sum of the `C(T, x0)` trajectory securities with
/// `x0` up moves.
pub fn digital_from_ad(params: &LatticeParams, spec: &DigitalSpec) -> Result<NumerairePrice> {
    spec.check(params)?;
    check_cap(params.steps)?;
    let x0 = spec.strike_index as u32;
    let mut acc = CompensatedSum::new();
    for mask in (0..1u64 << params.steps).filter(|m| m.count_ones() == x0) {
        acc.add(price_path_ad(params, &Trajectory::from_bits(mask, params.steps))?.value);
    }
    Ok(NumerairePrice::new(acc.value(), 0))
}

/// Value at time `t` of a terminal-state claim, given `ups_so_far` up moves
/// up to `t`, in time-`t` numeraire units:
///
/// `sum_{x=0}^{T-t} C(T-t, x) q^x (1-q)^(T-t-x) f(S_t (1+u)^x (1+d)^(T-t-x))`.
///
/// At `t = 0` the nominal conversion restores the `(1+r)^-T` factor of the
/// classical formula.
pub fn price_european_crr(
    params: &LatticeParams,
    payoff: &Payoff,
    t: usize,
    ups_so_far: usize,
) -> Result<NumerairePrice> {
    if !payoff.is_terminal() {
        return Err(PricingError::PathDependentPayoffRejected { kind: payoff.kind() });
    }
    if t > params.steps || ups_so_far > t {
        return Err(PricingError::InvalidTime { t, ups: ups_so_far, steps: params.steps });
    }
    payoff.validate()?;
    let q = risk_neutral_q(params)?;
    let remaining = params.steps - t;
    let downs_so_far = t - ups_so_far;
    let value: CompensatedSum = (0..=remaining)
        .map(|x| {
            let s_t = params.node_price((ups_so_far + x) as i64, (downs_so_far + remaining - x) as i64);
            let f = payoff.terminal_value(s_t).expect("terminal payoff");
            binomial_pmf(remaining as u64, x as u64, q.up()) * f
        })
        .collect();
    Ok(NumerairePrice::new(value.value(), t))
}

/// Backward induction: each node is worth `q` times its up child plus
/// `1 - q` times its down child. Terminal-state claims run on the
/// recombining lattice; path-dependent claims on the full binary tree.
pub fn backward_induction_price(params: &LatticeParams, payoff: &Payoff) -> Result<NumerairePrice> {
    payoff.validate_for(params)?;
    let q = risk_neutral_q(params)?;
    let value = if payoff.is_terminal() {
        let mut layer: Vec<f64> = params
            .terminal_prices()
            .into_iter()
            .map(|s| payoff.terminal_value(s).expect("terminal payoff"))
            .collect();
        for n in (0..params.steps).rev() {
            for x in 0..=n {
                layer[x] = q.up() * layer[x + 1] + q.down() * layer[x];
            }
            layer.truncate(n + 1);
        }
        layer[0]
    } else {
        check_cap(params.steps)?;
        let mut moves = Vec::with_capacity(params.steps);
        tree_value(params, payoff, q, &mut moves)
    };
    Ok(NumerairePrice::new(value, 0))
}

fn tree_value(params: &LatticeParams, payoff: &Payoff, q: RiskNeutralWeight, moves: &mut Vec<bool>) -> f64 {
    if moves.len() == params.steps {
        let path = params.path_prices_unchecked(moves);
        return payoff.path_value(&path, moves);
    }
    moves.push(true);
    let up = tree_value(params, payoff, q, moves);
    moves.pop();
    moves.push(false);
    let down = tree_value(params, payoff, q, moves);
    moves.pop();
    q.up() * up + q.down() * down
}
