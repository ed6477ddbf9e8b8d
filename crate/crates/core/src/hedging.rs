//! Static hedging with Arrow-Debreu securities.
//!
//! The one-step securities `AD_up` and `AD_down` pay one numeraire unit after
//! an up (resp. down) move and cost `q` and `1 - q` numeraire units. A claim
//! paying one unit on a single trajectory is replicated by rolling these
//! backward along the trajectory, which prices it at `q^x (1-q)^(T-x)`;
//! any path-dependent claim is then a weighted sum of such securities.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::lattice::{LatticeParams, NumerairePrice, Trajectory, ENUMERATION_CAP};
use crate::math::CompensatedSum;
use crate::payoff::Payoff;

/// Up-state price of the one-step Arrow-Debreu security, in numeraire units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskNeutralWeight(f64);

impl RiskNeutralWeight {
    /// Wraps `q`; must lie strictly inside (0, 1).
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(Self(q))
        } else {
            Err(PricingError::InvalidParameter {
                field: "q",
                reason: format!("must lie in (0, 1), got {q}"),
            })
        }
    }

    pub fn up(self) -> f64 {
        self.0
    }

    pub fn down(self) -> f64 {
        1.0 - self.0
    }

    /// Price of the one-step security for a move.
    pub fn of(self, up: bool) -> f64 {
        if up {
            self.up()
        } else {
            self.down()
        }
    }

    /// `q^ups (1-q)^downs`.
    pub fn path_weight(self, ups: usize, downs: usize) -> f64 {
        self.up().powi(ups as i32) * self.down().powi(downs as i32)
    }
}

/// `q = (r - d) / (u - d)`.
pub fn risk_neutral_q(params: &LatticeParams) -> Result<RiskNeutralWeight> {
    let LatticeParams { u, d, r, .. } = *params;
    if !(d < r && r < u) {
        return Err(PricingError::OutOfRange { d, r, u });
    }
    Ok(RiskNeutralWeight((r - d) / (u - d)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdInstrument {
    #[serde(rename = "AD_up")]
    Up,
    #[serde(rename = "AD_down")]
    Down,
}

impl AdInstrument {
    pub fn for_move(up: bool) -> Self {
        if up {
            AdInstrument::Up
        } else {
            AdInstrument::Down
        }
    }
}

impl fmt::Display for AdInstrument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdInstrument::Up => "AD_up",
            AdInstrument::Down => "AD_down",
        })
    }
}

/// Buy-and-hold portfolio of `a` assets and `b` bonds replicating a one-step
/// Arrow-Debreu security. The bond costs 1 at time 0 and pays `1 + r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneStepHedge {
    pub a: f64,
    pub b: f64,
    /// Nominal cost `a S0 + b`.
    pub cost: f64,
}

impl OneStepHedge {
    /// Portfolio value after the move.
    pub fn value_after(&self, params: &LatticeParams, up: bool) -> f64 {
        let ret = if up { params.u } else { params.d };
        self.a * params.s0 * (1.0 + ret) + self.b * (1.0 + params.r)
    }

    /// Cost in units of the one-step numeraire, i.e. `q` or `1 - q`.
    pub fn cost_numeraire(&self, params: &LatticeParams) -> f64 {
        self.cost * (1.0 + params.r)
    }
}

/// Solves the two-state replication system for `AD_up` or `AD_down`.
///
/// The asset position carries all of the payoff variation, so
/// `a = ±1 / (S0 (u - d))`; the bond offsets the asset in the state where
/// the security pays nothing.
pub fn replicate_one_step(instrument: AdInstrument, params: &LatticeParams) -> Result<OneStepHedge> {
    risk_neutral_q(params)?;
    let LatticeParams { s0, u, d, r, .. } = *params;
    let spread = u - d;
    let (a, b) = match instrument {
        AdInstrument::Up => (1.0 / (s0 * spread), -(1.0 + d) / (spread * (1.0 + r))),
        AdInstrument::Down => (-1.0 / (s0 * spread), (1.0 + u) / (spread * (1.0 + r))),
    };
    Ok(OneStepHedge { a, b, cost: a * s0 + b })
}

/// Time-0 price of the security paying one unit iff `trajectory` occurs.
pub fn price_path_ad(params: &LatticeParams, trajectory: &Trajectory) -> Result<NumerairePrice> {
    params.check_trajectory(trajectory)?;
    let q = risk_neutral_q(params)?;
    let x = trajectory.up_count();
    Ok(NumerairePrice::new(q.path_weight(x, params.steps - x), 0))
}

pub(crate) fn check_cap(steps: usize) -> Result<()> {
    if steps > ENUMERATION_CAP {
        return Err(PricingError::EnumerationCapExceeded { steps, cap: ENUMERATION_CAP });
    }
    Ok(())
}

/// Paths per enumeration chunk; the chunking is fixed so sums are
/// reproducible regardless of thread count.
const CHUNK_BITS: usize = 14;

/// Time-0 price of a path-dependent claim as the payoff-weighted sum of
/// trajectory Arrow-Debreu prices, enumerating all `2^T` trajectories.
pub fn price_path_dependent(params: &LatticeParams, payoff: &Payoff) -> Result<NumerairePrice> {
    check_cap(params.steps)?;
    payoff.validate_for(params)?;
    let q = risk_neutral_q(params)?;
    let steps = params.steps;
    let weights: Vec<f64> = (0..=steps).map(|x| q.path_weight(x, steps - x)).collect();

    let sum_range = |lo: u64, hi: u64| {
        let mut acc = CompensatedSum::new();
        for mask in lo..hi {
            let t = Trajectory::from_bits(mask, steps);
            let path = params.path_prices_unchecked(t.moves());
            let f = payoff.path_value(&path, t.moves());
            if f != 0.0 {
                acc.add(f * weights[t.up_count()]);
            }
        }
        acc
    };

    let total = 1u64 << steps;
    let chunk = 1u64 << CHUNK_BITS;
    let value = if total <= chunk {
        sum_range(0, total).value()
    } else {
        let parts: Vec<CompensatedSum> = (0..total / chunk)
            .into_par_iter()
            .map(|c| sum_range(c * chunk, (c + 1) * chunk))
            .collect();
        let mut acc = CompensatedSum::new();
        for p in parts {
            acc.merge(p);
        }
        acc.value()
    };
    Ok(NumerairePrice::new(value, 0))
}

/// One row of the backward hedge of a trajectory Arrow-Debreu security.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeStep {
    pub time: usize,
    /// Security bought at `time`; `None` on the maturity row.
    pub instrument: Option<AdInstrument>,
    /// Shares bought, each paying one numeraire unit at `time + 1`.
    pub shares: f64,
    /// Wealth needed at `time` on the trajectory, in numeraire units.
    pub wealth: f64,
}

/// Backward hedge of the security paying one unit on `trajectory`.
///
/// Rows run from `t = 0` to `t = T`. At each `t < T` the wealth buys
/// `wealth(t+1)` shares of the one-step security matching move `t + 1`.
/// Off the trajectory the required wealth is zero, so only the on-path
/// rows are materialized.
pub fn hedge_ledger(params: &LatticeParams, trajectory: &Trajectory) -> Result<Vec<HedgeStep>> {
    params.check_trajectory(trajectory)?;
    let q = risk_neutral_q(params)?;
    let moves = trajectory.moves();
    let steps = params.steps;

    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(HedgeStep { time: steps, instrument: None, shares: 0.0, wealth: 1.0 });
    let mut wealth = 1.0;
    for t in (0..steps).rev() {
        let up = moves[t];
        let shares = wealth;
        wealth = shares * q.of(up);
        rows.push(HedgeStep { time: t, instrument: Some(AdInstrument::for_move(up)), shares, wealth });
    }
    rows.reverse();
    Ok(rows)
}
