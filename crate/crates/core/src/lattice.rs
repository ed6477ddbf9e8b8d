//! The binomial market: parameters, trajectories, node prices and the
//! numeraire convention.
//!
//! Prices are carried in numeraire units. One numeraire unit at time `t` is
//! the time-`t` value of the zero-coupon bond paying one unit of currency at
//! maturity, `B_t = (1+r)^(t-T)`, so a payoff at maturity is already in
//! numeraire units and discounting only happens on conversion to nominal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Largest step count for which all `2^T` trajectories are enumerated.
pub const ENUMERATION_CAP: usize = 25;

/// Tolerance on `(1+u)(1+d) = 1` when the recombining flag is set.
pub const RECOMBINING_TOL: f64 = 1e-12;

/// Tolerance on log-price used to match a strike to a lattice node.
pub const NODE_MATCH_TOL: f64 = 1e-9;

/// Parameters of the binomial market `(S0, u, d, r, T, p)`.
///
/// `u`, `d` and `r` are per-step net returns. Construction checks the
/// parameters describe a market (positive prices, `d < u`); the no-arbitrage
/// ordering `d < r < u` is enforced when state prices are computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLatticeParams")]
pub struct LatticeParams {
    pub s0: f64,
    pub u: f64,
    pub d: f64,
    pub r: f64,
    pub steps: usize,
    /// Real-world up probability. Carried as metadata, never used in pricing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub recombining_strict: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLatticeParams {
    s0: f64,
    u: f64,
    d: f64,
    r: f64,
    steps: usize,
    #[serde(default)]
    p: Option<f64>,
    #[serde(default)]
    recombining_strict: bool,
}

impl TryFrom<RawLatticeParams> for LatticeParams {
    type Error = PricingError;

    fn try_from(raw: RawLatticeParams) -> Result<Self> {
        let mut params = LatticeParams::new(raw.s0, raw.u, raw.d, raw.r, raw.steps)?;
        if let Some(p) = raw.p {
            params = params.with_real_world_p(p)?;
        }
        if raw.recombining_strict {
            params = params.recombining()?;
        }
        Ok(params)
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> PricingError {
    PricingError::InvalidParameter { field, reason: reason.into() }
}

impl LatticeParams {
    pub fn new(s0: f64, u: f64, d: f64, r: f64, steps: usize) -> Result<Self> {
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(invalid("s0", format!("must be finite and > 0, got {s0}")));
        }
        for (field, v) in [("u", u), ("d", d), ("r", r)] {
            if !v.is_finite() || v <= -1.0 {
                return Err(invalid(field, format!("must be finite and > -1, got {v}")));
            }
        }
        if d >= u {
            return Err(invalid("d", format!("down return {d} must be below up return {u}")));
        }
        if steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        Ok(Self { s0, u, d, r, steps, p: None, recombining_strict: false })
    }

    pub fn with_real_world_p(mut self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("p", format!("must lie in (0, 1), got {p}")));
        }
        self.p = Some(p);
        Ok(self)
    }

    /// Turns on the recombining constraint `(1+u)(1+d) = 1`.
    pub fn recombining(mut self) -> Result<Self> {
        let prod = (1.0 + self.u) * (1.0 + self.d);
        if (prod - 1.0).abs() > RECOMBINING_TOL {
            return Err(invalid(
                "recombining_strict",
                format!("(1+u)(1+d) = {prod} differs from 1"),
            ));
        }
        self.recombining_strict = true;
        Ok(self)
    }

    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        Ok(Self { steps, ..self.clone() })
    }

    /// `S0 (1+u)^ups (1+d)^downs`. Negative exponents address the extended
    /// state space below the standard tree.
    pub fn node_price(&self, ups: i64, downs: i64) -> f64 {
        self.s0 * (1.0 + self.u).powi(ups as i32) * (1.0 + self.d).powi(downs as i32)
    }

    /// Terminal price after `ups` up moves out of `steps`.
    pub fn terminal_node_price(&self, ups: usize) -> f64 {
        self.node_price(ups as i64, (self.steps - ups) as i64)
    }

    /// All terminal prices, indexed by up-count.
    pub fn terminal_prices(&self) -> Vec<f64> {
        (0..=self.steps).map(|x| self.terminal_node_price(x)).collect()
    }

    /// Up-count of the terminal node equal to `price`, if any.
    pub fn match_terminal_node(&self, price: f64) -> Option<usize> {
        if !(price.is_finite() && price > 0.0) {
            return None;
        }
        let target = price.ln();
        (0..=self.steps).find(|&x| {
            let node = self.terminal_node_price(x).ln();
            (target - node).abs() <= NODE_MATCH_TOL * node.abs().max(1.0)
        })
    }

    pub fn check_trajectory(&self, trajectory: &Trajectory) -> Result<()> {
        if trajectory.len() != self.steps {
            return Err(PricingError::TrajectoryLength {
                expected: self.steps,
                got: trajectory.len(),
            });
        }
        Ok(())
    }

    /// Price path `S_0, S_1, ..., S_T` along a trajectory.
    pub fn path_prices(&self, trajectory: &Trajectory) -> Result<Vec<f64>> {
        self.check_trajectory(trajectory)?;
        Ok(self.path_prices_unchecked(trajectory.moves()))
    }

    pub(crate) fn path_prices_unchecked(&self, moves: &[bool]) -> Vec<f64> {
        let mut path = Vec::with_capacity(moves.len() + 1);
        let (mut ups, mut downs) = (0i64, 0i64);
        path.push(self.s0);
        for &up in moves {
            if up {
                ups += 1;
            } else {
                downs += 1;
            }
            // Recomputed from exponents so equal up-counts give bitwise-equal prices.
            path.push(self.node_price(ups, downs));
        }
        path
    }

    /// Number of currency units one numeraire unit is worth at time `t`.
    pub fn numeraire_value(&self, t: usize) -> f64 {
        (1.0 + self.r).powi(t as i32 - self.steps as i32)
    }
}

/// Asset price at maturity along a trajectory, `S0 (1+u)^x (1+d)^(T-x)`.
pub fn terminal_price(params: &LatticeParams, trajectory: &Trajectory) -> Result<f64> {
    params.check_trajectory(trajectory)?;
    Ok(params.terminal_node_price(trajectory.up_count()))
}

/// A sample point: the sequence of up (`true`) and down moves.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trajectory {
    moves: Vec<bool>,
}

impl Trajectory {
    pub fn new(moves: Vec<bool>) -> Self {
        Self { moves }
    }

    /// Builds a trajectory from 0/1 coordinates.
    pub fn from_coordinates(thetas: &[u8]) -> Result<Self> {
        thetas
            .iter()
            .map(|&theta| match theta {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(PricingError::InvalidParameter {
                    field: "trajectory",
                    reason: format!("coordinate {other} is not 0 or 1"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Bit `i` of `mask` is the move at step `i + 1`.
    pub fn from_bits(mask: u64, len: usize) -> Self {
        Self { moves: (0..len).map(|i| (mask >> i) & 1 == 1).collect() }
    }

    pub fn moves(&self) -> &[bool] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn up_count(&self) -> usize {
        self.moves.iter().filter(|&&m| m).count()
    }

    /// All `2^len` trajectories, in bit-mask order.
    pub fn all(len: usize) -> impl Iterator<Item = Trajectory> {
        (0..1u64 << len).map(move |mask| Trajectory::from_bits(mask, len))
    }
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &m in &self.moves {
            f.write_str(if m { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Trajectory {
    type Err = PricingError;

    /// Parses `"0,0,1"` or `"001"`.
    fn from_str(s: &str) -> Result<Self> {
        let coords: Vec<u8> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(PricingError::InvalidParameter {
                    field: "trajectory",
                    reason: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<_>>()?;
        Trajectory::from_coordinates(&coords)
    }
}

impl Serialize for Trajectory {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Trajectory {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A value quoted in time-`t` numeraire units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumerairePrice {
    pub value: f64,
    pub t: usize,
}

impl NumerairePrice {
    pub fn new(value: f64, t: usize) -> Self {
        Self { value, t }
    }
}

/// Converts a numeraire quote to currency: `value * (1+r)^(t-T)`.
pub fn to_nominal(price: NumerairePrice, params: &LatticeParams) -> Result<f64> {
    if price.t > params.steps {
        return Err(PricingError::InvalidTime { t: price.t, ups: 0, steps: params.steps });
    }
    Ok(price.value * params.numeraire_value(price.t))
}

/// Inverse of [`to_nominal`].
pub fn from_nominal(nominal: f64, t: usize, params: &LatticeParams) -> Result<NumerairePrice> {
    if t > params.steps {
        return Err(PricingError::InvalidTime { t, ups: 0, steps: params.steps });
    }
    Ok(NumerairePrice::new(nominal / params.numeraire_value(t), t))
}

/// Index of a node in the (possibly extended) state space.
///
/// Under the recombining constraint the price depends only on the net
/// exponent `m = k - l` and states collapse onto the integers; otherwise a
/// state is the exponent pair `(k, l)` of `S0 (1+u)^k (1+d)^l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateIndex {
    Net(i64),
    Pair { up: i64, down: i64 },
}

impl StateIndex {
    pub fn from_exponents(params: &LatticeParams, up: i64, down: i64) -> Self {
        if params.recombining_strict {
            StateIndex::Net(up - down)
        } else {
            StateIndex::Pair { up, down }
        }
    }

    pub fn origin(params: &LatticeParams) -> Self {
        Self::from_exponents(params, 0, 0)
    }

    /// The state one up move earlier: divide the price by `1+u`.
    pub fn undo_up(self) -> Self {
        match self {
            StateIndex::Net(m) => StateIndex::Net(m - 1),
            StateIndex::Pair { up, down } => StateIndex::Pair { up: up - 1, down },
        }
    }

    /// The state one down move earlier: divide the price by `1+d`.
    pub fn undo_down(self) -> Self {
        match self {
            StateIndex::Net(m) => StateIndex::Net(m + 1),
            StateIndex::Pair { up, down } => StateIndex::Pair { up, down: down - 1 },
        }
    }

    pub fn price(self, params: &LatticeParams) -> f64 {
        match self {
            StateIndex::Net(m) => params.s0 * (1.0 + params.u).powi(m as i32),
            StateIndex::Pair { up, down } => params.node_price(up, down),
        }
    }
}

impl fmt::Display for StateIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateIndex::Net(m) => write!(f, "{m}"),
            StateIndex::Pair { up, down } => write!(f, "{up}:{down}"),
        }
    }
}
