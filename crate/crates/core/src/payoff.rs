//! Payoff specifications and their evaluation on a price path.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::lattice::{LatticeParams, Trajectory, NODE_MATCH_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierDirection {
    /// Triggered when the running maximum reaches the level.
    Up,
    /// Triggered when the running minimum reaches the level.
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierKnock {
    In,
    Out,
}

/// A claim paying at maturity, in time-`T` numeraire units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Payoff {
    Call { strike: f64 },
    Put { strike: f64 },
    /// Degenerate digital: 1 iff `S_T` is the node `strike`.
    DigitalAt { strike: f64 },
    /// 1 iff `k1 <= S_T <= k2`.
    DigitalInterval { k1: f64, k2: f64 },
    /// `inner` paid if the barrier is (knock-in) or is not (knock-out)
    /// touched by the path `S_0..S_T`.
    Barrier {
        level: f64,
        direction: BarrierDirection,
        knock: BarrierKnock,
        inner: Box<Payoff>,
    },
    /// Call on the arithmetic average of `S_1..S_T`.
    AsianArithmetic { strike: f64 },
    /// Floating-strike lookback call, `S_T - min(S_0..S_T)`.
    Lookback,
    /// Explicit value per trajectory; unlisted trajectories pay 0.
    TablePath { values: BTreeMap<Trajectory, f64> },
    /// Explicit value per terminal price; unlisted prices pay 0.
    TableTerminal { entries: Vec<(f64, f64)> },
    /// A fixed amount, e.g. the unit bond for `value = 1`.
    Constant { value: f64 },
    /// The asset itself, `S_T`.
    Underlying,
}

fn same_price(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if a <= 0.0 || b <= 0.0 {
        return false;
    }
    let (la, lb) = (a.ln(), b.ln());
    (la - lb).abs() <= NODE_MATCH_TOL * la.abs().max(lb.abs()).max(1.0)
}

fn le_tol(a: f64, b: f64) -> bool {
    a <= b || same_price(a, b)
}

impl Payoff {
    pub fn kind(&self) -> &'static str {
        match self {
            Payoff::Call { .. } => "call",
            Payoff::Put { .. } => "put",
            Payoff::DigitalAt { .. } => "digital_at",
            Payoff::DigitalInterval { .. } => "digital_interval",
            Payoff::Barrier { .. } => "barrier",
            Payoff::AsianArithmetic { .. } => "asian_arithmetic",
            Payoff::Lookback => "lookback",
            Payoff::TablePath { .. } => "table_path",
            Payoff::TableTerminal { .. } => "table_terminal",
            Payoff::Constant { .. } => "constant",
            Payoff::Underlying => "underlying",
        }
    }

    /// True when the payoff depends on `S_T` alone.
    pub fn is_terminal(&self) -> bool {
        !matches!(
            self,
            Payoff::Barrier { .. }
                | Payoff::AsianArithmetic { .. }
                | Payoff::Lookback
                | Payoff::TablePath { .. }
        )
    }

    /// Checks declared strikes and levels are finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(PricingError::InvalidPayoff(format!(
                    "{} `{name}` must be finite and >= 0, got {v}",
                    self.kind()
                )))
            }
        };
        match self {
            Payoff::Call { strike }
            | Payoff::Put { strike }
            | Payoff::DigitalAt { strike }
            | Payoff::AsianArithmetic { strike } => check("strike", *strike),
            Payoff::DigitalInterval { k1, k2 } => {
                check("k1", *k1)?;
                check("k2", *k2)?;
                if k1 > k2 {
                    return Err(PricingError::InvalidPayoff(format!(
                        "digital_interval needs k1 <= k2, got {k1} > {k2}"
                    )));
                }
                Ok(())
            }
            Payoff::Barrier { level, inner, .. } => {
                check("level", *level)?;
                inner.validate()
            }
            Payoff::TablePath { values } => values.values().try_for_each(|v| {
                if v.is_finite() {
                    Ok(())
                } else {
                    Err(PricingError::InvalidPayoff("table_path value is not finite".into()))
                }
            }),
            Payoff::TableTerminal { entries } => entries.iter().try_for_each(|(k, v)| {
                check("price", *k)?;
                if v.is_finite() {
                    Ok(())
                } else {
                    Err(PricingError::InvalidPayoff("table_terminal value is not finite".into()))
                }
            }),
            Payoff::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(PricingError::InvalidPayoff("constant value is not finite".into()))
                }
            }
            Payoff::Lookback | Payoff::Underlying => Ok(()),
        }
    }

    /// [`validate`](Self::validate) plus the table-key length check, which
    /// needs the market.
    pub fn validate_for(&self, params: &LatticeParams) -> Result<()> {
        self.validate()?;
        match self {
            Payoff::TablePath { values } => {
                if let Some(bad) = values.keys().find(|t| t.len() != params.steps) {
                    return Err(PricingError::TrajectoryLength {
                        expected: params.steps,
                        got: bad.len(),
                    });
                }
                Ok(())
            }
            Payoff::Barrier { inner, .. } => inner.validate_for(params),
            _ => Ok(()),
        }
    }

    /// Rejects degenerate digital strikes that are not terminal nodes.
    pub fn require_lattice_strikes(&self, params: &LatticeParams) -> Result<()> {
        match self {
            Payoff::DigitalAt { strike } => match params.match_terminal_node(*strike) {
                Some(_) => Ok(()),
                None => Err(PricingError::StrikeOffLattice { strike: *strike }),
            },
            Payoff::Barrier { inner, .. } => inner.require_lattice_strikes(params),
            _ => Ok(()),
        }
    }

    /// Value as a function of the terminal price; `None` for path-dependent kinds.
    pub fn terminal_value(&self, s_t: f64) -> Option<f64> {
        Some(match self {
            Payoff::Call { strike } => (s_t - strike).max(0.0),
            Payoff::Put { strike } => (strike - s_t).max(0.0),
            Payoff::DigitalAt { strike } => f64::from(same_price(s_t, *strike)),
            Payoff::DigitalInterval { k1, k2 } => f64::from(le_tol(*k1, s_t) && le_tol(s_t, *k2)),
            Payoff::TableTerminal { entries } => entries
                .iter()
                .find(|(k, _)| same_price(*k, s_t))
                .map_or(0.0, |(_, v)| *v),
            Payoff::Constant { value } => *value,
            Payoff::Underlying => s_t,
            _ => return None,
        })
    }

    /// Value on a full path. `path` holds `S_0..S_T` and `moves` the
    /// trajectory that generated it.
    pub fn path_value(&self, path: &[f64], moves: &[bool]) -> f64 {
        let s_t = *path.last().expect("path holds at least S_0");
        match self {
            Payoff::Barrier { level, direction, knock, inner } => {
                let touched = match direction {
                    BarrierDirection::Up => path.iter().any(|&s| le_tol(*level, s)),
                    BarrierDirection::Down => path.iter().any(|&s| le_tol(s, *level)),
                };
                let alive = match knock {
                    BarrierKnock::In => touched,
                    BarrierKnock::Out => !touched,
                };
                if alive {
                    inner.path_value(path, moves)
                } else {
                    0.0
                }
            }
            Payoff::AsianArithmetic { strike } => {
                let monitored = &path[1..];
                let mean = monitored.iter().sum::<f64>() / monitored.len() as f64;
                (mean - strike).max(0.0)
            }
            Payoff::Lookback => {
                let min = path.iter().copied().fold(f64::INFINITY, f64::min);
                s_t - min
            }
            Payoff::TablePath { values } => {
                // Keys are compared by move sequence, so build one lazily.
                let key = Trajectory::new(moves.to_vec());
                values.get(&key).copied().unwrap_or(0.0)
            }
            terminal => terminal.terminal_value(s_t).expect("terminal kind"),
        }
    }

    /// Builds the terminal table of a terminal-state payoff over all nodes.
    pub fn tabulate_terminal(&self, params: &LatticeParams) -> Option<Payoff> {
        let entries = params
            .terminal_prices()
            .into_iter()
            .map(|s| self.terminal_value(s).map(|v| (s, v)))
            .collect::<Option<Vec<_>>>()?;
        Some(Payoff::TableTerminal { entries })
    }
}

/// Payoff of `payoff` along `trajectory`.
pub fn evaluate_payoff(payoff: &Payoff, params: &LatticeParams, trajectory: &Trajectory) -> Result<f64> {
    let path = params.path_prices(trajectory)?;
    Ok(payoff.path_value(&path, trajectory.moves()))
}
