//! Exact rational arithmetic for small lattices.
//!
//! Market inputs are read through their shortest decimal form, so `0.2`
//! becomes `1/5` rather than the nearest binary fraction. The two-step call
//! with `u = 0.2`, `d = -0.1`, `r = 0.04` then prices to exactly `2247/225`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{PricingError, Result};
use crate::lattice::{LatticeParams, StateIndex, Trajectory};
use crate::math::binomial_exact;
use crate::payoff::{BarrierDirection, BarrierKnock, Payoff};

pub type Rational = BigRational;

/// Largest step count handled in exact mode.
pub const EXACT_STEP_CAP: usize = 12;

/// The rational with the same shortest decimal expansion as `x`.
pub fn decimal_to_rational(x: f64) -> Rational {
    assert!(x.is_finite(), "non-finite value has no decimal form");
    // `Display` for f64 never uses exponent notation.
    let text = format!("{x}");
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let numer: BigInt = format!("{int_part}{frac_part}").parse().expect("decimal digits");
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    let r = Rational::new(numer, denom);
    if negative {
        -r
    } else {
        r
    }
}

fn pow_signed(base: &Rational, exp: i64) -> Rational {
    let p = Pow::pow(base, exp.unsigned_abs() as u32);
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

/// A lattice with exact parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLattice {
    pub s0: Rational,
    pub u: Rational,
    pub d: Rational,
    pub r: Rational,
    pub steps: usize,
    recombining_strict: bool,
    float: LatticeParams,
}

impl ExactLattice {
    pub fn from_params(params: &LatticeParams) -> Result<Self> {
        if params.steps > EXACT_STEP_CAP {
            return Err(PricingError::EnumerationCapExceeded { steps: params.steps, cap: EXACT_STEP_CAP });
        }
        Ok(Self {
            s0: decimal_to_rational(params.s0),
            u: decimal_to_rational(params.u),
            d: decimal_to_rational(params.d),
            r: decimal_to_rational(params.r),
            steps: params.steps,
            recombining_strict: params.recombining_strict,
            float: params.clone(),
        })
    }

    /// `(r - d) / (u - d)`.
    pub fn q(&self) -> Result<Rational> {
        if !(self.d < self.r && self.r < self.u) {
            return Err(PricingError::OutOfRange {
                d: self.float.d,
                r: self.float.r,
                u: self.float.u,
            });
        }
        Ok((&self.r - &self.d) / (&self.u - &self.d))
    }

    pub fn node_price(&self, ups: i64, downs: i64) -> Rational {
        let one = Rational::one();
        &self.s0 * pow_signed(&(&one + &self.u), ups) * pow_signed(&(&one + &self.d), downs)
    }

    pub fn terminal_node_price(&self, ups: usize) -> Rational {
        self.node_price(ups as i64, (self.steps - ups) as i64)
    }

    fn path_prices(&self, moves: &[bool]) -> Vec<Rational> {
        let (mut ups, mut downs) = (0, 0);
        let mut path = vec![self.s0.clone()];
        for &up in moves {
            if up {
                ups += 1;
            } else {
                downs += 1;
            }
            path.push(self.node_price(ups, downs));
        }
        path
    }

    /// Reads a float price or level exactly: a terminal node when it matches
    /// one, its decimal form otherwise.
    fn level(&self, x: f64) -> Rational {
        match self.float.match_terminal_node(x) {
            Some(node) => self.terminal_node_price(node),
            None => decimal_to_rational(x),
        }
    }

    /// Exact payoff on a path `S_0..S_T`.
    pub fn payoff_value(&self, payoff: &Payoff, path: &[Rational], moves: &[bool]) -> Rational {
        let zero = Rational::zero;
        let s_t = path.last().expect("path holds S_0");
        let positive = |x: Rational| if x.is_positive() { x } else { zero() };
        let indicator = |b: bool| if b { Rational::one() } else { zero() };
        match payoff {
            Payoff::Call { strike } => positive(s_t - self.level(*strike)),
            Payoff::Put { strike } => positive(self.level(*strike) - s_t),
            Payoff::DigitalAt { strike } => indicator(*s_t == self.level(*strike)),
            Payoff::DigitalInterval { k1, k2 } => {
                indicator(self.level(*k1) <= *s_t && *s_t <= self.level(*k2))
            }
            Payoff::Barrier { level, direction, knock, inner } => {
                let level = self.level(*level);
                let touched = match direction {
                    BarrierDirection::Up => path.iter().any(|s| *s >= level),
                    BarrierDirection::Down => path.iter().any(|s| *s <= level),
                };
                if touched == (*knock == BarrierKnock::In) {
                    self.payoff_value(inner, path, moves)
                } else {
                    zero()
                }
            }
            Payoff::AsianArithmetic { strike } => {
                let monitored = &path[1..];
                let sum = monitored.iter().fold(zero(), |acc, s| acc + s);
                let mean = sum / Rational::from_integer(BigInt::from(monitored.len()));
                positive(mean - self.level(*strike))
            }
            Payoff::Lookback => {
                let min = path.iter().min().expect("nonempty path");
                s_t - min
            }
            Payoff::TablePath { values } => values
                .get(&Trajectory::new(moves.to_vec()))
                .map_or_else(zero, |v| decimal_to_rational(*v)),
            Payoff::TableTerminal { entries } => entries
                .iter()
                .find(|(k, _)| self.level(*k) == *s_t)
                .map_or_else(zero, |(_, v)| decimal_to_rational(*v)),
            Payoff::Constant { value } => decimal_to_rational(*value),
            Payoff::Underlying => s_t.clone(),
        }
    }

    fn binomial(&self, n: usize, k: usize) -> Rational {
        Rational::from_integer(BigInt::from(binomial_exact(n as u64, k as u64).expect("small n")))
    }

    /// `sum_omega f(omega) q^x (1-q)^(T-x)` over all trajectories.
    pub fn price_path_dependent(&self, payoff: &Payoff) -> Result<Rational> {
        payoff.validate_for(&self.float)?;
        let q = self.q()?;
        let q_down = Rational::one() - &q;
        let mut total = Rational::zero();
        for t in Trajectory::all(self.steps) {
            let path = self.path_prices(t.moves());
            let f = self.payoff_value(payoff, &path, t.moves());
            if !f.is_zero() {
                let x = t.up_count();
                total += f * Pow::pow(&q, x as u32) * Pow::pow(&q_down, (self.steps - x) as u32);
            }
        }
        Ok(total)
    }

    /// `C(T, x0) q^x0 (1-q)^(T-x0)`.
    pub fn price_digital(&self, strike_index: usize) -> Result<Rational> {
        if strike_index > self.steps {
            return Err(PricingError::InvalidParameter {
                field: "strike_index",
                reason: format!("{strike_index} exceeds {} steps", self.steps),
            });
        }
        let q = self.q()?;
        let q_down = Rational::one() - &q;
        Ok(self.binomial(self.steps, strike_index)
            * Pow::pow(&q, strike_index as u32)
            * Pow::pow(&q_down, (self.steps - strike_index) as u32))
    }

    /// CRR sum at time 0 for a terminal-state payoff.
    pub fn price_european_crr(&self, payoff: &Payoff) -> Result<Rational> {
        if !payoff.is_terminal() {
            return Err(PricingError::PathDependentPayoffRejected { kind: payoff.kind() });
        }
        let q = self.q()?;
        let q_down = Rational::one() - &q;
        let mut total = Rational::zero();
        for x in 0..=self.steps {
            let s_t = self.terminal_node_price(x);
            let f = self.payoff_value(payoff, &[s_t], &[]);
            total += self.binomial(self.steps, x) * f * Pow::pow(&q, x as u32) * Pow::pow(&q_down, (self.steps - x) as u32);
        }
        Ok(total)
    }

    /// Mass the backward walk from terminal node `strike_index` leaves on
    /// `S0` after `T` steps.
    pub fn backward_hit_probability(&self, strike_index: usize) -> Result<Rational> {
        if strike_index > self.steps {
            return Err(PricingError::Unreachable {
                strike: f64::NAN,
                target: self.float.s0,
                steps: self.steps,
            });
        }
        let q = self.q()?;
        let q_down = Rational::one() - &q;
        let start = StateIndex::from_exponents(&self.float, strike_index as i64, (self.steps - strike_index) as i64);
        let mut layer: BTreeMap<StateIndex, Rational> = BTreeMap::new();
        layer.insert(start, Rational::one());
        for _ in 0..self.steps {
            let mut earlier = BTreeMap::new();
            for (state, mass) in layer {
                *earlier.entry(state.undo_up()).or_insert_with(Rational::zero) += &q * &mass;
                *earlier.entry(state.undo_down()).or_insert_with(Rational::zero) += &q_down * &mass;
            }
            layer = earlier;
        }
        Ok(layer.remove(&StateIndex::origin(&self.float)).unwrap_or_else(Rational::zero))
    }
}

/// Nearest float, for reporting.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `n / d` in lowest terms, for tests and reports.
pub fn ratio(n: i64, d: i64) -> Rational {
    let g = n.gcd(&d);
    Rational::new(BigInt::from(n / g), BigInt::from(d / g))
}
