//! Lattices that mimic a Black-Scholes-Merton market, and what happens to
//! the drift `mu` as the step shrinks.
//!
//! Gross returns per step are `U = e^{mu dt + sigma sqrt(dt)}`,
//! `D = e^{mu dt - sigma sqrt(dt)}` and `R = e^{r dt}`. Under the one-step
//! state prices the expected gross return is `R` for every `mu`, and the
//! log-price variance tends to `T sigma^2`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::digital::price_european_crr;
use crate::error::{PricingError, Result};
use crate::format::fmt_sig;
use crate::lattice::{to_nominal, LatticeParams};
use crate::math::ols_slope;
use crate::payoff::Payoff;

/// Relative tolerance for `horizon / dt` to count as an integer step count.
pub const STEP_ROUNDING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBsmParams")]
pub struct BsmParams {
    pub mu: f64,
    pub sigma: f64,
    pub r: f64,
    pub horizon: f64,
    pub dt: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBsmParams {
    mu: f64,
    sigma: f64,
    r: f64,
    horizon: f64,
    dt: f64,
}

impl TryFrom<RawBsmParams> for BsmParams {
    type Error = PricingError;

    fn try_from(raw: RawBsmParams) -> Result<Self> {
        BsmParams::new(raw.mu, raw.sigma, raw.r, raw.horizon, raw.dt)
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> PricingError {
    PricingError::InvalidParameter { field, reason: reason.into() }
}

impl BsmParams {
    pub fn new(mu: f64, sigma: f64, r: f64, horizon: f64, dt: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(invalid("mu", "must be finite"));
        }
        if !r.is_finite() {
            return Err(invalid("r", "must be finite"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid("sigma", format!("must be finite and > 0, got {sigma}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid("horizon", format!("must be finite and > 0, got {horizon}")));
        }
        if !(dt > 0.0 && dt <= horizon * (1.0 + STEP_ROUNDING_TOL)) {
            return Err(invalid("dt", format!("must lie in (0, horizon], got {dt}")));
        }
        let ratio = horizon / dt;
        if (ratio - ratio.round()).abs() > STEP_ROUNDING_TOL * ratio {
            return Err(invalid("dt", format!("horizon / dt = {ratio} is not an integer")));
        }
        let params = Self { mu, sigma, r, horizon, dt };
        let (down, rate, up) = (params.down(), params.growth(), params.up());
        if !(down < rate && rate < up) {
            return Err(PricingError::NoArbitrageViolated { down, rate, up });
        }
        Ok(params)
    }

    /// Same market with `horizon / steps` as the step.
    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        Self::new(self.mu, self.sigma, self.r, self.horizon, self.horizon / steps as f64)
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(mu, self.sigma, self.r, self.horizon, self.dt)
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::new(self.mu, self.sigma, self.r, self.horizon, dt)
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    fn jump(&self) -> f64 {
        self.sigma * self.dt.sqrt()
    }

    /// `U`
    pub fn up(&self) -> f64 {
        (self.mu * self.dt + self.jump()).exp()
    }

    /// `D`
    pub fn down(&self) -> f64 {
        (self.mu * self.dt - self.jump()).exp()
    }

    /// `R`
    pub fn growth(&self) -> f64 {
        (self.r * self.dt).exp()
    }

    /// `q = (R - D) / (U - D)`.
    pub fn q(&self) -> f64 {
        let (u, d, r) = (self.up(), self.down(), self.growth());
        (r - d) / (u - d)
    }
}

/// Lattice with `u = U - 1`, `d = D - 1`, per-step rate `R - 1` and
/// `horizon / dt` steps. Recombining exactly when `mu = 0`.
pub fn map_to_lattice(bsm: &BsmParams, s0: f64) -> Result<LatticeParams> {
    let params = LatticeParams::new(s0, bsm.up() - 1.0, bsm.down() - 1.0, bsm.growth() - 1.0, bsm.steps())?;
    if bsm.mu == 0.0 {
        params.recombining()
    } else {
        Ok(params)
    }
}

/// `qU + (1-q)D`, which equals `R` whatever `mu` is.
pub fn risk_neutral_step_mean(bsm: &BsmParams) -> f64 {
    let q = bsm.q();
    q * bsm.up() + (1.0 - q) * bsm.down()
}

/// `qU^2 + (1-q)D^2`.
pub fn risk_neutral_second_moment(bsm: &BsmParams) -> f64 {
    let q = bsm.q();
    q * bsm.up().powi(2) + (1.0 - q) * bsm.down().powi(2)
}

/// `RU + RD - UD`, the closed form of the second moment.
pub fn second_moment_identity(bsm: &BsmParams) -> f64 {
    let (u, d, r) = (bsm.up(), bsm.down(), bsm.growth());
    r * u + r * d - u * d
}

/// Per-step variance of the gross return, `q(U-R)^2 + (1-q)(D-R)^2`.
pub fn risk_neutral_step_variance(bsm: &BsmParams) -> f64 {
    let q = bsm.q();
    let (u, d, r) = (bsm.up(), bsm.down(), bsm.growth());
    q * (u - r).powi(2) + (1.0 - q) * (d - r).powi(2)
}

/// `(T / dt)(RU + RD - UD - R^2)`.
///
/// Evaluated as `(T / dt)(U - R)(R - D)`, the same quantity factored, with
/// both differences from `expm1` so small steps keep their precision.
pub fn risk_neutral_variance_exact(bsm: &BsmParams) -> f64 {
    let a = bsm.mu * bsm.dt;
    let c = bsm.r * bsm.dt;
    let s = bsm.jump();
    let up_gap = c.exp() * (a + s - c).exp_m1();
    let down_gap = -(c.exp() * (a - s - c).exp_m1());
    bsm.horizon / bsm.dt * up_gap * down_gap
}

/// `T sigma^2 (1 + (mu + r) dt)`.
pub fn risk_neutral_variance_approx(bsm: &BsmParams) -> f64 {
    bsm.horizon * bsm.sigma.powi(2) * (1.0 + (bsm.mu + bsm.r) * bsm.dt)
}

/// `T sigma^2`, the continuous-time limit.
pub fn bsm_variance(bsm: &BsmParams) -> f64 {
    bsm.horizon * bsm.sigma.powi(2)
}

/// Small-step sensitivity of `q` to the drift, `-sqrt(dt) / (2 sigma)`.
pub fn dq_dmu(bsm: &BsmParams) -> f64 {
    -bsm.dt.sqrt() / (2.0 * bsm.sigma)
}

/// Central difference of the exact `q` in `mu`.
pub fn dq_dmu_central_difference(bsm: &BsmParams, h: f64) -> Result<f64> {
    let plus = bsm.with_mu(bsm.mu + h)?.q();
    let minus = bsm.with_mu(bsm.mu - h)?.q();
    Ok((plus - minus) / (2.0 * h))
}

/// Change in the up-jump count that offsets a drift change `dmu`:
/// `-T dmu / (2 sigma sqrt(dt))`.
pub fn dx_adjustment(bsm: &BsmParams, dmu: f64) -> f64 {
    -bsm.horizon * dmu / (2.0 * bsm.jump())
}

/// Closed-form Black-Scholes call, the convergence target.
pub fn bsm_call_reference(s0: f64, strike: f64, bsm: &BsmParams) -> f64 {
    let discount = (-bsm.r * bsm.horizon).exp();
    if strike <= 0.0 {
        return s0;
    }
    let vol = bsm.sigma * bsm.horizon.sqrt();
    let d1 = ((s0 / strike).ln() + (bsm.r + 0.5 * bsm.sigma.powi(2)) * bsm.horizon) / vol;
    let d2 = d1 - vol;
    let n = Normal::standard();
    s0 * n.cdf(d1) - strike * discount * n.cdf(d2)
}

/// Nominal CRR call price on the lattice mapped from `bsm`.
pub fn crr_call(s0: f64, strike: f64, bsm: &BsmParams) -> Result<f64> {
    let lattice = map_to_lattice(bsm, s0)?;
    let price = price_european_crr(&lattice, &Payoff::Call { strike }, 0, 0)?;
    to_nominal(price, &lattice)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dt: f64,
    pub crr_price: f64,
    pub bsm_price: f64,
    pub abs_error: f64,
}

/// CRR call prices for each step count against the closed form.
pub fn convergence_study(s0: f64, strike: f64, bsm: &BsmParams, step_counts: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if step_counts.contains(&0) {
        return Err(invalid("steps", "step counts must be at least 1"));
    }
    let bsm_price = bsm_call_reference(s0, strike, bsm);
    step_counts
        .par_iter()
        .map(|&n| {
            let market = bsm.with_steps(n)?;
            let crr_price = crr_call(s0, strike, &market)?;
            Ok(ConvergenceRow { n, dt: market.dt, crr_price, bsm_price, abs_error: (crr_price - bsm_price).abs() })
        })
        .collect()
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> io::Result<()> {
    writeln!(out, "n,dt,crr_price,bsm_price,abs_error")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.n,
            fmt_sig(row.dt),
            fmt_sig(row.crr_price),
            fmt_sig(row.bsm_price),
            fmt_sig(row.abs_error)
        )?;
    }
    Ok(())
}

/// Least-squares slope of `variance(bsm_dt) / (T sigma^2) - 1` against `dt`.
pub fn variance_slope(bsm: &BsmParams, dts: &[f64], variance: fn(&BsmParams) -> f64) -> Result<Option<f64>> {
    let mut ys = Vec::with_capacity(dts.len());
    for &dt in dts {
        let market = bsm.with_dt(dt)?;
        ys.push(variance(&market) / bsm_variance(&market) - 1.0);
    }
    Ok(ols_slope(dts, &ys))
}

/// Analytic and finite-difference drift sensitivity of `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub dt: f64,
    pub sigma: f64,
    pub dq_dmu: f64,
    pub dq_dmu_central: f64,
    pub relative_error: f64,
}

/// Step used for the central difference of `q` in `mu`.
pub const FD_STEP: f64 = 1e-6;

pub fn sensitivity_report(bsm: &BsmParams) -> Result<SensitivityReport> {
    let analytic = dq_dmu(bsm);
    let central = dq_dmu_central_difference(bsm, FD_STEP)?;
    Ok(SensitivityReport {
        dt: bsm.dt,
        sigma: bsm.sigma,
        dq_dmu: analytic,
        dq_dmu_central: central,
        relative_error: ((central - analytic) / analytic).abs(),
    })
}
