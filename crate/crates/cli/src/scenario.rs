//! Scenario files: one flat JSON object holding a market, an optional
//! payoff and optional command settings.
//!
//! A lattice market is given by `s0, u, d, r, steps` (plus optional `p` and
//! `recombining_strict`); a continuous market by `s0, mu, sigma, r, horizon,
//! dt`. Exactly one of the two must be present.

use std::path::Path;

use binohedge::{BsmParams, LatticeParams, Payoff, PricingError};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

const LATTICE_KEYS: [&str; 3] = ["u", "d", "steps"];
const BSM_KEYS: [&str; 4] = ["mu", "sigma", "horizon", "dt"];

/// Settings a scenario may carry; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_paths: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_counts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strikes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Market {
    Lattice(LatticeParams),
    Bsm { s0: f64, params: BsmParams },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub market: Market,
    pub payoff: Option<Payoff>,
    pub options: Options,
}

#[derive(Deserialize)]
struct LatticeFile {
    s0: f64,
    u: f64,
    d: f64,
    r: f64,
    steps: usize,
    #[serde(default)]
    p: Option<f64>,
    #[serde(default)]
    recombining_strict: bool,
    #[serde(default)]
    payoff: Option<Payoff>,
    #[serde(flatten)]
    options: Options,
}

#[derive(Deserialize)]
struct BsmFile {
    s0: f64,
    mu: f64,
    sigma: f64,
    r: f64,
    horizon: f64,
    dt: f64,
    #[serde(default)]
    payoff: Option<Payoff>,
    #[serde(flatten)]
    options: Options,
}

fn schema_error(e: impl std::fmt::Display) -> CliError {
    CliError::input(format!("scenario: {e}"))
}

fn market_error(e: PricingError) -> CliError {
    CliError::input(format!("scenario: {e}"))
}

impl Scenario {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("scenario: cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let value: Value = serde_json::from_str(text).map_err(schema_error)?;
        let Value::Object(map) = value else {
            return Err(schema_error("top level must be a JSON object"));
        };
        let has = |keys: &[&'static str]| keys.iter().find(|k| map.contains_key(**k)).copied();
        match (has(&LATTICE_KEYS), has(&BSM_KEYS)) {
            (Some(a), Some(b)) => Err(schema_error(format!(
                "fields `{a}` and `{b}` describe two markets; give exactly one"
            ))),
            (None, None) => Err(schema_error(
                "no market given; need `u`, `d`, `steps` (lattice) or `mu`, `sigma`, `horizon`, `dt` (bsm)",
            )),
            (Some(_), None) => Self::lattice(map),
            (None, Some(_)) => Self::bsm(map),
        }
    }

    fn lattice(map: Map<String, Value>) -> CliResult<Self> {
        // `flatten` and `deny_unknown_fields` do not combine in serde, so
        // unknown keys are checked by hand.
        check_keys(&map, &["s0", "u", "d", "r", "steps", "p", "recombining_strict", "payoff"])?;
        let f: LatticeFile = serde_json::from_value(Value::Object(map)).map_err(schema_error)?;
        let mut params = LatticeParams::new(f.s0, f.u, f.d, f.r, f.steps).map_err(market_error)?;
        if let Some(p) = f.p {
            params = params.with_real_world_p(p).map_err(market_error)?;
        }
        if f.recombining_strict {
            params = params.recombining().map_err(market_error)?;
        }
        if let Some(payoff) = &f.payoff {
            payoff.validate_for(&params).map_err(market_error)?;
        }
        Ok(Scenario { market: Market::Lattice(params), payoff: f.payoff, options: f.options })
    }

    fn bsm(map: Map<String, Value>) -> CliResult<Self> {
        check_keys(&map, &["s0", "mu", "sigma", "r", "horizon", "dt", "payoff"])?;
        let f: BsmFile = serde_json::from_value(Value::Object(map)).map_err(schema_error)?;
        if !(f.s0.is_finite() && f.s0 > 0.0) {
            return Err(schema_error(format!("invalid parameter `s0`: must be finite and > 0, got {}", f.s0)));
        }
        let params = BsmParams::new(f.mu, f.sigma, f.r, f.horizon, f.dt).map_err(market_error)?;
        if let Some(payoff) = &f.payoff {
            payoff.validate().map_err(market_error)?;
        }
        Ok(Scenario { market: Market::Bsm { s0: f.s0, params }, payoff: f.payoff, options: f.options })
    }

    pub fn lattice_params(&self) -> CliResult<&LatticeParams> {
        match &self.market {
            Market::Lattice(p) => Ok(p),
            Market::Bsm { .. } => Err(schema_error("this command needs a lattice market (`u`, `d`, `steps`)")),
        }
    }

    pub fn payoff(&self) -> CliResult<&Payoff> {
        self.payoff.as_ref().ok_or_else(|| schema_error("missing field `payoff`"))
    }
}

fn check_keys(map: &Map<String, Value>, market: &[&str]) -> CliResult<()> {
    const OPTION_KEYS: [&str; 5] = ["seed", "mc_paths", "step_counts", "strikes", "trajectory"];
    match map.keys().find(|k| !market.contains(&k.as_str()) && !OPTION_KEYS.contains(&k.as_str())) {
        Some(k) => Err(schema_error(format!("unknown field `{k}`"))),
        None => Ok(()),
    }
}
