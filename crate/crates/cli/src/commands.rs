use binohedge::asymptotics::{sensitivity_report, variance_slope};
use binohedge::exact::{to_f64, ExactLattice, EXACT_STEP_CAP};
use binohedge::walk::probability_report;
use binohedge::*;

use crate::error::{CliError, CliResult};
use crate::report::*;
use crate::scenario::{Market, Scenario};

/// Above this many steps the digital table skips the trajectory-sum column.
pub const AD_ROUTE_MAX_STEPS: usize = 20;

pub const DEFAULT_MC_PATHS: u64 = 100_000;
pub const DEFAULT_STEP_COUNTS: [usize; 3] = [64, 256, 1024];

/// Settings gathered from flags, falling back to the scenario's own.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub verify: bool,
    pub seed: Option<u64>,
    pub mc_paths: Option<u64>,
    pub step_counts: Option<Vec<usize>>,
    pub strikes: Option<Vec<f64>>,
    pub trajectory: Option<String>,
    pub counterexample: bool,
}

pub fn price(s: &Scenario, set: &Settings) -> CliResult<PriceReport> {
    let p = s.lattice_params()?;
    let f = s.payoff()?;
    f.require_lattice_strikes(p)?;
    let (method, value) = if f.is_terminal() {
        ("crr", price_european_crr(p, f, 0, 0)?)
    } else {
        ("path_enumeration", price_path_dependent(p, f)?)
    };
    let mut report = PriceReport::new(f.kind(), p.steps, method, value.value, to_nominal(value, p)?);
    if set.verify {
        report.verify = Some(verification(p, f, value.value)?);
    }
    Ok(report)
}

fn verification(p: &LatticeParams, f: &Payoff, engine: f64) -> CliResult<Verification> {
    let (oracle, exact, oracle_value) = if p.steps <= EXACT_STEP_CAP {
        let e = ExactLattice::from_params(p)?;
        let x = if f.is_terminal() { e.price_european_crr(f)? } else { e.price_path_dependent(f)? };
        ("exact_rational", Some(x.to_string()), to_f64(&x))
    } else {
        ("backward_induction", None, backward_induction_price(p, f)?.value)
    };
    Ok(Verification {
        oracle: oracle.into(),
        exact,
        oracle_value: format::round_sig(oracle_value),
        delta: format::round_sig((engine - oracle_value).abs()),
    })
}

pub fn hedge(s: &Scenario, set: &Settings) -> CliResult<HedgeReport> {
    let p = s.lattice_params()?;
    let text = set
        .trajectory
        .as_ref()
        .or(s.options.trajectory.as_ref())
        .ok_or_else(|| CliError::input("missing trajectory; pass --trajectory, e.g. 001"))?;
    let t: Trajectory = text
        .parse()
        .map_err(|e| CliError::input(format!("invalid `trajectory` {text:?}: {e}")))?;
    let rows = hedge_ledger(p, &t)?;
    let price = price_path_ad(p, &t)?.value;
    Ok(HedgeReport::new(t.to_string(), price, rows))
}

fn chosen_strikes(s: &Scenario, set: &Settings) -> Option<Vec<f64>> {
    set.strikes.clone().or_else(|| s.options.strikes.clone())
}

pub fn digital(s: &Scenario, set: &Settings) -> CliResult<DigitalReport> {
    let p = s.lattice_params()?;
    let strikes = match (chosen_strikes(s, set), &s.payoff) {
        (Some(k), _) => k,
        (None, Some(Payoff::DigitalAt { strike })) => vec![*strike],
        (None, _) => p.terminal_prices(),
    };
    let exact = if set.verify && p.steps <= EXACT_STEP_CAP { Some(ExactLattice::from_params(p)?) } else { None };
    let mut rows = Vec::with_capacity(strikes.len());
    for k in strikes {
        let spec = DigitalSpec::from_strike(p, k)?;
        let price = price_digital(p, &spec)?.value;
        let from_ad = if p.steps <= AD_ROUTE_MAX_STEPS { Some(digital_from_ad(p, &spec)?.value) } else { None };
        let walk = backward_hit_probability(&BackwardWalkConfig::new(p, spec.strike, 1, 0)?, p.s0)?;
        let exact = match &exact {
            Some(e) => Some(e.price_digital(spec.strike_index)?.to_string()),
            None => None,
        };
        rows.push(DigitalRow {
            strike: format::round_sig(spec.strike),
            index: spec.strike_index,
            price: format::round_sig(price),
            from_ad: from_ad.map(format::round_sig),
            walk: format::round_sig(walk),
            exact,
        });
    }
    Ok(DigitalReport { steps: p.steps, rows })
}

/// Without a payoff every strike carries weight one.
fn grid_inputs(s: &Scenario, set: &Settings) -> CliResult<(LatticeParams, Payoff, Vec<f64>)> {
    let p = s.lattice_params()?;
    let unit = Payoff::Constant { value: 1.0 };
    let f = s.payoff.as_ref().unwrap_or(&unit);
    f.require_lattice_strikes(p)?;
    let strikes = match chosen_strikes(s, set) {
        Some(k) => k,
        None => {
            if !f.is_terminal() {
                return Err(PricingError::PathDependentPayoffRejected { kind: f.kind() }.into());
            }
            p.terminal_prices()
                .into_iter()
                .filter(|&k| f.terminal_value(k) != Some(0.0))
                .collect()
        }
    };
    Ok((p.clone(), f.clone(), strikes))
}

pub fn invariance(s: &Scenario, set: &Settings) -> CliResult<InvarianceReport> {
    let (p, f, strikes) = grid_inputs(s, set)?;
    let grid = build_value_grid(&p, &f, &strikes)?;
    let total = grid.total_payoff();
    let mut rows = Vec::with_capacity(p.steps + 1);
    let mut max_deviation = 0.0f64;
    for t in 0..=p.steps {
        let sum = invariance_sum(&grid, t)?;
        max_deviation = max_deviation.max((sum - total).abs());
        rows.push(InvarianceRow { t, sum: format::round_sig(sum) });
    }
    let counterexample = if set.counterexample {
        let (bond_value, terminal_mass) = standard_crr_invariance_counterexample(&p)?;
        Some(Counterexample {
            bond_value: format::round_sig(bond_value),
            terminal_mass: format::round_sig(terminal_mass),
        })
    } else {
        None
    };
    Ok(InvarianceReport {
        payoff: f.kind().into(),
        strikes: strikes.into_iter().map(format::round_sig).collect(),
        total_payoff: format::round_sig(total),
        rows,
        max_deviation: format::round_sig(max_deviation),
        counterexample,
    })
}

/// Full value grid as CSV rows `t,state,price,value`.
pub fn invariance_grid_csv(s: &Scenario, set: &Settings) -> CliResult<String> {
    let (p, f, strikes) = grid_inputs(s, set)?;
    let grid = build_value_grid(&p, &f, &strikes)?;
    let mut buf = Vec::new();
    grid.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii output"))
}

/// Market used by `converge` when no scenario is given.
pub fn default_converge_market() -> (f64, f64, BsmParams) {
    let market = BsmParams::new(0.1, 0.2, 0.04, 1.0, 1.0 / 365.0).expect("default market is valid");
    (100.0, 100.0, market)
}

/// Returns the report and any warnings.
pub fn converge(s: Option<&Scenario>, set: &Settings) -> CliResult<(ConvergeReport, Vec<String>)> {
    let (s0, strike, market) = match s {
        None => default_converge_market(),
        Some(s) => {
            let Market::Bsm { s0, params } = &s.market else {
                return Err(CliError::input(
                    "converge needs a bsm market (`mu`, `sigma`, `horizon`, `dt`)",
                ));
            };
            let strike = match &s.payoff {
                None => *s0,
                Some(Payoff::Call { strike }) => *strike,
                Some(other) => {
                    return Err(CliError::input(format!(
                        "converge prices calls; `payoff.kind` is {}",
                        other.kind()
                    )))
                }
            };
            (*s0, strike, *params)
        }
    };
    let counts = set
        .step_counts
        .clone()
        .or_else(|| s.and_then(|s| s.options.step_counts.clone()))
        .unwrap_or_else(|| DEFAULT_STEP_COUNTS.to_vec());
    if counts.is_empty() {
        return Err(CliError::input("`steps` must list at least one step count"));
    }
    let rows = convergence_study(s0, strike, &market, &counts)?;

    let mut warnings = Vec::new();
    let mut distinct = counts.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let (slope_exact, slope_approx) = if distinct.len() < 2 {
        warnings.push("warning: fitting a slope needs at least two distinct step counts; slope omitted".to_string());
        (None, None)
    } else {
        let dts: Vec<f64> = distinct.iter().map(|&n| market.horizon / n as f64).collect();
        (
            variance_slope(&market, &dts, risk_neutral_variance_exact)?,
            variance_slope(&market, &dts, risk_neutral_variance_approx)?,
        )
    };
    let report = ConvergeReport {
        s0,
        strike,
        rows,
        slope_exact,
        slope_approx,
        mu_plus_r: market.mu + market.r,
        sensitivity: sensitivity_report(&market)?,
    };
    Ok((report.rounded(), warnings))
}

pub fn walk(s: &Scenario, set: &Settings) -> CliResult<WalkReport> {
    let p = s.lattice_params()?;
    let start = match (chosen_strikes(s, set), &s.payoff) {
        (Some(k), _) if k.len() == 1 => k[0],
        (Some(k), _) => {
            return Err(CliError::input(format!("`strikes` must hold one start strike for walk, got {}", k.len())))
        }
        (None, Some(Payoff::DigitalAt { strike })) => *strike,
        (None, _) => {
            return Err(CliError::input("walk needs a start strike: --strikes K or a digital_at payoff"))
        }
    };
    let mc_paths = set.mc_paths.or(s.options.mc_paths).unwrap_or(DEFAULT_MC_PATHS);
    let seed = set.seed.or(s.options.seed).unwrap_or(0);
    let config = BackwardWalkConfig::new(p, start, mc_paths, seed)?;
    let report = probability_report(&config, p.s0)?;
    let digital = if set.verify {
        match DigitalSpec::from_strike(p, start) {
            Ok(spec) => Some(price_digital(p, &spec)?.value),
            Err(_) => Some(0.0),
        }
    } else {
        None
    };
    Ok(WalkReport::new(report, digital))
}
