//! Report records and their three renderings.
//!
//! Every float is rounded to ten significant digits before it is stored, so
//! the human, CSV and JSON forms all carry the same numbers.

use std::fmt::Write as _;

use binohedge::asymptotics::SensitivityReport;
use binohedge::format::{fmt_sig, round_sig};
use binohedge::{ConvergenceRow, HedgeStep, ProbabilityReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Human,
    Json,
    Csv,
}

pub trait Render: Serialize {
    fn human(&self) -> String;
    fn csv(&self) -> String;

    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Human => self.human(),
            OutputFormat::Csv => self.csv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
                s.push('\n');
                s
            }
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Cross-check of an engine price against an independent route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub oracle: String,
    /// Exact value as a reduced fraction, when the oracle is rational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub oracle_value: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceReport {
    pub payoff: String,
    pub steps: usize,
    pub method: String,
    pub numeraire: f64,
    pub nominal: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<Verification>,
}

impl PriceReport {
    pub fn new(payoff: &str, steps: usize, method: &str, numeraire: f64, nominal: f64) -> Self {
        Self {
            payoff: payoff.into(),
            steps,
            method: method.into(),
            numeraire: round_sig(numeraire),
            nominal: round_sig(nominal),
            verify: None,
        }
    }
}

impl Render for PriceReport {
    fn human(&self) -> String {
        let mut rows = vec![
            vec!["payoff".into(), self.payoff.clone()],
            vec!["steps".into(), self.steps.to_string()],
            vec!["method".into(), self.method.clone()],
            vec!["numeraire".into(), fmt_sig(self.numeraire)],
            vec!["nominal".into(), fmt_sig(self.nominal)],
        ];
        if let Some(v) = &self.verify {
            let oracle = match &v.exact {
                Some(exact) => format!("{} {exact}", v.oracle),
                None => v.oracle.clone(),
            };
            rows.push(vec!["oracle".into(), oracle]);
            rows.push(vec!["oracle_value".into(), fmt_sig(v.oracle_value)]);
            rows.push(vec!["delta".into(), fmt_sig(v.delta)]);
        }
        table(&rows)
    }

    fn csv(&self) -> String {
        let mut header = "payoff,steps,method,numeraire,nominal".to_string();
        let mut row = format!(
            "{},{},{},{},{}",
            self.payoff,
            self.steps,
            self.method,
            fmt_sig(self.numeraire),
            fmt_sig(self.nominal)
        );
        if let Some(v) = &self.verify {
            header.push_str(",oracle,exact,oracle_value,delta");
            let _ = write!(
                row,
                ",{},{},{},{}",
                v.oracle,
                v.exact.as_deref().unwrap_or(""),
                fmt_sig(v.oracle_value),
                fmt_sig(v.delta)
            );
        }
        format!("{header}\n{row}\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeReport {
    pub trajectory: String,
    /// Time-0 price of the trajectory security, in numeraire units.
    pub price: f64,
    pub rows: Vec<HedgeStep>,
}

impl HedgeReport {
    pub fn new(trajectory: String, price: f64, rows: Vec<HedgeStep>) -> Self {
        let rows = rows
            .into_iter()
            .map(|r| HedgeStep { shares: round_sig(r.shares), wealth: round_sig(r.wealth), ..r })
            .collect();
        Self { trajectory, price: round_sig(price), rows }
    }

    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.time.to_string(),
                    r.instrument.map(|i| i.to_string()).unwrap_or_default(),
                    fmt_sig(r.shares),
                    fmt_sig(r.wealth),
                ]
            })
            .collect()
    }
}

impl Render for HedgeReport {
    fn human(&self) -> String {
        let mut rows = vec![vec!["time".into(), "instrument".into(), "shares".into(), "wealth".into()]];
        rows.extend(self.cells().into_iter().map(|mut r| {
            if r[1].is_empty() {
                r[1] = "-".into();
            }
            r
        }));
        format!("trajectory {}\n{}price {}\n", self.trajectory, table(&rows), fmt_sig(self.price))
    }

    fn csv(&self) -> String {
        let mut out = String::from("time,instrument,shares,wealth\n");
        for r in self.cells() {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitalRow {
    pub strike: f64,
    pub index: usize,
    pub price: f64,
    /// Sum of trajectory security prices; absent above the enumeration cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_ad: Option<f64>,
    pub walk: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitalReport {
    pub steps: usize,
    pub rows: Vec<DigitalRow>,
}

impl DigitalReport {
    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    fmt_sig(r.strike),
                    r.index.to_string(),
                    fmt_sig(r.price),
                    opt(r.from_ad),
                    fmt_sig(r.walk),
                    r.exact.clone().unwrap_or_default(),
                ]
            })
            .collect()
    }
}

impl Render for DigitalReport {
    fn human(&self) -> String {
        let mut rows = vec![vec![
            "strike".into(),
            "ups".into(),
            "price".into(),
            "from_ad".into(),
            "walk".into(),
            "exact".into(),
        ]];
        rows.extend(self.cells());
        table(&rows)
    }

    fn csv(&self) -> String {
        let mut out = String::from("strike,index,price,from_ad,walk,exact\n");
        for r in self.cells() {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceRow {
    pub t: usize,
    pub sum: f64,
}

/// The standard tree's bond value against its summed terminal payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub bond_value: f64,
    pub terminal_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub payoff: String,
    pub strikes: Vec<f64>,
    pub total_payoff: f64,
    pub rows: Vec<InvarianceRow>,
    pub max_deviation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl Render for InvarianceReport {
    fn human(&self) -> String {
        let strikes: Vec<String> = self.strikes.iter().map(|&k| fmt_sig(k)).collect();
        let mut out = format!(
            "payoff {}\nstrikes [{}]\ntotal_payoff {}\n",
            self.payoff,
            strikes.join(", "),
            fmt_sig(self.total_payoff)
        );
        let mut rows = vec![vec!["t".into(), "sum".into()]];
        rows.extend(self.rows.iter().map(|r| vec![r.t.to_string(), fmt_sig(r.sum)]));
        out.push_str(&table(&rows));
        let _ = writeln!(out, "max_deviation {}", fmt_sig(self.max_deviation));
        if let Some(c) = &self.counterexample {
            let _ = writeln!(
                out,
                "standard tree: bond value {}, terminal mass {}",
                fmt_sig(c.bond_value),
                fmt_sig(c.terminal_mass)
            );
        }
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("t,sum\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{}", r.t, fmt_sig(r.sum));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeReport {
    pub s0: f64,
    pub strike: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `variance / (T sigma^2) - 1` against `dt` over the step
    /// counts, for the exact and the first-order variance.
    pub slope_exact: Option<f64>,
    pub slope_approx: Option<f64>,
    pub mu_plus_r: f64,
    pub sensitivity: SensitivityReport,
}

impl ConvergeReport {
    pub fn rounded(mut self) -> Self {
        for row in &mut self.rows {
            row.dt = round_sig(row.dt);
            row.crr_price = round_sig(row.crr_price);
            row.bsm_price = round_sig(row.bsm_price);
            row.abs_error = round_sig(row.abs_error);
        }
        self.slope_exact = self.slope_exact.map(round_sig);
        self.slope_approx = self.slope_approx.map(round_sig);
        self.mu_plus_r = round_sig(self.mu_plus_r);
        let s = &mut self.sensitivity;
        s.dt = round_sig(s.dt);
        s.dq_dmu = round_sig(s.dq_dmu);
        s.dq_dmu_central = round_sig(s.dq_dmu_central);
        s.relative_error = round_sig(s.relative_error);
        self
    }
}

impl Render for ConvergeReport {
    fn human(&self) -> String {
        let mut rows = vec![vec![
            "n".into(),
            "dt".into(),
            "crr_price".into(),
            "bsm_price".into(),
            "abs_error".into(),
        ]];
        rows.extend(self.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt_sig(r.dt),
                fmt_sig(r.crr_price),
                fmt_sig(r.bsm_price),
                fmt_sig(r.abs_error),
            ]
        }));
        let mut out = table(&rows);
        let fit = |x: Option<f64>| x.map(fmt_sig).unwrap_or_else(|| "omitted".into());
        let s = &self.sensitivity;
        let _ = writeln!(out, "mu_plus_r {}", fmt_sig(self.mu_plus_r));
        let _ = writeln!(out, "slope_approx {}", fit(self.slope_approx));
        let _ = writeln!(out, "slope_exact {}", fit(self.slope_exact));
        let _ = writeln!(
            out,
            "dq_dmu {} central {} relative_error {} (dt {}, sigma {})",
            fmt_sig(s.dq_dmu),
            fmt_sig(s.dq_dmu_central),
            fmt_sig(s.relative_error),
            fmt_sig(s.dt),
            fmt_sig(s.sigma)
        );
        out
    }

    fn csv(&self) -> String {
        let mut buf = Vec::new();
        binohedge::asymptotics::write_convergence_csv(&self.rows, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkReport {
    #[serde(flatten)]
    pub probability: ProbabilityReport,
    /// Closed-form digital price, present with `--verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digital: Option<f64>,
}

impl WalkReport {
    pub fn new(p: ProbabilityReport, digital: Option<f64>) -> Self {
        let probability = ProbabilityReport {
            exact: round_sig(p.exact),
            estimate: round_sig(p.estimate),
            std_error: round_sig(p.std_error),
            ..p
        };
        Self { probability, digital: digital.map(round_sig) }
    }
}

impl Render for WalkReport {
    fn human(&self) -> String {
        let p = &self.probability;
        let mut rows = vec![
            vec!["exact".into(), fmt_sig(p.exact)],
            vec!["estimate".into(), fmt_sig(p.estimate)],
            vec!["std_error".into(), fmt_sig(p.std_error)],
            vec!["mc_paths".into(), p.mc_paths.to_string()],
            vec!["seed".into(), p.seed.to_string()],
        ];
        if let Some(d) = self.digital {
            rows.push(vec!["digital".into(), fmt_sig(d)]);
        }
        table(&rows)
    }

    fn csv(&self) -> String {
        let p = &self.probability;
        let mut header = "exact,estimate,std_error,mc_paths,seed".to_string();
        let mut row = format!(
            "{},{},{},{},{}",
            fmt_sig(p.exact),
            fmt_sig(p.estimate),
            fmt_sig(p.std_error),
            p.mc_paths,
            p.seed
        );
        if let Some(d) = self.digital {
            header.push_str(",digital");
            let _ = write!(row, ",{}", fmt_sig(d));
        }
        format!("{header}\n{row}\n")
    }
}
