//! Experiment records and the CSV files written for tables and curves.
//!
//! `tables.csv` columns, in order:
//!
//! ```text
//! setting,budget,policy,trials,seed,ruin_fraction,mean_ruin_time,mean_reward,survival_regret,p_ex_analytic
//! ```
//!
//! `mean_ruin_time` averages `min(τ, T)`, so episodes that were never ruined
//! contribute `T`. `p_ex_analytic` is `NA` when the exact EXPLOIT ruin
//! probability is not available for the setting. Curve files have the header
//! `t,<policy1>,<policy2>,...` and one row per checkpoint. Numbers use `%g`
//! formatting with 6 significant digits unless overridden; lines end in `\n`.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::format::fmt_sig;
use crate::instance::BanditInstance;
use crate::ruin::{p_ex, sreg_coefficient};
use crate::simulator::{BatchSummary, EpisodeResult};

pub const DEFAULT_PRECISION: usize = 6;

pub const TABLE_HEADER: &str =
    "setting,budget,policy,trials,seed,ruin_fraction,mean_ruin_time,mean_reward,survival_regret,p_ex_analytic";

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no episode results to summarize")]
    Empty,
    #[error("records mix horizons {0} and {1}")]
    MixedHorizon(u64, u64),
    #[error("curve series `{0}` has {1} values for {2} checkpoints")]
    CurveShape(String, usize, usize),
    #[error("malformed CSV at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub setting: String,
    pub budget: f64,
    pub horizon: u64,
    pub arm_labels: Vec<String>,
    pub policy: String,
    pub trials: u64,
    pub seed: u64,
    pub ruin_fraction: f64,
    pub mean_ruin_time: f64,
    pub mean_reward: f64,
    pub reward_std_err: f64,
    pub survival_regret: f64,
    pub sreg_baseline_coeff: f64,
    pub p_ex_analytic: Option<f64>,
}

pub fn summarize(
    results: &[EpisodeResult],
    instance: &BanditInstance,
    setting: &str,
    policy: &str,
    seed: u64,
) -> Result<ExperimentRecord, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::Empty);
    }
    let batch = BatchSummary::from_results(results, instance, policy);
    Ok(ExperimentRecord {
        setting: setting.to_string(),
        budget: instance.budget(),
        horizon: instance.horizon(),
        arm_labels: instance.arms().iter().map(ToString::to_string).collect(),
        policy: policy.to_string(),
        trials: batch.trials,
        seed,
        ruin_fraction: batch.ruin_fraction,
        mean_ruin_time: batch.mean_ruin_time,
        mean_reward: batch.mean_reward,
        reward_std_err: batch.reward_std_err,
        survival_regret: batch.survival_regret,
        sreg_baseline_coeff: sreg_coefficient(instance),
        p_ex_analytic: p_ex(instance).ok(),
    })
}

/// Renders `tables.csv`; rows sorted by `(setting, policy)`.
pub fn table_csv(records: &[ExperimentRecord], precision: usize) -> Result<String, MetricsError> {
    if let Some(first) = records.first() {
        if let Some(other) = records.iter().find(|r| r.horizon != first.horizon) {
            return Err(MetricsError::MixedHorizon(first.horizon, other.horizon));
        }
    }
    let mut sorted: Vec<&ExperimentRecord> = records.iter().collect();
    sorted.sort_by(|a, b| (&a.setting, &a.policy).cmp(&(&b.setting, &b.policy)));

    let g = |x: f64| fmt_sig(x, precision);
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in sorted {
        let p_ex = r.p_ex_analytic.map_or_else(|| "NA".to_string(), g);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.setting,
            g(r.budget),
            r.policy,
            r.trials,
            r.seed,
            g(r.ruin_fraction),
            g(r.mean_ruin_time),
            g(r.mean_reward),
            g(r.survival_regret),
            p_ex
        ));
    }
    Ok(out)
}

pub fn write_table_csv(records: &[ExperimentRecord], path: &Path, precision: usize) -> Result<(), MetricsError> {
    fs::write(path, table_csv(records, precision)?)?;
    Ok(())
}

/// Survival-regret curves of several policies on shared checkpoints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegretCurves {
    pub checkpoints: Vec<u64>,
    pub series: Vec<(String, Vec<f64>)>,
}

pub fn curve_csv(curves: &RegretCurves, precision: usize) -> Result<String, MetricsError> {
    let n = curves.checkpoints.len();
    for (name, values) in &curves.series {
        if values.len() != n {
            return Err(MetricsError::CurveShape(name.clone(), values.len(), n));
        }
    }
    let mut out = String::from("t");
    for (name, _) in &curves.series {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, t) in curves.checkpoints.iter().enumerate() {
        out.push_str(&t.to_string());
        for (_, values) in &curves.series {
            out.push(',');
            out.push_str(&fmt_sig(values[i], precision));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_curve_csv(curves: &RegretCurves, path: &Path, precision: usize) -> Result<(), MetricsError> {
    fs::write(path, curve_csv(curves, precision)?)?;
    Ok(())
}

/// One parsed row of `tables.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub setting: String,
    pub budget: f64,
    pub policy: String,
    pub trials: u64,
    pub seed: u64,
    pub ruin_fraction: f64,
    pub mean_ruin_time: f64,
    pub mean_reward: f64,
    pub survival_regret: f64,
    pub p_ex_analytic: Option<f64>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> MetricsError {
    MetricsError::Parse { line, msg: msg.into() }
}

pub fn parse_table_csv(text: &str) -> Result<Vec<TableRow>, MetricsError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TABLE_HEADER => {}
        _ => return Err(parse_err(1, "missing or wrong header")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let n = i + 2;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(parse_err(n, format!("expected 10 fields, got {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(n, format!("`{s}`: {e}")));
            let int = |s: &str| s.parse::<u64>().map_err(|e| parse_err(n, format!("`{s}`: {e}")));
            Ok(TableRow {
                setting: f[0].to_string(),
                budget: num(f[1])?,
                policy: f[2].to_string(),
                trials: int(f[3])?,
                seed: int(f[4])?,
                ruin_fraction: num(f[5])?,
                mean_ruin_time: num(f[6])?,
                mean_reward: num(f[7])?,
                survival_regret: num(f[8])?,
                p_ex_analytic: if f[9] == "NA" { None } else { Some(num(f[9])?) },
            })
        })
        .collect()
}

pub fn parse_curve_csv(text: &str) -> Result<RegretCurves, MetricsError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut cols = header.split(',');
    if cols.next() != Some("t") {
        return Err(parse_err(1, "first column must be `t`"));
    }
    let mut curves = RegretCurves {
        checkpoints: Vec::new(),
        series: cols.map(|c| (c.to_string(), Vec::new())).collect(),
    };
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let mut f = line.split(',');
        let t = f
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(n, "bad checkpoint"))?;
        curves.checkpoints.push(t);
        for (_, values) in curves.series.iter_mut() {
            let v = f
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(n, "missing value"))?;
            values.push(v);
        }
        if f.next().is_some() {
            return Err(parse_err(n, "too many fields"));
        }
    }
    Ok(curves)
}
