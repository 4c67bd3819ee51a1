//! Experiment configs and the runner behind the `survival-bandit` binary.
//!
//! A config is a TOML file:
//!
//! ```toml
//! trials = 200                      # default 200
//! seed = 1                          # default 0
//! threads = 4                       # default: available cores
//! checkpoints = 100                 # count of evenly spaced steps, or a list
//! out = "run1"                      # default "out"
//! policies = ["ucb", "mts", "exploit-ucb", "exploit-ucb-double:logT"]
//!
//! [[settings]]
//! id = "s1"
//! budget = 9
//! horizon = 20000
//! trials = 500                      # optional per-setting override
//! arms = [
//!   { support = [-1, 0, 1], probs = [0.4, 0.12, 0.48] },
//!   { support = [-1, 0, 1], probs = [0.04, 0.88, 0.08] },
//! ]
//! ```
//!
//! Every setting must use the same horizon, since `tables.csv` has no horizon
//! column.
//!
//! A run writes `manifest.txt`, `tables.csv` and one `curves_<id>.csv` per
//! setting into the output directory.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::arms::{ArmSpec, REFERENCE_ARMS};
use crate::format::fmt_sig;
use crate::instance::BanditInstance;
use crate::metrics::{self, ExperimentRecord, MetricsError, RegretCurves};
use crate::policies::{PolicyConfig, PolicyError};
use crate::ruin::{RuinReport, TheoryError};
use crate::simulator::{curve_from_runs, run_trials_with_checkpoints};

pub const DEFAULT_TRIALS: u64 = 200;
pub const DEFAULT_CHECKPOINTS: u64 = 100;
pub const THREADS_ENV: &str = "SURVIVAL_BANDIT_THREADS";
pub const PRESET_REFERENCE_GRID: &str = "paper-appendix-h";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("config parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("invalid config field `{field}`: {msg}")]
    Validation { field: String, msg: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

fn invalid(field: impl Into<String>, msg: impl ToString) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        msg: msg.to_string(),
    }
}

/// Which steps a regret curve is sampled at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Checkpoints {
    /// `count` evenly spaced steps ending at the horizon.
    Even(u64),
    Explicit(Vec<u64>),
}

impl Checkpoints {
    pub fn resolve(&self, horizon: u64) -> Vec<u64> {
        match self {
            Checkpoints::Even(count) => {
                let count = (*count).max(1);
                let set: BTreeSet<u64> = (1..=count).map(|i| i * horizon / count).filter(|&t| t > 0).collect();
                set.into_iter().collect()
            }
            Checkpoints::Explicit(list) => list.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettingConfig {
    pub id: String,
    pub instance: BanditInstance,
    /// Overrides the config-wide trial count.
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub settings: Vec<SettingConfig>,
    pub policies: Vec<PolicyConfig>,
    pub trials: u64,
    pub seed: u64,
    /// `None` means the environment or the machine decides.
    pub threads: Option<usize>,
    pub checkpoints: Checkpoints,
    pub out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    trials: Option<u64>,
    seed: Option<u64>,
    threads: Option<usize>,
    checkpoints: Option<RawCheckpoints>,
    out: Option<PathBuf>,
    policies: Vec<String>,
    settings: Vec<RawSetting>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawCheckpoints {
    Count(u64),
    List(Vec<u64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSetting {
    id: String,
    budget: f64,
    horizon: u64,
    trials: Option<u64>,
    arms: Vec<RawArm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArm {
    support: Vec<f64>,
    probs: Vec<f64>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

impl ExperimentConfig {
    /// Parses and validates config text.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            ConfigError::Parse {
                line,
                column,
                msg: e.message().to_string(),
            }
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let trials = raw.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if raw.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        if raw.policies.is_empty() {
            return Err(invalid("policies", "at least one policy is required"));
        }
        let policies = raw
            .policies
            .iter()
            .enumerate()
            .map(|(i, p)| p.parse().map_err(|e: PolicyError| invalid(format!("policies[{i}]"), e)))
            .collect::<Result<Vec<PolicyConfig>, _>>()?;
        if raw.settings.is_empty() {
            return Err(invalid("settings", "at least one setting is required"));
        }
        let mut ids = BTreeSet::new();
        let mut settings = Vec::with_capacity(raw.settings.len());
        for (i, s) in raw.settings.into_iter().enumerate() {
            let field = |name: &str| format!("settings[{i}].{name}");
            if s.id.is_empty() || !s.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(invalid(field("id"), "use letters, digits, `-` or `_`"));
            }
            if !ids.insert(s.id.clone()) {
                return Err(invalid(field("id"), format!("duplicate id `{}`", s.id)));
            }
            if s.trials == Some(0) {
                return Err(invalid(field("trials"), "must be at least 1"));
            }
            let arms = s
                .arms
                .iter()
                .enumerate()
                .map(|(k, a)| ArmSpec::new(&a.support, &a.probs).map_err(|e| invalid(field(&format!("arms[{k}]")), e)))
                .collect::<Result<Vec<_>, _>>()?;
            if !(s.budget.is_finite() && s.budget > 0.0) {
                return Err(invalid(field("budget"), "must be positive"));
            }
            if s.horizon == 0 {
                return Err(invalid(field("horizon"), "must be positive"));
            }
            if let Some(first) = settings.first().map(|f: &SettingConfig| f.instance.horizon()) {
                if s.horizon != first {
                    return Err(invalid(
                        field("horizon"),
                        format!("all settings share one horizon, expected {first}"),
                    ));
                }
            }
            let instance = BanditInstance::new(arms, s.budget, s.horizon).map_err(|e| invalid(field("arms"), e))?;
            settings.push(SettingConfig {
                id: s.id,
                instance,
                trials: s.trials,
            });
        }
        let checkpoints = match raw.checkpoints {
            None => Checkpoints::Even(DEFAULT_CHECKPOINTS),
            Some(RawCheckpoints::Count(0)) => return Err(invalid("checkpoints", "count must be at least 1")),
            Some(RawCheckpoints::Count(n)) => Checkpoints::Even(n),
            Some(RawCheckpoints::List(list)) => {
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("checkpoints", "must be strictly increasing"));
                }
                for s in &settings {
                    if list.last().is_some_and(|&t| t > s.instance.horizon()) {
                        return Err(invalid(
                            "checkpoints",
                            format!("exceeds the horizon of setting `{}`", s.id),
                        ));
                    }
                }
                Checkpoints::Explicit(list)
            }
        };
        Ok(Self {
            settings,
            policies,
            trials,
            seed: raw.seed.unwrap_or(0),
            threads: raw.threads,
            checkpoints,
            out: raw.out,
        })
    }

    /// Trial count for a setting, honouring an external override.
    pub fn trials_for(&self, setting: &SettingConfig, override_trials: Option<u64>) -> u64 {
        override_trials.or(setting.trials).unwrap_or(self.trials)
    }
}

/// Reads a config file, or a bundled preset given as `preset:<name>`.
pub fn parse_config(source: &str) -> Result<ExperimentConfig, ConfigError> {
    if let Some(name) = source.strip_prefix("preset:") {
        return preset(name);
    }
    let text = fs::read_to_string(source).map_err(|e| ConfigError::Io {
        path: PathBuf::from(source),
        source: e,
    })?;
    ExperimentConfig::from_toml(&text)
}

fn reference_setting(id: &str, budget: f64, arms: [usize; 3], trials: Option<u64>) -> SettingConfig {
    let arms = arms
        .iter()
        .map(|&i| {
            let (m, z, p) = REFERENCE_ARMS[i - 1];
            ArmSpec::multinomial(m, z, p).expect("reference arm")
        })
        .collect();
    SettingConfig {
        id: id.to_string(),
        instance: BanditInstance::new(arms, budget, 20_000).expect("reference setting"),
        trials,
    }
}

/// The five reference settings `(id, budget, arm indices into REFERENCE_ARMS)`.
pub const REFERENCE_SETTINGS: [(&str, f64, [usize; 3]); 5] = [
    ("s1", 9.0, [1, 2, 3]),
    ("s2", 9.0, [4, 5, 3]),
    ("s3", 9.0, [6, 7, 8]),
    ("s4", 30.0, [1, 2, 3]),
    ("s5", 30.0, [9, 10, 3]),
];

/// Policies compared in the reference grid, in table column order.
pub const REFERENCE_POLICIES: [&str; 6] = [
    "ucb",
    "mts",
    "exploit-ucb",
    "exploit-ucb-double:logT",
    "exploit-ucb-double:1",
    "exploit-ucb-double:100",
];

pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
    match name {
        PRESET_REFERENCE_GRID => Ok(ExperimentConfig {
            settings: REFERENCE_SETTINGS
                .iter()
                .map(|&(id, budget, arms)| reference_setting(id, budget, arms, (id == "s5").then_some(500)))
                .collect(),
            policies: REFERENCE_POLICIES
                .iter()
                .map(|p| p.parse().expect("preset policy"))
                .collect(),
            trials: DEFAULT_TRIALS,
            seed: 0,
            threads: None,
            checkpoints: Checkpoints::Even(DEFAULT_CHECKPOINTS),
            out: None,
        }),
        other => Err(ConfigError::UnknownPreset(other.to_string())),
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("setting `{setting}`: {source}")]
    Theory { setting: String, source: TheoryError },
    #[error("setting `{setting}`: {source}")]
    Policy { setting: String, source: PolicyError },
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Metrics(MetricsError),
}

impl RunError {
    /// 1 for theory, policy and config errors, 2 for IO failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } | RunError::Metrics(MetricsError::Io(_)) => 2,
            RunError::Config(ConfigError::Io { .. }) => 2,
            _ => 1,
        }
    }
}

/// Overrides applied on top of a parsed config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub threads: Option<usize>,
    pub precision: Option<usize>,
}

/// Thread count: explicit value, then `SURVIVAL_BANDIT_THREADS`, then the
/// config, then the number of available cores.
pub fn resolve_threads(explicit: Option<usize>, config: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .or(config)
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Everything a run produced, before it is written out.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ExperimentRecord>,
    pub curves: Vec<(String, RegretCurves)>,
    pub reports: Vec<(String, RuinReport)>,
    pub manifest: String,
}

/// Runs every setting × policy cell. Settings run one after another; trials
/// inside a cell run on `threads` workers.
pub fn execute(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput, RunError> {
    let seed = opts.seed.unwrap_or(config.seed);
    let threads = resolve_threads(opts.threads, config.threads);
    let precision = opts.precision.unwrap_or(metrics::DEFAULT_PRECISION);

    // Validate the theory for every setting before spending time simulating.
    let reports = config
        .settings
        .iter()
        .map(|s| {
            RuinReport::compute(&s.instance)
                .map(|r| (s.id.clone(), r))
                .map_err(|source| RunError::Theory {
                    setting: s.id.clone(),
                    source,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut records = Vec::new();
    let mut curves = Vec::new();
    for setting in &config.settings {
        let instance = &setting.instance;
        let trials = config.trials_for(setting, opts.trials);
        let checkpoints = config.checkpoints.resolve(instance.horizon());
        let mut curve = RegretCurves {
            checkpoints: checkpoints.clone(),
            series: Vec::new(),
        };
        for &policy in &config.policies {
            let label = policy.label(instance.horizon());
            let runs = run_trials_with_checkpoints(instance, policy, trials, seed, threads, &checkpoints).map_err(
                |source| RunError::Policy {
                    setting: setting.id.clone(),
                    source,
                },
            )?;
            let results: Vec<_> = runs.iter().map(|(r, _)| r.clone()).collect();
            records.push(metrics::summarize(&results, instance, &setting.id, &label, seed).map_err(RunError::Metrics)?);
            curve
                .series
                .push((label, curve_from_runs(instance, &runs, &checkpoints)));
        }
        curves.push((setting.id.clone(), curve));
    }

    let manifest = render_manifest(config, opts, seed, precision, &reports);
    Ok(RunOutput {
        records,
        curves,
        reports,
        manifest,
    })
}

fn render_manifest(
    config: &ExperimentConfig,
    opts: &RunOptions,
    seed: u64,
    precision: usize,
    reports: &[(String, RuinReport)],
) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "tool = {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "seed = {seed}");
    let _ = writeln!(m, "precision = {precision}");
    let _ = writeln!(
        m,
        "mean_ruin_time = mean of min(ruin time, horizon); survivors count as the horizon"
    );
    let _ = writeln!(m);
    let _ = writeln!(m, "[config]");
    let names: Vec<String> = config.policies.iter().map(ToString::to_string).collect();
    let _ = writeln!(m, "policies = {}", names.join(", "));
    let checkpoints = match &config.checkpoints {
        Checkpoints::Even(n) => format!("{n} evenly spaced"),
        Checkpoints::Explicit(list) => list.iter().map(u64::to_string).collect::<Vec<_>>().join(", "),
    };
    let _ = writeln!(m, "checkpoints = {checkpoints}");
    for s in &config.settings {
        let inst = &s.instance;
        let _ = writeln!(m, "setting.{}.budget = {}", s.id, fmt_sig(inst.budget(), 12));
        let _ = writeln!(m, "setting.{}.horizon = {}", s.id, inst.horizon());
        let _ = writeln!(m, "setting.{}.trials = {}", s.id, config.trials_for(s, opts.trials));
        for (k, arm) in inst.arms().iter().enumerate() {
            let _ = writeln!(m, "setting.{}.arm.{} = {}", s.id, k + 1, arm);
        }
    }
    let _ = writeln!(m);
    let _ = writeln!(m, "[ruin_report]");
    for (id, report) in reports {
        for (k, v) in report.key_values(&format!("{id}.")) {
            let _ = writeln!(m, "{k} = {v}");
        }
    }
    m
}

fn write_file(path: PathBuf, contents: &str) -> Result<(), RunError> {
    fs::write(&path, contents).map_err(|source| RunError::Io { path, source })
}

/// Runs the experiments and writes `manifest.txt`, `tables.csv` and
/// `curves_<setting>.csv` into the output directory. Returns the directory.
pub fn run_experiments(config: &ExperimentConfig, opts: &RunOptions) -> Result<PathBuf, RunError> {
    let out = opts
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).map_err(|source| RunError::Io {
        path: out.clone(),
        source,
    })?;
    let output = execute(config, opts)?;
    write_outputs(&out, &output, opts.precision.unwrap_or(metrics::DEFAULT_PRECISION))?;
    Ok(out)
}

pub fn write_outputs(out: &Path, output: &RunOutput, precision: usize) -> Result<(), RunError> {
    let table = metrics::table_csv(&output.records, precision).map_err(RunError::Metrics)?;
    write_file(out.join("tables.csv"), &table)?;
    for (id, curve) in &output.curves {
        let text = metrics::curve_csv(curve, precision).map_err(RunError::Metrics)?;
        write_file(out.join(format!("curves_{id}.csv")), &text)?;
    }
    write_file(out.join("manifest.txt"), &output.manifest)
}
