//! Arm-selection policies.
//!
//! All policies share one [`Policy`] driver holding a [`PolicyState`]; the
//! [`PolicyKind`] picks the selection rule. Arms are indexed from 0 in the
//! API and from 1 in policy names (`constant:1` is the first arm). Every
//! argmax breaks ties towards the smallest arm index.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Gamma};
use thiserror::Error;

use crate::instance::BanditInstance;
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("bad policy option `{0}` (expected bonus=paper6 or bonus=half)")]
    BadOption(String),
    #[error("bad parameter in `{0}`")]
    BadParameter(String),
    #[error("constant policy arm {arm} out of range for {num_arms} arms")]
    ArmIndex { arm: usize, num_arms: usize },
    #[error("multinomial Thompson sampling needs arms supported on {{-1, 0, 1}}")]
    Unsupported,
}

/// Exploration bonus of the UCB-type policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BonusStyle {
    /// `sqrt(6 log(t-1) / N)`, with `log(t-1)` clamped at `log 1`.
    Sqrt6,
    /// `sqrt(log t / (2N))`.
    #[default]
    HalfLog,
}

impl BonusStyle {
    #[inline]
    fn bonus(self, t: u64, pulls: u64) -> f64 {
        let n = pulls as f64;
        match self {
            BonusStyle::Sqrt6 => (6.0 * ((t.max(2) - 1) as f64).ln() / n).sqrt(),
            BonusStyle::HalfLog => ((t as f64).ln() / (2.0 * n)).sqrt(),
        }
    }
}

/// Epoch parameter `n` of EXPLOIT-UCB-DOUBLE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoublingParam {
    Fixed(u64),
    /// `⌈log T⌉`, resolved at episode start.
    LogHorizon,
}

impl DoublingParam {
    pub fn resolve(self, horizon: u64) -> u64 {
        match self {
            DoublingParam::Fixed(n) => n,
            DoublingParam::LogHorizon => ((horizon as f64).ln().ceil() as u64).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    /// Always the given (0-based) arm.
    Constant(usize),
    Ucb,
    /// Multinomial Thompson sampling with a Dirichlet(1, 1, 1) prior.
    Mts,
    /// Highest cumulative reward among arms whose budget tranche is alive.
    ExploitGreedy,
    ExploitUcb,
    ExploitUcbDouble(DoublingParam),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub bonus: BonusStyle,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            bonus: BonusStyle::default(),
        }
    }

    pub fn with_bonus(mut self, bonus: BonusStyle) -> Self {
        self.bonus = bonus;
        self
    }

    /// Name with `logT` resolved against `horizon`, e.g. `exploit-ucb-double:10`.
    pub fn label(&self, horizon: u64) -> String {
        let base = match self.kind {
            PolicyKind::ExploitUcbDouble(p) => format!("exploit-ucb-double:{}", p.resolve(horizon)),
            _ => self.kind_name(),
        };
        self.with_bonus_suffix(base)
    }

    fn kind_name(&self) -> String {
        match self.kind {
            PolicyKind::Constant(k) => format!("constant:{}", k + 1),
            PolicyKind::Ucb => "ucb".into(),
            PolicyKind::Mts => "mts".into(),
            PolicyKind::ExploitGreedy => "exploit-greedy".into(),
            PolicyKind::ExploitUcb => "exploit-ucb".into(),
            PolicyKind::ExploitUcbDouble(DoublingParam::LogHorizon) => "exploit-ucb-double:logT".into(),
            PolicyKind::ExploitUcbDouble(DoublingParam::Fixed(n)) => format!("exploit-ucb-double:{n}"),
        }
    }

    fn uses_bonus(&self) -> bool {
        matches!(
            self.kind,
            PolicyKind::Ucb | PolicyKind::ExploitUcb | PolicyKind::ExploitUcbDouble(_)
        )
    }

    fn with_bonus_suffix(&self, base: String) -> String {
        if self.uses_bonus() && self.bonus == BonusStyle::Sqrt6 {
            format!("{base} bonus=paper6")
        } else {
            base
        }
    }
}

impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.with_bonus_suffix(self.kind_name()))
    }
}

impl FromStr for PolicyConfig {
    type Err = PolicyError;

    /// Parses `constant:<k>`, `ucb`, `mts`, `exploit-greedy`, `exploit-ucb`,
    /// `exploit-ucb-double:<n|logT>`, optionally followed by whitespace or `;`
    /// and `bonus=paper6|half`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s
            .split(|c: char| c.is_whitespace() || c == ';')
            .filter(|p| !p.is_empty());
        let name = parts.next().ok_or_else(|| PolicyError::UnknownPolicy(s.to_string()))?;
        let bad_param = || PolicyError::BadParameter(s.to_string());
        let kind = match name.split_once(':') {
            None => match name {
                "ucb" => PolicyKind::Ucb,
                "mts" => PolicyKind::Mts,
                "exploit-greedy" => PolicyKind::ExploitGreedy,
                "exploit-ucb" => PolicyKind::ExploitUcb,
                _ => return Err(PolicyError::UnknownPolicy(name.to_string())),
            },
            Some(("constant", k)) => {
                let k: usize = k.parse().map_err(|_| bad_param())?;
                if k == 0 {
                    return Err(bad_param());
                }
                PolicyKind::Constant(k - 1)
            }
            Some(("exploit-ucb-double", n)) => {
                if n.eq_ignore_ascii_case("logt") {
                    PolicyKind::ExploitUcbDouble(DoublingParam::LogHorizon)
                } else {
                    let n: u64 = n.parse().map_err(|_| bad_param())?;
                    if n == 0 {
                        return Err(bad_param());
                    }
                    PolicyKind::ExploitUcbDouble(DoublingParam::Fixed(n))
                }
            }
            Some(_) => return Err(PolicyError::UnknownPolicy(name.to_string())),
        };
        let mut config = PolicyConfig::new(kind);
        for opt in parts {
            config.bonus = match opt {
                "bonus=paper6" => BonusStyle::Sqrt6,
                "bonus=half" => BonusStyle::HalfLog,
                _ => return Err(PolicyError::BadOption(opt.to_string())),
            };
        }
        Ok(config)
    }
}

/// Mutable decision state of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    /// `N_k(t-1)`.
    pub pull_counts: Vec<u64>,
    /// Whole-episode cumulative reward per arm.
    pub reward_sums: Vec<f64>,
    /// Cumulative reward per arm since the current epoch started (doubling only).
    pub epoch_reward_sums: Vec<f64>,
    pub epoch_index: u64,
    pub epoch_start: u64,
    pub budget_at_epoch_start: f64,
    /// Dirichlet counts over `(-1, 0, 1)` per arm (MTS only).
    pub posterior_counts: Vec<[f64; 3]>,
    /// Arms whose tranche fell below `-B/K + 1` (EXPLOIT-greedy only).
    pub exhausted: Vec<bool>,
    /// Current step, 1-based.
    pub t: u64,
    pub total_reward: f64,
}

/// A policy bound to one episode of one instance.
#[derive(Debug, Clone)]
pub struct Policy {
    config: PolicyConfig,
    state: PolicyState,
    budget: f64,
    epoch_n: u64,
}

impl Policy {
    pub fn init(config: PolicyConfig, instance: &BanditInstance) -> Result<Self, PolicyError> {
        let k = instance.num_arms();
        match config.kind {
            PolicyKind::Constant(arm) if arm >= k => return Err(PolicyError::ArmIndex { arm, num_arms: k }),
            PolicyKind::Mts if !instance.arms().iter().all(|a| a.is_ternary()) => return Err(PolicyError::Unsupported),
            _ => {}
        }
        let epoch_n = match config.kind {
            PolicyKind::ExploitUcbDouble(p) => p.resolve(instance.horizon()),
            _ => 0,
        };
        let state = PolicyState {
            pull_counts: vec![0; k],
            reward_sums: vec![0.0; k],
            epoch_reward_sums: vec![0.0; k],
            epoch_index: 0,
            epoch_start: 0,
            budget_at_epoch_start: instance.budget(),
            posterior_counts: vec![[1.0; 3]; k],
            exhausted: vec![false; k],
            t: 1,
            total_reward: 0.0,
        };
        let mut policy = Self {
            config,
            state,
            budget: instance.budget(),
            epoch_n,
        };
        policy.advance_epoch();
        Ok(policy)
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    /// Resolved epoch parameter `n` (0 for non-doubling policies).
    pub fn epoch_n(&self) -> u64 {
        self.epoch_n
    }

    fn num_arms(&self) -> usize {
        self.state.pull_counts.len()
    }

    /// `-B/K + 1`.
    pub fn exploit_threshold(&self) -> f64 {
        -self.budget / self.num_arms() as f64 + 1.0
    }

    pub fn select_arm(&self, rng: &mut RandomStream) -> usize {
        let k = self.num_arms();
        let s = &self.state;
        match self.config.kind {
            PolicyKind::Constant(arm) => arm,
            PolicyKind::Ucb => self.ucb_argmax(|_| true),
            PolicyKind::Mts => self.thompson(rng),
            PolicyKind::ExploitGreedy => {
                if s.exhausted.iter().all(|&e| e) {
                    argmax((0..k).map(|i| Some(s.reward_sums[i])))
                } else {
                    argmax((0..k).map(|i| (!s.exhausted[i]).then_some(s.reward_sums[i])))
                }
            }
            PolicyKind::ExploitUcb => {
                let threshold = self.exploit_threshold();
                if s.reward_sums.iter().any(|&r| r >= threshold) {
                    self.ucb_argmax(|i| s.reward_sums[i] >= threshold)
                } else {
                    self.mean_argmax()
                }
            }
            PolicyKind::ExploitUcbDouble(_) => {
                let threshold = -s.budget_at_epoch_start / k as f64 + 1.0;
                if s.epoch_reward_sums.iter().any(|&r| r >= threshold) {
                    self.ucb_argmax(|i| s.epoch_reward_sums[i] >= threshold)
                } else {
                    self.mean_argmax()
                }
            }
        }
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        let threshold = self.exploit_threshold();
        let s = &mut self.state;
        s.pull_counts[arm] += 1;
        s.reward_sums[arm] += reward;
        s.epoch_reward_sums[arm] += reward;
        s.total_reward += reward;
        if let Some(slot) = ternary_slot(reward) {
            s.posterior_counts[arm][slot] += 1.0;
        }
        if s.reward_sums[arm] < threshold {
            s.exhausted[arm] = true;
        }
        s.t += 1;
        self.advance_epoch();
    }

    /// Starts a new epoch when the running budget exceeds `(j+1)·n·B²`.
    fn advance_epoch(&mut self) {
        if !matches!(self.config.kind, PolicyKind::ExploitUcbDouble(_)) {
            return;
        }
        let s = &mut self.state;
        let running = self.budget + s.total_reward;
        if running > (s.epoch_index + 1) as f64 * self.epoch_n as f64 * self.budget * self.budget {
            s.epoch_index += 1;
            s.epoch_start = s.t - 1;
            s.budget_at_epoch_start = running;
            s.epoch_reward_sums.iter_mut().for_each(|r| *r = 0.0);
        }
    }

    #[inline]
    fn empirical_mean(&self, arm: usize) -> f64 {
        let n = self.state.pull_counts[arm];
        if n == 0 {
            f64::INFINITY
        } else {
            self.state.reward_sums[arm] / n as f64
        }
    }

    fn ucb_argmax(&self, allowed: impl Fn(usize) -> bool) -> usize {
        let t = self.state.t;
        argmax((0..self.num_arms()).map(|i| {
            allowed(i).then(|| {
                let n = self.state.pull_counts[i];
                if n == 0 {
                    f64::INFINITY
                } else {
                    self.empirical_mean(i) + self.config.bonus.bonus(t, n)
                }
            })
        }))
    }

    fn mean_argmax(&self) -> usize {
        argmax((0..self.num_arms()).map(|i| Some(self.empirical_mean(i))))
    }

    fn thompson(&self, rng: &mut RandomStream) -> usize {
        let values: Vec<f64> = self
            .state
            .posterior_counts
            .iter()
            .map(|alpha| {
                let mut draws = [0.0; 3];
                for (d, &a) in draws.iter_mut().zip(alpha) {
                    *d = Gamma::new(a, 1.0).expect("positive shape").sample(rng);
                }
                let total: f64 = draws.iter().sum();
                (draws[2] - draws[0]) / total
            })
            .collect();
        argmax(values.into_iter().map(Some))
    }
}

#[inline]
fn ternary_slot(reward: f64) -> Option<usize> {
    if reward == -1.0 {
        Some(0)
    } else if reward == 0.0 {
        Some(1)
    } else if reward == 1.0 {
        Some(2)
    } else {
        None
    }
}

/// Index of the largest `Some` value, smallest index on ties.
///
/// # Panics
/// If every entry is `None`.
pub fn argmax(values: impl Iterator<Item = Option<f64>>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if let Some(v) = v {
            match best {
                Some((_, b)) if v <= b => {}
                _ => best = Some((i, v)),
            }
        }
    }
    best.expect("argmax over an empty candidate set").0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arms::{reference_arm, ArmSpec};

    fn setting(budget: f64, horizon: u64) -> BanditInstance {
        BanditInstance::new(
            vec![reference_arm(1), reference_arm(2), reference_arm(3)],
            budget,
            horizon,
        )
        .unwrap()
    }

    fn kind(s: &str) -> PolicyConfig {
        s.parse().unwrap()
    }

    #[test]
    fn parse_names() {
        assert_eq!(kind("ucb"), PolicyConfig::new(PolicyKind::Ucb));
        assert_eq!(kind("constant:2").kind, PolicyKind::Constant(1));
        assert_eq!(
            kind("exploit-ucb-double:logT").kind,
            PolicyKind::ExploitUcbDouble(DoublingParam::LogHorizon)
        );
        assert_eq!(
            kind("exploit-ucb-double:100 bonus=paper6"),
            PolicyConfig::new(PolicyKind::ExploitUcbDouble(DoublingParam::Fixed(100))).with_bonus(BonusStyle::Sqrt6)
        );
        assert_eq!(kind("ucb;bonus=half").bonus, BonusStyle::HalfLog);
        assert!(matches!(
            "greedy".parse::<PolicyConfig>(),
            Err(PolicyError::UnknownPolicy(_))
        ));
        assert!(matches!(
            "constant:0".parse::<PolicyConfig>(),
            Err(PolicyError::BadParameter(_))
        ));
        assert!(matches!(
            "ucb bonus=7".parse::<PolicyConfig>(),
            Err(PolicyError::BadOption(_))
        ));
        for name in [
            "constant:3",
            "ucb",
            "mts",
            "exploit-greedy",
            "exploit-ucb",
            "exploit-ucb-double:logT",
            "ucb bonus=paper6",
        ] {
            assert_eq!(kind(name).to_string(), name);
        }
    }

    #[test]
    fn labels_resolve_log_horizon() {
        assert_eq!(kind("exploit-ucb-double:logT").label(20_000), "exploit-ucb-double:10");
        assert_eq!(kind("ucb").label(20_000), "ucb");
    }

    #[test]
    fn init_examples() {
        let inst = setting(9.0, 20_000);
        let ucb = Policy::init(kind("ucb"), &inst).unwrap();
        assert_eq!(ucb.state().pull_counts, vec![0, 0, 0]);
        assert_eq!(ucb.state().t, 1);
        let mts = Policy::init(kind("mts"), &inst).unwrap();
        assert!(mts.state().posterior_counts.iter().all(|c| *c == [1.0, 1.0, 1.0]));
        let dbl = Policy::init(kind("exploit-ucb-double:logT"), &inst).unwrap();
        assert_eq!(dbl.epoch_n(), 10);
        assert_eq!(dbl.state().epoch_index, 0);
        assert_eq!(dbl.state().epoch_start, 0);
        assert_eq!(dbl.state().budget_at_epoch_start, 9.0);
    }

    #[test]
    fn init_errors() {
        let general = ArmSpec::new(&[-0.5, 1.0], &[0.5, 0.5]).unwrap();
        let inst = BanditInstance::new(vec![general], 3.0, 10).unwrap();
        assert_eq!(Policy::init(kind("mts"), &inst).unwrap_err(), PolicyError::Unsupported);
        assert_eq!(
            Policy::init(kind("constant:2"), &inst).unwrap_err(),
            PolicyError::ArmIndex { arm: 1, num_arms: 1 }
        );
    }

    #[test]
    fn ucb_first_pull_is_arm_one() {
        let p = Policy::init(kind("ucb"), &setting(9.0, 100)).unwrap();
        assert_eq!(p.select_arm(&mut RandomStream::new(0)), 0);
    }

    fn with_sums(config: &str, sums: [f64; 3], counts: [u64; 3]) -> Policy {
        let mut p = Policy::init(kind(config), &setting(9.0, 20_000)).unwrap();
        p.state.reward_sums = sums.to_vec();
        p.state.pull_counts = counts.to_vec();
        p.state.t = counts.iter().sum::<u64>() + 1;
        p
    }

    #[test]
    fn exploit_ucb_threshold_is_inclusive() {
        // t = 16: bonus sqrt(ln 16 / 10) ≈ 0.5266 for every arm.
        // Indices: arm1 -0.4 + b, arm2 excluded (-3 < -2), arm3 0 + b.
        let p = with_sums("exploit-ucb", [-2.0, -3.0, 0.0], [5, 5, 5]);
        assert_eq!(p.exploit_threshold(), -2.0);
        assert_eq!(p.select_arm(&mut RandomStream::new(0)), 2);
        // Arm 2 has the best index overall but sits outside A_t.
        let p = with_sums("exploit-ucb", [-2.0, -2.5, -2.5], [100, 50, 60]);
        assert_eq!(p.select_arm(&mut RandomStream::new(0)), 0);
        let p = with_sums("ucb", [-2.0, -2.5, -2.5], [100, 50, 60]);
        assert_eq!(p.select_arm(&mut RandomStream::new(0)), 1);
    }

    #[test]
    fn exploit_ucb_empty_set_uses_plain_means() {
        let p = with_sums("exploit-ucb", [-3.0, -3.0, -3.0], [5, 6, 6]);
        // means -0.6, -0.5, -0.5: tie resolved to the smallest index
        assert_eq!(p.select_arm(&mut RandomStream::new(0)), 1);
        let mut q = with_sums("exploit-ucb", [-3.0, -3.0, -3.0], [5, 6, 6]);
        q.state.reward_sums = vec![-3.0, -3.0, -3.3];
        q.state.pull_counts = vec![5, 6, 6];
        assert_eq!(q.select_arm(&mut RandomStream::new(0)), 1);
    }

    #[test]
    fn doubling_epoch_trigger() {
        let inst = BanditInstance::new(vec![ArmSpec::point_mass(1.0).unwrap()], 3.0, 100).unwrap();
        let mut p = Policy::init(kind("exploit-ucb-double:2"), &inst).unwrap();
        // Budget 3 + 15 = 18 is not > 18.
        for _ in 0..15 {
            p.update(0, 1.0);
        }
        assert_eq!(p.state().epoch_index, 0);
        assert_eq!(p.state().epoch_reward_sums, vec![15.0]);
        p.update(0, 1.0);
        assert_eq!(p.state().epoch_index, 1);
        assert_eq!(p.state().epoch_start, 16);
        assert_eq!(p.state().budget_at_epoch_start, 19.0);
        assert_eq!(p.state().epoch_reward_sums, vec![0.0]);
        assert_eq!(p.state().reward_sums, vec![16.0]);
    }

    #[test]
    fn doubling_uses_realized_budget_threshold() {
        let mut p = with_sums("exploit-ucb-double:1", [0.0; 3], [0; 3]);
        p.state.budget_at_epoch_start = 90.0;
        p.state.epoch_reward_sums = vec![-28.0, -29.5, 5.0];
        p.state.pull_counts = vec![40, 40, 1];
        p.state.reward_sums = vec![10.0, 20.0, 5.0];
        p.state.t = 82;
        // threshold -90/3 + 1 = -29: arm 2 excluded; arm 3 has highest index.
        assert_eq!(p.select_arm(&mut RandomStream::new(0)), 2);
        p.state.pull_counts = vec![40, 40, 400];
        p.state.reward_sums = vec![10.0, 20.0, -5.0];
        assert_eq!(p.select_arm(&mut RandomStream::new(0)), 0);
    }

    #[test]
    fn mts_posterior_counts() {
        let mut p = Policy::init(kind("mts"), &setting(9.0, 100)).unwrap();
        p.update(1, 1.0);
        assert_eq!(p.state().posterior_counts[1], [1.0, 1.0, 2.0]);
        p.update(1, -1.0);
        assert_eq!(p.state().posterior_counts[1], [2.0, 1.0, 2.0]);
    }

    #[test]
    fn mts_prefers_strong_posterior() {
        let mut p = Policy::init(kind("mts"), &setting(9.0, 100)).unwrap();
        p.state.posterior_counts = vec![[500.0, 1.0, 1.0], [1.0, 1.0, 500.0], [250.0, 1.0, 250.0]];
        let mut rng = RandomStream::new(5);
        for _ in 0..50 {
            assert_eq!(p.select_arm(&mut rng), 1);
        }
    }

    #[test]
    fn ucb_update_example() {
        let mut p = Policy::init(kind("ucb"), &setting(9.0, 100)).unwrap();
        p.update(0, -1.0);
        assert_eq!(p.state().pull_counts, vec![1, 0, 0]);
        assert_eq!(p.state().reward_sums, vec![-1.0, 0.0, 0.0]);
        assert_eq!(p.state().t, 2);
    }

    #[test]
    fn exploit_greedy_retires_tranches() {
        let mut p = Policy::init(kind("exploit-greedy"), &setting(9.0, 100)).unwrap();
        let mut rng = RandomStream::new(0);
        assert_eq!(p.select_arm(&mut rng), 0);
        for _ in 0..3 {
            p.update(0, -1.0);
        }
        assert!(p.state().exhausted[0]);
        // Arms 2 and 3 tie at 0.
        assert_eq!(p.select_arm(&mut rng), 1);
        p.update(1, 1.0);
        p.update(1, -1.0);
        p.update(1, -1.0);
        assert_eq!(p.select_arm(&mut rng), 2);
    }

    #[test]
    fn bonus_styles() {
        assert!((BonusStyle::HalfLog.bonus(16, 5) - (16f64.ln() / 10.0).sqrt()).abs() < 1e-15);
        assert!((BonusStyle::Sqrt6.bonus(16, 5) - (6.0 * 15f64.ln() / 5.0).sqrt()).abs() < 1e-15);
        assert_eq!(BonusStyle::Sqrt6.bonus(1, 1), 0.0);
    }

    #[test]
    fn argmax_ties() {
        assert_eq!(argmax([Some(1.0), Some(2.0), Some(2.0)].into_iter()), 1);
        assert_eq!(argmax([None, Some(f64::INFINITY), Some(f64::INFINITY)].into_iter()), 1);
        assert_eq!(argmax([Some(-1.0), None].into_iter()), 0);
    }
}
