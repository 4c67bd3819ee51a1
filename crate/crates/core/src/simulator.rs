//! Episode engine and the deterministic Monte-Carlo batch runner.
//!
//! An episode pulls arms for `t = 1..=T` and stops at the first step where
//! `B + Σ X_s ≤ 0`; the ruining pull's reward is counted and nothing is pulled
//! afterwards. Trial `i` of a batch draws rewards from
//! `RandomStream::substream(master_seed, i)` and runs the policy on a stream
//! forked from it, so a batch gives identical results for any thread count.

use rayon::prelude::*;

use crate::instance::BanditInstance;
use crate::policies::{Policy, PolicyConfig, PolicyError};
use crate::rng::RandomStream;
use crate::ruin::{sreg_baseline, sreg_baseline_at};

/// One pull of a traced episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub t: u64,
    pub arm: usize,
    pub reward: f64,
    /// Budget after the pull.
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Step at which the budget first dropped to `≤ 0`; `None` if it never did.
    pub ruin_time: Option<u64>,
    pub final_reward: f64,
    pub pull_counts: Vec<u64>,
    pub trajectory: Option<Vec<TraceStep>>,
}

impl EpisodeResult {
    pub fn is_ruined(&self) -> bool {
        self.ruin_time.is_some()
    }

    /// `min(τ, T)`.
    pub fn capped_ruin_time(&self, horizon: u64) -> u64 {
        self.ruin_time.map_or(horizon, |t| t.min(horizon))
    }

    pub fn total_pulls(&self) -> u64 {
        self.pull_counts.iter().sum()
    }
}

fn drive(
    instance: &BanditInstance,
    config: PolicyConfig,
    rng: &mut RandomStream,
    mut on_step: impl FnMut(&Policy, TraceStep),
) -> Result<EpisodeResult, PolicyError> {
    let mut policy = Policy::init(config, instance)?;
    let mut policy_rng = rng.fork();
    let arms = instance.arms();
    let initial = instance.budget();
    let mut total = 0.0;
    let mut pull_counts = vec![0u64; arms.len()];
    let mut ruin_time = None;

    for t in 1..=instance.horizon() {
        let arm = policy.select_arm(&mut policy_rng);
        let reward = arms[arm].sample(rng);
        on_step(
            &policy,
            TraceStep {
                t,
                arm,
                reward,
                budget: initial + total + reward,
            },
        );
        policy.update(arm, reward);
        pull_counts[arm] += 1;
        total += reward;
        if initial + total <= 0.0 {
            ruin_time = Some(t);
            break;
        }
    }

    Ok(EpisodeResult {
        ruin_time,
        final_reward: total,
        pull_counts,
        trajectory: None,
    })
}

/// Runs one episode. With `trace` set, every pull is recorded.
pub fn run_episode(
    instance: &BanditInstance,
    config: PolicyConfig,
    rng: &mut RandomStream,
    trace: bool,
) -> Result<EpisodeResult, PolicyError> {
    if trace {
        let mut steps = Vec::new();
        let mut result = drive(instance, config, rng, |_, step| steps.push(step))?;
        result.trajectory = Some(steps);
        Ok(result)
    } else {
        drive(instance, config, rng, |_, _| {})
    }
}

/// Runs one episode and calls `inspect` with the policy state just before
/// each pull is applied.
pub fn run_episode_inspected(
    instance: &BanditInstance,
    config: PolicyConfig,
    rng: &mut RandomStream,
    inspect: impl FnMut(&Policy, TraceStep),
) -> Result<EpisodeResult, PolicyError> {
    drive(instance, config, rng, inspect)
}

/// Runs one episode and also returns the cumulative reward at each
/// checkpoint, frozen at its ruin-time value after ruin.
///
/// `checkpoints` must be sorted ascending.
pub fn run_episode_with_checkpoints(
    instance: &BanditInstance,
    config: PolicyConfig,
    rng: &mut RandomStream,
    checkpoints: &[u64],
) -> Result<(EpisodeResult, Vec<f64>), PolicyError> {
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    while next < checkpoints.len() && checkpoints[next] == 0 {
        values.push(0.0);
        next += 1;
    }
    let initial = instance.budget();
    let result = drive(instance, config, rng, |_, step| {
        while next < checkpoints.len() && checkpoints[next] == step.t {
            values.push(step.budget - initial);
            next += 1;
        }
    })?;
    values.resize(checkpoints.len(), result.final_reward);
    Ok((result, values))
}

/// Rebuilds an [`EpisodeResult`] from a recorded trajectory.
pub fn replay(instance: &BanditInstance, trajectory: &[TraceStep]) -> EpisodeResult {
    let mut pull_counts = vec![0u64; instance.num_arms()];
    let mut total = 0.0;
    let mut ruin_time = None;
    for step in trajectory {
        pull_counts[step.arm] += 1;
        total += step.reward;
        if instance.budget() + total <= 0.0 {
            ruin_time = Some(step.t);
            break;
        }
    }
    EpisodeResult {
        ruin_time,
        final_reward: total,
        pull_counts,
        trajectory: Some(trajectory.to_vec()),
    }
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
}

/// Runs `trials` episodes; trial `i` uses substream `i` of `master_seed`.
/// Results come back in trial order.
pub fn run_trials(
    instance: &BanditInstance,
    config: PolicyConfig,
    trials: u64,
    master_seed: u64,
    threads: usize,
) -> Result<Vec<EpisodeResult>, PolicyError> {
    Policy::init(config, instance)?;
    pool(threads).install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| run_episode(instance, config, &mut RandomStream::substream(master_seed, i), false))
            .collect()
    })
}

/// [`run_trials`] with per-trial checkpoint rewards.
pub fn run_trials_with_checkpoints(
    instance: &BanditInstance,
    config: PolicyConfig,
    trials: u64,
    master_seed: u64,
    threads: usize,
    checkpoints: &[u64],
) -> Result<Vec<(EpisodeResult, Vec<f64>)>, PolicyError> {
    Policy::init(config, instance)?;
    pool(threads).install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                run_episode_with_checkpoints(
                    instance,
                    config,
                    &mut RandomStream::substream(master_seed, i),
                    checkpoints,
                )
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub label: String,
    pub trials: u64,
    pub ruin_fraction: f64,
    /// Mean of `min(τ, T)`; survivors count as `T`.
    pub mean_ruin_time: f64,
    pub mean_reward: f64,
    pub reward_std_err: f64,
    pub survival_regret: f64,
}

impl BatchSummary {
    /// Aggregates in slice order. Panics on an empty slice.
    pub fn from_results(results: &[EpisodeResult], instance: &BanditInstance, label: &str) -> Self {
        assert!(!results.is_empty(), "no episodes to summarize");
        let n = results.len() as f64;
        let horizon = instance.horizon();
        let ruined = results.iter().filter(|r| r.is_ruined()).count() as f64;
        let time_sum: f64 = results.iter().map(|r| r.capped_ruin_time(horizon) as f64).sum();
        let reward_sum: f64 = results.iter().map(|r| r.final_reward).sum();
        let mean_reward = reward_sum / n;
        let reward_std_err = if results.len() > 1 {
            let ss: f64 = results.iter().map(|r| (r.final_reward - mean_reward).powi(2)).sum();
            (ss / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Self {
            label: label.to_string(),
            trials: results.len() as u64,
            ruin_fraction: ruined / n,
            mean_ruin_time: time_sum / n,
            mean_reward,
            reward_std_err,
            survival_regret: sreg_baseline(instance) - mean_reward,
        }
    }
}

/// Runs a batch and aggregates it.
pub fn run_batch(
    instance: &BanditInstance,
    config: PolicyConfig,
    trials: u64,
    master_seed: u64,
    threads: usize,
) -> Result<BatchSummary, PolicyError> {
    let results = run_trials(instance, config, trials.max(1), master_seed, threads)?;
    Ok(BatchSummary::from_results(
        &results,
        instance,
        &config.label(instance.horizon()),
    ))
}

/// Mean survival regret at each checkpoint `t`: the horizon-`t` baseline minus
/// the mean reward accumulated by step `t`.
pub fn regret_curve(
    instance: &BanditInstance,
    config: PolicyConfig,
    trials: u64,
    master_seed: u64,
    threads: usize,
    checkpoints: &[u64],
) -> Result<Vec<f64>, PolicyError> {
    let runs = run_trials_with_checkpoints(instance, config, trials.max(1), master_seed, threads, checkpoints)?;
    Ok(curve_from_runs(instance, &runs, checkpoints))
}

/// Averages per-trial checkpoint rewards into a survival-regret curve.
pub fn curve_from_runs(instance: &BanditInstance, runs: &[(EpisodeResult, Vec<f64>)], checkpoints: &[u64]) -> Vec<f64> {
    let n = runs.len() as f64;
    checkpoints
        .iter()
        .enumerate()
        .map(|(c, &t)| {
            let mean: f64 = runs.iter().map(|(_, v)| v[c]).sum::<f64>() / n;
            sreg_baseline_at(instance, t) - mean
        })
        .collect()
}
