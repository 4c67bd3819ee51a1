//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.
//!
//! Run alone with `cargo test --release --test acceptance`.

use std::fs;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use survival_bandit::arms::{reference_arm, ArmClass, ArmSpec};
use survival_bandit::experiment::{
    execute, preset, run_experiments, RunOptions, PRESET_REFERENCE_GRID, REFERENCE_SETTINGS,
};
use survival_bandit::metrics::ExperimentRecord;
use survival_bandit::ruin::{exploit_weights, gamma, kl_ratio, log_mgf, p_ex, ruin_prob_constant, tilted_minimizer};
use survival_bandit::simulator::{run_batch, run_episode_inspected};
use survival_bandit::{BanditInstance, PolicyConfig, PolicyKind, RandomStream};

const HORIZON: u64 = 20_000;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within_time(elapsed: Duration, limit_secs: f64) -> bool {
    elapsed.as_secs_f64() < limit_secs
}

fn policy(name: &str) -> PolicyConfig {
    name.parse().expect("policy name")
}

fn setting(id: &str) -> BanditInstance {
    let (_, budget, arms) = REFERENCE_SETTINGS
        .iter()
        .copied()
        .find(|(sid, _, _)| *sid == id)
        .expect("setting id");
    BanditInstance::new(arms.iter().map(|&i| reference_arm(i)).collect(), budget, HORIZON).unwrap()
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn gamma_grid() -> Outcome {
    let start = Instant::now();
    let mut worst_gamma = 0.0_f64;
    let mut worst_mgf = 0.0_f64;
    let mut count = 0;
    'grid: for i in 1..=20 {
        for j in 1..=20 {
            let (pm, pp) = (0.024 * i as f64, 0.048 * j as f64);
            if pp <= pm || pm + pp > 1.0 {
                continue;
            }
            let arm = ArmSpec::multinomial(pm, 1.0 - pm - pp, pp).unwrap();
            if arm.classify() != ArmClass::RiskyPositiveDrift {
                continue;
            }
            let g = gamma(&arm).value();
            worst_gamma = worst_gamma.max((g - (pp / pm).ln()).abs());
            worst_mgf = worst_mgf.max(log_mgf(&arm, -g).abs());
            count += 1;
            if count == 50 {
                break 'grid;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        count == 50 && worst_gamma < 1e-10 && worst_mgf < 1e-10 && within_time(elapsed, 1.0),
        format!(
            "{count} arms, max |γ − log(p1/p−1)| = {worst_gamma:.2e}, max |Λ(−γ)| = {worst_mgf:.2e}, {elapsed:.2?}"
        ),
    )
}

fn ruin_identity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for idx in [1, 2, 6] {
        let arm = reference_arm(idx);
        let g = gamma(&arm);
        for b in 1..=12 {
            let b = b as f64;
            worst = worst.max(((-b * g.value()).exp() - ruin_prob_constant(&arm, b).unwrap()).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-12 && within_time(elapsed, 1.0),
        format!("max |exp(−Bγ) − ruin| = {worst:.2e} over F1, F2, F6 and B = 1..12, {elapsed:.2?}"),
    )
}

fn variational_bound() -> Outcome {
    let start = Instant::now();
    let f1 = reference_arm(1);
    let g = gamma(&f1).value();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_ratio = f64::INFINITY;
    let mut drawn = 0;
    while drawn < 1000 {
        let w: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        let total: f64 = w.iter().sum();
        let q = ArmSpec::multinomial(w[0] / total, w[1] / total, w[2] / total).unwrap();
        if q.mean() >= 0.0 {
            continue;
        }
        min_ratio = min_ratio.min(kl_ratio(&q, &f1).unwrap());
        drawn += 1;
    }
    let tilted = tilted_minimizer(&f1).expect("risky arm");
    let tilted_gap = (kl_ratio(&tilted, &f1).unwrap() - g).abs();
    let elapsed = start.elapsed();
    outcome(
        min_ratio >= g - 1e-9 && tilted_gap < 1e-9 && within_time(elapsed, 1.0),
        format!("min ratio {min_ratio:.6} ≥ γ = {g:.6}, tilted gap {tilted_gap:.2e}, {elapsed:.2?}"),
    )
}

fn weight_telescoping() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut defined = Vec::new();
    for &(id, _, _) in &REFERENCE_SETTINGS {
        if let Ok(w) = exploit_weights(&setting(id)) {
            worst = worst.max((w.weights.iter().sum::<f64>() - 1.0).abs());
            defined.push(id);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        !defined.is_empty() && worst < 1e-12 && within_time(elapsed, 1.0),
        format!(
            "defined on {}, max |Σw − 1| = {worst:.2e}, {elapsed:.2?}",
            defined.join(" ")
        ),
    )
}

/// Ruin by step 2000; the probability of first ruin after that is below 2e-6.
fn constant_monte_carlo() -> Outcome {
    let arm = reference_arm(1);
    let inst = BanditInstance::new(vec![arm.clone()], 3.0, 2000).unwrap();
    let expected = ruin_prob_constant(&arm, 3.0).unwrap();
    let trials = 100_000;
    let start = Instant::now();
    let s = run_batch(&inst, PolicyConfig::new(PolicyKind::Constant(0)), trials, 5, threads()).unwrap();
    let elapsed = start.elapsed();
    let se = (expected * (1.0 - expected) / trials as f64).sqrt();
    let z = (s.ruin_fraction - expected) / se;
    outcome(
        z.abs() <= 3.0 && within_time(elapsed, 10.0),
        format!(
            "ruin {:.5} vs {expected:.6} ({z:+.2} SE), {elapsed:.2?}",
            s.ruin_fraction
        ),
    )
}

fn exploit_monte_carlo(horizon: u64, trials: u64, max_se: f64, time_limit: Option<f64>) -> Outcome {
    let inst = setting("s1").with_horizon(horizon).unwrap();
    let target = p_ex(&inst).unwrap();
    let se = (target * (1.0 - target) / trials as f64).sqrt();
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["exploit-greedy", "exploit-ucb"] {
        let s = run_batch(&inst, policy(name), trials, 11, threads()).unwrap();
        let z = (s.ruin_fraction - target) / se;
        pass &= z.abs() <= max_se;
        parts.push(format!("{name} {:.4} ({z:+.2} SE)", s.ruin_fraction));
    }
    let elapsed = start.elapsed();
    if let Some(limit) = time_limit {
        pass &= within_time(elapsed, limit);
    }
    outcome(
        pass,
        format!(
            "T={horizon}, {trials} trials, p_ex {target:.6}: {}, {elapsed:.2?}",
            parts.join(", ")
        ),
    )
}

/// Runs with the preset's own seed.
fn grid_records(ids: &[&str], policies: &[&str], trials: u64) -> Vec<ExperimentRecord> {
    let mut config = preset(PRESET_REFERENCE_GRID).unwrap();
    config.settings.retain(|s| ids.contains(&s.id.as_str()));
    config.policies = policies.iter().map(|p| policy(p)).collect();
    let opts = RunOptions {
        trials: Some(trials),
        threads: Some(threads()),
        ..RunOptions::default()
    };
    execute(&config, &opts).unwrap().records
}

fn record<'a>(records: &'a [ExperimentRecord], policy: &str) -> &'a ExperimentRecord {
    records.iter().find(|r| r.policy == policy).expect("policy row")
}

fn ruin_proportions_b9() -> Outcome {
    let eud = "exploit-ucb-double:10";
    let records = grid_records(&["s1"], &["ucb", "mts", "exploit-ucb", "exploit-ucb-double:logT"], 200);
    let targets = [("ucb", 0.15), ("mts", 0.31), ("exploit-ucb", 0.09), (eud, 0.08)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, target) in targets {
        let r = record(&records, name).ruin_fraction;
        pass &= (r - target).abs() <= 0.07;
        parts.push(format!("{name} {r:.3} (ref {target})"));
    }
    let ruin = |name| record(&records, name).ruin_fraction;
    let ordered = ruin("mts") > ruin("ucb") && ruin("ucb") > ruin("exploit-ucb") && ruin("ucb") > ruin(eud);
    outcome(
        pass && ordered,
        format!(
            "{}; ordering mts > ucb > exploit family {}",
            parts.join(", "),
            if ordered { "holds" } else { "broken" }
        ),
    )
}

fn ruin_times_b30() -> Outcome {
    let names = [
        "ucb",
        "exploit-ucb",
        "exploit-ucb-double:logT",
        "exploit-ucb-double:1",
        "exploit-ucb-double:100",
    ];
    let records = grid_records(&["s4"], &names, 200);
    let bad: Vec<String> = records
        .iter()
        .filter(|r| r.mean_ruin_time != HORIZON as f64 || r.ruin_fraction != 0.0)
        .map(|r| format!("{} (time {}, ruin {})", r.policy, r.mean_ruin_time, r.ruin_fraction))
        .collect();
    outcome(
        records.len() == names.len() && bad.is_empty(),
        if bad.is_empty() {
            format!("{} policies: mean ruin time 20000, ruin 0", records.len())
        } else {
            format!("off: {}", bad.join(", "))
        },
    )
}

fn regret_ordering() -> Outcome {
    let inst = setting("s1");
    let names = ["exploit-ucb-double:logT", "exploit-ucb", "ucb", "mts"];
    let mut holds = 0;
    let mut parts = Vec::new();
    for seed in 1..=3 {
        let regrets: Vec<f64> = names
            .iter()
            .map(|n| {
                run_batch(&inst, policy(n), 200, seed, threads())
                    .unwrap()
                    .survival_regret
            })
            .collect();
        let ok = regrets[1..].iter().all(|&r| regrets[0] < r);
        holds += usize::from(ok);
        parts.push(format!(
            "seed {seed}: eud {:.0}, exploit-ucb {:.0}, ucb {:.0}, mts {:.0}",
            regrets[0], regrets[1], regrets[2], regrets[3]
        ));
    }
    outcome(
        holds >= 2,
        format!("ordering holds on {holds}/3 seeds; {}", parts.join("; ")),
    )
}

fn thread_determinism() -> Outcome {
    let mut config = preset(PRESET_REFERENCE_GRID).unwrap();
    config.trials = 20;
    config.settings.iter_mut().for_each(|s| s.trials = None);
    let dir = tempfile::tempdir().unwrap();
    let tables: Vec<Vec<u8>> = [1, 4, 8]
        .iter()
        .map(|&n| {
            let out = dir.path().join(format!("t{n}"));
            let opts = RunOptions {
                out: Some(out.clone()),
                seed: Some(42),
                threads: Some(n),
                ..RunOptions::default()
            };
            run_experiments(&config, &opts).unwrap();
            fs::read(out.join("tables.csv")).unwrap()
        })
        .collect();
    let same = tables.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "tables.csv for 1/4/8 threads {}",
            if same { "identical" } else { "differ" }
        ),
    )
}

fn exploit_compliance() -> Outcome {
    let inst = setting("s1");
    let mut violations = 0;
    let mut pulls = 0u64;
    for i in 0..100 {
        let mut rng = RandomStream::substream(17, i);
        run_episode_inspected(&inst, policy("exploit-ucb"), &mut rng, |p, step| {
            let threshold = p.exploit_threshold();
            let sums = &p.state().reward_sums;
            if sums.iter().any(|&r| r >= threshold) && sums[step.arm] < threshold {
                violations += 1;
            }
            pulls += 1;
        })
        .unwrap();
    }
    outcome(
        violations == 0,
        format!("{violations} violations in {pulls} pulls over 100 episodes"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("1 gamma root grid", gamma_grid),
        ("2 constant-arm ruin identity", ruin_identity),
        ("3 variational bound", variational_bound),
        ("4 exploit weight telescoping", weight_telescoping),
        ("5 constant policy ruin, Monte-Carlo", constant_monte_carlo),
        ("6 exploit ruin, Monte-Carlo (T=5000 smoke)", || {
            exploit_monte_carlo(5000, 10_000, 4.0, Some(30.0))
        }),
        ("6 exploit ruin, Monte-Carlo (T=20000)", || {
            exploit_monte_carlo(HORIZON, 10_000, 3.0, None)
        }),
        ("7 ruin proportions, B=9", ruin_proportions_b9),
        ("8 ruin times, B=30", ruin_times_b30),
        ("9 survival regret ordering", regret_ordering),
        ("10 thread-count determinism", thread_determinism),
        ("11 exploit-ucb compliance", exploit_compliance),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        failed += usize::from(!o.pass);
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
