// Ruin and reward of every policy on one instance.
//
//     cargo run --release --example compare_policies -- 200 20000

use survival_bandit::arms::reference_arm;
use survival_bandit::experiment::resolve_threads;
use survival_bandit::ruin::p_ex;
use survival_bandit::simulator::run_batch;
use survival_bandit::{BanditInstance, PolicyConfig};

const POLICIES: [&str; 9] = [
    "constant:1",
    "ucb",
    "ucb bonus=paper6",
    "mts",
    "exploit-greedy",
    "exploit-ucb",
    "exploit-ucb-double:1",
    "exploit-ucb-double:logT",
    "exploit-ucb-double:100",
];

pub fn run(trials: u64, horizon: u64) -> anyhow::Result<()> {
    let instance = BanditInstance::new(vec![reference_arm(1), reference_arm(2), reference_arm(3)], 9.0, horizon)?;
    let threads = resolve_threads(None, None);
    println!(
        "B=9, T={horizon}, {trials} trials; exact EXPLOIT ruin {:.6}",
        p_ex(&instance)?
    );
    println!(
        "{:<34} {:>8} {:>11} {:>11} {:>10}",
        "policy", "ruin", "ruin time", "reward", "sreg"
    );
    for name in POLICIES {
        let config: PolicyConfig = name.parse()?;
        let s = run_batch(&instance, config, trials, 1, threads)?;
        println!(
            "{:<34} {:>8.3} {:>11.1} {:>11.1} {:>10.1}",
            config.label(horizon),
            s.ruin_fraction,
            s.mean_ruin_time,
            s.mean_reward,
            s.survival_regret
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let horizon = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    run(trials, horizon)
}
