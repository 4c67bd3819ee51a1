// Steps through one EXPLOIT-UCB-DOUBLE episode and reports epoch changes
// and arms leaving the active set.
//
//     cargo run --example inspect_episode -- 4

use survival_bandit::arms::reference_arm;
use survival_bandit::simulator::run_episode_inspected;
use survival_bandit::{BanditInstance, RandomStream};

pub fn run(seed: u64) -> anyhow::Result<()> {
    let instance = BanditInstance::new(vec![reference_arm(1), reference_arm(2), reference_arm(3)], 6.0, 5000)?;
    let config = "exploit-ucb-double:1".parse()?;
    let mut rng = RandomStream::new(seed);
    let mut epoch = 0;
    let mut active = vec![true; instance.num_arms()];
    let result = run_episode_inspected(&instance, config, &mut rng, |policy, step| {
        let s = policy.state();
        if s.epoch_index != epoch {
            epoch = s.epoch_index;
            println!(
                "t={:>5} epoch {epoch} starts, budget {}",
                step.t, s.budget_at_epoch_start
            );
        }
        let threshold = -s.budget_at_epoch_start / instance.num_arms() as f64 + 1.0;
        for (k, flag) in active.iter_mut().enumerate() {
            let now = s.epoch_reward_sums[k] >= threshold;
            if *flag != now {
                println!(
                    "t={:>5} arm {} {}",
                    step.t,
                    k + 1,
                    if now { "re-enters" } else { "leaves" }
                );
                *flag = now;
            }
        }
    })?;
    match result.ruin_time {
        Some(t) => println!("ruined at t={t}"),
        None => println!("survived, reward {}", result.final_reward),
    }
    println!("pulls per arm {:?}", result.pull_counts);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    run(seed)
}
