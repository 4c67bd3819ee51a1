// Monte-Carlo ruin frequency of a constant policy against the closed form.
//
//     cargo run --release --example gamblers_ruin -- 20000

use survival_bandit::arms::reference_arm;
use survival_bandit::experiment::resolve_threads;
use survival_bandit::ruin::ruin_prob_constant;
use survival_bandit::simulator::run_batch;
use survival_bandit::{BanditInstance, PolicyConfig, PolicyKind};

pub fn run(trials: u64) -> anyhow::Result<()> {
    let arm = reference_arm(1);
    println!("arm {arm}, {trials} episodes per budget, horizon 2000");
    println!("{:>3} {:>10} {:>10} {:>8}", "B", "closed", "simulated", "z");
    for budget in 1..=6 {
        let b = budget as f64;
        let instance = BanditInstance::new(vec![arm.clone()], b, 2000)?;
        let expected = ruin_prob_constant(&arm, b)?;
        let s = run_batch(
            &instance,
            PolicyConfig::new(PolicyKind::Constant(0)),
            trials,
            budget,
            resolve_threads(None, None),
        )?;
        let se = (expected * (1.0 - expected) / trials as f64).sqrt();
        println!(
            "{budget:>3} {expected:>10.6} {:>10.6} {:>8.2}",
            s.ruin_fraction,
            (s.ruin_fraction - expected) / se
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(20_000);
    run(trials)
}
