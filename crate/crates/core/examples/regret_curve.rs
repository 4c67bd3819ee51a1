// Survival-regret curves over time, written as CSV to stdout.
//
//     cargo run --release --example regret_curve -- 200 > curves.csv

use survival_bandit::arms::reference_arm;
use survival_bandit::experiment::{resolve_threads, Checkpoints};
use survival_bandit::metrics::{curve_csv, RegretCurves};
use survival_bandit::simulator::regret_curve;
use survival_bandit::{BanditInstance, PolicyConfig};

pub fn run(trials: u64, horizon: u64) -> anyhow::Result<String> {
    let instance = BanditInstance::new(vec![reference_arm(1), reference_arm(2), reference_arm(3)], 9.0, horizon)?;
    let checkpoints = Checkpoints::Even(20).resolve(horizon);
    let threads = resolve_threads(None, None);
    let mut curves = RegretCurves {
        checkpoints: checkpoints.clone(),
        series: Vec::new(),
    };
    for name in ["ucb", "mts", "exploit-ucb", "exploit-ucb-double:1"] {
        let config: PolicyConfig = name.parse()?;
        let curve = regret_curve(&instance, config, trials, 1, threads, &checkpoints)?;
        curves.series.push((config.label(horizon), curve));
    }
    Ok(curve_csv(&curves, 6)?)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let horizon = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    print!("{}", run(trials, horizon)?);
    Ok(())
}
