// Builds a config from TOML text and runs it in memory.
//
//     cargo run --release --example custom_config

use survival_bandit::experiment::{execute, ExperimentConfig, RunOptions};
use survival_bandit::metrics::table_csv;

const CONFIG: &str = r#"
trials = 300
seed = 9
checkpoints = 10
policies = ["ucb", "exploit-greedy", "exploit-ucb", "exploit-ucb-double:2"]

[[settings]]
id = "lopsided"
budget = 4
horizon = 3000
arms = [
  { support = [-1, 0, 1], probs = [0.3, 0.2, 0.5] },
  { support = [-1, 1], probs = [0.45, 0.55] },
]

[[settings]]
id = "safe-arm"
budget = 4
horizon = 3000
arms = [
  { support = [0, 1], probs = [0.9, 0.1] },
  { support = [-1, 0, 1], probs = [0.4, 0.12, 0.48] },
]
"#;

pub fn run() -> anyhow::Result<String> {
    let config = ExperimentConfig::from_toml(CONFIG)?;
    let output = execute(&config, &RunOptions::default())?;
    for (id, report) in &output.reports {
        println!(
            "{id}: gammas {:?}",
            report.gammas.iter().map(|g| g.value()).collect::<Vec<_>>()
        );
    }
    Ok(table_csv(&output.records, 4)?)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    print!("{}", run()?);
    Ok(())
}
