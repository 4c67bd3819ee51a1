// The five reference settings against six policies, written to a directory.
//
//     cargo run --release --example reference_grid -- out-grid 200

use std::fs;
use std::path::Path;

use survival_bandit::experiment::{preset, run_experiments, RunOptions, PRESET_REFERENCE_GRID};
use survival_bandit::metrics::parse_table_csv;

pub fn run(out: &Path, trials: Option<u64>) -> anyhow::Result<()> {
    let config = preset(PRESET_REFERENCE_GRID)?;
    let opts = RunOptions {
        out: Some(out.to_path_buf()),
        trials,
        ..RunOptions::default()
    };
    let dir = run_experiments(&config, &opts)?;
    let rows = parse_table_csv(&fs::read_to_string(dir.join("tables.csv"))?)?;
    println!(
        "{:<4} {:<26} {:>6} {:>8} {:>10} {:>8}",
        "set", "policy", "ruin", "time", "sreg", "p_ex"
    );
    for r in rows {
        let p_ex = r.p_ex_analytic.map_or("NA".to_string(), |p| format!("{p:.4}"));
        println!(
            "{:<4} {:<26} {:>6.3} {:>8.0} {:>10.1} {:>8}",
            r.setting, r.policy, r.ruin_fraction, r.mean_ruin_time, r.survival_regret, p_ex
        );
    }
    println!("files in {}", dir.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "out-grid".to_string());
    let trials = args.next().map(|s| s.parse()).transpose()?;
    run(Path::new(&out), trials)
}
