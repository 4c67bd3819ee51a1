// Ruin theory for single arms and for a three-arm instance.
//
//     cargo run --example arm_theory

use survival_bandit::arms::{reference_arm, ArmSpec};
use survival_bandit::ruin::{gamma, kl_ratio, ruin_prob_constant, tilted_minimizer, RuinReport};
use survival_bandit::BanditInstance;

pub fn run() -> anyhow::Result<()> {
    let arms = [
        reference_arm(1),
        reference_arm(2),
        reference_arm(3),
        ArmSpec::new(&[0.0, 0.5], &[0.5, 0.5])?,
        ArmSpec::new(&[-1.0, 0.25, 1.0], &[0.3, 0.3, 0.4])?,
    ];

    println!(
        "{:<28} {:<20} {:>10} {:>10} {:>12}",
        "arm", "class", "mean", "gamma", "ruin(B=9)"
    );
    for arm in &arms {
        let g = gamma(arm);
        let ruin = match ruin_prob_constant(arm, 9.0) {
            Ok(p) => format!("{p:.6}"),
            Err(_) => format!("~{:.6}", g.decay(9.0)),
        };
        println!(
            "{:<28} {:<20} {:>10.4} {:>10.6} {:>12}",
            arm.to_string(),
            format!("{:?}", arm.classify()),
            arm.mean(),
            g.value(),
            ruin
        );
    }

    // The tilted arm attains the infimum of the KL ratio.
    let f1 = reference_arm(1);
    let tilted = tilted_minimizer(&f1).expect("F1 is risky with positive drift");
    println!("\ntilted minimizer of {f1}: {tilted}");
    println!("  kl ratio at minimizer  {:.9}", kl_ratio(&tilted, &f1)?);
    println!(
        "  kl ratio at Mult(0.6, 0.1, 0.3) {:.9}",
        kl_ratio(&ArmSpec::multinomial(0.6, 0.1, 0.3)?, &f1)?
    );

    let instance = BanditInstance::new(vec![reference_arm(1), reference_arm(2), reference_arm(3)], 9.0, 20_000)?;
    let report = RuinReport::compute(&instance)?;
    println!("\nB=9, arms F1 F2 F3");
    for (key, value) in report.key_values("") {
        println!("  {key} = {value}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
