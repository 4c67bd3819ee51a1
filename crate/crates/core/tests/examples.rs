macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($name),
                ".rs"
            ));
        }
    };
}

example!(arm_theory);
example!(gamblers_ruin);
example!(compare_policies);
example!(regret_curve);
example!(reference_grid);
example!(custom_config);
example!(inspect_episode);

#[test]
fn arm_theory_runs() {
    arm_theory::run().unwrap();
}

#[test]
fn gamblers_ruin_runs() {
    gamblers_ruin::run(500).unwrap();
}

#[test]
fn compare_policies_runs() {
    compare_policies::run(10, 500).unwrap();
}

#[test]
fn regret_curve_has_one_row_per_checkpoint() {
    let csv = regret_curve::run(10, 1000).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,ucb,mts,exploit-ucb,exploit-ucb-double:1");
    assert_eq!(lines.count(), 20);
}

#[test]
fn reference_grid_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    reference_grid::run(dir.path(), Some(2)).unwrap();
    assert!(dir.path().join("curves_s5.csv").exists());
}

#[test]
fn custom_config_runs() {
    let table = custom_config::run().unwrap();
    assert_eq!(table.lines().count(), 9);
}

#[test]
fn inspect_episode_runs() {
    inspect_episode::run(1).unwrap();
}
