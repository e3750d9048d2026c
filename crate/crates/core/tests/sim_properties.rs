use groupband::algo::Policy;
use groupband::sim::{compare, compare_paired, run_experiment, write_report_files, ExperimentConfig};
use groupband::{build_instance, GroupStructure, RewardModel};
use proptest::prelude::*;

proptest! {
    #[test]
    fn pairing_ignores_seed_order(xs in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 2..40), rot in 0usize..40) {
        let (a, b): (Vec<f64>, Vec<f64>) = xs.iter().copied().unzip();
        let c = compare_paired(&a, &b).unwrap();
        let k = rot % a.len();
        let (mut a2, mut b2) = (a.clone(), b.clone());
        a2.rotate_left(k);
        b2.rotate_left(k);
        let c2 = compare_paired(&a2, &b2).unwrap();
        prop_assert!((c.delta - c2.delta).abs() <= 1e-9 * c.delta.abs().max(1.0));
        if c.delta != 0.0 && c.z_score.is_finite() {
            prop_assert_eq!(c.delta.signum(), c.z_score.signum());
        }
    }
}

fn config() -> ExperimentConfig {
    let st = GroupStructure::from_lists(4, &[vec![0, 1], vec![1, 2, 3]]).unwrap();
    let inst = build_instance(
        st,
        [0.7, 0.5, 0.6, 0.1].iter().map(|&m| RewardModel::unit_gaussian(m)).collect(),
    )
    .unwrap();
    let mut cfg = ExperimentConfig::inline(&inst, Policy::ALL.to_vec(), 800, 6);
    cfg.const_scale = 0.01;
    cfg.base_seed = 42;
    cfg
}

#[test]
fn report_is_audited_and_reproducible() {
    let cfg = config();
    let a = run_experiment(&cfg).unwrap();
    assert_eq!(a, run_experiment(&cfg).unwrap());
    for p in &a.policies {
        assert!(p.max_audit_error <= 1e-9);
        assert_eq!(p.per_seed.len(), 6);
        assert!(p.stderr.unwrap() >= 0.0);
        assert_eq!(*p.curve_mean.last().unwrap(), p.mean_regret);
    }
    assert_eq!(compare(&a, Policy::ColUcb, Policy::ColUcb).unwrap().delta, 0.0);
    let mut shuffled = cfg.clone();
    shuffled.policies.reverse();
    let b = run_experiment(&shuffled).unwrap();
    for p in &a.policies {
        assert_eq!(b.policy(p.policy).unwrap().per_seed, p.per_seed);
    }
}

#[test]
fn coupled_runs_share_rewards_between_policies() {
    let mut cfg = config();
    cfg.coupled = true;
    let coupled = run_experiment(&cfg).unwrap();
    cfg.coupled = false;
    let independent = run_experiment(&cfg).unwrap();
    assert_ne!(coupled, independent);
}

#[test]
fn files_are_written_and_csv_is_byte_stable() {
    let cfg = config();
    let rep = run_experiment(&cfg).unwrap();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let f1 = write_report_files(&rep, d1.path(), true, true).unwrap();
    let f2 = write_report_files(&rep, d2.path(), true, true).unwrap();
    for (a, b) in [(&f1.curves_csv, &f2.curves_csv), (&f1.per_seed_csv, &f2.per_seed_csv), (&f1.groups_csv, &f2.groups_csv)] {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
    assert_eq!(std::fs::read(f1.svg.unwrap()).unwrap(), std::fs::read(f2.svg.unwrap()).unwrap());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f1.report_json).unwrap()).unwrap();
    assert_eq!(json["num_seeds"], 6);
}

#[test]
fn config_files_resolve_relative_instances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config();
    let inline = cfg.instance.clone().unwrap();
    std::fs::write(dir.path().join("inst.toml"), inline.to_text()).unwrap();
    let mut file_cfg = cfg.clone();
    file_cfg.instance = None;
    file_cfg.instance_file = Some("inst.toml".into());
    std::fs::write(dir.path().join("exp.toml"), file_cfg.to_text()).unwrap();
    let loaded = ExperimentConfig::load(dir.path().join("exp.toml")).unwrap();
    assert_eq!(loaded.instance_file.as_deref(), Some(dir.path().join("inst.toml").as_path()));
    assert_eq!(run_experiment(&loaded).unwrap(), run_experiment(&cfg).unwrap());
    let mut missing = file_cfg;
    missing.instance_file = Some(dir.path().join("nope.toml"));
    let err = run_experiment(&missing).unwrap_err().to_string();
    assert!(err.contains("nope.toml"), "{err}");
}
