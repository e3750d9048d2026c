use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_groupband");

fn groupband(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .env_remove("GROUPBAND_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn structure(num_arms: usize, groups: &[Vec<usize>]) -> String {
    format!("format = \"groupband-instance\"\nversion = 1\nnum_arms = {num_arms}\ngroups = {groups:?}\n")
}

fn instance_text() -> String {
    let mut s = structure(3, &[vec![0, 1], vec![1, 2]]);
    for m in [0.9, 0.6, 0.7] {
        s.push_str(&format!("\n[[arms]]\nkind = \"gaussian\"\nmean = {m}\nvariance = 1.0\n"));
    }
    s
}

fn experiment(dir: &Path) -> PathBuf {
    write(dir, "inst.toml", &instance_text());
    write(
        dir,
        "exp.toml",
        "format = \"groupband-experiment\"\nversion = 1\npolicies = [\"col_ucb\", \"pooled_ucb\"]\n\
         horizon = 600\nnum_seeds = 4\nconst_scale = 0.01\ninstance_file = \"inst.toml\"\n",
    )
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_manifest_report_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    experiment(dir.path());
    let o = groupband(dir.path(), &["--out", "run", "simulate", "exp.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let run = dir.path().join("run");
    for f in ["manifest.json", "report.json", "summary.txt", "curves.csv", "per_seed.csv", "groups.csv", "regret.svg"] {
        assert!(run.join(f).is_file(), "{f} missing");
    }
    let m = json(&run.join("manifest.json"));
    let exp = &m["resolved"]["experiment"];
    assert_eq!(exp["horizon"], 600);
    assert_eq!(exp["num_seeds"], 4);
    assert_eq!(exp["base_seed"], 0);
    assert_eq!(exp["curve_points"], 512);
    assert_eq!(exp["coupled"], false);
    assert_eq!(exp["default_arm"], "empirical_best");
    assert!(m["resolved"]["algorithm"]["burnin_pulls"].as_u64().unwrap() >= 1);
    assert!(stdout(&o).contains("col_ucb"));
}

#[test]
fn overrides_reach_the_manifest_and_single_seed_reports_na() {
    let dir = tempfile::tempdir().unwrap();
    experiment(dir.path());
    let o = groupband(
        dir.path(),
        &["--out", "run", "simulate", "exp.toml", "--seeds", "1", "--horizon", "300", "--policies", "independent_ucb", "--no-svg"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let run = dir.path().join("run");
    let curves = std::fs::read_to_string(run.join("curves.csv")).unwrap();
    assert!(curves.lines().skip(1).all(|l| l.starts_with(|c: char| c.is_ascii_digit()) && l.ends_with(",NA")));
    assert!(!run.join("regret.svg").exists());
    let m = json(&run.join("manifest.json"));
    assert_eq!(m["resolved"]["experiment"]["horizon"], 300);
    assert_eq!(m["resolved"]["experiment"]["policies"], serde_json::json!(["independent_ucb"]));
}

#[test]
fn reproducible_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    experiment(dir.path());
    for out in ["a", "b"] {
        let o = groupband(dir.path(), &["--out", out, "--reproducible", "--jobs", "2", "simulate", "exp.toml"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["curves.csv", "per_seed.csv", "groups.csv", "regret.svg", "report.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
    let svg = std::fs::read_to_string(dir.path().join("a/regret.svg")).unwrap();
    assert!(!svg.contains("generated"));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    experiment(dir.path());
    let o = Command::new(BIN)
        .current_dir(dir.path())
        .env("GROUPBAND_OUT", "from_env")
        .args(["simulate", "exp.toml", "--horizon", "100", "--seeds", "2"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("from_env/manifest.json").is_file());
}

#[test]
fn missing_instance_file_is_a_data_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "exp.toml",
        "format = \"groupband-experiment\"\nversion = 1\npolicies = [\"col_ucb\"]\nhorizon = 100\nnum_seeds = 2\n\
         instance_file = \"nowhere.toml\"\n",
    );
    let o = groupband(dir.path(), &["--out", "run", "simulate", "exp.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere.toml"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    experiment(dir.path());
    assert_eq!(groupband(dir.path(), &["simulate", "exp.toml", "--bogus"]).status.code(), Some(1));
    assert_eq!(groupband(dir.path(), &["frobnicate"]).status.code(), Some(1));
    let o = groupband(dir.path(), &["--out", "run", "simulate", "exp.toml", "--policies", "thompson"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    write(dir.path(), "s.toml", &structure(2, &[vec![0, 1]]));
    let o = groupband(dir.path(), &["--out", "run", "schedule", "s.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(groupband(dir.path(), &["--help"]).status.success());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = experiment(dir.path());
    let text = std::fs::read_to_string(&p).unwrap() + "colour = \"blue\"\n";
    std::fs::write(&p, text).unwrap();
    let o = groupband(dir.path(), &["--out", "run", "simulate", "exp.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

#[test]
fn analyze_k_subset_family() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "k.toml", &structure(8, &k_subsets(8, 4)));
    let o = groupband(dir.path(), &["--out", "run", "analyze", "k.toml", "--horizon", "1024"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r, json(&dir.path().join("run/analysis.json")));
    let sharing = &r["sharing"];
    // Exact values for 70 groups over 8 arms: the full arm set minimises
    // the minus form, a 4-set (one whole group) the plus form.
    assert_eq!(sharing["bar_ht_minus"]["value"].as_f64().unwrap(), 70.0 / 8.0 + 4.0);
    assert_eq!(sharing["bar_ht_minus"]["subset"], serde_json::json!([0, 1, 2, 3, 4, 5, 6, 7]));
    assert_eq!(sharing["bar_ht_plus"]["value"].as_f64().unwrap(), 69.0 / 4.0 + 4.0);
    assert_eq!(sharing["bar_ht_plus"]["subset"].as_array().unwrap().len(), 4);
    let lo = sharing["envelope"]["lower"].as_f64().unwrap();
    let hi = sharing["envelope"]["upper"].as_f64().unwrap();
    assert!(lo <= hi);
    assert_eq!(r["burn_in"]["t0"], "4/35");
    assert!(r.get("instance").is_none());
}

#[test]
fn analyze_instance_sections() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "inst.toml", &instance_text());
    let o = groupband(dir.path(), &["--out", "run", "analyze", "inst.toml", "--horizon", "3000", "--alpha", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let inst = &r["instance"];
    assert_eq!(inst["condition"]["holds"], false);
    assert!(inst["condition"]["violation"].is_object());
    let table = inst["contention_table"].as_array().unwrap();
    assert_eq!(table.last().unwrap()["eps"], 1.0);
    assert_eq!(table.last().unwrap()["contention"], serde_json::json!([0, 1, 2]));
    assert_eq!(inst["functionals"].as_array().unwrap().len(), 16);
    assert!(inst["eps_star"].as_f64().unwrap() > 0.0);
}

#[test]
fn analyze_refuses_large_structures_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let groups: Vec<Vec<usize>> = (0..30).map(|i| vec![i, (i + 1) % 30]).collect();
    write(dir.path(), "big.toml", &structure(30, &groups));
    let o = groupband(dir.path(), &["--out", "run", "analyze", "big.toml", "--horizon", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cap of 24"), "{}", stderr(&o));
}

fn schedule_rows(dir: &Path) -> Vec<(u64, usize, usize)> {
    let text = std::fs::read_to_string(dir.join("run/schedule.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("round,group,arm"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

/// Arms, groups, n0, expected rounds, expected t0.
type ScheduleCase = (usize, Vec<Vec<usize>>, u64, u64, &'static str);

#[test]
fn schedule_examples_recount() {
    let cases: [ScheduleCase; 3] = [
        (8, vec![(0..8).collect(); 4], 2, 4, "2/1"),
        (2, vec![vec![0, 1]], 3, 6, "2/1"),
        (3, vec![vec![0, 1], vec![1, 2]], 5, 8, "3/2"),
    ];
    for (arms, groups, n0, rounds, t0) in cases {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "s.toml", &structure(arms, &groups));
        let o = groupband(dir.path(), &["--out", "run", "schedule", "s.toml", "--n0", &n0.to_string()]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains(&format!("t0 = {t0}")), "{}", stdout(&o));
        assert!(stdout(&o).contains(&format!("t_min = {rounds}")));
        let rows = schedule_rows(dir.path());
        assert_eq!(rows.len() as u64, rounds * groups.len() as u64);
        let mut counts = vec![0u64; arms];
        for (r, g, a) in rows {
            assert!(r >= 1 && r <= rounds);
            assert!(groups[g].contains(&a));
            counts[a] += 1;
        }
        assert!(counts.iter().all(|&c| c >= n0), "{counts:?}");
    }
}

#[test]
fn lowerbound_outputs_feed_simulate() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "inst.toml", &instance_text());
    let o = groupband(
        dir.path(),
        &["--out", "adv", "lowerbound", "adversary", "inst.toml", "--horizon", "500", "--const-scale", "0.01", "--pilot-seeds", "3"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let details = json(&dir.path().join("adv/adversary.json"));
    let a0 = details["plus"]["target_arm"].as_u64().unwrap() as usize;
    let plus = std::fs::read_to_string(dir.path().join("adv/j_plus.toml")).unwrap();
    let minus = std::fs::read_to_string(dir.path().join("adv/j_minus.toml")).unwrap();
    assert_ne!(plus, minus);

    write(dir.path(), "s.toml", &structure(4, &[vec![0, 1], vec![1, 2], vec![2, 3]]));
    let o = groupband(dir.path(), &["--out", "mm", "lowerbound", "minimax", "s.toml", "--subset", "1,2"]);
    assert!(o.status.success(), "{}", stderr(&o));

    for inst in ["adv/j_plus.toml", "adv/j_minus.toml", "mm/minimax.toml"] {
        write(
            dir.path(),
            "exp.toml",
            &format!(
                "format = \"groupband-experiment\"\nversion = 1\npolicies = [\"pooled_ucb\"]\nhorizon = 100\n\
                 num_seeds = 2\ninstance_file = \"{inst}\"\n"
            ),
        );
        let o = groupband(dir.path(), &["--out", "sim", "simulate", "exp.toml"]);
        assert!(o.status.success(), "{inst}: {}", stderr(&o));
    }
    assert!(a0 < 3);
}

#[test]
fn perturb_rejects_bernoulli_overflow() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = structure(2, &[vec![0, 1]]);
    for m in [0.2, 0.95] {
        s.push_str(&format!("\n[[arms]]\nkind = \"bernoulli\"\nmean = {m}\n"));
    }
    write(dir.path(), "b.toml", &s);
    let args = ["--out", "p", "lowerbound", "perturb", "b.toml", "--arm", "0", "--group", "0", "--eps", "0.1", "--sign"];
    let o = groupband(dir.path(), &[&args[..], &["plus"]].concat());
    assert_eq!(o.status.code(), Some(2));
    let o = groupband(dir.path(), &[&args[..], &["minus"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn selftest_passes_and_detects_injected_lp_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = groupband(dir.path(), &["--out", "st", "selftest"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).matches("PASS").count(), 5);
    assert!(dir.path().join("st/manifest.json").is_file());
    let o = groupband(dir.path(), &["--out", "st", "selftest", "--inject-lp-error", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("lp-duality   FAIL"));
}
