use std::time::Instant;

use groupband::analysis::{min_cover, min_trapping_cover, t_r_functionals};
use groupband::flow::{burn_in_rate, burn_in_schedule, max_flow};
use groupband::lp::{solve_lp, LpProblem, LpStatus, Sense};
use groupband::oracle::{self, all_shared};
use groupband::structure::random_structure;
use groupband::{build_instance, GroupStructure, RewardModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use serde_json::json;

use crate::output::{write_text, AssertionFailure, Context};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Test hook: add this offset to every LP value before it is checked.
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub inject_lp_error: f64,
}

struct Suite {
    name: &'static str,
    checks: usize,
    failures: usize,
    worst: String,
}

fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=5);
    let mut p = LpProblem::maximize((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    for _ in 0..m {
        let row = (0..n).map(|_| (rng.gen_range(-1.0..1.0f64) * 4.0).round() / 4.0).collect();
        let sense = match rng.gen_range(0..4) {
            0 | 1 => Sense::Le,
            2 => Sense::Ge,
            _ => Sense::Eq,
        };
        p.add_constraint(row, sense, rng.gen_range(-1.0..2.0));
    }
    p.add_constraint(vec![1.0; n], Sense::Le, rng.gen_range(1.0..4.0));
    p
}

fn lp_suite(offset: f64) -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checks, mut failures, mut worst) = (0, 0, 0.0f64);
    for _ in 0..150 {
        let p = random_lp(&mut rng);
        checks += 1;
        let Ok(sol) = solve_lp(&p) else {
            failures += 1;
            continue;
        };
        match (sol.status, oracle::lp_by_vertex_enumeration(&p)) {
            (LpStatus::Optimal, Some(v)) => {
                let value = sol.value + offset;
                let scale = v.abs().max(1.0);
                let err = (value - v).abs().max((value - sol.dual_value).abs()) / scale;
                worst = worst.max(err);
                if err > 1e-8 {
                    failures += 1;
                }
            }
            (LpStatus::Infeasible, None) => {}
            _ => failures += 1,
        }
    }
    Suite { name: "lp-duality", checks, failures, worst: format!("max rel err {worst:.1e}") }
}

fn cover_suite() -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut checks, mut failures) = (0, 0);
    for _ in 0..60 {
        let st = random_structure(&mut rng, 6, 8);
        for s in st.all_arms().nonempty_subsets() {
            checks += 1;
            if min_cover(&st, s).size != oracle::min_cover_exhaustive(&st, s)
                || min_trapping_cover(&st, s).trapped != oracle::h2_plus_count_exhaustive(&st, s)
            {
                failures += 1;
            }
        }
    }
    Suite { name: "set-cover", checks, failures, worst: String::new() }
}

fn flow_suite() -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut checks, mut failures) = (0, 0);
    for _ in 0..100 {
        let mut edges = Vec::new();
        for u in 0..8 {
            for v in 0..8 {
                if u != v && rng.gen_bool(0.3) {
                    edges.push((u, v, rng.gen_range(1..=5)));
                }
            }
        }
        checks += 1;
        match max_flow(8, &edges, 0, 7) {
            Ok((v, _)) if v == oracle::min_cut_enumeration(8, &edges, 0, 7) => {}
            _ => failures += 1,
        }
    }
    for _ in 0..100 {
        let st = random_structure(&mut rng, 6, 8);
        checks += 1;
        match burn_in_rate(&st) {
            Ok(r) if r == oracle::t0_by_enumeration(&st) => {}
            _ => failures += 1,
        }
    }
    Suite { name: "flow", checks, failures, worst: String::new() }
}

fn burnin_suite() -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checks, mut failures) = (0, 0);
    for _ in 0..100 {
        let st = random_structure(&mut rng, 6, 10);
        let n0 = rng.gen_range(1..=4);
        checks += 1;
        let (Ok(sched), Ok(rate)) = (burn_in_schedule(&st, n0), burn_in_rate(&st)) else {
            failures += 1;
            continue;
        };
        let mut counts = vec![0u64; st.num_arms()];
        let mut feasible = true;
        for r in 0..sched.length {
            for (g, a) in sched.round(r).into_iter().enumerate() {
                feasible &= st.arm_set(g).contains(a);
                counts[a] += 1;
            }
        }
        if !feasible || sched.length != rate.ceil_mul(n0) || counts.iter().any(|&c| c < n0) {
            failures += 1;
        }
    }
    Suite { name: "burn-in", checks, failures, worst: String::new() }
}

fn functional_suite() -> Suite {
    let (mut checks, mut failures, mut worst) = (0, 0, 0.0f64);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    for &(g, a) in &[(1usize, 2usize), (3, 4), (4, 6)] {
        let st = GroupStructure::all_shared(g, a).expect("all-shared structure");
        let inst = build_instance(st, vec![RewardModel::unit_gaussian(0.5); a]).expect("equal-means instance");
        let Ok(f) = t_r_functionals(&inst, 1.0) else {
            failures += 1;
            continue;
        };
        for k in 0..8 {
            let eps = 10f64.powf(-0.375 * k as f64);
            checks += 1;
            let errs = match (f.m(eps), f.t_and_r(eps)) {
                (Ok(m), Ok((t, r))) => {
                    let mut e = rel(m, all_shared::m(g, a, eps));
                    if eps < 1.0 {
                        e = e.max(rel(t, all_shared::t(g, a, eps))).max(rel(r, all_shared::r(g, a, eps)));
                    }
                    e
                }
                _ => f64::INFINITY,
            };
            worst = worst.max(errs);
            if errs > 1e-5 {
                failures += 1;
            }
        }
        for horizon in [10.0, 1e3, 1e5] {
            checks += 1;
            let err = match (f.eps_t(horizon), f.eps_star(horizon)) {
                (Ok(et), Ok(es)) => rel(et, all_shared::eps_t(g, a, horizon))
                    .max(rel(es, all_shared::eps_star(g, a, horizon))),
                _ => f64::INFINITY,
            };
            worst = worst.max(err);
            if err > 1e-5 {
                failures += 1;
            }
        }
    }
    Suite { name: "functionals", checks, failures, worst: format!("max rel err {worst:.1e}") }
}

pub fn run(ctx: &Context, args: Args) -> anyhow::Result<()> {
    let start = Instant::now();
    let suites = [
        lp_suite(args.inject_lp_error),
        cover_suite(),
        flow_suite(),
        burnin_suite(),
        functional_suite(),
    ];
    let mut failed = Vec::new();
    let mut text = String::new();
    for s in &suites {
        let verdict = if s.failures == 0 { "PASS" } else { "FAIL" };
        let line = format!("{:<12} {verdict}  {} checks, {} failures  {}", s.name, s.checks, s.failures, s.worst);
        println!("{}", line.trim_end());
        text.push_str(line.trim_end());
        text.push('\n');
        if s.failures > 0 {
            failed.push(s.name);
        }
    }
    println!("selftest finished in {:.1}s", start.elapsed().as_secs_f64());
    let dir = ctx.out_dir(None)?;
    let path = dir.join("selftest.txt");
    write_text(&path, &text)?;
    let resolved = json!({ "inject_lp_error": args.inject_lp_error, "failed": failed });
    ctx.write_manifest(&dir, "selftest", resolved, std::slice::from_ref(&path))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(AssertionFailure(format!("failing suites: {}", failed.join(", "))).into())
    }
}
