use std::path::PathBuf;

use groupband::algo::AlgoConfig;
use groupband::analysis::{
    bar_ht_with, contention_star, phi_with, sharing_profile, sufficient_improvement, t_r_functionals, BarHt, Sign,
    SubsetTable,
};
use groupband::flow::{burn_in_rate, t_min};
use groupband::io::InstanceFile;
use groupband::{GroupStructure, Instance};
use serde_json::{json, Value};

use crate::output::{write_text, Context, UsageError};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Structure file, or an instance file for the instance-dependent sections.
    pub input: PathBuf,
    #[arg(long)]
    pub horizon: u64,
    /// Scale of the confidence constant used for n0 and t_min.
    #[arg(long, default_value_t = 1.0)]
    pub const_scale: f64,
    /// Condition-1 constant C1.
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Condition-1 exponent alpha (also used by the sharing-improvement test).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Points in the phi and M/T/R grids.
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    /// Smallest eps of those grids.
    #[arg(long, default_value_t = 1e-3)]
    pub eps_min: f64,
    /// Geometric points of the condition check (breakpoints are always added).
    #[arg(long, default_value_t = 64)]
    pub condition_grid: usize,
    /// Allow subset enumeration beyond the default arm cap.
    #[arg(long)]
    pub force: bool,
}

/// Finite numbers as JSON numbers, infinities as strings.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn geometric(lo: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo.powf(1.0 - i as f64 / (n - 1) as f64)).collect()
}

fn bar_entry(st: &GroupStructure, b: BarHt, horizon: u64) -> anyhow::Result<Value> {
    let p = sharing_profile(st, b.subset, horizon)?;
    Ok(json!({
        "value": num(b.value),
        "subset": b.subset.to_vec(),
        "h1": num(p.h1),
        "h2_minus": num(p.h2_minus),
        "h2_plus": num(p.h2_plus),
    }))
}

pub fn run(ctx: &Context, args: Args) -> anyhow::Result<()> {
    if args.horizon < 2 {
        return Err(UsageError("--horizon must be at least 2".into()).into());
    }
    if args.grid < 2 {
        return Err(UsageError("--grid must be at least 2".into()).into());
    }
    if !(args.eps_min > 0.0 && args.eps_min <= 1.0) {
        return Err(UsageError("--eps-min must lie in (0, 1]".into()).into());
    }
    let file = InstanceFile::load(&args.input)?;
    let st = file.structure()?;
    let instance = file.instance()?;
    let report = analyze(&st, instance.as_ref(), &args)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";

    let dir = ctx.out_dir(None)?;
    let path = dir.join("analysis.json");
    write_text(&path, &text)?;
    let resolved = json!({
        "input": args.input,
        "horizon": args.horizon,
        "const_scale": args.const_scale,
        "c1": args.c1,
        "alpha": args.alpha,
        "grid": args.grid,
        "eps_min": args.eps_min,
        "condition_grid": args.condition_grid,
        "force": args.force,
        "has_instance": instance.is_some(),
    });
    ctx.write_manifest(&dir, "analyze", resolved, std::slice::from_ref(&path))?;
    print!("{text}");
    Ok(())
}

fn analyze(st: &GroupStructure, instance: Option<&Instance>, args: &Args) -> anyhow::Result<Value> {
    let horizon = args.horizon;
    let table = SubsetTable::new(st, args.force)?;
    let minus = bar_ht_with(st, &table, horizon, Sign::Minus);
    let plus = bar_ht_with(st, &table, horizon, Sign::Plus);
    let (h1_min, h1_arg) = table.minimize(|s, _| Some(table.h1(s)));
    let t = horizon as f64;
    let envelope = json!({
        "lower": num(t.powf(2.0 / 3.0) / plus.value.cbrt()),
        "upper": num(t.powf(2.0 / 3.0) / minus.value.cbrt() * t.ln()),
    });
    let phi = geometric(args.eps_min, args.grid)
        .into_iter()
        .map(|e| Ok(json!({ "eps": e, "phi": num(phi_with(&table, e)?) })))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let algo = AlgoConfig::new(st, horizon, args.const_scale)?;
    let rate = burn_in_rate(st)?;
    let mut report = json!({
        "structure": {
            "num_arms": st.num_arms(),
            "num_groups": st.num_groups(),
            "max_group_size": st.max_group_size(),
        },
        "horizon": horizon,
        "burn_in": {
            "t0": rate.to_string(),
            "t0_value": rate.value(),
            "const_scale": args.const_scale,
            "n0": algo.burnin_pulls,
            "t_min": t_min(st, algo.burnin_pulls)?,
        },
        "sharing": {
            "min_h1": { "value": num(h1_min), "subset": h1_arg.to_vec() },
            "bar_ht_minus": bar_entry(st, minus, horizon)?,
            "bar_ht_plus": bar_entry(st, plus, horizon)?,
            "envelope": envelope,
            "sufficient_improvement": sufficient_improvement(st, horizon, args.alpha, args.force)?,
            "phi": phi,
        },
    });

    if let Some(inst) = instance {
        let f = t_r_functionals(inst, inst.sigma())?;
        let mut points: Vec<f64> = inst.gap_values().into_iter().filter(|&d| d > 0.0 && d < 1.0).collect();
        points.push(1.0);
        let contention = points
            .iter()
            .map(|&e| {
                Ok(json!({
                    "eps": e,
                    "contention": contention_star(inst, e).to_vec(),
                    "m": num(f.m(e)?),
                }))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let curves = f
            .on_grid(args.eps_min, args.grid)?
            .into_iter()
            .map(|(e, m, t, r)| json!({ "eps": e, "m": num(m), "t": num(t), "r": num(r) }))
            .collect::<Vec<_>>();
        let cond = f.condition_check(args.c1, args.alpha, args.condition_grid)?;
        let violation = cond.violation.map(|(z1, z2, m1, m2)| {
            json!({ "z1": z1, "z2": z2, "m1": num(m1), "m2": num(m2) })
        });
        report["instance"] = json!({
            "sigma": inst.sigma(),
            "means": inst.means(),
            "contention_table": contention,
            "functionals": curves,
            "eps_t": num(f.eps_t(t)?),
            "eps_star": num(f.eps_star(t)?),
            "condition": {
                "c1": args.c1,
                "alpha": args.alpha,
                "holds": cond.holds,
                "violation": violation,
            },
        });
    }
    Ok(report)
}
