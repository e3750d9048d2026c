use std::path::PathBuf;

use groupband::algo::AlgoConfig;
use groupband::flow::{burn_in_rate, burn_in_schedule};
use groupband::io::InstanceFile;
use serde_json::json;

use crate::output::{write_text, Context, UsageError};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Structure or instance file.
    pub structure: PathBuf,
    /// Pulls per arm; if absent it is derived from --horizon and --const-scale.
    #[arg(long)]
    pub n0: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub const_scale: f64,
}

pub fn run(ctx: &Context, args: Args) -> anyhow::Result<()> {
    let st = InstanceFile::load(&args.structure)?.structure()?;
    let n0 = match (args.n0, args.horizon) {
        (Some(n), None) if n >= 1 => n,
        (Some(_), None) => return Err(UsageError("--n0 must be at least 1".into()).into()),
        (None, Some(t)) => AlgoConfig::new(&st, t, args.const_scale)?.burnin_pulls,
        _ => return Err(UsageError("pass exactly one of --n0 and --horizon".into()).into()),
    };
    let t0 = burn_in_rate(&st)?;
    let sched = burn_in_schedule(&st, n0)?;

    let mut csv = String::from("round,group,arm\n");
    for r in 0..sched.length {
        for (g, a) in sched.round(r).into_iter().enumerate() {
            csv.push_str(&format!("{},{g},{a}\n", r + 1));
        }
    }
    let dir = ctx.out_dir(None)?;
    let path = dir.join("schedule.csv");
    write_text(&path, &csv)?;
    let resolved = json!({
        "structure_path": args.structure,
        "n0": n0,
        "horizon": args.horizon,
        "const_scale": args.const_scale,
        "t0": t0.to_string(),
        "t_min": sched.length,
    });
    ctx.write_manifest(&dir, "schedule", resolved, std::slice::from_ref(&path))?;
    println!("t0 = {t0}");
    println!("n0 = {n0}");
    println!("t_min = {}", sched.length);
    println!("wrote {}", path.display());
    Ok(())
}
