use std::path::PathBuf;

use anyhow::Context as _;
use groupband::algo::{DefaultArm, Policy};
use groupband::sim::{run_experiment_on, write_report_files, ExperimentConfig};
use serde_json::json;

use crate::output::{Context, UsageError};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Experiment config (TOML).
    pub config: PathBuf,
    /// Override the horizon T.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Override the number of seeds.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub base_seed: Option<u64>,
    #[arg(long)]
    pub const_scale: Option<f64>,
    /// Comma-separated policy list, e.g. `col_ucb,pooled_ucb`.
    #[arg(long, value_delimiter = ',')]
    pub policies: Option<Vec<String>>,
    /// Share each trial's reward stream between policies.
    #[arg(long)]
    pub coupled: bool,
    #[arg(long, value_parser = parse_default_arm)]
    pub default_arm: Option<DefaultArm>,
    #[arg(long)]
    pub curve_points: Option<usize>,
    /// Skip the SVG chart.
    #[arg(long)]
    pub no_svg: bool,
}

fn parse_default_arm(s: &str) -> Result<DefaultArm, String> {
    match s.replace('-', "_").as_str() {
        "empirical_best" => Ok(DefaultArm::EmpiricalBest),
        "ucb_best" => Ok(DefaultArm::UcbBest),
        _ => Err(format!("expected empirical_best or ucb_best, got `{s}`")),
    }
}

pub fn run(ctx: &Context, args: Args) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(t) = args.horizon {
        cfg.horizon = t;
    }
    if let Some(n) = args.seeds {
        cfg.num_seeds = n;
    }
    if let Some(s) = args.base_seed {
        cfg.base_seed = s;
    }
    if let Some(c) = args.const_scale {
        cfg.const_scale = c;
    }
    if let Some(list) = &args.policies {
        cfg.policies = list
            .iter()
            .map(|p| p.parse::<Policy>())
            .collect::<Result<_, _>>()
            .map_err(|e| UsageError(e.to_string()))?;
    }
    if args.coupled {
        cfg.coupled = true;
    }
    if let Some(d) = args.default_arm {
        cfg.default_arm = d;
    }
    if let Some(n) = args.curve_points {
        cfg.curve_points = n;
    }
    if args.no_svg {
        cfg.output.svg = false;
    }
    cfg.validate()?;
    let instance = cfg.load_instance()?;
    let algo = cfg.algo_config(&instance)?;

    let dir = ctx.out_dir(cfg.output.dir.as_deref())?;
    cfg.output.dir = Some(dir.clone());
    let report = run_experiment_on(&cfg, &instance)
        .with_context(|| format!("running {}", args.config.display()))?;
    let files = write_report_files(&report, &dir, cfg.output.svg, ctx.reproducible)?;
    let mut outputs = vec![
        files.report_json.clone(),
        files.summary.clone(),
        files.curves_csv.clone(),
        files.per_seed_csv.clone(),
        files.groups_csv.clone(),
    ];
    outputs.extend(files.svg.clone());
    let resolved = json!({
        "config_path": args.config,
        "experiment": cfg,
        "algorithm": algo,
        "instance": { "num_arms": instance.num_arms(), "num_groups": instance.num_groups() },
    });
    ctx.write_manifest(&dir, "simulate", resolved, &outputs)?;
    print!("{}", report.summary());
    println!("wrote {}", dir.display());
    Ok(())
}
