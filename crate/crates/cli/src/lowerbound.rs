use std::path::{Path, PathBuf};

use clap::{Subcommand, ValueEnum};
use groupband::algo::{AlgoConfig, Policy};
use groupband::analysis::min_trapping_cover;
use groupband::io::InstanceFile;
use groupband::lowerbound::{
    minimax_family, perturb_second_best, perturb_second_best_clamped, theorem4_adversary, ModelClass, PerturbSign,
    PILOT_SEEDS,
};
use groupband::{BitSet64, Instance};
use serde_json::json;

use crate::output::{write_text, Context, UsageError};

#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(subcommand)]
    pub kind: Kind,
}

#[derive(Subcommand, Debug)]
pub enum Kind {
    /// Three-level instance around an arm subset S: 1/2 on S, 0 on the rest
    /// of the cover's span, 1 elsewhere.
    Minimax {
        /// Structure file.
        structure: PathBuf,
        /// Arms of S, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Class::Gaussian)]
        class: Class,
    },
    /// Pair of single-arm perturbations around a Gaussian base at scale z_T.
    Adversary {
        /// Unit-variance Gaussian instance file.
        instance: PathBuf,
        #[arg(long)]
        horizon: u64,
        #[arg(long, default_value = "col_ucb")]
        policy: String,
        #[arg(long, default_value_t = PILOT_SEEDS)]
        pilot_seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        const_scale: f64,
    },
    /// Moves one arm to the runner-up mean of a group plus or minus eps.
    Perturb {
        instance: PathBuf,
        #[arg(long)]
        arm: usize,
        #[arg(long)]
        group: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum)]
        sign: SignArg,
        /// Cap eps at 1/4 (needs every mean in [1/4, 3/4]).
        #[arg(long)]
        clamped: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Class {
    Gaussian,
    Bernoulli,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    InstanceFile::load(path)?
        .instance()?
        .ok_or_else(|| UsageError(format!("{} has no reward models", path.display())).into())
}

fn save(dir: &Path, name: &str, inst: &Instance) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    InstanceFile::from_instance(inst).save(&path)?;
    Ok(path)
}

pub fn run(ctx: &Context, args: Args) -> anyhow::Result<()> {
    let dir = ctx.out_dir(None)?;
    let (resolved, outputs) = match args.kind {
        Kind::Minimax { structure, subset, class } => {
            let st = InstanceFile::load(&structure)?.structure()?;
            if let Some(&a) = subset.iter().find(|&&a| a >= st.num_arms()) {
                return Err(UsageError(format!("arm {a} is outside 0..{}", st.num_arms())).into());
            }
            let s = BitSet64::from_indices(subset.iter().copied());
            let cover = min_trapping_cover(&st, s);
            let model = match class {
                Class::Gaussian => ModelClass::Gaussian,
                Class::Bernoulli => ModelClass::Bernoulli,
            };
            let inst = minimax_family(&st, s, cover.groups, model)?;
            let path = save(&dir, "minimax.toml", &inst)?;
            println!("S = {s}, cover groups {}, trapped {}", cover.groups, cover.trapped);
            let resolved = json!({
                "generator": "minimax",
                "structure": structure,
                "subset": s.to_vec(),
                "cover_groups": cover.groups.to_vec(),
                "span": cover.span.to_vec(),
                "trapped": cover.trapped,
                "class": model,
            });
            (resolved, vec![path])
        }
        Kind::Adversary { instance, horizon, policy, pilot_seeds, seed, const_scale } => {
            let base = load_instance(&instance)?;
            let policy: Policy = policy.parse().map_err(|e: groupband::Error| UsageError(e.to_string()))?;
            let cfg = AlgoConfig::new(base.structure(), horizon, const_scale)?;
            let adv = theorem4_adversary(&base, policy, &cfg, pilot_seeds, seed)?;
            let plus = save(&dir, "j_plus.toml", &adv.plus)?;
            let minus = save(&dir, "j_minus.toml", &adv.minus)?;
            let details = json!({
                "z_t": adv.z_t,
                "contention": adv.contention.to_vec(),
                "pilot_pulls": adv.pilot_pulls,
                "plus": adv.spec_plus,
                "minus": adv.spec_minus,
            });
            let details_path = dir.join("adversary.json");
            write_text(&details_path, &(serde_json::to_string_pretty(&details)? + "\n"))?;
            println!(
                "z_T = {}, target arm {}, anchor group {}, anchor mean {}",
                adv.z_t.z, adv.spec_plus.target_arm, adv.spec_plus.anchor_group, adv.spec_plus.anchor
            );
            let resolved = json!({
                "generator": "adversary",
                "instance": instance,
                "horizon": horizon,
                "policy": policy,
                "pilot_seeds": pilot_seeds,
                "seed": seed,
                "algorithm": cfg,
            });
            (resolved, vec![plus, minus, details_path])
        }
        Kind::Perturb { instance, arm, group, eps, sign, clamped } => {
            let base = load_instance(&instance)?;
            let sign = match sign {
                SignArg::Plus => PerturbSign::Plus,
                SignArg::Minus => PerturbSign::Minus,
            };
            let (inst, spec) = if clamped {
                perturb_second_best_clamped(&base, arm, group, eps, sign)?
            } else {
                perturb_second_best(&base, arm, group, eps, sign)?
            };
            let path = save(&dir, "perturbed.toml", &inst)?;
            println!("arm {arm}: {} -> {}", base.mean(arm), inst.mean(arm));
            let resolved = json!({
                "generator": "perturb",
                "instance": instance,
                "clamped": clamped,
                "spec": spec,
            });
            (resolved, vec![path])
        }
    };
    ctx.write_manifest(&dir, "lowerbound", resolved, &outputs)?;
    for p in &outputs {
        println!("wrote {}", p.display());
    }
    Ok(())
}
