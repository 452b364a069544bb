use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

use decopt::harness::{
    aggregate_runs, decompose, export_csv, load_target_curves, run_all, select, train_sources,
    train_target, ExperimentConfig, Mode,
};
use decopt::Result;

#[derive(Parser)]
#[command(name = "decopt", version, about = "Decomposed-policy options: source training, selection, transfer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file, or a built-in preset: `desk`, `combogrid-<3..6>`, `maze-<9|19>`.
    #[arg(long, default_value = "desk")]
    config: String,
    /// Run only this seed instead of every configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Option source: dec-options, dec-options-whole, random-options, vanilla.
    #[arg(long)]
    mode: Option<Mode>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one policy per source task.
    TrainSource(Common),
    /// Roll out the source policies and check they can be decomposed.
    Decompose(Common),
    /// Build the option library for a mode.
    Select(Common),
    /// Train target agents with the library of a mode.
    TrainTarget(Common),
    /// Every stage for every seed.
    RunAll {
        #[command(flatten)]
        common: Common,
        /// Reuse source policies and rollouts already in the output directory.
        #[arg(long)]
        reuse_sources: bool,
    },
    /// Mean and 95% interval of the target learning curves across seeds.
    Aggregate(Common),
    /// Print the resolved configuration as TOML.
    ShowConfig(Common),
}

struct Resolved {
    cfg: ExperimentConfig,
    mode: Mode,
}

fn resolve(common: &Common) -> Result<Resolved> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    let mode = common.mode.unwrap_or(cfg.mode);
    cfg.mode = mode;
    Ok(Resolved { cfg, mode })
}

fn for_seeds<T: Send>(cfg: &ExperimentConfig, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    cfg.seeds.par_iter().map(|&s| f(s)).collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::TrainSource(c) => {
            let Resolved { cfg, .. } = resolve(&c)?;
            for (seed, reports) in cfg.seeds.iter().zip(for_seeds(&cfg, |s| train_sources(&cfg, s))?) {
                for r in reports {
                    println!(
                        "seed {seed} task {}: greedy return {} ({}, {} attempt(s))",
                        r.task,
                        r.greedy_return,
                        if r.solved { "solved" } else { "unsolved" },
                        r.attempts
                    );
                }
            }
        }
        Command::Decompose(c) => {
            let Resolved { cfg, .. } = resolve(&c)?;
            for (seed, trajs) in cfg.seeds.iter().zip(for_seeds(&cfg, |s| decompose(&cfg, s))?) {
                let lens: Vec<usize> = trajs.iter().map(|t| t.n_actions()).collect();
                println!("seed {seed}: rollout lengths {lens:?}");
            }
        }
        Command::Select(c) => {
            let Resolved { cfg, mode } = resolve(&c)?;
            for (seed, lib) in cfg.seeds.iter().zip(for_seeds(&cfg, |s| select(&cfg, s, mode))?) {
                println!("seed {seed}: {} option(s) for {mode}", lib.len());
            }
        }
        Command::TrainTarget(c) => {
            let Resolved { cfg, mode } = resolve(&c)?;
            for (results, _) in for_seeds(&cfg, |s| train_target(&cfg, s, mode))? {
                for r in results {
                    println!(
                        "seed {} {mode} target {}: greedy return {}, auc {:.2}",
                        r.seed, r.task_id, r.greedy_return, r.auc
                    );
                }
            }
        }
        Command::RunAll {
            common,
            reuse_sources,
        } => {
            let Resolved { cfg, mode } = resolve(&common)?;
            for outcome in run_all(&cfg, mode, reuse_sources)? {
                let solved = outcome.sources.iter().filter(|r| r.solved).count();
                for r in &outcome.targets {
                    println!(
                        "seed {} {mode}: {solved}/{} sources solved, {} option(s), target {} greedy return {}, auc {:.2}",
                        outcome.seed,
                        outcome.sources.len(),
                        outcome.n_options,
                        r.task_id,
                        r.greedy_return,
                        r.auc
                    );
                }
            }
        }
        Command::Aggregate(c) => {
            let Resolved { cfg, mode } = resolve(&c)?;
            let dir = cfg.out_dir.join("aggregate");
            std::fs::create_dir_all(&dir).map_err(|e| decopt::Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            let n_targets = cfg.task_set()?.target.len();
            for task in 0..n_targets {
                let curves = load_target_curves(&cfg, mode, task)?;
                let summary = aggregate_runs(&curves)?;
                let path = dir.join(format!("{mode}-target-{task}.csv"));
                export_csv(&summary, &path)?;
                let last = summary.rows.last().expect("non-empty summary");
                println!(
                    "{mode} target {task}: final mean {:.2} [{:.2}, {:.2}] over seeds {:?} (dropped {:?}){} -> {}",
                    last.mean_return,
                    last.ci_low,
                    last.ci_high,
                    summary.retained_seeds,
                    summary.dropped_seeds,
                    if summary.resampled { ", resampled" } else { "" },
                    path.display()
                );
            }
        }
        Command::ShowConfig(c) => {
            let Resolved { cfg, .. } = resolve(&c)?;
            print!("{}", cfg.to_toml()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
