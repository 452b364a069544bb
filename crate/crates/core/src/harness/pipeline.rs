use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::aggregate::area_under_curve;
use super::config::{ExperimentConfig, Mode};
use crate::decompose::{enumerate_subpolicies, whole_policy, SubPolicy};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::grid::{GridEnv, GridSpec};
use crate::nn::{load_policy, save_policy, MlpPolicy};
use crate::option_env::OptionEnv;
use crate::options::{
    generate_candidates, greedy_select, random_options, rollout_greedy, write_selection_log,
    OptionLibrary, Trajectory,
};
use crate::trainer::{curve_rows, greedy_return, read_curve, train_task, write_curve, CurvePoint};

/// Deterministic file names for one seed's artifacts.
#[derive(Debug, Clone)]
pub struct SeedPaths {
    pub root: PathBuf,
}

impl SeedPaths {
    pub fn new(out_dir: &Path, seed: u64) -> Self {
        SeedPaths {
            root: out_dir.join(format!("seed-{seed}")),
        }
    }

    pub fn source_dir(&self) -> PathBuf {
        self.root.join("source")
    }

    pub fn source_policy(&self, task: usize) -> PathBuf {
        self.source_dir().join(format!("task-{task}.policy.json"))
    }

    pub fn source_curve(&self, task: usize) -> PathBuf {
        self.source_dir().join(format!("task-{task}.curve.csv"))
    }

    pub fn trajectories(&self) -> PathBuf {
        self.source_dir().join("trajectories.json")
    }

    pub fn mode_dir(&self, mode: Mode) -> PathBuf {
        self.root.join(mode.as_str())
    }

    pub fn library(&self, mode: Mode) -> PathBuf {
        self.mode_dir(mode).join("library.toml")
    }

    pub fn selection_log(&self, mode: Mode) -> PathBuf {
        self.mode_dir(mode).join("selection_log.csv")
    }

    pub fn target_curve(&self, mode: Mode, task: usize) -> PathBuf {
        self.mode_dir(mode).join(format!("target-{task}.curve.csv"))
    }

    pub fn target_policy(&self, mode: Mode, task: usize) -> PathBuf {
        self.mode_dir(mode).join(format!("target-{task}.policy.json"))
    }

    pub fn target_results(&self, mode: Mode) -> PathBuf {
        self.mode_dir(mode).join("results.csv")
    }
}

/// Independent 64-bit seed for one (stream, index) pair of a run seed.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(index.wrapping_mul(0x94D0_49BB_1331_11EB))
        .wrapping_add(0x2545_F491_4F6C_DD1D);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_SOURCE: u64 = 1;
const STREAM_TARGET: u64 = 2;
const STREAM_RANDOM_OPTIONS: u64 = 3;
const STREAM_ENV: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceReport {
    pub task: usize,
    pub attempts: usize,
    pub greedy_return: f64,
    pub solved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetResult {
    pub seed: u64,
    pub mode: Mode,
    pub task_id: usize,
    pub n_options: usize,
    pub greedy_return: f64,
    pub auc: f64,
    pub final_curve_return: f64,
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub sources: Vec<SourceReport>,
    pub n_options: usize,
    pub targets: Vec<TargetResult>,
    pub curves: Vec<Vec<CurvePoint>>,
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn env_for(spec: &GridSpec, seed: u64, task: usize) -> Result<GridEnv> {
    GridEnv::new(spec.clone(), derive_seed(seed, STREAM_ENV, task as u64))
}

fn source_report(policy: &MlpPolicy, spec: &GridSpec, seed: u64, task: usize, attempts: usize) -> Result<SourceReport> {
    let mut env = env_for(spec, seed, task)?;
    let traj = rollout_greedy(policy, &mut env, task)?;
    let greedy_return = {
        let mut env = OptionEnv::new(env_for(spec, seed, task)?, Vec::new(), 1.0)?;
        greedy_return(policy, &mut env)?
    };
    Ok(SourceReport {
        task,
        attempts,
        greedy_return,
        solved: !traj.truncated,
    })
}

/// Stage 1: trains one policy per source task, retrying with a new seed while
/// the argmax policy does not reach the goal.
pub fn train_sources(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<SourceReport>> {
    let run = || -> Result<Vec<SourceReport>> {
        let tasks = cfg.task_set()?;
        let paths = SeedPaths::new(&cfg.out_dir, seed);
        create_dir(&paths.source_dir())?;
        tasks
            .source
            .par_iter()
            .enumerate()
            .map(|(t, spec)| {
                let mut best: Option<(SourceReport, MlpPolicy, Vec<CurvePoint>)> = None;
                for attempt in 0..cfg.source.attempts {
                    let mut env = OptionEnv::new(env_for(spec, seed, t)?, Vec::new(), cfg.source.ppo.gamma)?;
                    let init = derive_seed(seed, STREAM_SOURCE, (t * 1000 + attempt) as u64);
                    let out = train_task(&mut env, &cfg.source.nets, &cfg.source.ppo, init)?;
                    let report = source_report(&out.policy, spec, seed, t, attempt + 1)?;
                    let better = best
                        .as_ref()
                        .is_none_or(|(b, _, _)| report.greedy_return > b.greedy_return);
                    let solved = report.solved;
                    if better {
                        best = Some((report, out.policy, out.curve));
                    }
                    if solved {
                        break;
                    }
                    log::warn!("seed {seed}: source task {t} unsolved after attempt {}", attempt + 1);
                }
                let (report, policy, curve) = best.expect("at least one attempt");
                save_policy(&policy, &paths.source_policy(t))?;
                write_curve(&paths.source_curve(t), &curve_rows(&curve, seed, t))?;
                Ok(report)
            })
            .collect()
    };
    run().map_err(|e| e.at_stage("train-source", seed))
}

fn load_sources(paths: &SeedPaths, n: usize) -> Result<Vec<Arc<MlpPolicy>>> {
    (0..n)
        .map(|t| load_policy(&paths.source_policy(t)).map(Arc::new))
        .collect()
}

/// Stage 2: greedy rollouts of the source policies.
pub fn decompose(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<Trajectory>> {
    let run = || -> Result<Vec<Trajectory>> {
        let tasks = cfg.task_set()?;
        let paths = SeedPaths::new(&cfg.out_dir, seed);
        let policies = load_sources(&paths, tasks.source.len())?;
        let mut trajectories = Vec::with_capacity(policies.len());
        for (t, (policy, spec)) in policies.iter().zip(&tasks.source).enumerate() {
            let mut env = env_for(spec, seed, t)?;
            let traj = rollout_greedy(policy, &mut env, t)?;
            if traj.truncated {
                log::warn!("seed {seed}: source task {t} rollout hit the step limit");
            }
            enumerate_subpolicies(Arc::clone(policy), t, cfg.selection.enumeration_cap)?;
            trajectories.push(traj);
        }
        let text = serde_json::to_string(&trajectories)?;
        let path = paths.trajectories();
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(trajectories)
    };
    run().map_err(|e| e.at_stage("decompose", seed))
}

fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Stage 3: candidate generation and greedy selection (or random options).
/// Writes the option library and, for the selection modes, the selection log.
pub fn select(cfg: &ExperimentConfig, seed: u64, mode: Mode) -> Result<OptionLibrary> {
    let run = || -> Result<OptionLibrary> {
        let tasks = cfg.task_set()?;
        let paths = SeedPaths::new(&cfg.out_dir, seed);
        create_dir(&paths.mode_dir(mode))?;
        let n_primitives = env_for(&tasks.target[0], seed, 0)?.n_actions();
        let library = match mode {
            Mode::Vanilla => OptionLibrary::empty(n_primitives),
            Mode::RandomOptions => {
                let options = random_options(
                    n_primitives,
                    cfg.selection.random_length,
                    cfg.selection.random_count,
                    derive_seed(seed, STREAM_RANDOM_OPTIONS, 0),
                );
                OptionLibrary::from_options(&options, n_primitives)?
            }
            Mode::DecOptions | Mode::DecOptionsWhole => {
                let policies = load_sources(&paths, tasks.source.len())?;
                let trajectories: Vec<Trajectory> = read_trajectories(&paths.trajectories())?
                    .into_iter()
                    .filter(|t| !t.truncated)
                    .collect();
                if trajectories.is_empty() {
                    return Err(Error::Config("no source rollout reached its goal".into()));
                }
                let mut subs: Vec<SubPolicy> = Vec::new();
                for (t, policy) in policies.iter().enumerate() {
                    if mode == Mode::DecOptionsWhole {
                        subs.push(whole_policy(Arc::clone(policy), t)?);
                    } else {
                        subs.extend(enumerate_subpolicies(
                            Arc::clone(policy),
                            t,
                            cfg.selection.enumeration_cap,
                        )?);
                    }
                }
                let longest = trajectories.iter().map(Trajectory::n_actions).max().unwrap_or(1);
                let set = generate_candidates(subs, longest, cfg.selection.limits)?;
                let result = greedy_select(&set, &trajectories, n_primitives, &cfg.exclusion)?;
                write_selection_log(&paths.selection_log(mode), &set, &result)?;
                let weights: HashMap<usize, PathBuf> = (0..policies.len())
                    .map(|t| (t, PathBuf::from(format!("../source/task-{t}.policy.json"))))
                    .collect();
                OptionLibrary::from_selection(&set, &result, n_primitives, &weights)?
            }
        };
        library.save(&paths.library(mode))?;
        Ok(library)
    };
    run().map_err(|e| e.at_stage("select", seed))
}

fn write_results(path: &Path, rows: &[TargetResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<TargetResult>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| Ok(row?)).collect()
}

/// Stage 4: trains a fresh agent on every target task, with the options of
/// the library written by stage 3 (none for vanilla).
pub fn train_target(cfg: &ExperimentConfig, seed: u64, mode: Mode) -> Result<(Vec<TargetResult>, Vec<Vec<CurvePoint>>)> {
    let run = || -> Result<(Vec<TargetResult>, Vec<Vec<CurvePoint>>)> {
        let tasks = cfg.task_set()?;
        let paths = SeedPaths::new(&cfg.out_dir, seed);
        create_dir(&paths.mode_dir(mode))?;
        let options = if mode == Mode::Vanilla {
            Vec::new()
        } else {
            OptionLibrary::load(&paths.library(mode))?.resolve(&paths.mode_dir(mode))?
        };
        let mut results = Vec::new();
        let mut curves = Vec::new();
        for (j, spec) in tasks.target.iter().enumerate() {
            let ppo = cfg.target_ppo(mode, j);
            let mut env = OptionEnv::new(env_for(spec, seed, 100 + j)?, options.clone(), ppo.gamma)?;
            let out = train_task(&mut env, &cfg.target.nets, &ppo, derive_seed(seed, STREAM_TARGET, j as u64))?;
            let greedy = greedy_return(&out.policy, &mut env)?;
            save_policy(&out.policy, &paths.target_policy(mode, j))?;
            write_curve(&paths.target_curve(mode, j), &curve_rows(&out.curve, seed, j))?;
            results.push(TargetResult {
                seed,
                mode,
                task_id: j,
                n_options: options.len(),
                greedy_return: greedy,
                auc: area_under_curve(&out.curve),
                final_curve_return: out.curve.last().map_or(0.0, |p| p.mean_episode_return),
            });
            curves.push(out.curve);
        }
        write_results(&paths.target_results(mode), &results)?;
        Ok((results, curves))
    };
    run().map_err(|e| e.at_stage("train-target", seed))
}

/// All four stages for one seed. Source policies and rollouts already on
/// disk are reused when `reuse_sources` is set.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64, mode: Mode, reuse_sources: bool) -> Result<SeedOutcome> {
    let paths = SeedPaths::new(&cfg.out_dir, seed);
    let mut sources = Vec::new();
    let mut n_options = 0;
    if mode != Mode::Vanilla {
        if mode.uses_sources() {
            let n = cfg.task_set().map_err(|e| e.at_stage("train-source", seed))?.source.len();
            let have = reuse_sources
                && paths.trajectories().exists()
                && (0..n).all(|t| paths.source_policy(t).exists());
            if have {
                sources = reload_source_reports(cfg, seed)?;
            } else {
                sources = train_sources(cfg, seed)?;
                decompose(cfg, seed)?;
            }
        }
        n_options = select(cfg, seed, mode)?.len();
    }
    let (targets, curves) = train_target(cfg, seed, mode)?;
    Ok(SeedOutcome {
        seed,
        sources,
        n_options,
        targets,
        curves,
    })
}

fn reload_source_reports(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<SourceReport>> {
    let run = || -> Result<Vec<SourceReport>> {
        let tasks = cfg.task_set()?;
        let paths = SeedPaths::new(&cfg.out_dir, seed);
        let policies = load_sources(&paths, tasks.source.len())?;
        policies
            .iter()
            .zip(&tasks.source)
            .enumerate()
            .map(|(t, (p, spec))| source_report(p, spec, seed, t, 0))
            .collect()
    };
    run().map_err(|e| e.at_stage("train-source", seed))
}

/// Runs every configured seed in parallel.
pub fn run_all(cfg: &ExperimentConfig, mode: Mode, reuse_sources: bool) -> Result<Vec<SeedOutcome>> {
    create_dir(&cfg.out_dir)?;
    let tasks_file = cfg.out_dir.join("tasks.toml");
    cfg.task_set()?.save(&tasks_file)?;
    cfg.seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed, mode, reuse_sources))
        .collect()
}

/// Reads back the learning curves of one mode and target task.
pub fn load_target_curves(cfg: &ExperimentConfig, mode: Mode, task: usize) -> Result<Vec<super::SeedCurve>> {
    cfg.seeds
        .iter()
        .map(|&seed| {
            let path = SeedPaths::new(&cfg.out_dir, seed).target_curve(mode, task);
            let rows = read_curve(&path)?;
            Ok(super::SeedCurve {
                seed,
                points: rows
                    .into_iter()
                    .map(|r| CurvePoint {
                        env_step: r.env_step,
                        mean_episode_return: r.mean_episode_return,
                    })
                    .collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_by_stream_and_index() {
        let a = derive_seed(1, STREAM_SOURCE, 0);
        assert_ne!(a, derive_seed(1, STREAM_SOURCE, 1));
        assert_ne!(a, derive_seed(1, STREAM_TARGET, 0));
        assert_ne!(a, derive_seed(2, STREAM_SOURCE, 0));
        assert_eq!(a, derive_seed(1, STREAM_SOURCE, 0));
    }

    #[test]
    fn paths_are_stable() {
        let p = SeedPaths::new(Path::new("out"), 3);
        assert_eq!(p.source_policy(1), Path::new("out/seed-3/source/task-1.policy.json"));
        assert_eq!(p.library(Mode::DecOptionsWhole), Path::new("out/seed-3/dec-options-whole/library.toml"));
    }
}
