use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{build_task_sets, DomainKind, TaskSet};
use crate::options::{CandidateLimits, Exclusion};
use crate::trainer::{NetShapes, PpoConfig};

const DESK_PRESET: &str = include_str!("../../configs/desk.toml");

/// How the target agent's extra actions are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Levin-loss selection over every sub-policy of every source policy.
    DecOptions,
    /// Same selection, but each source policy contributes only itself.
    DecOptionsWhole,
    /// Fixed random action sequences instead of selected options.
    RandomOptions,
    /// Primitive actions only.
    Vanilla,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::DecOptions,
        Mode::DecOptionsWhole,
        Mode::RandomOptions,
        Mode::Vanilla,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::DecOptions => "dec-options",
            Mode::DecOptionsWhole => "dec-options-whole",
            Mode::RandomOptions => "random-options",
            Mode::Vanilla => "vanilla",
        }
    }

    /// Whether the mode needs trained source policies.
    pub fn uses_sources(self) -> bool {
        matches!(self, Mode::DecOptions | Mode::DecOptionsWhole)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`")))
    }
}

/// The three PPO settings tuned per method and domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tuning {
    pub clip_epsilon: f64,
    pub entropy_coef: f64,
    pub learning_rate: f64,
}

const fn tuning(clip_epsilon: f64, entropy_coef: f64, learning_rate: f64) -> Tuning {
    Tuning {
        clip_epsilon,
        entropy_coef,
        learning_rate,
    }
}

/// Published target-task settings. Maze tasks are looked up by target index
/// (same room, neighbouring room, opposite room); random options reuse the
/// dec-options row.
pub fn reported_tuning(domain: DomainKind, size: usize, mode: Mode, target: usize) -> Option<Tuning> {
    // Rows: vanilla, dec-options-whole, dec-options.
    let rows: [Tuning; 3] = match (domain, size, target) {
        (DomainKind::Combogrid, 3, _) => [
            tuning(0.15, 0.1, 0.01),
            tuning(0.15, 0.05, 0.005),
            tuning(0.2, 0.05, 0.005),
        ],
        (DomainKind::Combogrid, 4, _) => [
            tuning(0.1, 0.0, 0.005),
            tuning(0.25, 0.05, 0.01),
            tuning(0.25, 0.0, 0.005),
        ],
        (DomainKind::Combogrid, 5, _) => [
            tuning(0.25, 0.1, 0.005),
            tuning(0.2, 0.05, 0.005),
            tuning(0.2, 0.05, 0.005),
        ],
        (DomainKind::Combogrid, 6, _) => [
            tuning(0.1, 0.05, 0.005),
            tuning(0.2, 0.0, 0.001),
            tuning(0.15, 0.05, 0.005),
        ],
        (DomainKind::Maze, _, 0) => [
            tuning(0.15, 0.05, 0.0005),
            tuning(0.3, 0.15, 0.0005),
            tuning(0.25, 0.1, 0.0005),
        ],
        (DomainKind::Maze, _, 1) => [
            tuning(0.1, 0.2, 0.0005),
            tuning(0.25, 0.05, 0.0005),
            tuning(0.2, 0.1, 0.001),
        ],
        (DomainKind::Maze, _, 2) => [
            tuning(0.2, 0.0, 5e-5),
            tuning(0.15, 0.05, 0.001),
            tuning(0.2, 0.1, 0.001),
        ],
        _ => return None,
    };
    Some(match mode {
        Mode::Vanilla => rows[0],
        Mode::DecOptionsWhole => rows[1],
        Mode::DecOptions | Mode::RandomOptions => rows[2],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcePhase {
    pub nets: NetShapes,
    #[serde(default)]
    pub ppo: PpoConfig,
    /// Training runs per task; a task is retrained with a fresh seed while
    /// its argmax policy fails to reach the goal.
    #[serde(default = "one")]
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionConfig {
    #[serde(default)]
    pub limits: CandidateLimits,
    /// Largest hidden layer whose activation patterns are enumerated.
    #[serde(default = "default_enumeration_cap")]
    pub enumeration_cap: usize,
    /// Length of each random option.
    #[serde(default = "default_random_length")]
    pub random_length: usize,
    /// Number of random options.
    #[serde(default = "default_random_count")]
    pub random_count: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            limits: CandidateLimits::default(),
            enumeration_cap: default_enumeration_cap(),
            random_length: default_random_length(),
            random_count: default_random_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetPhase {
    pub nets: NetShapes,
    /// Settings shared by every mode; clip, entropy and learning rate are
    /// replaced per mode.
    #[serde(default)]
    pub ppo: PpoConfig,
    /// Per-mode overrides of the published settings.
    #[serde(default)]
    pub tuning: BTreeMap<Mode, Tuning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub size: usize,
    /// Seed for generated layouts (maze gaps and doors).
    #[serde(default)]
    pub layout_seed: u64,
    /// Task-set file used instead of the generated layouts; relative paths
    /// are resolved against the config file.
    #[serde(default)]
    pub tasks_file: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub mode: Mode,
    pub exclusion: Exclusion,
    pub out_dir: PathBuf,
    pub source: SourcePhase,
    #[serde(default)]
    pub selection: SelectionConfig,
    pub target: TargetPhase,
}

fn one() -> usize {
    1
}

fn default_enumeration_cap() -> usize {
    14
}

fn default_random_length() -> usize {
    6
}

fn default_random_count() -> usize {
    4
}

impl ExperimentConfig {
    /// Full-scale settings for a domain and size.
    pub fn full_scale(domain: DomainKind, size: usize) -> Self {
        let (target_policy, value_hidden, source_steps, target_steps) = match domain {
            DomainKind::Combogrid => (vec![16], vec![200, 200, 200], 1_000_000, 1_000_000),
            DomainKind::Maze => (vec![50, 50, 50], vec![256, 256, 256], 1_000_000, 2_000_000),
        };
        ExperimentConfig {
            domain,
            size,
            layout_seed: 0,
            tasks_file: None,
            seeds: (0..30).collect(),
            mode: Mode::DecOptions,
            exclusion: Exclusion::LeaveOwnTaskOut,
            out_dir: PathBuf::from("out"),
            source: SourcePhase {
                nets: NetShapes {
                    policy_hidden: vec![6],
                    value_hidden: value_hidden.clone(),
                },
                ppo: PpoConfig {
                    total_env_steps: source_steps,
                    ..PpoConfig::default()
                },
                attempts: 1,
            },
            selection: SelectionConfig::default(),
            target: TargetPhase {
                nets: NetShapes {
                    policy_hidden: target_policy,
                    value_hidden,
                },
                ppo: PpoConfig {
                    total_env_steps: target_steps,
                    ..PpoConfig::default()
                },
                tuning: BTreeMap::new(),
            },
        }
    }

    /// Named built-in configuration: `desk`, or full scale as
    /// `combogrid-<3..6>` / `maze-<9|19>`.
    pub fn preset(name: &str) -> Result<Self> {
        let unknown = || Error::Config(format!("unknown preset `{name}`"));
        if name == "desk" {
            return Self::from_toml(DESK_PRESET);
        }
        let (domain, size) = name.split_once('-').ok_or_else(unknown)?;
        let size: usize = size.parse().map_err(|_| unknown())?;
        let domain = match domain {
            "combogrid" => DomainKind::Combogrid,
            "maze" => DomainKind::Maze,
            _ => return Err(unknown()),
        };
        let cfg = Self::full_scale(domain, size);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file, or a preset when `spec` names one and no such
    /// file exists.
    pub fn load(spec: &str) -> Result<Self> {
        let path = Path::new(spec);
        if !path.exists() {
            if let Ok(cfg) = Self::preset(spec) {
                return Ok(cfg);
            }
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(file), Some(dir)) = (&cfg.tasks_file, path.parent()) {
            if file.is_relative() {
                cfg.tasks_file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if self.source.attempts == 0 {
            return Err(Error::Config("source.attempts must be at least 1".into()));
        }
        if self.source.nets.policy_hidden.len() != 1 {
            return Err(Error::Config(
                "source policies need exactly one hidden layer to be decomposed".into(),
            ));
        }
        if self.selection.random_length == 0 || self.selection.random_count == 0 {
            return Err(Error::Config("random options need positive length and count".into()));
        }
        self.source.ppo.validate()?;
        for mode in Mode::ALL {
            self.target_ppo(mode, 0).validate()?;
        }
        if self.tasks_file.is_none() {
            build_task_sets(self.domain, self.size, self.layout_seed)?;
        }
        Ok(())
    }

    pub fn task_set(&self) -> Result<TaskSet> {
        let set = match &self.tasks_file {
            Some(path) => TaskSet::load(path)?,
            None => build_task_sets(self.domain, self.size, self.layout_seed)?,
        };
        if set.source[0].kind != self.domain {
            return Err(Error::Config("task file domain differs from the config".into()));
        }
        Ok(set)
    }

    /// Target-phase settings for one mode and target task: explicit override,
    /// else the published value, else the shared `target.ppo` values.
    pub fn target_ppo(&self, mode: Mode, target: usize) -> PpoConfig {
        let mut ppo = self.target.ppo.clone();
        let t = self
            .target
            .tuning
            .get(&mode)
            .copied()
            .or_else(|| reported_tuning(self.domain, self.size, mode, target));
        if let Some(t) = t {
            ppo.clip_epsilon = t.clip_epsilon;
            ppo.entropy_coef = t.entropy_coef;
            ppo.learning_rate = t.learning_rate;
        }
        ppo
    }
}
