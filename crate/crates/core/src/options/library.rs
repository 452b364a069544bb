use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{CandidateSet, OptionBehavior, OptionDef, SelectionResult};
use crate::decompose::{ActivationMask, SubPolicy};
use crate::error::{Error, Result};
use crate::nn::load_policy;

pub const LIBRARY_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LibraryEntry {
    Subpolicy {
        source_task: usize,
        mask: ActivationMask,
        z: usize,
        /// Source policy weights, relative to the library file.
        weights: PathBuf,
    },
    Sequence { actions: Vec<usize> },
}

/// On-disk option set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionLibrary {
    pub version: u32,
    pub n_primitives: usize,
    #[serde(default, rename = "option")]
    pub options: Vec<LibraryEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LogRow {
    iteration: usize,
    accepted_candidate_id: Option<usize>,
    total_loss: f64,
    ln_total_loss: f64,
    source_task: Option<usize>,
    z: Option<usize>,
    mask: Option<String>,
    scored_tasks: String,
}

impl OptionLibrary {
    pub fn empty(n_primitives: usize) -> Self {
        OptionLibrary {
            version: LIBRARY_VERSION,
            n_primitives,
            options: Vec::new(),
        }
    }

    /// Library of the accepted candidates. `weights[task]` is the weight file
    /// of that task's source policy.
    pub fn from_selection(
        set: &CandidateSet,
        result: &SelectionResult,
        n_primitives: usize,
        weights: &HashMap<usize, PathBuf>,
    ) -> Result<Self> {
        let mut lib = Self::empty(n_primitives);
        for &id in &result.selected {
            let sub = set.subpolicy(id);
            let path = weights.get(&sub.source_task).ok_or_else(|| {
                Error::Config(format!("no weight file for source task {}", sub.source_task))
            })?;
            lib.options.push(LibraryEntry::Subpolicy {
                source_task: sub.source_task,
                mask: sub.mask.clone(),
                z: set.candidates[id].z,
                weights: path.clone(),
            });
        }
        Ok(lib)
    }

    pub fn from_options(options: &[OptionDef], n_primitives: usize) -> Result<Self> {
        let mut lib = Self::empty(n_primitives);
        for o in options {
            match &o.behavior {
                OptionBehavior::Sequence(actions) => lib.options.push(LibraryEntry::Sequence {
                    actions: actions.clone(),
                }),
                OptionBehavior::SubPolicy(_) => {
                    return Err(Error::Config("sub-policy options need their weight paths".into()))
                }
            }
        }
        Ok(lib)
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let lib: OptionLibrary = toml::from_str(text)?;
        if lib.version != LIBRARY_VERSION {
            return Err(Error::Schema(format!(
                "option library version {} (expected {LIBRARY_VERSION})",
                lib.version
            )));
        }
        Ok(lib)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Builds the options, reading weight files relative to `base`.
    pub fn resolve(&self, base: &Path) -> Result<Vec<OptionDef>> {
        let mut cache = HashMap::new();
        let mut out = Vec::with_capacity(self.options.len());
        for entry in &self.options {
            match entry {
                LibraryEntry::Sequence { actions } => {
                    if actions.is_empty() || actions.iter().any(|&a| a >= self.n_primitives) {
                        return Err(Error::Schema(format!("bad action sequence {actions:?}")));
                    }
                    out.push(OptionDef::from_sequence(actions.clone()));
                }
                LibraryEntry::Subpolicy {
                    source_task,
                    mask,
                    z,
                    weights,
                } => {
                    if *z == 0 {
                        return Err(Error::Schema("option loop length must be >= 1".into()));
                    }
                    let path = base.join(weights);
                    let policy = match cache.get(&path) {
                        Some(p) => Arc::clone(p),
                        None => {
                            let p = Arc::new(load_policy(&path)?);
                            if p.n_actions() != self.n_primitives {
                                return Err(Error::Schema(format!(
                                    "{} has {} actions, library expects {}",
                                    path.display(),
                                    p.n_actions(),
                                    self.n_primitives
                                )));
                            }
                            cache.insert(path.clone(), Arc::clone(&p));
                            p
                        }
                    };
                    let sub = SubPolicy::new(policy, mask.clone(), *source_task)?;
                    out.push(OptionDef::from_subpolicy(sub, *z));
                }
            }
        }
        Ok(out)
    }
}

/// One row per selection step: the baseline, then each accepted option.
pub fn write_selection_log(path: &Path, set: &CandidateSet, result: &SelectionResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for step in &result.steps {
        let sub = step.candidate.map(|id| set.subpolicy(id));
        w.serialize(LogRow {
            iteration: step.iteration,
            accepted_candidate_id: step.candidate,
            total_loss: step.log_total_loss.exp(),
            ln_total_loss: step.log_total_loss,
            source_task: sub.map(|s| s.source_task),
            z: step.candidate.map(|id| set.candidates[id].z),
            mask: sub.map(|s| s.mask.to_string()),
            scored_tasks: step
                .scored_tasks
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `(iteration, accepted id, ln total loss)` per row of a selection log.
pub fn read_selection_log(path: &Path) -> Result<Vec<(usize, Option<usize>, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: LogRow = row?;
        out.push((row.iteration, row.accepted_candidate_id, row.ln_total_loss));
    }
    Ok(out)
}
