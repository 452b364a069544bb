use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

use super::levin::{min_decisions, uniform_probability, LevinLoss};
use super::{CandidateSet, Trajectory};
use crate::decompose::masked_pre_head_from_hidden;
use crate::error::{Error, Result};
use crate::nn::MlpPolicy;

/// Which trajectories a candidate is scored on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exclusion {
    /// Every trajectory is scored, but options extracted from a task are
    /// neither usable on that task's trajectory nor part of its action set.
    LeaveOwnTaskOut,
    /// Candidates come from tasks outside `validation_tasks` and are scored
    /// only on trajectories of `validation_tasks`.
    Split { validation_tasks: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionStep {
    pub iteration: usize,
    /// `None` for the primitives-only baseline row.
    pub candidate: Option<usize>,
    pub log_total_loss: f64,
    /// Tasks whose trajectories contributed to the total.
    pub scored_tasks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Accepted candidate ids in acceptance order.
    pub selected: Vec<usize>,
    /// Baseline first, then one step per accepted option.
    pub steps: Vec<SelectionStep>,
}

impl SelectionResult {
    pub fn baseline_log_loss(&self) -> f64 {
        self.steps[0].log_total_loss
    }

    pub fn final_log_loss(&self) -> f64 {
        self.steps.last().expect("baseline step").log_total_loss
    }
}

struct Scorer<'a> {
    set: &'a CandidateSet,
    trajectories: Vec<&'a Trajectory>,
    /// `runs[sub][i][j]`: how many consecutive recorded actions of trajectory
    /// `i` starting at state `j` the sub-policy's greedy action reproduces.
    runs: Vec<Vec<Vec<u32>>>,
    exclusion: &'a Exclusion,
    n_primitives: usize,
}

impl<'a> Scorer<'a> {
    fn new(
        set: &'a CandidateSet,
        trajectories: Vec<&'a Trajectory>,
        exclusion: &'a Exclusion,
        n_primitives: usize,
    ) -> Result<Self> {
        let mut hidden: HashMap<usize, Vec<Vec<Vec<f64>>>> = HashMap::new();
        for sub in &set.subpolicies {
            let key = policy_key(&sub.policy);
            if hidden.contains_key(&key) {
                continue;
            }
            let layer = &sub.policy.net.layers[0];
            let mut per_traj = Vec::with_capacity(trajectories.len());
            for traj in &trajectories {
                let mut zs = Vec::with_capacity(traj.n_actions());
                for obs in &traj.observations[..traj.n_actions()] {
                    if obs.len() != layer.inputs {
                        return Err(Error::Shape(format!(
                            "trajectory of task {} has {} features, policy of task {} expects {}",
                            traj.task,
                            obs.len(),
                            sub.source_task,
                            layer.inputs
                        )));
                    }
                    zs.push(layer.apply(obs));
                }
                per_traj.push(zs);
            }
            hidden.insert(key, per_traj);
        }
        let runs = set
            .subpolicies
            .par_iter()
            .map(|sub| {
                let zs = &hidden[&policy_key(&sub.policy)];
                trajectories
                    .iter()
                    .zip(zs)
                    .map(|(traj, zs)| {
                        let mut run = vec![0u32; traj.n_states()];
                        for j in (0..traj.n_actions()).rev() {
                            let pre = masked_pre_head_from_hidden(&sub.policy, &sub.mask, &zs[j]);
                            if sub.policy.head.greedy(&pre) == traj.actions[j] {
                                run[j] = run[j + 1] + 1;
                            }
                        }
                        run
                    })
                    .collect()
            })
            .collect();
        Ok(Scorer {
            set,
            trajectories,
            runs,
            exclusion,
            n_primitives,
        })
    }

    fn usable(&self, id: usize, traj: usize) -> bool {
        match self.exclusion {
            Exclusion::LeaveOwnTaskOut => self.set.source_task(id) != self.trajectories[traj].task,
            Exclusion::Split { .. } => true,
        }
    }

    fn helps_somewhere(&self, id: usize) -> bool {
        let c = self.set.candidates[id];
        c.z >= 2
            && (0..self.trajectories.len()).any(|i| {
                self.usable(id, i) && self.runs[c.sub][i].iter().any(|&r| r as usize >= c.z)
            })
    }

    /// Loss on trajectory `i` of the uniform policy over the primitives and
    /// those of `options` that may be used on it.
    fn traj_loss(&self, i: usize, options: &[usize]) -> LevinLoss {
        let traj = self.trajectories[i];
        let active: Vec<usize> = options.iter().copied().filter(|&id| self.usable(id, i)).collect();
        let zs: Vec<usize> = active.iter().map(|&id| self.set.candidates[id].z).collect();
        let table = min_decisions(traj.n_states(), &zs, |o, j| {
            let c = self.set.candidates[active[o]];
            self.runs[c.sub][i][j] as usize >= c.z
        });
        let p = uniform_probability(self.n_primitives, active.len());
        LevinLoss::from_table(table, traj.n_states(), p)
    }

    fn log_total(&self, options: &[usize]) -> f64 {
        let logs: Vec<f64> = (0..self.trajectories.len())
            .map(|i| self.traj_loss(i, options).log_loss)
            .collect();
        log_sum_exp(&logs)
    }
}

fn policy_key(policy: &Arc<MlpPolicy>) -> usize {
    Arc::as_ptr(policy) as usize
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Greedily adds the candidate that most reduces the summed Levin loss,
/// stopping when no candidate strictly reduces it. Ties prefer shorter loops,
/// then lower candidate ids.
pub fn greedy_select(
    set: &CandidateSet,
    trajectories: &[Trajectory],
    n_primitives: usize,
    exclusion: &Exclusion,
) -> Result<SelectionResult> {
    if trajectories.is_empty() {
        return Err(Error::Config("option selection needs at least one trajectory".into()));
    }
    let (scored, pool): (Vec<&Trajectory>, Vec<usize>) = match exclusion {
        Exclusion::LeaveOwnTaskOut => (trajectories.iter().collect(), (0..set.len()).collect()),
        Exclusion::Split { validation_tasks } => {
            let scored: Vec<&Trajectory> = trajectories
                .iter()
                .filter(|t| validation_tasks.contains(&t.task))
                .collect();
            if scored.is_empty() {
                return Err(Error::Config("no trajectory belongs to a validation task".into()));
            }
            let pool = (0..set.len())
                .filter(|&id| !validation_tasks.contains(&set.source_task(id)))
                .collect();
            (scored, pool)
        }
    };
    let mut scored_tasks: Vec<usize> = scored.iter().map(|t| t.task).collect();
    scored_tasks.sort_unstable();
    scored_tasks.dedup();

    let scorer = Scorer::new(set, scored, exclusion, n_primitives)?;
    let mut pool: Vec<usize> = pool.into_par_iter().filter(|&id| scorer.helps_somewhere(id)).collect();
    log::debug!("{} of {} candidates can shorten some trajectory", pool.len(), set.len());

    let mut selected = Vec::new();
    let mut current = scorer.log_total(&selected);
    let mut steps = vec![SelectionStep {
        iteration: 0,
        candidate: None,
        log_total_loss: current,
        scored_tasks: scored_tasks.clone(),
    }];
    loop {
        let best = pool
            .par_iter()
            .map(|&id| {
                let mut trial = selected.clone();
                trial.push(id);
                (scorer.log_total(&trial), set.candidates[id].z, id)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let Some((loss, _, id)) = best else { break };
        if loss >= current {
            break;
        }
        current = loss;
        selected.push(id);
        pool.retain(|&c| c != id);
        log::info!(
            "accepted candidate {id} (task {}, z {}), ln loss {loss:.4}",
            set.source_task(id),
            set.candidates[id].z
        );
        steps.push(SelectionStep {
            iteration: selected.len(),
            candidate: Some(id),
            log_total_loss: loss,
            scored_tasks: scored_tasks.clone(),
        });
    }
    Ok(SelectionResult { selected, steps })
}
