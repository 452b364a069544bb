use serde::{Deserialize, Serialize};

use super::OptionDef;
use crate::decompose::SubPolicy;
use crate::error::{Error, Result};

/// One (sub-policy, loop length) pair of the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    /// Index into [`CandidateSet::subpolicies`].
    pub sub: usize,
    pub z: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateLimits {
    /// Upper bound on loop lengths, applied on top of the longest trajectory.
    pub max_z: Option<usize>,
    /// Refuse pools larger than this.
    pub max_pool: Option<usize>,
}

/// Every sub-policy paired with every loop length `1..=z_max`, indexed by
/// position (sub-policy major, `z` ascending).
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub subpolicies: Vec<SubPolicy>,
    pub candidates: Vec<Candidate>,
    pub z_max: usize,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn subpolicy(&self, id: usize) -> &SubPolicy {
        &self.subpolicies[self.candidates[id].sub]
    }

    pub fn source_task(&self, id: usize) -> usize {
        self.subpolicy(id).source_task
    }

    pub fn option(&self, id: usize) -> OptionDef {
        OptionDef::from_subpolicy(self.subpolicy(id).clone(), self.candidates[id].z)
    }
}

/// Pairs each sub-policy with loop lengths `1..=min(longest_trajectory, max_z)`.
pub fn generate_candidates(
    subpolicies: Vec<SubPolicy>,
    longest_trajectory: usize,
    limits: CandidateLimits,
) -> Result<CandidateSet> {
    let z_max = limits.max_z.map_or(longest_trajectory, |m| m.min(longest_trajectory));
    if z_max == 0 {
        return Err(Error::Config("candidate loop lengths need z_max >= 1".into()));
    }
    let total = subpolicies.len() * z_max;
    if let Some(cap) = limits.max_pool {
        if total > cap {
            return Err(Error::Config(format!(
                "candidate pool has {total} entries, cap is {cap}; lower max_z"
            )));
        }
    }
    let candidates = (0..subpolicies.len())
        .flat_map(|sub| (1..=z_max).map(move |z| Candidate { sub, z }))
        .collect();
    Ok(CandidateSet {
        subpolicies,
        candidates,
        z_max,
    })
}
