use super::{OptionDef, Trajectory};
use crate::error::Result;

/// Probability of each action under the uniform policy over primitives and
/// options.
pub fn uniform_probability(n_primitives: usize, n_options: usize) -> f64 {
    1.0 / (n_primitives + n_options) as f64
}

/// True iff `option` started in state `j` reproduces the recorded actions for
/// all of its `z` iterations without running past the terminal state.
pub fn is_applicable(option: &OptionDef, traj: &Trajectory, j: usize) -> Result<bool> {
    if j + option.z > traj.n_actions() {
        return Ok(false);
    }
    for k in 0..option.z {
        let t = j + k;
        if option.action_at(k, &traj.observations[t])? != traj.actions[t] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimal number of decisions needed to reach each state of a sequence with
/// `n_states` states, using primitives and the options whose loop lengths are
/// `zs`. `applicable(o, j)` says whether option `o` can be used in state `j`.
pub fn min_decisions(n_states: usize, zs: &[usize], mut applicable: impl FnMut(usize, usize) -> bool) -> Vec<usize> {
    let mut m: Vec<usize> = (0..n_states).collect();
    for j in 0..n_states {
        if j > 0 {
            m[j] = m[j].min(m[j - 1] + 1);
        }
        for (o, &z) in zs.iter().enumerate() {
            if j + z < n_states && applicable(o, j) {
                m[j + z] = m[j + z].min(m[j] + 1);
            }
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevinLoss {
    /// `table[j]` is the fewest decisions reaching state `j`.
    pub table: Vec<usize>,
    /// Natural log of the loss.
    pub log_loss: f64,
}

impl LevinLoss {
    /// `length * p^-decisions`, kept in log space until here.
    pub fn from_table(table: Vec<usize>, length: usize, p: f64) -> Self {
        let decisions = *table.last().expect("non-empty table");
        let log_loss = (length as f64).ln() - decisions as f64 * p.ln();
        LevinLoss { table, log_loss }
    }

    pub fn decisions(&self) -> usize {
        *self.table.last().expect("non-empty table")
    }

    pub fn loss(&self) -> f64 {
        self.log_loss.exp()
    }
}

/// Levin loss of the uniform policy with per-action probability `p` on
/// `traj`, when the options in `options` are available. The length factor is
/// the number of states in the sequence.
pub fn compute_loss(traj: &Trajectory, p: f64, options: &[OptionDef]) -> Result<LevinLoss> {
    let n = traj.n_states();
    let mut applicable = vec![vec![false; n]; options.len()];
    for (o, opt) in options.iter().enumerate() {
        for (j, slot) in applicable[o].iter_mut().enumerate() {
            *slot = is_applicable(opt, traj, j)?;
        }
    }
    let zs: Vec<usize> = options.iter().map(|o| o.z).collect();
    let table = min_decisions(n, &zs, |o, j| applicable[o][j]);
    Ok(LevinLoss::from_table(table, n, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Observation;

    fn fixture() -> (Trajectory, Vec<OptionDef>) {
        let obs = vec![Observation(vec![0.0]); 6];
        let traj = Trajectory::new(0, obs, vec![0, 0, 1, 1, 0]).unwrap();
        let options = vec![
            OptionDef::from_sequence(vec![0, 0]),
            OptionDef::from_sequence(vec![0, 1, 1]),
        ];
        (traj, options)
    }

    #[test]
    fn worked_example() {
        let (traj, options) = fixture();
        assert!(is_applicable(&options[0], &traj, 0).unwrap());
        assert!(!is_applicable(&options[0], &traj, 1).unwrap());
        assert!(is_applicable(&options[1], &traj, 1).unwrap());
        let p = uniform_probability(2, 2);
        assert_eq!(p, 0.25);
        let loss = compute_loss(&traj, p, &options).unwrap();
        assert_eq!(loss.table, vec![0, 1, 1, 2, 2, 3]);
        assert_eq!(loss.loss(), 384.0);
    }

    #[test]
    fn primitives_only() {
        let obs = vec![Observation(vec![0.0]); 5];
        let traj = Trajectory::new(0, obs, vec![2, 1, 0, 2]).unwrap();
        let loss = compute_loss(&traj, uniform_probability(3, 0), &[]).unwrap();
        assert_eq!(loss.decisions(), 4);
        assert!((loss.loss() - 5.0 * 81.0).abs() < 1e-9);
    }

    #[test]
    fn option_past_the_end_not_applicable() {
        let (traj, _) = fixture();
        let long = OptionDef::from_sequence(vec![1, 0]);
        assert!(is_applicable(&long, &traj, 3).unwrap());
        assert!(!is_applicable(&long, &traj, 4).unwrap());
        assert!(!is_applicable(&long, &traj, 5).unwrap());
    }

    #[test]
    fn log_space_does_not_overflow() {
        let t = LevinLoss::from_table(vec![0, 2000], 2001, 0.1);
        assert!(t.log_loss.is_finite());
        assert!(t.loss().is_infinite());
    }
}
