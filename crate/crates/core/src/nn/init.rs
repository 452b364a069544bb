use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Head, LayerParams, Mlp, MlpPolicy, ValueNet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitScheme {
    /// Orthogonal weight matrices scaled by a per-layer gain, zero biases.
    Orthogonal { hidden_gain: f64, output_gain: f64 },
    /// All parameters zero.
    Zero,
}

impl Default for InitScheme {
    fn default() -> Self {
        InitScheme::Orthogonal {
            hidden_gain: std::f64::consts::SQRT_2,
            output_gain: 0.01,
        }
    }
}

impl InitScheme {
    pub fn with_output_gain(self, gain: f64) -> Self {
        match self {
            InitScheme::Orthogonal { hidden_gain, .. } => InitScheme::Orthogonal {
                hidden_gain,
                output_gain: gain,
            },
            InitScheme::Zero => InitScheme::Zero,
        }
    }
}

/// `sizes` lists every layer width, input first.
pub fn init_mlp(sizes: &[usize], scheme: InitScheme, rng: &mut ChaCha8Rng) -> Mlp {
    assert!(sizes.len() >= 2, "need input and output widths");
    let n = sizes.len() - 1;
    let layers = (0..n)
        .map(|i| {
            let (inputs, outputs) = (sizes[i], sizes[i + 1]);
            match scheme {
                InitScheme::Zero => LayerParams::zeros(inputs, outputs),
                InitScheme::Orthogonal {
                    hidden_gain,
                    output_gain,
                } => {
                    let gain = if i + 1 == n { output_gain } else { hidden_gain };
                    LayerParams {
                        inputs,
                        outputs,
                        weights: orthogonal(outputs, inputs, gain, rng),
                        biases: vec![0.0; outputs],
                    }
                }
            }
        })
        .collect();
    Mlp::new(layers).expect("widths chain by construction")
}

/// Random `rows x cols` matrix with orthonormal rows (or columns, whichever
/// is the shorter side), times `gain`.
fn orthogonal(rows: usize, cols: usize, gain: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (short, long) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(short);
    while basis.len() < short {
        let mut v: Vec<f64> = (0..long).map(|_| StandardNormal.sample(rng)).collect();
        for b in &basis {
            let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut w = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            w[r * cols + c] = gain * if rows <= cols { basis[r][c] } else { basis[c][r] };
        }
    }
    w
}

pub fn init_policy(
    obs_len: usize,
    hidden: &[usize],
    n_actions: usize,
    scheme: InitScheme,
    seed: u64,
) -> MlpPolicy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<usize> = std::iter::once(obs_len)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(n_actions))
        .collect();
    MlpPolicy::new(init_mlp(&sizes, scheme, &mut rng), Head::Softmax).expect("softmax head")
}

/// Value networks use unit output gain.
pub fn init_value(obs_len: usize, hidden: &[usize], scheme: InitScheme, seed: u64) -> ValueNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<usize> = std::iter::once(obs_len)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(1))
        .collect();
    ValueNet::new(init_mlp(&sizes, scheme.with_output_gain(1.0), &mut rng)).expect("scalar output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_parameters() {
        let a = init_policy(27, &[6], 3, InitScheme::default(), 11);
        let b = init_policy(27, &[6], 3, InitScheme::default(), 11);
        assert_eq!(a, b);
        let c = init_policy(27, &[6], 3, InitScheme::default(), 12);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_scheme_is_uniform() {
        let p = init_policy(5, &[4], 3, InitScheme::Zero, 0);
        let probs = p.forward(&[1.0, 0.0, 0.5, 0.2, 0.0]).unwrap().probs;
        assert!(probs.iter().all(|&q| (q - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn orthogonal_rows_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = orthogonal(4, 7, 1.0, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = (0..7).map(|c| w[i * 7 + c] * w[j * 7 + c]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
        let w = orthogonal(7, 4, 2.0, &mut rng);
        for i in 0..4 {
            let d: f64 = (0..7).map(|r| w[r * 4 + i] * w[r * 4 + i]).sum();
            assert!((d - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_output_gain_is_near_uniform() {
        let p = init_policy(27, &[6], 3, InitScheme::default(), 99);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..27).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let x: Vec<f64> = x.iter().map(|v| v / n).collect();
            for q in p.forward(&x).unwrap().probs {
                worst = worst.max((q - 1.0 / 3.0).abs());
            }
        }
        assert!(worst < 1e-2, "max deviation {worst}");
    }
}
