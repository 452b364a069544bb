//! Versioned JSON weight files. Numbers are written in their shortest
//! round-trip decimal form, so save/load is bit exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Head, LayerParams, Mlp, MlpPolicy, ValueNet};
use crate::error::{Error, Result};

pub const WEIGHT_FORMAT: &str = "decopt-weights";
pub const WEIGHT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Softmax,
    Sigmoid,
    /// Scalar value output.
    Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileLayer {
    /// Row-major, `outputs x inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFile {
    pub format: String,
    pub version: u32,
    pub head: HeadKind,
    /// Width of every layer, input first.
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<FileLayer>,
}

impl WeightFile {
    fn from_mlp(net: &Mlp, head: HeadKind) -> Self {
        WeightFile {
            format: WEIGHT_FORMAT.to_string(),
            version: WEIGHT_VERSION,
            head,
            layer_sizes: net.layer_sizes(),
            layers: net
                .layers
                .iter()
                .map(|l| FileLayer {
                    weights: l.weights.clone(),
                    biases: l.biases.clone(),
                })
                .collect(),
        }
    }

    pub fn from_policy(policy: &MlpPolicy) -> Self {
        let head = match policy.head {
            Head::Softmax => HeadKind::Softmax,
            Head::Sigmoid => HeadKind::Sigmoid,
        };
        Self::from_mlp(&policy.net, head)
    }

    pub fn from_value(value: &ValueNet) -> Self {
        Self::from_mlp(&value.net, HeadKind::Value)
    }

    fn to_mlp(&self) -> Result<Mlp> {
        if self.format != WEIGHT_FORMAT {
            return Err(Error::Schema(format!("unknown format tag `{}`", self.format)));
        }
        if self.version != WEIGHT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported weight file version {} (expected {WEIGHT_VERSION})",
                self.version
            )));
        }
        if self.layer_sizes.len() != self.layers.len() + 1 || self.layers.is_empty() {
            return Err(Error::Schema(format!(
                "{} layer sizes listed for {} layers",
                self.layer_sizes.len(),
                self.layers.len()
            )));
        }
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let (inputs, outputs) = (self.layer_sizes[i], self.layer_sizes[i + 1]);
            if layer.weights.len() != inputs * outputs {
                return Err(Error::Schema(format!(
                    "layer {i}: expected {inputs}x{outputs} = {} weights, found {}",
                    inputs * outputs,
                    layer.weights.len()
                )));
            }
            if layer.biases.len() != outputs {
                return Err(Error::Schema(format!(
                    "layer {i}: expected {outputs} biases, found {}",
                    layer.biases.len()
                )));
            }
            out.push(LayerParams {
                inputs,
                outputs,
                weights: layer.weights.clone(),
                biases: layer.biases.clone(),
            });
        }
        let net = Mlp::new(out)?;
        if !net.is_finite() {
            return Err(Error::Numeric("weight file contains non-finite parameters".into()));
        }
        Ok(net)
    }

    pub fn to_policy(&self) -> Result<MlpPolicy> {
        let head = match self.head {
            HeadKind::Softmax => Head::Softmax,
            HeadKind::Sigmoid => Head::Sigmoid,
            HeadKind::Value => {
                return Err(Error::Schema("file holds a value network, not a policy".into()))
            }
        };
        MlpPolicy::new(self.to_mlp()?, head).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_value(&self) -> Result<ValueNet> {
        if self.head != HeadKind::Value {
            return Err(Error::Schema("file holds a policy, not a value network".into()));
        }
        ValueNet::new(self.to_mlp()?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("weight files always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub fn save_policy(policy: &MlpPolicy, path: &Path) -> Result<()> {
    WeightFile::from_policy(policy).save(path)
}

pub fn load_policy(path: &Path) -> Result<MlpPolicy> {
    WeightFile::load(path)?.to_policy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::tests::figure_one;
    use crate::nn::{init_policy, InitScheme};
    use rand::{Rng, SeedableRng};

    #[test]
    fn figure_one_round_trip() {
        let p = figure_one();
        let text = WeightFile::from_policy(&p).to_json();
        let q = WeightFile::from_json(&text).unwrap().to_policy().unwrap();
        assert_eq!(p, q);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            assert_eq!(p.forward(&x).unwrap(), q.forward(&x).unwrap());
        }
    }

    #[test]
    fn random_policy_round_trip_is_bit_exact() {
        let p = init_policy(27, &[6], 3, InitScheme::default(), 4);
        let q = WeightFile::from_json(&WeightFile::from_policy(&p).to_json())
            .unwrap()
            .to_policy()
            .unwrap();
        for (a, b) in p.net.flat().iter().zip(q.net.flat()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let text = WeightFile::from_policy(&figure_one()).to_json();
        let cut = &text[..text.len() / 2];
        assert!(matches!(WeightFile::from_json(cut), Err(Error::Parse { .. })));
    }

    #[test]
    fn size_mismatch_names_the_layer() {
        let mut f = WeightFile::from_policy(&figure_one());
        f.layers[1].weights.push(0.5);
        match f.to_policy() {
            Err(Error::Schema(msg)) => assert!(msg.contains("layer 1"), "{msg}"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn version_checked() {
        let mut f = WeightFile::from_policy(&figure_one());
        f.version = 9;
        assert!(matches!(f.to_policy(), Err(Error::Schema(_))));
    }
}
