//! Fully connected ReLU networks with hand-written backpropagation.

mod init;
mod weights;

pub use init::{init_mlp, init_policy, init_value, InitScheme};
pub use weights::{load_policy, save_policy, HeadKind, WeightFile, WEIGHT_FORMAT, WEIGHT_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights `W` (`outputs x inputs`, row-major) and biases `B` between two
/// consecutive layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl LayerParams {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        LayerParams {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    pub fn from_rows(rows: &[&[f64]], biases: &[f64]) -> Self {
        let outputs = rows.len();
        let inputs = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == inputs), "ragged weight rows");
        assert_eq!(biases.len(), outputs, "bias length");
        LayerParams {
            inputs,
            outputs,
            weights: rows.iter().flat_map(|r| r.iter().copied()).collect(),
            biases: biases.to_vec(),
        }
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.weights[k * self.inputs..(k + 1) * self.inputs]
    }

    /// `W x + B`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.inputs);
        (0..self.outputs)
            .map(|k| self.biases[k] + dot(self.row(k), x))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|v| v.is_finite())
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&l| l - lse).collect()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Activations recorded by [`Mlp::forward_cached`] for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer (`inputs[0]` is the network input).
    pub inputs: Vec<Vec<f64>>,
    /// Pre-activation output of each layer.
    pub pre: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.pre.last().expect("network has at least one layer")
    }
}

/// ReLU on every hidden layer, identity on the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<LayerParams>,
}

impl Mlp {
    pub fn new(layers: Vec<LayerParams>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::Shape(format!(
                    "layer {i} emits {} values but layer {} expects {}",
                    pair[0].outputs,
                    i + 1,
                    pair[1].inputs
                )));
            }
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(Error::Shape(format!("layer {i} parameter arrays do not match its size")));
            }
        }
        Ok(Mlp { layers })
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    /// Widths of every layer including input and output.
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_width())
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.outputs)
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(LayerParams::is_finite)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_width() {
            return Err(Error::Shape(format!(
                "input has {} values, network expects {}",
                x.len(),
                self.input_width()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut a = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(&a);
            a = if i < last { z.into_iter().map(relu).collect() } else { z };
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("network output is not finite".into()));
        }
        Ok(a)
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(&a);
            let next = if i < last {
                z.iter().copied().map(relu).collect()
            } else {
                Vec::new()
            };
            inputs.push(std::mem::replace(&mut a, next));
            pre.push(z);
        }
        let cache = ForwardCache { inputs, pre };
        if cache.output().iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("network output is not finite".into()));
        }
        Ok(cache)
    }

    /// Accumulates `d loss / d params` into `grad` given `d loss / d output`.
    pub fn backward(&self, cache: &ForwardCache, d_output: &[f64], grad: &mut Mlp) {
        let mut delta = d_output.to_vec();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let g = &mut grad.layers[i];
            let input = &cache.inputs[i];
            for k in 0..layer.outputs {
                let d = delta[k];
                if d == 0.0 {
                    continue;
                }
                g.biases[k] += d;
                let row = &mut g.weights[k * layer.inputs..(k + 1) * layer.inputs];
                for (w, &x) in row.iter_mut().zip(input) {
                    *w += d * x;
                }
            }
            if i == 0 {
                break;
            }
            let below = &cache.pre[i - 1];
            let mut prev = vec![0.0; layer.inputs];
            for k in 0..layer.outputs {
                let d = delta[k];
                if d == 0.0 {
                    continue;
                }
                for (p, &w) in prev.iter_mut().zip(layer.row(k)) {
                    *p += d * w;
                }
            }
            // ReLU derivative; zero pre-activation counts as inactive.
            for (p, &z) in prev.iter_mut().zip(below) {
                if z <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }

    pub fn zeros_like(&self) -> Mlp {
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams::zeros(l.inputs, l.outputs))
                .collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(LayerParams::param_count).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            v.extend_from_slice(&l.weights);
            v.extend_from_slice(&l.biases);
        }
        v
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn set_flat(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.param_count());
        for (p, &v) in self.params_mut().zip(values) {
            *p = v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    /// One logit per action.
    Softmax,
    /// A single logit `z` for two actions: `P(1) = sigmoid(z)`.
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub probs: Vec<f64>,
    /// Pre-activations of the first hidden layer.
    pub hidden_pre: Vec<f64>,
}

/// Categorical policy network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpPolicy {
    pub net: Mlp,
    pub head: Head,
}

impl MlpPolicy {
    pub fn new(net: Mlp, head: Head) -> Result<Self> {
        if head == Head::Sigmoid && net.output_width() != 1 {
            return Err(Error::Shape(format!(
                "sigmoid head needs one output, network has {}",
                net.output_width()
            )));
        }
        Ok(MlpPolicy { net, head })
    }

    pub fn n_actions(&self) -> usize {
        match self.head {
            Head::Softmax => self.net.output_width(),
            Head::Sigmoid => 2,
        }
    }

    pub fn obs_len(&self) -> usize {
        self.net.input_width()
    }

    /// Hidden width when the network has exactly one hidden layer.
    pub fn single_hidden_width(&self) -> Option<usize> {
        (self.net.layers.len() == 2).then(|| self.net.layers[0].outputs)
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.net.forward(x)
    }

    pub fn forward(&self, x: &[f64]) -> Result<PolicyOutput> {
        let cache = self.net.forward_cached(x)?;
        let probs = self.head.distribution(cache.output());
        let hidden_pre = if self.net.layers.len() > 1 {
            cache.pre[0].clone()
        } else {
            Vec::new()
        };
        Ok(PolicyOutput { probs, hidden_pre })
    }

    pub fn greedy_action(&self, x: &[f64]) -> Result<usize> {
        Ok(self.head.greedy(&self.logits(x)?))
    }
}

impl Head {
    pub fn distribution(self, pre_head: &[f64]) -> Vec<f64> {
        match self {
            Head::Softmax => softmax(pre_head),
            Head::Sigmoid => {
                let p = sigmoid(pre_head[0]);
                vec![1.0 - p, p]
            }
        }
    }

    /// Greedy action from the pre-head output; ties go to the lowest index.
    pub fn greedy(self, pre_head: &[f64]) -> usize {
        match self {
            Head::Softmax => argmax(pre_head),
            Head::Sigmoid => usize::from(pre_head[0] > 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueNet {
    pub net: Mlp,
}

impl ValueNet {
    pub fn new(net: Mlp) -> Result<Self> {
        if net.output_width() != 1 {
            return Err(Error::Shape("value network must have one output".into()));
        }
        Ok(ValueNet { net })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.net.forward(x)?[0])
    }
}
