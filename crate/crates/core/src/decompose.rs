//! Neural-tree view of one-hidden-layer ReLU policies and the sub-policies
//! obtained by clamping hidden units.
//!
//! Fixing the activation of every hidden unit turns the network into an
//! affine map of the input followed by the output head. Walking the units in
//! index order gives a full binary tree of depth `d` whose internal nodes test
//! `w_k . x + b_k <= 0` and whose leaves hold the composed affine map. A
//! sub-tree is described by an [`ActivationMask`]: the units above it are
//! clamped on or off, the rest stay free. All `3^d` masks together cover the
//! sub-trees of every unit ordering.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{dot, relu, Head, MlpPolicy};

pub const DEFAULT_MAX_HIDDEN: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnitState {
    Free,
    ClampedOff,
    ClampedOn,
}

impl UnitState {
    fn symbol(self) -> char {
        match self {
            UnitState::Free => 'F',
            UnitState::ClampedOff => '0',
            UnitState::ClampedOn => '1',
        }
    }
}

/// Per hidden unit: free, clamped inactive, or clamped active.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationMask(pub Vec<UnitState>);

impl ActivationMask {
    pub fn all_free(width: usize) -> Self {
        ActivationMask(vec![UnitState::Free; width])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_all_free(&self) -> bool {
        self.0.iter().all(|s| *s == UnitState::Free)
    }

    pub fn is_fully_clamped(&self) -> bool {
        self.0.iter().all(|s| *s != UnitState::Free)
    }

    /// The `index`-th mask of width `width` in enumeration order: base-3
    /// digits with unit 0 most significant, digit 0 = free, 1 = off, 2 = on.
    /// Index 0 is the all-free mask.
    pub fn from_index(mut index: usize, width: usize) -> Self {
        let mut states = vec![UnitState::Free; width];
        for k in (0..width).rev() {
            states[k] = match index % 3 {
                0 => UnitState::Free,
                1 => UnitState::ClampedOff,
                _ => UnitState::ClampedOn,
            };
            index /= 3;
        }
        ActivationMask(states)
    }

    /// Output of hidden unit `k` given its pre-activation.
    #[inline]
    pub fn unit_output(&self, k: usize, z: f64) -> f64 {
        match self.0[k] {
            UnitState::Free => relu(z),
            UnitState::ClampedOff => 0.0,
            UnitState::ClampedOn => z,
        }
    }
}

impl fmt::Display for ActivationMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for ActivationMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'F' | 'f' => Ok(UnitState::Free),
                '0' => Ok(UnitState::ClampedOff),
                '1' => Ok(UnitState::ClampedOn),
                other => Err(Error::Parse {
                    location: format!("mask `{s}`"),
                    message: format!("unexpected symbol `{other}`"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(ActivationMask)
    }
}

impl Serialize for ActivationMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ActivationMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn require_single_hidden(policy: &MlpPolicy) -> Result<usize> {
    policy.single_hidden_width().ok_or_else(|| {
        Error::UnsupportedArchitecture(format!(
            "decomposition needs exactly one hidden layer, network has {}",
            policy.net.layers.len() - 1
        ))
    })
}

/// Output-layer pre-activation of the masked network at `x`.
pub fn masked_pre_head(policy: &MlpPolicy, mask: &ActivationMask, x: &[f64]) -> Result<Vec<f64>> {
    let width = require_single_hidden(policy)?;
    if mask.len() != width {
        return Err(Error::Shape(format!(
            "mask covers {} units, hidden layer has {width}",
            mask.len()
        )));
    }
    let hidden = &policy.net.layers[0];
    if x.len() != hidden.inputs {
        return Err(Error::Shape(format!(
            "input has {} values, network expects {}",
            x.len(),
            hidden.inputs
        )));
    }
    let z = hidden.apply(x);
    Ok(masked_pre_head_from_hidden(policy, mask, &z))
}

/// Same as [`masked_pre_head`] but starting from precomputed hidden
/// pre-activations `z`.
pub fn masked_pre_head_from_hidden(policy: &MlpPolicy, mask: &ActivationMask, z: &[f64]) -> Vec<f64> {
    let out = &policy.net.layers[1];
    let a: Vec<f64> = z
        .iter()
        .enumerate()
        .map(|(k, &zk)| mask.unit_output(k, zk))
        .collect();
    out.apply(&a)
}

/// A policy obtained by applying an activation mask to a source policy.
#[derive(Debug, Clone)]
pub struct SubPolicy {
    pub policy: Arc<MlpPolicy>,
    pub mask: ActivationMask,
    pub source_task: usize,
}

impl SubPolicy {
    pub fn new(policy: Arc<MlpPolicy>, mask: ActivationMask, source_task: usize) -> Result<Self> {
        let width = require_single_hidden(&policy)?;
        if mask.len() != width {
            return Err(Error::Shape(format!(
                "mask covers {} units, hidden layer has {width}",
                mask.len()
            )));
        }
        Ok(SubPolicy {
            policy,
            mask,
            source_task,
        })
    }

    pub fn pre_head(&self, x: &[f64]) -> Result<Vec<f64>> {
        masked_pre_head(&self.policy, &self.mask, x)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.policy.head.distribution(&self.pre_head(x)?))
    }

    /// Argmax of the pre-head output; ties go to the lowest index.
    pub fn greedy_action(&self, x: &[f64]) -> Result<usize> {
        Ok(self.policy.head.greedy(&self.pre_head(x)?))
    }
}

/// Every mask-indexed sub-policy of `policy`, all-free mask first.
pub fn enumerate_subpolicies(
    policy: Arc<MlpPolicy>,
    source_task: usize,
    max_hidden: usize,
) -> Result<Vec<SubPolicy>> {
    let width = require_single_hidden(&policy)?;
    if width > max_hidden {
        return Err(Error::EnumerationCap {
            hidden: width,
            cap: max_hidden,
        });
    }
    let count = 3usize.pow(width as u32);
    Ok((0..count)
        .map(|i| SubPolicy {
            policy: Arc::clone(&policy),
            mask: ActivationMask::from_index(i, width),
            source_task,
        })
        .collect())
}

/// The undecomposed policy as its only sub-policy.
pub fn whole_policy(policy: Arc<MlpPolicy>, source_task: usize) -> Result<SubPolicy> {
    let width = require_single_hidden(&policy)?;
    SubPolicy::new(policy, ActivationMask::all_free(width), source_task)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    /// Tests `coeffs . x + offset <= 0` (left) for hidden unit `unit`.
    Internal {
        unit: usize,
        coeffs: Vec<f64>,
        offset: f64,
        left: usize,
        right: usize,
    },
    /// Output pre-activation `coeffs x + offset` (`coeffs` is
    /// `outputs x inputs`, row-major) for one activation pattern.
    Leaf {
        pattern: Vec<bool>,
        coeffs: Vec<f64>,
        offset: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct NeuralTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
    pub depth: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub head: Head,
}

pub fn build_neural_tree(policy: &MlpPolicy) -> Result<NeuralTree> {
    let depth = require_single_hidden(policy)?;
    if depth > DEFAULT_MAX_HIDDEN {
        return Err(Error::EnumerationCap {
            hidden: depth,
            cap: DEFAULT_MAX_HIDDEN,
        });
    }
    let hidden = &policy.net.layers[0];
    let out = &policy.net.layers[1];
    let mut tree = NeuralTree {
        nodes: Vec::with_capacity((1 << (depth + 1)) - 1),
        root: 0,
        depth,
        inputs: hidden.inputs,
        outputs: out.outputs,
        head: policy.head,
    };
    let mut pattern = Vec::with_capacity(depth);
    tree.root = grow(&mut tree, policy, &mut pattern);
    Ok(tree)
}

fn grow(tree: &mut NeuralTree, policy: &MlpPolicy, pattern: &mut Vec<bool>) -> usize {
    let hidden = &policy.net.layers[0];
    let out = &policy.net.layers[1];
    let unit = pattern.len();
    if unit == tree.depth {
        let mut coeffs = vec![0.0; out.outputs * hidden.inputs];
        let mut offset = out.biases.clone();
        for o in 0..out.outputs {
            for (k, &active) in pattern.iter().enumerate() {
                if !active {
                    continue;
                }
                let w = out.weights[o * out.inputs + k];
                for (c, &h) in coeffs[o * hidden.inputs..(o + 1) * hidden.inputs]
                    .iter_mut()
                    .zip(hidden.row(k))
                {
                    *c += w * h;
                }
                offset[o] += w * hidden.biases[k];
            }
        }
        tree.nodes.push(TreeNode::Leaf {
            pattern: pattern.clone(),
            coeffs,
            offset,
        });
        return tree.nodes.len() - 1;
    }
    let id = tree.nodes.len();
    tree.nodes.push(TreeNode::Internal {
        unit,
        coeffs: hidden.row(unit).to_vec(),
        offset: hidden.biases[unit],
        left: usize::MAX,
        right: usize::MAX,
    });
    pattern.push(false);
    let l = grow(tree, policy, pattern);
    pattern.pop();
    pattern.push(true);
    let r = grow(tree, policy, pattern);
    pattern.pop();
    if let TreeNode::Internal { left, right, .. } = &mut tree.nodes[id] {
        *left = l;
        *right = r;
    }
    id
}

impl NeuralTree {
    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    /// Leaves from left to right.
    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            match &self.nodes[id] {
                TreeNode::Internal { left, right, .. } => {
                    stack.push(*right);
                    stack.push(*left);
                }
                leaf => out.push(leaf),
            }
        }
        out
    }

    /// Leaf reached by `x`.
    pub fn route(&self, x: &[f64]) -> Result<&TreeNode> {
        if x.len() != self.inputs {
            return Err(Error::Shape(format!(
                "input has {} values, tree expects {}",
                x.len(),
                self.inputs
            )));
        }
        let mut id = self.root;
        loop {
            match &self.nodes[id] {
                TreeNode::Internal {
                    coeffs,
                    offset,
                    left,
                    right,
                    ..
                } => {
                    id = if dot(coeffs, x) + offset <= 0.0 { *left } else { *right };
                }
                leaf => return Ok(leaf),
            }
        }
    }

    pub fn pre_head(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.route(x)? {
            TreeNode::Leaf { coeffs, offset, .. } => Ok((0..self.outputs)
                .map(|o| offset[o] + dot(&coeffs[o * self.inputs..(o + 1) * self.inputs], x))
                .collect()),
            TreeNode::Internal { .. } => unreachable!("route always ends at a leaf"),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.head.distribution(&self.pre_head(x)?))
    }

    /// Indented text dump with every node as a linear form of `x1..xn`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        self.dump_node(self.root, 0, &mut s);
        s
    }

    fn dump_node(&self, id: usize, indent: usize, s: &mut String) {
        let pad = "  ".repeat(indent);
        match &self.nodes[id] {
            TreeNode::Internal {
                unit,
                coeffs,
                offset,
                left,
                right,
            } => {
                s.push_str(&format!("{pad}h{}: {} <= 0\n", unit + 1, linear_form(coeffs, *offset)));
                self.dump_node(*left, indent + 1, s);
                self.dump_node(*right, indent + 1, s);
            }
            TreeNode::Leaf {
                pattern,
                coeffs,
                offset,
            } => {
                let bits: String = pattern.iter().map(|&b| if b { '1' } else { '0' }).collect();
                let forms: Vec<String> = (0..self.outputs)
                    .map(|o| {
                        linear_form(&coeffs[o * self.inputs..(o + 1) * self.inputs], offset[o])
                    })
                    .collect();
                let head = match self.head {
                    Head::Softmax => "softmax",
                    Head::Sigmoid => "sigmoid",
                };
                s.push_str(&format!("{pad}[{bits}] {head}({})\n", forms.join(", ")));
            }
        }
    }
}

/// Renders `c . x + b`, e.g. `-2x1 - x2 + 2`.
pub fn linear_form(coeffs: &[f64], offset: f64) -> String {
    let mut s = String::new();
    let mut term = |c: f64, body: String| {
        let mag = c.abs();
        let text = if body.is_empty() || mag != 1.0 {
            format!("{mag}{body}")
        } else {
            body
        };
        if s.is_empty() {
            if c < 0.0 {
                s.push('-');
            }
        } else {
            s.push_str(if c < 0.0 { " - " } else { " + " });
        }
        s.push_str(&text);
    };
    for (i, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            term(c, format!("x{}", i + 1));
        }
    }
    if offset != 0.0 {
        term(offset, String::new());
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}
