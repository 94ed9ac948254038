//! Probabilistic boolean networks and the state encoding.
//!
//! A network of `n` nodes has `2^n` states. Node `k` (1-based) occupies bit
//! `k - 1` of a state index, so node 1 is the least significant bit and the
//! bitstring `σ_n … σ_1` read left to right is the binary form of the index.
//!
//! Each node carries a law: a table giving, for every configuration of its
//! inputs, the probability that the node is in state 1 at the next instant.
//! The first-listed input is the least significant bit of the configuration
//! index.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of nodes; `2^12` states gives a 4096 x 4096
/// transition matrix.
pub const DEFAULT_MAX_NODES: usize = 12;

/// Probabilistic update law of one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeLaw {
    /// 1-based node id.
    pub id: usize,
    pub name: Option<String>,
    /// 1-based ids of the input nodes, first input = least significant bit.
    pub inputs: Vec<usize>,
    /// `table[c]` = probability of state 1 at the next instant given input
    /// configuration `c`.
    pub table: Vec<f64>,
}

impl NodeLaw {
    pub fn new(id: usize, inputs: Vec<usize>, table: Vec<f64>) -> Self {
        Self {
            id,
            name: None,
            inputs,
            table,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

/// An unvalidated collection of node laws.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Network {
    pub laws: Vec<NodeLaw>,
}

impl Network {
    pub fn new(laws: Vec<NodeLaw>) -> Self {
        Self { laws }
    }

    /// Checks every law and returns a network ready for analysis, using the
    /// default node cap.
    pub fn validate(&self) -> Result<ValidatedNetwork> {
        validate_network_with_limit(self, DEFAULT_MAX_NODES)
    }

    /// Builds a network in which every node reads every node (in id order)
    /// and the joint update is the deterministic map `next`.
    pub fn from_deterministic_map(nodes: usize, next: impl Fn(usize) -> usize) -> Self {
        Self::from_state_laws(nodes, |state, node| ((next(state) >> node) & 1) as f64)
    }

    /// Builds a network in which every node reads every node and
    /// `prob_one(state, k)` gives the probability that node `k` (0-based) is
    /// 1 after `state`.
    pub fn from_state_laws(nodes: usize, prob_one: impl Fn(usize, usize) -> f64) -> Self {
        let inputs: Vec<usize> = (1..=nodes).collect();
        let laws = (0..nodes)
            .map(|k| {
                let table = (0..1usize << nodes).map(|s| prob_one(s, k)).collect();
                NodeLaw::new(k + 1, inputs.clone(), table)
            })
            .collect();
        Self { laws }
    }
}

/// Validates with the default node cap.
pub fn validate_network(net: &Network) -> Result<ValidatedNetwork> {
    validate_network_with_limit(net, DEFAULT_MAX_NODES)
}

pub fn validate_network_with_limit(net: &Network, max_nodes: usize) -> Result<ValidatedNetwork> {
    let n = net.laws.len();
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    if n > max_nodes {
        return Err(Error::SizeCap {
            nodes: n,
            limit: max_nodes,
        });
    }

    let mut slots: Vec<Option<&NodeLaw>> = vec![None; n];
    for law in &net.laws {
        if law.id == 0 || law.id > n {
            // ids must be exactly 1..n; an id past n leaves some id without a law
            let missing = (1..=n)
                .find(|id| !net.laws.iter().any(|l| l.id == *id))
                .unwrap_or(n);
            return Err(Error::MissingNode { node: missing });
        }
        if slots[law.id - 1].is_some() {
            return Err(Error::DuplicateNode { node: law.id });
        }
        slots[law.id - 1] = Some(law);
    }

    let mut nodes = Vec::with_capacity(n);
    for (k, slot) in slots.into_iter().enumerate() {
        let law = slot.ok_or(Error::MissingNode { node: k + 1 })?;
        for &input in &law.inputs {
            if input == 0 || input > n {
                return Err(Error::DanglingInput {
                    node: law.id,
                    input,
                });
            }
        }
        let expected = 1usize
            .checked_shl(law.inputs.len() as u32)
            .filter(|_| law.inputs.len() < usize::BITS as usize)
            .unwrap_or(usize::MAX);
        if law.table.len() != expected {
            return Err(Error::TableLength {
                node: law.id,
                inputs: law.inputs.len(),
                found: law.table.len(),
                expected,
            });
        }
        if let Some((index, &value)) = law
            .table
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::ProbabilityOutOfRange {
                node: law.id,
                index,
                value,
            });
        }
        nodes.push(Node {
            name: law.name.clone().unwrap_or_else(|| law.id.to_string()),
            inputs: law.inputs.iter().map(|i| i - 1).collect(),
            table: law.table.clone(),
        });
    }
    Ok(ValidatedNetwork { nodes })
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    name: String,
    /// 0-based input indices.
    inputs: Vec<usize>,
    table: Vec<f64>,
}

/// A network whose laws satisfy every structural invariant. Nodes are stored
/// in id order and addressed by 0-based index.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedNetwork {
    nodes: Vec<Node>,
}

impl ValidatedNetwork {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of states, `2^n`.
    pub fn state_count(&self) -> usize {
        1 << self.nodes.len()
    }

    pub fn name(&self, node: usize) -> &str {
        &self.nodes[node].name
    }

    /// 0-based index of the node with the given name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// 0-based input indices of `node`.
    pub fn inputs(&self, node: usize) -> &[usize] {
        &self.nodes[node].inputs
    }

    pub fn table(&self, node: usize) -> &[f64] {
        &self.nodes[node].table
    }

    /// Directed edges `(u, v)` with `u` an input of `v`, 0-based.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(v, node)| node.inputs.iter().map(move |&u| (u, v)))
            .collect()
    }

    /// Input configuration of `node` when the network is in `state`.
    pub fn input_config(&self, node: usize, state: usize) -> usize {
        self.nodes[node]
            .inputs
            .iter()
            .enumerate()
            .fold(0, |acc, (pos, &input)| {
                acc | (((state >> input) & 1) << pos)
            })
    }

    /// Probability that `node` is 1 at the next instant given `state` now.
    pub fn prob_one(&self, node: usize, state: usize) -> f64 {
        self.nodes[node].table[self.input_config(node, state)]
    }

    pub fn is_deterministic(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.table.iter().all(|&p| p == 0.0 || p == 1.0))
    }

    /// Converts back to the unvalidated form, keeping names.
    pub fn to_network(&self) -> Network {
        let laws = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, node)| NodeLaw {
                id: k + 1,
                name: Some(node.name.clone()),
                inputs: node.inputs.iter().map(|i| i + 1).collect(),
                table: node.table.clone(),
            })
            .collect();
        Network { laws }
    }
}

/// Packs node bits (index 0 = node 1) into a state index.
pub fn encode_state(bits: &[bool]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (k, &b)| acc | ((b as usize) << k))
}

/// Unpacks a state index into `nodes` node bits (index 0 = node 1).
pub fn decode_state(state: usize, nodes: usize) -> Vec<bool> {
    (0..nodes).map(|k| (state >> k) & 1 == 1).collect()
}

/// Parses a bitstring written `σ_n … σ_1` (highest node first).
pub fn parse_bitstring(text: &str) -> Option<usize> {
    if text.is_empty() || text.len() > usize::BITS as usize - 1 {
        return None;
    }
    text.chars().try_fold(0usize, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}

/// Formats a state as `σ_n … σ_1`.
pub fn format_bitstring(state: usize, nodes: usize) -> String {
    (0..nodes)
        .rev()
        .map(|k| if (state >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}
