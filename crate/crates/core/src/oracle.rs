//! Brute-force reference for effective and integrated information.
//!
//! Everything here is computed from a joint table of consecutive states
//! obtained by enumerating every trajectory of length `t` and multiplying
//! per-node probabilities read straight from the laws. No transition or
//! backward matrix is built, and no helper from the main path is reused
//! beyond the state encoding (node `k` at bit `k - 1`).

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::marginalize::NodeSet;
use crate::network::ValidatedNetwork;
use crate::phi::Partition;

/// Enumerations above `2^ORACLE_MAX_BITS` trajectories are refused.
pub const ORACLE_MAX_BITS: usize = 24;

/// `p(X_{t-1} = x_j, X_t = x_i)` stored as `table[j][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub time: usize,
    nodes: usize,
    table: Vec<f64>,
}

impl JointTable {
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn get(&self, prev: usize, now: usize) -> f64 {
        self.table[(prev << self.nodes) | now]
    }

    pub fn total_mass(&self) -> f64 {
        self.table.iter().sum()
    }

    /// `p(X_{t-1} = x)`.
    pub fn prev_mass(&self, x: usize) -> f64 {
        (0..1usize << self.nodes).map(|i| self.get(x, i)).sum()
    }

    /// `p(X_t = x)`.
    pub fn now_mass(&self, x: usize) -> f64 {
        (0..1usize << self.nodes).map(|j| self.get(j, x)).sum()
    }
}

/// Probability of moving from `from` to `to` in one step, as the product of
/// each node's own law.
fn step_probability(net: &ValidatedNetwork, from: usize, to: usize) -> f64 {
    let mut prob = 1.0;
    for node in 0..net.node_count() {
        let mut config = 0usize;
        for (pos, &input) in net.inputs(node).iter().enumerate() {
            if from & (1 << input) != 0 {
                config |= 1 << pos;
            }
        }
        let on = net.table(node)[config];
        prob *= if to & (1 << node) != 0 { on } else { 1.0 - on };
    }
    prob
}

/// Exact joint of `(X_{t-1}, X_t)` by summing the weight of every trajectory
/// `x_0, …, x_t`.
pub fn oracle_joint(net: &ValidatedNetwork, p0: &Distribution, t: usize) -> Result<JointTable> {
    if t < 1 {
        return Err(Error::InvalidInstant { min: 1, found: t });
    }
    let n = net.node_count();
    if p0.len() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: p0.len(),
        });
    }
    let bits = n * (t + 1);
    if bits > ORACLE_MAX_BITS {
        return Err(Error::OracleCap {
            bits,
            limit: ORACLE_MAX_BITS,
        });
    }
    let mut table = vec![0.0; 1 << (2 * n)];
    let mut path = vec![0usize; t + 1];
    extend(net, p0, &mut path, 0, 1.0, &mut table);
    Ok(JointTable {
        time: t,
        nodes: n,
        table,
    })
}

fn extend(
    net: &ValidatedNetwork,
    p0: &Distribution,
    path: &mut [usize],
    depth: usize,
    weight: f64,
    table: &mut [f64],
) {
    let n = net.node_count();
    let t = path.len() - 1;
    for state in 0..1usize << n {
        let w = if depth == 0 {
            p0[state]
        } else {
            weight * step_probability(net, path[depth - 1], state)
        };
        if w == 0.0 {
            continue;
        }
        path[depth] = state;
        if depth == t {
            table[(path[t - 1] << n) | state] += w;
        } else {
            extend(net, p0, path, depth + 1, w, table);
        }
    }
}

fn restrict(state: usize, subset: NodeSet) -> usize {
    let mut out = 0;
    let mut pos = 0;
    for k in 0..32 {
        if subset.bits() & (1 << k) != 0 {
            if state & (1 << k) != 0 {
                out |= 1 << pos;
            }
            pos += 1;
        }
    }
    out
}

/// Effective information of sub-state `a` of `subset` from the joint alone:
/// `Σ_j p(A_{t-1}=j | A_t=a) log₂(p(A_{t-1}=j | A_t=a) / p(A_{t-1}=j))`.
pub fn oracle_subset_ei(joint: &JointTable, subset: NodeSet, a: usize) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let n = joint.nodes;
    let size = 1usize << subset.bits().count_ones();
    let mut pair = vec![0.0; size];
    let mut prior = vec![0.0; size];
    let mut observed = 0.0;
    for prev in 0..1usize << n {
        let j = restrict(prev, subset);
        for now in 0..1usize << n {
            let mass = joint.get(prev, now);
            prior[j] += mass;
            if restrict(now, subset) == a {
                pair[j] += mass;
                observed += mass;
            }
        }
    }
    if observed <= 0.0 {
        return Err(Error::Unobservable {
            subset,
            state: a,
            time: joint.time,
        });
    }
    let mut ei = 0.0;
    for j in 0..size {
        let cond = pair[j] / observed;
        if cond > 0.0 {
            ei += cond * (cond / prior[j]).log2();
        }
    }
    Ok(ei)
}

/// Effective information of the full state `x`.
pub fn oracle_ei(joint: &JointTable, x: usize) -> Result<f64> {
    let full = NodeSet::full(joint.nodes);
    oracle_subset_ei(joint, full, x)
}

/// Partition-dependent φ of `subset` in full state `x`.
pub fn oracle_phi(
    joint: &JointTable,
    subset: NodeSet,
    partition: &Partition,
    x: usize,
) -> Result<f64> {
    let whole = oracle_subset_ei(joint, subset, restrict(x, subset))?;
    let mut parts = 0.0;
    for &part in partition.parts() {
        parts += oracle_subset_ei(joint, part, restrict(x, part))?;
    }
    Ok(whole - parts)
}
