//! Projection of states, distributions and dynamics onto node subsets.
//!
//! A subset state packs the bits of the selected nodes in node order: the
//! lowest selected node becomes the least significant bit.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::distribution::Distribution;
use crate::dynamics::{BackwardMatrix, PartialRows, TransitionMatrix};
use crate::error::{Error, Result};

/// A set of nodes stored as a bitmask; bit `k` is node `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeSet(u32);

impl NodeSet {
    pub const fn from_bits(bits: u32) -> Self {
        Self(bits)
    }

    /// Set from 1-based node ids.
    pub fn from_ids(ids: &[usize]) -> Self {
        Self(ids.iter().fold(0, |acc, &id| {
            assert!((1..=32).contains(&id), "node id {id} out of range");
            acc | (1 << (id - 1))
        }))
    }

    /// Set from 0-based node indices.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Self(indices.into_iter().fold(0, |acc, k| acc | (1 << k)))
    }

    /// All nodes of an `n`-node network.
    pub fn full(n: usize) -> Self {
        Self(if n >= 32 { u32::MAX } else { (1 << n) - 1 })
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn contains(self, index: usize) -> bool {
        (self.0 >> index) & 1 == 1
    }

    pub const fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub const fn intersection(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    pub const fn difference(self, other: Self) -> Self {
        Self(self.0 & !other.0)
    }

    pub const fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// 0-based index of the lowest node, if any.
    pub fn lowest(self) -> Option<usize> {
        (!self.is_empty()).then(|| self.0.trailing_zeros() as usize)
    }

    /// 0-based node indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&k| self.contains(k))
    }

    /// Number of subset states, `2^|A|`.
    pub fn state_count(self) -> usize {
        1 << self.len()
    }

    /// `π_A(x)`: the bits of `state` at the positions in this set, compacted.
    pub fn project(self, state: usize) -> usize {
        self.indices()
            .enumerate()
            .fold(0, |acc, (pos, k)| acc | (((state >> k) & 1) << pos))
    }

    /// Inverse of [`project`](Self::project) on the nodes of the set; other
    /// bits are zero.
    pub fn embed(self, sub_state: usize) -> usize {
        self.indices()
            .enumerate()
            .fold(0, |acc, (pos, k)| acc | (((sub_state >> pos) & 1) << k))
    }

    pub(crate) fn check_within(self, nodes: usize) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptySubset);
        }
        if !self.is_subset_of(Self::full(nodes)) {
            return Err(Error::SubsetOutOfRange {
                subset: self,
                nodes,
            });
        }
        Ok(())
    }

    /// `π_A` for every full state of an `n`-node network.
    fn projection_table(self, nodes: usize) -> Vec<usize> {
        (0..1usize << nodes).map(|x| self.project(x)).collect()
    }

    /// 1-based ids.
    pub fn ids(self) -> Vec<usize> {
        self.indices().map(|k| k + 1).collect()
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, id) in self.ids().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.ids())
    }
}

/// Projects a full state onto a non-empty subset.
pub fn project_state(state: usize, subset: NodeSet) -> Result<usize> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    Ok(subset.project(state))
}

/// `q(a) = Σ_{x : π_A(x) = a} p(x)`.
pub fn marginal_distribution(p: &Distribution, subset: NodeSet) -> Result<Distribution> {
    subset.check_within(p.nodes())?;
    let mut q = vec![0.0; subset.state_count()];
    for (x, &px) in p.as_slice().iter().enumerate() {
        q[subset.project(x)] += px;
    }
    Ok(Distribution::from_raw(q))
}

/// Joint law of a subset's state at two consecutive instants:
/// `table[a][b] = p(A_t = a, A_{t+1} = b)` where `t` is the instant of the
/// distribution it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetJoint {
    subset: NodeSet,
    table: Vec<f64>,
}

impl SubsetJoint {
    /// `Σ_{x : π(x) = a} p(x) Σ_{y : π(y) = b} s_xy`.
    pub fn new(s: &TransitionMatrix, p: &Distribution, subset: NodeSet) -> Result<Self> {
        check_shapes(s, p, subset)?;
        let dim = subset.state_count();
        let proj = subset.projection_table(s.nodes());
        let mut table = vec![0.0; dim * dim];
        for (x, &px) in p.as_slice().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let base = proj[x] * dim;
            for (y, &sxy) in s.row(x).iter().enumerate() {
                table[base + proj[y]] += px * sxy;
            }
        }
        Ok(Self { subset, table })
    }

    pub fn subset(&self) -> NodeSet {
        self.subset
    }

    pub fn dim(&self) -> usize {
        self.subset.state_count()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.table[from * self.dim() + to]
    }

    /// `p(A_{t+1} = b)`.
    pub fn next_mass(&self, to: usize) -> f64 {
        (0..self.dim()).map(|a| self.get(a, to)).sum()
    }

    /// `p(A_t = · | A_{t+1} = to)`, or `None` when `to` has zero mass.
    pub fn backward_row(&self, to: usize) -> Option<Vec<f64>> {
        let denom = self.next_mass(to);
        (denom > 0.0).then(|| (0..self.dim()).map(|a| self.get(a, to) / denom).collect())
    }

    /// Every backward row, with the prior it is conditioned against.
    pub fn backward_matrix(&self, prior: Distribution) -> BackwardMatrix {
        let dim = self.dim();
        let mut rows = PartialRows::new(dim);
        for h in 0..dim {
            if let Some(row) = self.backward_row(h) {
                rows.set_row(h, row);
            }
        }
        BackwardMatrix {
            time: None,
            prior,
            rows,
        }
    }
}

fn check_shapes(s: &TransitionMatrix, p: &Distribution, subset: NodeSet) -> Result<()> {
    if p.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: p.len(),
        });
    }
    subset.check_within(s.nodes())
}

/// `^A S` conditioned on the full-state distribution at the instant the
/// transition starts from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetTransitionMatrix {
    pub subset: NodeSet,
    pub conditioned_on: Distribution,
    pub rows: PartialRows,
}

impl SubsetTransitionMatrix {
    pub fn row(&self, i: usize) -> Option<&[f64]> {
        self.rows.row(i)
    }
}

/// `^A s_ij = Σ_{x : π(x) = a_i} w_x Σ_{y : π(y) = a_j} s_xy` with
/// `w_x = p_t(x) / p(A_t = a_i)`. Rows of zero-probability sub-states are
/// undefined.
pub fn subset_transition_matrix(
    s: &TransitionMatrix,
    p_t: &Distribution,
    subset: NodeSet,
) -> Result<SubsetTransitionMatrix> {
    check_shapes(s, p_t, subset)?;
    let dim = subset.state_count();
    let proj = subset.projection_table(s.nodes());
    let weight = marginal_distribution(p_t, subset)?;
    let mut acc = vec![0.0; dim * dim];
    let mut lumped = vec![0.0; dim];
    for (x, &px) in p_t.as_slice().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        lumped.iter_mut().for_each(|v| *v = 0.0);
        for (y, &sxy) in s.row(x).iter().enumerate() {
            lumped[proj[y]] += sxy;
        }
        let w = px / weight[proj[x]];
        let base = proj[x] * dim;
        for (slot, &q) in acc[base..base + dim].iter_mut().zip(&lumped) {
            *slot += w * q;
        }
    }
    let mut rows = PartialRows::new(dim);
    for a in 0..dim {
        if weight[a] > 0.0 {
            rows.set_row(a, acc[a * dim..(a + 1) * dim].iter().copied());
        }
    }
    Ok(SubsetTransitionMatrix {
        subset,
        conditioned_on: p_t.clone(),
        rows,
    })
}

/// `^A b_hj(t) = p(A_{t-1} = a_j, A_t = a_h) / p(A_t = a_h)`, inverted
/// against the marginal of `p_prev` on the subset.
pub fn subset_backward_matrix(
    s: &TransitionMatrix,
    p_prev: &Distribution,
    subset: NodeSet,
) -> Result<BackwardMatrix> {
    let joint = SubsetJoint::new(s, p_prev, subset)?;
    let prior = marginal_distribution(p_prev, subset)?;
    Ok(joint.backward_matrix(prior))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{backward_matrix, build_transition_matrix};
    use crate::network::{Network, NodeLaw};

    fn swap() -> TransitionMatrix {
        build_transition_matrix(
            &Network::new(vec![
                NodeLaw::new(1, vec![2], vec![0.0, 1.0]),
                NodeLaw::new(2, vec![1], vec![0.0, 1.0]),
            ])
            .validate()
            .unwrap(),
        )
    }

    fn two_nots() -> TransitionMatrix {
        build_transition_matrix(
            &Network::new(vec![
                NodeLaw::new(1, vec![1], vec![1.0, 0.0]),
                NodeLaw::new(2, vec![2], vec![1.0, 0.0]),
            ])
            .validate()
            .unwrap(),
        )
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_state(0b10, NodeSet::from_ids(&[2])).unwrap(), 1);
        assert_eq!(project_state(0b10, NodeSet::full(2)).unwrap(), 0b10);
        assert_eq!(
            project_state(0b101, NodeSet::from_ids(&[1, 3])).unwrap(),
            0b11
        );
        assert_eq!(
            project_state(0b101, NodeSet::default()),
            Err(Error::EmptySubset)
        );
        assert_eq!(NodeSet::from_ids(&[1, 3]).embed(0b11), 0b101);
    }

    #[test]
    fn node_set_display_and_ops() {
        let a = NodeSet::from_ids(&[1, 3]);
        assert_eq!(a.to_string(), "{1,3}");
        assert_eq!(a.len(), 2);
        assert_eq!(a.lowest(), Some(0));
        assert!(a.is_subset_of(NodeSet::full(3)));
        assert_eq!(a.union(NodeSet::from_ids(&[2])), NodeSet::full(3));
        assert_eq!(NodeSet::full(3).difference(a), NodeSet::from_ids(&[2]));
        assert_eq!(serde_json::to_string(&a).unwrap(), "[1,3]");
    }

    #[test]
    fn marginal_examples() {
        let u = Distribution::uniform(4);
        assert_eq!(
            marginal_distribution(&u, NodeSet::from_ids(&[2]))
                .unwrap()
                .as_slice(),
            &[0.5, 0.5]
        );
        let d = Distribution::delta(8, 0b110);
        assert_eq!(
            marginal_distribution(&d, NodeSet::from_ids(&[1, 3])).unwrap(),
            Distribution::delta(4, 0b10)
        );
        assert_eq!(marginal_distribution(&d, NodeSet::full(3)).unwrap(), d);
        assert_eq!(
            marginal_distribution(&d, NodeSet::from_ids(&[4])),
            Err(Error::SubsetOutOfRange {
                subset: NodeSet::from_ids(&[4]),
                nodes: 3
            })
        );
    }

    #[test]
    fn subset_transition_examples() {
        let s = swap();
        let p = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let full = subset_transition_matrix(&s, &p, NodeSet::full(2)).unwrap();
        for i in 0..4 {
            assert_eq!(full.row(i).unwrap(), s.row(i));
        }

        // direct enumeration over the 4 full states: node 1's successor is
        // node 2's current value, which is uniform given either value of node 1
        let a1 = subset_transition_matrix(&s, &Distribution::uniform(4), NodeSet::from_ids(&[1]))
            .unwrap();
        assert_eq!(a1.row(0).unwrap(), &[0.5, 0.5]);
        assert_eq!(a1.row(1).unwrap(), &[0.5, 0.5]);

        let nots = two_nots();
        for p in [
            Distribution::uniform(4),
            Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
        ] {
            let a = subset_transition_matrix(&nots, &p, NodeSet::from_ids(&[1])).unwrap();
            for (i, expected) in [[0.0, 1.0], [1.0, 0.0]].iter().enumerate() {
                for (got, want) in a.row(i).unwrap().iter().zip(expected) {
                    assert!((got - want).abs() <= 1e-12);
                }
            }
        }

        let a =
            subset_transition_matrix(&nots, &Distribution::delta(4, 0), NodeSet::from_ids(&[1]))
                .unwrap();
        assert!(a.row(1).is_none());
    }

    #[test]
    fn subset_backward_examples() {
        let s = swap();
        let p = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let full = subset_backward_matrix(&s, &p, NodeSet::full(2)).unwrap();
        assert_eq!(full.rows, backward_matrix(&s, &p).unwrap().rows);

        // joint enumeration of (X_{t-1}, A_t): A_t = node 2 at t-1, which is
        // independent of node 1 at t-1 under the uniform prior
        let b =
            subset_backward_matrix(&s, &Distribution::uniform(4), NodeSet::from_ids(&[1])).unwrap();
        assert_eq!(b.row(0).unwrap(), &[0.5, 0.5]);
        assert_eq!(b.row(1).unwrap(), &[0.5, 0.5]);

        let b = subset_backward_matrix(
            &two_nots(),
            &Distribution::uniform(4),
            NodeSet::from_ids(&[1]),
        )
        .unwrap();
        assert_eq!(b.row(0).unwrap(), &[0.0, 1.0]);
        assert_eq!(b.row(1).unwrap(), &[1.0, 0.0]);
        assert_eq!(b.prior.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn empty_subset_is_an_error() {
        let s = swap();
        let u = Distribution::uniform(4);
        assert_eq!(
            subset_transition_matrix(&s, &u, NodeSet::default()).unwrap_err(),
            Error::EmptySubset
        );
        assert_eq!(
            subset_backward_matrix(&s, &u, NodeSet::default()).unwrap_err(),
            Error::EmptySubset
        );
    }
}
