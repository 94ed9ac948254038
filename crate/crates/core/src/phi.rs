//! Integrated information: partition-dependent φ, normalization, the minimum
//! information partition (MIP), complexes and system-level φ.
//!
//! A [`PhiEngine`] fixes a network, an initial distribution and an instant
//! `t`. For every node subset it computes, once, the effective information of
//! each sub-state and the entropy of the subset's marginal at `t`; every
//! partition evaluation afterwards is table lookups. Scans over partitions
//! and subsets run on the current rayon pool and are reduced sequentially in
//! canonical order, so results do not depend on the thread count.

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::distribution::Distribution;
use crate::dynamics::{build_transition_matrix, TimeSlice, TransitionMatrix};
use crate::error::{Error, Result};
use crate::info::{entropy, kl_divergence, Bits};
use crate::marginalize::{marginal_distribution, NodeSet, SubsetJoint};
use crate::network::ValidatedNetwork;

/// Values within this distance are treated as equal when breaking ties and
/// deciding whether φ or N vanish.
pub const ZERO_TOL: f64 = 1e-12;

/// Largest subset for which every m-way partition is enumerated.
pub const DEFAULT_MAX_PARTITION_SIZE: usize = 5;

/// Largest network for exhaustive subset scans.
pub const DEFAULT_MAX_SCAN_NODES: usize = 8;

/// Entropy used for each part in the normalization `N = (m - 1) min_k H(M_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Entropy of the part's marginal state distribution at `t`.
    #[default]
    Marginal,
    /// Maximum entropy `|M_k|` bits.
    MaxEnt,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Marginal => "marginal",
            Normalization::MaxEnt => "maxent",
        })
    }
}

/// Which partitions the MIP search scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionScope {
    #[default]
    Bipartitions,
    /// Every partition into at least two parts, for small subsets.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhiOptions {
    pub normalization: Normalization,
    pub partitions: PartitionScope,
    /// Whether the whole network takes part in complex scans.
    pub include_whole: bool,
    pub max_scan_nodes: usize,
    pub max_partition_size: usize,
}

impl Default for PhiOptions {
    fn default() -> Self {
        Self {
            normalization: Normalization::Marginal,
            partitions: PartitionScope::Bipartitions,
            include_whole: true,
            max_scan_nodes: DEFAULT_MAX_SCAN_NODES,
            max_partition_size: DEFAULT_MAX_PARTITION_SIZE,
        }
    }
}

/// A split of a node subset into `m ≥ 2` non-empty disjoint parts, ordered by
/// lowest node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<NodeSet>,
}

impl Partition {
    pub fn new(mut parts: Vec<NodeSet>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::InvalidPartition(format!(
                "{} part(s), need at least 2",
                parts.len()
            )));
        }
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::InvalidPartition("empty part".into()));
        }
        let mut seen = NodeSet::default();
        for &p in &parts {
            if !p.intersection(seen).is_empty() {
                return Err(Error::InvalidPartition(format!(
                    "part {p} overlaps another part"
                )));
            }
            seen = seen.union(p);
        }
        parts.sort_by_key(|p| p.lowest());
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[NodeSet] {
        &self.parts
    }

    /// Number of parts `m`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The subset this partition covers.
    pub fn union(&self) -> NodeSet {
        self.parts
            .iter()
            .fold(NodeSet::default(), |acc, &p| acc.union(p))
    }

    /// Relabels nodes with `map[old index] = new index`.
    pub fn relabel(&self, map: &[usize]) -> Self {
        let parts = self
            .parts
            .iter()
            .map(|p| NodeSet::from_indices(p.indices().map(|k| map[k])))
            .collect();
        Self::new(parts).expect("relabeling preserves a valid partition")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(&self.parts)
    }
}

/// All `2^{|V|-1} - 1` unordered two-part partitions of `subset`. The first
/// part always holds the lowest node; the order follows a binary counter over
/// the remaining nodes.
pub fn enumerate_bipartitions(subset: NodeSet) -> Result<Vec<Partition>> {
    if subset.len() < 2 {
        return Err(Error::SubsetTooSmall { subset });
    }
    let lowest = NodeSet::from_indices(subset.lowest());
    let rest = subset.difference(lowest);
    let count = (1usize << rest.len()) - 1;
    Ok((0..count)
        .map(|c| {
            let first = lowest.union(NodeSet::from_bits(rest.embed(c) as u32));
            Partition {
                parts: vec![first, subset.difference(first)],
            }
        })
        .collect())
}

/// Every partition of `subset` into at least two parts, in lexicographic
/// order of restricted growth strings.
pub fn enumerate_partitions(subset: NodeSet, max_size: usize) -> Result<Vec<Partition>> {
    if subset.len() < 2 {
        return Err(Error::SubsetTooSmall { subset });
    }
    if subset.len() > max_size {
        return Err(Error::PartitionCap {
            subset,
            size: subset.len(),
            limit: max_size,
        });
    }
    let nodes: Vec<usize> = subset.indices().collect();
    let mut out = Vec::new();
    let mut labels = vec![0usize; nodes.len()];
    restricted_growth(&nodes, &mut labels, 1, 0, &mut out);
    Ok(out)
}

fn restricted_growth(
    nodes: &[usize],
    labels: &mut [usize],
    pos: usize,
    max_label: usize,
    out: &mut Vec<Partition>,
) {
    if pos == nodes.len() {
        if max_label == 0 {
            return;
        }
        let mut parts = vec![NodeSet::default(); max_label + 1];
        for (&node, &label) in nodes.iter().zip(labels.iter()) {
            parts[label] = parts[label].union(NodeSet::from_indices([node]));
        }
        out.push(Partition { parts });
        return;
    }
    for label in 0..=max_label + 1 {
        labels[pos] = label;
        restricted_growth(nodes, labels, pos + 1, max_label.max(label), out);
    }
}

/// True iff no edge of the network runs between two different parts.
///
/// The check only looks at edges inside the partitioned subset; nodes
/// outside it may still drive several parts at once.
pub fn is_disconnected(net: &ValidatedNetwork, partition: &Partition) -> bool {
    let part_of = |node: usize| partition.parts.iter().position(|p| p.contains(node));
    net.edges()
        .into_iter()
        .all(|(u, v)| match (part_of(u), part_of(v)) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        })
}

/// One row of a MIP search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionEntry {
    pub partition: Partition,
    pub phi: Bits,
    pub normalization: Bits,
    /// `φ / N`, or `None` when the partition is excluded (`N = 0`, `φ ≠ 0`).
    pub ratio: Option<f64>,
}

/// Result of a MIP search on one subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiReport {
    pub subset: NodeSet,
    /// Full-network state the observation was made in.
    pub state: usize,
    /// `π_V(state)`.
    pub subset_state: usize,
    pub time: usize,
    /// Unnormalized φ on the MIP.
    pub phi_raw: Bits,
    pub mip: Partition,
    pub normalized_value: f64,
    pub normalization_mode: Normalization,
    pub per_partition: Vec<PartitionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Complex {
    pub subset: NodeSet,
    pub phi: Bits,
    pub mip: Partition,
    pub is_main: bool,
}

/// Subsets with positive φ in one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexScan {
    pub state: usize,
    pub time: usize,
    pub complexes: Vec<Complex>,
    /// Subsets whose every partition was excluded by the `N = 0` rule.
    pub skipped: Vec<NodeSet>,
}

impl ComplexScan {
    /// Largest φ among the complexes, 0 when there are none.
    pub fn max_phi(&self) -> Bits {
        self.complexes.iter().map(|c| c.phi).fold(0.0, f64::max)
    }

    /// The main complex of largest φ; the first in scan order on ties.
    pub fn main_complex(&self) -> Option<&Complex> {
        self.complexes
            .iter()
            .filter(|c| c.is_main)
            .fold(None, |best: Option<&Complex>, c| match best {
                Some(b) if b.phi >= c.phi - ZERO_TOL => Some(b),
                _ => Some(c),
            })
    }
}

#[derive(Debug, Clone)]
struct SubsetTerms {
    /// Effective information per sub-state, `None` where unobservable.
    ei: Vec<Option<Bits>>,
    /// Entropy of the subset's marginal at `t`.
    entropy_now: Bits,
}

/// φ computations for one network, initial distribution and instant.
#[derive(Debug)]
pub struct PhiEngine<'a> {
    net: &'a ValidatedNetwork,
    matrix: TransitionMatrix,
    slice: TimeSlice,
    options: PhiOptions,
    terms: Vec<OnceLock<Result<SubsetTerms>>>,
}

impl<'a> PhiEngine<'a> {
    pub fn new(
        net: &'a ValidatedNetwork,
        p0: &Distribution,
        t: usize,
        options: PhiOptions,
    ) -> Result<Self> {
        let matrix = build_transition_matrix(net);
        let slice = TimeSlice::new(&matrix, p0, t)?;
        Ok(Self {
            net,
            matrix,
            slice,
            options,
            terms: (0..1usize << net.node_count())
                .map(|_| OnceLock::new())
                .collect(),
        })
    }

    pub fn network(&self) -> &ValidatedNetwork {
        self.net
    }

    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }

    pub fn slice(&self) -> &TimeSlice {
        &self.slice
    }

    pub fn options(&self) -> &PhiOptions {
        &self.options
    }

    fn terms(&self, subset: NodeSet) -> Result<&SubsetTerms> {
        subset.check_within(self.net.node_count())?;
        self.terms[subset.bits() as usize]
            .get_or_init(|| self.compute_terms(subset))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn compute_terms(&self, subset: NodeSet) -> Result<SubsetTerms> {
        let joint = SubsetJoint::new(&self.matrix, &self.slice.prev, subset)?;
        let prior = marginal_distribution(&self.slice.prev, subset)?;
        let ei = (0..subset.state_count())
            .map(|a| {
                joint
                    .backward_row(a)
                    .map(|row| kl_divergence(&row, prior.as_slice()))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        let now = marginal_distribution(&self.slice.now, subset)?;
        Ok(SubsetTerms {
            ei,
            entropy_now: entropy(now.as_slice()),
        })
    }

    /// `ei(t, A, π_A(x))`.
    pub fn subset_ei(&self, subset: NodeSet, x: usize) -> Result<Bits> {
        self.check_state(x)?;
        let a = subset.project(x);
        self.terms(subset)?.ei[a].ok_or(Error::Unobservable {
            subset,
            state: a,
            time: self.slice.time,
        })
    }

    fn check_state(&self, x: usize) -> Result<()> {
        let nodes = self.net.node_count();
        if x >> nodes != 0 {
            return Err(Error::StateOutOfRange { state: x, nodes });
        }
        Ok(())
    }

    fn check_partition(&self, subset: NodeSet, partition: &Partition) -> Result<()> {
        subset.check_within(self.net.node_count())?;
        if partition.union() != subset {
            return Err(Error::InvalidPartition(format!(
                "{partition} does not cover {subset}"
            )));
        }
        Ok(())
    }

    /// `φ(t, V, P, v) = ei(t, V, v) - Σ_k ei(t, M_k, μ_k)`. May be negative.
    pub fn partition_phi(&self, subset: NodeSet, partition: &Partition, x: usize) -> Result<Bits> {
        self.check_partition(subset, partition)?;
        let whole = self.subset_ei(subset, x)?;
        let parts = partition
            .parts
            .iter()
            .map(|&p| self.subset_ei(p, x))
            .sum::<Result<Bits>>()?;
        Ok(whole - parts)
    }

    /// Entropy of the part used by the normalization.
    pub fn part_entropy(&self, part: NodeSet) -> Result<Bits> {
        Ok(match self.options.normalization {
            Normalization::Marginal => self.terms(part)?.entropy_now,
            Normalization::MaxEnt => part.len() as f64,
        })
    }

    /// `N = (m - 1) min_k H(M_k)`.
    pub fn normalization(&self, partition: &Partition) -> Result<Bits> {
        let min = partition
            .parts
            .iter()
            .map(|&p| self.part_entropy(p))
            .try_fold(f64::INFINITY, |acc, h| h.map(|h| acc.min(h)))?;
        Ok((partition.len() - 1) as f64 * min)
    }

    fn candidate_partitions(&self, subset: NodeSet) -> Result<Vec<Partition>> {
        match self.options.partitions {
            PartitionScope::Bipartitions => enumerate_bipartitions(subset),
            PartitionScope::All => enumerate_partitions(subset, self.options.max_partition_size),
        }
    }

    fn evaluate(&self, subset: NodeSet, partition: Partition, x: usize) -> Result<PartitionEntry> {
        let phi = self.partition_phi(subset, &partition, x)?;
        let normalization = self.normalization(&partition)?;
        let ratio = if normalization > ZERO_TOL {
            Some(phi / normalization)
        } else if phi.abs() <= ZERO_TOL {
            Some(0.0)
        } else {
            None
        };
        Ok(PartitionEntry {
            partition,
            phi,
            normalization,
            ratio,
        })
    }

    /// Scans the candidate partitions of `subset` and returns the one with
    /// the smallest `φ / N`; ties go to the smaller φ, then to the earlier
    /// partition in canonical order.
    pub fn find_mip(&self, subset: NodeSet, x: usize) -> Result<PhiReport> {
        self.check_state(x)?;
        subset.check_within(self.net.node_count())?;
        let candidates = self.candidate_partitions(subset)?;
        // observability of the whole subset is checked before any partition
        self.subset_ei(subset, x)?;

        let entries: Vec<Result<PartitionEntry>> = candidates
            .into_par_iter()
            .map(|p| self.evaluate(subset, p, x))
            .collect();
        let entries = entries.into_iter().collect::<Result<Vec<_>>>()?;

        let mut best: Option<(usize, f64)> = None;
        for (i, entry) in entries.iter().enumerate() {
            let Some(ratio) = entry.ratio else { continue };
            let better = match best {
                None => true,
                Some((b, best_ratio)) => {
                    ratio < best_ratio - ZERO_TOL
                        || ((ratio - best_ratio).abs() <= ZERO_TOL
                            && entry.phi < entries[b].phi - ZERO_TOL)
                }
            };
            if better {
                best = Some((i, ratio));
            }
        }
        let (index, ratio) = best.ok_or(Error::AllPartitionsExcluded { subset })?;
        Ok(PhiReport {
            subset,
            state: x,
            subset_state: subset.project(x),
            time: self.slice.time,
            phi_raw: entries[index].phi,
            mip: entries[index].partition.clone(),
            normalized_value: ratio,
            normalization_mode: self.options.normalization,
            per_partition: entries,
        })
    }

    /// `φ(t, V, v)`: the unnormalized φ of `subset` on its MIP.
    pub fn subset_phi(&self, subset: NodeSet, x: usize) -> Result<PhiReport> {
        self.find_mip(subset, x)
    }

    fn check_observable(&self, x: usize) -> Result<()> {
        self.check_state(x)?;
        if self.slice.now[x] <= 0.0 {
            return Err(Error::Unobservable {
                subset: NodeSet::full(self.net.node_count()),
                state: x,
                time: self.slice.time,
            });
        }
        Ok(())
    }

    /// Every subset with at least two nodes and φ > 0 in state `x`, in
    /// increasing bitmask order. A complex is main when no strict superset in
    /// the list has a larger φ.
    pub fn find_complexes(&self, x: usize) -> Result<ComplexScan> {
        let n = self.net.node_count();
        if n > self.options.max_scan_nodes {
            return Err(Error::ScanCap {
                nodes: n,
                limit: self.options.max_scan_nodes,
            });
        }
        self.check_observable(x)?;
        let full = NodeSet::full(n);
        let candidates: Vec<NodeSet> = (1..=full.bits())
            .map(NodeSet::from_bits)
            .filter(|v| v.len() >= 2 && (self.options.include_whole || *v != full))
            .collect();
        let results: Vec<Result<PhiReport>> = candidates
            .par_iter()
            .map(|&v| self.find_mip(v, x))
            .collect();

        let mut complexes = Vec::new();
        let mut skipped = Vec::new();
        for (v, result) in candidates.into_iter().zip(results) {
            match result {
                Ok(report) if report.phi_raw > ZERO_TOL => complexes.push(Complex {
                    subset: v,
                    phi: report.phi_raw,
                    mip: report.mip,
                    is_main: false,
                }),
                Ok(_) => {}
                Err(Error::AllPartitionsExcluded { .. }) => skipped.push(v),
                Err(e) => return Err(e),
            }
        }
        let flags: Vec<bool> = complexes
            .iter()
            .map(|c| {
                !complexes.iter().any(|d| {
                    d.subset != c.subset
                        && c.subset.is_subset_of(d.subset)
                        && d.phi > c.phi + ZERO_TOL
                })
            })
            .collect();
        for (c, main) in complexes.iter_mut().zip(flags) {
            c.is_main = main;
        }
        Ok(ComplexScan {
            state: x,
            time: self.slice.time,
            complexes,
            skipped,
        })
    }

    /// `φ(t, x)`: the largest φ over all candidate subsets, 0 when no complex
    /// exists.
    pub fn system_phi(&self, x: usize) -> Result<Bits> {
        Ok(self.find_complexes(x)?.max_phi())
    }

    /// `Σ_x φ(t, x) p_t(x)` over the states observable at `t`.
    pub fn average_phi(&self) -> Result<Bits> {
        let mut total = 0.0;
        for (x, &p) in self.slice.now.as_slice().iter().enumerate() {
            if p > 0.0 {
                total += p * self.system_phi(x)?;
            }
        }
        Ok(total)
    }
}

/// Runs `f` on a dedicated rayon pool with `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("failed to build thread pool")
        .install(f)
}
