//! Entropy, Kullback-Leibler divergence and effective information.
//!
//! All quantities are in bits. Terms with zero probability under the first
//! argument are skipped (`0 · log 0 = 0`), so sums run over observable
//! states only.

use crate::distribution::Distribution;
use crate::dynamics::{
    backward_matrix, backward_matrix_uniform, build_transition_matrix, stationary_distribution,
    TimeSlice, TransitionMatrix, DEFAULT_STATIONARY_MAX_ITER,
};
use crate::error::{Error, Result};
use crate::marginalize::{marginal_distribution, NodeSet, SubsetJoint};
use crate::network::ValidatedNetwork;

/// Information in bits.
pub type Bits = f64;

/// Shannon entropy `-Σ p log₂ p`.
pub fn entropy(p: &[f64]) -> Bits {
    let h: f64 = p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum();
    // -0.0 for delta distributions
    h.max(0.0)
}

/// `D_KL(p || q) = Σ_{p(x) > 0} p(x) log₂(p(x) / q(x))`.
///
/// Fails when `p(x) > 0` but `q(x) = 0`. Tiny negative results from
/// rounding are clamped to zero.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<Bits> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    let mut total = 0.0;
    for (index, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Err(Error::AbsoluteContinuity { index, p: pi });
        }
        total += pi * (pi / qi).log2();
    }
    Ok(total.max(0.0))
}

fn check_state(state: usize, nodes: usize) -> Result<()> {
    if state >> nodes != 0 {
        return Err(Error::StateOutOfRange { state, nodes });
    }
    Ok(())
}

/// `ei(t, x) = D_KL(B_x(t) || X_{t-1})` for a precomputed time slice.
pub fn effective_information_at(s: &TransitionMatrix, slice: &TimeSlice, x: usize) -> Result<Bits> {
    check_state(x, s.nodes())?;
    let b = backward_matrix(s, &slice.prev)?;
    let row = b.row(x).ok_or(Error::Unobservable {
        subset: NodeSet::full(s.nodes()),
        state: x,
        time: slice.time,
    })?;
    kl_divergence(row, slice.prev.as_slice())
}

/// Effective information of observing state `x` at instant `t ≥ 1`, with
/// the network started from `p0` at instant 0.
pub fn effective_information(
    net: &ValidatedNetwork,
    p0: &Distribution,
    t: usize,
    x: usize,
) -> Result<Bits> {
    let s = build_transition_matrix(net);
    let slice = TimeSlice::new(&s, p0, t)?;
    effective_information_at(&s, &slice, x)
}

/// `n - H(B_x)` with the backward row taken under a uniform prior.
pub fn effective_information_uniform(s: &TransitionMatrix, x: usize) -> Result<Bits> {
    check_state(x, s.nodes())?;
    let b = backward_matrix_uniform(s);
    let row = b.row(x).ok_or(Error::Unobservable {
        subset: NodeSet::full(s.nodes()),
        state: x,
        time: 1,
    })?;
    Ok((s.nodes() as f64 - entropy(row)).max(0.0))
}

/// Effective information in the stationary regime: the backward row is
/// inverted against a stationary distribution `p_∞` and compared with it.
pub fn effective_information_stationary(s: &TransitionMatrix, x: usize, tol: f64) -> Result<Bits> {
    check_state(x, s.nodes())?;
    let p_inf = stationary_distribution(s, tol, DEFAULT_STATIONARY_MAX_ITER)?;
    if p_inf[x] <= 0.0 {
        return Err(Error::UnobservableStationary { state: x });
    }
    let b = backward_matrix(s, &p_inf)?;
    let row = b.row(x).ok_or(Error::UnobservableStationary { state: x })?;
    kl_divergence(row, p_inf.as_slice())
}

/// `ei(t, A, a) = D_KL(^A B_a(t) || A_{t-1})` for a precomputed time slice.
pub fn subset_effective_information_at(
    s: &TransitionMatrix,
    slice: &TimeSlice,
    subset: NodeSet,
    a: usize,
) -> Result<Bits> {
    let joint = SubsetJoint::new(s, &slice.prev, subset)?;
    check_state(a, subset.len())?;
    let prior = marginal_distribution(&slice.prev, subset)?;
    let row = joint.backward_row(a).ok_or(Error::Unobservable {
        subset,
        state: a,
        time: slice.time,
    })?;
    kl_divergence(&row, prior.as_slice())
}

/// Effective information of observing sub-state `a` of `subset` at instant
/// `t ≥ 1`.
pub fn subset_effective_information(
    net: &ValidatedNetwork,
    p0: &Distribution,
    t: usize,
    subset: NodeSet,
    a: usize,
) -> Result<Bits> {
    let s = build_transition_matrix(net);
    let slice = TimeSlice::new(&s, p0, t)?;
    subset_effective_information_at(&s, &slice, subset, a)
}
