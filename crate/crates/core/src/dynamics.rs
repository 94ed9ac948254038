//! Forward and backward dynamics of a network viewed as a finite Markov chain.

use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::network::ValidatedNetwork;

pub const DEFAULT_STATIONARY_TOL: f64 = 1e-12;
pub const DEFAULT_STATIONARY_MAX_ITER: usize = 1_000_000;

/// Row-stochastic matrix `s[i][j] = p(X_{t+1} = x_j | X_t = x_i)`, dense and
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    nodes: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds a matrix from explicit rows, checking shape and stochasticity.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidDistribution(format!(
                "matrix dimension {dim} is not a power of two"
            )));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            Distribution::new(row.clone())?;
            data.extend(row);
        }
        Ok(Self {
            nodes: dim.trailing_zeros() as usize,
            data,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        1 << self.nodes
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let dim = self.dim();
        &self.data[i * dim..(i + 1) * dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim())
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.dim()).copied()
    }
}

/// Rows of a conditional-probability matrix where some conditioning states
/// have zero probability and therefore no row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialRows {
    dim: usize,
    data: Vec<f64>,
    defined: Vec<bool>,
}

impl PartialRows {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
            defined: vec![false; dim],
        }
    }

    pub(crate) fn set_row(&mut self, i: usize, row: impl IntoIterator<Item = f64>) {
        let dim = self.dim;
        for (slot, v) in self.data[i * dim..(i + 1) * dim].iter_mut().zip(row) {
            *slot = v;
        }
        self.defined[i] = true;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> Option<&[f64]> {
        self.defined[i].then(|| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.defined[i]
    }

    /// `(index, row)` for every defined row.
    pub fn defined_rows(&self) -> impl Iterator<Item = (usize, &[f64])> {
        (0..self.dim).filter_map(move |i| self.row(i).map(|r| (i, r)))
    }
}

/// Bayes inversion of a transition matrix against a prior:
/// `b[i][j] = p(X_{t-1} = x_j | X_t = x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackwardMatrix {
    /// Instant `t` of the conditioning state, when known.
    pub time: Option<usize>,
    /// Distribution at `t - 1` used for the inversion.
    pub prior: Distribution,
    pub rows: PartialRows,
}

impl BackwardMatrix {
    pub fn row(&self, i: usize) -> Option<&[f64]> {
        self.rows.row(i)
    }

    pub fn dim(&self) -> usize {
        self.rows.dim()
    }

    pub fn at_time(mut self, t: usize) -> Self {
        self.time = Some(t);
        self
    }
}

/// `s_ij = ∏_k ρ_k` where `ρ_k` is `r_k(x_i)` if node `k` is 1 in `x_j` and
/// `1 - r_k(x_i)` otherwise.
pub fn build_transition_matrix(net: &ValidatedNetwork) -> TransitionMatrix {
    let nodes = net.node_count();
    let dim = net.state_count();
    let mut data = vec![0.0; dim * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
        let on: Vec<f64> = (0..nodes).map(|k| net.prob_one(k, i)).collect();
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = on
                .iter()
                .enumerate()
                .map(|(k, &p)| if (j >> k) & 1 == 1 { p } else { 1.0 - p })
                .product();
        }
    });
    TransitionMatrix { nodes, data }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// One step forward: `p_{t+1} = p_t · S`.
pub fn evolve_distribution(p: &Distribution, s: &TransitionMatrix) -> Result<Distribution> {
    check_dim(s.dim(), p.len())?;
    let mut next = vec![0.0; s.dim()];
    for (i, row) in s.rows().enumerate() {
        let w = p[i];
        if w == 0.0 {
            continue;
        }
        for (acc, &sij) in next.iter_mut().zip(row) {
            *acc += w * sij;
        }
    }
    Ok(Distribution::from_raw(next))
}

/// `p0` evolved `t` steps.
pub fn distribution_at(s: &TransitionMatrix, p0: &Distribution, t: usize) -> Result<Distribution> {
    check_dim(s.dim(), p0.len())?;
    (0..t).try_fold(p0.clone(), |p, _| evolve_distribution(&p, s))
}

/// A stationary distribution reached from the uniform start.
///
/// Iterates the averaged operator `p ← (p + p·S) / 2`, which has the same
/// fixed points as `S` but is aperiodic, so periodic chains such as a single
/// NOT node converge instead of oscillating. For reducible chains the result
/// is the limit from the uniform start, one stationary distribution among
/// several.
pub fn stationary_distribution(
    s: &TransitionMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<Distribution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let mut p = Distribution::uniform(s.dim());
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let next = evolve_distribution(&p, s)?;
        residual = l1_distance(p.as_slice(), next.as_slice());
        if residual <= tol {
            return Ok(p);
        }
        let averaged = p
            .as_slice()
            .iter()
            .zip(next.as_slice())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        p = Distribution::from_raw(averaged);
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

pub(crate) fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `b_ij = p_prev(j) s_ji / (p_prev · S^i)`; row `i` is undefined when the
/// denominator is zero.
pub fn backward_matrix(s: &TransitionMatrix, p_prev: &Distribution) -> Result<BackwardMatrix> {
    check_dim(s.dim(), p_prev.len())?;
    let dim = s.dim();
    let mut rows = PartialRows::new(dim);
    for i in 0..dim {
        let denom: f64 = (0..dim).map(|j| p_prev[j] * s.get(j, i)).sum();
        if denom > 0.0 {
            rows.set_row(i, (0..dim).map(|j| p_prev[j] * s.get(j, i) / denom));
        }
    }
    Ok(BackwardMatrix {
        time: None,
        prior: p_prev.clone(),
        rows,
    })
}

/// Backward matrix under a uniform prior: `b_ij = s_ji / Σ_k s_ki`.
pub fn backward_matrix_uniform(s: &TransitionMatrix) -> BackwardMatrix {
    let dim = s.dim();
    let mut rows = PartialRows::new(dim);
    for i in 0..dim {
        let denom: f64 = s.column(i).sum();
        if denom > 0.0 {
            rows.set_row(i, s.column(i).map(|v| v / denom));
        }
    }
    BackwardMatrix {
        time: None,
        prior: Distribution::uniform(dim),
        rows,
    }
}

/// The distributions at `t - 1` and `t` reached from `p0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSlice {
    pub time: usize,
    pub prev: Distribution,
    pub now: Distribution,
}

impl TimeSlice {
    pub fn new(s: &TransitionMatrix, p0: &Distribution, t: usize) -> Result<Self> {
        if t < 1 {
            return Err(Error::InvalidInstant { min: 1, found: t });
        }
        let prev = distribution_at(s, p0, t - 1)?;
        let now = evolve_distribution(&prev, s)?;
        Ok(Self { time: t, prev, now })
    }
}

/// True when every row of `rows` sums to 1 and lies in `[0, 1]`.
pub fn is_row_stochastic<'a>(rows: impl IntoIterator<Item = &'a [f64]>, tol: f64) -> bool {
    rows.into_iter().all(|r| {
        r.iter().all(|v| (-tol..=1.0 + tol).contains(v))
            && (r.iter().sum::<f64>() - 1.0).abs() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Network, NodeLaw};

    fn not_net() -> ValidatedNetwork {
        Network::new(vec![NodeLaw::new(1, vec![1], vec![1.0, 0.0])])
            .validate()
            .unwrap()
    }

    fn coin_net() -> ValidatedNetwork {
        Network::new(vec![NodeLaw::new(1, vec![1], vec![0.5, 0.5])])
            .validate()
            .unwrap()
    }

    fn absorbing_net() -> ValidatedNetwork {
        Network::new(vec![NodeLaw::new(1, vec![1], vec![0.0, 0.0])])
            .validate()
            .unwrap()
    }

    fn swap_net() -> ValidatedNetwork {
        Network::new(vec![
            NodeLaw::new(1, vec![2], vec![0.0, 1.0]),
            NodeLaw::new(2, vec![1], vec![0.0, 1.0]),
        ])
        .validate()
        .unwrap()
    }

    /// Hand enumeration of `∏_k ρ_k` for the swap network: node 1 takes the
    /// old value of node 2 and vice versa.
    fn swap_oracle() -> Vec<Vec<f64>> {
        (0..4usize)
            .map(|i| {
                (0..4usize)
                    .map(|j| {
                        let (a, b) = (i & 1, (i >> 1) & 1);
                        let (a2, b2) = (j & 1, (j >> 1) & 1);
                        let rho1 = if a2 == b { 1.0 } else { 0.0 };
                        let rho2 = if b2 == a { 1.0 } else { 0.0 };
                        rho1 * rho2
                    })
                    .collect()
            })
            .collect()
    }

    fn rows_of(s: &TransitionMatrix) -> Vec<Vec<f64>> {
        s.rows().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn transition_matrices_of_small_nets() {
        assert_eq!(
            rows_of(&build_transition_matrix(&not_net())),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        assert_eq!(
            rows_of(&build_transition_matrix(&coin_net())),
            vec![vec![0.5, 0.5], vec![0.5, 0.5]]
        );
        let swap = rows_of(&build_transition_matrix(&swap_net()));
        assert_eq!(swap, swap_oracle());
        assert_eq!(
            swap,
            vec![
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
            ]
        );
    }

    #[test]
    fn evolution() {
        let s = build_transition_matrix(&not_net());
        let p = Distribution::delta(2, 0);
        assert_eq!(evolve_distribution(&p, &s).unwrap().as_slice(), &[0.0, 1.0]);
        assert_eq!(distribution_at(&s, &p, 2).unwrap().as_slice(), &[1.0, 0.0]);
        assert_eq!(distribution_at(&s, &p, 0).unwrap(), p);

        let coin = build_transition_matrix(&coin_net());
        assert_eq!(
            evolve_distribution(&p, &coin).unwrap().as_slice(),
            &[0.5, 0.5]
        );

        let swap = build_transition_matrix(&swap_net());
        let u = Distribution::uniform(4);
        assert_eq!(evolve_distribution(&u, &swap).unwrap(), u);
        let d01 = Distribution::delta(4, 0b01);
        assert_eq!(
            distribution_at(&swap, &d01, 1).unwrap(),
            Distribution::delta(4, 0b10)
        );

        assert!(matches!(
            evolve_distribution(&u, &s),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 4
            })
        ));
    }

    #[test]
    fn stationary_examples() {
        let tol = DEFAULT_STATIONARY_TOL;
        let max = DEFAULT_STATIONARY_MAX_ITER;
        let p = stationary_distribution(&build_transition_matrix(&not_net()), tol, max).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
        let p =
            stationary_distribution(&build_transition_matrix(&absorbing_net()), tol, max).unwrap();
        assert!((p[0] - 1.0).abs() <= 1e-12 && p[1] <= 1e-12);
        let p = stationary_distribution(&build_transition_matrix(&coin_net()), tol, max).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn stationary_reaches_periodic_non_uniform_chains() {
        // 3-cycle 0 -> 1 -> 2 -> 0 with state 3 feeding into the cycle
        let s = TransitionMatrix::from_rows(vec![
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        let p = stationary_distribution(&s, 1e-12, DEFAULT_STATIONARY_MAX_ITER).unwrap();
        let next = evolve_distribution(&p, &s).unwrap();
        assert!(l1_distance(p.as_slice(), next.as_slice()) <= 1e-12);
        for k in 0..3 {
            assert!((p[k] - 1.0 / 3.0).abs() < 1e-11);
        }
    }

    #[test]
    fn stationary_reports_non_convergence() {
        let s = build_transition_matrix(&absorbing_net());
        assert!(matches!(
            stationary_distribution(&s, 1e-12, 3),
            Err(Error::NonConvergence { iterations: 3, .. })
        ));
        assert!(matches!(
            stationary_distribution(&s, 0.0, 3),
            Err(Error::InvalidTolerance(_))
        ));
    }

    #[test]
    fn backward_examples() {
        let coin = build_transition_matrix(&coin_net());
        let b = backward_matrix(&coin, &Distribution::delta(2, 0)).unwrap();
        assert_eq!(b.row(0).unwrap(), &[1.0, 0.0]);
        assert_eq!(b.row(1).unwrap(), &[1.0, 0.0]);

        let swap = build_transition_matrix(&swap_net());
        let b = backward_matrix(&swap, &Distribution::uniform(4)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(b.row(i).unwrap()[j], swap.get(j, i));
            }
        }

        let absorbing = build_transition_matrix(&absorbing_net());
        let b = backward_matrix(&absorbing, &Distribution::delta(2, 1)).unwrap();
        assert_eq!(b.row(0).unwrap(), &[0.0, 1.0]);
        assert!(b.row(1).is_none());
    }

    #[test]
    fn uniform_backward_examples() {
        let b = backward_matrix_uniform(&build_transition_matrix(&not_net()));
        assert_eq!(b.row(0).unwrap(), &[0.0, 1.0]);
        assert_eq!(b.row(1).unwrap(), &[1.0, 0.0]);
        let b = backward_matrix_uniform(&build_transition_matrix(&coin_net()));
        assert_eq!(b.row(0).unwrap(), &[0.5, 0.5]);

        let swap = build_transition_matrix(&swap_net());
        let b = backward_matrix_uniform(&swap);
        for i in 0..4 {
            assert!(swap.column(i).eq(b.row(i).unwrap().iter().copied()));
        }

        // absorbing into 0: column 1 is all zeros
        let b = backward_matrix_uniform(&build_transition_matrix(&absorbing_net()));
        assert!(b.row(1).is_none());
        assert_eq!(b.row(0).unwrap(), &[0.5, 0.5]);
    }

    #[test]
    fn time_slice_requires_positive_instant() {
        let s = build_transition_matrix(&not_net());
        assert!(matches!(
            TimeSlice::new(&s, &Distribution::uniform(2), 0),
            Err(Error::InvalidInstant { min: 1, found: 0 })
        ));
        let slice = TimeSlice::new(&s, &Distribution::delta(2, 0), 2).unwrap();
        assert_eq!(slice.prev.as_slice(), &[0.0, 1.0]);
        assert_eq!(slice.now.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn from_rows_checks_shape() {
        assert!(TransitionMatrix::from_rows(vec![vec![1.0]]).is_ok());
        assert!(TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(TransitionMatrix::from_rows(vec![vec![0.5, 0.6], vec![1.0, 0.0]]).is_err());
    }
}
