use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum-to-one tolerance for probability vectors.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A probability vector over the `2^m` states of `m` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Checks that the support size is a power of two, every entry is a
    /// finite non-negative number and the entries sum to 1 within
    /// [`SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || !probs.len().is_power_of_two() {
            return Err(Error::InvalidDistribution(format!(
                "support size {} is not a power of two",
                probs.len()
            )));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} = {p} is not a non-negative number"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Wraps a vector produced by a stochastic operation on valid inputs.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        debug_assert!(probs.len().is_power_of_two());
        Self { probs }
    }

    pub fn uniform(size: usize) -> Self {
        assert!(
            size.is_power_of_two(),
            "support size must be a power of two"
        );
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn delta(size: usize, state: usize) -> Self {
        assert!(
            size.is_power_of_two(),
            "support size must be a power of two"
        );
        assert!(state < size, "state {state} outside support of size {size}");
        let mut probs = vec![0.0; size];
        probs[state] = 1.0;
        Self { probs }
    }

    /// Uniform over the listed states, zero elsewhere.
    pub fn uniform_over(size: usize, states: &[usize]) -> Result<Self> {
        let mut probs = vec![0.0; size];
        for &s in states {
            if s >= size {
                return Err(Error::InvalidDistribution(format!(
                    "state {s} outside support of size {size}"
                )));
            }
            probs[s] = 1.0;
        }
        let count = probs.iter().filter(|p| **p > 0.0).count();
        if count == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        probs.iter_mut().for_each(|p| *p /= count as f64);
        Self::new(probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Number of nodes the distribution ranges over.
    pub fn nodes(&self) -> usize {
        self.probs.len().trailing_zeros() as usize
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, state: usize) -> f64 {
        self.probs[state]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}
