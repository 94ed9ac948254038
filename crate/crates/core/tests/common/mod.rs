#![allow(dead_code)]

use pbn_phi::{Distribution, Network, NodeLaw, ValidatedNetwork};
use rand::seq::SliceRandom;
use rand::Rng;

/// Law table with entries in [0, 1]; roughly one table in four is
/// deterministic.
fn random_table<R: Rng>(rng: &mut R, inputs: usize) -> Vec<f64> {
    let deterministic = rng.gen_bool(0.25);
    (0..1usize << inputs)
        .map(|_| {
            if deterministic {
                rng.gen_range(0..2) as f64
            } else {
                rng.gen::<f64>()
            }
        })
        .collect()
}

/// Random inputs drawn from `pool` (1-based ids), in random order.
fn random_inputs<R: Rng>(rng: &mut R, pool: &[usize]) -> Vec<usize> {
    let mut ids = pool.to_vec();
    ids.shuffle(rng);
    let k = rng.gen_range(0..=pool.len().min(3));
    ids.truncate(k);
    ids
}

pub fn random_network<R: Rng>(rng: &mut R, n: usize) -> ValidatedNetwork {
    let pool: Vec<usize> = (1..=n).collect();
    let laws = (1..=n)
        .map(|id| {
            let inputs = random_inputs(rng, &pool);
            let table = random_table(rng, inputs.len());
            NodeLaw::new(id, inputs, table)
        })
        .collect();
    Network::new(laws).validate().unwrap()
}

/// Two blocks with no edges between them: nodes `1..=a` and `a+1..=a+b`.
pub fn two_block_network<R: Rng>(rng: &mut R, a: usize, b: usize) -> ValidatedNetwork {
    let first: Vec<usize> = (1..=a).collect();
    let second: Vec<usize> = (a + 1..=a + b).collect();
    let laws = (1..=a + b)
        .map(|id| {
            let pool = if id <= a { &first } else { &second };
            let inputs = random_inputs(rng, pool);
            let table = random_table(rng, inputs.len());
            NodeLaw::new(id, inputs, table)
        })
        .collect();
    Network::new(laws).validate().unwrap()
}

/// Random distribution over `2^n` states; with `sparse`, about a quarter of
/// the states get zero mass.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize, sparse: bool) -> Distribution {
    let size = 1usize << n;
    loop {
        let raw: Vec<f64> = (0..size)
            .map(|_| {
                if sparse && rng.gen_bool(0.25) {
                    0.0
                } else {
                    rng.gen::<f64>()
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 1e-3 {
            return Distribution::new(raw.iter().map(|v| v / total).collect()).unwrap();
        }
    }
}

/// Network with node `k` moved to position `perm[k]` (0-based).
pub fn relabel(net: &ValidatedNetwork, perm: &[usize]) -> ValidatedNetwork {
    let laws = (0..net.node_count())
        .map(|k| {
            NodeLaw::new(
                perm[k] + 1,
                net.inputs(k).iter().map(|&i| perm[i] + 1).collect(),
                net.table(k).to_vec(),
            )
        })
        .collect();
    Network::new(laws).validate().unwrap()
}

/// State index after moving bit `k` to bit `perm[k]`.
pub fn permute_state(state: usize, perm: &[usize]) -> usize {
    perm.iter()
        .enumerate()
        .fold(0, |acc, (k, &to)| acc | (((state >> k) & 1) << to))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
