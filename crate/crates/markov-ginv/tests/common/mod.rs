//! Shared fixtures for the integration suites.

#![allow(dead_code)]

use markov_ginv::{Matrix, TransitionMatrix};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub fn unit(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Dense strictly-positive random chain; always irreducible and aperiodic.
pub fn random_chain(m: usize, rng: &mut ChaCha12Rng) -> TransitionMatrix {
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row: Vec<f64> = (0..m).map(|_| 0.05 + 0.95 * unit(rng)).collect();
        let s: f64 = row.iter().sum();
        for x in row.iter_mut() {
            *x /= s;
        }
        rows.push(row);
    }
    TransitionMatrix::validate(Matrix::from_rows(&rows).unwrap()).unwrap()
}

pub fn chain_from(rows: &[&[f64]]) -> TransitionMatrix {
    let m = Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
    TransitionMatrix::validate(m).unwrap()
}

pub fn sym2() -> TransitionMatrix {
    chain_from(&[&[0.5, 0.5], &[0.5, 0.5]])
}

/// Off-diagonal rates a = 0.3, b = 0.6; stationary vector (2/3, 1/3).
pub fn two_state() -> TransitionMatrix {
    chain_from(&[&[0.7, 0.3], &[0.6, 0.4]])
}

pub fn cycle3() -> TransitionMatrix {
    chain_from(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]])
}

/// Period-2 chain on four states (bipartite hop).
pub fn bipartite4() -> TransitionMatrix {
    chain_from(&[
        &[0.0, 0.0, 0.7, 0.3],
        &[0.0, 0.0, 0.4, 0.6],
        &[0.5, 0.5, 0.0, 0.0],
        &[0.2, 0.8, 0.0, 0.0],
    ])
}

/// The 20 seeded random chains used by the acceptance suite, with sizes
/// cycling through {2, 3, 5, 10, 25, 50}.
pub fn random_suite() -> Vec<TransitionMatrix> {
    let sizes = [2usize, 3, 5, 10, 25, 50];
    let mut rng = ChaCha12Rng::seed_from_u64(0x6d61726b6f76);
    (0..20).map(|k| random_chain(sizes[k % sizes.len()], &mut rng)).collect()
}

/// Structured chains with known closed forms.
pub fn structured_suite() -> Vec<TransitionMatrix> {
    vec![sym2(), two_state(), cycle3(), bipartite4()]
}

/// Full acceptance test-chain suite.
pub fn test_suite() -> Vec<TransitionMatrix> {
    let mut v = random_suite();
    v.extend(structured_suite());
    v
}
