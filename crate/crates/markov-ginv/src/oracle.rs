//! Independent ground truth: power iteration, direct first-step linear
//! solves and seeded Monte Carlo. Nothing here touches a g-inverse, so these
//! routines arbitrate when the closed forms disagree.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::chain::{stationary_residual, StationaryVector, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::{lu_factor, Matrix, Vector};

/// Name of the RNG stream backing the simulators; surfaced through the CLI
/// so results are reproducible per (algorithm, seed).
pub const RNG_ALGORITHM: &str = "chacha12";

/// Per-trial step cap; irreducibility makes passage finite, this guards
/// against misuse.
pub const TRAJECTORY_CAP: u64 = 1_000_000_000;

/// Left fixed vector of P by power iteration, run on the half-lazy chain
/// (P + I)/2 when the chain is periodic (it has the same stationary vector).
/// Convergence is judged on the residual against the original P.
pub fn pi_power_iteration(
    p: &TransitionMatrix,
    tol: f64,
    max_iters: usize,
) -> Result<StationaryVector> {
    let m = p.m();
    let target = if p.is_aperiodic() {
        p.p().clone()
    } else {
        Matrix::identity(m).add(p.p()).scale(0.5)
    };
    let mut x = Vector::from_fn(m, |_| 1.0 / m as f64);
    let mut residual = stationary_residual(&x, p);
    for _ in 0..max_iters {
        if residual <= tol {
            return StationaryVector::new(x, p, tol.max(f64::MIN_POSITIVE));
        }
        x = target.vec_mul(&x);
        let total = x.sum();
        x = x.scale(1.0 / total);
        residual = stationary_residual(&x, p);
    }
    if residual <= tol {
        return StationaryVector::new(x, p, tol.max(f64::MIN_POSITIVE));
    }
    Err(Error::NoConvergence { iters: max_iters, residual })
}

/// Mean first passage times by direct solves: for each target j the deleted
/// system over the remaining states, then the return row.
pub fn mfpt_direct(p: &TransitionMatrix) -> Result<Matrix> {
    let m = p.m();
    let pm = p.p();
    let mut out = Matrix::zeros(m, m);
    if m == 1 {
        out[(0, 0)] = 1.0;
        return Ok(out);
    }
    for j in 0..m {
        let idx: Vec<usize> = (0..m).filter(|&i| i != j).collect();
        let system = Matrix::from_fn(m - 1, m - 1, |r, c| {
            let delta = if idx[r] == idx[c] { 1.0 } else { 0.0 };
            delta - pm[(idx[r], idx[c])]
        });
        let lu = lu_factor(&system)?;
        let x = lu.solve_vec(&Vector::ones(m - 1))?;
        for (r, &i) in idx.iter().enumerate() {
            out[(i, j)] = x[r];
        }
        out[(j, j)] = 1.0 + idx.iter().map(|&k| pm[(j, k)] * out[(k, j)]).sum::<f64>();
    }
    Ok(out)
}

/// Second moments of first passage times by the same deleted systems, fed by
/// the first moments.
pub fn m2_direct(p: &TransitionMatrix, m1: &Matrix) -> Result<Matrix> {
    let m = p.m();
    let pm = p.p();
    if m1.rows() != m || m1.cols() != m {
        return Err(Error::ShapeMismatch("first-moment matrix shape mismatch".into()));
    }
    let mut out = Matrix::zeros(m, m);
    if m == 1 {
        out[(0, 0)] = 1.0;
        return Ok(out);
    }
    for j in 0..m {
        let idx: Vec<usize> = (0..m).filter(|&i| i != j).collect();
        let system = Matrix::from_fn(m - 1, m - 1, |r, c| {
            let delta = if idx[r] == idx[c] { 1.0 } else { 0.0 };
            delta - pm[(idx[r], idx[c])]
        });
        let rhs = Vector::from_fn(m - 1, |r| {
            let i = idx[r];
            1.0 + 2.0 * idx.iter().map(|&k| pm[(i, k)] * m1[(k, j)]).sum::<f64>()
        });
        let lu = lu_factor(&system)?;
        let x = lu.solve_vec(&rhs)?;
        for (r, &i) in idx.iter().enumerate() {
            out[(i, j)] = x[r];
        }
        out[(j, j)] = 1.0
            + idx
                .iter()
                .map(|&k| pm[(j, k)] * (out[(k, j)] + 2.0 * m1[(k, j)]))
                .sum::<f64>();
    }
    Ok(out)
}

/// Moment estimates from independent simulated trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub trials: u64,
    pub std_error_mean: f64,
    pub std_error_second_moment: f64,
}

fn next_unit(rng: &mut ChaCha12Rng) -> f64 {
    // 53 random bits into [0, 1).
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn step(rng: &mut ChaCha12Rng, row: &[f64]) -> usize {
    let r = next_unit(rng);
    let mut acc = 0.0;
    for (s, &pr) in row.iter().enumerate() {
        acc += pr;
        if r < acc {
            return s;
        }
    }
    row.len() - 1
}

fn check_state(i: usize, m: usize) -> Result<usize> {
    if i < 1 || i > m {
        Err(Error::IndexOutOfRange { index: i, m })
    } else {
        Ok(i - 1)
    }
}

/// Empirical first-passage moments from `i` to `j` (1-based) over seeded
/// independent trajectories. The same (seed, arguments) always reproduces
/// the same estimate.
pub fn simulate_passage(
    p: &TransitionMatrix,
    i: usize,
    j: usize,
    trials: u64,
    seed: u64,
) -> Result<SimEstimate> {
    assert!(trials >= 1, "at least one trial required");
    let m = p.m();
    let start = check_state(i, m)?;
    let target = check_state(j, m)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let (mut s1, mut s2, mut s4) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..trials {
        let mut state = start;
        let mut steps: u64 = 0;
        loop {
            state = step(&mut rng, p.p().row(state));
            steps += 1;
            if state == target {
                break;
            }
            if steps >= TRAJECTORY_CAP {
                return Err(Error::TrajectoryCapExceeded { cap: TRAJECTORY_CAP });
            }
        }
        let t = steps as f64;
        s1 += t;
        s2 += t * t;
        s4 += t * t * t * t;
    }

    let n = trials as f64;
    let mean = s1 / n;
    let second_moment = s2 / n;
    let fourth_moment = s4 / n;
    let variance = (second_moment - mean * mean).max(0.0);
    let (se_mean, se_m2) = if trials >= 2 {
        (
            (variance / (n - 1.0)).sqrt(),
            ((fourth_moment - second_moment * second_moment).max(0.0) / (n - 1.0)).sqrt(),
        )
    } else {
        (0.0, 0.0)
    };
    Ok(SimEstimate {
        mean,
        second_moment,
        variance,
        trials,
        std_error_mean: se_mean,
        std_error_second_moment: se_m2,
    })
}

/// Mean visit counts per state over the time points 0..=n, starting from `i`
/// (1-based), averaged over seeded trajectories.
pub fn simulate_occupation(
    p: &TransitionMatrix,
    i: usize,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Vector> {
    assert!(trials >= 1, "at least one trial required");
    let m = p.m();
    let start = check_state(i, m)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = vec![0.0f64; m];
    for _ in 0..trials {
        let mut state = start;
        counts[state] += 1.0;
        for _ in 0..n {
            state = step(&mut rng, p.p().row(state));
            counts[state] += 1.0;
        }
    }
    Ok(Vector::from_fn(m, |s| counts[s] / trials as f64))
}
