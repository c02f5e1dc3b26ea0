//! Validated transition matrices and the canonical vectors and matrices
//! attached to a chain: e, e_i, E, the rank-one stationary projector and the
//! diagonal of mean return times.

use crate::error::{Error, Result};
use crate::linalg::{make_diag, rank1, Matrix, Vector};

/// Absolute tolerance on each row sum of a transition matrix.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Absolute tolerance on the total mass of a stationary vector.
pub const PI_SUM_TOL: f64 = 1e-10;

/// Default bound on the stationary residual `max |pi'(I-P)|`.
pub const DEFAULT_PI_RESIDUAL_TOL: f64 = 1e-9;

/// Row-stochastic, irreducible transition matrix.
///
/// Construction is the only gate: every entry is checked non-negative, every
/// row sums to one within [`ROW_SUM_TOL`], and the support graph (an edge
/// i -> j wherever `p[i][j] > 0`) is verified strongly connected by forward
/// and reverse reachability from state 1. Instances are immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: Matrix,
}

impl TransitionMatrix {
    /// Validates a raw square matrix as-is. Rows are never repaired here;
    /// see [`TransitionMatrix::validate_normalized`] for the opt-in rescale.
    pub fn validate(p: Matrix) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "transition matrix must be square, got {}x{}",
                p.rows(),
                p.cols()
            )));
        }
        let m = p.rows();
        for i in 0..m {
            let mut sum = 0.0;
            for &x in p.row(i) {
                if x < 0.0 {
                    return Err(Error::NotStochastic {
                        row: i + 1,
                        detail: format!("negative entry {x}"),
                    });
                }
                sum += x;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic {
                    row: i + 1,
                    detail: format!("row sums to {sum}"),
                });
            }
        }
        check_irreducible(&p)?;
        Ok(TransitionMatrix { p })
    }

    /// Rescales each row to unit sum before validating, reporting whether any
    /// row actually changed. Rows must still be non-negative with positive
    /// mass.
    pub fn validate_normalized(p: Matrix) -> Result<(Self, bool)> {
        if !p.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "transition matrix must be square, got {}x{}",
                p.rows(),
                p.cols()
            )));
        }
        let m = p.rows();
        let mut scaled = p.clone();
        let mut changed = false;
        for i in 0..m {
            let mut sum = 0.0;
            for &x in p.row(i) {
                if x < 0.0 {
                    return Err(Error::NotStochastic {
                        row: i + 1,
                        detail: format!("negative entry {x}"),
                    });
                }
                sum += x;
            }
            if sum <= 0.0 {
                return Err(Error::NotStochastic {
                    row: i + 1,
                    detail: "row has zero mass".into(),
                });
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                changed = true;
                for j in 0..m {
                    scaled[(i, j)] = p[(i, j)] / sum;
                }
            }
        }
        Ok((TransitionMatrix::validate(scaled)?, changed))
    }

    /// Number of states.
    pub fn m(&self) -> usize {
        self.p.rows()
    }

    /// The validated matrix.
    pub fn p(&self) -> &Matrix {
        &self.p
    }

    /// `I - P`, the singular kernel every procedure works against.
    pub fn kernel(&self) -> Matrix {
        Matrix::identity(self.m()).sub(&self.p)
    }

    /// Period of the chain: gcd of cycle lengths through state 1, from BFS
    /// level differences on the support graph.
    pub fn period(&self) -> usize {
        let m = self.m();
        let mut level = vec![usize::MAX; m];
        let mut queue = std::collections::VecDeque::new();
        level[0] = 0;
        queue.push_back(0);
        let mut edges = Vec::new();
        while let Some(u) = queue.pop_front() {
            for v in 0..m {
                if self.p[(u, v)] > 0.0 {
                    if level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                    edges.push((u, v));
                }
            }
        }
        let mut g: u64 = 0;
        for (u, v) in edges {
            let diff = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs();
            g = gcd(g, diff);
        }
        g.max(1) as usize
    }

    pub fn is_aperiodic(&self) -> bool {
        self.period() == 1
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn check_irreducible(p: &Matrix) -> Result<()> {
    let m = p.rows();
    // Forward reachability from state 0.
    let forward = reach(m, |u, v| p[(u, v)] > 0.0);
    if let Some(s) = forward.iter().position(|&r| !r) {
        return Err(Error::NotIrreducible { from: 1, to: s + 1 });
    }
    // Reverse reachability: can every state reach state 0?
    let backward = reach(m, |u, v| p[(v, u)] > 0.0);
    if let Some(s) = backward.iter().position(|&r| !r) {
        return Err(Error::NotIrreducible { from: s + 1, to: 1 });
    }
    Ok(())
}

fn reach(m: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; m];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..m {
            if !seen[v] && edge(u, v) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Stationary probability vector together with its construction residual.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryVector {
    pi: Vector,
    residual: f64,
}

impl StationaryVector {
    /// Validates a candidate: strictly positive entries, unit total mass
    /// within [`PI_SUM_TOL`], and residual `max |pi'(I-P)|` below
    /// `residual_tol`. The achieved residual is recorded.
    pub fn new(pi: Vector, chain: &TransitionMatrix, residual_tol: f64) -> Result<Self> {
        if pi.len() != chain.m() {
            return Err(Error::InvalidStationary(format!(
                "length {} does not match state count {}",
                pi.len(),
                chain.m()
            )));
        }
        if let Some((i, &x)) = pi.iter().enumerate().find(|(_, &x)| x <= 0.0) {
            return Err(Error::InvalidStationary(format!(
                "entry {} is {x}; irreducibility forces strictly positive probabilities",
                i + 1
            )));
        }
        let total = pi.sum();
        if (total - 1.0).abs() > PI_SUM_TOL {
            return Err(Error::InvalidStationary(format!("entries sum to {total}")));
        }
        let residual = stationary_residual(&pi, chain);
        if residual > residual_tol {
            return Err(Error::InvalidStationary(format!(
                "residual {residual:.3e} exceeds tolerance {residual_tol:.3e}"
            )));
        }
        Ok(StationaryVector { pi, residual })
    }

    /// As [`StationaryVector::new`] with the default residual tolerance.
    pub fn with_default_tol(pi: Vector, chain: &TransitionMatrix) -> Result<Self> {
        StationaryVector::new(pi, chain, DEFAULT_PI_RESIDUAL_TOL)
    }

    pub fn pi(&self) -> &Vector {
        &self.pi
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Probability of 0-based state `i`.
    pub fn get(&self, i: usize) -> f64 {
        self.pi[i]
    }

    /// Residual `max |pi'(I-P)|` measured at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// `max |pi'(I-P)|` for an arbitrary candidate vector.
pub fn stationary_residual(pi: &Vector, chain: &TransitionMatrix) -> f64 {
    chain.kernel().vec_mul(pi).max_norm()
}

/// The all-ones vector e of length `m`.
pub fn ones_vector(m: usize) -> Vector {
    Vector::ones(m)
}

/// Elementary vector e_i for 1-based state index `i`.
pub fn unit_vector(m: usize, i: usize) -> Result<Vector> {
    if i < 1 || i > m {
        return Err(Error::IndexOutOfRange { index: i, m });
    }
    Ok(Vector::unit(m, i - 1))
}

/// The all-ones matrix E = e e'.
pub fn ones_matrix(m: usize) -> Matrix {
    let e = Vector::ones(m);
    rank1(&e, &e)
}

/// Rank-one projector e pi' whose rows are all equal to pi'.
pub fn pi_matrix(pi: &StationaryVector) -> Matrix {
    rank1(&Vector::ones(pi.len()), pi.pi())
}

/// Diagonal matrix of mean return times, diag(1/pi_i).
pub fn d_matrix(pi: &StationaryVector) -> Matrix {
    make_diag(&Vector::from_fn(pi.len(), |i| 1.0 / pi.get(i)))
}
