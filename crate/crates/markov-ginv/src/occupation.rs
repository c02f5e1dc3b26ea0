//! Expected occupation-time sums: the running total of P^k over the first n
//! time points, its closed forms through a g-inverse, and the asymptotic
//! split into a linear drift plus the group inverse.

use crate::chain::{pi_matrix, StationaryVector, TransitionMatrix};
use crate::error::{Error, Result};
use crate::ginv::{group_inverse_via_invariance, GInverse};
use crate::linalg::{mat_power, Matrix};

/// Which expression produced an occupation sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccupationRoute {
    Explicit,
    ClosedLeft,
    ClosedRight,
}

/// Which side the g-inverse is applied from in the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedSide {
    Left,
    Right,
}

/// Expected visit counts over the time points 0..n-1.
#[derive(Debug, Clone)]
pub struct OccupationResult {
    pub n: usize,
    pub a_n: Matrix,
    pub route: OccupationRoute,
}

/// The literal power sum I + P + ... + P^(n-1), accumulated term by term.
/// This is the oracle the closed forms are checked against, so it stays as
/// plain as possible.
pub fn occupation_explicit(p: &TransitionMatrix, n: usize) -> Result<OccupationResult> {
    if n < 1 {
        return Err(Error::InvalidHorizon);
    }
    let m = p.m();
    let mut acc = Matrix::identity(m);
    let mut term = Matrix::identity(m);
    for _ in 1..n {
        term = term.matmul(p.p());
        acc = acc.add(&term);
    }
    Ok(OccupationResult { n, a_n: acc, route: OccupationRoute::Explicit })
}

/// Closed form through a g-inverse:
/// `n Pi + (I - Pi) G (I - P^n)` on the left, or
/// `n Pi + (I - P^n) G (I - Pi)` on the right.
pub fn occupation_closed(
    p: &TransitionMatrix,
    g: &GInverse,
    pi: &StationaryVector,
    n: usize,
    side: ClosedSide,
) -> Result<OccupationResult> {
    if n < 1 {
        return Err(Error::InvalidHorizon);
    }
    let m = p.m();
    let big_pi = pi_matrix(pi);
    let q = Matrix::identity(m).sub(&big_pi);
    let pn = mat_power(p.p(), n)?;
    let i_minus_pn = Matrix::identity(m).sub(&pn);
    let (a_n, route) = match side {
        ClosedSide::Left => (
            big_pi.scale(n as f64).add(&q.matmul(g.matrix()).matmul(&i_minus_pn)),
            OccupationRoute::ClosedLeft,
        ),
        ClosedSide::Right => (
            big_pi.scale(n as f64).add(&i_minus_pn.matmul(g.matrix()).matmul(&q)),
            OccupationRoute::ClosedRight,
        ),
    };
    Ok(OccupationResult { n, a_n, route })
}

/// Asymptotic approximation `n Pi + A#`, with the group inverse obtained by
/// the invariant sandwich from whatever g-inverse is at hand. Valid only for
/// aperiodic chains, where P^n actually converges to Pi.
pub fn occupation_asymptotic(
    p: &TransitionMatrix,
    g: &GInverse,
    pi: &StationaryVector,
    n: usize,
) -> Result<Matrix> {
    let period = p.period();
    if period > 1 {
        return Err(Error::PeriodicChain { period });
    }
    let sharp = group_inverse_via_invariance(g.matrix(), pi);
    Ok(pi_matrix(pi).scale(n as f64).add(&sharp))
}
