//! Stationary-distribution procedures driven by a g-inverse of I - P.
//!
//! Three families: routes through A = I - (I-P)G, routes through
//! B = I - G(I-P), and direct routes that read pi off G itself when the
//! recipe vectors are known. Every route returns a validated
//! [`StationaryVector`] carrying its achieved residual.

use crate::chain::{StationaryVector, TransitionMatrix, DEFAULT_PI_RESIDUAL_TOL};
use crate::error::{Error, Result};
use crate::ginv::{classify, extract_params, GInvRecipe, GInverse, TChoice, UChoice, DEFAULT_CLASSIFY_TOL};
use crate::linalg::{inverse, Matrix, Vector};

/// Scale factor in the zero-projection test `|v'Ae| <= 1e-10 ||v|| ||A||`.
const ZERO_PROJECTION_FACTOR: f64 = 1e-10;

/// Scans the rows of A = I - (I-P)G for the first row with a sum bounded
/// away from zero and normalizes it. Rows of A are scalar multiples of pi',
/// so any such row works; the scan returns the 0-based row used.
pub(crate) fn row_scan_pi(a: &Matrix) -> Result<(usize, Vector)> {
    let threshold = ZERO_PROJECTION_FACTOR * (1.0 + a.max_norm());
    for r in 0..a.rows() {
        let sum: f64 = a.row(r).iter().sum();
        if sum.abs() > threshold {
            return Ok((r, a.row_vector(r).scale(1.0 / sum)));
        }
    }
    Err(Error::NoValidRow)
}

fn a_matrix(p: &TransitionMatrix, g: &GInverse) -> Matrix {
    Matrix::identity(p.m()).sub(&p.kernel().matmul(g.matrix()))
}

fn b_matrix(p: &TransitionMatrix, g: &GInverse) -> Matrix {
    Matrix::identity(p.m()).sub(&g.matrix().matmul(&p.kernel()))
}

fn finish(p: &TransitionMatrix, pi: Vector) -> Result<StationaryVector> {
    StationaryVector::new(pi, p, DEFAULT_PI_RESIDUAL_TOL)
}

/// pi from A = I - (I-P)G.
///
/// With a probing vector: pi' = v'A / v'Ae, rejecting v nearly orthogonal to
/// the column span. Without one, the first row of A with non-zero sum is
/// normalized; recipes known to satisfy condition 3 or 5 (fundamental, group,
/// Moore-Penrose) skip the scan since their first row always qualifies.
pub fn pi_from_a(
    p: &TransitionMatrix,
    g: &GInverse,
    v: Option<&Vector>,
) -> Result<StationaryVector> {
    let a = a_matrix(p, g);
    match v {
        Some(v) => {
            if v.len() != p.m() {
                return Err(Error::ShapeMismatch("probing vector length mismatch".into()));
            }
            let w = a.vec_mul(v);
            let denom = w.sum();
            if denom.abs() <= ZERO_PROJECTION_FACTOR * v.max_norm() * a.max_norm() {
                return Err(Error::ZeroProjection);
            }
            finish(p, w.scale(1.0 / denom))
        }
        None => {
            let known_13_or_15 = matches!(
                g.recipe(),
                GInvRecipe::Fundamental | GInvRecipe::GroupInverse | GInvRecipe::MoorePenrose
            );
            if known_13_or_15 {
                let sum: f64 = a.row(0).iter().sum();
                return finish(p, a.row_vector(0).scale(1.0 / sum));
            }
            let (_, pi) = row_scan_pi(&a)?;
            finish(p, pi)
        }
    }
}

/// pi from the symmetrized route pi' = e'A'A / e'A'Ae, which works for every
/// g-inverse since the denominator is alpha'alpha > 0.
///
/// When the g-inverse is (1,3) the plain column-sum route through A must
/// agree, and when it is (1,5) the first row of A must already be pi';
/// both side conditions are verified when they apply.
pub fn pi_from_a_symmetric(p: &TransitionMatrix, g: &GInverse) -> Result<StationaryVector> {
    let a = a_matrix(p, g);
    let alpha = a.row_sums();
    let w = a.vec_mul(&alpha);
    let denom = alpha.dot(&alpha);
    let pi = finish(p, w.scale(1.0 / denom))?;

    let labels = classify(&extract_params(p, g)?, p, &pi, DEFAULT_CLASSIFY_TOL);
    if labels.one_three {
        let colsum = a.col_sums();
        let total = colsum.sum();
        let check = colsum.scale(1.0 / total);
        let diff = check.max_diff(pi.pi());
        if diff > 1e-8 {
            return Err(Error::InvarianceViolated { discrepancy: diff, tolerance: 1e-8 });
        }
    }
    if labels.one_five {
        let diff = a.row_vector(0).max_diff(pi.pi());
        if diff > 1e-8 {
            return Err(Error::InvarianceViolated { discrepancy: diff, tolerance: 1e-8 });
        }
    }
    Ok(pi)
}

/// pi from B = I - G(I-P): pi' = v'BG / v'BGe. Excludes (1,2) g-inverses,
/// for which B G vanishes against pi. `v` defaults to e.
pub fn pi_from_b(
    p: &TransitionMatrix,
    g: &GInverse,
    v: Option<&Vector>,
) -> Result<StationaryVector> {
    let params = extract_params(p, g)?;
    if (params.gamma + 1.0).abs() < DEFAULT_CLASSIFY_TOL {
        return Err(Error::Gamma2Inverse);
    }
    let e = Vector::ones(p.m());
    let v = v.unwrap_or(&e);
    if v.len() != p.m() {
        return Err(Error::ShapeMismatch("probing vector length mismatch".into()));
    }
    if v.sum().abs() <= ZERO_PROJECTION_FACTOR * (1.0 + v.max_norm()) {
        return Err(Error::ZeroProjection);
    }
    let b = b_matrix(p, g);
    let w = g.matrix().vec_mul(&b.vec_mul(v));
    let denom = w.sum();
    if denom.abs() <= ZERO_PROJECTION_FACTOR * (1.0 + w.max_norm()) {
        return Err(Error::ZeroProjection);
    }
    finish(p, w.scale(1.0 / denom))
}

/// pi as row `i` (1-based) of B = I - G(I-P); valid for (1,5) g-inverses,
/// where every row of B is already pi' with no normalization.
pub fn pi_from_b_15(p: &TransitionMatrix, g: &GInverse, i: usize) -> Result<StationaryVector> {
    if i < 1 || i > p.m() {
        return Err(Error::IndexOutOfRange { index: i, m: p.m() });
    }
    let params = extract_params(p, g)?;
    let probe = finish(p, {
        let a = a_matrix(p, g);
        row_scan_pi(&a)?.1
    })?;
    let labels = classify(&params, p, &probe, DEFAULT_CLASSIFY_TOL);
    if !labels.one_five {
        return Err(Error::Not15Inverse);
    }
    let b = b_matrix(p, g);
    finish(p, b.row_vector(i - 1))
}

/// pi from the column sums of a (1,4) g-inverse: pi' = e'G / e'Ge.
///
/// The (1,2) case is excluded: there e'G vanishes identically (the column
/// sums of the Moore-Penrose inverse of I - P are zero), so the quotient is
/// 0/0 and carries no information.
pub fn pi_from_g_14(p: &TransitionMatrix, g: &GInverse) -> Result<StationaryVector> {
    let params = extract_params(p, g)?;
    let probe = finish(p, {
        let a = a_matrix(p, g);
        row_scan_pi(&a)?.1
    })?;
    let labels = classify(&params, p, &probe, DEFAULT_CLASSIFY_TOL);
    if !labels.one_four {
        return Err(Error::Not14Inverse);
    }
    if labels.one_two {
        return Err(Error::Gamma2Inverse);
    }
    let w = g.matrix().col_sums();
    let denom = w.sum();
    finish(p, w.scale(1.0 / denom))
}

/// pi read directly off G when G is exactly the inverse of I - P + t u':
/// pi' = u'G / u'Ge.
///
/// The canonical recipes shortcut the denominator: with t = e it is exactly
/// one (so pi' = u'G as-is), with u = e_b only row b of G is needed, with
/// u = e only the column sums, and the column-replacement recipe reads row b
/// unnormalized.
pub fn pi_from_tu(p: &TransitionMatrix, g: &GInverse) -> Result<StationaryVector> {
    let u = g.u_vector().ok_or(Error::NoRecipeVectors)?.clone();
    let gm = g.matrix();

    // Unnormalized fast paths where the denominator is exactly one.
    if let GInvRecipe::TableFamily { t, u: uc } = g.recipe() {
        if matches!(t, TChoice::Ones) {
            let w = match uc {
                UChoice::Unit(b) => gm.row_vector(b - 1),
                UChoice::Ones => gm.col_sums(),
                UChoice::PRow(_) => gm.vec_mul(&u),
            };
            return finish(p, w);
        }
        if let (TChoice::Tb(_), UChoice::Unit(b)) = (t, uc) {
            return finish(p, gm.row_vector(b - 1));
        }
        // Remaining table recipes: row/column reads with normalization.
        let w = match uc {
            UChoice::Unit(b) => gm.row_vector(b - 1),
            UChoice::Ones => gm.col_sums(),
            UChoice::PRow(_) => gm.vec_mul(&u),
        };
        let denom = w.sum();
        return finish(p, w.scale(1.0 / denom));
    }
    if matches!(g.recipe(), GInvRecipe::Fundamental) {
        // t = e for the fundamental matrix, so u'G needs no normalization.
        return finish(p, gm.vec_mul(&u));
    }

    let w = gm.vec_mul(&u);
    let denom = w.sum();
    if denom.abs() <= ZERO_PROJECTION_FACTOR * (1.0 + w.max_norm()) {
        return Err(Error::ZeroProjection);
    }
    finish(p, w.scale(1.0 / denom))
}

/// pi from the partitioned inverse: solve x'(I - P11) = beta' for the leading
/// block, append 1, normalize. Needs no g-inverse of the full kernel.
pub fn pi_rhode(p: &TransitionMatrix) -> Result<StationaryVector> {
    let m = p.m();
    if m == 1 {
        return finish(p, Vector::ones(1));
    }
    let kernel = p.kernel();
    let block_t = Matrix::from_fn(m - 1, m - 1, |i, j| kernel[(j, i)]);
    let beta = Vector::from_fn(m - 1, |j| p.p()[(m - 1, j)]);
    let x = inverse(&block_t)?.mul_vec(&beta);
    let mut v = x.to_vec();
    v.push(1.0);
    let w = Vector::new(v)?;
    let total = w.sum();
    finish(p, w.scale(1.0 / total))
}

/// Default stationary route: one factorization of I - P + e e_1', whose
/// first row is pi' outright. The same factorization serves the passage-time
/// procedures, which is why this is the default.
pub fn pi_default(p: &TransitionMatrix) -> Result<StationaryVector> {
    let g = crate::ginv::build(p, GInvRecipe::g_eb(1), None)?;
    pi_from_tu(p, &g)
}
