//! Mean first passage times, second moments and variances.
//!
//! The closed forms read everything off a single g-inverse G of I - P. The
//! workhorse is the elemental expression
//! `m_ij = (g_jj - g_ij + delta_ij)/pi_j + (g_i. - g_j.)`, which holds for
//! every g-inverse; when G has constant row sums the row-sum difference drops
//! out. The single-factorization route squares the inverse of I - P + e e_b'
//! to get second moments as well.

use crate::chain::{StationaryVector, TransitionMatrix};
use crate::error::{Error, Result};
use crate::ginv::{build, group_inverse_via_invariance, GInvRecipe, GInverse};
use crate::linalg::{diag_of, Matrix, Vector};
use crate::stationary::pi_from_a;

/// Spread (relative to scale) below which row sums count as constant.
pub const CONSTANT_ROW_SUM_TOL: f64 = 1e-8;

/// Variances in [-VARIANCE_CLAMP_TOL, 0) are clamped to zero; anything more
/// negative is an error rather than rounding.
pub const VARIANCE_CLAMP_TOL: f64 = 1e-8;

/// Relative disagreement allowed between the two diagonal second-moment
/// routes before the cross-check fails.
const DIAG_CONSISTENCY_TOL: f64 = 1e-6;

fn resolve_pi<'a>(
    p: &TransitionMatrix,
    g: &GInverse,
    pi: Option<&'a StationaryVector>,
    owned: &'a mut Option<StationaryVector>,
) -> Result<&'a StationaryVector> {
    match pi {
        Some(pi) => Ok(pi),
        None => {
            *owned = Some(pi_from_a(p, g, None)?);
            Ok(owned.as_ref().unwrap())
        }
    }
}

fn row_sum_spread(sums: &Vector) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &s in sums.iter() {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    hi - lo
}

fn has_constant_row_sums(sums: &Vector) -> bool {
    row_sum_spread(sums) <= CONSTANT_ROW_SUM_TOL * (1.0 + sums.max_norm())
}

/// Full mean first passage time matrix from any g-inverse.
///
/// `pi` may be omitted, in which case it is recovered from the same G by the
/// row-scan route.
pub fn mfpt(
    p: &TransitionMatrix,
    g: &GInverse,
    pi: Option<&StationaryVector>,
) -> Result<Matrix> {
    let mut owned = None;
    let pi = resolve_pi(p, g, pi, &mut owned)?;
    let m = p.m();
    let gm = g.matrix();
    let rs = gm.row_sums();
    Ok(Matrix::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (gm[(j, j)] - gm[(i, j)] + delta) / pi.get(j) + (rs[i] - rs[j])
    }))
}

/// Short-form mean first passage times, valid only when G e is a constant
/// multiple of e (the fundamental matrix, the group inverse and the
/// inverse of I - P + e u' all qualify).
pub fn mfpt_ge_condition(
    p: &TransitionMatrix,
    g: &GInverse,
    pi: Option<&StationaryVector>,
) -> Result<Matrix> {
    let rs = g.matrix().row_sums();
    if !has_constant_row_sums(&rs) {
        return Err(Error::RowSumNotConstant { spread: row_sum_spread(&rs) });
    }
    let mut owned = None;
    let pi = resolve_pi(p, g, pi, &mut owned)?;
    let m = p.m();
    let gm = g.matrix();
    Ok(Matrix::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (gm[(j, j)] - gm[(i, j)] + delta) / pi.get(j)
    }))
}

/// Joint computation of pi and M from one g-inverse.
///
/// Rows of A = I - (I-P)G are formed one at a time until one has a non-zero
/// sum; that row yields pi, and M follows from G's entries plus the scanned
/// row alone.
pub fn mfpt_joint(
    p: &TransitionMatrix,
    g: &GInverse,
) -> Result<(StationaryVector, Matrix)> {
    let m = p.m();
    let gm = g.matrix();
    let pm = p.p();

    let mut scan_row = None;
    for i in 0..m {
        let row = Vector::from_fn(m, |j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            let mut acc = delta - gm[(i, j)];
            for k in 0..m {
                acc += pm[(i, k)] * gm[(k, j)];
            }
            acc
        });
        let sum = row.sum();
        if sum.abs() > 1e-10 * (1.0 + row.max_norm()) {
            scan_row = Some((row, sum));
            break;
        }
    }
    let (a_row, s) = scan_row.ok_or(Error::NoValidRow)?;

    let pi = StationaryVector::new(
        a_row.scale(1.0 / s),
        p,
        crate::chain::DEFAULT_PI_RESIDUAL_TOL,
    )?;

    let rs = gm.row_sums();
    let m1 = Matrix::from_fn(m, m, |i, j| {
        if i == j {
            s / a_row[j]
        } else {
            (gm[(j, j)] - gm[(i, j)]) * s / a_row[j] + (rs[i] - rs[j])
        }
    });
    Ok((pi, m1))
}

/// One factorization of I - P + e e_b' yields pi (row b of the inverse) and
/// the complete M.
pub fn mfpt_geb(p: &TransitionMatrix, b: usize) -> Result<(StationaryVector, Matrix)> {
    let g = build(p, GInvRecipe::g_eb(b), None)?;
    let gm = g.matrix();
    let b0 = b - 1;
    let m = p.m();
    let pi = StationaryVector::new(
        gm.row_vector(b0),
        p,
        crate::chain::DEFAULT_PI_RESIDUAL_TOL,
    )?;
    let m1 = Matrix::from_fn(m, m, |i, j| {
        if i == j {
            1.0 / gm[(b0, j)]
        } else {
            (gm[(j, j)] - gm[(i, j)]) / gm[(b0, j)]
        }
    });
    Ok((pi, m1))
}

/// Which rank-one update produces the single-column solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnVariant {
    /// Update by (column j of P) e_j': column j of M is the row-sum vector.
    Col,
    /// Update by e_j (row j of P): row sums shifted by one off the target.
    Row,
    /// Update by e_j e_j': row-sum differences against row j.
    Both,
}

/// Column `j` (1-based) of M from a single factorization, without pi.
pub fn mfpt_column(p: &TransitionMatrix, j: usize, variant: ColumnVariant) -> Result<Vector> {
    let m = p.m();
    let recipe = match variant {
        ColumnVariant::Col => GInvRecipe::g_ab_c(j, j),
        ColumnVariant::Row => GInvRecipe::g_ab_r(j, j),
        ColumnVariant::Both => GInvRecipe::g_ab(j, j),
    };
    let g = build(p, recipe, None)?;
    let rs = g.matrix().row_sums();
    let j0 = j - 1;
    Ok(match variant {
        ColumnVariant::Col => rs,
        ColumnVariant::Row => Vector::from_fn(m, |i| {
            if i == j0 {
                (0..m).map(|k| p.p()[(j0, k)] * rs[k]).sum()
            } else {
                rs[i] - 1.0
            }
        }),
        ColumnVariant::Both => Vector::from_fn(m, |i| {
            if i == j0 {
                rs[j0]
            } else {
                rs[i] - rs[j0]
            }
        }),
    })
}

/// Diagonal second moments of the first return times.
///
/// Computed through the g-independent invariant sandwich
/// (I - e pi') G (I - e pi'), so every g-inverse gives the same answer. When
/// `m1` is supplied, the alternative route through pi'M is evaluated and the
/// two must agree.
pub fn m2_diag(
    p: &TransitionMatrix,
    g: &GInverse,
    pi: &StationaryVector,
    m1: Option<&Matrix>,
) -> Result<Vector> {
    let m = p.m();
    let h = group_inverse_via_invariance(g.matrix(), pi);
    let md2 = Vector::from_fn(m, |j| {
        let pj = pi.get(j);
        1.0 / pj + 2.0 * h[(j, j)] / (pj * pj)
    });
    if let Some(m1) = m1 {
        let mut worst = 0.0f64;
        for j in 0..m {
            let weighted: f64 = (0..m).map(|i| pi.get(i) * m1[(i, j)]).sum();
            let alt = 2.0 * weighted / pi.get(j) - 1.0 / pi.get(j);
            worst = worst.max((md2[j] - alt).abs() / (1.0 + md2[j].abs()));
        }
        if worst > DIAG_CONSISTENCY_TOL {
            return Err(Error::InvarianceViolated {
                discrepancy: worst,
                tolerance: DIAG_CONSISTENCY_TOL,
            });
        }
    }
    Ok(md2)
}

/// Full second-moment matrix from any g-inverse and a previously computed M.
///
/// The constant-row-sum short form is used when it applies; otherwise the
/// general elemental expression. Diagonal entries always come from the
/// g-independent route.
pub fn m2(
    p: &TransitionMatrix,
    g: &GInverse,
    pi: &StationaryVector,
    m1: &Matrix,
) -> Result<Matrix> {
    let m = p.m();
    let gm = g.matrix();
    let md2 = m2_diag(p, g, pi, Some(m1))?;
    let rs = gm.row_sums();
    let constant = has_constant_row_sums(&rs);
    Ok(Matrix::from_fn(m, m, |i, j| {
        let cross: f64 = (0..m).map(|k| (gm[(i, k)] - gm[(j, k)]) * m1[(k, j)]).sum();
        if constant {
            2.0 * cross + m1[(i, j)] * md2[j] / m1[(j, j)]
        } else {
            let delta = if i == j { 1.0 } else { 0.0 };
            2.0 * cross - m1[(i, j)] + (delta - gm[(i, j)] + gm[(j, j)]) * (md2[j] + m1[(j, j)])
        }
    }))
}

/// First and second passage moments, and variances, from one factorization.
#[derive(Debug, Clone)]
pub struct GebMoments {
    pub pi: StationaryVector,
    pub m1: Matrix,
    pub m2: Matrix,
    pub var: Matrix,
    /// Whether any variance in [-1e-8, 0) was reported as zero.
    pub variance_clamped: bool,
}

/// Single-inversion moments: invert I - P + e e_b', square it, and read off
/// pi, M, the second moments and the variances.
pub fn m2_geb(p: &TransitionMatrix, b: usize) -> Result<GebMoments> {
    let g = build(p, GInvRecipe::g_eb(b), None)?;
    let gm = g.matrix();
    let g2 = gm.matmul(gm);
    let b0 = b - 1;
    let m = p.m();

    let pi = StationaryVector::new(
        gm.row_vector(b0),
        p,
        crate::chain::DEFAULT_PI_RESIDUAL_TOL,
    )?;

    let m1 = Matrix::from_fn(m, m, |i, j| {
        if i == j {
            1.0 / gm[(b0, j)]
        } else {
            (gm[(j, j)] - gm[(i, j)]) / gm[(b0, j)]
        }
    });

    let m2 = Matrix::from_fn(m, m, |i, j| {
        let mjj = m1[(j, j)];
        let tail = gm[(j, j)] - g2[(b0, j)];
        if i == j {
            mjj * (1.0 + 2.0 * mjj * tail)
        } else {
            let mij = m1[(i, j)];
            2.0 * mjj * (g2[(j, j)] - g2[(i, j)] + mij * tail) - mij
        }
    });

    let mut clamped = false;
    let mut var = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let v = m2[(i, j)] - m1[(i, j)] * m1[(i, j)];
            var[(i, j)] = if v >= 0.0 {
                v
            } else if v >= -VARIANCE_CLAMP_TOL {
                clamped = true;
                0.0
            } else {
                return Err(Error::NegativeVariance { value: v, row: i + 1, col: j + 1 });
            };
        }
    }

    Ok(GebMoments { pi, m1, m2, var, variance_clamped: clamped })
}

/// The vector of pi-weighted column averages of M: alpha_j = sum_i pi_i m_ij.
///
/// Evaluated elementally from G without forming M, using the shortened forms
/// for the fundamental matrix, the group inverse and constant-row-sum G.
pub fn alpha_vector(
    p: &TransitionMatrix,
    g: &GInverse,
    pi: &StationaryVector,
) -> Result<Vector> {
    let m = p.m();
    let gm = g.matrix();
    match g.recipe() {
        GInvRecipe::Fundamental => Ok(Vector::from_fn(m, |j| gm[(j, j)] / pi.get(j))),
        GInvRecipe::GroupInverse => Ok(Vector::from_fn(m, |j| 1.0 + gm[(j, j)] / pi.get(j))),
        _ => {
            let rs = gm.row_sums();
            if has_constant_row_sums(&rs) {
                Ok(Vector::from_fn(m, |j| {
                    let weighted_col: f64 = (0..m).map(|i| pi.get(i) * gm[(i, j)]).sum();
                    1.0 + (gm[(j, j)] - weighted_col) / pi.get(j)
                }))
            } else {
                let weighted_rs: f64 = (0..m).map(|i| pi.get(i) * rs[i]).sum();
                Ok(Vector::from_fn(m, |j| {
                    let weighted_col: f64 = (0..m).map(|i| pi.get(i) * gm[(i, j)]).sum();
                    1.0 + weighted_rs - rs[j] + (gm[(j, j)] - weighted_col) / pi.get(j)
                }))
            }
        }
    }
}

/// Record of which recipe and formulas produced a set of moments.
#[derive(Debug, Clone)]
pub struct MomentsRoute {
    pub recipe: String,
    pub pi_rule: String,
    pub m1_rule: String,
    pub m2_rule: Option<String>,
}

/// Mean first passage times with optional second moments and variances,
/// plus the diagonal matrix of mean return times and the route that
/// produced each piece.
#[derive(Debug, Clone)]
pub struct PassageMoments {
    pub pi: StationaryVector,
    pub m1: Matrix,
    pub m2: Option<Matrix>,
    pub var: Option<Matrix>,
    pub d: Matrix,
    pub variance_clamped: bool,
    pub route: MomentsRoute,
}

impl PassageMoments {
    /// Default route: the single-factorization procedure with b = 1.
    pub fn compute(p: &TransitionMatrix) -> Result<Self> {
        let g = m2_geb(p, 1)?;
        let d = diag_of(&g.m1)?;
        Ok(PassageMoments {
            pi: g.pi,
            m1: g.m1,
            m2: Some(g.m2),
            var: Some(g.var),
            d,
            variance_clamped: g.variance_clamped,
            route: MomentsRoute {
                recipe: "eb(b=1)".into(),
                pi_rule: "g-row".into(),
                m1_rule: "geb-elemental".into(),
                m2_rule: Some("geb-squared".into()),
            },
        })
    }

    /// Moments through an arbitrary g-inverse: joint row-scan for pi and M,
    /// then the elemental second-moment form when requested.
    pub fn compute_with(
        p: &TransitionMatrix,
        g: &GInverse,
        want_m2: bool,
    ) -> Result<Self> {
        let (pi, m1) = mfpt_joint(p, g)?;
        let d = diag_of(&m1)?;
        let (m2v, var, clamped, m2_rule) = if want_m2 {
            let m2m = m2(p, g, &pi, &m1)?;
            let m = p.m();
            let mut clamped = false;
            let mut var = Matrix::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    let v = m2m[(i, j)] - m1[(i, j)] * m1[(i, j)];
                    var[(i, j)] = if v >= 0.0 {
                        v
                    } else if v >= -VARIANCE_CLAMP_TOL {
                        clamped = true;
                        0.0
                    } else {
                        return Err(Error::NegativeVariance {
                            value: v,
                            row: i + 1,
                            col: j + 1,
                        });
                    };
                }
            }
            let rule = if has_constant_row_sums(&g.matrix().row_sums()) {
                "constant-rowsum-elemental"
            } else {
                "general-elemental"
            };
            (Some(m2m), Some(var), clamped, Some(rule.to_string()))
        } else {
            (None, None, false, None)
        };
        Ok(PassageMoments {
            pi,
            m1,
            m2: m2v,
            var,
            d,
            variance_clamped: clamped,
            route: MomentsRoute {
                recipe: g.label(),
                pi_rule: "a-row-scan".into(),
                m1_rule: "joint-elemental".into(),
                m2_rule,
            },
        })
    }
}
