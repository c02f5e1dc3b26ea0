//! Generalized inverses of the Markovian kernel I - P.
//!
//! Covers the named rank-one-update family (inverses of I - P + t u' for the
//! canonical t/u choices), the fundamental matrix, the group inverse, the
//! Moore-Penrose inverse and Rhode's partitioned inverse, together with
//! condition profiling, the unique (alpha, beta, gamma) signature of a
//! g-inverse, classification into the multi-condition families, conversion
//! between recipes without refactorizing, and the scaled-update invariance
//! family.

use crate::chain::{pi_matrix, StationaryVector, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::{inverse, rank1, Matrix, Vector};
use crate::stationary::row_scan_pi;

/// Default max-norm tolerance for the five condition residuals.
pub const DEFAULT_CONDITION_TOL: f64 = 1e-8;

/// Default tolerance for classification; looser than the condition tolerance
/// because the alpha/beta comparisons compound two solves.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-7;

/// Agreement required between members of the scaled-update family.
pub const DELTA_INVARIANCE_TOL: f64 = 1e-8;

/// Choice of the column vector t in I - P + t u'. Indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum TChoice {
    /// The all-ones vector e.
    Ones,
    /// The elementary vector e_a.
    Unit(usize),
    /// The a-th column of P.
    PColumn(usize),
    /// e - e_b + (b-th column of P); pairing this with u = e_b replaces the
    /// b-th column of I - P by e.
    Tb(usize),
}

/// Choice of the row vector u' in I - P + t u'. Indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum UChoice {
    /// e'.
    Ones,
    /// e_b'.
    Unit(usize),
    /// The b-th row of P.
    PRow(usize),
}

/// How a g-inverse of I - P is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum GInvRecipe {
    /// Direct inverse of I - P + t u' for a canonical (t, u) pair.
    TableFamily { t: TChoice, u: UChoice },
    /// The fundamental matrix, the inverse of I - P + e pi'.
    Fundamental,
    /// The unique (1,2,5) inverse: fundamental matrix minus e pi'.
    GroupInverse,
    /// The unique (1,2,3,4) inverse.
    MoorePenrose,
    /// Partitioned inverse: the inverse of the leading principal block of
    /// I - P, bordered by zeros.
    Rhode,
    /// Inverse of I - P + t u' for caller-supplied vectors.
    CustomTU { t: Vector, u: Vector },
    /// A caller-supplied matrix, verified to satisfy condition 1 at build.
    CustomMatrix { g: Matrix },
}

impl GInvRecipe {
    pub fn g_ee() -> Self {
        GInvRecipe::TableFamily { t: TChoice::Ones, u: UChoice::Ones }
    }
    pub fn g_eb_r(b: usize) -> Self {
        GInvRecipe::TableFamily { t: TChoice::Ones, u: UChoice::PRow(b) }
    }
    pub fn g_eb(b: usize) -> Self {
        GInvRecipe::TableFamily { t: TChoice::Ones, u: UChoice::Unit(b) }
    }
    pub fn g_ae_c(a: usize) -> Self {
        GInvRecipe::TableFamily { t: TChoice::PColumn(a), u: UChoice::Ones }
    }
    pub fn g_ab_cr(a: usize, b: usize) -> Self {
        GInvRecipe::TableFamily { t: TChoice::PColumn(a), u: UChoice::PRow(b) }
    }
    pub fn g_ab_c(a: usize, b: usize) -> Self {
        GInvRecipe::TableFamily { t: TChoice::PColumn(a), u: UChoice::Unit(b) }
    }
    pub fn g_ae(a: usize) -> Self {
        GInvRecipe::TableFamily { t: TChoice::Unit(a), u: UChoice::Ones }
    }
    pub fn g_ab_r(a: usize, b: usize) -> Self {
        GInvRecipe::TableFamily { t: TChoice::Unit(a), u: UChoice::PRow(b) }
    }
    pub fn g_ab(a: usize, b: usize) -> Self {
        GInvRecipe::TableFamily { t: TChoice::Unit(a), u: UChoice::Unit(b) }
    }
    pub fn g_tb_c(b: usize) -> Self {
        GInvRecipe::TableFamily { t: TChoice::Tb(b), u: UChoice::Unit(b) }
    }

    /// All ten canonical rank-one-update recipes for the given indices.
    pub fn table_recipes(a: usize, b: usize) -> Vec<GInvRecipe> {
        vec![
            GInvRecipe::g_ee(),
            GInvRecipe::g_eb_r(b),
            GInvRecipe::g_eb(b),
            GInvRecipe::g_ae_c(a),
            GInvRecipe::g_ab_cr(a, b),
            GInvRecipe::g_ab_c(a, b),
            GInvRecipe::g_ae(a),
            GInvRecipe::g_ab_r(a, b),
            GInvRecipe::g_ab(a, b),
            GInvRecipe::g_tb_c(b),
        ]
    }

    /// Short identifier for reports and route records.
    pub fn label(&self) -> String {
        match self {
            GInvRecipe::TableFamily { t, u } => match (t, u) {
                (TChoice::Ones, UChoice::Ones) => "ee".into(),
                (TChoice::Ones, UChoice::PRow(b)) => format!("eb_r(b={b})"),
                (TChoice::Ones, UChoice::Unit(b)) => format!("eb(b={b})"),
                (TChoice::PColumn(a), UChoice::Ones) => format!("ae_c(a={a})"),
                (TChoice::PColumn(a), UChoice::PRow(b)) => format!("ab_cr(a={a},b={b})"),
                (TChoice::PColumn(a), UChoice::Unit(b)) => format!("ab_c(a={a},b={b})"),
                (TChoice::Unit(a), UChoice::Ones) => format!("ae(a={a})"),
                (TChoice::Unit(a), UChoice::PRow(b)) => format!("ab_r(a={a},b={b})"),
                (TChoice::Unit(a), UChoice::Unit(b)) => format!("ab(a={a},b={b})"),
                (TChoice::Tb(b), UChoice::Unit(b2)) if b == b2 => format!("tb_c(b={b})"),
                (t, u) => format!("table({t:?},{u:?})"),
            },
            GInvRecipe::Fundamental => "fundamental".into(),
            GInvRecipe::GroupInverse => "group".into(),
            GInvRecipe::MoorePenrose => "mp".into(),
            GInvRecipe::Rhode => "rhode".into(),
            GInvRecipe::CustomTU { .. } => "custom_tu".into(),
            GInvRecipe::CustomMatrix { .. } => "custom_matrix".into(),
        }
    }
}

/// A concrete g-inverse of I - P plus the recipe that produced it.
///
/// When the matrix is a plain inverse of I - P + t u', the materialized t and
/// u are retained; procedures that need the recipe vectors (the direct
/// stationary routes) require them.
#[derive(Debug, Clone)]
pub struct GInverse {
    g: Matrix,
    recipe: GInvRecipe,
    t: Option<Vector>,
    u: Option<Vector>,
}

impl GInverse {
    pub fn matrix(&self) -> &Matrix {
        &self.g
    }

    pub fn recipe(&self) -> &GInvRecipe {
        &self.recipe
    }

    /// The t vector, when the matrix is exactly the inverse of I - P + t u'.
    pub fn t_vector(&self) -> Option<&Vector> {
        self.t.as_ref()
    }

    /// The u vector, when the matrix is exactly the inverse of I - P + t u'.
    pub fn u_vector(&self) -> Option<&Vector> {
        self.u.as_ref()
    }

    pub fn label(&self) -> String {
        self.recipe.label()
    }
}

fn check_index(i: usize, m: usize) -> Result<usize> {
    if i < 1 || i > m {
        Err(Error::IndexOutOfRange { index: i, m })
    } else {
        Ok(i - 1)
    }
}

fn materialize_t(p: &TransitionMatrix, t: &TChoice) -> Result<Vector> {
    let m = p.m();
    Ok(match t {
        TChoice::Ones => Vector::ones(m),
        TChoice::Unit(a) => Vector::unit(m, check_index(*a, m)?),
        TChoice::PColumn(a) => p.p().col(check_index(*a, m)?),
        TChoice::Tb(b) => {
            let b0 = check_index(*b, m)?;
            let col = p.p().col(b0);
            Vector::ones(m).sub(&Vector::unit(m, b0)).add(&col)
        }
    })
}

fn materialize_u(p: &TransitionMatrix, u: &UChoice) -> Result<Vector> {
    let m = p.m();
    Ok(match u {
        UChoice::Ones => Vector::ones(m),
        UChoice::Unit(b) => Vector::unit(m, check_index(*b, m)?),
        UChoice::PRow(b) => p.p().row_vector(check_index(*b, m)?),
    })
}

fn invert_update(p: &TransitionMatrix, t: &Vector, u: &Vector) -> Result<Matrix> {
    let m = p.m();
    if t.len() != m || u.len() != m {
        return Err(Error::ShapeMismatch(format!(
            "recipe vectors have lengths {} and {}, expected {m}",
            t.len(),
            u.len()
        )));
    }
    inverse(&p.kernel().add(&rank1(t, u)))
}

fn require_pi<'a>(
    pi: Option<&'a StationaryVector>,
    p: &TransitionMatrix,
    what: &'static str,
) -> Result<&'a StationaryVector> {
    let pi = pi.ok_or(Error::MissingPi(what))?;
    if pi.len() != p.m() {
        return Err(Error::ShapeMismatch(format!(
            "stationary vector of length {} does not match {} states",
            pi.len(),
            p.m()
        )));
    }
    Ok(pi)
}

/// Constructs the g-inverse described by `recipe`.
///
/// Only the fundamental, group and Moore-Penrose recipes need `pi`; the
/// rank-one-update family and Rhode's inverse are built from P alone.
/// Caller-supplied matrices are verified against condition 1 with the default
/// tolerance.
pub fn build(
    p: &TransitionMatrix,
    recipe: GInvRecipe,
    pi: Option<&StationaryVector>,
) -> Result<GInverse> {
    build_with_tol(p, recipe, pi, DEFAULT_CONDITION_TOL)
}

/// As [`build`], with an explicit condition-1 tolerance for custom matrices.
pub fn build_with_tol(
    p: &TransitionMatrix,
    recipe: GInvRecipe,
    pi: Option<&StationaryVector>,
    cond_tol: f64,
) -> Result<GInverse> {
    let m = p.m();
    match recipe {
        GInvRecipe::TableFamily { ref t, ref u } => {
            let tv = materialize_t(p, t)?;
            let uv = materialize_u(p, u)?;
            let g = invert_update(p, &tv, &uv)?;
            Ok(GInverse { g, recipe, t: Some(tv), u: Some(uv) })
        }
        GInvRecipe::CustomTU { ref t, ref u } => {
            let (tv, uv) = (t.clone(), u.clone());
            let g = invert_update(p, &tv, &uv)?;
            Ok(GInverse { g, recipe, t: Some(tv), u: Some(uv) })
        }
        GInvRecipe::Fundamental => {
            let pi = require_pi(pi, p, "fundamental")?;
            let g = inverse(&p.kernel().add(&pi_matrix(pi)))?;
            Ok(GInverse {
                g,
                recipe,
                t: Some(Vector::ones(m)),
                u: Some(pi.pi().clone()),
            })
        }
        GInvRecipe::GroupInverse => {
            let pi = require_pi(pi, p, "group inverse")?;
            let big_pi = pi_matrix(pi);
            let z = inverse(&p.kernel().add(&big_pi))?;
            Ok(GInverse { g: z.sub(&big_pi), recipe, t: None, u: None })
        }
        GInvRecipe::MoorePenrose => {
            let pi = require_pi(pi, p, "Moore-Penrose")?;
            let w = inverse(&p.kernel().add(&rank1(pi.pi(), &Vector::ones(m))))?;
            let pi_dot = pi.pi().dot(pi.pi());
            let correction = rank1(&Vector::ones(m), pi.pi()).scale(1.0 / (m as f64 * pi_dot));
            Ok(GInverse { g: w.sub(&correction), recipe, t: None, u: None })
        }
        GInvRecipe::Rhode => {
            let mut g = Matrix::zeros(m, m);
            if m > 1 {
                let pk = p.kernel();
                let block = Matrix::from_fn(m - 1, m - 1, |i, j| pk[(i, j)]);
                let inv = inverse(&block)?;
                for i in 0..m - 1 {
                    for j in 0..m - 1 {
                        g[(i, j)] = inv[(i, j)];
                    }
                }
            }
            Ok(GInverse { g, recipe, t: None, u: None })
        }
        GInvRecipe::CustomMatrix { ref g } => {
            if g.rows() != m || g.cols() != m {
                return Err(Error::ShapeMismatch(format!(
                    "custom matrix is {}x{}, expected {m}x{m}",
                    g.rows(),
                    g.cols()
                )));
            }
            let residual = condition1_residual(p, g);
            if residual > cond_tol {
                return Err(Error::Condition1Failed { residual, tolerance: cond_tol });
            }
            let gm = g.clone();
            Ok(GInverse { g: gm, recipe, t: None, u: None })
        }
    }
}

/// Max-norm residual of (I-P) G (I-P) - (I-P).
pub fn condition1_residual(p: &TransitionMatrix, g: &Matrix) -> f64 {
    let a = p.kernel();
    a.matmul(g).matmul(&a).max_diff(&a)
}

/// Tolerance-tested truth values of the five g-inverse conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionProfile {
    holds: [bool; 5],
    residuals: [f64; 5],
    tol: f64,
}

impl ConditionProfile {
    /// Whether condition `k` (1-based, 1..=5) holds at the profile tolerance.
    pub fn holds(&self, k: usize) -> bool {
        self.holds[k - 1]
    }

    /// Max-norm residual of condition `k` (1-based).
    pub fn residual(&self, k: usize) -> f64 {
        self.residuals[k - 1]
    }

    pub fn residuals(&self) -> &[f64; 5] {
        &self.residuals
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// The 1-based condition numbers that hold.
    pub fn held(&self) -> Vec<usize> {
        (1..=5).filter(|&k| self.holds(k)).collect()
    }
}

/// Evaluates the residuals of the five conditions for an arbitrary square
/// matrix `g` against A = I - P, thresholding each at `tol`.
pub fn check_conditions(p: &TransitionMatrix, g: &Matrix, tol: f64) -> Result<ConditionProfile> {
    let m = p.m();
    if g.rows() != m || g.cols() != m {
        return Err(Error::ShapeMismatch(format!(
            "matrix is {}x{}, expected {m}x{m}",
            g.rows(),
            g.cols()
        )));
    }
    let a = p.kernel();
    let ag = a.matmul(g);
    let ga = g.matmul(&a);
    let residuals = [
        ag.matmul(&a).max_diff(&a),
        ga.matmul(g).max_diff(g),
        ag.transpose().max_diff(&ag),
        ga.transpose().max_diff(&ga),
        ag.max_diff(&ga),
    ];
    let mut holds = [false; 5];
    for (h, r) in holds.iter_mut().zip(residuals) {
        *h = r < tol;
    }
    Ok(ConditionProfile { holds, residuals, tol })
}

/// The unique parametric signature (alpha, beta, gamma) of a g-inverse:
/// G equals the inverse of I - P + alpha beta' plus gamma e pi', with
/// pi'alpha = 1 and beta'e = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GInvParams {
    pub alpha: Vector,
    pub beta: Vector,
    pub gamma: f64,
}

/// Recovers (alpha, beta, gamma) from a g-inverse.
///
/// alpha is A e with A = I - (I-P)G; the stationary vector is derived
/// internally from A by the first-nonzero-row-sum scan, so arbitrary
/// caller-supplied g-inverses classify without outside help; beta is pi' B
/// with B = I - G(I-P); gamma + 1 = beta' G e.
pub fn extract_params(p: &TransitionMatrix, g: &GInverse) -> Result<GInvParams> {
    let m = p.m();
    let ident = Matrix::identity(m);
    let kernel = p.kernel();
    let a = ident.sub(&kernel.matmul(g.matrix()));
    let alpha = a.row_sums();
    if alpha.max_norm() <= 1e-12 * (1.0 + g.matrix().max_norm()) {
        return Err(Error::DegenerateAlpha);
    }
    let (_, pi_vec) = row_scan_pi(&a)?;
    let b = ident.sub(&g.matrix().matmul(&kernel));
    let beta = b.vec_mul(&pi_vec);
    let gamma = g.matrix().vec_mul(&beta).sum() - 1.0;
    Ok(GInvParams { alpha, beta, gamma })
}

/// Membership flags for the multi-condition families determined by the
/// parametric signature alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassLabels {
    pub one_two: bool,
    pub one_three: bool,
    pub one_four: bool,
    pub one_five: bool,
}

impl ClassLabels {
    pub fn labels(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.one_two {
            out.push("(1,2)");
        }
        if self.one_three {
            out.push("(1,3)");
        }
        if self.one_four {
            out.push("(1,4)");
        }
        if self.one_five {
            out.push("(1,5)");
        }
        out
    }
}

/// Classifies a g-inverse from its signature: gamma = -1 marks (1,2);
/// alpha = pi/pi'pi marks (1,3); beta = e/m marks (1,4); alpha = e with
/// beta = pi marks (1,5). Each comparison is tested to `tol` in max norm.
pub fn classify(
    params: &GInvParams,
    p: &TransitionMatrix,
    pi: &StationaryVector,
    tol: f64,
) -> ClassLabels {
    let m = p.m();
    let pi_dot = pi.pi().dot(pi.pi());
    let pi_scaled = pi.pi().scale(1.0 / pi_dot);
    let e_over_m = Vector::from_fn(m, |_| 1.0 / m as f64);
    let e = Vector::ones(m);
    ClassLabels {
        one_two: (params.gamma + 1.0).abs() < tol,
        one_three: params.alpha.max_diff(&pi_scaled) < tol,
        one_four: params.beta.max_diff(&e_over_m) < tol,
        one_five: params.alpha.max_diff(&e) < tol && params.beta.max_diff(pi.pi()) < tol,
    }
}

/// Rewrites any g-inverse `g` of I - P into the inverse of I - P + t2 u2'
/// without a fresh factorization:
/// (I - e u2'/u2'e) G (I - t2 pi'/pi't2) + e pi' / ((pi't2)(u2'e)).
pub fn convert(
    p: &TransitionMatrix,
    g: &Matrix,
    t2: &Vector,
    u2: &Vector,
    pi: &StationaryVector,
) -> Result<Matrix> {
    let m = p.m();
    if g.rows() != m || g.cols() != m || t2.len() != m || u2.len() != m || pi.len() != m {
        return Err(Error::ShapeMismatch("conversion operands must all match the state count".into()));
    }
    let pt = pi.pi().dot(t2);
    if pt.abs() <= 1e-12 * t2.max_norm() {
        return Err(Error::DegeneratePivot("pi' t"));
    }
    let ue = u2.sum();
    if ue.abs() <= 1e-12 * u2.max_norm() * m as f64 {
        return Err(Error::DegeneratePivot("u' e"));
    }
    let e = Vector::ones(m);
    let ident = Matrix::identity(m);
    let left = ident.sub(&rank1(&e, u2).scale(1.0 / ue));
    let right = ident.sub(&rank1(t2, pi.pi()).scale(1.0 / pt));
    Ok(left
        .matmul(g)
        .matmul(&right)
        .add(&rank1(&e, pi.pi()).scale(1.0 / (pt * ue))))
}

/// Evaluates the scaled-update family
/// `inverse(I - P + delta t u') - e pi' / (delta (pi't)(u'e))`
/// at every supplied delta, asserts the members agree to
/// [`DELTA_INVARIANCE_TOL`], and returns the delta = 1 member.
pub fn delta_invariant(
    p: &TransitionMatrix,
    t: &Vector,
    u: &Vector,
    pi: &StationaryVector,
    deltas: &[f64],
) -> Result<Matrix> {
    let m = p.m();
    if deltas.iter().any(|d| *d == 0.0 || !d.is_finite()) {
        return Err(Error::ZeroDelta);
    }
    let pt = pi.pi().dot(t);
    if pt.abs() <= 1e-12 * t.max_norm() {
        return Err(Error::DegeneratePivot("pi' t"));
    }
    let ue = u.sum();
    if ue.abs() <= 1e-12 * u.max_norm() * m as f64 {
        return Err(Error::DegeneratePivot("u' e"));
    }
    let e_pi = rank1(&Vector::ones(m), pi.pi());
    let eval = |delta: f64| -> Result<Matrix> {
        let g = inverse(&p.kernel().add(&rank1(t, u).scale(delta)))?;
        Ok(g.sub(&e_pi.scale(1.0 / (delta * pt * ue))))
    };
    let base = eval(1.0)?;
    let mut members = Vec::with_capacity(deltas.len());
    for &d in deltas {
        members.push(eval(d)?);
    }
    let mut discrepancy: f64 = 0.0;
    for (i, a) in members.iter().enumerate() {
        discrepancy = discrepancy.max(a.max_diff(&base));
        for b in members.iter().skip(i + 1) {
            discrepancy = discrepancy.max(a.max_diff(b));
        }
    }
    if discrepancy > DELTA_INVARIANCE_TOL {
        return Err(Error::InvarianceViolated {
            discrepancy,
            tolerance: DELTA_INVARIANCE_TOL,
        });
    }
    Ok(base)
}

/// The group inverse obtained from any g-inverse through the invariant
/// sandwich (I - e pi') G (I - e pi').
pub fn group_inverse_via_invariance(g: &Matrix, pi: &StationaryVector) -> Matrix {
    assert_eq!(g.rows(), pi.len(), "matrix and stationary vector sizes differ");
    let q = Matrix::identity(pi.len()).sub(&pi_matrix(pi));
    q.matmul(g).matmul(&q)
}
