//! Dense row-major real matrices and vectors with an LU solver.
//!
//! Everything downstream works at desk scale (a few hundred states at most),
//! so storage is always dense and arithmetic is plain f64.

use crate::error::{Error, Result};

/// Relative factor for the singularity test: a pivot below
/// `SINGULARITY_FACTOR * max |a_ij|` of the input matrix is treated as zero.
pub const SINGULARITY_FACTOR: f64 = 1e-12;

/// Dense row-major matrix of finite f64 entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Zero matrix of the given shape. Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix by evaluating `f(row, col)` at every position.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from nested rows, validating shape and finiteness.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::ShapeMismatch("matrix must have at least one row and column".into()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    cols
                )));
            }
            data.extend_from_slice(r);
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {bad}")));
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    /// Builds from a flat row-major buffer, validating length and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "buffer of length {} does not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {bad}")));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` copied into a vector.
    pub fn col(&self, j: usize) -> Vector {
        Vector::from_fn(self.rows, |i| self[(i, j)])
    }

    /// Row `i` copied into a vector.
    pub fn row_vector(&self, i: usize) -> Vector {
        Vector { data: self.row(i).to_vec() }
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product. Panics on inner-dimension mismatch.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += aik * b;
                }
            }
        }
        out
    }

    /// `self * v` as a column vector.
    pub fn mul_vec(&self, v: &Vector) -> Vector {
        assert_eq!(self.cols, v.len(), "matrix-vector dimensions differ");
        Vector::from_fn(self.rows, |i| {
            self.row(i).iter().zip(v.iter()).map(|(a, b)| a * b).sum()
        })
    }

    /// `v' * self` as a row vector.
    pub fn vec_mul(&self, v: &Vector) -> Vector {
        assert_eq!(self.rows, v.len(), "vector-matrix dimensions differ");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        Vector { data: out }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add shapes differ");
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            *o += b;
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub shapes differ");
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            *o -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o *= s;
        }
        out
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "max_diff shapes differ");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Vector of row sums.
    pub fn row_sums(&self) -> Vector {
        Vector::from_fn(self.rows, |i| self.row(i).iter().sum())
    }

    /// Vector of column sums.
    pub fn col_sums(&self) -> Vector {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a;
            }
        }
        Vector { data: out }
    }

    /// Sum of all entries.
    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Entries as nested rows (for serialization layers).
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense vector of finite f64 entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Builds from raw entries, validating non-emptiness and finiteness.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::ShapeMismatch("vector must have at least one entry".into()));
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("vector entry {bad}")));
        }
        Ok(Vector { data })
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> f64) -> Self {
        assert!(len >= 1, "vector length must be >= 1");
        Vector { data: (0..len).map(f).collect() }
    }

    /// All-ones vector.
    pub fn ones(len: usize) -> Self {
        assert!(len >= 1, "vector length must be >= 1");
        Vector { data: vec![1.0; len] }
    }

    /// Elementary vector with a single 1 at 0-based position `i`.
    pub fn unit(len: usize, i: usize) -> Self {
        assert!(i < len, "unit index out of range");
        let mut v = vec![0.0; len];
        v[i] = 1.0;
        Vector { data: v }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.data.clone()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot lengths differ");
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn max_diff(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "max_diff lengths differ");
        self.iter()
            .zip(other.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector { data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "add lengths differ");
        Vector { data: self.iter().zip(other.iter()).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "sub lengths differ");
        Vector { data: self.iter().zip(other.iter()).map(|(a, b)| a - b).collect() }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// Keeps the diagonal of a square matrix, zeroing everything else.
pub fn diag_of(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "diagonal part requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let mut out = Matrix::zeros(a.rows(), a.cols());
    for i in 0..a.rows() {
        out[(i, i)] = a[(i, i)];
    }
    Ok(out)
}

/// Diagonal matrix with the entries of `v`.
pub fn make_diag(v: &Vector) -> Matrix {
    let mut out = Matrix::zeros(v.len(), v.len());
    for i in 0..v.len() {
        out[(i, i)] = v[i];
    }
    out
}

/// Outer product `t * u'`.
pub fn rank1(t: &Vector, u: &Vector) -> Matrix {
    Matrix::from_fn(t.len(), u.len(), |i, j| t[i] * u[j])
}

/// `a^n` by repeated squaring; `a^0` is the identity.
pub fn mat_power(a: &Matrix, n: usize) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch("matrix power requires a square matrix".into()));
    }
    let mut result = Matrix::identity(a.rows());
    let mut base = a.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = result.matmul(&base);
        }
        k >>= 1;
        if k > 0 {
            base = base.matmul(&base);
        }
    }
    Ok(result)
}

/// PLU factorization with partial pivoting.
///
/// Rows are permuted for the largest pivot at each step; a pivot whose
/// magnitude falls below the scale-relative threshold aborts with
/// [`Error::SingularMatrix`]. The smallest accepted pivot is retained so
/// callers can judge how close the factorization came to breakdown.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Matrix,
    perm: Vec<usize>,
    swaps: usize,
    min_pivot: f64,
    threshold: f64,
}

/// Factors a square matrix as P*A = L*U with partial pivoting.
pub fn lu_factor(a: &Matrix) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "LU factorization requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let threshold = SINGULARITY_FACTOR * a.max_norm();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    let mut min_pivot = f64::INFINITY;

    for k in 0..n {
        let mut best = k;
        let mut best_abs = lu[(k, k)].abs();
        for i in (k + 1)..n {
            let cand = lu[(i, k)].abs();
            if cand > best_abs {
                best_abs = cand;
                best = i;
            }
        }
        if best_abs <= threshold {
            return Err(Error::SingularMatrix { pivot: best_abs, threshold });
        }
        if best != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(best, j)];
                lu[(best, j)] = tmp;
            }
            perm.swap(k, best);
            swaps += 1;
        }
        min_pivot = min_pivot.min(best_abs);
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            if factor != 0.0 {
                for j in (k + 1)..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
    }

    Ok(LuFactors { lu, perm, swaps, min_pivot, threshold })
}

impl LuFactors {
    pub fn order(&self) -> usize {
        self.lu.rows()
    }

    /// Magnitude of the smallest pivot accepted during elimination.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Threshold below which a pivot would have been declared singular.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Determinant from the pivots and the permutation parity.
    pub fn det(&self) -> f64 {
        let sign = if self.swaps % 2 == 0 { 1.0 } else { -1.0 };
        (0..self.order()).fold(sign, |acc, i| acc * self.lu[(i, i)])
    }

    /// Solves `A x = b` for a single right-hand side.
    pub fn solve_vec(&self, b: &Vector) -> Result<Vector> {
        let n = self.order();
        if b.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "rhs length {} does not match system order {n}",
                b.len()
            )));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("solve produced a non-finite entry".into()));
        }
        Ok(Vector { data: x })
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        let n = self.order();
        if rhs.rows() != n {
            return Err(Error::ShapeMismatch(format!(
                "rhs has {} rows, expected {n}",
                rhs.rows()
            )));
        }
        let mut out = Matrix::zeros(n, rhs.cols());
        for j in 0..rhs.cols() {
            let x = self.solve_vec(&rhs.col(j))?;
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }
}

/// Solves `a x = rhs` through a fresh factorization.
pub fn solve(a: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    lu_factor(a)?.solve(rhs)
}

/// Matrix inverse via LU.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let lu = lu_factor(a)?;
    lu.solve(&Matrix::identity(lu.order()))
}
