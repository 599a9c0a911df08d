//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are stored row-major. [`SparseMatrix`] is a row-list companion
//! for the collective spin operators, whose dense form would not fit in
//! memory at the upper end of the supported qubit counts.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Tolerances applied when validating density matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { herm: 1e-10, trace: 1e-10, psd: 1e-8 }
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:.6} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(n_rows, n_cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<C64> {
        (i < self.rows && j < self.cols).then(|| self.data[i * self.cols + j])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance; infinite when the shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut err: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Matrix product. Zero entries of `self` are skipped, so block-sparse
    /// left operands cost proportionally to their nonzero count.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_eigenvalue_hermitian(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let m = DMatrix::<C64>::from_fn(n, n, |i, j| self[(i, j)]);
        let eig = m.symmetric_eigenvalues();
        Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds for {}x{}", self.rows, self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds for {}x{}", self.rows, self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// The operator impls panic on shape mismatch; use the checked methods for
// shapes that come from user input.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("matrix difference shape mismatch")
    }
}

/// Row-list sparse matrix; each row holds `(column, value)` pairs sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<(usize, C64)>>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: vec![Vec::new(); rows] }
    }

    /// Adds `value` at `(i, j)`, merging with an existing entry.
    pub fn push(&mut self, i: usize, j: usize, value: C64) {
        assert!(i < self.rows && j < self.cols);
        let row = &mut self.entries[i];
        match row.binary_search_by_key(&j, |&(c, _)| c) {
            Ok(pos) => row[pos].1 += value,
            Err(pos) => row.insert(pos, (j, value)),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[(usize, C64)] {
        &self.entries[i]
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let row = &self.entries[i];
        row.binary_search_by_key(&j, |&(c, _)| c).map_or(ZERO, |pos| row[pos].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.entries.iter().enumerate().flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = SparseMatrix::new(self.cols, self.rows);
        for (i, j, v) in self.iter() {
            out.entries[j].push((i, v.conj()));
        }
        out
    }

    pub fn matmul(&self, rhs: &SparseMatrix) -> Result<SparseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = SparseMatrix::new(self.rows, rhs.cols);
        for i in 0..self.rows {
            for &(k, a) in &self.entries[i] {
                for &(j, b) in &rhs.entries[k] {
                    out.push(i, j, a * b);
                }
            }
        }
        out.prune(0.0);
        Ok(out)
    }

    /// Drops entries with modulus at most `threshold`.
    pub fn prune(&mut self, threshold: f64) {
        for row in &mut self.entries {
            row.retain(|&(_, v)| v.norm() > threshold);
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let mut out = SparseMatrix::new(m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)] != ZERO {
                    out.entries[i].push((j, m[(i, j)]));
                }
            }
        }
        out
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Traces out the second factor of a `dim_sys ⊗ dim_bath` operator.
pub fn partial_trace_second(m: &ComplexMatrix, dim_sys: usize, dim_bath: usize) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != dim_sys * dim_bath {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator is not {dim_sys}x{dim_bath} composite",
            m.rows(),
            m.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(dim_sys, dim_sys, |s, t| {
        (0..dim_bath).map(|b| m[(s * dim_bath + b, t * dim_bath + b)]).sum()
    }))
}

/// Reduced state of the system factor for the ordering system ⊗ bath.
pub fn partial_trace_bath(rho: &DensityMatrix, dim_sys: usize, dim_bath: usize) -> Result<DensityMatrix> {
    let reduced = partial_trace_second(rho.matrix(), dim_sys, dim_bath)?;
    Ok(DensityMatrix::from_trusted(reduced))
}

const MAX_TAYLOR_TERMS: usize = 64;

/// Matrix exponential by scaling and squaring with a Taylor series.
///
/// The input is scaled by 2^-s so that its 1-norm is at most 1/2, the series
/// is summed until the next term falls below `tol` relative to the partial
/// sum, and the result is squared s times.
pub fn matrix_exp(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let norm = a.norm_one();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    let mut converged = false;
    for k in 1..=MAX_TAYLOR_TERMS {
        term = term.matmul(&scaled)?.scale(C64::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
        if term.norm_one() <= tol * sum.norm_one().max(1.0) * 1e-3 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_TAYLOR_TERMS));
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum)?;
    }
    Ok(sum)
}

/// Tr(A·B) without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.cols() != b.rows() || a.rows() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "Tr of {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut acc = ZERO;
    for i in 0..a.rows() {
        for (k, &x) in a.row(i).iter().enumerate() {
            if x != ZERO {
                acc += x * b[(k, i)];
            }
        }
    }
    Ok(acc)
}

/// Tr(op·ρ).
pub fn expectation(op: &ComplexMatrix, rho: &DensityMatrix) -> Result<C64> {
    trace_product(op, rho.matrix())
}

/// Tr(op·ρ) for a sparse operator.
pub fn expectation_sparse(op: &SparseMatrix, rho: &DensityMatrix) -> Result<C64> {
    let m = rho.matrix();
    if op.rows() != m.rows() || op.cols() != m.cols() {
        return Err(Error::DimensionMismatch(format!("operator {}x{} vs state dim {}", op.rows(), op.cols(), m.rows())));
    }
    Ok(op.iter().map(|(i, j, v)| v * m[(j, i)]).sum())
}

/// Tr(A·ρ·A†) for sparse `A`, summed row by row over the nonzeros of `A`.
pub fn sandwich_trace(a: &SparseMatrix, rho: &DensityMatrix) -> Result<f64> {
    let m = rho.matrix();
    if a.cols() != m.rows() {
        return Err(Error::DimensionMismatch(format!("operator {}x{} vs state dim {}", a.rows(), a.cols(), m.rows())));
    }
    let mut acc = ZERO;
    for i in 0..a.rows() {
        let row = a.row(i);
        for &(j, x) in row {
            for &(l, y) in row {
                acc += x * m[(j, l)] * y.conj();
            }
        }
    }
    Ok(acc.re)
}

/// A validated density matrix: square, Hermitian, unit trace.
///
/// Positivity is checked only by [`DensityMatrix::validate`], since it needs
/// an eigenvalue computation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity and trace with the given tolerances.
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::state("square", format!("{}x{}", matrix.rows(), matrix.cols())));
        }
        let herm = matrix.hermiticity_error();
        if herm > tol.herm {
            return Err(Error::state("hermitian", format!("max |ρ - ρ†| = {herm:e}")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::state("trace", format!("trace = {tr}, expected 1")));
        }
        Ok(DensityMatrix { matrix })
    }

    /// Full validation including positivity.
    pub fn validate(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let rho = Self::new(matrix, tol)?;
        let min = rho.min_eigenvalue()?;
        if min < -tol.psd {
            return Err(Error::state("positive", format!("smallest eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        DensityMatrix { matrix }
    }

    pub fn pure(psi: &[C64]) -> Self {
        DensityMatrix { matrix: ComplexMatrix::outer(psi, psi) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix { matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.matrix.min_eigenvalue_hermitian()
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix).map(|c| c.re).unwrap_or(f64::NAN)
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { matrix: kron(&self.matrix, &other.matrix) }
    }
}

impl Index<(usize, usize)> for DensityMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.matrix[idx]
    }
}

#[cfg(test)]
pub(crate) use tests::random_density;
