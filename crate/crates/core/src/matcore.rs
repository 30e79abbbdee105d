//! Dense real matrix kernel.
//!
//! Everything in the workbench is carried by [`RealMatrix`], a square
//! row-major matrix of `f64`. The adjoint of a real matrix is its transpose,
//! the Jordan product is `(ab + ba) / 2`, and all spectral questions are
//! answered by a cyclic Jacobi eigensolver so that results are reproducible
//! bit-for-bit on a given platform.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances shared by every numerical check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    pub psd_tol: f64,
    pub norm_rel_tol: f64,
    pub eig_sweep_limit: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            psd_tol: 1e-9,
            norm_rel_tol: 1e-7,
            eig_sweep_limit: 100,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.psd_tol >= 0.0 && self.psd_tol.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "psd_tol must be nonnegative, got {}",
                self.psd_tol
            )));
        }
        if !(self.norm_rel_tol >= 0.0 && self.norm_rel_tol.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "norm_rel_tol must be nonnegative, got {}",
                self.norm_rel_tol
            )));
        }
        if self.eig_sweep_limit == 0 {
            return Err(Error::InvalidInput("eig_sweep_limit must be at least 1".into()));
        }
        Ok(())
    }
}

/// Square matrix of 64-bit reals, stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct RealMatrix {
    dim: usize,
    entries: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawMatrix> for RealMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        RealMatrix::new(raw.dim, raw.entries)
    }
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RealMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                write!(f, "{:>12.6} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl RealMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for dimension {dim}, found {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!("non-finite entry {bad}")));
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    /// Builds a matrix from rows; panics on ragged input (test and builder use).
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        assert!(dim > 0, "matrix dimension must be positive");
        for row in rows {
            assert_eq!(row.as_ref().len(), dim, "rows must form a square matrix");
        }
        Self::from_fn(dim, |i, j| rows[i].as_ref()[j])
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// Matrix unit `E_ij`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = 1.0;
        m
    }

    /// Builds a matrix from its `blocks x blocks` grid of equally sized square blocks.
    pub fn from_blocks(blocks: &[Vec<RealMatrix>]) -> Result<Self> {
        let nb = blocks.len();
        if nb == 0 {
            return Err(Error::InvalidMatrix("empty block grid".into()));
        }
        let bs = blocks[0][0].dim;
        for row in blocks {
            if row.len() != nb {
                return Err(Error::InvalidMatrix("block grid must be square".into()));
            }
            for b in row {
                if b.dim != bs {
                    return Err(Error::DimensionMismatch {
                        expected: bs,
                        found: b.dim,
                    });
                }
            }
        }
        Ok(Self::from_fn(nb * bs, |i, j| blocks[i / bs][j / bs][(i % bs, j % bs)]))
    }

    /// Extracts the `size x size` block whose top-left corner is `(row, col)`.
    pub fn block(&self, row: usize, col: usize, size: usize) -> RealMatrix {
        assert!(row + size <= self.dim && col + size <= self.dim, "block out of range");
        Self::from_fn(size, |i, j| self[(row + i, col + j)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn transpose(&self) -> RealMatrix {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> RealMatrix {
        RealMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Trace pairing `tr(selfᵀ other)`.
    pub fn inner(&self, other: &RealMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &RealMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `(m + mᵀ) / 2`.
    pub fn sym_part(&self) -> RealMatrix {
        Self::from_fn(self.dim, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    /// `(m - mᵀ) / 2`.
    pub fn skew_part(&self) -> RealMatrix {
        Self::from_fn(self.dim, |i, j| 0.5 * (self[(i, j)] - self[(j, i)]))
    }

    pub fn symmetry_deviation(&self) -> f64 {
        let mut dev = 0.0_f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        dev
    }

    /// Kronecker product; block `(a, b)` of the result is `self[a][b] * other`.
    pub fn kron(&self, other: &RealMatrix) -> RealMatrix {
        let n = other.dim;
        Self::from_fn(self.dim * n, |i, j| self[(i / n, j / n)] * other[(i % n, j % n)])
    }

    /// Block diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &RealMatrix) -> RealMatrix {
        let n = self.dim;
        Self::from_fn(n + other.dim, |i, j| match (i < n, j < n) {
            (true, true) => self[(i, j)],
            (false, false) => other[(i - n, j - n)],
            _ => 0.0,
        })
    }

    pub fn matmul(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &other.entries[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        RealMatrix { dim: n, entries: out }
    }

    /// `selfᵀ self`, computed so that the result is exactly symmetric.
    pub fn gram(&self) -> RealMatrix {
        let n = self.dim;
        let mut out = RealMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self[(k, i)] * self[(k, j)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.entries[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.dim + j]
    }
}

macro_rules! elementwise {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&RealMatrix> for &RealMatrix {
            type Output = RealMatrix;

            fn $method(self, rhs: &RealMatrix) -> RealMatrix {
                assert_eq!(self.dim, rhs.dim, "dimension mismatch");
                RealMatrix {
                    dim: self.dim,
                    entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a $op b).collect(),
                }
            }
        }

        impl $trait<RealMatrix> for RealMatrix {
            type Output = RealMatrix;

            fn $method(self, rhs: RealMatrix) -> RealMatrix {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&RealMatrix> for RealMatrix {
            type Output = RealMatrix;

            fn $method(self, rhs: &RealMatrix) -> RealMatrix {
                (&self).$method(rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl AddAssign<&RealMatrix> for RealMatrix {
    fn add_assign(&mut self, rhs: &RealMatrix) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a += b;
        }
    }
}

impl SubAssign<&RealMatrix> for RealMatrix {
    fn sub_assign(&mut self, rhs: &RealMatrix) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a -= b;
        }
    }
}

impl Mul<&RealMatrix> for &RealMatrix {
    type Output = RealMatrix;

    fn mul(self, rhs: &RealMatrix) -> RealMatrix {
        self.matmul(rhs)
    }
}

impl Mul<RealMatrix> for RealMatrix {
    type Output = RealMatrix;

    fn mul(self, rhs: RealMatrix) -> RealMatrix {
        self.matmul(&rhs)
    }
}

impl Mul<f64> for &RealMatrix {
    type Output = RealMatrix;

    fn mul(self, s: f64) -> RealMatrix {
        self.scale(s)
    }
}

impl Mul<f64> for RealMatrix {
    type Output = RealMatrix;

    fn mul(self, s: f64) -> RealMatrix {
        self.scale(s)
    }
}

impl Neg for &RealMatrix {
    type Output = RealMatrix;

    fn neg(self) -> RealMatrix {
        self.scale(-1.0)
    }
}

impl Neg for RealMatrix {
    type Output = RealMatrix;

    fn neg(self) -> RealMatrix {
        self.scale(-1.0)
    }
}

/// Real adjoint, i.e. the transpose.
pub fn adjoint(m: &RealMatrix) -> RealMatrix {
    m.transpose()
}

/// Jordan product `(ab + ba) / 2`.
pub fn jordan(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(jordan_unchecked(a, b))
}

pub(crate) fn jordan_unchecked(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let mut p = a.matmul(b);
    p += &b.matmul(a);
    p.scale(0.5)
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the matching eigenvectors.
    pub vectors: RealMatrix,
}

impl SymEig {
    pub fn min(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }

    /// Rebuilds `V f(Λ) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> RealMatrix {
        let n = self.vectors.dim();
        let fv: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let mut out = RealMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for (k, &fk) in fv.iter().enumerate() {
                    s += self.vectors[(i, k)] * fk * self.vectors[(j, k)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
pub fn sym_eig(m: &RealMatrix, tol: &ToleranceConfig) -> Result<SymEig> {
    let dev = m.symmetry_deviation();
    if dev > tol.psd_tol * (1.0 + m.max_abs()) {
        return Err(Error::NonSymmetric { deviation: dev });
    }
    jacobi(&m.sym_part(), tol.eig_sweep_limit)
}

pub(crate) fn jacobi(m: &RealMatrix, sweep_limit: usize) -> Result<SymEig> {
    let n = m.dim;
    let mut a = m.clone();
    let mut v = RealMatrix::identity(n);
    let scale = a.frobenius_norm();
    let mut converged = n == 1 || scale == 0.0;
    let mut sweeps = 0;
    while !converged {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            converged = true;
            break;
        }
        if sweeps == sweep_limit {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "Jacobi eigensolver",
            iterations: sweep_limit,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&k| a[(k, k)]).collect();
    let mut vectors = RealMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        // deterministic sign: largest-magnitude component positive
        let mut pivot = 0;
        for i in 0..n {
            if v[(i, k)].abs() > v[(pivot, k)].abs() + 1e-14 {
                pivot = i;
            }
        }
        let sign = if v[(pivot, k)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, col)] = sign * v[(i, k)];
        }
    }
    Ok(SymEig { values, vectors })
}

/// Largest singular value, via the spectrum of `mᵀm`.
pub fn operator_norm(m: &RealMatrix) -> f64 {
    let gram = m.gram();
    let eig = jacobi(&gram, 200).expect("Jacobi converges on Gram matrices");
    eig.max().max(0.0).sqrt()
}

/// Singular values in descending order.
pub fn singular_values(m: &RealMatrix) -> Vec<f64> {
    let eig = jacobi(&m.gram(), 200).expect("Jacobi converges on Gram matrices");
    eig.values.iter().map(|v| v.max(0.0).sqrt()).collect()
}

pub fn nuclear_norm(m: &RealMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Smallest eigenvalue of the symmetric part.
pub fn min_eig_sym(m: &RealMatrix) -> f64 {
    jacobi(&m.sym_part(), 200)
        .expect("Jacobi converges on symmetric input")
        .min()
}

/// Positive semidefiniteness with tolerance relative to `1 + ‖m‖`.
pub fn is_psd(m: &RealMatrix, tol: &ToleranceConfig) -> bool {
    psd_margin(m, tol).map(|(ok, _)| ok).unwrap_or(false)
}

/// Returns `(is_psd, λmin(sym m))`, or `None` when `m` is not symmetric.
pub fn psd_margin(m: &RealMatrix, tol: &ToleranceConfig) -> Option<(bool, f64)> {
    let eig = match jacobi(&m.sym_part(), tol.eig_sweep_limit) {
        Ok(e) => e,
        Err(_) => return None,
    };
    let norm = eig.max().abs().max(eig.min().abs());
    let scale = tol.psd_tol * (1.0 + norm);
    if m.symmetry_deviation() > scale {
        return None;
    }
    Some((eig.min() >= -scale, eig.min()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryKind {
    Selfadjoint,
    Antisymmetric,
    Neither,
}

#[derive(Debug, Clone)]
pub struct SymmetrySplit {
    pub kind: SymmetryKind,
    pub sa_part: RealMatrix,
    pub as_part: RealMatrix,
}

/// Splits `m` into its selfadjoint and antisymmetric parts.
pub fn classify_symmetry(m: &RealMatrix, tol: &ToleranceConfig) -> SymmetrySplit {
    let sa_part = m.sym_part();
    let as_part = m.skew_part();
    let scale = tol.psd_tol * (1.0 + m.max_abs());
    let kind = if as_part.max_abs() <= scale {
        SymmetryKind::Selfadjoint
    } else if sa_part.max_abs() <= scale {
        SymmetryKind::Antisymmetric
    } else {
        SymmetryKind::Neither
    };
    SymmetrySplit { kind, sa_part, as_part }
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(m: &RealMatrix) -> Result<RealMatrix> {
    let n = m.dim;
    let mut a = m.clone();
    let mut inv = RealMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[(r, col)].abs() > a[(piv, col)].abs() {
                piv = r;
            }
        }
        if a[(piv, col)].abs() <= 1e-300_f64.max(f64::EPSILON * f64::EPSILON * scale) {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        if piv != col {
            for j in 0..n {
                a.entries.swap(col * n + j, piv * n + j);
                inv.entries.swap(col * n + j, piv * n + j);
            }
        }
        let d = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(r, j)] -= f * a[(col, j)];
                inv[(r, j)] -= f * inv[(col, j)];
            }
        }
    }
    Ok(inv)
}

/// Inverse guarded by a bound on the spectral condition number.
pub fn inverse_checked(m: &RealMatrix, max_condition: f64) -> Result<RealMatrix> {
    let inv = inverse(m)?;
    let condition = operator_norm(m) * operator_norm(&inv);
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::Singular { condition });
    }
    Ok(inv)
}

/// Rectangular matrix, used for Kraus operators and dilation isometries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct RectMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl fmt::Debug for RectMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RectMatrix({}x{}) [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.6} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl RectMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn from_square(m: &RealMatrix) -> Self {
        Self {
            rows: m.dim(),
            cols: m.dim(),
            entries: m.entries().to_vec(),
        }
    }

    pub fn transpose(&self) -> RectMatrix {
        let mut t = RectMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &RectMatrix) -> RectMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = RectMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Converts a square rectangular matrix back to [`RealMatrix`].
    pub fn to_square(&self) -> Option<RealMatrix> {
        if self.rows == self.cols && self.rows > 0 {
            RealMatrix::new(self.rows, self.entries.clone()).ok()
        } else {
            None
        }
    }

    /// `self · x · selfᵀ` for square `x` of size `cols`.
    pub fn conjugate(&self, x: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, x.dim(), "conjugation dimension mismatch");
        let ax = self.matmul(&RectMatrix::from_square(x));
        ax.matmul(&self.transpose()).to_square().expect("square result")
    }

    pub fn operator_norm(&self) -> f64 {
        let g = self.transpose().matmul(self).to_square().expect("square Gram");
        operator_norm_from_gram(&g)
    }

    pub fn max_abs_diff(&self, other: &RectMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn operator_norm_from_gram(g: &RealMatrix) -> f64 {
    jacobi(&g.sym_part(), 200)
        .expect("Jacobi converges")
        .max()
        .max(0.0)
        .sqrt()
}

impl Index<(usize, usize)> for RectMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RectMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_matrix, random_symmetric, seeded_rng};
    use rand::Rng;

    fn sx() -> RealMatrix {
        RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])
    }

    fn sz() -> RealMatrix {
        RealMatrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]])
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(adjoint(&RealMatrix::identity(3)), RealMatrix::identity(3));
        assert_eq!(adjoint(&RealMatrix::unit(2, 0, 1)), RealMatrix::unit(2, 1, 0));
        let mut rng = seeded_rng(1);
        let m = random_matrix(&mut rng, 5);
        assert_eq!(adjoint(&adjoint(&m)), m);
    }

    #[test]
    fn jordan_examples() {
        let mut rng = seeded_rng(2);
        let m = random_matrix(&mut rng, 3);
        assert!(jordan(&m, &RealMatrix::identity(3)).unwrap().max_abs_diff(&m) < 1e-15);
        assert!(jordan(&sx(), &sz()).unwrap().is_zero(0.0));
        assert!(jordan(&m, &m).unwrap().max_abs_diff(&(&m * &m)) < 1e-14);
        assert!(matches!(
            jordan(&m, &RealMatrix::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sym_eig_examples() {
        let tol = ToleranceConfig::default();
        let e = sym_eig(&RealMatrix::diag(&[1.0, 3.0]), &tol).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        let e = sym_eig(&sx(), &tol).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] + 1.0).abs() < 1e-15);
        assert!(matches!(
            sym_eig(&RealMatrix::unit(2, 0, 1), &tol),
            Err(Error::NonSymmetric { .. })
        ));
    }

    #[test]
    fn sym_eig_reconstruction_residual() {
        let tol = ToleranceConfig::default();
        let mut rng = seeded_rng(3);
        for _ in 0..20 {
            let m = random_symmetric(&mut rng, 6);
            let e = sym_eig(&m, &tol).unwrap();
            let rebuilt = e.reconstruct_with(|v| v);
            let bound = 1e-10 * (1.0 + operator_norm(&m));
            assert!(rebuilt.max_abs_diff(&m) <= bound);
            let vtv = e.vectors.gram();
            assert!(vtv.max_abs_diff(&RealMatrix::identity(6)) <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn sym_eig_sweep_limit_is_enforced() {
        let tol = ToleranceConfig {
            eig_sweep_limit: 1,
            ..Default::default()
        };
        let mut rng = seeded_rng(4);
        let m = random_symmetric(&mut rng, 8);
        assert!(matches!(sym_eig(&m, &tol), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn two_by_two_eigenvalues_match_characteristic_roots() {
        let tol = ToleranceConfig::default();
        let mut rng = seeded_rng(5);
        for _ in 0..200 {
            let (a, b, c): (f64, f64, f64) = (
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let m = RealMatrix::from_rows(&[[a, b], [b, c]]);
            let half_tr = 0.5 * (a + c);
            let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            let e = sym_eig(&m, &tol).unwrap();
            assert!((e.values[0] - (half_tr + disc)).abs() <= 1e-10);
            assert!((e.values[1] - (half_tr - disc)).abs() <= 1e-10);
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&RealMatrix::unit(2, 0, 1)) - 1.0).abs() < 1e-15);
        let ones = RealMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!((operator_norm(&ones) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_dominates_vector_sampling() {
        // sampled unit vectors give a lower bound that approaches the norm
        let mut rng = seeded_rng(6);
        let tol = ToleranceConfig::default();
        let m = random_matrix(&mut rng, 3);
        let norm = operator_norm(&m);
        let mut best: f64 = 0.0;
        for _ in 0..10_000 {
            let xi: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            if len < 1e-3 {
                continue;
            }
            let img = m.mul_vec(&xi);
            best = best.max(img.iter().map(|v| v * v).sum::<f64>().sqrt() / len);
        }
        assert!(best <= norm * (1.0 + tol.norm_rel_tol));
        // and the top right-singular vector attains it
        let e = sym_eig(&m.gram(), &tol).unwrap();
        let v = e.vector(0);
        let attained = m.mul_vec(&v).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((attained - norm).abs() <= tol.norm_rel_tol * norm);
        assert!(norm - best < 0.05 * norm);
    }

    #[test]
    fn psd_examples() {
        let tol = ToleranceConfig::default();
        assert!(is_psd(&RealMatrix::identity(3), &tol));
        assert!(is_psd(&RealMatrix::from_rows(&[[2.0, -2.0], [-2.0, 2.0]]), &tol));
        assert!(!is_psd(&RealMatrix::from_rows(&[[1.0, -3.0], [1.0, 1.0]]), &tol));
        assert!(!is_psd(&sz(), &tol));
    }

    #[test]
    fn symmetry_examples() {
        let tol = ToleranceConfig::default();
        let s = classify_symmetry(&sz(), &tol);
        assert_eq!(s.kind, SymmetryKind::Selfadjoint);
        assert!(s.as_part.is_zero(0.0));
        let j = RealMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        let s = classify_symmetry(&j, &tol);
        assert_eq!(s.kind, SymmetryKind::Antisymmetric);
        assert_eq!(s.as_part, j);
        let s = classify_symmetry(&RealMatrix::unit(2, 0, 1), &tol);
        assert_eq!(s.kind, SymmetryKind::Neither);
        assert_eq!(s.sa_part, sx().scale(0.5));
        assert_eq!(s.as_part, j.scale(0.5));
    }

    #[test]
    fn inverse_and_condition_guard() {
        let mut rng = seeded_rng(7);
        let m = random_matrix(&mut rng, 4) + RealMatrix::identity(4).scale(3.0);
        let inv = inverse(&m).unwrap();
        assert!((&m * &inv).max_abs_diff(&RealMatrix::identity(4)) < 1e-12);
        let singular = RealMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(inverse_checked(&singular, 1e12), Err(Error::Singular { .. })));
    }

    #[test]
    fn rect_conjugation_and_norm() {
        let mut a = RectMatrix::zeros(1, 2);
        a[(0, 0)] = 3.0;
        a[(0, 1)] = 4.0;
        assert!((a.operator_norm() - 5.0).abs() < 1e-14);
        let c = a.conjugate(&RealMatrix::identity(2));
        assert!((c[(0, 0)] - 25.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_json_form() {
        let m = RealMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dim":2,"entries":[1.0,2.0,3.0,4.0]}"#);
        let back: RealMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<RealMatrix>(r#"{"dim":2,"entries":[1.0]}"#).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn mat(n: usize) -> impl Strategy<Value = RealMatrix> {
            proptest::collection::vec(-5.0..5.0f64, n * n).prop_map(move |e| RealMatrix::new(n, e).unwrap())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn adjoint_is_isometric(m in mat(4)) {
                let a = operator_norm(&m);
                let b = operator_norm(&adjoint(&m));
                prop_assert!((a - b).abs() <= 1e-7 * (1.0 + a));
            }

            #[test]
            fn gram_is_psd(m in mat(4)) {
                prop_assert!(is_psd(&m.gram(), &ToleranceConfig::default()));
            }

            #[test]
            fn jordan_commutative_bilinear(a in mat(3), b in mat(3), c in mat(3), s in -3.0..3.0f64) {
                let ab = jordan(&a, &b).unwrap();
                let ba = jordan(&b, &a).unwrap();
                prop_assert!(ab.max_abs_diff(&ba) <= 1e-12);
                let lhs = jordan(&(a.scale(s) + &c), &b).unwrap();
                let rhs = ab.scale(s) + jordan(&c, &b).unwrap();
                prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + lhs.max_abs()));
            }

            #[test]
            fn operator_norm_submultiplicative(a in mat(3), b in mat(3)) {
                let lhs = operator_norm(&(&a * &b));
                prop_assert!(lhs <= operator_norm(&a) * operator_norm(&b) * (1.0 + 1e-9) + 1e-12);
            }
        }
    }
}
