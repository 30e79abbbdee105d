//! Complex matrices `x + iy` carried as real block matrices `[[x, -y], [y, x]]`.

use serde::{Deserialize, Serialize};

use crate::algebra::Subspace;
use crate::error::{Error, Result};
use crate::matcore::{is_psd, RealMatrix, ToleranceConfig};

const PATTERN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub re: RealMatrix,
    pub im: RealMatrix,
}

impl ComplexPair {
    pub fn new(re: RealMatrix, im: RealMatrix) -> Result<Self> {
        if re.dim() != im.dim() {
            return Err(Error::DimensionMismatch {
                expected: re.dim(),
                found: im.dim(),
            });
        }
        Ok(Self { re, im })
    }

    pub fn real(re: RealMatrix) -> Self {
        let im = RealMatrix::zeros(re.dim());
        Self { re, im }
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    /// Complex product `(x + iy)(u + iv)`.
    pub fn mul(&self, other: &ComplexPair) -> ComplexPair {
        ComplexPair {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    /// Conjugate transpose `xᵀ - i yᵀ`.
    pub fn adjoint(&self) -> ComplexPair {
        ComplexPair {
            re: self.re.transpose(),
            im: -self.im.transpose(),
        }
    }

    /// Multiplication by the phase `e^{iθ}`.
    pub fn rotate(&self, theta: f64) -> ComplexPair {
        let (s, c) = theta.sin_cos();
        ComplexPair {
            re: self.re.scale(c) - self.im.scale(s),
            im: self.re.scale(s) + self.im.scale(c),
        }
    }

    /// Entrywise complex conjugate `x - iy`.
    pub fn conj(&self) -> ComplexPair {
        ComplexPair {
            re: self.re.clone(),
            im: -&self.im,
        }
    }
}

pub fn embed(p: &ComplexPair) -> Result<RealMatrix> {
    if p.re.dim() != p.im.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.re.dim(),
            found: p.im.dim(),
        });
    }
    RealMatrix::from_blocks(&[vec![p.re.clone(), -&p.im], vec![p.im.clone(), p.re.clone()]])
}

pub(crate) fn embed_parts(re: &RealMatrix, im: &RealMatrix) -> RealMatrix {
    RealMatrix::from_blocks(&[vec![re.clone(), -im], vec![im.clone(), re.clone()]]).expect("equal block sizes")
}

/// Inverse of [`embed`]; the block pattern must hold within `1e-10`.
pub fn unembed(b: &RealMatrix) -> Result<ComplexPair> {
    let n2 = b.dim();
    if !n2.is_multiple_of(2) {
        return Err(Error::InvalidMatrix(format!(
            "odd dimension {n2} has no complex block form"
        )));
    }
    let n = n2 / 2;
    let x = b.block(0, 0, n);
    let y = b.block(n, 0, n);
    let deviation = b
        .block(n, n, n)
        .max_abs_diff(&x)
        .max(b.block(0, n, n).max_abs_diff(&-&y));
    if deviation > PATTERN_TOL {
        return Err(Error::BlockPattern { deviation });
    }
    Ok(ComplexPair { re: x, im: y })
}

/// Hermitian test: real part symmetric and imaginary part antisymmetric.
pub fn complex_is_selfadjoint(p: &ComplexPair, tol: &ToleranceConfig) -> bool {
    let re_dev = p.re.symmetry_deviation();
    let im_dev = (&p.im + &p.im.transpose()).max_abs() / 2.0;
    re_dev <= tol.psd_tol && im_dev <= tol.psd_tol
}

pub fn complex_is_psd(p: &ComplexPair, tol: &ToleranceConfig) -> bool {
    match embed(p) {
        Ok(b) => is_psd(&b, tol),
        Err(_) => false,
    }
}

/// The complexification `S_c ⊂ M_{2n}`, spanned by the embeddings of `(b, 0)`
/// and `(0, b)` for basis elements `b`.
pub fn complexify_subspace(s: &Subspace) -> Subspace {
    let n = s.ambient_dim();
    let zero = RealMatrix::zeros(n);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(2 * s.dim());
    for b in s.basis() {
        basis.push(embed_parts(b, &zero).scale(h));
    }
    for b in s.basis() {
        basis.push(embed_parts(&zero, b).scale(h));
    }
    Subspace::from_orthonormal(2 * n, basis)
}
