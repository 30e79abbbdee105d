//! Seeded random constructions used by the checkers and scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::{operator_norm, RealMatrix, RectMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed for a named sub-stream.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with the parent seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

pub fn random_unit_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v = random_vector(rng, n);
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-6 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> RealMatrix {
    RealMatrix::new(n, random_vector(rng, n * n)).expect("finite Gaussian entries")
}

pub fn random_rect(rng: &mut impl Rng, rows: usize, cols: usize) -> RectMatrix {
    RectMatrix {
        rows,
        cols,
        entries: random_vector(rng, rows * cols),
    }
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> RealMatrix {
    random_matrix(rng, n).sym_part()
}

pub fn random_antisymmetric(rng: &mut impl Rng, n: usize) -> RealMatrix {
    random_matrix(rng, n).skew_part()
}

/// `G Gᵀ` for Gaussian `G`, almost surely positive definite.
pub fn random_psd(rng: &mut impl Rng, n: usize) -> RealMatrix {
    random_matrix(rng, n).transpose().gram()
}

/// Rank-one `v vᵀ` for a unit vector `v`.
pub fn random_rank_one(rng: &mut impl Rng, n: usize) -> RealMatrix {
    let v = random_unit_vector(rng, n);
    RealMatrix::from_fn(n, |i, j| v[i] * v[j])
}

/// Orthogonal matrix from Gram-Schmidt on Gaussian columns.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> RealMatrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = random_vector(rng, n);
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= d * y;
                }
            }
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-6 {
            cols.push(v.into_iter().map(|x| x / len).collect());
        }
    }
    RealMatrix::from_fn(n, |i, j| cols[j][i])
}

/// Random matrix rescaled to operator norm `radius`.
pub fn random_with_norm(rng: &mut impl Rng, n: usize, radius: f64) -> RealMatrix {
    loop {
        let m = random_matrix(rng, n);
        let norm = operator_norm(&m);
        if norm > 1e-8 {
            return m.scale(radius / norm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{is_psd, ToleranceConfig};

    #[test]
    fn streams_are_reproducible() {
        let a = random_matrix(&mut seeded_rng(9), 3);
        let b = random_matrix(&mut seeded_rng(9), 3);
        assert_eq!(a, b);
        assert_ne!(derive_seed(1, "x"), derive_seed(1, "y"));
        assert_ne!(derive_seed(1, "x"), derive_seed(2, "x"));
    }

    #[test]
    fn constructions_have_their_shapes() {
        let mut rng = seeded_rng(10);
        let tol = ToleranceConfig::default();
        assert!(is_psd(&random_psd(&mut rng, 4), &tol));
        assert!(is_psd(&random_rank_one(&mut rng, 4), &tol));
        let q = random_orthogonal(&mut rng, 5);
        assert!(q.gram().max_abs_diff(&RealMatrix::identity(5)) < 1e-12);
        let c = random_with_norm(&mut rng, 3, 0.5);
        assert!((operator_norm(&c) - 0.5).abs() < 1e-12);
        assert!(random_antisymmetric(&mut rng, 3).sym_part().is_zero(0.0));
    }
}
