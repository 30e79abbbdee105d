//! Real-linear maps between matrix subspaces: amplification, the positivity
//! ladder, Choi-Kraus-Stinespring for completely positive maps, norm
//! estimates, and the extension theorems.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{diagonal, member, AlgebraFile, AlgebraRef, Subspace, SubspaceFlags};
use crate::complexify::{complexify_subspace, embed_parts};
use crate::dense::{flatten, gram_matrix, lstsq, norm, null_space};
use crate::error::{Error, Result};
use crate::functionals::{sample_psd_members, sample_real_positive_members, NormCertificate};
use crate::matcore::{
    is_psd, jacobi, jordan_unchecked, min_eig_sym, operator_norm, sym_eig, RealMatrix, RectMatrix, ToleranceConfig,
};
use crate::optimize::{max_linear_over_ball, polar, PsdAffine};
use crate::sampling::{derive_seed, seeded_rng};

const SWEEPS: usize = 200;
const ASCENT_STEPS: usize = 500;
/// Samples per cone and level in [`classify_map`].
pub const DEFAULT_SAMPLES: usize = 200;
/// Bound on the Frobenius norm of the antisymmetric part in the real-bounded
/// seminorm search.
pub const RECESSION_CLIP: f64 = 1e3;

/// A linear map `T : D → M_m` on a subspace `D ⊂ M_n`, stored by the images
/// of the orthonormal basis of `D`.
#[derive(Debug, Clone, Serialize)]
pub struct LinearMapDesc {
    pub domain: Subspace,
    pub codomain_dim: usize,
    pub images: Vec<RealMatrix>,
}

impl LinearMapDesc {
    pub fn new(domain: Subspace, codomain_dim: usize, images: Vec<RealMatrix>) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::InvalidInput(format!(
                "{} images given for a {}-dimensional domain",
                images.len(),
                domain.dim()
            )));
        }
        for img in &images {
            if img.dim() != codomain_dim {
                return Err(Error::DimensionMismatch {
                    expected: codomain_dim,
                    found: img.dim(),
                });
            }
        }
        Ok(Self {
            domain,
            codomain_dim,
            images,
        })
    }

    pub fn from_fn(domain: Subspace, codomain_dim: usize, f: impl Fn(&RealMatrix) -> RealMatrix) -> Result<Self> {
        let images = domain.basis().iter().map(f).collect();
        Self::new(domain, codomain_dim, images)
    }

    /// The map on `span(generators)` sending each generator to its image.
    /// Dependent generators must carry consistent images.
    pub fn from_generator_images(
        ambient_dim: usize,
        codomain_dim: usize,
        generators: &[RealMatrix],
        images: &[RealMatrix],
    ) -> Result<Self> {
        let map = Self::from_generators_unchecked(ambient_dim, codomain_dim, generators, images)?;
        let scale = 1.0 + images.iter().fold(0.0_f64, |a, m| a.max(m.max_abs()));
        let worst = generators
            .iter()
            .zip(images)
            .fold(0.0_f64, |w, (g, img)| w.max(map.apply_unchecked(g).max_abs_diff(img)));
        if worst > 1e-9 * scale {
            return Err(Error::Inconsistent(format!(
                "generator images do not define a linear map (residual {worst:.3e})"
            )));
        }
        Ok(map)
    }

    fn from_generators_unchecked(
        ambient_dim: usize,
        codomain_dim: usize,
        generators: &[RealMatrix],
        images: &[RealMatrix],
    ) -> Result<Self> {
        if generators.len() != images.len() {
            return Err(Error::InvalidInput(format!(
                "{} generators but {} images",
                generators.len(),
                images.len()
            )));
        }
        for img in images {
            if img.dim() != codomain_dim {
                return Err(Error::DimensionMismatch {
                    expected: codomain_dim,
                    found: img.dim(),
                });
            }
        }
        let domain = Subspace::span(ambient_dim, generators)?;
        let columns: Vec<Vec<f64>> = generators.iter().map(flatten).collect();
        let basis_images = domain
            .basis()
            .iter()
            .map(|b| {
                let (c, _) = lstsq(&columns, &flatten(b));
                combine(&c, images, codomain_dim)
            })
            .collect();
        Self::new(domain, codomain_dim, basis_images)
    }

    pub fn identity(domain: Subspace) -> Self {
        let n = domain.ambient_dim();
        let images = domain.basis().to_vec();
        Self {
            domain,
            codomain_dim: n,
            images,
        }
    }

    /// `x ↦ xᵀ` on `M_n`.
    pub fn transpose(n: usize) -> Self {
        let domain = Subspace::full(n);
        let images = domain.basis().iter().map(|b| b.transpose()).collect();
        Self {
            domain,
            codomain_dim: n,
            images,
        }
    }

    /// `x ↦ Σ Aᵢ x Aᵢᵀ` for `m × n` operators `Aᵢ`.
    pub fn from_kraus(domain: Subspace, ops: &[RectMatrix]) -> Result<Self> {
        let n = domain.ambient_dim();
        let m = match ops.first() {
            Some(a) => a.rows,
            None => return Err(Error::InvalidInput("at least one Kraus operator is required".into())),
        };
        for a in ops {
            if a.cols != n || a.rows != m {
                return Err(Error::InvalidInput(format!(
                    "Kraus operator of shape {}x{} on M_{n} into M_{m}",
                    a.rows, a.cols
                )));
            }
        }
        Self::from_fn(domain, m, |b| {
            let mut out = RealMatrix::zeros(m);
            for a in ops {
                out += &a.conjugate(b);
            }
            out
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            domain: self.domain.clone(),
            codomain_dim: self.codomain_dim,
            images: self.images.iter().map(|m| m.scale(s)).collect(),
        }
    }

    pub fn apply(&self, x: &RealMatrix) -> Result<RealMatrix> {
        let (ok, residual) = member(&self.domain, x)?;
        if !ok {
            return Err(Error::NotMember { residual });
        }
        Ok(self.apply_unchecked(x))
    }

    /// Applies the map to the orthogonal projection of `x` onto the domain.
    pub fn apply_unchecked(&self, x: &RealMatrix) -> RealMatrix {
        self.apply_coords(&self.domain.coords(x))
    }

    pub fn apply_coords(&self, coords: &[f64]) -> RealMatrix {
        combine(coords, &self.images, self.codomain_dim)
    }

    /// The trace-pairing adjoint `T*(y) = Σ ⟨T(bᵢ), y⟩ bᵢ`, valued in the domain.
    pub fn adjoint_apply(&self, y: &RealMatrix) -> RealMatrix {
        let coords: Vec<f64> = self.images.iter().map(|img| img.inner(y)).collect();
        self.domain.element(&coords)
    }
}

fn combine(coords: &[f64], images: &[RealMatrix], dim: usize) -> RealMatrix {
    let mut out = RealMatrix::zeros(dim);
    for (c, img) in coords.iter().zip(images) {
        if *c != 0.0 {
            out += &img.scale(*c);
        }
    }
    out
}

fn outer(u: &[f64], v: &[f64]) -> RealMatrix {
    RealMatrix::from_fn(u.len(), |i, j| u[i] * v[j])
}

/// Applies `f` to each of the `k × k` blocks of `x`.
fn blockwise(x: &RealMatrix, k: usize, f: impl Fn(&RealMatrix) -> RealMatrix) -> RealMatrix {
    let n = x.dim() / k;
    let rows: Vec<Vec<RealMatrix>> = (0..k)
        .map(|a| (0..k).map(|b| f(&x.block(a * n, b * n, n))).collect())
        .collect();
    RealMatrix::from_blocks(&rows).expect("uniform block sizes")
}

fn pad(x: &RealMatrix, extra: usize) -> RealMatrix {
    if extra == 0 {
        x.clone()
    } else {
        x.direct_sum(&RealMatrix::zeros(extra))
    }
}

/// `M_k(D)` with basis `E_ab ⊗ bᵢ`; its structure is read off that of `D`.
pub fn amplify_subspace(d: &Subspace, k: usize) -> Subspace {
    assert!(k >= 1, "amplification level must be positive");
    if k == 1 {
        return d.clone();
    }
    let n = d.ambient_dim();
    let mut basis = Vec::with_capacity(k * k * d.dim());
    for a in 0..k {
        for b in 0..k {
            let e = RealMatrix::unit(k, a, b);
            for bi in d.basis() {
                basis.push(e.kron(bi));
            }
        }
    }
    let f = d.flags();
    let identity = d.identity().and_then(|e| {
        if e.max_abs_diff(&RealMatrix::identity(n)) <= 1e-12 {
            Some(RealMatrix::identity(k * n))
        } else if f.is_assoc_closed {
            Some(RealMatrix::identity(k).kron(e))
        } else {
            None
        }
    });
    let flags = SubspaceFlags {
        is_selfadjoint_space: f.is_selfadjoint_space,
        is_jordan_closed: f.is_assoc_closed,
        is_assoc_closed: f.is_assoc_closed,
        is_unital: identity.is_some(),
    };
    Subspace::with_structure(k * n, basis, flags, identity)
}

/// The entrywise amplification `T_k` on `M_k(D)`.
pub fn amplify(t: &LinearMapDesc, k: usize) -> LinearMapDesc {
    if k == 1 {
        return t.clone();
    }
    let domain = amplify_subspace(&t.domain, k);
    let mut images = Vec::with_capacity(domain.dim());
    for a in 0..k {
        for b in 0..k {
            let e = RealMatrix::unit(k, a, b);
            for img in &t.images {
                images.push(e.kron(img));
            }
        }
    }
    LinearMapDesc {
        domain,
        codomain_dim: k * t.codomain_dim,
        images,
    }
}

/// `T_k` evaluated block by block, without materializing the amplified map.
struct Amplified<'a> {
    map: &'a LinearMapDesc,
    k: usize,
    space: Option<Subspace>,
}

impl<'a> Amplified<'a> {
    fn new(map: &'a LinearMapDesc, k: usize) -> Self {
        let space = (!map.domain.is_full()).then(|| amplify_subspace(&map.domain, k));
        Self { map, k, space }
    }

    fn apply(&self, x: &RealMatrix) -> RealMatrix {
        blockwise(x, self.k, |b| self.map.apply_unchecked(b))
    }

    fn adjoint(&self, y: &RealMatrix) -> RealMatrix {
        blockwise(y, self.k, |b| self.map.adjoint_apply(b))
    }

    fn project(&self, x: &RealMatrix) -> RealMatrix {
        blockwise(x, self.k, |b| self.map.domain.project(b))
    }

    /// A maximizer of `⟨g, x⟩` over the unit ball of `M_k(D)`.
    fn ball_max(&self, g: &RealMatrix) -> RealMatrix {
        match &self.space {
            None => polar(g).0,
            Some(s) => max_linear_over_ball(g, s, 1e-12).point,
        }
    }

    fn starts(&self, rng: &mut impl Rng) -> Vec<RealMatrix> {
        let d = &self.map.domain;
        let n = d.ambient_dim();
        let k = self.k;
        let mut out = Vec::new();
        if let Some(e) = d.identity() {
            out.push(RealMatrix::identity(k).kron(e));
        }
        let r = k.min(n);
        let mut swap = RealMatrix::zeros(k * n);
        let mut corr = RealMatrix::zeros(k * n);
        for a in 0..r {
            for b in 0..r {
                swap += &RealMatrix::unit(k, a, b).kron(&RealMatrix::unit(n, b, a));
                corr += &RealMatrix::unit(k, a, b).kron(&RealMatrix::unit(n, a, b));
            }
        }
        out.push(swap);
        out.push(corr);
        for b in d.basis().iter().take(12) {
            out.push(pad(b, (k - 1) * n));
        }
        for _ in 0..4 {
            let rows: Vec<Vec<RealMatrix>> = (0..k)
                .map(|_| (0..k).map(|_| d.random_element(rng)).collect())
                .collect();
            out.push(RealMatrix::from_blocks(&rows).expect("uniform block sizes"));
        }
        out.into_iter()
            .map(|x| self.project(&x))
            .filter(|x| !x.is_zero(1e-14))
            .collect()
    }

    /// Alternating ascent on `‖T_k(x)‖`: the top singular pair `(u, v)` of
    /// `T_k(x)` linearizes the objective, and the linearization is maximized
    /// exactly over the ball. The objective never decreases.
    fn ascend(&self, start: &RealMatrix) -> (f64, RealMatrix) {
        let mut x = normalize(start);
        let mut value = operator_norm(&self.apply(&x));
        for _ in 0..ASCENT_STEPS {
            let Some((u, v)) = top_singular_pair(&self.apply(&x)) else {
                break;
            };
            let cand = self.ball_max(&self.adjoint(&outer(&u, &v)));
            let cand_value = operator_norm(&self.apply(&cand));
            if cand_value <= value + 1e-13 * (1.0 + value) {
                if cand_value > value {
                    x = cand;
                    value = cand_value;
                }
                break;
            }
            x = cand;
            value = cand_value;
        }
        let nx = operator_norm(&x);
        if nx > 1.0 {
            x = x.scale(1.0 / nx);
            value = operator_norm(&self.apply(&x));
        }
        (value, x)
    }
}

fn normalize(x: &RealMatrix) -> RealMatrix {
    let nx = operator_norm(x);
    if nx > 0.0 {
        x.scale(1.0 / nx)
    } else {
        x.clone()
    }
}

fn top_singular_pair(y: &RealMatrix) -> Option<(Vec<f64>, Vec<f64>)> {
    let eig = jacobi(&y.gram(), SWEEPS).ok()?;
    let v = eig.vector(0);
    let mut u = y.mul_vec(&v);
    let s = norm(&u);
    if s == 0.0 {
        return None;
    }
    u.iter_mut().for_each(|c| *c /= s);
    Some((u, v))
}

/// Lower bounds on `‖T_k‖` for each requested level, each with an upper
/// bound. The best point of a level seeds the next one after padding with
/// zeros, so the values are nondecreasing along increasing levels.
pub fn map_norm_levels(t: &LinearMapDesc, levels: &[usize], seed: u64) -> Vec<NormCertificate> {
    let n = t.domain.ambient_dim();
    let mut out = Vec::with_capacity(levels.len());
    let mut prev: Option<(usize, RealMatrix)> = None;
    for &k in levels {
        assert!(k >= 1, "amplification level must be positive");
        let amp = Amplified::new(t, k);
        let mut rng = seeded_rng(derive_seed(seed, &format!("map_norm/{k}")));
        let mut starts = amp.starts(&mut rng);
        if let Some((j, x)) = &prev {
            if *j <= k {
                starts.push(pad(x, (k - j) * n));
            }
        }
        let mut best = (0.0, RealMatrix::zeros(k * n));
        for s in &starts {
            let (v, x) = amp.ascend(s);
            if v > best.0 {
                best = (v, x);
            }
        }
        let upper = norm_upper_bound(t, k);
        let gap = (upper - best.0).max(0.0);
        out.push(NormCertificate {
            value: best.0,
            maximizer: best.1.clone(),
            gap_estimate: gap,
            exact: gap <= 1e-10 * (1.0 + best.0),
        });
        prev = Some((k, best.1));
    }
    out
}

/// Certified lower bound on `‖T_k‖`, computed along levels `1..=k`.
pub fn map_norm(t: &LinearMapDesc, k: usize, seed: u64) -> NormCertificate {
    let levels: Vec<usize> = (1..=k).collect();
    map_norm_levels(t, &levels, seed).pop().expect("at least one level")
}

/// A bound valid at every level: the Haagerup factorization read off the
/// singular value decomposition of the Choi matrix on full domains, and
/// `‖T_k x‖ ≤ ‖T_k x‖_F ≤ ‖L‖ √(kn) ‖x‖` otherwise, with `L` the coordinate
/// matrix of `T`.
fn norm_upper_bound(t: &LinearMapDesc, k: usize) -> f64 {
    if let Ok(c) = choi(t) {
        return haagerup_bound(&c);
    }
    if t.images.is_empty() {
        return 0.0;
    }
    let cols: Vec<Vec<f64>> = t.images.iter().map(flatten).collect();
    let l = jacobi(&gram_matrix(&cols), SWEEPS)
        .map(|e| e.max().max(0.0).sqrt())
        .unwrap_or(f64::MAX);
    l * ((k * t.domain.ambient_dim()) as f64).sqrt()
}

fn haagerup_bound(c: &ChoiMatrix) -> f64 {
    let (n, m) = c.source_dims;
    let eig = match jacobi(&c.matrix.gram(), SWEEPS) {
        Ok(e) => e,
        Err(_) => return f64::MAX,
    };
    let cut = eig.max().max(0.0) * 1e-24;
    let mut p = RealMatrix::zeros(m);
    let mut q = RealMatrix::zeros(m);
    for (idx, &l) in eig.values.iter().enumerate() {
        if l <= cut || l <= 0.0 {
            continue;
        }
        let sigma = l.sqrt();
        let v = eig.vector(idx);
        let u: Vec<f64> = c.matrix.mul_vec(&v).iter().map(|x| x / sigma).collect();
        for a in 0..m {
            for b in 0..m {
                let mut su = 0.0;
                let mut sv = 0.0;
                for j in 0..n {
                    su += u[j * m + a] * u[j * m + b];
                    sv += v[j * m + a] * v[j * m + b];
                }
                p[(a, b)] += sigma * su;
                q[(a, b)] += sigma * sv;
            }
        }
    }
    (operator_norm(&p) * operator_norm(&q)).sqrt()
}

/// Choi matrix of `T : M_n → M_m`: block `(i, j)` is `T(E_ij)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiMatrix {
    pub matrix: RealMatrix,
    /// `(n, m)`.
    pub source_dims: (usize, usize),
}

impl ChoiMatrix {
    /// The map on `M_n` with this Choi matrix.
    pub fn to_map(&self) -> LinearMapDesc {
        let (n, m) = self.source_dims;
        let domain = Subspace::full(n);
        let images = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.matrix.block(i * m, j * m, m))
            .collect();
        LinearMapDesc {
            domain,
            codomain_dim: m,
            images,
        }
    }
}

pub fn choi(t: &LinearMapDesc) -> Result<ChoiMatrix> {
    if !t.domain.is_full() {
        return Err(Error::FullDomainRequired);
    }
    let n = t.domain.ambient_dim();
    let m = t.codomain_dim;
    let mut c = RealMatrix::zeros(n * m);
    for i in 0..n {
        for j in 0..n {
            let e = RealMatrix::unit(n, i, j);
            c += &e.kron(&t.apply_unchecked(&e));
        }
    }
    Ok(ChoiMatrix {
        matrix: c,
        source_dims: (n, m),
    })
}

/// Complete positivity of a map on a full matrix algebra.
pub fn is_cp(t: &LinearMapDesc, tol: &ToleranceConfig) -> Result<bool> {
    Ok(is_psd(&choi(t)?.matrix, tol))
}

/// Kraus operators `Aᵢ` (`m × n`) with `T(x) = Σ Aᵢ x Aᵢᵀ`, one per Choi
/// eigenvalue at least `psd_tol · tr C`.
pub fn kraus(c: &ChoiMatrix, tol: &ToleranceConfig) -> Result<Vec<RectMatrix>> {
    let (n, m) = c.source_dims;
    let eig = sym_eig(&c.matrix, tol)?;
    let scale = tol.psd_tol * (1.0 + eig.max().abs().max(eig.min().abs()));
    if eig.min() < -scale {
        return Err(Error::NotPsd { min_eig: eig.min() });
    }
    let cutoff = tol.psd_tol * c.matrix.trace().max(0.0);
    let mut ops = Vec::new();
    for (idx, &lam) in eig.values.iter().enumerate() {
        if lam <= 0.0 || lam < cutoff {
            continue;
        }
        let v = eig.vector(idx);
        let s = lam.sqrt();
        let mut a = RectMatrix::zeros(m, n);
        for i in 0..n {
            for r in 0..m {
                a[(r, i)] = s * v[i * m + r];
            }
        }
        ops.push(a);
    }
    Ok(ops)
}

/// Stinespring form `T(a) = Vᵀ π(a) V` with `π(a) = I_r ⊗ a` on `ℝʳ ⊗ ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stinespring {
    /// `V : ℝᵐ → ℝʳ ⊗ ℝⁿ`, the transposed Kraus operators stacked.
    pub v: RectMatrix,
    pub multiplicity: usize,
    pub kraus: Vec<RectMatrix>,
    /// Largest entry of `Vᵀπ(E_ij)V − T(E_ij)` over the matrix units.
    pub reconstruction_residual: f64,
    /// `|‖V‖² − ‖T(1)‖|`.
    pub norm_gap: f64,
}

impl Stinespring {
    pub fn representation(&self, a: &RealMatrix) -> RealMatrix {
        RealMatrix::identity(self.multiplicity).kron(a)
    }

    pub fn compress(&self, a: &RealMatrix) -> RealMatrix {
        let pi = RectMatrix::from_square(&self.representation(a));
        self.v
            .transpose()
            .matmul(&pi)
            .matmul(&self.v)
            .to_square()
            .expect("square compression")
    }
}

pub fn stinespring(t: &LinearMapDesc, tol: &ToleranceConfig) -> Result<Stinespring> {
    let c = choi(t)?;
    let (n, m) = c.source_dims;
    let mut ops = kraus(&c, tol)?;
    if ops.is_empty() {
        ops.push(RectMatrix::zeros(m, n));
    }
    let r = ops.len();
    let mut v = RectMatrix::zeros(r * n, m);
    for (l, a) in ops.iter().enumerate() {
        for j in 0..n {
            for b in 0..m {
                v[(l * n + j, b)] = a[(b, j)];
            }
        }
    }
    let mut dil = Stinespring {
        v,
        multiplicity: r,
        kraus: ops,
        reconstruction_residual: 0.0,
        norm_gap: 0.0,
    };
    let mut residual = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let e = RealMatrix::unit(n, i, j);
            residual = residual.max(dil.compress(&e).max_abs_diff(&t.apply_unchecked(&e)));
        }
    }
    let v_norm = dil.v.operator_norm();
    let t_one = operator_norm(&t.apply_unchecked(&RealMatrix::identity(n)));
    dil.reconstruction_residual = residual;
    dil.norm_gap = (v_norm * v_norm - t_one).abs();
    if residual > 1e-8 {
        return Err(Error::Inconsistent(format!(
            "dilation does not reproduce the map (residual {residual:.3e})"
        )));
    }
    Ok(dil)
}

/// Positivity results at one matrix level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub positive: bool,
    /// Decided by the Choi matrix rather than by sampling.
    pub positive_exact: bool,
    pub real_positive: bool,
    /// Smallest `λmin` of an image of a normalized positive sample, minus its
    /// asymmetry.
    pub worst_positive_margin: f64,
    /// Smallest `λmin(Re T_k(x))` over normalized real-positive samples.
    pub worst_real_positive_margin: f64,
    pub positive_witness: Option<RealMatrix>,
    pub real_positive_witness: Option<RealMatrix>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFlags {
    pub selfadjoint: bool,
    pub selfadjoint_residual: f64,
    pub positive: bool,
    pub real_positive: bool,
    /// Real positive at every sampled level.
    pub rcp: bool,
    pub srp: bool,
    /// Choi certificate, available on full domains.
    pub cp: Option<bool>,
    pub levels: Vec<LevelReport>,
    /// `srp ⇔ positive ∧ selfadjoint`, checked on selfadjoint domains.
    pub srp_equivalence: Option<bool>,
    /// Real positivity at level `m` (codomain `M_m`) carries over to every
    /// higher sampled level.
    pub level_propagation: Option<bool>,
    pub seed: u64,
}

/// Whether `T(dᵀ) = T(d)ᵀ` on the diagonal `Δ(D)`; returns the residual.
pub fn selfadjoint_on_diagonal(t: &LinearMapDesc) -> (bool, f64) {
    let delta = diagonal(&t.domain);
    let scale = 1.0 + t.images.iter().fold(0.0_f64, |a, m| a.max(m.max_abs()));
    let residual = delta.basis().iter().fold(0.0_f64, |r, b| {
        let lhs = t.apply_unchecked(&b.transpose());
        r.max(lhs.max_abs_diff(&t.apply_unchecked(b).transpose()))
    });
    (residual <= 1e-9 * scale, residual)
}

pub fn classify_map(t: &LinearMapDesc, levels: &[usize], seed: u64, tol: &ToleranceConfig) -> Result<MapFlags> {
    classify_map_with(t, levels, seed, tol, DEFAULT_SAMPLES)
}

/// The positivity ladder of a map on a unital domain. Level 1 is always
/// included. Positivity is sampled, except at levels `k ≥ n` on `M_n`, where
/// the Choi matrix decides it.
pub fn classify_map_with(
    t: &LinearMapDesc,
    levels: &[usize],
    seed: u64,
    tol: &ToleranceConfig,
    samples: usize,
) -> Result<MapFlags> {
    let one = t.domain.identity().cloned().ok_or(Error::NotUnital)?;
    let (selfadjoint, selfadjoint_residual) = selfadjoint_on_diagonal(t);
    let cp = if t.domain.is_full() { Some(is_cp(t, tol)?) } else { None };
    let mut lv: Vec<usize> = levels.iter().copied().filter(|&k| k >= 1).collect();
    lv.push(1);
    lv.sort_unstable();
    lv.dedup();
    let delta = diagonal(&t.domain);
    let reports: Vec<LevelReport> = lv
        .iter()
        .map(|&k| level_report(t, k, &delta, &one, cp, seed, tol, samples))
        .collect();
    let first = &reports[0];
    let positive = first.positive;
    let real_positive = first.real_positive;
    let rcp = reports.iter().all(|r| r.real_positive);
    let srp = real_positive && selfadjoint;
    let srp_equivalence = t
        .domain
        .flags()
        .is_selfadjoint_space
        .then_some(srp == (positive && selfadjoint));
    let m = t.codomain_dim;
    let level_propagation = reports
        .iter()
        .find(|r| r.level == m)
        .map(|base| !base.real_positive || reports.iter().filter(|r| r.level > m).all(|r| r.real_positive));
    Ok(MapFlags {
        selfadjoint,
        selfadjoint_residual,
        positive,
        real_positive,
        rcp,
        srp,
        cp,
        levels: reports,
        srp_equivalence,
        level_propagation,
        seed,
    })
}

#[allow(clippy::too_many_arguments)]
fn level_report(
    t: &LinearMapDesc,
    k: usize,
    delta: &Subspace,
    one: &RealMatrix,
    cp: Option<bool>,
    seed: u64,
    tol: &ToleranceConfig,
    samples: usize,
) -> LevelReport {
    let d = &t.domain;
    let n = d.ambient_dim();
    let amp = Amplified::new(t, k);
    let mut rng = seeded_rng(derive_seed(seed, &format!("classify/{k}")));
    let dk = amplify_subspace(d, k);
    let delta_k = amplify_subspace(delta, k);
    let one_k = RealMatrix::identity(k).kron(one);

    let mut psd = sample_psd_members(&delta_k, &one_k, samples, &mut rng);
    let mut rp = sample_real_positive_members(&dk, &delta_k, &one_k, samples, &mut rng);
    psd.extend(structured_psd_candidates(d, k, one, tol));
    if d.flags().is_selfadjoint_space {
        // Re x is positive whenever x is real positive
        psd.extend(rp.iter().map(|x| x.sym_part()));
    }
    rp.extend(psd.iter().cloned());

    let mut worst_positive = (f64::INFINITY, None);
    for p in &psd {
        let p = normalize(p);
        let y = amp.apply(&p);
        let margin = min_eig_sym(&y) - y.symmetry_deviation();
        if margin < worst_positive.0 {
            worst_positive = (margin, Some(p));
        }
    }
    let mut worst_rp = (f64::INFINITY, None);
    for x in &rp {
        let x = normalize(x);
        let y = amp.apply(&x);
        let margin = min_eig_sym(&y);
        if margin < worst_rp.0 {
            worst_rp = (margin, Some(x));
        }
    }
    let threshold = -tol.psd_tol * (1.0 + norm_scale(t));
    let mut positive = worst_positive.0 >= threshold;
    let mut positive_exact = false;
    if let Some(cp) = cp {
        if k >= n {
            positive = cp;
            positive_exact = true;
        }
    }
    let real_positive = worst_rp.0 >= threshold;
    LevelReport {
        level: k,
        positive,
        positive_exact,
        real_positive,
        worst_positive_margin: worst_positive.0,
        worst_real_positive_margin: worst_rp.0,
        positive_witness: if positive { None } else { worst_positive.1 },
        real_positive_witness: if real_positive { None } else { worst_rp.1 },
        samples: psd.len() + rp.len(),
    }
}

fn norm_scale(t: &LinearMapDesc) -> f64 {
    t.images.iter().fold(0.0_f64, |a, m| a.max(operator_norm(m)))
}

/// Positive elements of `M_k(D)` that tend to sit on the boundary of the
/// cone: the matrix `Σ E_ij ⊗ E_ij` when `D = M_n` and `k ≥ n`, and
/// `[[1, x], [xᵀ, 1]]` for contractions `x` with `xᵀ ∈ D`.
fn structured_psd_candidates(d: &Subspace, k: usize, one: &RealMatrix, tol: &ToleranceConfig) -> Vec<RealMatrix> {
    let n = d.ambient_dim();
    let mut out = Vec::new();
    if d.is_full() && k >= n {
        let mut c = RealMatrix::zeros(n * n);
        for i in 0..n {
            for j in 0..n {
                let e = RealMatrix::unit(n, i, j);
                c += &e.kron(&e);
            }
        }
        out.push(pad(&c, (k - n) * n));
    }
    if k >= 2 {
        let rest = (k > 2).then(|| RealMatrix::identity(k - 2).kron(one));
        for b in d.basis().iter().take(16) {
            let x = normalize(b);
            let xt = x.transpose();
            if d.residual(&xt) > 1e-9 * (1.0 + xt.frobenius_norm()) {
                continue;
            }
            let block = RealMatrix::from_blocks(&[vec![one.clone(), x.clone()], vec![xt, one.clone()]])
                .expect("uniform block sizes");
            if !is_psd(&block, tol) {
                continue;
            }
            out.push(match &rest {
                Some(r) => block.direct_sum(r),
                None => block,
            });
        }
    }
    out
}

/// The extension `x + y* ↦ T(x) + T(y)*` to `D + D*`.
#[derive(Debug, Clone, Serialize)]
pub struct SaExtension {
    pub map: LinearMapDesc,
    /// Largest disagreement between two representations `x + y* = a + b*`.
    pub coincidence_residual: f64,
    pub selfadjoint: bool,
    /// Sampled positivity on `D + D*`, when it is unital.
    pub positive: Option<bool>,
}

pub fn canonical_sa_extension(t: &LinearMapDesc, seed: u64, tol: &ToleranceConfig) -> Result<SaExtension> {
    let (ok, residual) = selfadjoint_on_diagonal(t);
    if !ok {
        return Err(Error::DiagonalNotSelfadjoint { residual });
    }
    let n = t.domain.ambient_dim();
    let m = t.codomain_dim;
    let mut gens: Vec<RealMatrix> = t.domain.basis().to_vec();
    let mut imgs = t.images.clone();
    gens.extend(t.domain.basis().iter().map(|b| b.transpose()));
    imgs.extend(t.images.iter().map(|i| i.transpose()));
    let map = LinearMapDesc::from_generators_unchecked(n, m, &gens, &imgs)?;

    let delta = diagonal(&t.domain);
    let mut rng = seeded_rng(derive_seed(seed, "sa_extension"));
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let x = t.domain.random_element(&mut rng);
        let y = t.domain.random_element(&mut rng);
        let d = delta.random_element(&mut rng);
        let a = &x + &d;
        let b = &y - &d.transpose();
        let direct = t.apply_unchecked(&x) + t.apply_unchecked(&y).transpose();
        let other = t.apply_unchecked(&a) + t.apply_unchecked(&b).transpose();
        let extended = map.apply_unchecked(&(&x + &y.transpose()));
        let scale = 1.0 + direct.max_abs();
        worst = worst
            .max(direct.max_abs_diff(&other) / scale)
            .max(direct.max_abs_diff(&extended) / scale);
    }
    if worst > 1e-9 {
        return Err(Error::NotWellDefined { residual: worst });
    }
    let selfadjoint = selfadjoint_on_diagonal(&map).0;
    let positive = map.domain.identity().cloned().map(|one| {
        let psd = sample_psd_members(&diagonal(&map.domain), &one, 100, &mut rng);
        psd.iter().all(|p| {
            let y = map.apply_unchecked(p);
            let s = 1.0 + y.max_abs();
            y.symmetry_deviation() <= 1e-9 * s && min_eig_sym(&y) >= -tol.psd_tol * s
        })
    });
    Ok(SaExtension {
        map,
        coincidence_residual: worst,
        selfadjoint,
        positive,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealBoundedNorm {
    /// Lower bound on `sup{‖Re u(x)‖ : ‖Re x‖ ≤ 1}`.
    pub value: f64,
    /// False when an element with vanishing real part has an image with
    /// nonzero real part; `value` is then the clipped recession bound.
    pub bounded: bool,
    /// `‖u(1)‖` on unital domains.
    pub at_identity: Option<f64>,
    pub witness: RealMatrix,
}

/// The real-bounded seminorm. Since `‖Re u(x)‖` depends on `x` only through
/// `Re x` when `u` is real-bounded, it equals the norm of the induced map
/// `Re x ↦ Re u(x)` on `Re D`.
pub fn real_bounded_norm(u: &LinearMapDesc, seed: u64) -> Result<RealBoundedNorm> {
    let n = u.domain.ambient_dim();
    let m = u.codomain_dim;
    let at_identity = u.domain.identity().map(|e| operator_norm(&u.apply_unchecked(e)));
    let sym_gens: Vec<RealMatrix> = u.domain.basis().iter().map(|b| b.sym_part()).collect();
    let sym_imgs: Vec<RealMatrix> = u.images.iter().map(|i| i.sym_part()).collect();
    let scale = 1.0 + sym_imgs.iter().fold(0.0_f64, |a, x| a.max(x.max_abs()));

    let columns: Vec<Vec<f64>> = sym_gens.iter().map(flatten).collect();
    let mut recession = (0.0_f64, RealMatrix::zeros(n));
    for c in null_space(&columns, 1e-10) {
        let w = combine(&c, &sym_imgs, m);
        let k = u.domain.element(&c);
        let kf = k.frobenius_norm();
        if kf == 0.0 {
            continue;
        }
        let growth = operator_norm(&w) / kf;
        if growth > 1e-9 * scale && growth > recession.0 {
            recession = (growth, k.scale(RECESSION_CLIP / kf));
        }
    }
    if recession.0 > 0.0 {
        return Ok(RealBoundedNorm {
            value: RECESSION_CLIP * recession.0,
            bounded: false,
            at_identity,
            witness: recession.1,
        });
    }
    let w = LinearMapDesc::from_generators_unchecked(n, m, &sym_gens, &sym_imgs)?;
    let cert = map_norm(&w, 1, seed);
    Ok(RealBoundedNorm {
        value: cert.value,
        bounded: true,
        at_identity,
        witness: cert.maximizer,
    })
}

/// `T_c(x + iy) = T(x) + iT(y)` on the embedded complexification.
pub fn complexify_map(t: &LinearMapDesc) -> LinearMapDesc {
    let domain = complexify_subspace(&t.domain);
    let zero = RealMatrix::zeros(t.codomain_dim);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut images: Vec<RealMatrix> = t.images.iter().map(|i| embed_parts(i, &zero).scale(h)).collect();
    images.extend(t.images.iter().map(|i| embed_parts(&zero, i).scale(h)));
    LinearMapDesc {
        domain,
        codomain_dim: 2 * t.codomain_dim,
        images,
    }
}

/// Result of adjoining units: `T̃(a + s1) = T(a) + s1`.
#[derive(Debug, Clone, Serialize)]
pub struct UnitizationExtension {
    pub map: LinearMapDesc,
    pub real_bounded_norm: f64,
    /// Sampled real positivity of `T̃`.
    pub real_positive: bool,
    pub worst_margin: f64,
    pub witness: Option<RealMatrix>,
    pub samples: usize,
}

pub fn extend_to_unitization(t: &LinearMapDesc, seed: u64, tol: &ToleranceConfig) -> Result<UnitizationExtension> {
    extend_to_unitization_with(t, seed, tol, 500)
}

pub fn extend_to_unitization_with(
    t: &LinearMapDesc,
    seed: u64,
    tol: &ToleranceConfig,
    samples: usize,
) -> Result<UnitizationExtension> {
    let n = t.domain.ambient_dim();
    let m = t.codomain_dim;
    let id = RealMatrix::identity(n);
    if member(&t.domain, &id)?.0 {
        return Err(Error::AlreadyUnital);
    }
    let rb = real_bounded_norm(t, seed)?;
    if !rb.bounded || rb.value > 1.0 + 1e-6 {
        return Err(Error::Precondition(format!(
            "map is not real-contractive (real-bounded norm at least {:.6})",
            rb.value
        )));
    }
    let mut gens = t.domain.basis().to_vec();
    let mut imgs = t.images.clone();
    gens.push(id.clone());
    imgs.push(RealMatrix::identity(m));
    let map = LinearMapDesc::from_generator_images(n, m, &gens, &imgs)?;

    let mut rng = seeded_rng(derive_seed(seed, "unitization_extension"));
    let delta = diagonal(&map.domain);
    let xs = sample_real_positive_members(&map.domain, &delta, &id, samples, &mut rng);
    let mut worst = (f64::INFINITY, None);
    for x in &xs {
        let x = normalize(x);
        let margin = min_eig_sym(&map.apply_unchecked(&x));
        if margin < worst.0 {
            worst = (margin, Some(x));
        }
    }
    let real_positive = worst.0 >= -tol.psd_tol * (1.0 + norm_scale(&map));
    Ok(UnitizationExtension {
        map,
        real_bounded_norm: rb.value,
        real_positive,
        worst_margin: worst.0,
        witness: if real_positive { None } else { worst.1 },
        samples: xs.len(),
    })
}

/// A completely positive map on `M_n` extending `T`.
#[derive(Debug, Clone, Serialize)]
pub struct CpExtension {
    pub map: LinearMapDesc,
    pub choi: ChoiMatrix,
    /// Largest entry of `T̃(b) − T(b)` over the basis of the domain.
    pub residual: f64,
    pub min_eig: f64,
    /// Dykstra iterations used.
    pub iterations: usize,
    /// Dual Newton steps, nonzero only when Dykstra stalled.
    pub newton_steps: usize,
}

pub fn extend_cp(t: &LinearMapDesc, tol: &ToleranceConfig) -> Result<CpExtension> {
    extend_cp_with(t, tol, 50_000)
}

/// Finds a positive semidefinite Choi matrix agreeing with `T` on its
/// domain, by Dykstra alternation between the cone and the affine set of
/// consistent Choi matrices.
pub fn extend_cp_with(t: &LinearMapDesc, tol: &ToleranceConfig, max_iter: usize) -> Result<CpExtension> {
    let n = t.domain.ambient_dim();
    let m = t.codomain_dim;
    if t.domain.is_full() {
        let c = choi(t)?;
        let min_eig = min_eig_sym(&c.matrix);
        if !is_psd(&c.matrix, tol) {
            return Err(Error::NotPsd { min_eig });
        }
        return Ok(CpExtension {
            map: t.clone(),
            choi: c,
            residual: 0.0,
            min_eig,
            iterations: 0,
            newton_steps: 0,
        });
    }
    let mut constraints = Vec::with_capacity(t.domain.dim() * m * m);
    let mut rhs = Vec::with_capacity(constraints.capacity());
    for (b, img) in t.domain.basis().iter().zip(&t.images) {
        for a in 0..m {
            for c in 0..m {
                constraints.push(b.kron(&RealMatrix::unit(m, a, c)));
                rhs.push(img[(a, c)]);
            }
        }
    }
    let problem = PsdAffine::new(n * m, &constraints, rhs)?;
    let t_one = t.apply_unchecked(&RealMatrix::identity(n)).sym_part();
    let start = RealMatrix::identity(n).kron(&t_one).scale(1.0 / n as f64);
    let scale = 1.0 + norm_scale(t);
    let sol = problem.solve(&start, max_iter, 1e-9 * scale, tol.psd_tol * scale, 1e-7)?;
    let c = ChoiMatrix {
        matrix: sol.point,
        source_dims: (n, m),
    };
    let map = c.to_map();
    let residual = t
        .domain
        .basis()
        .iter()
        .zip(&t.images)
        .fold(0.0_f64, |r, (b, img)| r.max(map.apply_unchecked(b).max_abs_diff(img)));
    Ok(CpExtension {
        map,
        choi: c,
        residual,
        min_eig: sol.min_eig,
        iterations: sol.iterations,
        newton_steps: sol.newton_steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanHomReport {
    /// Largest entry of `T(a∘b) − T(a)∘T(b)` over basis pairs.
    pub residual: f64,
    pub jordan_hom: bool,
    pub norm: f64,
    pub contractive: bool,
    pub selfadjoint: bool,
    pub srp: Option<bool>,
    /// A contractive Jordan homomorphism on a JC*-algebra is selfadjoint.
    pub selfadjoint_if_contractive: Option<bool>,
    /// ... and systematically real positive.
    pub srp_if_contractive: Option<bool>,
}

pub fn jordan_hom_check(t: &LinearMapDesc, seed: u64, tol: &ToleranceConfig) -> Result<JordanHomReport> {
    let flags = t.domain.flags();
    if !flags.is_jordan_closed {
        return Err(Error::Precondition(
            "the domain is not closed under the Jordan product".into(),
        ));
    }
    let basis = t.domain.basis();
    let scale = 1.0 + t.images.iter().fold(0.0_f64, |a, m| a.max(m.max_abs())).powi(2);
    let mut residual = 0.0_f64;
    for (i, a) in basis.iter().enumerate() {
        for (b, tb) in basis[i..].iter().zip(&t.images[i..]) {
            let lhs = t.apply_unchecked(&jordan_unchecked(a, b));
            let rhs = jordan_unchecked(&t.images[i], tb);
            residual = residual.max(lhs.max_abs_diff(&rhs));
        }
    }
    let jordan_hom = residual <= 1e-9 * scale;
    let norm = map_norm(t, 1, seed).value;
    let contractive = norm <= 1.0 + 1e-6;
    let (selfadjoint, _) = selfadjoint_on_diagonal(t);
    let srp = match classify_map(t, &[1], seed, tol) {
        Ok(f) => Some(f.srp),
        Err(Error::NotUnital) => None,
        Err(e) => return Err(e),
    };
    let jc_star = flags.is_selfadjoint_space;
    let applies = jordan_hom && contractive && jc_star;
    Ok(JordanHomReport {
        residual,
        jordan_hom,
        norm,
        contractive,
        selfadjoint,
        srp,
        selfadjoint_if_contractive: applies.then_some(selfadjoint),
        srp_if_contractive: if applies { srp } else { None },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchwarzReport {
    pub checked: bool,
    /// Why the check was skipped.
    pub reason: Option<String>,
    /// Smallest `λmin(Φ(aᵀa) − Φ(a)ᵀΦ(a))` over samples with `‖a‖ = 1`.
    pub min_margin: f64,
    pub samples: usize,
}

impl SchwarzReport {
    fn skipped(reason: impl Into<String>) -> Self {
        Self {
            checked: false,
            reason: Some(reason.into()),
            min_margin: 0.0,
            samples: 0,
        }
    }
}

/// The Schwarz inequality `Φ(aᵀa) ≥ Φ(a)ᵀΦ(a)` for a unital 2-positive map on
/// a real C*-algebra.
pub fn schwarz_check(phi: &LinearMapDesc, samples: usize, seed: u64, tol: &ToleranceConfig) -> Result<SchwarzReport> {
    let flags = phi.domain.flags();
    if !(flags.is_selfadjoint_space && flags.is_assoc_closed) {
        return Err(Error::Precondition("the domain is not a C*-algebra".into()));
    }
    let Some(one) = phi.domain.identity().cloned() else {
        return Ok(SchwarzReport::skipped("the domain has no identity"));
    };
    let m = phi.codomain_dim;
    let unit_gap = phi.apply_unchecked(&one).max_abs_diff(&RealMatrix::identity(m));
    if unit_gap > 1e-9 {
        return Ok(SchwarzReport::skipped(format!(
            "the map is not unital (deviation {unit_gap:.3e})"
        )));
    }
    let two_positive = if phi.domain.is_full() && is_cp(phi, tol)? {
        true
    } else {
        let f = classify_map(phi, &[2], seed, tol)?;
        f.levels.iter().find(|r| r.level == 2).is_some_and(|r| r.positive)
    };
    if !two_positive {
        return Ok(SchwarzReport::skipped("the map is not 2-positive"));
    }
    let mut rng = seeded_rng(derive_seed(seed, "schwarz"));
    let mut min_margin = f64::INFINITY;
    for i in 0..samples {
        let a = if i == 0 {
            one.clone()
        } else {
            normalize(&phi.domain.random_element(&mut rng))
        };
        let fa = phi.apply_unchecked(&a);
        let gap = phi.apply_unchecked(&a.transpose().matmul(&a)) - fa.transpose().matmul(&fa);
        min_margin = min_margin.min(min_eig_sym(&gap));
    }
    Ok(SchwarzReport {
        checked: true,
        reason: None,
        min_margin,
        samples,
    })
}

/// On-disk map description; `images` are the images of the generators of
/// the domain algebra, in order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub domain: AlgebraRef,
    pub codomain_dim: usize,
    pub images: Vec<RealMatrix>,
}

impl MapFile {
    pub fn build(&self, domain: &AlgebraFile) -> Result<LinearMapDesc> {
        let algebra = domain.materialize()?;
        let map = LinearMapDesc::from_generator_images(
            domain.ambient_dim,
            self.codomain_dim,
            &domain.generators,
            &self.images,
        )?;
        if map.domain.dim() != algebra.subspace.dim() {
            return Err(Error::InvalidInput(format!(
                "images fix the map on a {}-dimensional span, but the algebra has dimension {}",
                map.domain.dim(),
                algebra.subspace.dim()
            )));
        }
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_matrix, random_rect};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn dephasing() -> LinearMapDesc {
        LinearMapDesc::from_fn(Subspace::full(2), 2, |x| RealMatrix::diag(&[x[(0, 0)], x[(1, 1)]])).unwrap()
    }

    #[test]
    fn apply_examples() {
        let d = Subspace::span(2, &[RealMatrix::identity(2), RealMatrix::unit(2, 0, 1)]).unwrap();
        let t = LinearMapDesc::from_fn(d.clone(), 3, |b| RealMatrix::identity(3).scale(b.trace())).unwrap();
        let x = RealMatrix::identity(2).scale(2.0) + RealMatrix::unit(2, 0, 1).scale(3.0);
        assert!(t.apply(&x).unwrap().max_abs_diff(&RealMatrix::identity(3).scale(4.0)) < 1e-12);
        assert!(t.apply(&d.basis()[0]).unwrap().max_abs_diff(&t.images[0]) < 1e-15);
        assert!(matches!(
            t.apply(&RealMatrix::unit(2, 1, 0)),
            Err(Error::NotMember { .. })
        ));
    }

    #[test]
    fn generator_images_must_be_consistent() {
        let gens = [RealMatrix::identity(2), RealMatrix::identity(2).scale(2.0)];
        let ok = [RealMatrix::identity(1), RealMatrix::identity(1).scale(2.0)];
        let t = LinearMapDesc::from_generator_images(2, 1, &gens, &ok).unwrap();
        assert_eq!(t.domain.dim(), 1);
        let bad = [RealMatrix::identity(1), RealMatrix::identity(1)];
        assert!(matches!(
            LinearMapDesc::from_generator_images(2, 1, &gens, &bad),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn amplification_acts_blockwise() {
        let t = LinearMapDesc::transpose(2);
        assert_eq!(amplify(&t, 1).images, t.images);
        let t2 = amplify(&t, 2);
        let mut rng = seeded_rng(61);
        let x = random_matrix(&mut rng, 4);
        let want = blockwise(&x, 2, |b| b.transpose());
        assert!(t2.apply(&x).unwrap().max_abs_diff(&want) < 1e-12);
        let id = amplify(&LinearMapDesc::identity(Subspace::full(2)), 3);
        let y = random_matrix(&mut rng, 6);
        assert!(id.apply(&y).unwrap().max_abs_diff(&y) < 1e-12);
    }

    #[test]
    fn amplified_structure_matches_analysis() {
        let gens = [
            RealMatrix::identity(2),
            RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]),
        ];
        let d = Subspace::span(2, &gens).unwrap();
        let d2 = amplify_subspace(&d, 2);
        let fresh = Subspace::span(4, d2.basis()).unwrap();
        assert_eq!(d2.flags(), fresh.flags());
        assert!(d2.identity().unwrap().max_abs_diff(fresh.identity().unwrap()) < 1e-9);
    }

    #[test]
    fn norms_of_basic_maps() {
        let id = LinearMapDesc::identity(Subspace::full(2));
        for c in map_norm_levels(&id, &[1, 2], 0) {
            assert!((c.value - 1.0).abs() < 1e-12);
        }
        let t = LinearMapDesc::transpose(2);
        let seq = map_norm_levels(&t, &[1, 2], 0);
        assert!((seq[0].value - 1.0).abs() < 1e-9);
        assert!(seq[1].value >= 2.0 - 1e-9);
        assert!(seq[1].gap_estimate < 1e-9);
        let zero = LinearMapDesc::from_fn(Subspace::full(2), 2, |_| RealMatrix::zeros(2)).unwrap();
        for c in map_norm_levels(&zero, &[1, 2, 3], 0) {
            assert_eq!(c.value, 0.0);
        }
    }

    #[test]
    fn norm_sequence_is_monotone_on_random_maps() {
        let mut rng = seeded_rng(62);
        for _ in 0..3 {
            let imgs: Vec<RealMatrix> = (0..4).map(|_| random_matrix(&mut rng, 2)).collect();
            let t = LinearMapDesc::new(Subspace::full(2), 2, imgs).unwrap();
            let seq = map_norm_levels(&t, &[1, 2, 3], 5);
            for w in seq.windows(2) {
                assert!(w[1].value >= w[0].value - 1e-8);
            }
            for c in &seq {
                assert!(c.value <= c.value + c.gap_estimate);
                assert!(operator_norm(&c.maximizer) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn choi_examples() {
        let id = LinearMapDesc::identity(Subspace::full(2));
        let eig = sym_eig(&choi(&id).unwrap().matrix, &tol()).unwrap();
        for (v, want) in eig.values.iter().zip([2.0, 0.0, 0.0, 0.0]) {
            assert!((v - want).abs() < 1e-12);
        }
        let eig = sym_eig(&choi(&LinearMapDesc::transpose(2)).unwrap().matrix, &tol()).unwrap();
        for (v, want) in eig.values.iter().zip([1.0, 1.0, 1.0, -1.0]) {
            assert!((v - want).abs() < 1e-12);
        }
        let mut rng = seeded_rng(63);
        let v = random_rect(&mut rng, 3, 2);
        let t = LinearMapDesc::from_kraus(Subspace::full(2), &[v]).unwrap();
        assert!(is_cp(&t, &tol()).unwrap());
        assert!(!is_cp(&LinearMapDesc::transpose(2), &tol()).unwrap());
        let sub = Subspace::span(2, &[RealMatrix::identity(2)]).unwrap();
        assert!(matches!(
            choi(&LinearMapDesc::identity(sub)),
            Err(Error::FullDomainRequired)
        ));
    }

    #[test]
    fn kraus_examples() {
        let ops = kraus(&choi(&dephasing()).unwrap(), &tol()).unwrap();
        assert_eq!(ops.len(), 2);
        let mut units: Vec<(usize, usize)> = ops
            .iter()
            .map(|a| {
                let idx = a.entries.iter().position(|v| v.abs() > 0.5).unwrap();
                (idx / 2, idx % 2)
            })
            .collect();
        units.sort();
        assert_eq!(units, vec![(0, 0), (1, 1)]);
        let id_ops = kraus(&choi(&LinearMapDesc::identity(Subspace::full(2))).unwrap(), &tol()).unwrap();
        assert_eq!(id_ops.len(), 1);
        assert!((id_ops[0].entries[0].abs() - 1.0).abs() < 1e-12);
        assert!(matches!(
            kraus(&choi(&LinearMapDesc::transpose(2)).unwrap(), &tol()),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn stinespring_examples() {
        let d = stinespring(&dephasing(), &tol()).unwrap();
        assert_eq!(d.multiplicity, 2);
        assert!(d.norm_gap < 1e-12 && d.reconstruction_residual < 1e-12);
        let id = stinespring(&LinearMapDesc::identity(Subspace::full(3)), &tol()).unwrap();
        assert_eq!(id.multiplicity, 1);
        let mut rng = seeded_rng(64);
        let v = random_rect(&mut rng, 3, 3);
        let t = LinearMapDesc::from_kraus(Subspace::full(3), std::slice::from_ref(&v))
            .unwrap()
            .scaled(2.0);
        let s = stinespring(&t, &tol()).unwrap();
        let vvt = operator_norm(&v.matmul(&v.transpose()).to_square().unwrap());
        let vn = s.v.operator_norm();
        assert!((vn * vn - 2.0 * vvt).abs() < 1e-9 * (1.0 + vvt));
        assert!(stinespring(&LinearMapDesc::transpose(2), &tol()).is_err());
    }

    #[test]
    fn classification_examples() {
        let f = classify_map(&LinearMapDesc::transpose(2), &[2], 0, &tol()).unwrap();
        assert!(f.positive && f.selfadjoint && !f.levels[1].positive);
        assert!(f.levels[1].positive_exact && f.levels[1].positive_witness.is_some());
        assert_eq!(f.srp_equivalence, Some(true));

        let re = LinearMapDesc::from_fn(Subspace::full(2), 2, |x| x.sym_part()).unwrap();
        let f = classify_map(&re, &[1, 2], 0, &tol()).unwrap();
        assert!(f.positive && f.selfadjoint && f.srp);
        // half the identity plus half the transpose, so not 2-positive on M_2
        assert!(!f.rcp && !f.levels[1].positive);
        assert_eq!(f.cp, Some(false));
    }

    #[test]
    fn sa_extension_examples() {
        let d = Subspace::span(2, &[RealMatrix::unit(2, 0, 1), RealMatrix::identity(2)]).unwrap();
        let id = LinearMapDesc::identity(d.clone());
        let ext = canonical_sa_extension(&id, 0, &tol()).unwrap();
        assert_eq!(ext.map.domain.dim(), 3);
        let x = RealMatrix::from_rows(&[[1.0, 2.0], [3.0, 1.0]]);
        assert!(ext.map.apply(&x).unwrap().max_abs_diff(&x) < 1e-12);
        assert!(ext.selfadjoint && ext.positive == Some(true));

        let t = LinearMapDesc::from_fn(d, 2, |b| {
            RealMatrix::identity(2).scale(b.trace() / 2.0) + RealMatrix::unit(2, 1, 1).scale(5.0 * b[(0, 1)])
        })
        .unwrap();
        assert_eq!(canonical_sa_extension(&t, 0, &tol()).unwrap().map.domain.dim(), 3);

        let skew = LinearMapDesc::from_fn(Subspace::full(2), 2, |b| b.matmul(&RealMatrix::unit(2, 0, 1))).unwrap();
        assert!(matches!(
            canonical_sa_extension(&skew, 0, &tol()),
            Err(Error::DiagonalNotSelfadjoint { .. })
        ));
    }

    #[test]
    fn real_bounded_norm_examples() {
        let id = LinearMapDesc::identity(Subspace::full(2));
        assert!((real_bounded_norm(&id, 0).unwrap().value - 1.0).abs() < 1e-9);
        assert!((real_bounded_norm(&id.scaled(2.0), 0).unwrap().value - 2.0).abs() < 1e-9);
        let re = LinearMapDesc::from_fn(Subspace::full(2), 2, |x| x.sym_part()).unwrap();
        let r = real_bounded_norm(&re, 0).unwrap();
        assert!((r.value - r.at_identity.unwrap()).abs() < 1e-4);
        let twist = LinearMapDesc::from_fn(Subspace::full(2), 2, |x| {
            RealMatrix::identity(2).scale(x[(0, 1)] - x[(1, 0)])
        })
        .unwrap();
        let r = real_bounded_norm(&twist, 0).unwrap();
        assert!(!r.bounded && r.value > 100.0);
    }

    #[test]
    fn complexified_maps() {
        let id = complexify_map(&LinearMapDesc::identity(Subspace::full(2)));
        let mut rng = seeded_rng(65);
        let z = embed_parts(&random_matrix(&mut rng, 2), &random_matrix(&mut rng, 2));
        assert!(id.apply(&z).unwrap().max_abs_diff(&z) < 1e-12);
        let j = RealMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        let rot = LinearMapDesc::from_kraus(Subspace::full(2), &[RectMatrix::from_square(&j)]).unwrap();
        assert!(is_cp(&rot, &tol()).unwrap());
        let rc = complexify_map(&rot);
        let x = random_matrix(&mut rng, 2);
        let y = random_matrix(&mut rng, 2);
        let want = embed_parts(
            &j.matmul(&x).matmul(&j.transpose()),
            &j.matmul(&y).matmul(&j.transpose()),
        );
        assert!(rc.apply(&embed_parts(&x, &y)).unwrap().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn unitization_extension_examples() {
        let d = Subspace::span(2, &[RealMatrix::unit(2, 0, 1)]).unwrap();
        let zero = LinearMapDesc::from_fn(d.clone(), 2, |_| RealMatrix::zeros(2)).unwrap();
        let e = extend_to_unitization(&zero, 0, &tol()).unwrap();
        assert!(e.real_positive);
        let x = RealMatrix::identity(2).scale(3.0) + RealMatrix::unit(2, 0, 1);
        assert!(
            e.map
                .apply(&x)
                .unwrap()
                .max_abs_diff(&RealMatrix::identity(2).scale(3.0))
                < 1e-12
        );
        let incl = extend_to_unitization(&LinearMapDesc::identity(d.clone()), 0, &tol()).unwrap();
        assert!(incl.real_positive && incl.map.apply(&x).unwrap().max_abs_diff(&x) < 1e-12);
        let half = LinearMapDesc::identity(d).scaled(0.5);
        let h = extend_to_unitization(&half, 0, &tol()).unwrap();
        assert!(h.real_positive && h.samples == 500);
        let full = LinearMapDesc::identity(Subspace::full(2));
        assert!(matches!(
            extend_to_unitization(&full, 0, &tol()),
            Err(Error::AlreadyUnital)
        ));
    }

    #[test]
    fn cp_extension_examples() {
        let sx = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let s = Subspace::span(2, &[RealMatrix::identity(2), sx.clone()]).unwrap();
        let t = LinearMapDesc::from_fn(s.clone(), 2, |b| {
            let a = b.trace() / 2.0;
            let c = b.inner(&sx) / 2.0;
            RealMatrix::identity(2).scale(a) + sx.scale(c / 2.0)
        })
        .unwrap();
        let e = extend_cp(&t, &tol()).unwrap();
        assert!(e.residual <= 1e-6 && e.min_eig >= -1e-7);
        assert!(is_cp(&e.map, &tol()).unwrap() || e.min_eig >= -1e-7);
        // independent candidate: x ↦ ½x + ¼tr(x)·I
        let cand = LinearMapDesc::from_fn(Subspace::full(2), 2, |x| {
            x.scale(0.5) + RealMatrix::identity(2).scale(x.trace() / 4.0)
        })
        .unwrap();
        for b in s.basis() {
            assert!(cand.apply(b).unwrap().max_abs_diff(&t.apply(b).unwrap()) < 1e-12);
        }
        assert!(is_cp(&cand, &tol()).unwrap());

        let zero = LinearMapDesc::from_fn(s, 2, |_| RealMatrix::zeros(2)).unwrap();
        let z = extend_cp(&zero, &tol()).unwrap();
        assert!(z.choi.matrix.max_abs() < 1e-9);
    }

    #[test]
    fn cp_extension_of_rank_one_map() {
        // x ↦ VxVᵀ on a generic operator system has a unique extension, a
        // boundary point where Dykstra alone stalls
        let mut rng = seeded_rng(7);
        let s = Subspace::span(
            3,
            &[
                RealMatrix::identity(3),
                crate::sampling::random_symmetric(&mut rng, 3),
                crate::sampling::random_symmetric(&mut rng, 3),
            ],
        )
        .unwrap();
        let v = random_rect(&mut rng, 3, 3);
        let t = LinearMapDesc::from_kraus(s.clone(), &[v]).unwrap();
        let e = extend_cp_with(&t, &tol(), 200).unwrap();
        assert!(e.newton_steps > 0);
        assert!(e.residual <= 1e-6 && e.min_eig >= -1e-7);
        for b in s.basis() {
            assert!(e.map.apply(b).unwrap().max_abs_diff(&t.apply(b).unwrap()) < 1e-6);
        }
    }

    #[test]
    fn jordan_hom_examples() {
        let mut rng = seeded_rng(66);
        let q = crate::sampling::random_orthogonal(&mut rng, 2);
        let conj = LinearMapDesc::from_kraus(Subspace::full(2), &[RectMatrix::from_square(&q)]).unwrap();
        let r = jordan_hom_check(&conj, 0, &tol()).unwrap();
        assert!(r.jordan_hom && r.contractive && r.selfadjoint);
        assert_eq!(r.selfadjoint_if_contractive, Some(true));
        let r = jordan_hom_check(&LinearMapDesc::transpose(2), 0, &tol()).unwrap();
        assert!(r.jordan_hom && r.contractive && r.selfadjoint && r.srp == Some(true));
        let r = jordan_hom_check(&LinearMapDesc::identity(Subspace::full(2)).scaled(2.0), 0, &tol()).unwrap();
        assert!(!r.jordan_hom);
    }

    #[test]
    fn schwarz_examples() {
        let r = schwarz_check(&LinearMapDesc::identity(Subspace::full(2)), 50, 0, &tol()).unwrap();
        assert!(r.checked && r.min_margin.abs() < 1e-12);
        let mut rng = seeded_rng(67);
        let q = crate::sampling::random_orthogonal(&mut rng, 3);
        let mut v = RectMatrix::zeros(2, 3);
        for i in 0..2 {
            for j in 0..3 {
                v[(i, j)] = q[(j, i)];
            }
        }
        // x ↦ Vᵀ-compression onto two orthonormal columns
        let t = LinearMapDesc::from_kraus(Subspace::full(3), &[v]).unwrap();
        let r = schwarz_check(&t, 200, 0, &tol()).unwrap();
        assert!(r.checked && r.min_margin >= -1e-10);
        let r = schwarz_check(&LinearMapDesc::transpose(2), 50, 0, &tol()).unwrap();
        assert!(!r.checked && r.reason.is_some());
    }
}
