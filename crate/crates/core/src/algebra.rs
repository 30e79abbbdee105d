//! Finite-dimensional real operator spaces, operator systems and (Jordan)
//! operator algebras, represented as subspaces of `M_n` with a basis that is
//! orthonormal for the trace pairing `⟨a, b⟩ = tr(aᵀb)`.

use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{flatten, lstsq, null_space, orthonormalize, unflatten};
use crate::error::{Error, Result};
use crate::matcore::{jordan_unchecked, operator_norm, RealMatrix, ToleranceConfig};
use crate::sampling::{gaussian, seeded_rng};

/// Relative threshold under which a Gram-Schmidt residual counts as dependent.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceFlags {
    pub is_selfadjoint_space: bool,
    pub is_jordan_closed: bool,
    pub is_assoc_closed: bool,
    pub is_unital: bool,
}

#[derive(Debug, Clone)]
struct Structure {
    flags: SubspaceFlags,
    identity: Option<RealMatrix>,
}

/// A subspace of `M_n` with a trace-orthonormal basis.
///
/// Structural flags and the identity element are computed on first use and
/// cached.
#[derive(Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<RealMatrix>,
    structure: OnceLock<Structure>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subspace")
            .field("ambient_dim", &self.ambient_dim)
            .field("dim", &self.basis.len())
            .finish()
    }
}

impl Subspace {
    /// Span of `generators`; the zero subspace is allowed.
    pub fn span(ambient_dim: usize, generators: &[RealMatrix]) -> Result<Self> {
        for g in generators {
            if g.dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: g.dim(),
                });
            }
        }
        let vectors: Vec<Vec<f64>> = generators.iter().map(flatten).collect();
        let (basis, _) = orthonormalize(&vectors, RANK_TOL);
        Ok(Self::from_orthonormal(
            ambient_dim,
            basis.into_iter().map(|v| unflatten(ambient_dim, v)).collect(),
        ))
    }

    pub(crate) fn from_orthonormal(ambient_dim: usize, basis: Vec<RealMatrix>) -> Self {
        Self {
            ambient_dim,
            basis,
            structure: OnceLock::new(),
        }
    }

    /// Orthonormal basis with structure already known to the caller.
    pub(crate) fn with_structure(
        ambient_dim: usize,
        basis: Vec<RealMatrix>,
        flags: SubspaceFlags,
        identity: Option<RealMatrix>,
    ) -> Self {
        let structure = OnceLock::new();
        let _ = structure.set(Structure { flags, identity });
        Self {
            ambient_dim,
            basis,
            structure,
        }
    }

    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .flat_map(|i| (0..n).map(move |j| RealMatrix::unit(n, i, j)))
            .collect();
        Self::from_orthonormal(n, basis)
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self::from_orthonormal(ambient_dim, Vec::new())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[RealMatrix] {
        &self.basis
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient_dim * self.ambient_dim
    }

    pub fn flags(&self) -> SubspaceFlags {
        self.structure().flags
    }

    pub fn identity(&self) -> Option<&RealMatrix> {
        self.structure().identity.as_ref()
    }

    fn structure(&self) -> &Structure {
        self.structure.get_or_init(|| self.analyze())
    }

    fn analyze(&self) -> Structure {
        if self.is_full() {
            return Structure {
                flags: SubspaceFlags {
                    is_selfadjoint_space: true,
                    is_jordan_closed: true,
                    is_assoc_closed: true,
                    is_unital: true,
                },
                identity: Some(RealMatrix::identity(self.ambient_dim)),
            };
        }
        let is_selfadjoint_space = self.basis.iter().all(|b| self.contains(&b.transpose()));
        let mut is_jordan_closed = true;
        let mut is_assoc_closed = true;
        'outer: for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                if is_assoc_closed && !self.contains(&a.matmul(b)) {
                    is_assoc_closed = false;
                }
                if j >= i && is_jordan_closed && !self.contains(&jordan_unchecked(a, b)) {
                    is_jordan_closed = false;
                }
                if !is_assoc_closed && !is_jordan_closed {
                    break 'outer;
                }
            }
        }
        let identity = if is_jordan_closed {
            find_identity_raw(self, &ToleranceConfig::default())
        } else {
            let id = RealMatrix::identity(self.ambient_dim);
            self.contains(&id).then_some(id)
        };
        Structure {
            flags: SubspaceFlags {
                is_selfadjoint_space,
                is_jordan_closed,
                is_assoc_closed,
                is_unital: identity.is_some(),
            },
            identity,
        }
    }

    /// Trace-pairing coordinates of the orthogonal projection of `m`.
    pub fn coords(&self, m: &RealMatrix) -> Vec<f64> {
        self.basis.iter().map(|b| b.inner(m)).collect()
    }

    pub fn element(&self, coords: &[f64]) -> RealMatrix {
        assert_eq!(coords.len(), self.basis.len(), "coordinate count");
        let mut out = RealMatrix::zeros(self.ambient_dim);
        for (c, b) in coords.iter().zip(&self.basis) {
            if *c != 0.0 {
                out += &b.scale(*c);
            }
        }
        out
    }

    pub fn project(&self, m: &RealMatrix) -> RealMatrix {
        if self.is_full() {
            return m.clone();
        }
        self.element(&self.coords(m))
    }

    /// Frobenius distance from `m` to the subspace.
    pub fn residual(&self, m: &RealMatrix) -> f64 {
        (m - &self.project(m)).frobenius_norm()
    }

    fn contains(&self, m: &RealMatrix) -> bool {
        self.residual(m) <= 1e-9 * (1.0 + m.frobenius_norm())
    }

    /// Gaussian coordinates in the orthonormal basis.
    pub fn random_element(&self, rng: &mut impl Rng) -> RealMatrix {
        let coords: Vec<f64> = (0..self.dim()).map(|_| gaussian(rng)).collect();
        self.element(&coords)
    }

    /// Adjoints of the basis, spanning `A*`.
    pub fn adjoint_space(&self) -> Subspace {
        Subspace::from_orthonormal(self.ambient_dim, self.basis.iter().map(|b| b.transpose()).collect())
    }
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            ambient_dim: usize,
            dim: usize,
            basis: &'a [RealMatrix],
            flags: SubspaceFlags,
            identity: Option<&'a RealMatrix>,
        }
        View {
            ambient_dim: self.ambient_dim,
            dim: self.dim(),
            basis: &self.basis,
            flags: self.flags(),
            identity: self.identity(),
        }
        .serialize(serializer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraKind {
    OperatorSpace,
    OperatorSystem,
    JordanAlgebra,
    AssocAlgebra,
    JcStar,
}

impl AlgebraKind {
    fn holds_for(self, s: &Subspace) -> bool {
        let f = s.flags();
        match self {
            AlgebraKind::OperatorSpace => true,
            AlgebraKind::OperatorSystem => f.is_selfadjoint_space && s.contains(&RealMatrix::identity(s.ambient_dim())),
            AlgebraKind::JordanAlgebra => f.is_jordan_closed,
            AlgebraKind::AssocAlgebra => f.is_assoc_closed,
            AlgebraKind::JcStar => f.is_jordan_closed && f.is_selfadjoint_space,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraDescriptor {
    pub name: String,
    pub subspace: Subspace,
    pub kind: AlgebraKind,
}

impl AlgebraDescriptor {
    pub fn new(name: impl Into<String>, subspace: Subspace, kind: AlgebraKind) -> Result<Self> {
        if !kind.holds_for(&subspace) {
            return Err(Error::InvalidInput(format!(
                "subspace does not satisfy the closure conditions of {kind:?}"
            )));
        }
        Ok(Self {
            name: name.into(),
            subspace,
            kind,
        })
    }
}

/// Orthonormal basis (under the trace pairing) of the span of `generators`.
pub fn orthonormal_basis(generators: &[RealMatrix]) -> Result<Subspace> {
    let first = generators.first().ok_or(Error::ZeroGenerators)?;
    let s = Subspace::span(first.dim(), generators)?;
    if s.dim() == 0 {
        return Err(Error::ZeroGenerators);
    }
    Ok(s)
}

fn close_under(
    generators: &[RealMatrix],
    max_dim: usize,
    product: impl Fn(&RealMatrix, &RealMatrix) -> RealMatrix,
    symmetric: bool,
) -> Result<Subspace> {
    let start = orthonormal_basis(generators)?;
    let n = start.ambient_dim();
    let mut vectors: Vec<Vec<f64>> = start.basis().iter().map(flatten).collect();
    if vectors.len() > max_dim {
        return Err(Error::ClosureBlowup {
            dim: vectors.len(),
            max_dim,
        });
    }
    // products (i, j) with both indices below `done` are already inside the span
    let mut done = 0;
    while done < vectors.len() {
        let current = vectors.len();
        for i in 0..current {
            for j in 0..current {
                if i < done && j < done {
                    continue;
                }
                if symmetric && j < i {
                    continue;
                }
                let a = unflatten(n, vectors[i].clone());
                let b = unflatten(n, vectors[j].clone());
                let p = flatten(&product(&a, &b));
                let mut candidate = vectors.clone();
                candidate.push(p);
                let (basis, kept) = orthonormalize(&candidate, RANK_TOL);
                if kept.len() > vectors.len() {
                    vectors = basis;
                    if vectors.len() > max_dim {
                        return Err(Error::ClosureBlowup {
                            dim: vectors.len(),
                            max_dim,
                        });
                    }
                }
            }
        }
        done = current;
    }
    Ok(Subspace::from_orthonormal(
        n,
        vectors.into_iter().map(|v| unflatten(n, v)).collect(),
    ))
}

/// Smallest subspace containing `generators` and closed under `a ∘ b`.
pub fn close_jordan(generators: &[RealMatrix], max_dim: usize) -> Result<Subspace> {
    close_under(generators, max_dim, jordan_unchecked, true)
}

/// Smallest subspace containing `generators` and closed under `ab`.
pub fn close_assoc(generators: &[RealMatrix], max_dim: usize) -> Result<Subspace> {
    close_under(generators, max_dim, |a, b| a.matmul(b), false)
}

/// `Δ(A) = A ∩ A*`.
pub fn diagonal(a: &Subspace) -> Subspace {
    let n = a.ambient_dim();
    if a.is_full() {
        return a.clone();
    }
    // c ↦ (I - P_A)(Σ c_k b_kᵀ) vanishes exactly on coordinates of Δ(A)
    let columns: Vec<Vec<f64>> = a
        .basis()
        .iter()
        .map(|b| {
            let t = b.transpose();
            flatten(&(&t - &a.project(&t)))
        })
        .collect();
    let kernel = null_space(&columns, 1e-7);
    let elements: Vec<RealMatrix> = kernel.iter().map(|c| a.element(c)).collect();
    Subspace::span(n, &elements).expect("dimensions agree")
}

fn find_identity_raw(a: &Subspace, tol: &ToleranceConfig) -> Option<RealMatrix> {
    if a.dim() == 0 {
        return None;
    }
    let columns: Vec<Vec<f64>> = a
        .basis()
        .iter()
        .map(|bk| {
            a.basis()
                .iter()
                .flat_map(|bi| flatten(&jordan_unchecked(bk, bi)))
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = a.basis().iter().flat_map(flatten).collect();
    let (coeffs, residual) = lstsq(&columns, &rhs);
    if residual > 1e-9 {
        return None;
    }
    let e = a.element(&coeffs);
    if operator_norm(&e) > 1.0 + tol.norm_rel_tol {
        return None;
    }
    Some(e)
}

/// Jordan identity of `a`, if one exists with norm at most one.
pub fn find_identity(a: &Subspace, tol: &ToleranceConfig) -> Option<RealMatrix> {
    find_identity_raw(a, tol)
}

/// Result of adjoining an identity.
#[derive(Debug, Clone, Serialize)]
pub struct Unitization {
    /// `A + ℝ I` inside the ambient algebra.
    pub descriptor: AlgebraDescriptor,
    /// Internal identity `e ≠ I` of `A`, when there is one.
    pub internal_unit: Option<RealMatrix>,
}

impl Unitization {
    /// Norm of `a + λ1` in the unitization.
    ///
    /// Without an internal identity this is the ambient norm of `a + λI`. With
    /// an internal identity `e` it is `max{‖a + λe‖, |λ|}`.
    pub fn norm(&self, a: &RealMatrix, lambda: f64) -> f64 {
        match &self.internal_unit {
            None => self.ambient_norm(a, lambda),
            Some(e) => operator_norm(&(a + &e.scale(lambda))).max(lambda.abs()),
        }
    }

    pub fn ambient_norm(&self, a: &RealMatrix, lambda: f64) -> f64 {
        let n = a.dim();
        operator_norm(&(a + &RealMatrix::identity(n).scale(lambda)))
    }
}

/// Adjoins the ambient identity to a Jordan-closed `a`.
pub fn unitize(a: &Subspace, ambient_identity: &RealMatrix, tol: &ToleranceConfig) -> Result<Unitization> {
    if ambient_identity.dim() != a.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.ambient_dim(),
            found: ambient_identity.dim(),
        });
    }
    if !a.flags().is_jordan_closed {
        return Err(Error::Precondition(
            "unitization requires a Jordan-closed subspace".into(),
        ));
    }
    if a.contains(ambient_identity) {
        return Err(Error::AlreadyUnital);
    }
    let internal_unit = find_identity(a, tol);
    let mut gens = a.basis().to_vec();
    gens.push(ambient_identity.clone());
    let span = Subspace::span(a.ambient_dim(), &gens)?;
    let descriptor = AlgebraDescriptor::new("unitization", span, AlgebraKind::JordanAlgebra)?;
    Ok(Unitization {
        descriptor,
        internal_unit,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitizationNormReport {
    pub seed: u64,
    pub elements: usize,
    pub contraction_samples: usize,
    /// Largest `sup_c ‖a∘c + λc‖ - ‖a + λ1‖` seen; must not exceed the tolerance.
    pub worst_excess: f64,
    /// Largest `|value at c = 1 - ‖a + λ1‖|`.
    pub worst_identity_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares `‖a + λ1‖` with `sup{‖a∘c + λc‖ : c ∈ Ball(A)}` on a sample of
/// elements and contractions.
pub fn unitization_norm_check(
    algebra: &AlgebraDescriptor,
    sample_count: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<UnitizationNormReport> {
    let a = &algebra.subspace;
    let one = a.identity().cloned().ok_or(Error::NotUnital)?;
    let mut rng = seeded_rng(seed);
    let mut elements = vec![(RealMatrix::zeros(a.ambient_dim()), 1.0), (one.scale(-1.0), 1.0)];
    for _ in 0..8 {
        elements.push((a.random_element(&mut rng), gaussian(&mut rng)));
    }
    let contractions = sample_contractions(a, &one, sample_count, &mut rng);
    let mut report = UnitizationNormReport {
        seed,
        elements: elements.len(),
        contraction_samples: contractions.len(),
        worst_excess: f64::NEG_INFINITY,
        worst_identity_gap: 0.0,
        tolerance: 0.0,
        pass: true,
    };
    for (x, lambda) in &elements {
        let r = check_unitization_element(x, *lambda, &one, &contractions, tol);
        report.worst_excess = report.worst_excess.max(r.0);
        report.worst_identity_gap = report.worst_identity_gap.max(r.1);
        report.tolerance = report.tolerance.max(r.2);
        report.pass &= r.0 <= r.2 && r.1 <= r.2;
    }
    Ok(report)
}

/// Same check for one prescribed element `x + λ1`.
pub fn unitization_norm_check_element(
    algebra: &AlgebraDescriptor,
    x: &RealMatrix,
    lambda: f64,
    sample_count: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<UnitizationNormReport> {
    let a = &algebra.subspace;
    let one = a.identity().cloned().ok_or(Error::NotUnital)?;
    let mut rng = seeded_rng(seed);
    let contractions = sample_contractions(a, &one, sample_count, &mut rng);
    let (excess, gap, t) = check_unitization_element(x, lambda, &one, &contractions, tol);
    Ok(UnitizationNormReport {
        seed,
        elements: 1,
        contraction_samples: contractions.len(),
        worst_excess: excess,
        worst_identity_gap: gap,
        tolerance: t,
        pass: excess <= t && gap <= t,
    })
}

fn sample_contractions(a: &Subspace, one: &RealMatrix, count: usize, rng: &mut impl Rng) -> Vec<RealMatrix> {
    let mut out = vec![one.clone(), one.scale(-1.0)];
    while out.len() < count.max(2) {
        let c = a.random_element(rng);
        let norm = operator_norm(&c);
        if norm > 1e-12 {
            let radius: f64 = rng.random_range(0.0..=1.0_f64).sqrt();
            out.push(c.scale(radius / norm));
        }
    }
    out
}

fn check_unitization_element(
    x: &RealMatrix,
    lambda: f64,
    one: &RealMatrix,
    contractions: &[RealMatrix],
    tol: &ToleranceConfig,
) -> (f64, f64, f64) {
    let target = operator_norm(&(x + &one.scale(lambda)));
    let t = tol.norm_rel_tol * (1.0 + target);
    let mut best = f64::NEG_INFINITY;
    for c in contractions {
        let v = operator_norm(&(jordan_unchecked(x, c) + c.scale(lambda)));
        best = best.max(v);
    }
    let at_one = operator_norm(&(jordan_unchecked(x, one) + one.scale(lambda)));
    (best - target, (at_one - target).abs(), t)
}

/// The triangle algebra `U(X)` of matrices `[[αI, x], [0, βI]]`.
#[derive(Debug, Clone, Serialize)]
pub struct TriangleAlgebra {
    pub descriptor: AlgebraDescriptor,
    pub block_dim: usize,
}

impl TriangleAlgebra {
    pub fn element(&self, alpha: f64, x: &RealMatrix, beta: f64) -> RealMatrix {
        let n = self.block_dim;
        RealMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, true) if i == j => alpha,
            (true, false) => x[(i, j - n)],
            (false, false) if i == j => beta,
            _ => 0.0,
        })
    }

    pub fn direct_norm(&self, alpha: f64, x: &RealMatrix, beta: f64) -> f64 {
        operator_norm(&self.element(alpha, x, beta))
    }

    /// `sup_t sqrt((|α|√(1-t²) + ‖x‖t)² + (βt)²)` over `t ∈ [0, 1]`.
    pub fn formula_norm(alpha: f64, x_norm: f64, beta: f64) -> f64 {
        let f = |t: f64| {
            let a = alpha.abs() * (1.0 - t * t).max(0.0).sqrt() + x_norm * t;
            a * a + (beta * t) * (beta * t)
        };
        let t_star = golden_section_max(f, 0.0, 1.0, 1e-9);
        f(t_star).max(f(0.0)).max(f(1.0)).sqrt()
    }

    /// Norm of the scalar matrix `[[|α|, ‖x‖], [0, |β|]]`.
    pub fn scalar_model_norm(alpha: f64, x_norm: f64, beta: f64) -> f64 {
        operator_norm(&RealMatrix::from_rows(&[[alpha.abs(), x_norm], [0.0, beta.abs()]]))
    }
}

pub(crate) fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Builds `U(X) ⊂ M_{2n}` for an operator space `X ⊂ M_n`.
pub fn build_triangle(x: &Subspace) -> Result<TriangleAlgebra> {
    let n = x.ambient_dim();
    let zero = RealMatrix::zeros(n);
    let id = RealMatrix::identity(n);
    let mut gens = vec![
        RealMatrix::from_blocks(&[vec![id.clone(), zero.clone()], vec![zero.clone(), zero.clone()]])?,
        RealMatrix::from_blocks(&[vec![zero.clone(), zero.clone()], vec![zero.clone(), id.clone()]])?,
    ];
    for b in x.basis() {
        gens.push(RealMatrix::from_blocks(&[
            vec![zero.clone(), b.clone()],
            vec![zero.clone(), zero.clone()],
        ])?);
    }
    let span = Subspace::span(2 * n, &gens)?;
    let descriptor = AlgebraDescriptor::new("triangle", span, AlgebraKind::AssocAlgebra)?;
    Ok(TriangleAlgebra {
        descriptor,
        block_dim: n,
    })
}

/// Ambient dimension used by [`spin_system`] for `k` elements: the size of an
/// irreducible real representation of the Clifford algebra with `k`
/// generators squaring to `+1`.
pub fn spin_ambient_dim(k: usize) -> Option<usize> {
    const DIMS: [usize; 10] = [2, 2, 4, 8, 8, 16, 16, 16, 16, 32];
    (1..=10).contains(&k).then(|| DIMS[k - 1])
}

/// Tensor letters: identity, σx, σz and the rotation J = [[0, 1], [-1, 0]].
#[derive(Clone, Copy, PartialEq, Eq)]
enum Letter {
    I,
    X,
    Z,
    J,
}

impl Letter {
    fn matrix(self) -> RealMatrix {
        match self {
            Letter::I => RealMatrix::identity(2),
            Letter::X => RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]),
            Letter::Z => RealMatrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]]),
            Letter::J => RealMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]),
        }
    }
}

fn anticommute(a: &[Letter], b: &[Letter]) -> bool {
    let clashes = a
        .iter()
        .zip(b)
        .filter(|(x, y)| **x != Letter::I && **y != Letter::I && x != y)
        .count();
    clashes % 2 == 1
}

fn extend_clique(chosen: &mut Vec<Vec<Letter>>, candidates: &[Vec<Letter>], k: usize) -> bool {
    if chosen.len() == k {
        return true;
    }
    for (idx, c) in candidates.iter().enumerate() {
        let rest: Vec<Vec<Letter>> = candidates[idx + 1..]
            .iter()
            .filter(|d| anticommute(c, d))
            .cloned()
            .collect();
        if rest.len() + chosen.len() + 1 < k {
            continue;
        }
        chosen.push(c.clone());
        if extend_clique(chosen, &rest, k) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// `k` real symmetric matrices with `u_i² = I` and `u_i ∘ u_j = 0` for `i ≠ j`.
///
/// Elements are tensor products of `I, σx, σz, J` with an even number of `J`
/// factors. The first two are `σx ⊗ I ⊗ …` and `σz ⊗ I ⊗ …`; the rest are found
/// by a deterministic depth-first search, so the output is reproducible.
pub fn spin_system(k: usize) -> Result<Vec<RealMatrix>> {
    let dim = spin_ambient_dim(k)
        .ok_or_else(|| Error::InvalidInput(format!("spin system size must lie in 1..=10, got {k}")))?;
    let factors = dim.trailing_zeros() as usize;
    let letters = [Letter::I, Letter::X, Letter::Z, Letter::J];
    let mut words: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..factors {
        words = words
            .into_iter()
            .flat_map(|w| {
                letters.iter().map(move |&l| {
                    let mut w = w.clone();
                    w.push(l);
                    w
                })
            })
            .collect();
    }
    // symmetric involutions: even number of J factors, not the identity word
    words.retain(|w| w.iter().filter(|&&l| l == Letter::J).count() % 2 == 0 && w.iter().any(|&l| l != Letter::I));

    let mut seed_x = vec![Letter::I; factors];
    seed_x[0] = Letter::X;
    let mut seed_z = vec![Letter::I; factors];
    seed_z[0] = Letter::Z;
    let mut chosen = vec![seed_x];
    if k >= 2 {
        chosen.push(seed_z);
    }
    let candidates: Vec<Vec<Letter>> = words
        .into_iter()
        .filter(|w| chosen.iter().all(|c| anticommute(c, w)))
        .collect();
    if !extend_clique(&mut chosen, &candidates, k) {
        return Err(Error::Inconsistent(format!(
            "no spin system of size {k} in dimension {dim}"
        )));
    }
    Ok(chosen
        .iter()
        .map(|w| w.iter().skip(1).fold(w[0].matrix(), |acc, l| acc.kron(&l.matrix())))
        .collect())
}

/// Membership test with Frobenius residual; accepts within `1e-9 (1 + ‖m‖_F)`.
pub fn member(a: &Subspace, m: &RealMatrix) -> Result<(bool, f64)> {
    if m.dim() != a.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.ambient_dim(),
            found: m.dim(),
        });
    }
    let residual = a.residual(m);
    Ok((residual <= 1e-9 * (1.0 + m.frobenius_norm()), residual))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloseUnder {
    Jordan,
    Assoc,
    None,
}

/// On-disk algebra description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub name: String,
    pub ambient_dim: usize,
    pub kind: AlgebraKind,
    pub generators: Vec<RealMatrix>,
    pub close_under: CloseUnder,
}

impl AlgebraFile {
    /// Builds the subspace, applying the requested closure. The closure cap is
    /// the ambient dimension squared.
    pub fn materialize(&self) -> Result<AlgebraDescriptor> {
        if self.ambient_dim == 0 {
            return Err(Error::InvalidInput("ambient_dim must be positive".into()));
        }
        for g in &self.generators {
            if g.dim() != self.ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.ambient_dim,
                    found: g.dim(),
                });
            }
        }
        let cap = self.ambient_dim * self.ambient_dim;
        let subspace = match self.close_under {
            CloseUnder::Jordan => close_jordan(&self.generators, cap)?,
            CloseUnder::Assoc => close_assoc(&self.generators, cap)?,
            CloseUnder::None => orthonormal_basis(&self.generators)?,
        };
        AlgebraDescriptor::new(self.name.clone(), subspace, self.kind)
    }
}

/// An algebra given either by the path of its JSON file or inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraRef {
    Path(String),
    Inline(AlgebraFile),
}

impl AlgebraRef {
    /// Resolves relative paths against `base_dir`.
    pub fn load(&self, base_dir: &std::path::Path) -> Result<AlgebraFile> {
        match self {
            AlgebraRef::Inline(file) => Ok(file.clone()),
            AlgebraRef::Path(path) => {
                let text = std::fs::read_to_string(base_dir.join(path))?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{is_psd, min_eig_sym};
    use crate::sampling::{random_matrix, seeded_rng};

    fn e(i: usize, j: usize) -> RealMatrix {
        RealMatrix::unit(2, i, j)
    }

    fn sx() -> RealMatrix {
        RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])
    }

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn orthonormal_basis_examples() {
        let id = RealMatrix::identity(2);
        assert_eq!(orthonormal_basis(&[id.clone(), id.scale(2.0)]).unwrap().dim(), 1);
        let s = orthonormal_basis(&[e(0, 0), e(0, 1)]).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.basis()[0].inner(&s.basis()[1]).abs() < 1e-15);
        assert!(matches!(
            orthonormal_basis(&[RealMatrix::zeros(2)]),
            Err(Error::ZeroGenerators)
        ));
        assert!(matches!(orthonormal_basis(&[]), Err(Error::ZeroGenerators)));

        let mut rng = seeded_rng(11);
        let gens: Vec<RealMatrix> = (0..5).map(|_| random_matrix(&mut rng, 3)).collect();
        let s = orthonormal_basis(&gens).unwrap();
        assert_eq!(s.dim(), 5);
        for g in &gens {
            assert!(s.residual(g) <= 1e-10);
        }
        let gram = crate::dense::gram_matrix(&s.basis().iter().map(flatten).collect::<Vec<_>>());
        assert!(gram.max_abs_diff(&RealMatrix::identity(5)) <= 1e-10);
    }

    #[test]
    fn jordan_closure_examples() {
        let s = close_jordan(&[sx()], 4).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(member(&s, &RealMatrix::identity(2)).unwrap().0);
        assert_eq!(close_jordan(&[e(0, 1)], 4).unwrap().dim(), 1);
        let s = close_jordan(&[e(0, 0), e(0, 1)], 4).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.flags().is_jordan_closed);
    }

    #[test]
    fn assoc_closure_examples() {
        assert_eq!(close_assoc(&[e(0, 1)], 4).unwrap().dim(), 1);
        let s = close_assoc(&[e(0, 1), e(1, 0)], 4).unwrap();
        assert_eq!(s.dim(), 4);
        assert!(member(&s, &e(0, 0)).unwrap().0 && member(&s, &e(1, 1)).unwrap().0);
        let s = close_assoc(&[sx()], 4).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.flags().is_assoc_closed);
    }

    #[test]
    fn closure_respects_cap() {
        let mut rng = seeded_rng(12);
        let g = random_matrix(&mut rng, 3);
        assert!(matches!(close_assoc(&[g], 2), Err(Error::ClosureBlowup { .. })));
    }

    #[test]
    fn closure_is_idempotent() {
        let mut rng = seeded_rng(13);
        for _ in 0..5 {
            let gens = vec![random_matrix(&mut rng, 3).sym_part(), RealMatrix::unit(3, 0, 1)];
            let once = close_jordan(&gens, 9).unwrap();
            let twice = close_jordan(once.basis(), 9).unwrap();
            assert_eq!(once.dim(), twice.dim());
        }
    }

    #[test]
    fn diagonal_examples() {
        let a = Subspace::span(2, &[e(0, 1)]).unwrap();
        assert_eq!(diagonal(&a).dim(), 0);
        let a = Subspace::span(2, &[RealMatrix::identity(2), e(0, 1)]).unwrap();
        let d = diagonal(&a);
        assert_eq!(d.dim(), 1);
        assert!(member(&d, &RealMatrix::identity(2)).unwrap().0);
        assert_eq!(diagonal(&Subspace::full(2)).dim(), 4);
    }

    #[test]
    fn diagonal_of_jordan_algebra_is_jc_star() {
        // upper triangular 3x3 matrices plus a symmetric generator
        let gens = vec![
            RealMatrix::unit(3, 0, 1),
            RealMatrix::unit(3, 1, 2),
            RealMatrix::diag(&[1.0, 2.0, 3.0]),
        ];
        let a = close_jordan(&gens, 9).unwrap();
        let d = diagonal(&a);
        assert!(d.dim() > 0);
        let f = d.flags();
        assert!(f.is_jordan_closed && f.is_selfadjoint_space);
    }

    #[test]
    fn identity_examples() {
        let t = tol();
        assert_eq!(find_identity(&Subspace::full(2), &t).unwrap(), RealMatrix::identity(2));
        assert!(find_identity(&Subspace::span(2, &[e(0, 1)]).unwrap(), &t).is_none());
        let id = find_identity(&Subspace::span(2, &[e(0, 0)]).unwrap(), &t).unwrap();
        assert!(id.max_abs_diff(&e(0, 0)) < 1e-12);
        assert!((operator_norm(&id) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitize_nilpotent() {
        let a = Subspace::span(2, &[e(0, 1)]).unwrap();
        let u = unitize(&a, &RealMatrix::identity(2), &tol()).unwrap();
        assert!(u.internal_unit.is_none());
        assert_eq!(u.descriptor.subspace.dim(), 2);
        // larger singular value of [[1,1],[0,1]] is the golden ratio
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        assert!((u.norm(&e(0, 1), 1.0) - phi).abs() < 1e-12);
        assert!((u.norm(&e(0, 1).scale(3.0), 0.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unitize_internal_unit() {
        let a = Subspace::span(2, &[e(0, 0)]).unwrap();
        let u = unitize(&a, &RealMatrix::identity(2), &tol()).unwrap();
        assert!(u.internal_unit.is_some());
        let x = e(0, 0).scale(2.0);
        assert!((u.norm(&x, -1.0) - 1.0).abs() < 1e-12);
        assert!((u.ambient_norm(&x, -1.0) - 1.0).abs() < 1e-12);
        assert!(matches!(
            unitize(&Subspace::full(2), &RealMatrix::identity(2), &tol()),
            Err(Error::AlreadyUnital)
        ));
    }

    #[test]
    fn unitization_norm_check_examples() {
        let full = AlgebraDescriptor::new("m2", Subspace::full(2), AlgebraKind::AssocAlgebra).unwrap();
        let r = unitization_norm_check_element(&full, &RealMatrix::zeros(2), 1.0, 500, 1, &tol()).unwrap();
        assert!(r.pass && r.worst_excess.abs() < 1e-12);
        let r = unitization_norm_check_element(&full, &e(0, 1), 1.0, 10_000, 2, &tol()).unwrap();
        assert!(r.pass);
        assert!(r.worst_identity_gap < 1e-12);
        let r =
            unitization_norm_check_element(&full, &RealMatrix::identity(2).scale(-1.0), 1.0, 500, 3, &tol()).unwrap();
        assert!(r.pass);
        let r = unitization_norm_check(&full, 300, 4, &tol()).unwrap();
        assert!(r.pass);
        let nil = AlgebraDescriptor::new(
            "nil",
            Subspace::span(2, &[e(0, 1)]).unwrap(),
            AlgebraKind::JordanAlgebra,
        )
        .unwrap();
        assert!(matches!(
            unitization_norm_check(&nil, 10, 0, &tol()),
            Err(Error::NotUnital)
        ));
    }

    #[test]
    fn triangle_examples() {
        let x = Subspace::full(2);
        let tri = build_triangle(&x).unwrap();
        assert_eq!(tri.descriptor.subspace.dim(), 6);
        assert!((TriangleAlgebra::formula_norm(0.0, 1.0, 0.0) - 1.0).abs() < 1e-12);
        assert!((TriangleAlgebra::formula_norm(1.0, 0.0, 0.0) - 1.0).abs() < 1e-12);
        let xm = RealMatrix::unit(2, 0, 0);
        let direct = tri.direct_norm(1.0, &xm, 1.0);
        let formula = TriangleAlgebra::formula_norm(1.0, 1.0, 1.0);
        assert!((direct - formula).abs() <= 1e-7 * direct);
        assert!((TriangleAlgebra::scalar_model_norm(1.0, 1.0, 1.0) - direct).abs() < 1e-10);
    }

    #[test]
    fn spin_examples() {
        let s = spin_system(2).unwrap();
        assert_eq!(s[0], sx());
        assert_eq!(s[1], RealMatrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]]));
        assert!(jordan_unchecked(&s[0], &s[1]).is_zero(0.0));
        let s = spin_system(1).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(&s[0] * &s[0], RealMatrix::identity(2));
        assert!(spin_system(0).is_err() && spin_system(11).is_err());
    }

    #[test]
    fn spin_relations_hold_for_all_sizes() {
        for k in 1..=10 {
            let s = spin_system(k).unwrap();
            assert_eq!(s.len(), k);
            let n = spin_ambient_dim(k).unwrap();
            for (i, u) in s.iter().enumerate() {
                assert_eq!(u.dim(), n);
                assert_eq!(u.symmetry_deviation(), 0.0);
                assert_eq!(u * u, RealMatrix::identity(n));
                for v in &s[i + 1..] {
                    assert!(jordan_unchecked(u, v).is_zero(0.0));
                }
            }
        }
    }

    #[test]
    fn no_four_anticommuting_symmetric_strings_in_dimension_four() {
        // supports the dimension table: Cl(4,0) has no 4-dimensional real module
        let letters = [Letter::I, Letter::X, Letter::Z, Letter::J];
        let mut words = Vec::new();
        for a in letters {
            for b in letters {
                let w = vec![a, b];
                if w.iter().filter(|&&l| l == Letter::J).count() % 2 == 0 && w.iter().any(|&l| l != Letter::I) {
                    words.push(w);
                }
            }
        }
        let mut chosen = Vec::new();
        assert!(!extend_clique(&mut chosen, &words, 4));
        let mut chosen = Vec::new();
        assert!(extend_clique(&mut chosen, &words, 3));
    }

    #[test]
    fn spin_span_is_hilbertian() {
        let s = spin_system(4).unwrap();
        let mut rng = seeded_rng(14);
        for _ in 0..100 {
            let lam: Vec<f64> = (0..4).map(|_| gaussian(&mut rng)).collect();
            let m = s
                .iter()
                .zip(&lam)
                .fold(RealMatrix::zeros(s[0].dim()), |acc, (u, l)| acc + u.scale(*l));
            let l2 = lam.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((operator_norm(&m) - l2).abs() <= 1e-9 * (1.0 + l2));
        }
    }

    #[test]
    fn member_examples() {
        let a = Subspace::span(2, &[e(0, 1)]).unwrap();
        let (ok, r) = member(&a, &e(0, 1)).unwrap();
        assert!(ok && r == 0.0);
        let (ok, r) = member(&a, &RealMatrix::identity(2)).unwrap();
        assert!(!ok && (r - 2.0_f64.sqrt()).abs() < 1e-15);
        let (ok, _) = member(&a, &(e(0, 1) + RealMatrix::identity(2).scale(1e-12))).unwrap();
        assert!(ok);
        assert!(member(&a, &RealMatrix::identity(3)).is_err());
    }

    #[test]
    fn flags_and_kinds() {
        let sys = Subspace::span(2, &[RealMatrix::identity(2), sx()]).unwrap();
        let f = sys.flags();
        assert!(f.is_selfadjoint_space && f.is_jordan_closed && f.is_unital);
        assert!(AlgebraDescriptor::new("sys", sys, AlgebraKind::OperatorSystem).is_ok());
        let nil = Subspace::span(2, &[e(0, 1)]).unwrap();
        assert!(AlgebraDescriptor::new("nil", nil, AlgebraKind::JcStar).is_err());
    }

    #[test]
    fn algebra_file_materializes() {
        let json = r#"{"name":"spin2","ambient_dim":2,"kind":"jc_star",
            "generators":[{"dim":2,"entries":[0,1,1,0]},{"dim":2,"entries":[1,0,0,-1]}],
            "close_under":"jordan"}"#;
        let file: AlgebraFile = serde_json::from_str(json).unwrap();
        let a = file.materialize().unwrap();
        assert_eq!(a.subspace.dim(), 3);
        assert_eq!(a.subspace.identity().unwrap(), &RealMatrix::identity(2));
        let p = a.subspace.identity().unwrap();
        assert!(is_psd(p, &tol()) && min_eig_sym(p) > 0.5);
    }
}
