//! Linear functionals `φ(x) = tr(Fᵀx)` on subspaces of `M_n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{diagonal, Subspace};
use crate::error::{Error, Result};
use crate::matcore::{is_psd, min_eig_sym, nuclear_norm, operator_norm, RealMatrix, ToleranceConfig};
use crate::optimize::{max_linear_over_ball, polar, PsdAffine};
use crate::sampling::seeded_rng;

#[derive(Debug, Clone, Serialize)]
pub struct Functional {
    /// Riesz representative `F`.
    pub riesz: RealMatrix,
    pub domain: Subspace,
}

impl Functional {
    pub fn new(riesz: RealMatrix, domain: Subspace) -> Result<Self> {
        if riesz.dim() != domain.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.ambient_dim(),
                found: riesz.dim(),
            });
        }
        Ok(Self { riesz, domain })
    }

    /// Functional on `M_n` given by its Riesz matrix.
    pub fn on_full(riesz: RealMatrix) -> Self {
        let n = riesz.dim();
        Self {
            riesz,
            domain: Subspace::full(n),
        }
    }

    pub fn eval(&self, x: &RealMatrix) -> f64 {
        self.riesz.inner(x)
    }

    /// The representative projected into the domain; it induces the same
    /// functional there.
    pub fn reduced_riesz(&self) -> RealMatrix {
        self.domain.project(&self.riesz)
    }

    /// `φ(1)` for the identity of the domain, if any.
    pub fn at_identity(&self) -> Option<f64> {
        self.domain.identity().map(|e| self.eval(e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCertificate {
    /// Objective at `maximizer`; a certified lower bound.
    pub value: f64,
    pub maximizer: RealMatrix,
    /// Upper bound minus `value`.
    pub gap_estimate: f64,
    /// True when the value is exact (full matrix algebra domain).
    pub exact: bool,
}

/// `‖φ‖ = sup{φ(x) : x ∈ D, ‖x‖ ≤ 1}`.
///
/// On `M_n` this is the nuclear norm of `F`, attained at its polar factor. On a
/// proper subspace a barrier method gives a strictly feasible maximizer and a
/// duality-gap estimate; the nuclear norm of the projected representative is a
/// second upper bound.
pub fn functional_norm(phi: &Functional) -> NormCertificate {
    let n = phi.domain.ambient_dim();
    if phi.domain.dim() == 0 {
        return NormCertificate {
            value: 0.0,
            maximizer: RealMatrix::zeros(n),
            gap_estimate: 0.0,
            exact: true,
        };
    }
    if phi.domain.is_full() {
        let (maximizer, _) = polar(&phi.riesz);
        return NormCertificate {
            value: phi.eval(&maximizer),
            maximizer,
            gap_estimate: 0.0,
            exact: true,
        };
    }
    let g = phi.reduced_riesz();
    let upper = nuclear_norm(&g);
    let found = max_linear_over_ball(&g, &phi.domain, 1e-11);
    let mut best = NormCertificate {
        value: found.value,
        maximizer: found.point,
        gap_estimate: found.gap.min(upper - found.value).max(0.0),
        exact: false,
    };
    // the identity is a maximizer for real-positive functionals
    if let Some(e) = phi.domain.identity() {
        let v = phi.eval(e);
        if v > best.value {
            best.gap_estimate = (best.value + best.gap_estimate - v).max(0.0);
            best.value = v;
            best.maximizer = e.clone();
        }
    }
    best
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalFlags {
    pub positive: bool,
    /// False when positivity was decided by sampling.
    pub positive_exact: bool,
    pub selfadjoint: bool,
    pub real_positive: bool,
    pub real_positive_exact: bool,
    pub srp: bool,
    pub state: bool,
    pub norm: f64,
    pub value_at_identity: f64,
    /// Whether real positivity, systematic real positivity, `‖φ‖ = φ(1)` and
    /// being a nonnegative multiple of a state all agree.
    pub equivalences_hold: bool,
    /// Most negative value seen on the PSD or real-positive samples.
    pub worst_positive_value: f64,
    pub worst_real_positive_value: f64,
    pub seed: u64,
    pub samples: usize,
}

/// Positive elements of a unital domain: `d - λmin(d)·1` for selfadjoint `d` in
/// the diagonal, which lands on the boundary of the cone, plus `1`.
pub(crate) fn sample_psd_members(
    delta: &Subspace,
    one: &RealMatrix,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<RealMatrix> {
    let n = one.dim();
    let complement = RealMatrix::identity(n) - one;
    let mut out = vec![one.clone()];
    if delta.dim() == 0 {
        return out;
    }
    // a boundary shift can cancel an element of the diagonal entirely; such
    // numerically zero samples carry no information and are dropped
    for attempt in 0..4 * count {
        if out.len() >= count {
            break;
        }
        let d = delta.random_element(rng).sym_part();
        let big = operator_norm(&d) + 1.0;
        let lam = min_eig_sym(&(&d + &complement.scale(big)));
        let lift: f64 = if attempt % 2 == 0 {
            0.0
        } else {
            rng.random_range(0.0..0.2)
        };
        let p = &d - &one.scale(lam - lift);
        if operator_norm(&p) > 1e-9 * big {
            out.push(p);
        }
    }
    out
}

/// Real-positive elements: `d - λmin(Re d)·1` for random `d`, and `±a` for
/// antisymmetric `a` in the diagonal.
pub(crate) fn sample_real_positive_members(
    domain: &Subspace,
    delta: &Subspace,
    one: &RealMatrix,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<RealMatrix> {
    let n = one.dim();
    let complement = RealMatrix::identity(n) - one;
    let mut out = vec![one.clone()];
    for attempt in 0..4 * count {
        if out.len() >= count {
            break;
        }
        if attempt % 4 == 3 && delta.dim() > 0 {
            let d = delta.random_element(rng);
            let a = d.skew_part();
            if operator_norm(&a) > 1e-9 * (1.0 + operator_norm(&d)) {
                out.push(a.clone());
                out.push(-a);
            }
            continue;
        }
        let d = domain.random_element(rng);
        let re = d.sym_part();
        let big = operator_norm(&re) + 1.0;
        let lam = min_eig_sym(&(&re + &complement.scale(big)));
        let x = &d - &one.scale(lam);
        if operator_norm(&x) > 1e-9 * big {
            out.push(x);
        }
    }
    out.truncate(count.max(1));
    out
}

/// The positivity taxonomy of a functional on a unital domain.
pub fn classify_functional(phi: &Functional, tol: &ToleranceConfig, seed: u64) -> Result<FunctionalFlags> {
    classify_functional_with(phi, tol, seed, 1000)
}

pub fn classify_functional_with(
    phi: &Functional,
    tol: &ToleranceConfig,
    seed: u64,
    samples: usize,
) -> Result<FunctionalFlags> {
    let domain = &phi.domain;
    let one = domain.identity().cloned().ok_or(Error::NotUnital)?;
    let scale = 1.0 + phi.reduced_riesz().frobenius_norm();
    let eps = 1e-9 * scale;
    let mut rng = seeded_rng(seed);

    let delta = diagonal(domain);
    let selfadjoint = delta.basis().iter().all(|b| phi.eval(&b.skew_part()).abs() <= eps);

    let (positive, positive_exact, worst_positive_value);
    let (real_positive, real_positive_exact, worst_real_positive_value);
    if domain.is_full() {
        let f = &phi.riesz;
        let sym = f.sym_part();
        positive = is_psd(&sym, tol);
        positive_exact = true;
        worst_positive_value = min_eig_sym(&sym).min(0.0);
        real_positive = positive && f.skew_part().max_abs() <= tol.psd_tol * (1.0 + f.max_abs());
        real_positive_exact = true;
        worst_real_positive_value = if real_positive {
            0.0
        } else {
            worst_positive_value.min(-f.skew_part().max_abs())
        };
    } else {
        let psd = sample_psd_members(&delta, &one, samples, &mut rng);
        worst_positive_value = psd
            .iter()
            .map(|p| phi.eval(p) / (1.0 + p.frobenius_norm()))
            .fold(f64::INFINITY, f64::min);
        positive = worst_positive_value >= -eps;
        positive_exact = false;
        let rp = sample_real_positive_members(domain, &delta, &one, samples, &mut rng);
        worst_real_positive_value = rp
            .iter()
            .map(|x| phi.eval(x) / (1.0 + x.frobenius_norm()))
            .fold(f64::INFINITY, f64::min);
        real_positive = worst_real_positive_value >= -eps;
        real_positive_exact = false;
    }

    let norm = functional_norm(phi).value;
    let value_at_identity = phi.eval(&one);
    let srp = real_positive && selfadjoint;
    let norm_tol = 1e-6 * (1.0 + norm.abs());
    let norm_attained = (norm - value_at_identity).abs() <= norm_tol;
    let state = (value_at_identity - 1.0).abs() <= 1e-6 && (norm - 1.0).abs() <= 1e-6;
    let multiple_of_state = norm <= norm_tol || norm_attained;
    let equivalences_hold = real_positive == srp && srp == norm_attained && norm_attained == multiple_of_state;
    Ok(FunctionalFlags {
        positive,
        positive_exact,
        selfadjoint,
        real_positive,
        real_positive_exact,
        srp,
        state,
        norm,
        value_at_identity,
        equivalences_hold,
        worst_positive_value,
        worst_real_positive_value,
        seed,
        samples,
    })
}

/// The family `F = [[1, s], [-s, 1]]` on `M_2`: positive for every `s`, not
/// selfadjoint for `s ≠ 0`, and negative on the real-positive matrix
/// `[[1, -3], [1, 1]]` once `s > ½`.
pub fn skew_positive_functional(s: f64) -> Functional {
    Functional::on_full(RealMatrix::from_rows(&[[1.0, s], [-s, 1.0]]))
}

/// The real-positive matrix with `-3` in the 1-2 corner.
pub fn minus_three_matrix() -> RealMatrix {
    RealMatrix::from_rows(&[[1.0, -3.0], [1.0, 1.0]])
}

#[derive(Debug, Clone, Serialize)]
pub struct PositiveExtension {
    pub extension: Functional,
    /// Largest violation of `tr(Gᵀb) = φ(b)` over the domain basis and of
    /// `tr G = ‖φ‖`.
    pub residual: f64,
    pub min_eig: f64,
    /// Dykstra iterations used.
    pub iterations: usize,
    /// Dual Newton steps, nonzero only when Dykstra stalled.
    pub newton_steps: usize,
}

/// Extends a real-positive functional on a unital subspace of `M_n` to a
/// positive selfadjoint functional `tr(G ·)` on `M_n` with `tr G = ‖φ‖`.
pub fn extend_positive(phi: &Functional, tol: &ToleranceConfig) -> Result<PositiveExtension> {
    extend_positive_with(phi, tol, 50_000)
}

pub fn extend_positive_with(phi: &Functional, tol: &ToleranceConfig, max_iter: usize) -> Result<PositiveExtension> {
    let n = phi.domain.ambient_dim();
    let one = phi.domain.identity().cloned().ok_or(Error::NotUnital)?;
    // for real-positive functionals the norm is attained at the identity
    let norm = phi.eval(&one);
    let mut constraints: Vec<RealMatrix> = phi.domain.basis().to_vec();
    let mut rhs: Vec<f64> = constraints.iter().map(|b| phi.eval(b)).collect();
    constraints.push(RealMatrix::identity(n));
    rhs.push(norm);
    let problem = PsdAffine::new(n, &constraints, rhs)?;
    let start = RealMatrix::identity(n).scale(norm / n as f64);
    let sol = problem.solve(&start, max_iter, 1e-9, tol.psd_tol * (1.0 + norm.abs()), 1e-8)?;
    let g = sol.point;
    let min_eig = min_eig_sym(&g);
    Ok(PositiveExtension {
        extension: Functional::on_full(g),
        residual: sol.residual,
        min_eig,
        iterations: sol.iterations,
        newton_steps: sol.newton_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_psd, random_symmetric, seeded_rng};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn norm_examples() {
        let c = functional_norm(&Functional::on_full(RealMatrix::unit(2, 0, 0)));
        assert!((c.value - 1.0).abs() < 1e-12 && c.exact);
        assert!(c.maximizer.max_abs_diff(&RealMatrix::unit(2, 0, 0)) < 1e-12);
        let c = functional_norm(&Functional::on_full(RealMatrix::identity(2)));
        assert!((c.value - 2.0).abs() < 1e-12);
        assert!(c.maximizer.max_abs_diff(&RealMatrix::identity(2)) < 1e-12);
        let c = functional_norm(&Functional::on_full(RealMatrix::from_rows(&[[1.0, 1.0], [-1.0, 1.0]])));
        assert!((c.value - 2.0 * 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn norm_on_subspace_is_bracketed() {
        let mut rng = seeded_rng(51);
        let gens: Vec<RealMatrix> = (0..3).map(|_| crate::sampling::random_matrix(&mut rng, 3)).collect();
        let d = Subspace::span(3, &gens).unwrap();
        let f = crate::sampling::random_matrix(&mut rng, 3);
        let phi = Functional::new(f, d.clone()).unwrap();
        let c = functional_norm(&phi);
        assert!(operator_norm(&c.maximizer) <= 1.0 + 1e-9);
        assert!(d.residual(&c.maximizer) < 1e-10);
        assert!((phi.eval(&c.maximizer) - c.value).abs() < 1e-10);
        assert!(c.gap_estimate <= 1e-8 * (1.0 + c.value));
        assert!(c.value <= nuclear_norm(&phi.reduced_riesz()) + 1e-12);
    }

    #[test]
    fn classification_examples() {
        let half_trace = Functional::on_full(RealMatrix::identity(2).scale(0.5));
        let f = classify_functional(&half_trace, &tol(), 0).unwrap();
        assert!(f.state && f.real_positive && f.srp && f.selfadjoint && f.positive && f.equivalences_hold);

        let f = classify_functional(&skew_positive_functional(1.0), &tol(), 0).unwrap();
        assert!(f.positive && !f.selfadjoint && !f.real_positive && f.equivalences_hold);

        let f = classify_functional(&Functional::on_full(RealMatrix::diag(&[1.0, 0.0])), &tol(), 0).unwrap();
        assert!(f.state);
    }

    #[test]
    fn skew_family() {
        let x = minus_three_matrix();
        assert_eq!(skew_positive_functional(1.0).eval(&x), -2.0);
        assert!(is_psd(&(&x + &x.transpose()), &tol()));
        let phi0 = skew_positive_functional(0.0);
        assert_eq!(phi0.riesz, RealMatrix::identity(2));
        let mut rng = seeded_rng(52);
        let phi1 = skew_positive_functional(1.0);
        for _ in 0..1000 {
            assert!(phi1.eval(&random_psd(&mut rng, 2)) >= 0.0);
        }
        let ratio = functional_norm(&phi1).value / phi1.eval(&RealMatrix::identity(2));
        assert!((ratio - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sampled_classification_on_operator_system() {
        let sx = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let d = Subspace::span(2, &[RealMatrix::identity(2), sx.clone()]).unwrap();
        // φ(aI + bσx) = a + b/2 is a state
        let phi = Functional::new(&RealMatrix::identity(2).scale(0.5) + &sx.scale(0.25), d.clone()).unwrap();
        let f = classify_functional_with(&phi, &tol(), 1, 300).unwrap();
        assert!(
            f.real_positive && !f.real_positive_exact && f.state && f.equivalences_hold,
            "{f:?}"
        );
        // φ(aI + bσx) = a + 2b has norm 2 > φ(1) = 1
        let phi = Functional::new(&RealMatrix::identity(2).scale(0.5) + &sx, d).unwrap();
        let f = classify_functional_with(&phi, &tol(), 1, 300).unwrap();
        assert!(!f.real_positive && !f.positive && f.equivalences_hold, "{f:?}");
        assert!((f.norm - 2.0).abs() < 1e-8);
    }

    #[test]
    fn real_positive_functionals_attain_norm_at_identity() {
        let mut rng = seeded_rng(53);
        for _ in 0..20 {
            let g = random_psd(&mut rng, 3);
            let f = classify_functional(&Functional::on_full(g.clone()), &tol(), 2).unwrap();
            assert!(f.real_positive && f.srp && f.equivalences_hold);
            assert!((f.norm - g.trace()).abs() <= 1e-9 * g.trace());
            let state = Functional::on_full(g.scale(1.0 / g.trace()));
            assert!(classify_functional(&state, &tol(), 2).unwrap().state);
        }
    }

    #[test]
    fn extension_examples() {
        let t = tol();
        let d = Subspace::span(2, &[RealMatrix::identity(2)]).unwrap();
        let phi = Functional::new(RealMatrix::identity(2), d).unwrap();
        let e = extend_positive(&phi, &t).unwrap();
        assert!(e.extension.riesz.max_abs_diff(&RealMatrix::identity(2)) < 1e-12);

        let sx = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let d = Subspace::span(2, &[RealMatrix::identity(2), sx.clone()]).unwrap();
        let phi = Functional::new(&RealMatrix::identity(2).scale(0.5) + &sx.scale(0.25), d.clone()).unwrap();
        let e = extend_positive(&phi, &t).unwrap();
        let eig = crate::matcore::sym_eig(&e.extension.riesz, &t).unwrap();
        assert!((eig.values[0] - 0.75).abs() < 1e-9 && (eig.values[1] - 0.25).abs() < 1e-9);

        let zero = Functional::new(RealMatrix::zeros(2), d).unwrap();
        assert!(extend_positive(&zero, &t).unwrap().extension.riesz.is_zero(1e-15));
    }

    #[test]
    fn extension_preserves_values() {
        let t = tol();
        let mut rng = seeded_rng(54);
        for _ in 0..10 {
            let gens = vec![
                RealMatrix::identity(4),
                random_symmetric(&mut rng, 4),
                crate::sampling::random_matrix(&mut rng, 4),
            ];
            let d = Subspace::span(4, &gens).unwrap();
            let g = random_psd(&mut rng, 4);
            let phi = Functional::new(g, d.clone()).unwrap();
            let e = extend_positive(&phi, &t).unwrap();
            for b in d.basis() {
                assert!((e.extension.eval(b) - phi.eval(b)).abs() <= 1e-7);
            }
            assert!(e.min_eig >= -1e-7);
        }
    }

    #[test]
    fn non_selfadjoint_data_has_no_extension() {
        let j = RealMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        let d = Subspace::span(2, &[RealMatrix::identity(2), j.clone()]).unwrap();
        let phi = Functional::new(&RealMatrix::identity(2) + &j, d).unwrap();
        assert!(extend_positive(&phi, &tol()).is_err());
    }
}
