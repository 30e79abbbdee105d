use rand::Rng;

use super::{Check, ScenarioCtx};
use crate::algebra::{
    build_triangle, spin_system, unitization_norm_check, unitize, AlgebraDescriptor, AlgebraKind, Subspace,
    TriangleAlgebra,
};
use crate::complexify::{complex_is_psd, embed, ComplexPair};
use crate::error::Result;
use crate::matcore::{jordan_unchecked, min_eig_sym, operator_norm, RealMatrix};
use crate::sampling::{gaussian, random_antisymmetric, random_matrix, random_orthogonal, random_symmetric};

/// Attempts a Cholesky factorization of the Hermitian matrix `re + i·im` in
/// complex arithmetic; it succeeds exactly for positive definite input.
fn hermitian_cholesky_succeeds(re: &RealMatrix, im: &RealMatrix) -> bool {
    let n = re.dim();
    let mut l = vec![(0.0_f64, 0.0_f64); n * n];
    for j in 0..n {
        let mut d = re[(j, j)];
        for k in 0..j {
            let (a, b) = l[j * n + k];
            d -= a * a + b * b;
        }
        if d.is_nan() || d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = (d, 0.0);
        for i in j + 1..n {
            let (mut a, mut b) = (re[(i, j)], im[(i, j)]);
            for k in 0..j {
                let (p, q) = l[i * n + k];
                let (r, s) = l[j * n + k];
                // (p + iq)(r - is)
                a -= p * r + q * s;
                b -= q * r - p * s;
            }
            l[i * n + j] = (a / d, b / d);
        }
    }
    true
}

/// Positive semidefiniteness of `re + i·im` decided in complex arithmetic.
fn hermitian_psd(p: &ComplexPair, psd_tol: f64) -> bool {
    let scale = 1.0 + p.re.max_abs().max(p.im.max_abs());
    let hermitian = p.re.symmetry_deviation() <= psd_tol && (&p.im + &p.im.transpose()).max_abs() <= psd_tol;
    if !hermitian {
        return false;
    }
    let shifted = &p.re + &RealMatrix::identity(p.dim()).scale(psd_tol * scale);
    hermitian_cholesky_succeeds(&shifted, &p.im)
}

pub(super) fn block_positivity(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "x + iy ≥ 0 in A_c iff [[x, -y], [y, x]] ≥ 0 in M_2(A)";
    let mut rng = ctx.rng("cases");
    let cases = 500;
    let (mut disagree, mut off_target, mut positives) = (0, 0, 0);
    let mut norm_gap = 0.0_f64;
    let mut conj_gap = 0.0_f64;
    for case in 0..cases {
        let n = rng.random_range(1..=4);
        let re = random_symmetric(&mut rng, n);
        let im = random_antisymmetric(&mut rng, n);
        let lam = min_eig_sym(&embed(&ComplexPair::new(re.clone(), im.clone())?)?);
        let delta = rng.random_range(1e-3..0.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let re = &re + &RealMatrix::identity(n).scale(delta - lam);
        let selfadjoint = case % 10 != 9;
        let im = if selfadjoint {
            im
        } else {
            &im + &random_symmetric(&mut rng, n)
        };
        let p = ComplexPair::new(re, im)?;
        let block = complex_is_psd(&p, &ctx.tol);
        let direct = hermitian_psd(&p, ctx.tol.psd_tol);
        disagree += usize::from(block != direct);
        off_target += usize::from(block != (selfadjoint && delta > 0.0));
        positives += usize::from(block);

        let real = embed(&ComplexPair::real(p.re.clone()))?;
        norm_gap = norm_gap.max((operator_norm(&real) - operator_norm(&p.re)).abs());
        conj_gap = conj_gap.max((operator_norm(&embed(&p)?) - operator_norm(&embed(&p.conj())?)).abs());
    }
    ctx.push(
        Check::none_of("block_vs_spectral", ANCHOR, disagree, cases).detail(format!(
            "{disagree} disagreements in {cases} cases, {positives} positive"
        )),
    );
    ctx.push(Check::none_of("matches_construction", ANCHOR, off_target, cases));
    ctx.push(Check::at_most(
        "real_norm_preserved",
        "‖x + i0‖ = ‖x‖ in the complexification",
        norm_gap,
        0.0,
        1e-10,
    ));
    ctx.push(Check::at_most(
        "conjugation_isometric",
        "x + iy ↦ x - iy is isometric",
        conj_gap,
        0.0,
        1e-10,
    ));
    Ok(())
}

pub(super) fn meyer_invariance(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "the unitization norm is independent of the representation";
    let mut rng = ctx.rng("elements");
    let e12 = RealMatrix::unit(2, 0, 1);
    let q = random_orthogonal(&mut rng, 5);
    let rep = |x: &RealMatrix| {
        q.matmul(&x.direct_sum(x).direct_sum(&RealMatrix::zeros(1)))
            .matmul(&q.transpose())
    };
    let first = unitize(
        &Subspace::span(2, std::slice::from_ref(&e12))?,
        &RealMatrix::identity(2),
        &ctx.tol,
    )?;
    let second = unitize(&Subspace::span(5, &[rep(&e12)])?, &RealMatrix::identity(5), &ctx.tol)?;
    ctx.push(Check::holds(
        "no_internal_unit",
        "span{E_12} has no identity",
        first.internal_unit.is_none() && second.internal_unit.is_none(),
        true,
    ));
    let (mut worst, mut worst_closed) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let t = 3.0 * gaussian(&mut rng);
        let lambda = 3.0 * gaussian(&mut rng);
        let a = first.norm(&e12.scale(t), lambda);
        let b = second.norm(&rep(&e12).scale(t), lambda);
        // ‖[[λ, t], [0, λ]]‖
        let closed = (t.abs() + (t * t + 4.0 * lambda * lambda).sqrt()) / 2.0;
        worst = worst.max((a - b).abs() / (1.0 + a));
        worst_closed = worst_closed.max((a - closed).abs() / (1.0 + a));
    }
    ctx.push(Check::at_most("representations_agree", ANCHOR, worst, 0.0, 1e-10));
    ctx.push(Check::at_most(
        "closed_form",
        "‖λ1 + tE_12‖ = (|t| + √(t² + 4λ²)) / 2",
        worst_closed,
        0.0,
        1e-10,
    ));
    Ok(())
}

pub(super) fn unitization_formula(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "‖a + λ1‖ = max{‖a + λe‖, |λ|} when A has an identity e";
    let mut rng = ctx.rng("algebras");
    let n = 3;
    let corner = |m: &RealMatrix| m.direct_sum(&RealMatrix::zeros(1));
    let mut families: Vec<(String, Vec<RealMatrix>, AlgebraKind)> = Vec::new();
    let mut full = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            full.push(corner(&RealMatrix::unit(2, i, j)));
        }
    }
    families.push(("M_2 corner".into(), full, AlgebraKind::AssocAlgebra));
    families.push((
        "diagonal corner".into(),
        vec![corner(&RealMatrix::unit(2, 0, 0)), corner(&RealMatrix::unit(2, 1, 1))],
        AlgebraKind::AssocAlgebra,
    ));
    families.push((
        "spin corner".into(),
        vec![
            corner(&RealMatrix::identity(2)),
            corner(&RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])),
            corner(&RealMatrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]])),
        ],
        AlgebraKind::JcStar,
    ));
    let (mut worst, mut samples, mut unit_err) = (0.0_f64, 0, 0.0_f64);
    let mut excess_ok = true;
    for (name, gens, kind) in families {
        let q = random_orthogonal(&mut rng, n);
        let gens: Vec<RealMatrix> = gens.iter().map(|g| q.matmul(g).matmul(&q.transpose())).collect();
        let space = Subspace::span(n, &gens)?;
        let u = unitize(&space, &RealMatrix::identity(n), &ctx.tol)?;
        let e = match &u.internal_unit {
            Some(e) => e.clone(),
            None => {
                ctx.push(Check::holds("internal_unit_found", ANCHOR, false, true).detail(name));
                continue;
            }
        };
        let want_e = q.matmul(&corner(&RealMatrix::identity(2))).matmul(&q.transpose());
        unit_err = unit_err.max(e.max_abs_diff(&want_e));
        let descriptor = AlgebraDescriptor::new(name, space.clone(), kind)?;
        let report = unitization_norm_check(&descriptor, 200, rng.random(), &ctx.tol)?;
        excess_ok &= report.pass;
        for _ in 0..34 {
            let a = space.random_element(&mut rng);
            let lambda = 2.0 * gaussian(&mut rng);
            let formula = u.norm(&a, lambda);
            let direct = u.ambient_norm(&a, lambda);
            worst = worst.max((formula - direct).abs() / (1.0 + direct));
            samples += 1;
        }
    }
    ctx.push(Check::at_most(
        "internal_unit",
        "the identity of the corner is found",
        unit_err,
        0.0,
        1e-9,
    ));
    ctx.push(Check::at_most("formula_vs_direct", ANCHOR, worst, 0.0, 1e-10).detail(format!("{samples} samples")));
    ctx.push(Check::holds(
        "norm_via_contractions",
        "‖a + λ1‖ = sup{‖a∘c + λc‖ : ‖c‖ ≤ 1} in a unital algebra",
        excess_ok,
        true,
    ));
    Ok(())
}

pub(super) fn triangle_eq3(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "‖[[αI, x], [0, βI]]‖² = sup_t (|α|√(1-t²) + ‖x‖t)² + (βt)²";
    let mut rng = ctx.rng("spaces");
    let tol = ctx.tol.norm_rel_tol;
    let (mut worst, mut worst_model) = (0.0_f64, 0.0_f64);
    let mut cases = 0;
    for dim in [1, 2, 3, 4, 5] {
        let gens: Vec<RealMatrix> = (0..dim).map(|_| random_matrix(&mut rng, 3)).collect();
        let tri: TriangleAlgebra = build_triangle(&Subspace::span(3, &gens)?)?;
        let space = Subspace::span(3, &gens)?;
        for _ in 0..100 {
            let alpha = 2.0 * gaussian(&mut rng);
            let beta = 2.0 * gaussian(&mut rng);
            let x = space.random_element(&mut rng).scale(rng.random_range(0.0..3.0));
            let xn = operator_norm(&x);
            let direct = tri.direct_norm(alpha, &x, beta);
            let formula = TriangleAlgebra::formula_norm(alpha, xn, beta);
            let model = TriangleAlgebra::scalar_model_norm(alpha, xn, beta);
            worst = worst.max((formula - direct).abs() / (1.0 + direct));
            worst_model = worst_model.max((model - direct).abs() / (1.0 + direct));
            cases += 1;
        }
    }
    ctx.push(Check::at_most("formula_vs_direct", ANCHOR, worst, 0.0, tol).detail(format!("{cases} elements")));
    ctx.push(Check::at_most(
        "scalar_model",
        "the norm only depends on |α|, ‖x‖ and |β|",
        worst_model,
        0.0,
        tol,
    ));
    Ok(())
}

pub(super) fn spin_hilbert(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "the span of a spin system is isometric to a Hilbert space";
    let mut rng = ctx.rng("coefficients");
    let (mut worst, mut relations) = (0.0_f64, 0.0_f64);
    for k in [2, 3, 4] {
        let u = spin_system(k)?;
        let n = u[0].dim();
        let id = RealMatrix::identity(n);
        for (i, a) in u.iter().enumerate() {
            relations = relations.max(a.symmetry_deviation());
            relations = relations.max(a.matmul(a).max_abs_diff(&id));
            for b in &u[i + 1..] {
                relations = relations.max(jordan_unchecked(a, b).max_abs());
            }
        }
        for _ in 0..100 {
            let lambda: Vec<f64> = (0..k).map(|_| gaussian(&mut rng)).collect();
            let mut x = RealMatrix::zeros(n);
            for (l, ui) in lambda.iter().zip(&u) {
                x += &ui.scale(*l);
            }
            let l2 = lambda.iter().map(|l| l * l).sum::<f64>().sqrt();
            worst = worst.max((operator_norm(&x) - l2).abs() / (1.0 + l2));
        }
    }
    ctx.push(Check::at_most(
        "spin_relations",
        "u_i = u_iᵀ, u_i² = 1 and u_i ∘ u_j = 0",
        relations,
        0.0,
        1e-12,
    ));
    ctx.push(Check::at_most("norm_is_l2", ANCHOR, worst, 0.0, 1e-10));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::ToleranceConfig;

    #[test]
    fn cholesky_oracle_examples() {
        let j = RealMatrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        let p = ComplexPair::new(RealMatrix::identity(2), j.clone()).unwrap();
        // eigenvalues 0 and 2: on the boundary
        assert!(hermitian_psd(&p, 1e-9));
        let q = ComplexPair::new(RealMatrix::identity(2).scale(0.99), j).unwrap();
        assert!(!hermitian_psd(&q, 1e-9));
        let tol = ToleranceConfig::default();
        assert!(complex_is_psd(&p, &tol) && !complex_is_psd(&q, &tol));
    }
}
