use rand::Rng;

use super::{Check, ScenarioCtx};
use crate::algebra::{diagonal, AlgebraDescriptor, AlgebraKind, Subspace};
use crate::cones::{
    antisym_via_cone, decompose_real_positive, f_transform, generating_split, in_f, inverse_f_transform,
    is_real_positive, sa_cone_decompose, ConeContext,
};
use crate::error::Result;
use crate::functionals::{
    classify_functional_with, functional_norm, minus_three_matrix, skew_positive_functional, Functional,
};
use crate::matcore::{is_psd, min_eig_sym, operator_norm, RealMatrix};
use crate::sampling::{random_antisymmetric, random_matrix, random_psd};

/// Unital test algebras: full, commutative, block diagonal, a spin factor and
/// the non-selfadjoint upper triangular matrices.
fn test_algebras() -> Result<Vec<AlgebraDescriptor>> {
    let u = RealMatrix::unit;
    let sx = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
    let mut out = vec![
        AlgebraDescriptor::new("M_3", Subspace::full(3), AlgebraKind::AssocAlgebra)?,
        AlgebraDescriptor::new(
            "diagonal D_3",
            Subspace::span(3, &[u(3, 0, 0), u(3, 1, 1), u(3, 2, 2)])?,
            AlgebraKind::AssocAlgebra,
        )?,
        AlgebraDescriptor::new(
            "span{I, σx}",
            Subspace::span(2, &[RealMatrix::identity(2), sx])?,
            AlgebraKind::AssocAlgebra,
        )?,
        AlgebraDescriptor::new(
            "upper triangular T_2",
            Subspace::span(2, &[u(2, 0, 0), u(2, 0, 1), u(2, 1, 1)])?,
            AlgebraKind::AssocAlgebra,
        )?,
    ];
    let mut block = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            block.push(u(3, i, j));
        }
    }
    block.push(u(3, 2, 2));
    out.push(AlgebraDescriptor::new(
        "M_2 ⊕ M_1",
        Subspace::span(3, &block)?,
        AlgebraKind::AssocAlgebra,
    )?);
    Ok(out)
}

/// Positive element of the diagonal with norm at most one.
fn positive_contraction(delta: &Subspace, one: &RealMatrix, rng: &mut impl Rng) -> RealMatrix {
    let n = one.dim();
    let d = delta.random_element(rng).sym_part();
    let complement = RealMatrix::identity(n) - one;
    let big = operator_norm(&d) + 1.0;
    let lam = min_eig_sym(&(&d + &complement.scale(big)));
    let p = &d - &one.scale(lam);
    let norm = operator_norm(&p);
    if norm > 1e-12 {
        p.scale(rng.random_range(0.0..0.999) / norm)
    } else {
        one.scale(0.5)
    }
}

fn contraction(space: &Subspace, rng: &mut impl Rng, radius: f64) -> RealMatrix {
    let x = space.random_element(rng);
    let norm = operator_norm(&x);
    if norm > 1e-12 {
        x.scale(radius / norm)
    } else {
        x
    }
}

pub(super) fn brord_suite(ctx: &mut ScenarioCtx) -> Result<()> {
    let mut rng = ctx.rng("samples");
    let tol = ctx.tol;
    let eps = tol.psd_tol * 10.0;
    let (mut dominated, mut real_dominated, mut sandwich) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let (mut split_residual, mut split_in_f) = (0.0_f64, true);
    let (mut generating_residual, mut generating_rp) = (0.0_f64, true);
    let (mut sa_residual, mut sa_psd) = (0.0_f64, true);
    let mut antisym_failures = 0;
    let mut one_in_half_f = true;
    let mut cases = 0;
    for algebra in test_algebras()? {
        let space = algebra.subspace.clone();
        let selfadjoint = space.flags().is_selfadjoint_space;
        let c = ConeContext::new(algebra, tol)?;
        let one = c.one().clone();
        let delta = diagonal(&space);
        one_in_half_f &= in_f(&c, &one.scale(2.0))?.in_f;
        for _ in 0..40 {
            cases += 1;
            // b ≤ 1 for positive contractions b, and 1 lies in ½F
            let b = positive_contraction(&delta, &one, &mut rng);
            dominated = dominated.min(min_eig_sym(&(&one - &b)));

            // 1 dominates contractions in the real part
            let x = contraction(&space, &mut rng, 1.0);
            real_dominated = real_dominated.min(min_eig_sym(&(&one - &x).sym_part()));

            // -1 ≤ h ≤ 1 for selfadjoint contractions h
            let h = contraction(&delta, &mut rng, 1.0).sym_part();
            sandwich = sandwich.min(min_eig_sym(&(&one - &h)).min(min_eig_sym(&(&one + &h))));

            let r = rng.random_range(0.0..0.99);
            let b = contraction(&space, &mut rng, r);
            let s = decompose_real_positive(&c, &b)?;
            split_residual = split_residual.max(s.residual);
            split_in_f &= s.x_in_half_f && s.y_in_half_f;

            let a = space.random_element(&mut rng);
            let (p, q) = generating_split(&c, &a)?;
            generating_residual = generating_residual.max((&(&p - &q) - &a).max_abs());
            generating_rp &= is_real_positive(&c, &p)?.real_positive && is_real_positive(&c, &q)?.real_positive;

            let h = delta.random_element(&mut rng).sym_part();
            let ps = sa_cone_decompose(&c, &h)?;
            sa_residual = sa_residual.max((&(&ps.p - &ps.q) - &h).max_abs());
            sa_psd &= is_psd(&ps.p, &tol) && is_psd(&ps.q, &tol);

            if selfadjoint {
                let k = space.project(&random_antisymmetric(&mut rng, c.ambient_dim()));
                let ok_anti = k.is_zero(1e-12) || antisym_via_cone(&c, &k)?;
                let ok_sym = !antisym_via_cone(&c, &(&h + &one))?;
                antisym_failures += usize::from(!ok_anti) + usize::from(!ok_sym);
            }
        }
    }
    ctx.push(Check::holds("one_in_half_f", "1 ∈ ½F", one_in_half_f, true));
    ctx.push(Check::at_least(
        "dominates_positive",
        "0 ≤ b ≤ a with a ∈ ½F",
        dominated,
        0.0,
        eps,
    ));
    ctx.push(Check::at_least(
        "dominates_real_parts",
        "Re x ≤ Re a for contractions x",
        real_dominated,
        0.0,
        eps,
    ));
    ctx.push(Check::at_least("sandwich", "-a ≤ b ≤ a", sandwich, 0.0, eps));
    ctx.push(
        Check::at_most(
            "difference_split",
            "b = x - y with x, y ∈ ½F",
            split_residual,
            0.0,
            1e-12,
        )
        .detail(format!("{cases} samples")),
    );
    ctx.push(Check::holds(
        "split_in_half_f",
        "b = x - y with x, y ∈ ½F",
        split_in_f,
        true,
    ));
    ctx.push(Check::at_most(
        "generating_cone",
        "A = r_A - r_A",
        generating_residual,
        0.0,
        1e-12,
    ));
    ctx.push(Check::holds(
        "generating_parts_real_positive",
        "A = r_A - r_A",
        generating_rp,
        true,
    ));
    ctx.push(Check::at_most("sa_split", "X_sa = X_+ - X_+", sa_residual, 0.0, 1e-12));
    ctx.push(Check::holds("sa_parts_positive", "X_sa = X_+ - X_+", sa_psd, true));
    ctx.push(Check::none_of(
        "antisymmetric_via_cone",
        "x is antisymmetric iff x ∈ r_A ∩ -r_A",
        antisym_failures,
        cases,
    ));
    Ok(())
}

/// Real-positive element `d - λmin(Re d)·1 + s·1` rescaled to a random norm.
fn real_positive_sample(space: &Subspace, one: &RealMatrix, rng: &mut impl Rng) -> RealMatrix {
    let n = one.dim();
    let d = space.random_element(rng);
    let complement = RealMatrix::identity(n) - one;
    let re = d.sym_part();
    let big = operator_norm(&re) + 1.0;
    let lam = min_eig_sym(&(&re + &complement.scale(big)));
    let lift = rng.random_range(0.0..0.5);
    let x = &d - &one.scale(lam - lift);
    let norm = operator_norm(&x);
    x.scale(rng.random_range(0.1..3.0) / norm)
}

pub(super) fn f_transform_range(ctx: &mut ScenarioCtx) -> Result<()> {
    let mut rng = ctx.rng("elements");
    let tol = ctx.tol;
    let algebras = test_algebras()?;
    let (mut margin, mut roundtrip) = (f64::INFINITY, 0.0_f64);
    let (mut non_monotone, mut rate_excess, mut worst_final) = (0, f64::NEG_INFINITY, 0.0_f64);
    let (mut range_rp, mut range_err, mut f_in_r) = (true, 0.0_f64, true);
    for i in 0..200 {
        let algebra = algebras[i % algebras.len()].clone();
        let space = algebra.subspace.clone();
        let c = ConeContext::new(algebra, tol)?;
        let one = c.one().clone();

        let x = real_positive_sample(&space, &one, &mut rng);
        let xn = operator_norm(&x);
        let w = f_transform(&c, &x)?;
        margin = margin.min(w.half_f_margin);
        roundtrip = roundtrip.max(inverse_f_transform(&c, &w.value)?.max_abs_diff(&x));

        // n 𝔉(x/n) - x = -(x²/n)(1 + x/n)⁻¹, and (1 + x/n)⁻¹ is a contraction
        let mut prev = f64::INFINITY;
        for e in 0..=10 {
            let n = f64::from(1u32 << e);
            let r = operator_norm(&(&f_transform(&c, &x.scale(1.0 / n))?.value.scale(n) - &x));
            non_monotone += usize::from(r > prev * (1.0 + 1e-9) + 1e-15);
            rate_excess = rate_excess.max(r - operator_norm(&x.matmul(&x)) / n);
            prev = r;
        }
        worst_final = worst_final.max(prev / (1.0 + xn));

        // every w in the open ball with 2w ∈ F is a value of the transform
        let r = rng.random_range(0.0..0.9);
        let cb = contraction(&space, &mut rng, r);
        let w = (&one + &cb).scale(0.5);
        let pre = inverse_f_transform(&c, &w)?;
        range_rp &= is_real_positive(&c, &pre)?.real_positive;
        range_err = range_err.max(f_transform(&c, &pre)?.value.max_abs_diff(&w));
        f_in_r &= in_f(&c, &w.scale(2.0))?.in_f && is_real_positive(&c, &w.scale(2.0))?.real_positive;
    }
    ctx.push(Check::at_least(
        "half_f_margin",
        "F(x) = x(1 + x)⁻¹ ∈ ½F_A",
        margin,
        0.0,
        1e-9,
    ));
    ctx.push(Check::at_most(
        "inverse_roundtrip",
        "x = w(1 - w)⁻¹ inverts F",
        roundtrip,
        0.0,
        1e-9,
    ));
    ctx.push(Check::none_of(
        "limit_monotone",
        "n F(x/n) → x as n → ∞",
        non_monotone,
        200,
    ));
    ctx.push(
        Check::at_most("limit_rate", "‖n F(x/n) - x‖ ≤ ‖x²‖ / n", rate_excess, 0.0, 1e-12)
            .detail(format!("largest ‖1024 F(x/1024) - x‖ / (1 + ‖x‖) = {worst_final:.3e}")),
    );
    ctx.push(Check::holds(
        "range_preimage_real_positive",
        "range of F is U_A ∩ ½F_A",
        range_rp,
        true,
    ));
    ctx.push(Check::at_most(
        "range_roundtrip",
        "range of F is U_A ∩ ½F_A",
        range_err,
        0.0,
        1e-9,
    ));
    ctx.push(Check::holds("f_inside_r", "F_A ⊂ r_A", f_in_r, true));
    Ok(())
}

pub(super) fn minus3_functional(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "a -3 in the 1-2 corner";
    let tol = ctx.tol;
    let m = minus_three_matrix();
    let phi1 = skew_positive_functional(1.0);
    ctx.push(Check::within("value_on_matrix", ANCHOR, phi1.eval(&m), -2.0, 1e-12));
    ctx.push(Check::within(
        "matrix_symmetrization",
        "the matrix is real positive",
        min_eig_sym(&m.sym_part()),
        0.0,
        1e-9,
    ));
    let mut rng = ctx.rng("psd");
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let p = random_psd(&mut rng, 2);
        worst = worst.min(phi1.eval(&p) / (1.0 + p.frobenius_norm()));
    }
    ctx.push(Check::at_least(
        "nonnegative_on_psd",
        "φ_1 is positive",
        worst,
        0.0,
        1e-12,
    ));
    for s in [0.0, 0.6, 1.0] {
        let f = classify_functional_with(&skew_positive_functional(s), &tol, ctx.seed, 200)?;
        let tag = format!("s={s}");
        ctx.push(Check::holds(
            &format!("positive[{tag}]"),
            "positive for every s",
            f.positive,
            true,
        ));
        ctx.push(Check::holds(
            &format!("selfadjoint[{tag}]"),
            "selfadjoint only for s = 0",
            f.selfadjoint,
            s == 0.0,
        ));
        ctx.push(Check::holds(
            &format!("real_positive[{tag}]"),
            "real positive only for s = 0",
            f.real_positive,
            s == 0.0,
        ));
        ctx.push(Check::within(
            &format!("value[{tag}]"),
            ANCHOR,
            skew_positive_functional(s).eval(&m),
            2.0 - 4.0 * s,
            1e-12,
        ));
    }
    Ok(())
}

/// A unital subspace of `M_n` containing `I` and `extra` random matrices.
pub(super) fn random_unital_subspace(n: usize, extra: usize, rng: &mut impl Rng) -> Result<Subspace> {
    let mut gens = vec![RealMatrix::identity(n)];
    gens.extend((0..extra).map(|_| random_matrix(rng, n)));
    Subspace::span(n, &gens)
}

pub(super) fn functional_states(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "real positive iff ‖φ‖ = φ(1) iff a nonnegative multiple of a state";
    let mut rng = ctx.rng("functionals");
    let tol = ctx.tol;
    let (mut norm_gap, mut chain_failures, mut state_failures) = (0.0_f64, 0, 0);
    let count = 100;
    for i in 0..count {
        let n = rng.random_range(2..=3);
        let domain = if i % 4 == 0 {
            Subspace::full(n)
        } else {
            random_unital_subspace(n, rng.random_range(1..=3), &mut rng)?
        };
        let g = random_psd(&mut rng, n);
        let g = g.scale(1.0 / g.trace());
        let phi = Functional::new(g, domain.clone())?;
        let at_one = phi.at_identity().unwrap_or(0.0);
        let cert = functional_norm(&phi);
        norm_gap = norm_gap.max((cert.value + cert.gap_estimate - at_one).abs());
        let f = classify_functional_with(&phi, &tol, rng.random(), 300)?;
        chain_failures += usize::from(!(f.real_positive && f.srp && f.equivalences_hold));
        let state = Functional::new(phi.riesz.scale(1.0 / at_one), domain)?;
        let s = classify_functional_with(&state, &tol, rng.random(), 300)?;
        state_failures += usize::from(!s.state);
    }
    ctx.push(Check::at_most("norm_at_identity", "‖φ‖ = φ(1)", norm_gap, 0.0, 1e-6));
    ctx.push(Check::none_of("chain", ANCHOR, chain_failures, count));
    ctx.push(Check::none_of(
        "state_normalization",
        "φ / φ(1) is a state",
        state_failures,
        count,
    ));

    // functionals with a skew part break every link of the chain at once
    let mut broken = 0;
    for _ in 0..20 {
        let n = rng.random_range(2..=3);
        let g = &random_psd(&mut rng, n) + &random_antisymmetric(&mut rng, n);
        let f = classify_functional_with(&Functional::on_full(g), &tol, rng.random(), 300)?;
        broken += usize::from(f.real_positive || !f.equivalences_hold);
    }
    ctx.push(Check::none_of("chain_fails_together", ANCHOR, broken, 20));
    for s in [0.0, 0.25, 0.5, 0.6, 1.0] {
        let f = classify_functional_with(&skew_positive_functional(s), &tol, ctx.seed, 200)?;
        ctx.push(Check::holds(
            &format!("skew_family_real_positive[s={s}]"),
            "the skew family is real positive only at s = 0",
            f.real_positive,
            s == 0.0,
        ));
    }
    Ok(())
}
