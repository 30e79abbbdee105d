use rand::Rng;

use super::positivity::random_unital_subspace;
use super::{Check, ScenarioCtx};
use crate::algebra::Subspace;
use crate::complexify::embed_parts;
use crate::error::{Error, Result};
use crate::functionals::{extend_positive, functional_norm, Functional};
use crate::maps::{
    canonical_sa_extension, choi, classify_map, extend_cp, is_cp, jordan_hom_check, map_norm, map_norm_levels,
    real_bounded_norm, schwarz_check, selfadjoint_on_diagonal, stinespring, LinearMapDesc,
};
use crate::matcore::{min_eig_sym, operator_norm, sym_eig, RealMatrix, RectMatrix};
use crate::sampling::{
    gaussian, random_antisymmetric, random_matrix, random_orthogonal, random_psd, random_rect, random_symmetric,
};

fn rotation() -> RealMatrix {
    RealMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]])
}

/// Linear polynomials `s + tx` sampled at `0, ½, 1`, as diagonal matrices.
fn poly_domain() -> (RealMatrix, RealMatrix) {
    (RealMatrix::identity(3), RealMatrix::diag(&[0.0, 0.5, 1.0]))
}

/// `s + tx ↦ s + t(1 + z)/2` sampled at the 8th roots of unity, as complex
/// diagonal matrices in the real block embedding.
fn expoly_map() -> Result<LinearMapDesc> {
    let points: Vec<(f64, f64)> = (0..8)
        .map(|j| {
            let a = std::f64::consts::TAU * j as f64 / 8.0;
            (a.cos(), a.sin())
        })
        .collect();
    let one = embed_parts(&RealMatrix::identity(8), &RealMatrix::zeros(8));
    let re: Vec<f64> = points.iter().map(|(c, _)| (1.0 + c) / 2.0).collect();
    let im: Vec<f64> = points.iter().map(|(_, s)| s / 2.0).collect();
    let x = embed_parts(&RealMatrix::diag(&re), &RealMatrix::diag(&im));
    let (g1, gx) = poly_domain();
    LinearMapDesc::from_generator_images(3, 16, &[g1, gx], &[one, x])
}

/// `max |s + t(1 + z)/2|` over 4096 equally spaced points of the circle.
fn circle_grid_norm(s: f64, t: f64) -> f64 {
    (0..4096)
        .map(|j| {
            let a = std::f64::consts::TAU * j as f64 / 4096.0;
            let re = s + t * (1.0 + a.cos()) / 2.0;
            let im = t * a.sin() / 2.0;
            re.hypot(im)
        })
        .fold(0.0, f64::max)
}

/// `max |s + tp|` over the interval; attained at an endpoint.
fn interval_norm(s: f64, t: f64) -> f64 {
    s.abs().max((s + t).abs())
}

pub(super) fn expoly(ctx: &mut ScenarioCtx) -> Result<()> {
    const EXTEND: &str = "certainly does not extend to a positive map on X + X*";
    let t_map = expoly_map()?;
    let (g1, gx) = poly_domain();
    let mut rng = ctx.rng("coefficients");
    let (mut x_err, mut t_err, mut model_err, mut excess) = (0.0_f64, 0.0_f64, 0.0_f64, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let s = 2.0 * gaussian(&mut rng);
        let t = 2.0 * gaussian(&mut rng);
        let elem = &g1.scale(s) + &gx.scale(t);
        let xn = interval_norm(s, t);
        let tn = circle_grid_norm(s, t);
        x_err = x_err.max((operator_norm(&elem) - s.abs().max((s + t).abs())).abs());
        t_err = t_err.max((tn - ((s + t / 2.0).abs() + t.abs() / 2.0)).abs());
        model_err = model_err.max((operator_norm(&t_map.apply(&elem)?) - tn).abs());
        excess = excess.max(tn - xn);
    }
    ctx.push(Check::at_most(
        "domain_norm",
        "‖s + tx‖ = max{|s|, |s + t|}",
        x_err,
        0.0,
        1e-6,
    ));
    ctx.push(Check::at_most(
        "image_norm",
        "‖T(s + tx)‖ = |s + t/2| + |t|/2",
        t_err,
        0.0,
        1e-6,
    ));
    ctx.push(Check::at_most(
        "matrix_model_norm",
        "the matrix model realizes the sup norms",
        model_err,
        0.0,
        1e-6,
    ));
    ctx.push(Check::at_most("contraction", "T is contractive", excess, 0.0, 1e-12));
    let unit_err = t_map.apply(&g1)?.max_abs_diff(&RealMatrix::identity(16));
    ctx.push(Check::at_most("unital", "T(1) = 1", unit_err, 0.0, 1e-12));

    let (selfadjoint, residual) = selfadjoint_on_diagonal(&t_map);
    ctx.push(
        Check::holds("selfadjoint", "T is not selfadjoint", selfadjoint, false)
            .detail(format!("T(xᵀ) - T(x)ᵀ residual {residual:.3e}")),
    );
    let flags = classify_map(&t_map, &[1], ctx.seed, &ctx.tol)?;
    ctx.push(
        Check::holds("positive", "T is not positive", flags.positive, false)
            .witness(flags.levels[0].positive_witness.clone()),
    );
    ctx.push(Check::holds(
        "systematically_real_positive",
        "T is not systematically real positive",
        flags.srp,
        false,
    ));
    ctx.push(Check::holds(
        "real_positive",
        "a unital contraction is real positive",
        flags.real_positive,
        true,
    ));
    let extends = match canonical_sa_extension(&t_map, ctx.seed, &ctx.tol) {
        Ok(_) => true,
        Err(Error::DiagonalNotSelfadjoint { .. } | Error::NotWellDefined { .. }) => false,
        Err(e) => return Err(e),
    };
    ctx.push(Check::holds("extends_to_x_plus_x_star", EXTEND, extends, false));

    let sa_dim = |gens: &[RealMatrix]| -> Result<usize> {
        let mut all = gens.to_vec();
        all.extend(gens.iter().map(|g| g.transpose()));
        Ok(Subspace::span(gens[0].dim(), &all)?.dim())
    };
    let domain_dim = sa_dim(&[g1.clone(), gx.clone()])?;
    let image_dim = sa_dim(&[t_map.apply(&g1)?, t_map.apply(&gx)?])?;
    ctx.push(Check::within(
        "dim_x_plus_x_star",
        "X + X* has dimension 2",
        domain_dim as f64,
        2.0,
        0.0,
    ));
    ctx.push(Check::within(
        "dim_image_plus_adjoint",
        "T(X) + T(X)* has dimension 3",
        image_dim as f64,
        3.0,
        0.0,
    ));
    Ok(())
}

/// The spin pair in `M_4`: diagonal projections and the off-diagonal
/// antisymmetric units built from `σx` and `σz`.
fn theta_domain() -> Vec<RealMatrix> {
    let id = RealMatrix::identity(2);
    let z = RealMatrix::zeros(2);
    let sx = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
    let sz = RealMatrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]]);
    let off = |s: &RealMatrix| RealMatrix::from_blocks(&[vec![z.clone(), s.clone()], vec![-s, z.clone()]]);
    vec![
        RealMatrix::from_blocks(&[vec![id.clone(), z.clone()], vec![z.clone(), z.clone()]]).expect("2x2 blocks"),
        RealMatrix::from_blocks(&[vec![z.clone(), z.clone()], vec![z.clone(), id]]).expect("2x2 blocks"),
        off(&sx).expect("2x2 blocks"),
        off(&sz).expect("2x2 blocks"),
    ]
}

/// `θ_M([[λ, x], [-x, μ]]) = [[λ, Mα], [-Mα, μ]]` for `x = ασx + βσz`.
fn theta_map(m: f64) -> Result<LinearMapDesc> {
    let images = vec![
        RealMatrix::unit(2, 0, 0),
        RealMatrix::unit(2, 1, 1),
        rotation().scale(m),
        RealMatrix::zeros(2),
    ];
    LinearMapDesc::from_generator_images(4, 2, &theta_domain(), &images)
}

pub(super) fn theta_t(ctx: &mut ScenarioCtx) -> Result<()> {
    ctx.note(
        "the unbounded positive unital selfadjoint map is replaced by the family θ_M, M ∈ {1, 5, 50}: \
         each member has norm at least M, so no bound holds uniformly over the family",
    );
    let gens = theta_domain();
    for m in [1.0, 5.0, 50.0] {
        let t = theta_map(m)?;
        let tag = format!("M={m}");
        let flags = classify_map(&t, &[1, 2], ctx.seed, &ctx.tol)?;
        ctx.push(Check::holds(
            &format!("positive[{tag}]"),
            "θ is positive",
            flags.positive,
            true,
        ));
        ctx.push(Check::holds(
            &format!("selfadjoint[{tag}]"),
            "θ is selfadjoint",
            flags.selfadjoint,
            true,
        ));
        let unit_err = t
            .apply(&RealMatrix::identity(4))?
            .max_abs_diff(&RealMatrix::identity(2));
        ctx.push(Check::at_most(
            &format!("unital[{tag}]"),
            "θ is unital",
            unit_err,
            0.0,
            1e-12,
        ));
        let at_generator = operator_norm(&t.apply(&gens[2])?);
        ctx.push(Check::within(
            &format!("norm_at_unit_element[{tag}]"),
            "θ maps a norm one element to one of norm M",
            at_generator,
            m,
            1e-9,
        ));
        let cert = map_norm(&t, 1, ctx.seed);
        ctx.push(Check::at_least(&format!("norm[{tag}]"), "‖θ‖ ≥ M", cert.value, m, 1e-6));
        let level2 = &flags.levels[1];
        if m > 1.0 {
            ctx.push(
                Check::holds(
                    &format!("two_positive[{tag}]"),
                    "this positive map is not 2-positive",
                    level2.positive,
                    false,
                )
                .witness(level2.positive_witness.clone())
                .detail(format!(
                    "λmin of θ_2 at the witness: {:.6}",
                    level2.worst_positive_margin
                )),
            );
        } else {
            ctx.push(Check::skipped(
                &format!("two_positive[{tag}]"),
                "this positive map is not 2-positive",
                format!(
                    "no violation expected at M = 1 (margin {:.3e})",
                    level2.worst_positive_margin
                ),
            ));
        }
    }
    Ok(())
}

/// `x ↦ Σ Aᵢ x Aᵢᵀ` with Gaussian `Aᵢ`, scaled so that `‖T(I)‖ = 1`.
fn random_cp(domain: Subspace, m: usize, r: usize, rng: &mut impl Rng) -> Result<LinearMapDesc> {
    let n = domain.ambient_dim();
    let ops: Vec<RectMatrix> = (0..r).map(|_| random_rect(rng, m, n)).collect();
    let t = LinearMapDesc::from_kraus(domain, &ops)?;
    let one = operator_norm(&t.apply_unchecked(&RealMatrix::identity(n)));
    Ok(t.scaled(1.0 / one))
}

pub(super) fn srp_equiv(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "SRP iff positive and selfadjoint iff extends to a positive selfadjoint map on A + A*";
    let mut rng = ctx.rng("maps");
    let tol = ctx.tol;
    let (mut three_way, mut by_construction, mut cases) = (0, 0, 0);
    for d in 0..4 {
        let domain = if d < 3 {
            let s1 = random_symmetric(&mut rng, 3);
            let s2 = random_symmetric(&mut rng, 3);
            let k = random_antisymmetric(&mut rng, 3);
            Subspace::span(3, &[RealMatrix::identity(3), s1, s2, k])?
        } else {
            random_unital_subspace(3, 2, &mut rng)?
        };
        let selfadjoint_domain = domain.flags().is_selfadjoint_space;
        for family in 0..3 {
            let p = random_cp(domain.clone(), 2, 2, &mut rng)?;
            let (t, expect_srp) = match family {
                0 => (p, true),
                1 => {
                    // a skew term on the diagonal breaks selfadjointness
                    let s = random_symmetric(&mut rng, 3);
                    let s = &s + &RealMatrix::identity(3);
                    let images = p
                        .domain
                        .basis()
                        .iter()
                        .zip(&p.images)
                        .map(|(b, img)| img + &rotation().scale(b.inner(&s)))
                        .collect();
                    (LinearMapDesc::new(p.domain.clone(), 2, images)?, false)
                }
                _ => {
                    let shifted = p
                        .domain
                        .basis()
                        .iter()
                        .zip(&p.images)
                        .map(|(b, img)| img - &RealMatrix::identity(2).scale(2.0 * b.trace()))
                        .collect();
                    (LinearMapDesc::new(p.domain.clone(), 2, shifted)?, false)
                }
            };
            let f = classify_map(&t, &[1], rng.random(), &tol)?;
            let extension = match canonical_sa_extension(&t, rng.random(), &tol) {
                Ok(e) => e.selfadjoint && e.positive.unwrap_or(false),
                Err(Error::DiagonalNotSelfadjoint { .. } | Error::NotWellDefined { .. }) => false,
                Err(e) => return Err(e),
            };
            let mut agree = f.srp == extension;
            if selfadjoint_domain {
                agree &= f.srp_equivalence == Some(true);
            }
            three_way += usize::from(!agree);
            by_construction += usize::from(f.srp != expect_srp);
            cases += 1;
        }
    }
    ctx.push(Check::none_of("three_way_equivalence", ANCHOR, three_way, cases));
    ctx.push(Check::none_of("matches_construction", ANCHOR, by_construction, cases));
    Ok(())
}

pub(super) fn stinespring_roundtrip(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "T(a) = V*π(a)V";
    let mut rng = ctx.rng("maps");
    let tol = ctx.tol;
    let (mut residual, mut gap, mut apply_err) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut too_many = 0;
    let count = 50;
    for _ in 0..count {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=4);
        let r = rng.random_range(1..=4);
        let ops: Vec<RectMatrix> = (0..r).map(|_| random_rect(&mut rng, m, n)).collect();
        let t = LinearMapDesc::from_kraus(Subspace::full(n), &ops)?;
        let s = stinespring(&t, &tol)?;
        residual = residual.max(s.reconstruction_residual);
        gap = gap.max(s.norm_gap);
        too_many += usize::from(s.multiplicity > n * m);
        let x = random_matrix(&mut rng, n);
        let y = t.apply(&x)?;
        apply_err = apply_err.max(s.compress(&x).max_abs_diff(&y) / (1.0 + y.max_abs()));
    }
    ctx.push(Check::at_most("reconstruction", ANCHOR, residual, 0.0, 1e-8).detail(format!("{count} maps")));
    ctx.push(Check::at_most("norm_identity", "‖V‖² = ‖T(1)‖", gap, 0.0, 1e-6));
    ctx.push(Check::at_most("random_inputs", ANCHOR, apply_err, 0.0, 1e-8));
    ctx.push(Check::none_of(
        "multiplicity",
        "at most nm Kraus operators",
        too_many,
        count,
    ));
    Ok(())
}

pub(super) fn transpose_not_cp(ctx: &mut ScenarioCtx) -> Result<()> {
    let tol = ctx.tol;
    let t = LinearMapDesc::transpose(2);
    let flags = classify_map(&t, &[1, 2], ctx.seed, &tol)?;
    ctx.push(Check::holds(
        "positive",
        "the transpose is positive",
        flags.positive,
        true,
    ));
    ctx.push(Check::holds(
        "selfadjoint",
        "the transpose is selfadjoint",
        flags.selfadjoint,
        true,
    ));
    ctx.push(Check::holds(
        "srp",
        "the transpose is systematically real positive",
        flags.srp,
        true,
    ));
    let jh = jordan_hom_check(&t, ctx.seed, &tol)?;
    ctx.push(Check::at_most(
        "jordan_homomorphism",
        "(a∘b)ᵀ = aᵀ∘bᵀ",
        jh.residual,
        0.0,
        1e-12,
    ));
    ctx.push(Check::holds(
        "contractive",
        "the transpose is contractive",
        jh.contractive,
        true,
    ));
    ctx.push(Check::holds(
        "contractive_jordan_map_is_selfadjoint",
        "a contractive Jordan homomorphism is selfadjoint",
        jh.selfadjoint_if_contractive == Some(true),
        true,
    ));
    let c = choi(&t)?;
    let eig = sym_eig(&c.matrix, &tol)?;
    ctx.push(Check::within(
        "choi_min_eig",
        "the Choi matrix of the transpose",
        eig.min(),
        -1.0,
        1e-9,
    ));
    ctx.push(
        Check::holds(
            "cp",
            "the transpose is not completely positive",
            is_cp(&t, &tol)?,
            false,
        )
        .witness(flags.levels[1].positive_witness.clone()),
    );
    let seq = map_norm_levels(&t, &[1, 2], ctx.seed);
    ctx.push(Check::within("norm_level_1", "‖T‖ = 1", seq[0].value, 1.0, 1e-4));
    ctx.push(
        Check::at_least("norm_level_2", "‖T_2‖ = 2", seq[1].value, 2.0, 1e-4).witness(Some(seq[1].maximizer.clone())),
    );
    Ok(())
}

pub(super) fn commutative_target(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "a real positive map into a commutative real C*-algebra has ‖T‖ = ‖T(1)‖";
    let mut rng = ctx.rng("maps");
    let tol = ctx.tol;
    let (mut search_gap, mut certified_gap, mut rb_gap, mut flags_bad) = (0.0_f64, 0.0_f64, 0.0_f64, 0);
    let count = 10;
    for _ in 0..count {
        let domain = random_unital_subspace(3, rng.random_range(1..=3), &mut rng)?;
        let gs: Vec<RealMatrix> = (0..4)
            .map(|_| {
                let g = random_psd(&mut rng, 3);
                g.scale(rng.random_range(0.2..1.0) / g.trace())
            })
            .collect();
        let images = domain
            .basis()
            .iter()
            .map(|b| RealMatrix::diag(&gs.iter().map(|g| g.inner(b)).collect::<Vec<_>>()))
            .collect();
        let t = LinearMapDesc::new(domain.clone(), 4, images)?;
        let f = classify_map(&t, &[1], rng.random(), &tol)?;
        flags_bad += usize::from(!(f.real_positive && f.selfadjoint));
        let at_one = operator_norm(&t.apply(&RealMatrix::identity(3))?);
        search_gap = search_gap.max((map_norm(&t, 1, rng.random()).value - at_one).abs());
        // ‖T‖ = max of the norms of the coordinate functionals
        let upper = gs
            .iter()
            .map(|g| -> Result<f64> {
                let c = functional_norm(&Functional::new(g.clone(), domain.clone())?);
                Ok(c.value + c.gap_estimate)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        certified_gap = certified_gap.max((upper - at_one).abs());
        rb_gap = rb_gap.max((real_bounded_norm(&t, rng.random())?.value - at_one).abs());
    }
    ctx.push(Check::none_of(
        "real_positive_selfadjoint",
        "the sampled maps are SRP",
        flags_bad,
        count,
    ));
    ctx.push(Check::at_most("norm_search", ANCHOR, search_gap, 0.0, 1e-4));
    ctx.push(Check::at_most("norm_certified", ANCHOR, certified_gap, 0.0, 1e-4));
    ctx.push(Check::at_most(
        "real_bounded_norm",
        "‖u‖_r = ‖u(1)‖ for SRP maps",
        rb_gap,
        0.0,
        1e-4,
    ));
    Ok(())
}

/// A unital completely positive map `x ↦ Vᵀ(I_r ⊗ x)V` for an isometry `V`.
fn random_unital_cp(n: usize, m: usize, r: usize, rng: &mut impl Rng) -> Result<Vec<RectMatrix>> {
    let q = random_orthogonal(rng, r * n);
    let ops = (0..r)
        .map(|l| {
            let mut a = RectMatrix::zeros(m, n);
            for i in 0..m {
                for j in 0..n {
                    a[(i, j)] = q[(l * n + j, i)];
                }
            }
            a
        })
        .collect();
    Ok(ops)
}

pub(super) fn schwarz(ctx: &mut ScenarioCtx) -> Result<()> {
    const ANCHOR: &str = "Φ(a*a) ≥ Φ(a)*Φ(a) for unital 2-positive Φ";
    let mut rng = ctx.rng("maps");
    let tol = ctx.tol;
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for (n, m, r) in [(2, 2, 1), (2, 2, 2), (3, 2, 2), (3, 3, 1), (2, 3, 3), (3, 2, 3)] {
        if m > r * n {
            continue;
        }
        let ops = random_unital_cp(n, m, r, &mut rng)?;
        let phi = LinearMapDesc::from_kraus(Subspace::full(n), &ops)?;
        let report = schwarz_check(&phi, 200, rng.random(), &tol)?;
        if report.checked {
            worst = worst.min(report.min_margin);
            checked += 1;
        }
    }
    // restriction to the C*-subalgebra M_2 ⊕ M_1
    let u = RealMatrix::unit;
    let block = Subspace::span(3, &[u(3, 0, 0), u(3, 0, 1), u(3, 1, 0), u(3, 1, 1), u(3, 2, 2)])?;
    let ops = random_unital_cp(3, 2, 2, &mut rng)?;
    let phi = LinearMapDesc::from_kraus(block, &ops)?;
    let report = schwarz_check(&phi, 200, rng.random(), &tol)?;
    if report.checked {
        worst = worst.min(report.min_margin);
        checked += 1;
    }
    ctx.push(Check::at_least("margin", ANCHOR, worst, 0.0, 1e-8).detail(format!("{checked} maps checked")));
    ctx.push(Check::within("maps_checked", ANCHOR, checked as f64, 7.0, 0.0));
    let transpose = schwarz_check(&LinearMapDesc::transpose(2), 50, ctx.seed, &tol)?;
    ctx.push(Check::holds(
        "transpose_not_eligible",
        "the transpose is not 2-positive",
        transpose.checked,
        false,
    ));
    Ok(())
}

pub(super) fn extension_suite(ctx: &mut ScenarioCtx) -> Result<()> {
    let mut rng = ctx.rng("instances");
    let tol = ctx.tol;
    let count = 50;
    let (mut f_residual, mut f_min_eig) = (0.0_f64, f64::INFINITY);
    let mut polished = 0;
    for _ in 0..count {
        let n = rng.random_range(2..=3);
        let domain = random_unital_subspace(n, rng.random_range(1..=3), &mut rng)?;
        let g = random_psd(&mut rng, n);
        let phi = Functional::new(g.scale(1.0 / g.trace()), domain.clone())?;
        let ext = extend_positive(&phi, &tol)?;
        polished += usize::from(ext.newton_steps > 0);
        let h = &ext.extension.riesz;
        let mut r = (h.trace() - phi.at_identity().unwrap_or(0.0)).abs();
        for b in domain.basis() {
            r = r.max((h.inner(b) - phi.eval(b)).abs());
        }
        f_residual = f_residual.max(r);
        f_min_eig = f_min_eig.min(min_eig_sym(h));
    }
    ctx.push(Check::at_most(
        "positive_extension_residual",
        "real positive functionals extend to positive functionals of the same norm",
        f_residual,
        0.0,
        1e-6,
    ));
    ctx.push(Check::at_least(
        "positive_extension_psd",
        "real positive functionals extend to positive functionals of the same norm",
        f_min_eig,
        0.0,
        1e-7,
    ));
    ctx.note(format!(
        "{polished} of {count} positive extensions finished by the dual Newton solver"
    ));
    polished = 0;

    let (mut t_residual, mut t_min_eig) = (0.0_f64, f64::INFINITY);
    for _ in 0..count {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(2..=3);
        let domain = random_unital_subspace(n, rng.random_range(1..=2), &mut rng)?;
        let t = random_cp(domain.clone(), m, rng.random_range(1..=2), &mut rng)?;
        let ext = extend_cp(&t, &tol)?;
        polished += usize::from(ext.newton_steps > 0);
        let mut r = 0.0_f64;
        for b in domain.basis() {
            r = r.max(ext.map.apply(b)?.max_abs_diff(&t.apply(b)?));
        }
        t_residual = t_residual.max(r);
        t_min_eig = t_min_eig.min(min_eig_sym(&ext.choi.matrix));
    }
    ctx.push(Check::at_most(
        "cp_extension_residual",
        "completely positive maps on operator systems extend to M_n",
        t_residual,
        0.0,
        1e-6,
    ));
    ctx.push(Check::at_least(
        "cp_extension_choi_psd",
        "completely positive maps on operator systems extend to M_n",
        t_min_eig,
        0.0,
        1e-7,
    ));
    ctx.note(format!(
        "{polished} of {count} completely positive extensions finished by the dual Newton solver"
    ));
    Ok(())
}
