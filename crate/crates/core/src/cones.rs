//! The real-positive cone `𝔯_A = {x : x + xᵀ ⪰ 0}`, the set
//! `𝔉_A = {x : ‖1 - x‖ ≤ 1}`, the F-transform and the Cayley transform.

use serde::{Deserialize, Serialize};

use crate::algebra::{member, AlgebraDescriptor};
use crate::error::{Error, Result};
use crate::matcore::{
    classify_symmetry, inverse_checked, is_psd, min_eig_sym, operator_norm, RealMatrix, SymmetryKind, ToleranceConfig,
};

/// Condition number beyond which a resolvent counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// A unital algebra together with its identity and tolerances.
#[derive(Debug, Clone)]
pub struct ConeContext {
    pub algebra: AlgebraDescriptor,
    pub tol: ToleranceConfig,
    one: RealMatrix,
}

impl ConeContext {
    pub fn new(algebra: AlgebraDescriptor, tol: ToleranceConfig) -> Result<Self> {
        let one = algebra.subspace.identity().cloned().ok_or(Error::NotUnital)?;
        let norm = operator_norm(&one);
        if (norm - 1.0).abs() > tol.norm_rel_tol {
            return Err(Error::InvalidInput(format!("identity has norm {norm}, expected 1")));
        }
        Ok(Self { algebra, tol, one })
    }

    /// The identity `1` of the algebra (a projection, not necessarily `I`).
    pub fn one(&self) -> &RealMatrix {
        &self.one
    }

    pub fn ambient_dim(&self) -> usize {
        self.one.dim()
    }

    pub(crate) fn require_member(&self, x: &RealMatrix) -> Result<()> {
        let (ok, residual) = member(&self.algebra.subspace, x)?;
        if ok {
            Ok(())
        } else {
            Err(Error::NotMember { residual })
        }
    }

    /// `(a + (I - 1))⁻¹` restricted to the range of `1`; this is the inverse of
    /// `a` inside the unital algebra when `a` is invertible there.
    pub(crate) fn unital_inverse(&self, a: &RealMatrix) -> Result<RealMatrix> {
        let n = self.ambient_dim();
        let complement = RealMatrix::identity(n) - &self.one;
        let inv = inverse_checked(&(a + &complement), MAX_CONDITION)?;
        Ok(inv - complement)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealPositivity {
    pub real_positive: bool,
    /// Smallest eigenvalue of `x + xᵀ`.
    pub min_eig: f64,
    /// `t` maximizing `‖1 - tx‖ - (1 + t²‖x‖²)` over the grid.
    pub worst_t: f64,
    pub worst_excess: f64,
    /// Whether the grid inequality test reaches the same verdict.
    pub grid_agrees: bool,
}

/// Real positivity of `x`, decided by `x + xᵀ ⪰ 0` and cross-checked against
/// `‖1 - tx‖ ≤ 1 + t²‖x‖²` for `t = 2⁻²⁰, …, 2²⁰`.
pub fn is_real_positive(ctx: &ConeContext, x: &RealMatrix) -> Result<RealPositivity> {
    ctx.require_member(x)?;
    Ok(real_positivity_unchecked(ctx.one(), x, &ctx.tol))
}

pub(crate) fn real_positivity_unchecked(one: &RealMatrix, x: &RealMatrix, tol: &ToleranceConfig) -> RealPositivity {
    let s = x + &x.transpose();
    let min_eig = min_eig_sym(&s);
    let real_positive = is_psd(&s, tol);
    let xn = operator_norm(x);
    let mut worst_t = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for k in -20..=20 {
        let t = 2f64.powi(k);
        let lhs = operator_norm(&(one - &x.scale(t)));
        let excess = lhs - (1.0 + t * t * xn * xn);
        if excess > worst_excess {
            worst_excess = excess;
            worst_t = t;
        }
    }
    let grid_positive = worst_excess <= tol.psd_tol * (1.0 + xn);
    RealPositivity {
        real_positive,
        min_eig,
        worst_t,
        worst_excess,
        grid_agrees: grid_positive == real_positive,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FMembership {
    pub in_f: bool,
    /// `‖1 - x‖`.
    pub distance: f64,
    /// Smallest eigenvalue of `x + xᵀ - xᵀx` on the range of `1`.
    pub algebraic_min_eig: f64,
    pub algebraic_agrees: bool,
}

/// `x ∈ 𝔉_A`, cross-checked against the form `xᵀx ≤ x + xᵀ`.
pub fn in_f(ctx: &ConeContext, x: &RealMatrix) -> Result<FMembership> {
    ctx.require_member(x)?;
    let distance = operator_norm(&(ctx.one() - x));
    let in_f = distance <= 1.0 + ctx.tol.psd_tol;
    // on the complement of the range of 1 both sides vanish, so add it back
    let n = ctx.ambient_dim();
    let complement = RealMatrix::identity(n) - ctx.one();
    let form = x + &x.transpose() - x.transpose().matmul(x) + complement;
    let algebraic_min_eig = min_eig_sym(&form);
    let algebraic = algebraic_min_eig >= -ctx.tol.psd_tol * (1.0 + form.max_abs());
    Ok(FMembership {
        in_f,
        distance,
        algebraic_min_eig,
        algebraic_agrees: algebraic == in_f,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FTransform {
    pub value: RealMatrix,
    /// `1 - ‖1 - 2 value‖`; nonnegative when the value lies in `½𝔉`.
    pub half_f_margin: f64,
    pub membership_residual: f64,
}

/// `𝔉(x) = x(1 + x)⁻¹` for real-positive `x`.
pub fn f_transform(ctx: &ConeContext, x: &RealMatrix) -> Result<FTransform> {
    ctx.require_member(x)?;
    let rp = real_positivity_unchecked(ctx.one(), x, &ctx.tol);
    if !rp.real_positive {
        return Err(Error::RealPositivityViolation { min_eig: rp.min_eig });
    }
    let value = x.matmul(&ctx.unital_inverse(&(ctx.one() + x))?);
    let (_, membership_residual) = member(&ctx.algebra.subspace, &value)?;
    if membership_residual > 1e-8 * (1.0 + value.frobenius_norm()) {
        return Err(Error::NotMember {
            residual: membership_residual,
        });
    }
    let half_f_margin = 1.0 - operator_norm(&(ctx.one() - &value.scale(2.0)));
    Ok(FTransform {
        value,
        half_f_margin,
        membership_residual,
    })
}

/// `w(1 - w)⁻¹`, the inverse of the F-transform on `U_A ∩ ½𝔉_A`.
pub fn inverse_f_transform(ctx: &ConeContext, w: &RealMatrix) -> Result<RealMatrix> {
    ctx.require_member(w)?;
    Ok(w.matmul(&ctx.unital_inverse(&(ctx.one() - w))?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CayleyDirection {
    /// `T` strictly contractive, image `(I + T)(I - T)⁻¹`.
    ContractionToAccretive,
    /// `θ` strictly accretive, image `(θ - I)(θ + I)⁻¹`.
    AccretiveToContraction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CayleyReport {
    pub direction: CayleyDirection,
    pub image: RealMatrix,
    /// `1 - ‖T‖` or `λmin(θ + θᵀ)` for the input.
    pub input_margin: f64,
    /// `λmin(image + imageᵀ)` or `1 - ‖image‖`.
    pub output_margin: f64,
    pub holds: bool,
}

pub fn cayley_check(t: &RealMatrix, direction: CayleyDirection) -> Result<CayleyReport> {
    let id = RealMatrix::identity(t.dim());
    match direction {
        CayleyDirection::ContractionToAccretive => {
            let input_margin = 1.0 - operator_norm(t);
            if input_margin <= 1e-9 {
                return Err(Error::Precondition(format!(
                    "input is not strictly contractive (norm {})",
                    1.0 - input_margin
                )));
            }
            let image = (&id + t).matmul(&inverse_checked(&(&id - t), MAX_CONDITION)?);
            let output_margin = min_eig_sym(&(&image + &image.transpose()));
            Ok(CayleyReport {
                direction,
                image,
                input_margin,
                output_margin,
                holds: output_margin > 0.0,
            })
        }
        CayleyDirection::AccretiveToContraction => {
            let input_margin = min_eig_sym(&(t + &t.transpose()));
            if input_margin <= 1e-9 {
                return Err(Error::Precondition(format!(
                    "input is not strictly accretive (min eigenvalue {input_margin})"
                )));
            }
            let image = (t - &id).matmul(&inverse_checked(&(t + &id), MAX_CONDITION)?);
            let output_margin = 1.0 - operator_norm(&image);
            Ok(CayleyReport {
                direction,
                image,
                input_margin,
                output_margin,
                holds: output_margin > 0.0,
            })
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealPositiveSplit {
    pub x: RealMatrix,
    pub y: RealMatrix,
    /// `max |x - y - b|`.
    pub residual: f64,
    pub x_in_half_f: bool,
    pub y_in_half_f: bool,
}

/// `b = x - y` with `x = (1 + b)/2` and `y = (1 - b)/2` in `½𝔉_A`, for `‖b‖ < 1`.
pub fn decompose_real_positive(ctx: &ConeContext, b: &RealMatrix) -> Result<RealPositiveSplit> {
    ctx.require_member(b)?;
    let norm = operator_norm(b);
    if norm >= 1.0 {
        return Err(Error::NormTooLarge { norm });
    }
    let x = (ctx.one() + b).scale(0.5);
    let y = (ctx.one() - b).scale(0.5);
    let residual = (&(&x - &y) - b).max_abs();
    let x_in_half_f = in_f(ctx, &x.scale(2.0))?.in_f;
    let y_in_half_f = in_f(ctx, &y.scale(2.0))?.in_f;
    Ok(RealPositiveSplit {
        x,
        y,
        residual,
        x_in_half_f,
        y_in_half_f,
    })
}

/// Any `a = (‖a‖1 + a) - ‖a‖1`, a difference of two real-positive elements.
pub fn generating_split(ctx: &ConeContext, a: &RealMatrix) -> Result<(RealMatrix, RealMatrix)> {
    ctx.require_member(a)?;
    let s = ctx.one().scale(operator_norm(a));
    Ok((&s + a, s))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositiveSplit {
    pub p: RealMatrix,
    pub q: RealMatrix,
}

/// `x = p - q` with `p = ½(‖x‖1 + x)`, `q = ½(‖x‖1 - x)`, both positive.
pub fn sa_cone_decompose(ctx: &ConeContext, x: &RealMatrix) -> Result<PositiveSplit> {
    ctx.require_member(x)?;
    let deviation = x.symmetry_deviation();
    if deviation > ctx.tol.psd_tol * (1.0 + x.max_abs()) {
        return Err(Error::NotSelfadjoint { deviation });
    }
    let s = ctx.one().scale(operator_norm(x));
    Ok(PositiveSplit {
        p: (&s + x).scale(0.5),
        q: (&s - x).scale(0.5),
    })
}

/// `x ∈ 𝔯_A ∩ (-𝔯_A)`, which must coincide with antisymmetry of `x`.
pub fn antisym_via_cone(ctx: &ConeContext, x: &RealMatrix) -> Result<bool> {
    let plus = is_real_positive(ctx, x)?.real_positive;
    let minus = is_real_positive(ctx, &-x)?.real_positive;
    let via_cone = plus && minus;
    let direct = classify_symmetry(x, &ctx.tol).kind == SymmetryKind::Antisymmetric || x.is_zero(ctx.tol.psd_tol);
    if via_cone != direct {
        return Err(Error::Inconsistent(format!(
            "cone test says {via_cone}, symmetry split says {direct}"
        )));
    }
    Ok(via_cone)
}
