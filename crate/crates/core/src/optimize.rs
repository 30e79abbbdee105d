//! Projections and feasibility solvers shared by the norm and extension code.

use crate::algebra::Subspace;
use crate::dense::{cholesky, cholesky_inverse, cholesky_solve, dot, flatten, unflatten};
use crate::error::{Error, Result};
use crate::matcore::{jacobi, RealMatrix};

const SWEEPS: usize = 100;
const NEWTON_STEPS: usize = 2000;

/// Polar factor `M (MᵀM)^{-1/2}` on the range of `M`, with the sum of the
/// singular values.
pub(crate) fn polar(m: &RealMatrix) -> (RealMatrix, f64) {
    let eig = jacobi(&m.gram(), SWEEPS).expect("gram matrices are symmetric");
    let cut = eig.max().max(0.0) * 1e-24;
    let nuclear = eig.values.iter().map(|l| l.max(0.0).sqrt()).sum();
    let x = m.matmul(&eig.reconstruct_with(|l| if l > cut && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 }));
    (x, nuclear)
}

#[derive(Debug, Clone)]
pub(crate) struct BallMax {
    /// Objective at `point`, a strictly feasible element.
    pub value: f64,
    pub point: RealMatrix,
    /// Duality-gap estimate `2n / t` at the final barrier parameter.
    pub gap: f64,
}

/// Maximizes `⟨G, x⟩` over `x ∈ D` with `‖x‖ ≤ 1` by a log-det barrier method
/// on the constraint `[[I, x], [xᵀ, I]] ⪰ 0`, in the coordinates of the
/// orthonormal basis of `D`.
pub(crate) fn max_linear_over_ball(g: &RealMatrix, space: &Subspace, gap_tol: f64) -> BallMax {
    let n = space.ambient_dim();
    let m = 2 * n;
    let d = space.dim();
    let coeffs = space.coords(g);
    let gnorm = coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if d == 0 || gnorm == 0.0 {
        return BallMax {
            value: 0.0,
            point: RealMatrix::zeros(n),
            gap: 0.0,
        };
    }
    let zero = RealMatrix::zeros(n);
    let lifts: Vec<RealMatrix> = space
        .basis()
        .iter()
        .map(|b| {
            RealMatrix::from_blocks(&[vec![zero.clone(), b.clone()], vec![b.transpose(), zero.clone()]])
                .expect("equal blocks")
        })
        .collect();
    let slack = |c: &[f64]| {
        let mut z = RealMatrix::identity(m);
        for (ci, bi) in c.iter().zip(&lifts) {
            if *ci != 0.0 {
                z += &bi.scale(*ci);
            }
        }
        z
    };
    let objective = |c: &[f64], t: f64| -> Option<f64> {
        let l = cholesky(&slack(c))?;
        let logdet: f64 = (0..m).map(|i| 2.0 * l[(i, i)].ln()).sum();
        Some(t * dot(&coeffs, c) + logdet)
    };

    let mut c = vec![0.0; d];
    let mut t = 1.0 / gnorm;
    for _ in 0..60 {
        for _ in 0..200 {
            let l = match cholesky(&slack(&c)) {
                Some(l) => l,
                None => break,
            };
            let zinv = cholesky_inverse(&l);
            let a: Vec<RealMatrix> = lifts.iter().map(|b| zinv.matmul(b)).collect();
            let at: Vec<RealMatrix> = a.iter().map(|x| x.transpose()).collect();
            let grad: Vec<f64> = (0..d).map(|i| t * coeffs[i] - a[i].trace()).collect();
            let mut h = RealMatrix::zeros(d);
            for i in 0..d {
                for j in i..d {
                    let v = dot(a[i].entries(), at[j].entries());
                    h[(i, j)] = v;
                    h[(j, i)] = v;
                }
            }
            let hl = match cholesky(&h) {
                Some(hl) => hl,
                None => {
                    let ridge = 1e-12 * (1.0 + h.max_abs());
                    let shifted = &h + &RealMatrix::identity(d).scale(ridge);
                    match cholesky(&shifted) {
                        Some(hl) => hl,
                        None => break,
                    }
                }
            };
            let step = cholesky_solve(&hl, &grad);
            let decrement = dot(&grad, &step);
            if decrement / 2.0 <= 1e-10 {
                break;
            }
            let base = objective(&c, t).expect("current point is strictly feasible");
            let mut s = 1.0;
            let mut moved = false;
            while s > 1e-14 {
                let trial: Vec<f64> = c.iter().zip(&step).map(|(ci, di)| ci + s * di).collect();
                if let Some(v) = objective(&trial, t) {
                    if v >= base + 0.25 * s * decrement {
                        c = trial;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let value = dot(&coeffs, &c);
        if m as f64 / t <= gap_tol * (1.0 + value.abs()) {
            break;
        }
        t *= 10.0;
    }
    BallMax {
        value: dot(&coeffs, &c),
        point: space.element(&c),
        gap: m as f64 / t,
    }
}

/// Dykstra alternation between the PSD cone and an affine set
/// `{X symmetric : ⟨A_i, X⟩ = c_i}`.
pub(crate) struct PsdAffine {
    dim: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    gram_pinv: RealMatrix,
}

#[derive(Debug, Clone)]
pub(crate) struct PsdAffineSolution {
    pub point: RealMatrix,
    pub residual: f64,
    pub min_eig: f64,
    pub iterations: usize,
    /// Newton steps taken after the Dykstra budget ran out.
    pub newton_steps: usize,
}

impl PsdAffine {
    /// Constraint matrices are symmetrized; inconsistent systems are rejected.
    pub fn new(dim: usize, constraints: &[RealMatrix], rhs: Vec<f64>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = constraints.iter().map(|a| flatten(&a.sym_part())).collect();
        let m = rows.len();
        let mut gram = RealMatrix::zeros(m.max(1));
        for i in 0..m {
            for j in 0..m {
                gram[(i, j)] = dot(&rows[i], &rows[j]);
            }
        }
        let eig = jacobi(&gram, SWEEPS)?;
        let cut = eig.max().max(0.0) * 1e-12;
        let gram_pinv = eig.reconstruct_with(|l| if l > cut && l > 0.0 { 1.0 / l } else { 0.0 });
        let solver = Self {
            dim,
            rows,
            rhs,
            gram_pinv,
        };
        let base = solver.project_affine(&RealMatrix::zeros(dim));
        let residual = solver.residual(&base);
        let scale = 1.0 + solver.rhs.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
        if residual > 1e-9 * scale {
            return Err(Error::Precondition(format!(
                "linear constraints are inconsistent (residual {residual:.3e}); the data is not selfadjoint"
            )));
        }
        Ok(solver)
    }

    pub fn residual(&self, x: &RealMatrix) -> f64 {
        let v = flatten(x);
        self.rows
            .iter()
            .zip(&self.rhs)
            .fold(0.0_f64, |acc, (a, c)| acc.max((dot(a, &v) - c).abs()))
    }

    fn project_affine(&self, x: &RealMatrix) -> RealMatrix {
        let m = self.rows.len();
        if m == 0 {
            return x.clone();
        }
        let v = flatten(x);
        let r: Vec<f64> = self.rows.iter().zip(&self.rhs).map(|(a, c)| dot(a, &v) - c).collect();
        let mut out = v;
        for i in 0..m {
            let coeff: f64 = (0..m).map(|j| self.gram_pinv[(i, j)] * r[j]).sum();
            if coeff != 0.0 {
                for (o, a) in out.iter_mut().zip(&self.rows[i]) {
                    *o -= coeff * a;
                }
            }
        }
        unflatten(self.dim, out)
    }

    /// Runs Dykstra from `start` until the affine point is PSD within `eig_tol`
    /// and the PSD point satisfies the constraints within `residual_tol`.
    /// If the budget runs out, a dual Newton solve aims for `residual_tol` and
    /// settles for `accept_tol`.
    pub fn solve(
        &self,
        start: &RealMatrix,
        max_iter: usize,
        residual_tol: f64,
        eig_tol: f64,
        accept_tol: f64,
    ) -> Result<PsdAffineSolution> {
        let n = self.dim;
        let mut x = start.sym_part();
        let mut p = RealMatrix::zeros(n);
        let mut q = RealMatrix::zeros(n);
        let mut best_residual = f64::INFINITY;
        for it in 1..=max_iter {
            let a = self.project_affine(&(&x + &p));
            p = &(&x + &p) - &a;
            let eig = jacobi(&(&a + &q), SWEEPS)?;
            let min_eig = eig.min();
            if min_eig >= -eig_tol {
                return Ok(PsdAffineSolution {
                    point: a,
                    residual: 0.0,
                    min_eig,
                    iterations: it,
                    newton_steps: 0,
                }
                .with_residual(self));
            }
            let b = eig.reconstruct_with(|l| l.max(0.0));
            q = &(&a + &q) - &b;
            let residual = self.residual(&b);
            best_residual = best_residual.min(residual);
            if residual <= residual_tol {
                let min_eig = jacobi(&b, SWEEPS)?.min();
                return Ok(PsdAffineSolution {
                    point: b,
                    residual,
                    min_eig,
                    iterations: it,
                    newton_steps: 0,
                });
            }
            x = b;
        }
        // Without a strictly feasible point Dykstra slows to a crawl; the
        // same projection is then finished on the dual.
        match self.newton(start, NEWTON_STEPS, residual_tol, accept_tol.max(residual_tol))? {
            Some((point, steps)) => {
                let min_eig = jacobi(&point, SWEEPS)?.min();
                Ok(PsdAffineSolution {
                    residual: self.residual(&point),
                    point,
                    min_eig,
                    iterations: max_iter,
                    newton_steps: steps,
                })
            }
            None => Err(Error::ExtensionNotFound {
                iterations: max_iter,
                residual: best_residual,
            }),
        }
    }

    fn adjoint(&self, y: &[f64]) -> RealMatrix {
        let mut v = vec![0.0; self.dim * self.dim];
        for (row, &c) in self.rows.iter().zip(y) {
            for (o, a) in v.iter_mut().zip(row) {
                *o += c * a;
            }
        }
        unflatten(self.dim, v)
    }

    /// Semismooth Newton on the dual `θ(y) = ½‖Π(G + A*y)‖² − ⟨c, y⟩` of the
    /// projection of `G` onto the feasible set. `∇θ = AΠ(G + A*y) − c`, so the
    /// primal iterate is always PSD and only the residual has to vanish.
    fn newton(
        &self,
        g: &RealMatrix,
        max_steps: usize,
        residual_tol: f64,
        accept_tol: f64,
    ) -> Result<Option<(RealMatrix, usize)>> {
        let m = self.rows.len();
        let g = g.sym_part();
        let eval = |y: &[f64]| -> Result<(RealMatrix, crate::matcore::SymEig, Vec<f64>, f64)> {
            let eig = jacobi(&(&g + &self.adjoint(y)), SWEEPS)?;
            let x = eig.reconstruct_with(|l| l.max(0.0));
            let v = flatten(&x);
            let grad: Vec<f64> = self.rows.iter().zip(&self.rhs).map(|(a, c)| dot(a, &v) - c).collect();
            let theta = 0.5 * dot(&v, &v) - dot(&self.rhs, y);
            Ok((x, eig, grad, theta))
        };
        let mut y = vec![0.0; m];
        let (mut x, mut eig, mut grad, mut theta) = eval(&y)?;
        let mut steps = 0;
        while steps < max_steps {
            let gnorm = grad.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if gnorm <= residual_tol {
                return Ok(Some((x, steps)));
            }
            steps += 1;
            let q = &eig.vectors;
            let lam = &eig.values;
            let n = self.dim;
            let omega = |k: usize, l: usize| -> f64 {
                let (a, b) = (lam[k], lam[l]);
                match (a > 0.0, b > 0.0) {
                    (true, true) => 1.0,
                    (false, false) => 0.0,
                    (true, false) => a / (a - b),
                    (false, true) => b / (b - a),
                }
            };
            let rotated: Vec<RealMatrix> = self
                .rows
                .iter()
                .map(|r| q.transpose().matmul(&unflatten(n, r.clone())).matmul(q))
                .collect();
            let mut hess = RealMatrix::zeros(m);
            for j in 0..m {
                let mut wj = rotated[j].clone();
                for k in 0..n {
                    for l in 0..n {
                        wj[(k, l)] *= omega(k, l);
                    }
                }
                for i in 0..=j {
                    let h = rotated[i].inner(&wj);
                    hess[(i, j)] = h;
                    hess[(j, i)] = h;
                }
            }
            let mu = (0.1 * gnorm).clamp(1e-12, 1e-2);
            for i in 0..m {
                hess[(i, i)] += mu;
            }
            let h_eig = jacobi(&hess, SWEEPS)?;
            let h_inv = h_eig.reconstruct_with(|l| if l > 0.0 { 1.0 / l } else { 0.0 });
            let mut dir: Vec<f64> = (0..m)
                .map(|i| -(0..m).map(|j| h_inv[(i, j)] * grad[j]).sum::<f64>())
                .collect();
            let mut slope = dot(&grad, &dir);
            if slope >= 0.0 {
                dir = grad.iter().map(|v| -v).collect();
                slope = -dot(&grad, &grad);
            }
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<f64> = y.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
                let next = eval(&trial)?;
                if next.3 <= theta + 1e-4 * alpha * slope {
                    y = trial;
                    (x, eig, grad, theta) = next;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let gnorm = grad.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        Ok((gnorm <= accept_tol).then_some((x, steps)))
    }
}

impl PsdAffineSolution {
    fn with_residual(mut self, problem: &PsdAffine) -> Self {
        self.residual = problem.residual(&self.point);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{nuclear_norm, operator_norm};
    use crate::sampling::{random_matrix, seeded_rng};

    #[test]
    fn polar_attains_nuclear_norm() {
        let mut rng = seeded_rng(42);
        let m = random_matrix(&mut rng, 4);
        let (x, nuc) = polar(&m);
        assert!((x.inner(&m) - nuc).abs() < 1e-10);
        assert!((nuc - nuclear_norm(&m)).abs() < 1e-10);
        assert!(operator_norm(&x) <= 1.0 + 1e-12);
    }

    #[test]
    fn barrier_is_tight_on_subspaces() {
        let mut rng = seeded_rng(43);
        let gens: Vec<RealMatrix> = (0..4).map(|_| random_matrix(&mut rng, 3)).collect();
        let space = Subspace::span(3, &gens).unwrap();
        let g = space.project(&random_matrix(&mut rng, 3));
        let b = max_linear_over_ball(&g, &space, 1e-10);
        assert!(b.gap <= 1e-9 * (1.0 + b.value));
        assert!(operator_norm(&b.point) <= 1.0);
        assert!(space.residual(&b.point) < 1e-12);
        assert!((b.point.inner(&g) - b.value).abs() < 1e-10);
        assert!(b.value <= nuclear_norm(&g) + 1e-12);
    }

    #[test]
    fn barrier_matches_nuclear_norm_on_full_algebra() {
        let mut rng = seeded_rng(44);
        let g = random_matrix(&mut rng, 3);
        let b = max_linear_over_ball(&g, &Subspace::full(3), 1e-11);
        assert!((b.value - nuclear_norm(&g)).abs() < 1e-8);
    }

    #[test]
    fn psd_affine_finds_candidate() {
        let sx = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let id = RealMatrix::identity(2);
        let solver = PsdAffine::new(2, &[id.clone(), sx.clone()], vec![1.0, 0.5]).unwrap();
        let s = solver.solve(&id.scale(0.5), 1000, 1e-9, 1e-9, 1e-9).unwrap();
        let want = &id.scale(0.5) + &sx.scale(0.25);
        assert!(s.point.max_abs_diff(&want) < 1e-9);
        assert!(PsdAffine::new(2, &[sx.clone(), sx], vec![1.0, 2.0]).is_err());
    }
}
