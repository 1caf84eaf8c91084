//! Homogeneous self-dual interior-point method for
//! `min c·x s.t. A x = b, x ∈ K`, `K = R₊ⁿ × Π Herm₊(n_k)`.
//!
//! The embedding solves
//! `A x − bτ = 0`, `Aᵀy + z − cτ = 0`, `b·y − c·x − κ = 0` with `x, z ∈ K`,
//! `τ, κ ≥ 0` along the central path `x ∘ z = μe`, `τκ = μ`. Search
//! directions use the HKM linearization `dX + sym(X dZ Z⁻¹) = σμZ⁻¹ − X`.
//! An iterate with `τ → 0` yields an infeasibility certificate.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::standard::StandardForm;
use super::SolverOptions;
use crate::hermitian::{HermitianMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RawStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Failure,
}

pub(crate) struct RawSolution {
    pub status: RawStatus,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

/// One interior-point iteration, recorded when tracing is enabled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
    pub tau: f64,
    pub kappa: f64,
    pub step: f64,
}

struct Cones {
    n_lp: usize,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    n: usize,
    degree: f64,
}

impl Cones {
    fn new(std: &StandardForm) -> Self {
        let mut offsets = Vec::with_capacity(std.herm_dims.len());
        let mut off = std.n_lp;
        for d in &std.herm_dims {
            offsets.push(off);
            off += d * d;
        }
        let degree = (std.n_lp + std.herm_dims.iter().sum::<usize>()) as f64;
        Self { n_lp: std.n_lp, dims: std.herm_dims.clone(), offsets, n: off, degree }
    }

    fn identity(&self) -> DVector<f64> {
        let mut e = DVector::zeros(self.n);
        e.rows_mut(0, self.n_lp).fill(1.0);
        for (&d, &off) in self.dims.iter().zip(&self.offsets) {
            for i in 0..d {
                e[off + i] = 1.0;
            }
        }
        e
    }

    fn block(&self, v: &DVector<f64>, k: usize) -> HermitianMatrix {
        let d = self.dims[k];
        HermitianMatrix::from_coords(d, v.rows(self.offsets[k], d * d).as_slice())
    }

    fn set_block(&self, v: &mut DVector<f64>, k: usize, m: &HermitianMatrix) {
        let d = self.dims[k];
        v.rows_mut(self.offsets[k], d * d).copy_from_slice(&m.to_coords());
    }

    /// Largest `α` with `x + α dx ∈ K` (infinite if unbounded).
    fn max_step(&self, x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.n_lp {
            if dx[i] < 0.0 {
                alpha = alpha.min(-x[i] / dx[i]);
            }
        }
        for k in 0..self.dims.len() {
            let xb = self.block(x, k);
            let db = self.block(dx, k);
            let Some(chol) = Cholesky::new(xb.matrix().clone()) else {
                return 0.0;
            };
            let l = chol.l();
            let Some(t) = l.solve_lower_triangular(db.matrix()) else {
                return 0.0;
            };
            let Some(w) = l.solve_lower_triangular(&t.adjoint()) else {
                return 0.0;
            };
            let lam = HermitianMatrix::from_matrix_unchecked(&w.adjoint()).min_eigenvalue();
            if lam < 0.0 {
                alpha = alpha.min(-1.0 / lam);
            }
        }
        alpha
    }
}

/// HKM scaling `H(V) = sym(X V Z⁻¹)` and the inverse `Z⁻¹`.
struct Scaling {
    lp: Vec<f64>,
    herm: Vec<DMatrix<f64>>,
    z_inv: Vec<DMatrix<C64>>,
    z_inv_vec: DVector<f64>,
}

impl Scaling {
    fn new(cones: &Cones, x: &DVector<f64>, z: &DVector<f64>) -> Option<Self> {
        let lp = (0..cones.n_lp).map(|i| x[i] / z[i]).collect();
        let mut z_inv_vec = DVector::zeros(cones.n);
        for i in 0..cones.n_lp {
            z_inv_vec[i] = 1.0 / z[i];
        }
        let mut herm = Vec::with_capacity(cones.dims.len());
        let mut z_inv = Vec::with_capacity(cones.dims.len());
        for k in 0..cones.dims.len() {
            let d = cones.dims[k];
            let xm = cones.block(x, k).into_matrix();
            let zi = Cholesky::new(cones.block(z, k).into_matrix())?.inverse();
            let zi_h = HermitianMatrix::from_matrix_unchecked(&zi);
            cones.set_block(&mut z_inv_vec, k, &zi_h);
            let mut h = DMatrix::zeros(d * d, d * d);
            for c in 0..d * d {
                let e = HermitianMatrix::basis_element(d, c);
                let xez = &xm * e.matrix() * &zi;
                let col = HermitianMatrix::from_matrix_unchecked(&xez).to_coords();
                for (r, v) in col.into_iter().enumerate() {
                    h[(r, c)] = v;
                }
            }
            // H is symmetric in exact arithmetic.
            let h = (&h + h.transpose()) * 0.5;
            herm.push(h);
            z_inv.push(zi);
        }
        Some(Self { lp, herm, z_inv, z_inv_vec })
    }

    fn apply(&self, cones: &Cones, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(cones.n);
        for i in 0..cones.n_lp {
            out[i] = self.lp[i] * v[i];
        }
        for (k, h) in self.herm.iter().enumerate() {
            let d = cones.dims[k];
            let off = cones.offsets[k];
            out.rows_mut(off, d * d).copy_from(&(h * v.rows(off, d * d)));
        }
        out
    }

    /// `A H Aᵀ`.
    fn schur(&self, cones: &Cones, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut ah = DMatrix::zeros(a.nrows(), a.ncols());
        for i in 0..cones.n_lp {
            ah.column_mut(i).copy_from(&(a.column(i) * self.lp[i]));
        }
        for (k, h) in self.herm.iter().enumerate() {
            let d = cones.dims[k];
            let off = cones.offsets[k];
            let cols = a.columns(off, d * d) * h;
            ah.columns_mut(off, d * d).copy_from(&cols);
        }
        let m = &ah * a.transpose();
        (&m + m.transpose()) * 0.5
    }

    /// Second-order correction `sym(dX dZ Z⁻¹)` (and `dx∘dz/z` on the orthant).
    fn correction(&self, cones: &Cones, z: &DVector<f64>, dx: &DVector<f64>, dz: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(cones.n);
        for i in 0..cones.n_lp {
            out[i] = dx[i] * dz[i] / z[i];
        }
        for k in 0..cones.dims.len() {
            let prod = cones.block(dx, k).matrix() * cones.block(dz, k).matrix() * &self.z_inv[k];
            cones.set_block(&mut out, k, &HermitianMatrix::from_matrix_unchecked(&prod));
        }
        out
    }
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    dz: DVector<f64>,
    dtau: f64,
    dkappa: f64,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

pub(crate) fn solve_standard(std: &StandardForm, opts: &SolverOptions) -> RawSolution {
    let cones = Cones::new(std);
    let (a, b, c) = (&std.a, &std.b, &std.c);
    let m = a.nrows();
    let mut x = cones.identity();
    let mut z = cones.identity();
    let mut y = DVector::zeros(m);
    let (mut tau, mut kappa) = (1.0f64, 1.0f64);
    let mut trace = Vec::new();

    if std.inconsistent {
        return RawSolution { status: RawStatus::PrimalInfeasible, x, y, iterations: 0, trace };
    }

    let bnorm = 1.0 + inf_norm(b);
    let cnorm = 1.0 + inf_norm(c);
    let mut step = 0.0;
    let mut iterations = 0;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let ax = a * &x;
        let aty = a.transpose() * &y;
        let rp = &ax - b * tau;
        let rd = &aty + &z - c * tau;
        let by = b.dot(&y);
        let cx = c.dot(&x);
        let rg = by - cx - kappa;
        let mu = (x.dot(&z) + tau * kappa) / (cones.degree + 1.0);

        let pres = inf_norm(&rp) / tau / bnorm;
        let dres = inf_norm(&rd) / tau / cnorm;
        let (pobj, dobj) = (cx / tau, by / tau);
        if opts.trace {
            trace.push(IterationRecord {
                iteration: iter,
                primal_objective: pobj,
                dual_objective: dobj,
                primal_residual: pres,
                dual_residual: dres,
                mu,
                tau,
                kappa,
                step,
            });
        }
        if !mu.is_finite() || !tau.is_finite() {
            break;
        }
        if pres <= opts.tol_feas && dres <= opts.tol_feas && (pobj - dobj).abs() <= opts.tol_gap * (1.0 + pobj.abs()) {
            return RawSolution { status: RawStatus::Optimal, x: x / tau, y: y / tau, iterations: iter, trace };
        }
        // Certificates: Aᵀy + z ≈ 0 with b·y > 0, or A x ≈ 0 with c·x < 0.
        if by > 0.0 && inf_norm(&(&aty + &z)) <= opts.tol_infeasible * by {
            return RawSolution { status: RawStatus::PrimalInfeasible, x, y: y / by, iterations: iter, trace };
        }
        if cx < 0.0 && inf_norm(&ax) <= opts.tol_infeasible * (-cx) {
            return RawSolution { status: RawStatus::DualInfeasible, x: x / (-cx), y, iterations: iter, trace };
        }
        if iter == opts.max_iter {
            break;
        }

        let Some(scaling) = Scaling::new(&cones, &x, &z) else { break };
        let schur = scaling.schur(&cones, a);
        let Some(chol) = factor(schur) else { break };

        let hc = scaling.apply(&cones, c);
        let q = chol.solve(&(a * &hc + b));
        let ht_q = scaling.apply(&cones, &(a.transpose() * &q));
        let v = &ht_q - &hc;
        let denom = b.dot(&q) - c.dot(&v) + kappa / tau;

        let solve = |sigma: f64, corr: Option<(&DVector<f64>, f64)>| -> Direction {
            let eta = 1.0 - sigma;
            let r1 = &rp * -eta;
            let r2 = &rd * -eta;
            let r3 = -eta * rg;
            let mut r4 = &scaling.z_inv_vec * (sigma * mu) - &x;
            let mut r5 = sigma * mu - tau * kappa;
            if let Some((cx_corr, ctk)) = corr {
                r4 -= cx_corr;
                r5 -= ctk;
            }
            let hr2 = scaling.apply(&cones, &r2);
            let p = chol.solve(&(&r1 - a * &r4 + a * &hr2));
            let u = &r4 - &hr2 + scaling.apply(&cones, &(a.transpose() * &p));
            let dtau = (r3 - b.dot(&p) + c.dot(&u) + r5 / tau) / denom;
            let dy = &p + &q * dtau;
            let dx = &u + &v * dtau;
            let dz = &r2 - a.transpose() * &dy + c * dtau;
            let dkappa = (r5 - kappa * dtau) / tau;
            Direction { dx, dy, dz, dtau, dkappa }
        };

        let max_alpha = |d: &Direction| -> f64 {
            let mut alpha = cones.max_step(&x, &d.dx).min(cones.max_step(&z, &d.dz));
            if d.dtau < 0.0 {
                alpha = alpha.min(-tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                alpha = alpha.min(-kappa / d.dkappa);
            }
            alpha
        };

        let dir = if opts.predictor_corrector {
            let aff = solve(0.0, None);
            let alpha_aff = max_alpha(&aff).min(1.0);
            let mu_aff = ((&x + &aff.dx * alpha_aff).dot(&(&z + &aff.dz * alpha_aff))
                + (tau + alpha_aff * aff.dtau) * (kappa + alpha_aff * aff.dkappa))
                / (cones.degree + 1.0);
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            let corr = scaling.correction(&cones, &z, &aff.dx, &aff.dz);
            solve(sigma, Some((&corr, aff.dtau * aff.dkappa)))
        } else {
            solve(CENTERING, None)
        };

        step = (opts.step_fraction * max_alpha(&dir)).min(1.0);
        if !(step > 1e-12) {
            break;
        }
        x += &dir.dx * step;
        y += &dir.dy * step;
        z += &dir.dz * step;
        tau += dir.dtau * step;
        kappa += dir.dkappa * step;
    }

    let t = if tau > 0.0 { tau } else { 1.0 };
    RawSolution { status: RawStatus::Failure, x: x / t, y: y / t, iterations, trace }
}

/// Fixed centering parameter used without predictor-corrector.
const CENTERING: f64 = 0.1;

fn factor(m: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let n = m.nrows();
    if n == 0 {
        return Cholesky::new(m);
    }
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0f64, f64::max).max(1e-300);
    let mut reg = 1e-14 * scale;
    for _ in 0..6 {
        let mut mm = m.clone();
        for i in 0..n {
            mm[(i, i)] += reg;
        }
        if let Some(c) = Cholesky::new(mm) {
            return Some(c);
        }
        reg *= 100.0;
    }
    None
}
