//! First-order reference solver: ADMM on a real vectorized conic program,
//! alternating between an affine projection and a cone projection.
//! Shares no code with the interior-point solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug)]
pub enum Cone {
    Free(usize),
    Nonneg(usize),
    /// Complex Hermitian d×d in d² orthonormal real coordinates.
    Psd(usize),
}

impl Cone {
    fn len(self) -> usize {
        match self {
            Cone::Free(n) | Cone::Nonneg(n) => n,
            Cone::Psd(d) => d * d,
        }
    }
}

/// `min cᵀx  s.t.  Ax = b,  x ∈ K`.
#[derive(Default)]
pub struct Problem {
    cones: Vec<(Cone, usize)>,
    n: usize,
    rows: Vec<(Vec<(usize, f64)>, f64)>,
    c: Vec<(usize, f64)>,
}

pub fn coords(m: &CMat) -> Vec<f64> {
    let d = m.nrows();
    let r2 = std::f64::consts::SQRT_2;
    let mut v: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    for i in 0..d {
        for j in i + 1..d {
            v.push(r2 * m[(i, j)].re);
            v.push(r2 * m[(i, j)].im);
        }
    }
    v
}

pub fn from_coords(d: usize, v: &[f64]) -> CMat {
    let r2 = std::f64::consts::SQRT_2;
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(v[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = Complex64::new(v[k] / r2, v[k + 1] / r2);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

fn project_psd(d: usize, v: &mut [f64]) {
    let m = from_coords(d, v);
    let eig = m.symmetric_eigen();
    let mut out = CMat::zeros(d, d);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 0.0 {
            let u = eig.eigenvectors.column(k);
            out += (u * u.adjoint()) * Complex64::new(l, 0.0);
        }
    }
    v.copy_from_slice(&coords(&out));
}

impl Problem {
    pub fn var(&mut self, cone: Cone) -> usize {
        let off = self.n;
        self.cones.push((cone, off));
        self.n += cone.len();
        off
    }

    pub fn objective(&mut self, idx: usize, coef: f64) {
        self.c.push((idx, coef));
    }

    /// Adds the Hermitian equation `Σ terms = rhs`, one row per real coordinate.
    pub fn hermitian_eq(&mut self, rhs: &CMat, terms: &[Term]) {
        let d = rhs.nrows();
        let b = coords(rhs);
        for k in 0..d * d {
            let mut row = Vec::new();
            for t in terms {
                match t {
                    Term::Block(off, coef) => row.push((off + k, *coef)),
                    Term::Scalar(idx, m) => row.push((*idx, coords(m)[k])),
                }
            }
            self.rows.push((row, b[k]));
        }
    }

    pub fn scalar_eq(&mut self, row: Vec<(usize, f64)>, rhs: f64) {
        self.rows.push((row, rhs));
    }

    /// Trace functional of a Psd block starting at `off`.
    pub fn trace_terms(off: usize, d: usize, coef: f64) -> Vec<(usize, f64)> {
        (0..d).map(|i| (off + i, coef)).collect()
    }

    pub fn minimize(&self) -> f64 {
        let (m, n) = (self.rows.len(), self.n);
        let mut a = DMatrix::<f64>::zeros(m, n);
        let mut b = DVector::<f64>::zeros(m);
        for (r, (row, rhs)) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                a[(r, j)] += v;
            }
            b[r] = *rhs;
        }
        let mut c = DVector::<f64>::zeros(n);
        for &(j, v) in &self.c {
            c[j] += v;
        }
        let pinv = (&a * a.transpose()).pseudo_inverse(1e-12).expect("pseudo-inverse");
        let back = a.transpose() * pinv;
        let affine = |v: DVector<f64>| -> DVector<f64> {
            let r = &a * &v - &b;
            v - &back * r
        };
        let cone = |v: &mut DVector<f64>| {
            for &(k, off) in &self.cones {
                match k {
                    Cone::Free(_) => {}
                    Cone::Nonneg(len) => {
                        for i in off..off + len {
                            v[i] = v[i].max(0.0);
                        }
                    }
                    Cone::Psd(d) => project_psd(d, &mut v.as_mut_slice()[off..off + d * d]),
                }
            }
        };

        let mut rho = 1.0;
        let mut z = DVector::<f64>::zeros(n);
        let mut u = DVector::<f64>::zeros(n);
        let mut x = z.clone();
        for it in 0..400_000 {
            x = affine(&z - &u - &c / rho);
            let z_old = z.clone();
            z = &x + &u;
            cone(&mut z);
            u += &x - &z;
            let r = (&x - &z).norm();
            let s = rho * (&z - &z_old).norm();
            if r < 1e-11 && s < 1e-11 {
                break;
            }
            if it % 50 == 49 {
                if r > 10.0 * s {
                    rho *= 2.0;
                    u /= 2.0;
                } else if s > 10.0 * r {
                    rho /= 2.0;
                    u *= 2.0;
                }
            }
        }
        c.dot(&x)
    }
}

pub enum Term<'a> {
    /// A Psd variable block with a scalar coefficient.
    Block(usize, f64),
    /// A scalar variable times a fixed matrix.
    Scalar(usize, &'a CMat),
}

fn strategies(na: usize, nx: usize) -> Vec<Vec<usize>> {
    let total = na.pow(nx as u32);
    (0..total)
        .map(|mut k| {
            (0..nx)
                .map(|_| {
                    let a = k % na;
                    k /= na;
                    a
                })
                .collect()
        })
        .collect()
}

/// Generalized robustness against a free set whose unnormalized cone is
/// `{Σ_λ D(a|x,λ) G_λ}` with `G_λ ⪰ 0`; `trace_norm` selects `tr Σ G_λ = s`
/// (state assemblages) over `Σ G_λ = s·1` (measurements).
fn hidden_variable_robustness(rows: &[Vec<CMat>], trace_norm: bool) -> f64 {
    let nx = rows.len();
    let na = rows[0].len();
    let d = rows[0][0].nrows();
    let lambdas = strategies(na, nx);
    let mut p = Problem::default();
    let s = p.var(Cone::Free(1));
    p.objective(s, 1.0);
    let g: Vec<usize> = lambdas.iter().map(|_| p.var(Cone::Psd(d))).collect();
    for x in 0..nx {
        for a in 0..na {
            let slack = p.var(Cone::Psd(d));
            let mut terms: Vec<Term> = lambdas.iter().zip(&g).filter(|(l, _)| l[x] == a).map(|(_, &o)| Term::Block(o, 1.0)).collect();
            terms.push(Term::Block(slack, -1.0));
            p.hermitian_eq(&rows[x][a], &terms);
        }
    }
    let id = CMat::identity(d, d);
    let zero = CMat::zeros(d, d);
    if trace_norm {
        let mut row: Vec<(usize, f64)> = g.iter().flat_map(|&o| Problem::trace_terms(o, d, 1.0)).collect();
        row.push((s, -1.0));
        p.scalar_eq(row, 0.0);
    } else {
        let mut terms: Vec<Term> = g.iter().map(|&o| Term::Block(o, 1.0)).collect();
        let neg = -&id;
        terms.push(Term::Scalar(s, &neg));
        p.hermitian_eq(&zero, &terms);
    }
    p.minimize() - 1.0
}

/// Incompatibility robustness; `rows[x][a] = M_{a|x}`.
pub fn jm_robustness(rows: &[Vec<CMat>]) -> f64 {
    hidden_variable_robustness(rows, false)
}

/// Steering robustness; `rows[x][a] = σ_{a|x}`.
pub fn lhs_robustness(rows: &[Vec<CMat>]) -> f64 {
    hidden_variable_robustness(rows, true)
}

/// Robustness against the convex hull of normalized generators; blocks flattened alike.
pub fn generated_robustness(blocks: &[CMat], generators: &[Vec<CMat>]) -> f64 {
    let d = blocks[0].nrows();
    let mut p = Problem::default();
    let s = p.var(Cone::Free(1));
    p.objective(s, 1.0);
    let c = p.var(Cone::Nonneg(generators.len()));
    for (i, b) in blocks.iter().enumerate() {
        let slack = p.var(Cone::Psd(d));
        let mut terms: Vec<Term> = generators.iter().enumerate().map(|(k, g)| Term::Scalar(c + k, &g[i])).collect();
        terms.push(Term::Block(slack, -1.0));
        p.hermitian_eq(b, &terms);
    }
    let mut row: Vec<(usize, f64)> = (0..generators.len()).map(|k| (c + k, 1.0)).collect();
    row.push((s, -1.0));
    p.scalar_eq(row, 0.0);
    p.minimize() - 1.0
}

/// Robustness of coherence of a density matrix.
pub fn coherence_robustness(rho: &CMat) -> f64 {
    let d = rho.nrows();
    let mut p = Problem::default();
    let s = p.var(Cone::Free(1));
    p.objective(s, 1.0);
    let g = p.var(Cone::Nonneg(d));
    let slack = p.var(Cone::Psd(d));
    let projectors: Vec<CMat> = (0..d)
        .map(|i| {
            let mut m = CMat::zeros(d, d);
            m[(i, i)] = Complex64::new(1.0, 0.0);
            m
        })
        .collect();
    let mut terms: Vec<Term> = projectors.iter().enumerate().map(|(i, m)| Term::Scalar(g + i, m)).collect();
    terms.push(Term::Block(slack, -1.0));
    p.hermitian_eq(rho, &terms);
    let mut row: Vec<(usize, f64)> = (0..d).map(|i| (g + i, 1.0)).collect();
    row.push((s, -1.0));
    p.scalar_eq(row, 0.0);
    p.minimize() - 1.0
}

/// Smallest visibility in `[lo, hi]` at which `robustness(v) > tol`, by bisection.
pub fn threshold(mut lo: f64, mut hi: f64, tol: f64, robustness: impl Fn(f64) -> f64) -> f64 {
    while hi - lo > 1e-5 {
        let mid = 0.5 * (lo + hi);
        if robustness(mid) > tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
