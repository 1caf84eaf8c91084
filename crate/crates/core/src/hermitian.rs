//! Dense complex Hermitian matrices.
//!
//! Spectral routines run on the real symmetric embedding
//! `[[Re, -Im], [Im, Re]]` of size `2d`. Every eigenvalue of the Hermitian
//! matrix appears twice in the embedding, so the sorted real spectrum is
//! deduplicated by keeping every second value.
//!
//! Hermitian matrices also carry real coordinates in the orthonormal basis
//! `{E_ii} ∪ {(E_ij + E_ji)/√2} ∪ {i(E_ij - E_ji)/√2}` (i < j), so that
//! `Re tr[AB]` equals the Euclidean dot product of coordinate vectors.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative tolerance for the Hermiticity check.
pub const HERMITICITY_TOL: f64 = 1e-9;
/// Default relative tolerance for the PSD predicate.
pub const PSD_TOL: f64 = 1e-9;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// A square complex matrix whose entries are exactly Hermitian.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<C64>,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix(")?;
        for i in 0..self.dim() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.dim() {
                let z = self.data[(i, j)];
                write!(f, " {:.4}{:+.4}i", z.re, z.im)?;
            }
        }
        write!(f, ")")
    }
}

/// Validates that `m` is square and Hermitian within `tol·(1 + max|m|)` and
/// returns its exact symmetrization `(m + m†)/2`.
pub fn validate_hermitian(m: &DMatrix<C64>, tol: f64) -> Result<HermitianMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidSize("matrix dimension must be at least 1".into()));
    }
    let n = m.nrows();
    let mut scale = 0.0f64;
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(m[(i, j)].norm());
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if !dev.is_finite() || dev > tol * (1.0 + scale) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(HermitianMatrix::symmetrize(m))
}

/// `true` iff `λ_min(m) ≥ -tol·(1 + ‖m‖_∞)`.
pub fn is_psd(m: &HermitianMatrix, tol: f64) -> bool {
    let ev = m.eigenvalues();
    let norm = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    ev[0] >= -tol * (1.0 + norm)
}

/// Largest absolute eigenvalue.
pub fn operator_norm_inf(m: &HermitianMatrix) -> f64 {
    m.eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Hilbert-Schmidt inner product `tr[AB]`, real for Hermitian arguments.
pub fn hs_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.inner_unchecked(b))
}

impl HermitianMatrix {
    fn symmetrize(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut data = DMatrix::zeros(n, n);
        for i in 0..n {
            data[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                data[(i, j)] = z;
                data[(j, i)] = z.conj();
            }
        }
        Self { data }
    }

    /// Symmetrizes without checking; for matrices Hermitian up to rounding.
    pub fn from_matrix_unchecked(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        Self::symmetrize(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self { data: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { data: DMatrix::identity(dim, dim) }
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Builds from real and imaginary parts given row-major.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = re.len();
        if im.len() != n || re.iter().chain(im.iter()).any(|row| row.len() != n) {
            let cols = re.first().map_or(0, Vec::len);
            return Err(Error::NotSquare(n, cols));
        }
        let m = DMatrix::from_fn(n, n, |i, j| C64::new(re[i][j], im[i][j]));
        validate_hermitian(&m, tol)
    }

    /// Rank-one projector `|v⟩⟨v|` (not normalized).
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        let m = DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Self::symmetrize(&m)
    }

    /// Basis projector `|i⟩⟨i|`.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[(i, i)] = C64::new(1.0, 0.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { data: self.data.map(|z| z * c) }
    }

    /// `tr[AB]` without a dimension check.
    pub(crate) fn inner_unchecked(&self, other: &Self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.data[(i, j)];
                let b = other.data[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// `max_ij |A_ij − B_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    /// `U A U†` for a square (not necessarily unitary) `U`.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Self {
        Self::symmetrize(&(u * &self.data * u.adjoint()))
    }

    /// Entrywise complex conjugate, which equals the transpose for Hermitian matrices.
    pub fn transpose(&self) -> Self {
        Self { data: self.data.map(|z| z.conj()) }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self { data: self.data.kronecker(&other.data) }
    }

    /// Real symmetric embedding `[[Re, -Im], [Im, Re]]`.
    pub fn real_embedding(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let z = self.data[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        })
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.real_embedding());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals.into_iter().skip(1).step_by(2).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("dim >= 1")
    }

    /// Ascending eigenvalues with the unitary whose columns are matching eigenvectors.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<C64>) {
        let n = self.dim();
        let eig = SymmetricEigen::new(self.real_embedding());
        let mut order: Vec<usize> = (0..2 * n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        // Real eigenvectors (u, v) map to complex u + iv; each complex
        // eigenvector shows up twice (as w and iw), so keep those that stay
        // independent under complex Gram-Schmidt.
        let mut vals = Vec::with_capacity(n);
        let mut vecs: Vec<Vec<C64>> = Vec::with_capacity(n);
        for &k in &order {
            if vecs.len() == n {
                break;
            }
            let col = eig.eigenvectors.column(k);
            let mut w: Vec<C64> = (0..n).map(|i| C64::new(col[i], col[i + n])).collect();
            for q in &vecs {
                let proj: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= proj * qi;
                }
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.5 {
                w.iter_mut().for_each(|z| *z /= norm);
                vecs.push(w);
                vals.push(eig.eigenvalues[k]);
            }
        }
        let u = DMatrix::from_fn(n, n, |i, j| vecs[j][i]);
        (vals, u)
    }

    /// `f(A)` through the spectral decomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let (vals, u) = self.eigh();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| C64::new(f(v), 0.0)),
        ));
        Self::symmetrize(&(&u * d * u.adjoint()))
    }

    /// Projection onto the PSD cone (negative eigenvalues clamped to zero).
    pub fn psd_part(&self) -> Self {
        self.map_spectrum(|v| v.max(0.0))
    }

    /// Coordinates in the orthonormal Hermitian basis; length `d²`.
    pub fn to_coords(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            out.push(self.data[(i, i)].re);
        }
        let s = std::f64::consts::SQRT_2;
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(s * self.data[(i, j)].re);
                out.push(s * self.data[(i, j)].im);
            }
        }
        out
    }

    /// Inverse of [`HermitianMatrix::to_coords`].
    pub fn from_coords(dim: usize, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), dim * dim, "coordinate length must be dim²");
        let mut data = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            data[(i, i)] = C64::new(coords[i], 0.0);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut k = dim;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let z = C64::new(coords[k] * h, coords[k + 1] * h);
                data[(i, j)] = z;
                data[(j, i)] = z.conj();
                k += 2;
            }
        }
        Self { data }
    }

    /// The `k`-th orthonormal basis element.
    pub fn basis_element(dim: usize, k: usize) -> Self {
        let mut c = vec![0.0; dim * dim];
        c[k] = 1.0;
        Self::from_coords(dim, &c)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in addition");
        HermitianMatrix { data: &self.data + &rhs.data }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in subtraction");
        HermitianMatrix { data: &self.data - &rhs.data }
    }
}

impl AddAssign<&HermitianMatrix> for HermitianMatrix {
    fn add_assign(&mut self, rhs: &HermitianMatrix) {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in addition");
        self.data += &rhs.data;
    }
}

impl Mul<&HermitianMatrix> for f64 {
    type Output = HermitianMatrix;
    fn mul(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        rhs.scale(self)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

/// Pauli matrices and a few standard states.
pub mod paulis {
    use super::{HermitianMatrix, C64};
    use nalgebra::DMatrix;

    fn from(rows: [[C64; 2]; 2]) -> HermitianMatrix {
        HermitianMatrix::from_matrix_unchecked(&DMatrix::from_fn(2, 2, |i, j| rows[i][j]))
    }

    pub fn x() -> HermitianMatrix {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        from([[z, o], [o, z]])
    }

    pub fn y() -> HermitianMatrix {
        let (i, z) = (C64::new(0.0, 1.0), C64::new(0.0, 0.0));
        from([[z, -i], [i, z]])
    }

    pub fn z() -> HermitianMatrix {
        HermitianMatrix::from_diagonal(&[1.0, -1.0])
    }

    /// Projectors `(1 ± P)/2` for a Pauli matrix `P`, ordered `+` then `-`.
    pub fn eigenprojectors(p: &HermitianMatrix) -> [HermitianMatrix; 2] {
        let id = HermitianMatrix::identity(2);
        [(&id + p).scale(0.5), (&id - p).scale(0.5)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn validate_accepts_identity_and_pauli_y() {
        let id = DMatrix::<C64>::identity(2, 2);
        assert_eq!(validate_hermitian(&id, 1e-9).unwrap(), HermitianMatrix::identity(2));
        let y = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        assert_eq!(validate_hermitian(&y, 1e-9).unwrap().matrix(), &y);
    }

    #[test]
    fn validate_rejects_upper_triangular_and_rectangular() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(validate_hermitian(&m, 1e-9), Err(Error::NotHermitian(_))));
        let r = DMatrix::<C64>::zeros(2, 3);
        assert!(matches!(validate_hermitian(&r, 1e-9), Err(Error::NotSquare(2, 3))));
    }

    #[test]
    fn validate_symmetrizes_small_deviation() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 1e-12), c(0.5, 0.0), c(0.5 + 1e-12, 0.0), c(2.0, 0.0)]);
        let h = validate_hermitian(&m, 1e-9).unwrap();
        let dev = h.matrix() - h.matrix().adjoint();
        assert!(dev.iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn psd_predicate() {
        assert!(is_psd(&HermitianMatrix::identity(3), PSD_TOL));
        assert!(!is_psd(&HermitianMatrix::from_diagonal(&[1.0, -0.5]), PSD_TOL));
        assert!(!is_psd(&paulis::x(), PSD_TOL));
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm_inf(&HermitianMatrix::identity(3)), 1.0);
        assert!((operator_norm_inf(&HermitianMatrix::from_diagonal(&[2.0, -3.0])) - 3.0).abs() < 1e-14);
        assert!((operator_norm_inf(&paulis::z().scale(0.7)) - 0.7).abs() < 1e-14);
    }

    #[test]
    fn hs_inner_examples() {
        let id = HermitianMatrix::identity(2);
        assert_eq!(hs_inner(&id, &id).unwrap(), 2.0);
        assert_eq!(hs_inner(&paulis::z(), &paulis::x()).unwrap(), 0.0);
        let rho = HermitianMatrix::from_parts(&[vec![0.3, 0.2], vec![0.2, 0.7]], &[vec![0.0, 0.1], vec![-0.1, 0.0]], 1e-9).unwrap();
        assert!((hs_inner(&HermitianMatrix::basis_projector(2, 0), &rho).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(hs_inner(&id, &HermitianMatrix::identity(3)), Err(Error::DimensionMismatch(2, 3))));
    }

    #[test]
    fn eigh_reconstructs_with_degenerate_spectrum() {
        let m = HermitianMatrix::identity(3);
        let (vals, u) = m.eigh();
        assert_eq!(vals.len(), 3);
        assert!((&u.adjoint() * &u - DMatrix::<C64>::identity(3, 3)).norm() < 1e-12);
        let y = paulis::y();
        let (vals, u) = y.eigh();
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        let back = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(vals[0], 0.0), c(vals[1], 0.0)])) * u.adjoint();
        assert!((back - y.matrix()).norm() < 1e-12);
    }

    fn arb_herm(n: usize) -> impl Strategy<Value = HermitianMatrix> {
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |c| HermitianMatrix::from_coords(n, &c))
    }

    fn arb_psd(n: usize) -> impl Strategy<Value = HermitianMatrix> {
        proptest::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |v| {
            let g = DMatrix::from_fn(n, n, |i, j| C64::new(v[i * n + j], v[n * n + i * n + j]));
            HermitianMatrix::from_matrix_unchecked(&(&g * g.adjoint()))
        })
    }

    proptest! {
        #[test]
        fn coords_round_trip_and_inner_product(a in arb_herm(3), b in arb_herm(3)) {
            let back = HermitianMatrix::from_coords(3, &a.to_coords());
            prop_assert!(back.max_abs_diff(&a) < 1e-14);
            let dot: f64 = a.to_coords().iter().zip(b.to_coords()).map(|(x, y)| x * y).sum();
            prop_assert!((dot - hs_inner(&a, &b).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn hs_inner_is_symmetric(a in arb_herm(3), b in arb_herm(3)) {
            prop_assert!((hs_inner(&a, &b).unwrap() - hs_inner(&b, &a).unwrap()).abs() < 1e-14);
        }

        #[test]
        fn psd_sum_is_psd(a in arb_psd(3), b in arb_psd(3)) {
            prop_assert!(is_psd(&a, PSD_TOL) && is_psd(&b, PSD_TOL));
            prop_assert!(is_psd(&(&a + &b), PSD_TOL));
        }

        #[test]
        fn norm_is_absolutely_homogeneous(a in arb_herm(3), c in -5.0f64..5.0) {
            let lhs = operator_norm_inf(&a.scale(c));
            prop_assert!((lhs - c.abs() * operator_norm_inf(&a)).abs() < 1e-12 * (1.0 + lhs));
        }

        #[test]
        fn spectrum_matches_nalgebra_complex_route(a in arb_herm(3)) {
            let ours = a.eigenvalues();
            let mut theirs: Vec<f64> = SymmetricEigen::new(a.matrix().clone()).eigenvalues.iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (x, y) in ours.iter().zip(&theirs) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }
}
