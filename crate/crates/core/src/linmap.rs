//! Real-linear maps between spaces of Hermitian matrices, stored as real
//! matrices acting on orthonormal Hermitian coordinates. The adjoint with
//! respect to `Re tr[AB]` is the transpose.

use nalgebra::DMatrix;

use crate::hermitian::HermitianMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct HermMap {
    dim_in: usize,
    dim_out: usize,
    matrix: DMatrix<f64>,
}

impl HermMap {
    /// Tabulates a Hermiticity-preserving real-linear map on the basis.
    pub fn from_fn(dim_in: usize, dim_out: usize, f: impl Fn(&HermitianMatrix) -> HermitianMatrix) -> Self {
        let mut matrix = DMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
        for k in 0..dim_in * dim_in {
            let image = f(&HermitianMatrix::basis_element(dim_in, k));
            assert_eq!(image.dim(), dim_out, "map produced the wrong output dimension");
            for (r, v) in image.to_coords().into_iter().enumerate() {
                matrix[(r, k)] = v;
            }
        }
        Self { dim_in, dim_out, matrix }
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        Self { dim_in: dim, dim_out: dim, matrix: DMatrix::identity(dim * dim, dim * dim) * c }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    /// `X ↦ tr[X]·h`.
    pub fn trace_times(dim_in: usize, h: &HermitianMatrix) -> Self {
        let mut trace_row = HermitianMatrix::identity(dim_in).to_coords();
        trace_row.truncate(dim_in * dim_in);
        let col = h.to_coords();
        let matrix = DMatrix::from_fn(col.len(), trace_row.len(), |r, c| col[r] * trace_row[c]);
        Self { dim_in, dim_out: h.dim(), matrix }
    }

    /// `X ↦ tr[hX]` into a 1×1 block.
    pub fn functional(h: &HermitianMatrix) -> Self {
        let row = h.to_coords();
        Self { dim_in: h.dim(), dim_out: 1, matrix: DMatrix::from_row_slice(1, row.len(), &row) }
    }

    pub fn from_matrix(dim_in: usize, dim_out: usize, matrix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.shape(), (dim_out * dim_out, dim_in * dim_in), "map matrix has the wrong shape");
        Self { dim_in, dim_out, matrix }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(x.dim(), self.dim_in, "map input dimension mismatch");
        let v = nalgebra::DVector::from_vec(x.to_coords());
        let out = &self.matrix * v;
        HermitianMatrix::from_coords(self.dim_out, out.as_slice())
    }

    pub fn adjoint(&self) -> Self {
        Self { dim_in: self.dim_out, dim_out: self.dim_in, matrix: self.matrix.transpose() }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { matrix: &self.matrix * c, ..self.clone() }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Self {
        assert_eq!(inner.dim_out, self.dim_in, "composition dimension mismatch");
        Self { dim_in: inner.dim_in, dim_out: self.dim_out, matrix: &self.matrix * &inner.matrix }
    }
}
