//! Instruments as lists of Choi matrices.
//!
//! Convention: `Choi(Λ) = Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)` with the input factor
//! first. Then `Λ(ρ) = tr_in[(ρ^T ⊗ 1) Choi]` and
//! `Λ†(N) = (tr_out[(1 ⊗ N) Choi])^T`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hermitian::{HermitianMatrix, C64};
use crate::linmap::HermMap;

use super::OBJECT_TOL;

#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    dim_in: usize,
    dim_out: usize,
    choi: Vec<HermitianMatrix>,
}

/// Choi matrix of a Hermiticity-preserving map given on Hermitian inputs.
pub fn choi_of(dim_in: usize, dim_out: usize, f: impl Fn(&HermitianMatrix) -> HermitianMatrix) -> HermitianMatrix {
    let n = dim_in * dim_out;
    let mut choi = DMatrix::<C64>::zeros(n, n);
    let i_unit = C64::new(0.0, 1.0);
    for i in 0..dim_in {
        for j in 0..dim_in {
            // |i⟩⟨j| = (H1 − i·H2)/2 with H1 = E_ij + E_ji and H2 = i(E_ij − E_ji).
            let image: DMatrix<C64> = if i == j {
                f(&HermitianMatrix::basis_projector(dim_in, i)).into_matrix()
            } else {
                let mut h1 = DMatrix::<C64>::zeros(dim_in, dim_in);
                h1[(i, j)] = C64::new(1.0, 0.0);
                h1[(j, i)] = C64::new(1.0, 0.0);
                let mut h2 = DMatrix::<C64>::zeros(dim_in, dim_in);
                h2[(i, j)] = i_unit;
                h2[(j, i)] = -i_unit;
                let a = f(&HermitianMatrix::from_matrix_unchecked(&h1)).into_matrix();
                let b = f(&HermitianMatrix::from_matrix_unchecked(&h2)).into_matrix();
                (a - b * i_unit) * C64::new(0.5, 0.0)
            };
            for r in 0..dim_out {
                for c in 0..dim_out {
                    choi[(i * dim_out + r, j * dim_out + c)] = image[(r, c)];
                }
            }
        }
    }
    HermitianMatrix::from_matrix_unchecked(&choi)
}

fn apply_choi(choi: &HermitianMatrix, dim_in: usize, dim_out: usize, rho: &HermitianMatrix) -> HermitianMatrix {
    let c = choi.matrix();
    let r = rho.matrix();
    let out = DMatrix::from_fn(dim_out, dim_out, |p, q| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..dim_in {
            for j in 0..dim_in {
                acc += r[(i, j)] * c[(i * dim_out + p, j * dim_out + q)];
            }
        }
        acc
    });
    HermitianMatrix::from_matrix_unchecked(&out)
}

fn adjoint_choi(choi: &HermitianMatrix, dim_in: usize, dim_out: usize, n: &HermitianMatrix) -> HermitianMatrix {
    let c = choi.matrix();
    let nm = n.matrix();
    // (tr_out[(1 ⊗ N) C])_{ij} = Σ_pq N_pq C_{(i,q),(j,p)}; then transpose.
    let out = DMatrix::from_fn(dim_in, dim_in, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..dim_out {
            for q in 0..dim_out {
                acc += nm[(p, q)] * c[(j * dim_out + q, i * dim_out + p)];
            }
        }
        acc
    });
    HermitianMatrix::from_matrix_unchecked(&out)
}

/// `1 − Σ_a Λ_a†(1)` for a list of subchannels.
fn deficit(choi: &[HermitianMatrix], dim_in: usize, dim_out: usize) -> HermitianMatrix {
    let id_out = HermitianMatrix::identity(dim_out);
    let mut d = HermitianMatrix::identity(dim_in);
    for c in choi {
        d = &d - &adjoint_choi(c, dim_in, dim_out, &id_out);
    }
    d
}

impl Instrument {
    pub fn new(dim_in: usize, dim_out: usize, choi: Vec<HermitianMatrix>) -> Result<Self> {
        if choi.is_empty() {
            return Err(Error::InvalidSize("an instrument needs at least one subchannel".into()));
        }
        for (a, c) in choi.iter().enumerate() {
            if c.dim() != dim_in * dim_out {
                return Err(Error::DimensionMismatch(dim_in * dim_out, c.dim()));
            }
            let min = c.min_eigenvalue();
            if min < -OBJECT_TOL * (1.0 + c.max_abs_entry()) {
                return Err(Error::NotPsd { what: format!("Choi matrix of subchannel {a}"), min_eigenvalue: min });
            }
        }
        let deviation = deficit(&choi, dim_in, dim_out).max_abs_entry();
        if deviation > OBJECT_TOL {
            return Err(Error::NotNormalized { what: "instrument is not trace preserving".into(), deviation });
        }
        Ok(Self { dim_in, dim_out, choi })
    }

    /// Builds from subchannels given as functions on Hermitian inputs.
    pub fn from_fns(dim_in: usize, dim_out: usize, maps: &[&dyn Fn(&HermitianMatrix) -> HermitianMatrix]) -> Result<Self> {
        Self::new(dim_in, dim_out, maps.iter().map(|f| choi_of(dim_in, dim_out, f)).collect())
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn num_outcomes(&self) -> usize {
        self.choi.len()
    }

    pub fn choi(&self) -> &[HermitianMatrix] {
        &self.choi
    }

    /// `Λ_a(ρ)`.
    pub fn apply(&self, a: usize, rho: &HermitianMatrix) -> HermitianMatrix {
        apply_choi(&self.choi[a], self.dim_in, self.dim_out, rho)
    }

    /// `Λ_a†(N)`.
    pub fn adjoint(&self, a: usize, n: &HermitianMatrix) -> HermitianMatrix {
        adjoint_choi(&self.choi[a], self.dim_in, self.dim_out, n)
    }

    /// `Λ_a` tabulated on Hermitian coordinates.
    pub fn subchannel_map(&self, a: usize) -> HermMap {
        HermMap::from_fn(self.dim_in, self.dim_out, |x| self.apply(a, x))
    }

    /// `{Λ_a(ρ)}_a`.
    pub fn ensemble_blocks(&self, rho: &HermitianMatrix) -> Vec<HermitianMatrix> {
        (0..self.num_outcomes()).map(|a| self.apply(a, rho)).collect()
    }

    /// Least-squares preimage `ρ` with `Λ_a(ρ) ≈ blocks[a]`, and the residual.
    pub fn preimage(&self, blocks: &[HermitianMatrix]) -> Result<(HermitianMatrix, f64)> {
        if blocks.len() != self.num_outcomes() {
            return Err(Error::ShapeMismatch(format!("{} blocks for {} subchannels", blocks.len(), self.num_outcomes())));
        }
        let (ni, no) = (self.dim_in * self.dim_in, self.dim_out * self.dim_out);
        let k = self.num_outcomes();
        let mut stacked = DMatrix::<f64>::zeros(k * no, ni);
        let mut rhs = nalgebra::DVector::<f64>::zeros(k * no);
        for a in 0..k {
            if blocks[a].dim() != self.dim_out {
                return Err(Error::DimensionMismatch(self.dim_out, blocks[a].dim()));
            }
            let m = self.subchannel_map(a);
            stacked.view_mut((a * no, 0), (no, ni)).copy_from(m.matrix());
            rhs.rows_mut(a * no, no).copy_from_slice(&blocks[a].to_coords());
        }
        let svd = stacked.clone().svd(true, true);
        let sol = svd.solve(&rhs, 1e-12).map_err(|e| Error::InvalidSize(e.to_string()))?;
        let residual = (&stacked * &sol - &rhs).amax();
        Ok((HermitianMatrix::from_coords(self.dim_in, sol.as_slice()), residual))
    }
}

/// Phase-estimation instrument `Λ_k(ρ) = U_k ρ U_k† / K` with
/// `U_k = diag(exp(2πi·k·j/K))_j`.
pub fn phase_instrument(dim: usize, num_phases: usize) -> Result<Instrument> {
    if dim < 2 || num_phases < 2 {
        return Err(Error::InvalidSize(format!("phase instrument needs d ≥ 2 and K ≥ 2, got ({dim}, {num_phases})")));
    }
    let choi = (0..num_phases)
        .map(|k| {
            let u = DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    let angle = 2.0 * std::f64::consts::PI * (k * j % num_phases) as f64 / num_phases as f64;
                    C64::from_polar(1.0, angle)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            choi_of(dim, dim, |rho| rho.conjugate_by(&u).scale(1.0 / num_phases as f64))
        })
        .collect();
    Instrument::new(dim, dim, choi)
}

/// Appends `Λ(ρ) = tr[(1 − Σ_a Λ_a†(1))ρ]·σ` so the subchannels become an instrument.
/// The completion is always appended, as the zero map if nothing is missing.
pub fn complete_instrument(dim_in: usize, dim_out: usize, mut subchannels: Vec<HermitianMatrix>, filler: &HermitianMatrix) -> Result<Instrument> {
    if filler.dim() != dim_out {
        return Err(Error::DimensionMismatch(dim_out, filler.dim()));
    }
    let d = deficit(&subchannels, dim_in, dim_out);
    let min = d.min_eigenvalue();
    if min < -OBJECT_TOL {
        return Err(Error::NotSubnormalized(min));
    }
    // Choi of ρ ↦ tr[Dρ]σ is D^T ⊗ σ.
    subchannels.push(d.transpose().kron(filler));
    Instrument::new(dim_in, dim_out, subchannels)
}
