//! Shared test helpers: random objects built straight from nalgebra, and the
//! first-order oracle.
#![allow(dead_code)]

pub mod oracle;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use qrobust_core::hermitian::paulis;
use qrobust_core::{HermitianMatrix, MeasurementAssemblage, Povm, StateAssemblage};

pub use oracle::CMat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn herm(m: &CMat) -> HermitianMatrix {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianMatrix::from_matrix_unchecked(&h)
}

pub fn cmat(h: &HermitianMatrix) -> CMat {
    h.matrix().clone()
}

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMat {
    ginibre(rng, d, d).qr().q()
}

/// Density matrix of rank `rank` (Wishart with unit trace).
pub fn random_state(rng: &mut impl Rng, d: usize, rank: usize) -> CMat {
    let g = ginibre(rng, d, rank);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    w / Complex64::new(tr, 0.0)
}

fn inverse_sqrt(m: &CMat) -> CMat {
    let eig = m.clone().symmetric_eigen();
    let d = m.nrows();
    let mut out = CMat::zeros(d, d);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        let u = eig.eigenvectors.column(k);
        out += (u * u.adjoint()) * Complex64::new(1.0 / l.sqrt(), 0.0);
    }
    out
}

/// Full-rank POVM: `S^{-1/2} W_a S^{-1/2}` for Wishart `W_a`, `S = Σ W_a`.
pub fn random_povm(rng: &mut impl Rng, d: usize, n: usize) -> Vec<CMat> {
    let ws: Vec<CMat> = (0..n)
        .map(|_| {
            let g = ginibre(rng, d, d);
            &g * g.adjoint()
        })
        .collect();
    let total = ws.iter().fold(CMat::zeros(d, d), |acc, w| acc + w);
    let s = inverse_sqrt(&total);
    ws.iter().map(|w| &s * w * &s).collect()
}

/// Rank-one projective measurement in a random basis.
pub fn random_pvm(rng: &mut impl Rng, d: usize) -> Vec<CMat> {
    let u = random_unitary(rng, d);
    (0..d)
        .map(|k| {
            let c = u.column(k);
            c * c.adjoint()
        })
        .collect()
}

pub fn povm(effects: &[CMat]) -> Povm {
    Povm::new(effects.iter().map(herm).collect()).expect("valid POVM")
}

pub fn assemblage(settings: &[Vec<CMat>]) -> MeasurementAssemblage {
    MeasurementAssemblage::new(settings.iter().map(|s| povm(s)).collect()).expect("valid assemblage")
}

pub fn rows_of(m: &MeasurementAssemblage) -> Vec<Vec<CMat>> {
    m.settings().iter().map(|p| p.effects().iter().map(cmat).collect()).collect()
}

pub fn state_rows(s: &StateAssemblage) -> Vec<Vec<CMat>> {
    s.rows().iter().map(|r| r.iter().map(cmat).collect()).collect()
}

pub fn pvm_of(p: &HermitianMatrix) -> Povm {
    Povm::new(paulis::eigenprojectors(p).to_vec()).unwrap()
}

pub fn xz() -> MeasurementAssemblage {
    MeasurementAssemblage::new(vec![pvm_of(&paulis::x()), pvm_of(&paulis::z())]).unwrap()
}

/// `v|Φ⁺⟩⟨Φ⁺| + (1 − v)·1/4`.
pub fn werner(v: f64) -> HermitianMatrix {
    let s = 0.5f64.sqrt();
    let z = Complex64::new(0.0, 0.0);
    let phi = HermitianMatrix::outer(&[Complex64::new(s, 0.0), z, z, Complex64::new(s, 0.0)]);
    &phi.scale(v) + &HermitianMatrix::identity(4).scale((1.0 - v) / 4.0)
}

pub fn werner_xz(v: f64) -> StateAssemblage {
    StateAssemblage::from_bipartite(&werner(v), &xz()).unwrap()
}

/// Two noisy qubit PVMs along random Bloch directions.
pub fn random_qubit_pair(rng: &mut impl Rng) -> MeasurementAssemblage {
    let settings: Vec<Vec<CMat>> = (0..2).map(|_| random_pvm(rng, 2)).collect();
    let eta: f64 = rng.random_range(0.85..1.0);
    let id = CMat::identity(2, 2) * Complex64::new(0.5 * (1.0 - eta), 0.0);
    let noisy: Vec<Vec<CMat>> =
        settings.iter().map(|s| s.iter().map(|e| e * Complex64::new(eta, 0.0) + &id).collect()).collect();
    assemblage(&noisy)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
