//! Benchmark instances.

use qrobust_core::hermitian::paulis;
use qrobust_core::{HermitianMatrix, MeasurementAssemblage, Povm, StateAssemblage, C64};

pub fn pvm(p: &HermitianMatrix) -> Povm {
    Povm::new(paulis::eigenprojectors(p).to_vec()).unwrap()
}

pub fn xz() -> MeasurementAssemblage {
    MeasurementAssemblage::new(vec![pvm(&paulis::x()), pvm(&paulis::z())]).unwrap()
}

pub fn xyz() -> MeasurementAssemblage {
    MeasurementAssemblage::new(vec![pvm(&paulis::x()), pvm(&paulis::y()), pvm(&paulis::z())]).unwrap()
}

/// Qutrit measurements in the computational and Fourier bases.
pub fn qutrit_mub() -> MeasurementAssemblage {
    let w = 2.0 * std::f64::consts::PI / 3.0;
    let s = 1.0 / 3f64.sqrt();
    let fourier = (0..3)
        .map(|k| HermitianMatrix::outer(&(0..3).map(|j| C64::from_polar(s, w * (j * k) as f64)).collect::<Vec<_>>()))
        .collect();
    MeasurementAssemblage::new(vec![Povm::computational(3), Povm::new(fourier).unwrap()]).unwrap()
}

pub fn werner_xz(v: f64) -> StateAssemblage {
    let s = 0.5f64.sqrt();
    let z = C64::new(0.0, 0.0);
    let phi = HermitianMatrix::outer(&[C64::new(s, 0.0), z, z, C64::new(s, 0.0)]);
    let state = &phi.scale(v) + &HermitianMatrix::identity(4).scale((1.0 - v) / 4.0);
    StateAssemblage::from_bipartite(&state, &xz()).unwrap()
}
