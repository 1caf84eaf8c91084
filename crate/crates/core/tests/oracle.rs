mod common;

use common::oracle::{coherence_robustness, jm_robustness, lhs_robustness};
use common::*;
use num_complex::Complex64;

#[test]
fn oracle_matches_closed_forms() {
    let xz = jm_robustness(&rows_of(&xz()));
    assert!(close(xz, (2f64.sqrt() - 1.0).powi(2), 1e-7), "{xz}");

    let plus = CMat::from_element(2, 2, Complex64::new(0.5, 0.0));
    assert!(close(coherence_robustness(&plus), 1.0, 1e-7));

    // Qubit robustness of coherence equals the l1 coherence 2|ρ01|.
    let mut r = rng(3);
    for _ in 0..5 {
        let rho = random_state(&mut r, 2, 2);
        let t = coherence_robustness(&rho);
        assert!(close(t, 2.0 * rho[(0, 1)].norm(), 1e-7), "{t}");
    }

    assert!(lhs_robustness(&state_rows(&werner_xz(0.5))) < 1e-7);
    assert!(lhs_robustness(&state_rows(&werner_xz(0.9))) > 0.1);
}
