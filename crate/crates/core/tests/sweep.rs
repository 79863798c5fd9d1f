use ewspec_core::hamiltonian::{doublet_spectrum, eigen_sweep, ModelKind, ModelParams};
use ewspec_core::operators::{Deformation, HilbertLayout};

#[test]
fn deformed_sweep_matches_doublet_assembly() {
    let base = ModelParams::new(1.0, 0.97, 0.0, Deformation::LinearKerr { chi: 0.01 }).unwrap();
    let couplings: Vec<f64> = (0..=12).map(|i| 0.05 * i as f64).collect();
    let k = 21;
    let sweep = eigen_sweep(ModelKind::Djc, &base, &couplings, &HilbertLayout::new(16).unwrap(), k).unwrap();
    for (om, levels) in couplings.iter().zip(&sweep.levels) {
        let p = base.with_omega0(*om);
        let mut assembled = doublet_spectrum(&p, 40).unwrap();
        assembled.truncate(k);
        for (a, b) in levels.iter().zip(&assembled) {
            assert!((a - b).abs() <= 1e-10, "Ω₀={om}: {a} vs {b}");
        }
    }
}

#[test]
fn rabi_sweep_converges_and_stays_ordered() {
    let p = ModelParams::new(1.0, 1.0, 0.0, Deformation::Identity).unwrap();
    let couplings: Vec<f64> = (0..=8).map(|i| 0.075 * i as f64).collect();
    let sweep = eigen_sweep(ModelKind::Rabi, &p, &couplings, &HilbertLayout::new(8).unwrap(), 6).unwrap();
    for levels in &sweep.levels {
        assert!(levels.windows(2).all(|w| w[0] <= w[1]));
    }
    // Bloch–Siegert: the Rabi ground state lies below the JC ground state.
    let jc = eigen_sweep(ModelKind::Jc, &p, &couplings, &HilbertLayout::new(8).unwrap(), 6).unwrap();
    for (r, j) in sweep.levels.iter().zip(&jc.levels).skip(1) {
        assert!(r[0] < j[0]);
    }
}

#[test]
fn empty_coupling_grid_is_rejected() {
    let p = ModelParams::new(1.0, 1.0, 0.1, Deformation::Identity).unwrap();
    assert!(eigen_sweep(ModelKind::Jc, &p, &[], &HilbertLayout::new(4).unwrap(), 2).is_err());
}
