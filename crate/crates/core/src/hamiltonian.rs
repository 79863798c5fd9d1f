//! Model Hamiltonians, dressed doublets and eigenvalue sweeps.

use std::fmt;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{deformed_ladder, qubit, ComplexMatrix, Deformation, HilbertLayout};

/// Physical constants in units of ω_a (ħ = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub omega_a: f64,
    pub omega_c: f64,
    /// Vacuum Rabi frequency Ω₀.
    pub omega0: f64,
    #[serde(default)]
    pub deformation: Deformation,
}

impl ModelParams {
    pub fn new(omega_a: f64, omega_c: f64, omega0: f64, deformation: Deformation) -> Result<Self> {
        let p = Self {
            omega_a,
            omega_c,
            omega0,
            deformation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_a", self.omega_a),
            ("omega_c", self.omega_c),
            ("omega0", self.omega0),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Bare detuning Δ = ω_a − ω_c.
    pub fn detuning(&self) -> f64 {
        self.omega_a - self.omega_c
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    /// The parameters actually used by `kind`: JC and Rabi drop the deformation.
    pub fn for_kind(mut self, kind: ModelKind) -> Self {
        if matches!(kind, ModelKind::Jc | ModelKind::Rabi) {
            self.deformation = Deformation::Identity;
        }
        self
    }

    fn kerr_chi(&self) -> Result<f64> {
        self.deformation
            .kerr_chi()
            .ok_or_else(|| Error::WrongDeformation {
                expected: "linear_kerr",
                found: self.deformation.to_string(),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "JC")]
    Jc,
    #[serde(rename = "DJC")]
    Djc,
    #[serde(rename = "Rabi")]
    Rabi,
    #[serde(rename = "DRabi")]
    DRabi,
    #[serde(rename = "FieldOnly")]
    FieldOnly,
}

impl ModelKind {
    pub fn conserves_excitations(&self) -> bool {
        matches!(self, ModelKind::Jc | ModelKind::Djc)
    }

    pub fn has_qubit(&self) -> bool {
        !matches!(self, ModelKind::FieldOnly)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Jc => "JC",
            ModelKind::Djc => "DJC",
            ModelKind::Rabi => "Rabi",
            ModelKind::DRabi => "DRabi",
            ModelKind::FieldOnly => "FieldOnly",
        };
        f.write_str(s)
    }
}

/// (ω_c/2)[n f²(n) + (n+1) f²(n+1)], the diagonal of (ω_c/2)(Â†Â + ÂÂ†).
pub fn field_energy(omega_c: f64, deformation: &Deformation, n: usize) -> Result<f64> {
    let nf = n as f64;
    Ok(0.5
        * omega_c
        * (nf * deformation.f_squared(n)? + (nf + 1.0) * deformation.f_squared(n + 1)?))
}

pub fn build_hamiltonian(
    kind: ModelKind,
    params: &ModelParams,
    layout: &HilbertLayout,
) -> Result<ComplexMatrix> {
    params.validate()?;
    let n = layout.fock_cutoff();
    if n < 3 {
        return Err(Error::InvalidLayout(format!(
            "Hamiltonians need a Fock cutoff of at least 3, got {n}"
        )));
    }
    let p = params.for_kind(kind);
    let def = p.deformation;
    let field_diag = (0..n)
        .map(|k| field_energy(p.omega_c, &def, k))
        .collect::<Result<Vec<_>>>()?;
    let field = ComplexMatrix::from_real_diagonal(&field_diag);
    if kind == ModelKind::FieldOnly {
        return Ok(field);
    }

    let (a, a_dag) = deformed_ladder(&def, layout)?;
    let i2 = ComplexMatrix::identity(2);
    let mut h = layout.embed(&i2, &field)?;
    let atom = layout.embed(&qubit::sigma_z(), &ComplexMatrix::identity(n))?;
    h = &h + &atom.scale(C64::new(0.5 * p.omega_a, 0.0));

    let coupling = C64::new(0.0, -0.5 * p.omega0);
    let interaction = if kind.conserves_excitations() {
        let x = layout.embed(&qubit::sigma_plus(), &a)?;
        let y = layout.embed(&qubit::sigma_minus(), &a_dag)?;
        &x - &y
    } else {
        layout.embed(&qubit::sigma_x(), &(&a - &a_dag))?
    };
    Ok(&h + &interaction.scale(coupling))
}

/// Energy of the unpaired state |g,0⟩.
pub fn ground_energy(params: &ModelParams) -> Result<f64> {
    Ok(field_energy(params.omega_c, &params.deformation, 0)? - 0.5 * params.omega_a)
}

/// The 2×2 block spanned by |e,n⟩ and |g,n+1⟩.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DressedDoublet {
    pub n: usize,
    pub e_plus: f64,
    pub e_minus: f64,
    /// θ = atan2(Ω̃, Δ_f) in (0, π).
    pub mixing_angle: f64,
    /// Δ_{f,n}
    pub detuning: f64,
    /// Ω̃_n = Ω₀√(n+1) f(n+1)
    pub rabi: f64,
    /// φ_n = √(Δ_f² + Ω̃²)
    pub phi: f64,
    /// ω_c(h₁₁ + h₂₂)/4
    pub e0: f64,
    pub h11: f64,
    pub h22: f64,
}

pub fn doublet_block(params: &ModelParams, n: usize) -> Result<DressedDoublet> {
    let d = &params.deformation;
    let nf = n as f64;
    let (f0, f1, f2) = (d.f_squared(n)?, d.f_squared(n + 1)?, d.f_squared(n + 2)?);
    let h11 = nf * f0 + (nf + 1.0) * f1 + 1.0;
    let h22 = (nf + 1.0) * f1 + (nf + 2.0) * f2 - 1.0;
    let detuning = params.detuning() + 0.5 * params.omega_c * (h11 - h22);
    let rabi = params.omega0 * (nf + 1.0).sqrt() * d.eval(n + 1)?;
    let phi = detuning.hypot(rabi);
    let e0 = 0.25 * params.omega_c * (h11 + h22);
    Ok(DressedDoublet {
        n,
        e_plus: e0 + 0.5 * phi,
        e_minus: e0 - 0.5 * phi,
        mixing_angle: rabi.atan2(detuning),
        detuning,
        rabi,
        phi,
        e0,
        h11,
        h22,
    })
}

/// Closed-form Δ_{f,n} = ω_a(1 − 2ω_cχ/ω_a) − ω_c(1 + 2χn) for f² = 1 + χn.
pub fn effective_detuning(params: &ModelParams, n: usize) -> Result<f64> {
    let chi = params.kerr_chi()?;
    let (wa, wc) = (params.omega_a, params.omega_c);
    Ok(wa - 2.0 * wc * chi - wc * (1.0 + 2.0 * chi * n as f64))
}

/// ω_c/ω_a = (1 + 2χ(m+1))⁻¹, which makes doublet m resonant.
pub fn selective_cavity_frequency(m: usize, chi: f64) -> Result<f64> {
    let denom = 1.0 + 2.0 * chi * (m as f64 + 1.0);
    if !(denom > 1e-12) || !denom.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "selective cavity frequency needs 1 + 2χ(m+1) > 0, got {denom}"
        )));
    }
    Ok(1.0 / denom)
}

/// Largest photon number for which the rotating-wave approximation holds
/// in the Kerr-deformed model.
pub fn rwa_nmax(params: &ModelParams) -> Result<f64> {
    let chi = params.kerr_chi()?;
    let (wa, wc, om) = (params.omega_a, params.omega_c, params.omega0);
    if chi < 0.0 {
        return Err(Error::InvalidParameter(format!("rwa_nmax needs χ ≥ 0, got {chi}")));
    }
    if om == 0.0 {
        return Ok(f64::INFINITY);
    }
    if chi == 0.0 {
        return Ok(4.0 * (wc + wa).powi(2) / (om * om));
    }
    let gap = 16.0 * chi * wc * wc - om * om;
    if gap.abs() < 1e-12 {
        return Err(Error::Pole {
            denominator: 2.0 * chi * gap,
        });
    }
    let denom = 2.0 * chi * gap;
    let lead = (4.0 * chi + 1.0) * om * om - 16.0 * chi * wc * (wa + wc + 4.0 * chi * wc);
    let radicand = om * om + 16.0 * chi * (wa * wa - wc * wc);
    if radicand < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "RWA bound is complex for these parameters (radicand {radicand})"
        )));
    }
    Ok((lead - om * radicand.sqrt()) / denom)
}

/// Lowest `k` eigenvalues for each coupling in a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenSweep {
    pub kind: ModelKind,
    pub couplings: Vec<f64>,
    /// `levels[i]` holds the sorted eigenvalues at `couplings[i]`.
    pub levels: Vec<Vec<f64>>,
    /// Fock cutoff that converged at each coupling.
    pub cutoffs: Vec<usize>,
}

const SWEEP_TOL: f64 = 1e-8;
const SWEEP_MAX_CUTOFF: usize = 2048;

/// Lowest `k` eigenvalues of `kind` over a grid of Ω₀ values. The cutoff starts at
/// `layout` and doubles until the tracked levels move by less than 1e-8 relative.
pub fn eigen_sweep(
    kind: ModelKind,
    params: &ModelParams,
    coupling_grid: &[f64],
    layout: &HilbertLayout,
    k: usize,
) -> Result<EigenSweep> {
    if coupling_grid.is_empty() {
        return Err(Error::InvalidGrid("coupling grid is empty".into()));
    }
    let dim = if kind.has_qubit() {
        layout.dim()
    } else {
        layout.fock_cutoff()
    };
    if k == 0 || k > dim {
        return Err(Error::InvalidParameter(format!(
            "k must lie in 1..={dim}, got {k}"
        )));
    }
    let results = coupling_grid
        .par_iter()
        .map(|&om| lowest_converged(kind, &params.with_omega0(om), layout.fock_cutoff(), k))
        .collect::<Result<Vec<_>>>()?;
    let (levels, cutoffs) = results.into_iter().unzip();
    Ok(EigenSweep {
        kind,
        couplings: coupling_grid.to_vec(),
        levels,
        cutoffs,
    })
}

fn lowest(kind: ModelKind, params: &ModelParams, cutoff: usize, k: usize) -> Result<Vec<f64>> {
    let h = build_hamiltonian(kind, params, &HilbertLayout::new(cutoff)?)?;
    let mut v = h.eigenvalues()?;
    v.truncate(k);
    Ok(v)
}

fn lowest_converged(
    kind: ModelKind,
    params: &ModelParams,
    start: usize,
    k: usize,
) -> Result<(Vec<f64>, usize)> {
    let scale = params.omega_a.max(params.omega_c).max(1e-300);
    let mut cutoff = start.max(3);
    let mut prev = lowest(kind, params, cutoff, k)?;
    while cutoff < SWEEP_MAX_CUTOFF {
        let next_cutoff = cutoff * 2;
        let next = lowest(kind, params, next_cutoff, k)?;
        let settled = prev
            .iter()
            .zip(&next)
            .all(|(a, b)| (a - b).abs() <= SWEEP_TOL * a.abs().max(b.abs()).max(scale));
        if settled {
            return Ok((next, next_cutoff));
        }
        prev = next;
        cutoff = next_cutoff;
    }
    Err(Error::NoConvergence { cutoff })
}

/// Ground state plus the doublets 0..n_doublets, sorted ascending.
pub fn doublet_spectrum(params: &ModelParams, n_doublets: usize) -> Result<Vec<f64>> {
    let mut e = vec![ground_energy(params)?];
    for n in 0..n_doublets {
        let d = doublet_block(params, n)?;
        e.push(d.e_minus);
        e.push(d.e_plus);
    }
    e.sort_by(f64::total_cmp);
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{commutator, excitation_number, parity_operator};
    use proptest::prelude::*;

    fn kerr(chi: f64) -> Deformation {
        Deformation::LinearKerr { chi }
    }

    fn layout(n: usize) -> HilbertLayout {
        HilbertLayout::new(n).unwrap()
    }

    #[test]
    fn field_only_matches_kerr_spectrum() {
        let chi = 0.2;
        let p = ModelParams::new(1.0, 0.9, 0.0, kerr(chi)).unwrap();
        let h = build_hamiltonian(ModelKind::FieldOnly, &p, &layout(12)).unwrap();
        assert_eq!(h.dim(), 12);
        assert!(h.is_diagonal(0.0));
        for n in 0..12 {
            let nf = n as f64;
            let expect = 0.9 * (nf + 0.5) + 0.9 * chi * (nf * nf + nf + 0.5);
            assert!((h.get(n, n).re - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn uncoupled_jc_is_diagonal() {
        let p = ModelParams::new(1.0, 0.8, 0.0, Deformation::Identity).unwrap();
        let l = layout(6);
        let h = build_hamiltonian(ModelKind::Jc, &p, &l).unwrap();
        assert!(h.is_diagonal(0.0));
        for n in 0..6 {
            let e = h.get(l.index(true, n), l.index(true, n)).re;
            assert!((e - (0.8 * (n as f64 + 0.5) + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn djc_coupling_magnitude() {
        let chi = 0.1;
        let p = ModelParams::new(1.0, 0.9, 0.25, kerr(chi)).unwrap();
        let l = layout(8);
        let h = build_hamiltonian(ModelKind::Djc, &p, &l).unwrap();
        for n in 0..7 {
            let v = h.get(l.index(true, n), l.index(false, n + 1));
            let nf = n as f64;
            let expect = 0.125 * (nf + 1.0).sqrt() * (1.0 + chi * (nf + 1.0)).sqrt();
            assert!((v.norm() - expect).abs() < 1e-15);
            assert!(v.re == 0.0 && v.im < 0.0);
        }
    }

    #[test]
    fn resonant_identity_doublet() {
        // The symmetrized field term carries a zero-point shift ω_c/2 on top of
        // the textbook ω_c(n + ½) ± Ω_n/2.
        let p = ModelParams::new(1.0, 1.0, 0.25, Deformation::Identity).unwrap();
        for n in 0..6 {
            let d = doublet_block(&p, n).unwrap();
            let nf = n as f64;
            let om = 0.25 * (nf + 1.0).sqrt();
            assert!((d.e_plus - (nf + 0.5 + om / 2.0) - 0.5).abs() < 1e-14);
            assert!((d.e_minus - (nf + 0.5 - om / 2.0) - 0.5).abs() < 1e-14);
            assert!((d.mixing_angle - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
            assert_eq!(d.detuning, 0.0);
            assert!((d.rabi - om).abs() < 1e-15);
        }
    }

    #[test]
    fn doublet_is_continuous_in_chi() {
        let base = ModelParams::new(1.0, 0.9, 0.25, Deformation::Identity).unwrap();
        let near = ModelParams {
            deformation: kerr(1e-12),
            ..base
        };
        for n in 0..5 {
            let a = doublet_block(&base, n).unwrap();
            let b = doublet_block(&near, n).unwrap();
            assert!((a.e_plus - b.e_plus).abs() < 1e-9);
            assert!((a.e_minus - b.e_minus).abs() < 1e-9);
            assert!((a.mixing_angle - b.mixing_angle).abs() < 1e-9);
        }
    }

    #[test]
    fn caption_selective_transition() {
        let p = ModelParams::new(1.0, 0.7692, 0.25, kerr(0.05)).unwrap();
        assert!(doublet_block(&p, 2).unwrap().detuning.abs() < 1e-3);
        assert!(effective_detuning(&p, 1).unwrap() > 0.0);
        assert!(effective_detuning(&p, 3).unwrap() < 0.0);
    }

    #[test]
    fn effective_detuning_examples() {
        let p = ModelParams::new(1.0, 0.83, 0.25, kerr(0.0)).unwrap();
        for n in 0..5 {
            assert!((effective_detuning(&p, n).unwrap() - 0.17).abs() < 1e-15);
        }
        for m in 0..6 {
            let wc = selective_cavity_frequency(m, 0.0125).unwrap();
            let p = ModelParams::new(1.0, wc, 0.125, kerr(0.0125)).unwrap();
            assert!(effective_detuning(&p, m).unwrap().abs() < 1e-15);
        }
        let q = ModelParams::new(1.0, 1.0, 0.1, Deformation::Transmon { alpha: 0.1 }).unwrap();
        assert!(matches!(
            effective_detuning(&q, 1),
            Err(Error::WrongDeformation { .. })
        ));
    }

    #[test]
    fn selective_cavity_examples() {
        assert!((selective_cavity_frequency(2, 0.05).unwrap() - 0.7692).abs() < 1e-4);
        assert_eq!(selective_cavity_frequency(7, 0.0).unwrap(), 1.0);
        assert!((selective_cavity_frequency(0, 0.125).unwrap() - 0.8).abs() < 1e-15);
        assert!(selective_cavity_frequency(1, -0.25).is_err());
    }

    #[test]
    fn rwa_nmax_examples() {
        let p0 = ModelParams::new(1.0, 1.0, 0.25, kerr(0.0)).unwrap();
        assert_eq!(rwa_nmax(&p0).unwrap(), 256.0);

        let p = ModelParams::new(1.0, 0.7692, 0.25, kerr(0.05)).unwrap();
        let v = rwa_nmax(&p).unwrap();
        assert!((v - RWA_NMAX_CAPTION).abs() < 1e-9, "{v}");

        let pole_wc = 0.25 / (16.0f64 * 0.05).sqrt();
        let pp = ModelParams::new(1.0, pole_wc, 0.25, kerr(0.05)).unwrap();
        assert!(matches!(rwa_nmax(&pp), Err(Error::Pole { .. })));
    }

    #[test]
    fn rwa_nmax_solves_the_bound_condition() {
        for (chi, wc, om) in [(0.01, 1.0, 0.5), (0.002, 0.9, 0.3), (0.05, 0.7692, 0.25)] {
            let p = ModelParams::new(1.0, wc, om, kerr(chi)).unwrap();
            let m = rwa_nmax(&p).unwrap() + 2.0;
            let lhs = om * om * m * (1.0 + chi * m);
            let rhs = 4.0 * (wc + 1.0 + 2.0 * wc * chi * m).powi(2);
            assert!((lhs - rhs).abs() < 1e-9 * rhs, "chi={chi}");
        }
    }

    /// Evaluated once from the quadratic root and frozen.
    const RWA_NMAX_CAPTION: f64 = -30.774_396_278_111_24;

    #[test]
    fn jc_sweep_matches_doublets() {
        let p = ModelParams::new(1.0, 0.7692, 0.0, kerr(0.05)).unwrap();
        let grid = [0.0, 0.1, 0.25, 0.4];
        let s = eigen_sweep(ModelKind::Djc, &p, &grid, &layout(16), 12).unwrap();
        for (i, &om) in grid.iter().enumerate() {
            let oracle = doublet_spectrum(&p.with_omega0(om), 12).unwrap();
            for (a, b) in s.levels[i].iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "om={om}");
            }
        }
        let jc = eigen_sweep(ModelKind::Jc, &p, &[0.0], &layout(8), 4).unwrap();
        let bare = p.for_kind(ModelKind::Jc);
        let mut expect = vec![0.5 * 0.7692 - 0.5];
        for n in 0..3 {
            let nf = n as f64;
            expect.push(0.7692 * (nf + 0.5) + 0.5);
            expect.push(0.7692 * (nf + 1.5) - 0.5);
        }
        expect.sort_by(f64::total_cmp);
        assert_eq!(bare.deformation, Deformation::Identity);
        for (a, b) in jc.levels[0].iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn drabi_tracks_djc_at_weak_coupling() {
        let p = ModelParams::new(1.0, 0.7692, 0.0, kerr(0.05)).unwrap();
        let grid = [0.02, 0.05, 0.1];
        let rabi = eigen_sweep(ModelKind::DRabi, &p, &grid, &layout(8), 8).unwrap();
        let djc = eigen_sweep(ModelKind::Djc, &p, &grid, &layout(8), 8).unwrap();
        for i in 0..grid.len() {
            for (a, b) in rabi.levels[i].iter().zip(&djc.levels[i]) {
                assert!((a - b).abs() <= 1e-2 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn sweep_rejects_bad_requests() {
        let p = ModelParams::new(1.0, 1.0, 0.1, Deformation::Identity).unwrap();
        assert!(eigen_sweep(ModelKind::Jc, &p, &[], &layout(4), 2).is_err());
        assert!(eigen_sweep(ModelKind::Jc, &p, &[0.1], &layout(4), 9).is_err());
    }

    fn any_params() -> impl Strategy<Value = ModelParams> {
        (0.5..1.5f64, 0.0..0.6f64, 0.0..0.1f64).prop_map(|(wc, om, chi)| ModelParams {
            omega_a: 1.0,
            omega_c: wc,
            omega0: om,
            deformation: kerr(chi),
        })
    }

    fn any_kind() -> impl Strategy<Value = ModelKind> {
        prop_oneof![
            Just(ModelKind::Jc),
            Just(ModelKind::Djc),
            Just(ModelKind::Rabi),
            Just(ModelKind::DRabi),
        ]
    }

    proptest! {
        #[test]
        fn hamiltonians_are_hermitian_and_parity_symmetric(
            p in any_params(), kind in any_kind(), n in 3usize..14
        ) {
            let l = layout(n);
            let h = build_hamiltonian(kind, &p, &l).unwrap();
            prop_assert_eq!(h.hermiticity_defect(), 0.0);
            let c = commutator(&h, &parity_operator(&l)).unwrap();
            prop_assert_eq!(c.max_abs(), 0.0);
            if kind.conserves_excitations() {
                let c = commutator(&h, &excitation_number(&l)).unwrap();
                prop_assert_eq!(c.max_abs(), 0.0);
            }
        }

        #[test]
        fn deformed_models_reduce_to_undeformed(p in any_params(), n in 3usize..12) {
            let l = layout(n);
            let flat = ModelParams { deformation: kerr(0.0), ..p };
            let pairs = [(ModelKind::Djc, ModelKind::Jc), (ModelKind::DRabi, ModelKind::Rabi)];
            for (deformed, plain) in pairs {
                let a = build_hamiltonian(deformed, &flat, &l).unwrap();
                let b = build_hamiltonian(plain, &p, &l).unwrap();
                prop_assert_eq!(a.max_abs_diff(&b), 0.0);
            }
        }

        #[test]
        fn doublet_invariants(p in any_params(), n in 0usize..30) {
            let d = doublet_block(&p, n).unwrap();
            prop_assert!(d.e_plus >= d.e_minus);
            prop_assert!(d.phi >= 0.0);
            prop_assert!((d.e_plus - d.e_minus - d.phi).abs() <= 1e-12 * (1.0 + d.phi));
            prop_assert!(d.mixing_angle >= 0.0 && d.mixing_angle <= std::f64::consts::PI);
            let closed = effective_detuning(&p, n).unwrap();
            prop_assert!((closed - d.detuning).abs() <= 1e-13 * (1.0 + n as f64));
        }

        #[test]
        fn doublet_blocks_assemble_the_djc_spectrum(p in any_params(), n in 6usize..14) {
            let l = layout(n);
            let h = build_hamiltonian(ModelKind::Djc, &p, &l).unwrap();
            let mut numeric = h.eigenvalues().unwrap();
            let top = h.get(l.index(true, n - 1), l.index(true, n - 1)).re;
            let pos = numeric.iter().position(|e| (e - top).abs() < 1e-12).unwrap();
            numeric.remove(pos);
            let oracle = doublet_spectrum(&p, n - 1).unwrap();
            for (a, b) in numeric.iter().zip(&oracle) {
                prop_assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0));
            }
        }
    }
}
