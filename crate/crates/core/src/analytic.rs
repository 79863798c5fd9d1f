//! Closed-form two-time correlation functions.
//!
//! All forms are lab-frame and follow the Gram convention
//! G(t₁,t₂) = ⟨O†(t₁) O(t₂)⟩.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::dynamics::{CorrelationGrid, InitialState, Probe, TimeGrid};
use crate::error::{Error, Result};
use crate::hamiltonian::{effective_detuning, ModelParams};

/// Ω_n = Ω₀√(n+1) with Ω₋₁ = 0.
fn rabi_jc(params: &ModelParams, n: i64) -> f64 {
    if n < 0 {
        0.0
    } else {
        params.omega0 * ((n + 1) as f64).sqrt()
    }
}

/// Atomic correlation of the resonant JC model from |e,n⟩.
pub fn atom_corr_jc(params: &ModelParams, n: usize, t1: f64, t2: f64) -> C64 {
    let om_n = rabi_jc(params, n as i64);
    let om_m = rabi_jc(params, n as i64 - 1);
    C64::from_polar(1.0, params.omega_a * (t1 - t2))
        * (om_n * t1 / 2.0).cos()
        * (om_m * (t1 - t2) / 2.0).cos()
        * (om_n * t2 / 2.0).cos()
}

/// Field correlation of the resonant JC model from |e,n⟩.
pub fn field_corr_jc(params: &ModelParams, n: usize, t1: f64, t2: f64) -> C64 {
    let om_n = rabi_jc(params, n as i64);
    let om_m = rabi_jc(params, n as i64 - 1);
    let (plus, minus) = (om_n + om_m, om_n - om_m);
    let nf = n as f64;
    let root = 2.0 * (nf * (nf + 1.0)).sqrt();
    let bracket = (1.0 + 2.0 * nf + root) * (minus / 2.0 * (t1 - t2)).cos()
        - (0.5 * (minus * t2 + plus * t1)).cos()
        - (0.5 * (minus * t1 + plus * t2)).cos()
        + (1.0 + 2.0 * nf - root) * (plus / 2.0 * (t1 - t2)).cos();
    C64::from_polar(1.0, params.omega_c * (t1 - t2)) * bracket / 4.0
}

/// Field correlation of the bare Kerr oscillator, weighted over the photon
/// distribution of a field-only state.
pub fn kerr_field_corr(params: &ModelParams, state: &InitialState, t1: f64, t2: f64) -> Result<C64> {
    let chi = kerr_chi(params)?;
    if !state.spec.is_field_only() {
        return Err(Error::WrongModel {
            expected: "FieldOnly",
            found: format!("{:?}", state.spec),
        });
    }
    Ok(state
        .photon_weights
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(n, &p)| {
            let nu = kerr_line(params.omega_c, chi, n);
            C64::from_polar(p * n as f64, nu * (t1 - t2))
        })
        .sum())
}

/// ω_c(1 + 2χn)
pub fn kerr_line(omega_c: f64, chi: f64, n: usize) -> f64 {
    omega_c * (1.0 + 2.0 * chi * n as f64)
}

fn kerr_chi(params: &ModelParams) -> Result<f64> {
    params
        .deformation
        .kerr_chi()
        .ok_or_else(|| Error::WrongDeformation {
            expected: "linear_kerr",
            found: params.deformation.to_string(),
        })
}

/// Quantities of doublet k entering the deformed atomic correlation.
#[derive(Clone, Copy, Debug)]
struct KerrDoublet {
    detuning: f64,
    phi: f64,
}

fn kerr_doublet(params: &ModelParams, chi: f64, k: usize) -> Result<KerrDoublet> {
    let detuning = effective_detuning(params, k)?;
    let rabi = params.omega0 * (k as f64 + 1.0).sqrt() * (1.0 + chi * (k as f64 + 1.0)).sqrt();
    Ok(KerrDoublet {
        detuning,
        phi: detuning.hypot(rabi),
    })
}

/// Atomic correlation of the Kerr-deformed JC model from |e,n⟩, n ≥ 1.
pub fn atom_corr_djc(params: &ModelParams, n: usize, t1: f64, t2: f64) -> Result<C64> {
    let coeffs = DjcCoefficients::new(params, n)?;
    Ok(coeffs.eval(t1, t2))
}

/// Time-independent pieces of the deformed atomic correlation.
#[derive(Clone, Copy, Debug)]
pub struct DjcCoefficients {
    mean_gap: f64,
    phi_n: f64,
    phi_m: f64,
    ratio_n: f64,
    ratio_m: f64,
}

impl DjcCoefficients {
    pub fn new(params: &ModelParams, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "the deformed atomic correlation needs n ≥ 1".into(),
            ));
        }
        let chi = kerr_chi(params)?;
        let cur = kerr_doublet(params, chi, n)?;
        let prev = kerr_doublet(params, chi, n - 1)?;
        for (k, d) in [(n, cur), (n - 1, prev)] {
            if d.phi == 0.0 {
                return Err(Error::Singular(format!("doublet {k} is degenerate (φ = 0)")));
            }
        }
        Ok(Self {
            mean_gap: params.omega_c * (1.0 + chi * (2.0 * n as f64 + 1.0)),
            phi_n: cur.phi,
            phi_m: prev.phi,
            ratio_n: cur.detuning / cur.phi,
            ratio_m: prev.detuning / prev.phi,
        })
    }

    pub fn eval(&self, t1: f64, t2: f64) -> C64 {
        let i = C64::i();
        let phi_plus = self.phi_n + self.phi_m;
        let phi_minus = self.phi_n - self.phi_m;
        let (dn, dm) = (self.ratio_n, self.ratio_m);
        let prefactor = (i * self.mean_gap * (t1 - t2)).exp()
            * (-0.5 * i * (phi_minus * t2 + phi_plus * t1)).exp()
            / 8.0;
        let first = (i * self.phi_n * t1).exp() * (1.0 + dn) + (1.0 - dn);
        let second = (1.0 + dn) + (i * self.phi_n * t2).exp() * (1.0 - dn);
        let third = (i * self.phi_m * (t1 - t2)).exp() * (1.0 + dm) + (1.0 - dm);
        prefactor * first * second * third
    }

    /// Lab-frame line frequencies E⁰_n − E⁰_{n−1} ± φ_n/2 ± φ_{n−1}/2.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4);
        for sn in [-0.5, 0.5] {
            for sm in [-0.5, 0.5] {
                out.push(self.mean_gap + sn * self.phi_n + sm * self.phi_m);
            }
        }
        out
    }
}

/// 2 sin²(arctan(x)/2) = 1 − (1+x²)^{−1/2}
pub fn two_sin2_half_arctan(x: f64) -> f64 {
    1.0 - 1.0 / (1.0 + x * x).sqrt()
}

/// 2 cos²(arctan(x)/2) = 1 + (1+x²)^{−1/2}
pub fn two_cos2_half_arctan(x: f64) -> f64 {
    1.0 + 1.0 / (1.0 + x * x).sqrt()
}

type Evaluator = dyn Fn(f64, f64) -> C64 + Send + Sync;

/// A closed-form correlation together with the lines it contains.
#[derive(Clone)]
pub struct AnalyticCorrelation {
    name: &'static str,
    probe: Probe,
    frequencies: Vec<f64>,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for AnalyticCorrelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticCorrelation")
            .field("name", &self.name)
            .field("probe", &self.probe)
            .field("frequencies", &self.frequencies)
            .finish()
    }
}

impl AnalyticCorrelation {
    pub fn new(
        name: &'static str,
        probe: Probe,
        frequencies: Vec<f64>,
        eval: impl Fn(f64, f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name,
            probe,
            frequencies,
            eval: Arc::new(eval),
        }
    }

    /// Resonant JC atomic correlation from |e,n⟩.
    pub fn atom_jc(params: &ModelParams, n: usize) -> Self {
        let p = *params;
        let (om_n, om_m) = (rabi_jc(&p, n as i64), rabi_jc(&p, n as i64 - 1));
        let freqs = [-1.0, 1.0]
            .iter()
            .flat_map(|a| [-1.0, 1.0].map(|b| p.omega_a + 0.5 * (a * om_n + b * om_m)))
            .collect();
        Self::new("atom_jc", Probe::Atom, freqs, move |t1, t2| {
            atom_corr_jc(&p, n, t1, t2)
        })
    }

    /// Resonant JC field correlation from |e,n⟩.
    pub fn field_jc(params: &ModelParams, n: usize) -> Self {
        let p = *params;
        let (om_n, om_m) = (rabi_jc(&p, n as i64), rabi_jc(&p, n as i64 - 1));
        let freqs = [om_n + om_m, om_n - om_m]
            .iter()
            .flat_map(|w| [p.omega_c - 0.5 * w, p.omega_c + 0.5 * w])
            .collect();
        Self::new("field_jc", Probe::Field, freqs, move |t1, t2| {
            field_corr_jc(&p, n, t1, t2)
        })
    }

    /// Kerr-oscillator field correlation for a field-only state.
    pub fn kerr_field(params: &ModelParams, state: &InitialState) -> Result<Self> {
        let p = *params;
        let chi = kerr_chi(&p)?;
        kerr_field_corr(&p, state, 0.0, 0.0)?;
        let weights = state.photon_weights.clone();
        let freqs = weights
            .iter()
            .enumerate()
            .filter(|(n, &w)| w > 0.0 && *n > 0)
            .map(|(n, _)| kerr_line(p.omega_c, chi, n))
            .collect();
        let st = state.clone();
        Ok(Self::new("kerr_field", Probe::Field, freqs, move |t1, t2| {
            kerr_field_corr(&p, &st, t1, t2).expect("validated at construction")
        }))
    }

    /// Kerr-deformed JC atomic correlation from |e,n⟩, n ≥ 1.
    pub fn atom_djc(params: &ModelParams, n: usize) -> Result<Self> {
        let c = DjcCoefficients::new(params, n)?;
        Ok(Self::new("atom_djc", Probe::Atom, c.frequencies(), move |t1, t2| {
            c.eval(t1, t2)
        }))
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn probe(&self) -> Probe {
        self.probe
    }

    pub fn eval(&self, t1: f64, t2: f64) -> C64 {
        (self.eval)(t1, t2)
    }

    /// Lab-frame line frequencies of the correlation.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Fastest line in a frame rotating at `frame`.
    pub fn max_frequency(&self, frame: f64) -> f64 {
        self.frequencies
            .iter()
            .map(|f| (f - frame).abs())
            .fold(0.0, f64::max)
    }

    /// Samples the correlation on `grid` as a factored kernel.
    pub fn to_grid(&self, grid: &TimeGrid, frame: f64) -> Result<CorrelationGrid> {
        let eval = Arc::clone(&self.eval);
        CorrelationGrid::from_kernel(
            grid,
            frame,
            self.probe,
            self.max_frequency(frame),
            move |a, b| eval(a, b),
            1e-12,
        )
    }
}
