//! The time-dependent physical spectrum
//! S(ω,Γ,t) = 2Γ e^{−2Γt} ∫₀ᵗ∫₀ᵗ e^{(Γ−iω)t₁} e^{(Γ+iω)t₂} G(t₁,t₂) dt₁ dt₂,
//! numerically and in closed form.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{CorrelationGrid, InitialState};
use crate::error::{Error, Result};
use crate::hamiltonian::{effective_detuning, ModelParams};
use crate::analytic::kerr_line;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    Trapezoid,
    /// Composite Simpson, closing with a 3/8 panel on an odd interval count.
    #[default]
    Simpson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRequest {
    pub gamma: f64,
    pub t: f64,
    pub omega: Vec<f64>,
    /// Rotation frequency of the correlation frame (0 in the lab frame).
    pub frame_shift: f64,
    pub quadrature: Quadrature,
}

impl SpectrumRequest {
    pub fn new(gamma: f64, t: f64, omega: Vec<f64>) -> Result<Self> {
        let req = Self {
            gamma,
            t,
            omega,
            frame_shift: 0.0,
            quadrature: Quadrature::default(),
        };
        req.validate()?;
        Ok(req)
    }

    pub fn with_frame(mut self, frame_shift: f64) -> Self {
        self.frame_shift = frame_shift;
        self
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "observation time must be non-negative, got {}",
                self.t
            )));
        }
        if self.omega.is_empty() {
            return Err(Error::InvalidGrid("omega grid is empty".into()));
        }
        if self.omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidGrid("omega grid has non-finite entries".into()));
        }
        if self.omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("omega grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NumericGram,
    NumericTrapezoid,
    ClosedForm,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::NumericGram => "numeric_gram",
            Method::NumericTrapezoid => "numeric_trapezoid",
            Method::ClosedForm => "closed_form",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub request: SpectrumRequest,
    pub method: Method,
}

impl SpectrumResult {
    pub fn peaks(&self, min_relative: f64) -> Vec<Peak> {
        find_peaks(&self.omega, &self.values, min_relative)
    }

    pub fn max_peak(&self) -> Option<Peak> {
        self.peaks(0.0)
            .into_iter()
            .max_by(|a, b| a.height.total_cmp(&b.height))
    }
}

/// Which numerical evaluation of the double integral to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NumericPath {
    /// ‖∫ e^{(Γ+iω)τ} w(τ) dτ‖², linear in the grid size.
    Gram,
    /// Product quadrature on the full double integral, quadratic in the grid size.
    DoubleIntegral,
}

/// Quadrature weights in units of the step for `intervals` intervals.
pub fn quadrature_weights(rule: Quadrature, intervals: usize) -> Vec<f64> {
    let k = intervals;
    let mut w = vec![0.0; k + 1];
    if k == 0 {
        return w;
    }
    if rule == Quadrature::Trapezoid || k == 1 {
        w.iter_mut().for_each(|x| *x = 1.0);
        w[0] = 0.5;
        w[k] = 0.5;
        return w;
    }
    let simpson_end = if k.is_multiple_of(2) { k } else { k - 3 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += 1.0 / 3.0;
        w[i + 1] += 4.0 / 3.0;
        w[i + 2] += 1.0 / 3.0;
    }
    if k % 2 == 1 {
        let s = k - 3;
        for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[s + o] += 3.0 / 8.0 * c;
        }
    }
    w
}

/// Samples per period demanded of the fastest kernel frequency.
pub const SAMPLES_PER_PERIOD: f64 = 20.0;

/// Numerical spectrum along the Gram path.
pub fn ew_numeric(corr: &CorrelationGrid, req: &SpectrumRequest) -> Result<SpectrumResult> {
    ew_numeric_with(corr, req, NumericPath::Gram)
}

pub fn ew_numeric_with(
    corr: &CorrelationGrid,
    req: &SpectrumRequest,
    path: NumericPath,
) -> Result<SpectrumResult> {
    req.validate()?;
    let method = match path {
        NumericPath::Gram => Method::NumericGram,
        NumericPath::DoubleIntegral => Method::NumericTrapezoid,
    };
    let done = |values: Vec<f64>| SpectrumResult {
        omega: req.omega.clone(),
        values,
        request: req.clone(),
        method,
    };
    if (req.frame_shift - corr.frame).abs() > 1e-12 * corr.frame.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "request frame {} differs from correlation frame {}",
            req.frame_shift, corr.frame
        )));
    }
    if req.t == 0.0 {
        return Ok(done(vec![0.0; req.omega.len()]));
    }
    let grid = corr.grid;
    let k = grid.index_of(req.t).ok_or_else(|| {
        Error::InvalidGrid(format!(
            "observation time {} is not a sample of the correlation grid (step {}, final {})",
            req.t,
            grid.step(),
            grid.t_final()
        ))
    })?;
    let h = grid.step();
    let offset = req
        .omega
        .iter()
        .map(|w| (w - corr.frame).abs())
        .fold(0.0, f64::max);
    let density_step = 2.0 * PI / (SAMPLES_PER_PERIOD * corr.max_frequency);
    let nyquist_step = PI / (corr.max_frequency + offset);
    let max_step = density_step.min(nyquist_step);
    if h > max_step * (1.0 + 1e-12) {
        return Err(Error::UnderSampled {
            step: h,
            max_step,
            max_frequency: corr.max_frequency,
        });
    }

    let gamma = req.gamma;
    let qw = quadrature_weights(req.quadrature, k);
    let damp: Vec<f64> = (0..=k)
        .map(|i| h * qw[i] * (gamma * (grid.time(i) - req.t)).exp())
        .collect();

    let values = match path {
        NumericPath::Gram => req
            .omega
            .par_iter()
            .map(|&w| 2.0 * gamma * gram_norm(corr, &damp, w - corr.frame, h))
            .collect(),
        NumericPath::DoubleIntegral => {
            let g: Vec<C64> = (0..=k)
                .into_par_iter()
                .flat_map_iter(|i| (0..=k).map(move |j| (i, j)))
                .map(|(i, j)| corr.rotating_value(i, j))
                .collect();
            req.omega
                .par_iter()
                .map(|&w| {
                    let q = phases(&damp, w - corr.frame, h);
                    let mut total = C64::new(0.0, 0.0);
                    for i in 0..=k {
                        let mut row = C64::new(0.0, 0.0);
                        for j in 0..=k {
                            row += g[i * (k + 1) + j] * q[j];
                        }
                        total += q[i].conj() * row;
                    }
                    2.0 * gamma * total.re
                })
                .collect()
        }
    };
    Ok(done(values))
}

const REANCHOR: usize = 64;

/// q_i = damp_i e^{iωτ_i}, advanced by a recurrence re-anchored every 64 steps.
fn phases(damp: &[f64], w: f64, h: f64) -> Vec<C64> {
    let z = C64::from_polar(1.0, w * h);
    let mut p = C64::new(1.0, 0.0);
    damp.iter()
        .enumerate()
        .map(|(i, &d)| {
            if i % REANCHOR == 0 {
                p = C64::from_polar(1.0, w * h * i as f64);
            }
            let q = p * d;
            p *= z;
            q
        })
        .collect()
}

fn gram_norm(corr: &CorrelationGrid, damp: &[f64], w: f64, h: f64) -> f64 {
    let z = C64::from_polar(1.0, w * h);
    let mut total = 0.0;
    for comp in &corr.components {
        let mut acc = vec![C64::new(0.0, 0.0); comp.rank];
        let mut p = C64::new(1.0, 0.0);
        for (i, &d) in damp.iter().enumerate() {
            if i % REANCHOR == 0 {
                p = C64::from_polar(1.0, w * h * i as f64);
            }
            let q = p * d;
            for (a, x) in acc.iter_mut().zip(comp.row(i)) {
                *a += q * x;
            }
            p *= z;
        }
        total += comp.weight * acc.iter().map(|a| a.norm_sqr()).sum::<f64>();
    }
    total
}

/// Lorentzian of unit area-scale: (Γ/2)/(Γ² + (ω−ν)²).
fn half_lorentzian(gamma: f64, omega: f64, center: f64) -> f64 {
    0.5 * gamma / (gamma * gamma + (omega - center).powi(2))
}

/// Long-time vacuum Rabi doublet.
pub fn vrs_longtime(params: &ModelParams, gamma: f64, omega: f64) -> f64 {
    let half = params.omega0 / 2.0;
    half_lorentzian(gamma, omega, params.omega_a - half)
        + half_lorentzian(gamma, omega, params.omega_a + half)
}

/// Exact finite-time spectrum of the resonant JC model from |e,0⟩.
pub fn vrs_fulltime(params: &ModelParams, gamma: f64, omega: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let half = params.omega0 / 2.0;
    let p = omega - params.omega_a + half;
    let m = omega - params.omega_a - half;
    let e1 = (-gamma * t).exp();
    let e2 = e1 * e1;
    let g2 = gamma * gamma;
    let direct = |x: f64| (1.0 - 2.0 * e1 * (x * t).cos() + e2) / (g2 + x * x);
    let i = C64::i();
    let numerator = (i * params.omega0 * t).exp()
        - e1 * ((i * p * t).exp() + (-i * m * t).exp())
        + e2;
    // 1/((Γ+ip)(Γ−im)) with each factor rationalized by its conjugate
    let paired = (C64::new(gamma, -p) * C64::new(gamma, m)) / ((g2 + p * p) * (g2 + m * m));
    let cross = 2.0 * (numerator * paired).re;
    0.5 * gamma * (direct(p) + direct(m) + cross)
}

/// Long-time Kerr spectrum for a field-only state: Σ_n P_n 2nΓ/(Γ² + (ω − ω_c(1+2χn))²).
pub fn kerr_longtime(state: &InitialState, params: &ModelParams, gamma: f64, omega: f64) -> Result<f64> {
    let chi = params
        .deformation
        .kerr_chi()
        .ok_or_else(|| Error::WrongDeformation {
            expected: "linear_kerr",
            found: params.deformation.to_string(),
        })?;
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
        .map(|(n, &p)| {
            let nf = n as f64;
            let d = omega - kerr_line(params.omega_c, chi, n);
            p * 2.0 * nf * gamma / (gamma * gamma + d * d)
        })
        .sum())
}

/// The two lines of the deformed vacuum Rabi doublet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DvrsLines {
    /// Δ_{f,0}
    pub detuning: f64,
    /// φ₀ = √(Δ_{f,0}² + Ω₀²(1+χ))
    pub phi: f64,
    /// (1 − Δ/φ)², weight of the lower line.
    pub weight_lower: f64,
    /// (1 + Δ/φ)², weight of the upper line.
    pub weight_upper: f64,
    pub center_lower: f64,
    pub center_upper: f64,
}

pub fn dvrs_lines(params: &ModelParams) -> Result<DvrsLines> {
    let chi = params
        .deformation
        .kerr_chi()
        .ok_or_else(|| Error::WrongDeformation {
            expected: "linear_kerr",
            found: params.deformation.to_string(),
        })?;
    let detuning = effective_detuning(params, 0)?;
    let phi = detuning.hypot(params.omega0 * (1.0 + chi).sqrt());
    let ratio = if phi == 0.0 { 0.0 } else { detuning / phi };
    let mid = params.omega_a - detuning / 2.0;
    Ok(DvrsLines {
        detuning,
        phi,
        weight_lower: (1.0 - ratio).powi(2),
        weight_upper: (1.0 + ratio).powi(2),
        center_lower: mid - phi / 2.0,
        center_upper: mid + phi / 2.0,
    })
}

/// Long-time deformed vacuum Rabi doublet from |e,0⟩.
pub fn dvrs_longtime(params: &ModelParams, gamma: f64, omega: f64) -> Result<f64> {
    let l = dvrs_lines(params)?;
    Ok(l.weight_lower * half_lorentzian(gamma, omega, l.center_lower)
        + l.weight_upper * half_lorentzian(gamma, omega, l.center_upper))
}

/// Evaluates a closed form on the request's grid.
pub fn closed_form(
    req: &SpectrumRequest,
    f: impl Fn(f64) -> Result<f64> + Sync,
) -> Result<SpectrumResult> {
    req.validate()?;
    let values = req
        .omega
        .par_iter()
        .map(|&w| f(w))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumResult {
        omega: req.omega.clone(),
        values,
        request: req.clone(),
        method: Method::ClosedForm,
    })
}

/// `points` equally spaced frequencies covering
/// [lo − 6Γ − span, hi + 6Γ + span] where lo/hi bound the predicted peaks.
pub fn default_omega_grid(peaks: &[f64], gamma: f64, span: f64, points: usize) -> Result<Vec<f64>> {
    if peaks.is_empty() || points < 2 {
        return Err(Error::InvalidGrid(
            "an omega grid needs at least one peak and two points".into(),
        ));
    }
    let lo = peaks.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = peaks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a = lo - 6.0 * gamma - span;
    let b = hi + 6.0 * gamma + span;
    Ok(linspace(a, b, points))
}

pub const DEFAULT_OMEGA_POINTS: usize = 2001;

pub fn linspace(a: f64, b: f64, points: usize) -> Vec<f64> {
    let step = (b - a) / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { b } else { a + step * i as f64 })
        .collect()
}

/// A local maximum refined by a parabola through its neighbours.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub index: usize,
    pub omega: f64,
    pub height: f64,
}

/// Local maxima whose sample value exceeds `min_relative` times the global maximum.
pub fn find_peaks(omega: &[f64], values: &[f64], min_relative: f64) -> Vec<Peak> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = Vec::new();
    for i in 0..n {
        let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
        let right = if i + 1 == n { f64::NEG_INFINITY } else { values[i + 1] };
        if values[i] > left && values[i] >= right && values[i] >= min_relative * top {
            out.push(refine(omega, values, i));
        }
    }
    out
}

fn refine(omega: &[f64], values: &[f64], i: usize) -> Peak {
    if i == 0 || i + 1 == values.len() {
        return Peak {
            index: i,
            omega: omega[i],
            height: values[i],
        };
    }
    let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return Peak {
            index: i,
            omega: omega[i],
            height: y1,
        };
    }
    let shift = 0.5 * (y0 - y2) / denom;
    let h = omega[i + 1] - omega[i];
    Peak {
        index: i,
        omega: omega[i] + shift * h,
        height: y1 - 0.25 * (y0 - y2) * shift,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::AnalyticCorrelation;
    use crate::dynamics::{make_initial_state, Probe, StateSpec, TimeGrid};
    use crate::operators::{Deformation, HilbertLayout};
    use proptest::prelude::*;

    fn jc(omega0: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, omega0, Deformation::Identity).unwrap()
    }

    #[test]
    fn quadrature_weights_integrate_polynomials() {
        for k in 1..12 {
            for rule in [Quadrature::Trapezoid, Quadrature::Simpson] {
                let w = quadrature_weights(rule, k);
                let h = 1.0 / k as f64;
                let integ = |f: &dyn Fn(f64) -> f64| -> f64 {
                    w.iter().enumerate().map(|(i, wi)| wi * h * f(i as f64 * h)).sum()
                };
                assert!((integ(&|_| 1.0) - 1.0).abs() < 1e-14);
                assert!((integ(&|x| x) - 0.5).abs() < 1e-14);
                if rule == Quadrature::Simpson && k >= 2 {
                    assert!((integ(&|x| x * x * x) - 0.25).abs() < 1e-14, "k={k}");
                }
            }
        }
    }

    #[test]
    fn constant_kernel_gives_lorentzian() {
        let gamma = 0.1;
        let t = 200.0;
        let grid = TimeGrid::new(t, 4001).unwrap();
        let corr = CorrelationGrid::from_kernel(
            &grid,
            0.0,
            Probe::Custom,
            0.0,
            |_, _| C64::new(1.0, 0.0),
            1e-15,
        )
        .unwrap();
        let omega = linspace(-0.5, 0.5, 21);
        let s = ew_numeric(&corr, &SpectrumRequest::new(gamma, t, omega.clone()).unwrap()).unwrap();
        for (w, v) in omega.iter().zip(&s.values) {
            let expect = 2.0 * gamma / (gamma * gamma + w * w);
            assert!((v - expect).abs() < 1e-6 * expect.max(1.0), "w={w}");
        }
    }

    #[test]
    fn zero_time_gives_zero() {
        let grid = TimeGrid::new(10.0, 101).unwrap();
        let corr = AnalyticCorrelation::atom_jc(&jc(0.25), 0).to_grid(&grid, 1.0).unwrap();
        let req = SpectrumRequest::new(0.01, 0.0, linspace(0.8, 1.2, 11))
            .unwrap()
            .with_frame(1.0);
        let s = ew_numeric(&corr, &req).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
        assert_eq!(vrs_fulltime(&jc(0.25), 0.01, 1.0, 0.0), 0.0);
    }

    #[test]
    fn kerr_fock_peak_from_numeric_kernel() {
        let wc = 1.0;
        let chi = 0.2;
        let gamma = 0.05 * wc;
        let n = 2;
        let p = ModelParams::new(1.0, wc, 0.0, Deformation::LinearKerr { chi }).unwrap();
        let l = HilbertLayout::new(6).unwrap();
        let state = make_initial_state(&StateSpec::FockField { n }, &l).unwrap();
        let corr = AnalyticCorrelation::kerr_field(&p, &state).unwrap();
        let t = 10.0 / gamma;
        let frame = 1.8 * wc;
        let omega = default_omega_grid(&[frame], gamma, 0.3, 601).unwrap();
        let offset = omega.iter().map(|w| (w - frame).abs()).fold(0.0, f64::max);
        let grid = TimeGrid::with_max_step(t, 2.0 * PI / (40.0 * offset)).unwrap();
        let cg = corr.to_grid(&grid, frame).unwrap();
        let req = SpectrumRequest::new(gamma, t, omega.clone()).unwrap().with_frame(frame);
        let s = ew_numeric(&cg, &req).unwrap();
        let peak = s.max_peak().unwrap();
        assert!((peak.omega - 1.8).abs() <= omega[1] - omega[0]);
        assert!((peak.height - 2.0 * n as f64 / gamma).abs() <= 0.02 * 80.0);
    }

    #[test]
    fn vrs_examples() {
        let p = jc(0.25);
        let gamma = 0.01;
        let at_center = vrs_longtime(&p, gamma, 1.0);
        assert!((at_center - gamma / (gamma * gamma + 0.25f64.powi(2) / 4.0)).abs() < 1e-15);
        assert!((at_center - 0.635_930).abs() < 1e-6);

        let omega = linspace(0.8, 1.2, 4001);
        let vals: Vec<f64> = omega.iter().map(|&w| vrs_longtime(&p, gamma, w)).collect();
        let peaks = find_peaks(&omega, &vals, 0.5);
        assert_eq!(peaks.len(), 2);
        assert!((peaks[1].omega - peaks[0].omega - 0.25).abs() <= 1e-4);

        let single = jc(0.0);
        let vals: Vec<f64> = omega.iter().map(|&w| vrs_longtime(&single, gamma, w)).collect();
        let peaks = find_peaks(&omega, &vals, 0.5);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].omega - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vrs_fulltime_matches_quadrature_of_its_kernel() {
        let p = jc(0.25);
        let gamma = 0.01;
        let t = 2.0 / gamma;
        let frame = 1.0;
        let corr = AnalyticCorrelation::atom_jc(&p, 0);
        let omega = linspace(0.8, 1.2, 41);
        let grid = TimeGrid::with_max_step(t, 0.05).unwrap();
        let cg = corr.to_grid(&grid, frame).unwrap();
        let req = SpectrumRequest::new(gamma, t, omega.clone()).unwrap().with_frame(frame);
        let s = ew_numeric(&cg, &req).unwrap();
        for (w, v) in omega.iter().zip(&s.values) {
            assert!((v - vrs_fulltime(&p, gamma, *w, t)).abs() < 1e-6, "w={w}");
        }
    }

    #[test]
    fn gram_and_double_integral_agree() {
        let p = jc(0.25);
        let gamma = 0.05;
        let t = 60.0;
        let corr = AnalyticCorrelation::atom_jc(&p, 1).to_grid(&TimeGrid::new(t, 401).unwrap(), 1.0).unwrap();
        let req = SpectrumRequest::new(gamma, t, linspace(0.7, 1.3, 31))
            .unwrap()
            .with_frame(1.0);
        let a = ew_numeric_with(&corr, &req, NumericPath::Gram).unwrap();
        let b = ew_numeric_with(&corr, &req, NumericPath::DoubleIntegral).unwrap();
        let top = a.values.iter().copied().fold(0.0, f64::max);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() <= 1e-10 * top);
        }
        assert_eq!(b.method.tag(), "numeric_trapezoid");
    }

    #[test]
    fn frame_shift_is_consistent() {
        let p = jc(0.25);
        let gamma = 0.05;
        let t = 40.0;
        let omega = linspace(0.7, 1.3, 25);
        let grid = TimeGrid::new(t, 4001).unwrap();
        let corr = AnalyticCorrelation::atom_jc(&p, 2);
        let lab = corr.to_grid(&grid, 0.0).unwrap();
        let rot = corr.to_grid(&grid, 1.0).unwrap();
        let a = ew_numeric(&lab, &SpectrumRequest::new(gamma, t, omega.clone()).unwrap()).unwrap();
        let b = ew_numeric(
            &rot,
            &SpectrumRequest::new(gamma, t, omega.clone()).unwrap().with_frame(1.0),
        )
        .unwrap();
        let top = a.values.iter().copied().fold(0.0, f64::max);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() <= 1e-8 * top);
        }
    }

    #[test]
    fn undersampled_grid_is_refused() {
        let p = jc(0.25);
        let grid = TimeGrid::new(100.0, 51).unwrap();
        let cg = AnalyticCorrelation::atom_jc(&p, 0).to_grid(&grid, 0.0).unwrap();
        let req = SpectrumRequest::new(0.01, 100.0, linspace(0.8, 1.2, 5)).unwrap();
        assert!(matches!(ew_numeric(&cg, &req), Err(Error::UnderSampled { .. })));
        let off = SpectrumRequest::new(0.01, 33.3, linspace(0.8, 1.2, 5)).unwrap();
        assert!(ew_numeric(&cg, &off).is_err());
    }

    #[test]
    fn dvrs_examples() {
        let vrs = jc(0.25);
        let flat = ModelParams::new(1.0, 1.0, 0.25, Deformation::LinearKerr { chi: 0.0 }).unwrap();
        for w in linspace(0.7, 1.3, 61) {
            assert!((dvrs_longtime(&flat, 0.01, w).unwrap() - vrs_longtime(&vrs, 0.01, w)).abs() < 1e-12);
        }

        let chi = 0.125;
        let wc = crate::hamiltonian::selective_cavity_frequency(0, chi).unwrap();
        let res = ModelParams::new(1.0, wc, 0.25, Deformation::LinearKerr { chi }).unwrap();
        let l = dvrs_lines(&res).unwrap();
        assert!(l.detuning.abs() < 1e-15);
        assert!((l.center_upper - l.center_lower - 0.25 * 1.125f64.sqrt()).abs() < 1e-15);
        assert!((0.25 * 1.125f64.sqrt() - 0.26517).abs() < 1e-5);
        assert_eq!(l.weight_lower, l.weight_upper);

        let det = ModelParams::new(1.0, 0.8, 0.25, Deformation::LinearKerr { chi: 0.0 }).unwrap();
        let l = dvrs_lines(&det).unwrap();
        assert!(l.detuning > 0.0);
        assert!(l.weight_lower < l.weight_upper);
        let left = dvrs_longtime(&det, 0.01, l.center_lower).unwrap();
        let right = dvrs_longtime(&det, 0.01, l.center_upper).unwrap();
        assert!(left < right);
    }

    #[test]
    fn kerr_longtime_examples() {
        let l = HilbertLayout::new(8).unwrap();
        let p0 = ModelParams::new(1.0, 1.0, 0.0, Deformation::LinearKerr { chi: 0.0 }).unwrap();
        let vac = make_initial_state(&StateSpec::FockField { n: 0 }, &l).unwrap();
        assert_eq!(kerr_longtime(&vac, &p0, 0.05, 1.0).unwrap(), 0.0);
        let one = make_initial_state(&StateSpec::FockField { n: 1 }, &l).unwrap();
        assert!((kerr_longtime(&one, &p0, 0.05, 1.0).unwrap() - 2.0 / 0.05).abs() < 1e-12);

        let p = ModelParams::new(1.0, 1.0, 0.0, Deformation::LinearKerr { chi: 0.2 }).unwrap();
        let omega = linspace(0.5, 6.0, 5501);
        let centroid = |nbar: f64| {
            let alpha = C64::new(nbar.sqrt(), 0.0);
            let spec = StateSpec::CoherentField { alpha };
            let lay = HilbertLayout::new(spec.required_cutoff().unwrap()).unwrap();
            let s = make_initial_state(&spec, &lay).unwrap();
            let v: Vec<f64> = omega.iter().map(|&w| kerr_longtime(&s, &p, 0.05, w).unwrap()).collect();
            let total: f64 = v.iter().sum();
            omega.iter().zip(&v).map(|(w, x)| w * x).sum::<f64>() / total
        };
        assert!(centroid(4.0) > centroid(2.0));
    }

    #[test]
    fn peak_refinement_is_exact_for_parabolas() {
        let omega = linspace(-1.0, 1.0, 21);
        let vals: Vec<f64> = omega.iter().map(|w| 3.0 - (w - 0.037).powi(2)).collect();
        let p = find_peaks(&omega, &vals, 0.0);
        assert_eq!(p.len(), 1);
        assert!((p[0].omega - 0.037).abs() < 1e-12);
        assert!((p[0].height - 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn spectra_are_nonnegative(
            om in 0.05..0.5f64, gamma in 0.005..0.1f64, gt in 0.1..10.0f64, n in 0usize..4
        ) {
            let p = jc(om);
            let t = gt / gamma;
            let omega = linspace(0.5, 1.5, 101);
            for w in &omega {
                prop_assert!(vrs_longtime(&p, gamma, *w) >= 0.0);
                prop_assert!(vrs_fulltime(&p, gamma, *w, t) >= -1e-12);
            }
            let frame = 1.0;
            let corr = AnalyticCorrelation::atom_jc(&p, n);
            let offset = 0.5 + corr.max_frequency(frame);
            let grid = TimeGrid::with_max_step(t, (2.0 * PI / (20.0 * offset)).min(t / 50.0)).unwrap();
            let cg = corr.to_grid(&grid, frame).unwrap();
            let req = SpectrumRequest::new(gamma, t, omega).unwrap().with_frame(frame);
            let s = ew_numeric(&cg, &req).unwrap();
            prop_assert!(s.values.iter().all(|&v| v >= 0.0));
        }
    }
}
