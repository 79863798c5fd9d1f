//! Spectrum computation shared by scenarios, figures and the validation
//! battery: build the model, pick a grid dense enough for the requested
//! ω window, and run the numeric and analytic paths on the same grid.

use std::f64::consts::PI;

use ewspec_core::analytic::AnalyticCorrelation;
use ewspec_core::dynamics::{
    make_initial_state, probe_operator, CorrelationEngine, CorrelationGrid, InitialState, Probe,
    StateSpec, TimeGrid,
};
use ewspec_core::hamiltonian::{build_hamiltonian, doublet_block, ModelKind, ModelParams};
use ewspec_core::operators::{Deformation, HilbertLayout};
use ewspec_core::spectrum::{
    closed_form, ew_numeric, linspace, vrs_fulltime, Quadrature, SpectrumRequest, SpectrumResult,
};
use ewspec_core::{Error, Result};
use serde::Serialize;

/// Extra Fock levels kept beyond what the state needs when the model
/// does not conserve excitations.
pub const NON_RWA_MARGIN: usize = 30;

/// Rabi period τ(n) = 2π/Ω̃_n of doublet n.
pub fn rabi_period(params: &ModelParams, n: usize) -> Result<f64> {
    let rabi = doublet_block(params, n)?.rabi;
    if rabi <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "τ({n}) is undefined: the doublet Rabi frequency is {rabi}"
        )));
    }
    Ok(2.0 * PI / rabi)
}

/// Fock cutoff used when the caller does not fix one.
pub fn default_cutoff(kind: ModelKind, state: &StateSpec) -> Result<usize> {
    let need = state.required_cutoff()?;
    Ok(match kind {
        ModelKind::FieldOnly => need.max(2),
        ModelKind::Jc | ModelKind::Djc => need + 1,
        ModelKind::Rabi | ModelKind::DRabi => need + NON_RWA_MARGIN,
    }
    .max(3))
}

#[derive(Clone, Debug, PartialEq)]
pub enum OmegaWindow {
    Explicit { min: f64, max: f64, points: usize },
    /// Covers the emission lines with a margin of max(10% of their span, 20Γ).
    Auto { points: usize },
}

#[derive(Clone, Debug)]
pub struct Setup {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub state: StateSpec,
    pub probe: Probe,
    pub cutoff: Option<usize>,
    pub gamma: f64,
    pub frame: Option<f64>,
    pub window: OmegaWindow,
    /// Observation times, ascending and positive.
    pub times: Vec<f64>,
    pub samples_per_period: f64,
    pub quadrature: Quadrature,
}

/// Everything needed to evaluate spectra on a fixed grid.
pub struct Prepared {
    pub cutoff: usize,
    pub engine: CorrelationEngine,
    pub state: InitialState,
    pub lines: Vec<f64>,
    pub frame: f64,
    pub omega: Vec<f64>,
    pub grid: TimeGrid,
    /// Grid times actually used for each requested observation time.
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridSummary {
    pub cutoff: usize,
    pub frame: f64,
    pub t_final: f64,
    pub samples: usize,
    pub step: f64,
    pub max_frequency: f64,
    pub line_count: usize,
    pub photon_deficit: f64,
}

impl Prepared {
    pub fn summary(&self) -> GridSummary {
        GridSummary {
            cutoff: self.cutoff,
            frame: self.frame,
            t_final: self.grid.t_final(),
            samples: self.grid.samples(),
            step: self.grid.step(),
            max_frequency: self.engine.max_frequency(self.frame),
            line_count: self.lines.len(),
            photon_deficit: self.state.deficit,
        }
    }
}

/// Step that resolves `per_period` samples per period of every frequency the
/// quadrature sees: the kernel's lines plus the ω offset from the frame.
pub fn quadrature_step(max_frequency: f64, offset: f64, per_period: f64) -> f64 {
    2.0 * PI / (per_period * (max_frequency + offset).max(1e-300))
}

/// Uniform grid on [0, max(times)] with every time in `times` on a sample,
/// an even number of intervals and a step no larger than `max_step`.
pub fn commensurate_grid(times: &[f64], max_step: f64) -> Result<(TimeGrid, Vec<f64>)> {
    let t_final = times.iter().copied().fold(0.0, f64::max);
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidGrid(
            "observation times must be positive".into(),
        ));
    }
    let divisor = (1..=4096usize)
        .find(|&d| {
            times.iter().all(|t| {
                let x = t / t_final * d as f64;
                (x - x.round()).abs() <= 1e-9 * d as f64
            })
        })
        .ok_or_else(|| {
            Error::InvalidGrid("observation times have no common grid".into())
        })?;
    let unit = 2 * divisor;
    let needed = (t_final / max_step).ceil().max(1.0) as usize;
    let intervals = needed.div_ceil(unit) * unit;
    let grid = TimeGrid::new(t_final, intervals + 1)?;
    let snapped = times
        .iter()
        .map(|t| grid.time((t / t_final * intervals as f64).round() as usize))
        .collect();
    Ok((grid, snapped))
}

pub fn prepare(setup: &Setup) -> Result<Prepared> {
    let cutoff = match setup.cutoff {
        Some(c) => c,
        None => default_cutoff(setup.kind, &setup.state)?,
    };
    let layout = HilbertLayout::new(cutoff)?;
    let field_only = setup.kind == ModelKind::FieldOnly;
    let h = build_hamiltonian(setup.kind, &setup.params, &layout)?;
    let op = probe_operator(setup.probe, &layout, field_only)?;
    let state = make_initial_state(&setup.state, &layout)?;
    let engine = CorrelationEngine::new(&h, &op, setup.probe, &state)?;
    let lines = engine.line_frequencies();
    if lines.is_empty() {
        return Err(Error::InvalidState(
            "the probe annihilates the initial state; the spectrum is identically zero".into(),
        ));
    }
    let (lo, hi) = (lines[0], lines[lines.len() - 1]);
    let frame = setup.frame.unwrap_or(0.5 * (lo + hi));
    let omega = match setup.window {
        OmegaWindow::Explicit { min, max, points } => {
            if points < 2 || !(min < max) {
                return Err(Error::InvalidGrid(format!(
                    "omega grid [{min}, {max}] with {points} points is empty"
                )));
            }
            linspace(min, max, points)
        }
        OmegaWindow::Auto { points } => {
            let pad = (0.1 * (hi - lo)).max(20.0 * setup.gamma);
            linspace(lo - pad, hi + pad, points)
        }
    };
    let offset = omega.iter().map(|w| (w - frame).abs()).fold(0.0, f64::max);
    let max_step = quadrature_step(engine.max_frequency(frame), offset, setup.samples_per_period);
    let (grid, times) = commensurate_grid(&setup.times, max_step)?;
    Ok(Prepared {
        cutoff,
        engine,
        state,
        lines,
        frame,
        omega,
        grid,
        times,
    })
}

fn request(setup: &Setup, prepared: &Prepared, t: f64) -> Result<SpectrumRequest> {
    Ok(SpectrumRequest::new(setup.gamma, t, prepared.omega.clone())?
        .with_frame(prepared.frame)
        .with_quadrature(setup.quadrature))
}

fn spectra_on(corr: &CorrelationGrid, setup: &Setup, prepared: &Prepared) -> Result<Vec<SpectrumResult>> {
    prepared
        .times
        .iter()
        .map(|&t| ew_numeric(corr, &request(setup, prepared, t)?))
        .collect()
}

/// Numeric spectra from the propagator engine, one per observation time.
pub fn numeric_spectra(setup: &Setup, prepared: &Prepared) -> Result<Vec<SpectrumResult>> {
    let corr = prepared.engine.correlation_grid(&prepared.grid, prepared.frame);
    spectra_on(&corr, setup, prepared)
}

/// Analytic reference available for a scenario.
pub enum Reference {
    /// Closed-form finite-time vacuum Rabi splitting.
    VrsFulltime,
    /// Analytic two-time correlation, integrated with the same quadrature.
    Kernel(AnalyticCorrelation),
}

impl Reference {
    pub fn tag(&self) -> String {
        match self {
            Reference::VrsFulltime => "closed_form:vrs_fulltime".into(),
            Reference::Kernel(a) => format!("analytic_kernel:{}", a.name()),
        }
    }
}

fn is_identity_like(d: &Deformation) -> bool {
    matches!(d, Deformation::Identity) || d.kerr_chi() == Some(0.0)
}

/// Picks the analytic reference matching the scenario, if there is one.
pub fn reference_for(setup: &Setup, state: &InitialState) -> Result<Reference> {
    let p = &setup.params;
    let resonant = p.detuning() == 0.0;
    let unsupported = || {
        Error::InvalidParameter(format!(
            "no closed form for model {} with probe {:?} and state {:?}",
            setup.kind, setup.probe, setup.state
        ))
    };
    match (setup.kind, setup.probe, setup.state) {
        (ModelKind::Jc, Probe::Atom, StateSpec::FockExcited { n: 0 }) if resonant => {
            Ok(Reference::VrsFulltime)
        }
        (ModelKind::Jc, Probe::Atom, StateSpec::FockExcited { n }) if resonant => {
            Ok(Reference::Kernel(AnalyticCorrelation::atom_jc(p, n)))
        }
        (ModelKind::Jc, Probe::Field, StateSpec::FockExcited { n }) if resonant => {
            Ok(Reference::Kernel(AnalyticCorrelation::field_jc(p, n)))
        }
        (ModelKind::Djc, Probe::Atom, StateSpec::FockExcited { n: 0 })
            if resonant && is_identity_like(&p.deformation) =>
        {
            Ok(Reference::VrsFulltime)
        }
        (ModelKind::Djc, Probe::Atom, StateSpec::FockExcited { n }) if n >= 1 => {
            Ok(Reference::Kernel(AnalyticCorrelation::atom_djc(p, n)?))
        }
        (ModelKind::FieldOnly, Probe::Field, s) if s.is_field_only() => {
            Ok(Reference::Kernel(AnalyticCorrelation::kerr_field(p, state)?))
        }
        _ => Err(unsupported()),
    }
}

/// Reference spectra on the same ω grid and observation times.
pub fn reference_spectra(
    setup: &Setup,
    prepared: &Prepared,
    reference: &Reference,
) -> Result<Vec<SpectrumResult>> {
    match reference {
        Reference::VrsFulltime => prepared
            .times
            .iter()
            .map(|&t| {
                closed_form(&request(setup, prepared, t)?, |w| {
                    Ok(vrs_fulltime(&setup.params, setup.gamma, w, t))
                })
            })
            .collect(),
        Reference::Kernel(a) => {
            let corr = a.to_grid(&prepared.grid, prepared.frame)?;
            spectra_on(&corr, setup, prepared)
        }
    }
}

pub fn max_abs_diff(a: &[SpectrumResult], b: &[SpectrumResult]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.values.iter().zip(&y.values).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}
