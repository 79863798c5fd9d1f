//! Initial states, exact propagators and two-time correlation kernels.
//!
//! Correlations are Gram kernels G(t₁,t₂) = w(t₁)†w(t₂) with
//! w(t) = U†(t) O U(t) |ψ₀⟩. The trajectory is stored in the eigenbasis of H,
//! which leaves the Gram products unchanged and lets rows that the probe never
//! reaches be dropped.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{qubit, ComplexMatrix, HilbertLayout};

/// Largest truncated probability mass accepted for coherent and thermal states.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Initial-state descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// |e, n⟩
    FockExcited { n: usize },
    /// |g, n+1⟩, the partner of |e, n⟩.
    FockPair { n: usize },
    /// |s, n⟩ for an arbitrary basis state.
    Basis { excited: bool, n: usize },
    /// |e⟩ ⊗ |α⟩
    CoherentExcited { alpha: C64 },
    /// Σ P_n |n⟩⟨n| with Bose-Einstein weights, field only.
    ThermalField { nbar: f64 },
    /// |α⟩, field only.
    CoherentField { alpha: C64 },
    /// |n⟩, field only.
    FockField { n: usize },
}

impl StateSpec {
    pub fn is_field_only(&self) -> bool {
        matches!(
            self,
            StateSpec::ThermalField { .. }
                | StateSpec::CoherentField { .. }
                | StateSpec::FockField { .. }
        )
    }

    /// Smallest Fock cutoff that can hold the state.
    pub fn required_cutoff(&self) -> Result<usize> {
        match *self {
            StateSpec::FockExcited { n } | StateSpec::FockField { n } => Ok(n + 1),
            StateSpec::Basis { n, .. } => Ok(n + 1),
            StateSpec::FockPair { n } => Ok(n + 2),
            StateSpec::CoherentExcited { alpha } | StateSpec::CoherentField { alpha } => {
                let nbar = alpha.norm_sqr();
                Ok(minimum_cutoff(nbar, |cut| poisson_tail(nbar, cut)))
            }
            StateSpec::ThermalField { nbar } => {
                check_nbar(nbar)?;
                Ok(minimum_cutoff(nbar, |cut| thermal_tail(nbar, cut)))
            }
        }
    }
}

fn check_nbar(nbar: f64) -> Result<()> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::InvalidState(format!(
            "mean photon number must be finite and non-negative, got {nbar}"
        )));
    }
    Ok(())
}

fn minimum_cutoff(nbar: f64, tail: impl Fn(usize) -> f64) -> usize {
    let mut cut = (nbar + 10.0 * nbar.sqrt() + 10.0).ceil() as usize;
    while tail(cut) >= TAIL_TOLERANCE {
        cut += 1;
    }
    cut
}

/// P_n = e^{−n̄} n̄ⁿ / n! for n < cutoff.
pub fn poisson_weights(nbar: f64, cutoff: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(cutoff);
    let mut p = (-nbar).exp();
    for n in 0..cutoff {
        if n > 0 {
            p *= nbar / n as f64;
        }
        w.push(p);
    }
    w
}

/// Σ_{n ≥ cutoff} P_n, summed directly.
pub fn poisson_tail(nbar: f64, cutoff: usize) -> f64 {
    if nbar == 0.0 {
        return if cutoff == 0 { 1.0 } else { 0.0 };
    }
    // log P_cutoff, then walk upward
    let log_p = -nbar + cutoff as f64 * nbar.ln() - ln_factorial(cutoff);
    let mut p = log_p.exp();
    let mut sum = 0.0;
    let mut n = cutoff;
    loop {
        sum += p;
        n += 1;
        p *= nbar / n as f64;
        if (n as f64 > nbar && p <= sum * 1e-17) || p == 0.0 {
            break;
        }
    }
    sum
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// P_n = n̄ⁿ / (1+n̄)ⁿ⁺¹ for n < cutoff.
pub fn thermal_weights(nbar: f64, cutoff: usize) -> Vec<f64> {
    let r = nbar / (1.0 + nbar);
    let mut p = 1.0 / (1.0 + nbar);
    let mut w = Vec::with_capacity(cutoff);
    for _ in 0..cutoff {
        w.push(p);
        p *= r;
    }
    w
}

/// Σ_{n ≥ cutoff} P_n = (n̄/(1+n̄))^cutoff.
pub fn thermal_tail(nbar: f64, cutoff: usize) -> f64 {
    (nbar / (1.0 + nbar)).powi(cutoff as i32)
}

/// Realized initial state: a weighted list of pure components.
#[derive(Clone, Debug)]
pub struct InitialState {
    pub spec: StateSpec,
    /// Dimension of the space the vectors live in (2N or N).
    pub dim: usize,
    /// (weight, vector) pairs; a pure state has one component of weight 1.
    pub components: Vec<(f64, DVector<C64>)>,
    /// Photon-number distribution over 0..N.
    pub photon_weights: Vec<f64>,
    /// Probability mass lost to the cutoff. Weights are not renormalized.
    pub deficit: f64,
}

impl InitialState {
    pub fn is_pure(&self) -> bool {
        self.components.len() == 1
    }
}

pub fn make_initial_state(spec: &StateSpec, layout: &HilbertLayout) -> Result<InitialState> {
    let cutoff = layout.fock_cutoff();
    let required = spec.required_cutoff()?;
    let tail = match *spec {
        StateSpec::CoherentExcited { alpha } | StateSpec::CoherentField { alpha } => {
            poisson_tail(alpha.norm_sqr(), cutoff)
        }
        StateSpec::ThermalField { nbar } => thermal_tail(nbar, cutoff),
        _ => 0.0,
    };
    if cutoff < required {
        return Err(Error::CutoffTooSmall {
            cutoff,
            required,
            tail,
        });
    }
    let dim = if spec.is_field_only() {
        cutoff
    } else {
        layout.dim()
    };
    let basis = |idx: usize| {
        let mut v = DVector::zeros(dim);
        v[idx] = C64::new(1.0, 0.0);
        v
    };
    let delta = |n: usize| {
        let mut w = vec![0.0; cutoff];
        w[n] = 1.0;
        w
    };
    let pure = |v: DVector<C64>, photon_weights: Vec<f64>, deficit: f64| InitialState {
        spec: *spec,
        dim,
        components: vec![(1.0, v)],
        photon_weights,
        deficit,
    };

    Ok(match *spec {
        StateSpec::FockExcited { n } => pure(basis(layout.index(true, n)), delta(n), 0.0),
        StateSpec::FockPair { n } => pure(basis(layout.index(false, n + 1)), delta(n + 1), 0.0),
        StateSpec::Basis { excited, n } => pure(basis(layout.index(excited, n)), delta(n), 0.0),
        StateSpec::FockField { n } => pure(basis(n), delta(n), 0.0),
        StateSpec::CoherentExcited { alpha } | StateSpec::CoherentField { alpha } => {
            let amps = coherent_amplitudes(alpha, cutoff);
            let mut v = DVector::zeros(dim);
            for (n, c) in amps.iter().enumerate() {
                let idx = if spec.is_field_only() {
                    n
                } else {
                    layout.index(true, n)
                };
                v[idx] = *c;
            }
            let weights = amps.iter().map(|c| c.norm_sqr()).collect();
            pure(v, weights, tail)
        }
        StateSpec::ThermalField { nbar } => {
            let weights = thermal_weights(nbar, cutoff);
            let components = weights
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(n, &p)| (p, basis(n)))
                .collect();
            InitialState {
                spec: *spec,
                dim,
                components,
                photon_weights: weights,
                deficit: tail,
            }
        }
    })
}

/// c_n = e^{−|α|²/2} αⁿ / √(n!)
pub fn coherent_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(cutoff);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..cutoff {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        out.push(c);
    }
    out
}

/// Uniform grid of `samples` points on [0, t_final].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_final: f64,
    samples: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, samples: usize) -> Result<Self> {
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "t_final must be positive and finite, got {t_final}"
            )));
        }
        if samples < 2 {
            return Err(Error::InvalidGrid(format!(
                "a time grid needs at least 2 samples, got {samples}"
            )));
        }
        Ok(Self { t_final, samples })
    }

    /// Coarsest grid whose step does not exceed `max_step`, with an even
    /// number of intervals.
    pub fn with_max_step(t_final: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {max_step}")));
        }
        let mut intervals = (t_final / max_step).ceil().max(2.0) as usize;
        intervals += intervals % 2;
        Self::new(t_final, intervals + 1)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn step(&self) -> f64 {
        self.t_final / (self.samples - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            self.t_final
        } else {
            i as f64 * self.step()
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.samples).map(|i| self.time(i)).collect()
    }

    /// Index of the sample equal to `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = (t / self.step()).round();
        if k < 0.0 || k as usize >= self.samples {
            return None;
        }
        let k = k as usize;
        ((self.time(k) - t).abs() <= 1e-9 * t.abs().max(1.0)).then_some(k)
    }
}

/// Operator whose two-time correlation is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    /// σ₋
    Atom,
    /// â
    Field,
    Custom,
}

/// Probe matrix on the composite space (or the field space when `field_only`).
pub fn probe_operator(probe: Probe, layout: &HilbertLayout, field_only: bool) -> Result<ComplexMatrix> {
    let lad = crate::operators::ladder_matrices(layout);
    match (probe, field_only) {
        (Probe::Atom, false) => {
            layout.embed(&qubit::sigma_minus(), &ComplexMatrix::identity(layout.fock_cutoff()))
        }
        (Probe::Field, false) => layout.embed(&ComplexMatrix::identity(2), &lad.a),
        (Probe::Field, true) => Ok(lad.a),
        (Probe::Atom, true) => Err(Error::InvalidParameter(
            "the atomic probe needs a qubit".into(),
        )),
        (Probe::Custom, _) => Err(Error::InvalidParameter(
            "custom probes are passed as matrices".into(),
        )),
    }
}

/// Spectral decomposition H = V Λ V†.
#[derive(Clone, Debug)]
pub struct Spectral {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl Spectral {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if defect > 1e-12 * h.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let (eigenvalues, vectors) = h.eigh()?;
        Ok(Self {
            eigenvalues,
            vectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// U(t) = V e^{−iΛt} V†
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::from_polar(1.0, -self.eigenvalues[j] * t);
        }
        ComplexMatrix::from_matrix(scaled * self.vectors.adjoint())
            .expect("square by construction")
    }

    pub fn evolve(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut c = self.vectors.ad_mul(psi);
        for (j, cj) in c.iter_mut().enumerate() {
            *cj *= C64::from_polar(1.0, -self.eigenvalues[j] * t);
        }
        &self.vectors * c
    }
}

pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(Spectral::new(h)?.propagator(t))
}

/// Relative size below which a probe amplitude is treated as exactly zero.
const DROP_TOL: f64 = 1e-15;
/// Relative size above which a frequency counts towards the sampling check.
const SIGNIFICANT_TOL: f64 = 1e-10;

/// One pure component of the trajectory in the eigenbasis:
/// x_j(t) = e^{iλ_j t} Σ_k C_jk e^{−iλ_k t}.
#[derive(Clone, Debug)]
struct ActiveBlock {
    weight: f64,
    rows: Vec<usize>,
    cols: Vec<usize>,
    coupling: DMatrix<C64>,
}

/// Trajectory generator shared by every time point of one Hamiltonian.
#[derive(Clone, Debug)]
pub struct CorrelationEngine {
    spectral: Spectral,
    probe: Probe,
    blocks: Vec<ActiveBlock>,
}

impl CorrelationEngine {
    pub fn new(
        h: &ComplexMatrix,
        probe_op: &ComplexMatrix,
        probe: Probe,
        state: &InitialState,
    ) -> Result<Self> {
        let spectral = Spectral::new(h)?;
        Self::with_spectral(spectral, probe_op, probe, state)
    }

    pub fn with_spectral(
        spectral: Spectral,
        probe_op: &ComplexMatrix,
        probe: Probe,
        state: &InitialState,
    ) -> Result<Self> {
        let d = spectral.dim();
        if probe_op.dim() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: probe_op.dim(),
            });
        }
        if state.dim != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: state.dim,
            });
        }
        let v = &spectral.vectors;
        let p = v.ad_mul(&(probe_op.as_matrix() * v));
        let blocks = state
            .components
            .iter()
            .map(|(weight, psi)| {
                let c = v.ad_mul(psi);
                let full = DMatrix::from_fn(d, d, |j, k| p[(j, k)] * c[k]);
                let scale = full.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let thr = DROP_TOL * scale;
                let rows: Vec<usize> = (0..d)
                    .filter(|&j| (0..d).any(|k| full[(j, k)].norm() > thr))
                    .collect();
                let cols: Vec<usize> = (0..d)
                    .filter(|&k| (0..d).any(|j| full[(j, k)].norm() > thr))
                    .collect();
                let coupling =
                    DMatrix::from_fn(rows.len(), cols.len(), |a, b| full[(rows[a], cols[b])]);
                ActiveBlock {
                    weight: *weight,
                    rows,
                    cols,
                    coupling,
                }
            })
            .collect();
        Ok(Self {
            spectral,
            probe,
            blocks,
        })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// Largest |λ_j − λ_k + ω_ref| over pairs with a significant amplitude.
    pub fn max_frequency(&self, frame: f64) -> f64 {
        let lam = &self.spectral.eigenvalues;
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            let scale = b.coupling.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (a, &j) in b.rows.iter().enumerate() {
                for (c, &k) in b.cols.iter().enumerate() {
                    if b.coupling[(a, c)].norm() > SIGNIFICANT_TOL * scale {
                        worst = worst.max((lam[j] - lam[k] + frame).abs());
                    }
                }
            }
        }
        worst
    }

    /// Lab-frame emission lines λ_k − λ_j with a significant amplitude,
    /// ascending, with duplicates closer than 1e-12 merged.
    pub fn line_frequencies(&self) -> Vec<f64> {
        let lam = &self.spectral.eigenvalues;
        let mut lines = Vec::new();
        for b in &self.blocks {
            let scale = b.coupling.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (a, &j) in b.rows.iter().enumerate() {
                for (c, &k) in b.cols.iter().enumerate() {
                    if b.coupling[(a, c)].norm() > SIGNIFICANT_TOL * scale {
                        lines.push(lam[k] - lam[j]);
                    }
                }
            }
        }
        lines.sort_by(f64::total_cmp);
        lines.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        lines
    }

    /// Lab-frame trajectory w(t) of component `idx`.
    pub fn trajectory(&self, idx: usize, t: f64) -> DVector<C64> {
        let x = self.eigen_trajectory(&self.blocks[idx], t, 0.0);
        let b = &self.blocks[idx];
        let mut full = DVector::zeros(self.spectral.dim());
        for (a, &j) in b.rows.iter().enumerate() {
            full[j] = x[a];
        }
        &self.spectral.vectors * full
    }

    pub fn component_count(&self) -> usize {
        self.blocks.len()
    }

    fn eigen_trajectory(&self, b: &ActiveBlock, t: f64, frame: f64) -> Vec<C64> {
        let lam = &self.spectral.eigenvalues;
        let right: Vec<C64> = b
            .cols
            .iter()
            .map(|&k| C64::from_polar(1.0, -lam[k] * t))
            .collect();
        b.rows
            .iter()
            .enumerate()
            .map(|(a, &j)| {
                let mut acc = C64::new(0.0, 0.0);
                for (c, r) in right.iter().enumerate() {
                    acc += b.coupling[(a, c)] * r;
                }
                acc * C64::from_polar(1.0, (lam[j] + frame) * t)
            })
            .collect()
    }

    /// Lab-frame kernel G(t_i, t_j) at arbitrary times.
    pub fn kernel_at(&self, times: &[f64]) -> DMatrix<C64> {
        let m = times.len();
        let mut g = DMatrix::zeros(m, m);
        for b in &self.blocks {
            let xs: Vec<Vec<C64>> = times
                .iter()
                .map(|&t| self.eigen_trajectory(b, t, 0.0))
                .collect();
            for i in 0..m {
                for j in 0..m {
                    let dot: C64 = xs[i].iter().zip(&xs[j]).map(|(a, c)| a.conj() * c).sum();
                    g[(i, j)] += dot * b.weight;
                }
            }
        }
        g
    }

    /// Samples the trajectory on `grid` in a frame rotating at `frame`.
    pub fn correlation_grid(&self, grid: &TimeGrid, frame: f64) -> CorrelationGrid {
        let times = grid.values();
        let components = self
            .blocks
            .iter()
            .map(|b| {
                let rank = b.rows.len();
                let rows: Vec<Vec<C64>> = times
                    .par_iter()
                    .map(|&t| self.eigen_trajectory(b, t, frame))
                    .collect();
                KernelFactor {
                    weight: b.weight,
                    rank,
                    data: rows.into_iter().flatten().collect(),
                }
            })
            .collect();
        CorrelationGrid {
            grid: *grid,
            frame,
            probe: self.probe,
            components,
            max_frequency: self.max_frequency(frame),
        }
    }
}

/// Weighted Gram factor: `data[i * rank + r]` is component r of u(t_i).
#[derive(Clone, Debug, PartialEq)]
pub struct KernelFactor {
    pub weight: f64,
    pub rank: usize,
    pub data: Vec<C64>,
}

impl KernelFactor {
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.rank..(i + 1) * self.rank]
    }
}

/// Correlation kernel sampled on a uniform grid, held in factored form
/// G(t_i, t_j) = Σ_c p_c u_c(t_i)† u_c(t_j) in a frame rotating at `frame`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationGrid {
    pub grid: TimeGrid,
    pub frame: f64,
    pub probe: Probe,
    pub components: Vec<KernelFactor>,
    /// Fastest frequency present in the rotating-frame trajectory.
    pub max_frequency: f64,
}

impl CorrelationGrid {
    /// Factors a lab-frame kernel by pivoted Cholesky, stopping once the
    /// residual diagonal drops below `tol` times the largest diagonal entry.
    pub fn from_kernel(
        grid: &TimeGrid,
        frame: f64,
        probe: Probe,
        max_frequency: f64,
        kernel: impl Fn(f64, f64) -> C64 + Sync,
        tol: f64,
    ) -> Result<Self> {
        let times = grid.values();
        let m = times.len();
        let rot = |i: usize, j: usize| {
            kernel(times[i], times[j]) * C64::from_polar(1.0, frame * (times[j] - times[i]))
        };
        let mut diag: Vec<f64> = (0..m).map(|i| kernel(times[i], times[i]).re).collect();
        let max_diag = diag.iter().copied().fold(0.0, f64::max);
        if diag.iter().any(|d| *d < -1e-10 * max_diag.max(1.0)) {
            return Err(Error::InvalidParameter(
                "kernel has a negative diagonal; it is not positive semidefinite".into(),
            ));
        }
        let mut columns: Vec<Vec<C64>> = Vec::new();
        let max_rank = m.min(512);
        while columns.len() < max_rank {
            let (p, &dp) = diag
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty grid");
            if dp <= tol * max_diag || dp <= 0.0 {
                break;
            }
            let s = dp.sqrt();
            let col: Vec<C64> = (0..m)
                .into_par_iter()
                .map(|i| {
                    let mut v = rot(i, p);
                    for c in &columns {
                        v -= c[i] * c[p].conj();
                    }
                    v / s
                })
                .collect();
            for i in 0..m {
                diag[i] -= col[i].norm_sqr();
            }
            diag[p] = 0.0;
            columns.push(col);
        }
        let rank = columns.len();
        let mut data = Vec::with_capacity(m * rank);
        for i in 0..m {
            for c in &columns {
                data.push(c[i].conj());
            }
        }
        Ok(Self {
            grid: *grid,
            frame,
            probe,
            components: vec![KernelFactor {
                weight: 1.0,
                rank,
                data,
            }],
            max_frequency,
        })
    }

    pub fn samples(&self) -> usize {
        self.grid.samples()
    }

    /// Rotating-frame kernel entry.
    pub fn rotating_value(&self, i: usize, j: usize) -> C64 {
        self.components
            .iter()
            .map(|c| {
                let dot: C64 = c.row(i).iter().zip(c.row(j)).map(|(a, b)| a.conj() * b).sum();
                dot * c.weight
            })
            .sum()
    }

    /// Lab-frame kernel entry G(t_i, t_j).
    pub fn value(&self, i: usize, j: usize) -> C64 {
        let (ti, tj) = (self.grid.time(i), self.grid.time(j));
        self.rotating_value(i, j) * C64::from_polar(1.0, self.frame * (ti - tj))
    }

    /// Full lab-frame kernel matrix.
    pub fn values(&self) -> DMatrix<C64> {
        let m = self.samples();
        DMatrix::from_fn(m, m, |i, j| self.value(i, j))
    }

    /// Total rank over all components.
    pub fn rank(&self) -> usize {
        self.components.iter().map(|c| c.rank).sum()
    }
}

pub fn two_time_correlation(
    h: &ComplexMatrix,
    probe_op: &ComplexMatrix,
    probe: Probe,
    state: &InitialState,
    grid: &TimeGrid,
    frame: f64,
) -> Result<CorrelationGrid> {
    let engine = CorrelationEngine::new(h, probe_op, probe, state)?;
    Ok(engine.correlation_grid(grid, frame))
}

/// Largest step for which `max_frequency` gets `per_period` samples per period.
pub fn step_for(max_frequency: f64, per_period: f64) -> f64 {
    if max_frequency <= 0.0 {
        f64::INFINITY
    } else {
        2.0 * PI / (per_period * max_frequency)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, ModelKind, ModelParams};
    use crate::operators::Deformation;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn layout(n: usize) -> HilbertLayout {
        HilbertLayout::new(n).unwrap()
    }

    #[test]
    fn fock_excited_is_a_basis_vector() {
        let l = layout(5);
        let s = make_initial_state(&StateSpec::FockExcited { n: 0 }, &l).unwrap();
        let v = &s.components[0].1;
        assert_eq!(v.norm(), 1.0);
        assert_eq!(v[l.index(true, 0)], C64::new(1.0, 0.0));
        assert!(s.is_pure());
    }

    #[test]
    fn coherent_and_thermal_weights() {
        let s = make_initial_state(
            &StateSpec::CoherentField { alpha: C64::new(2.0, 0.0) },
            &layout(40),
        )
        .unwrap();
        let expect = (-4.0f64).exp() * 256.0 / 24.0;
        assert!((s.photon_weights[4] - expect).abs() < 1e-15);
        assert!((expect - 0.19537).abs() < 1e-5);

        let t = make_initial_state(&StateSpec::ThermalField { nbar: 2.0 }, &layout(60)).unwrap();
        assert!((t.photon_weights[0] - 1.0 / 3.0).abs() < 1e-15);
        let total: f64 = t.photon_weights.iter().sum::<f64>() + t.deficit;
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_rule() {
        let spec = StateSpec::ThermalField { nbar: 4.0 };
        let need = spec.required_cutoff().unwrap();
        assert!(thermal_tail(4.0, need) < TAIL_TOLERANCE);
        assert!(need >= 83);
        assert!(matches!(
            make_initial_state(&spec, &layout(need - 1)),
            Err(Error::CutoffTooSmall { .. })
        ));
        let coh = StateSpec::CoherentExcited { alpha: C64::new(0.0, 3.0) };
        let need = coh.required_cutoff().unwrap();
        assert!(need as f64 >= 9.0 + 30.0 + 10.0);
        let s = make_initial_state(&coh, &layout(need)).unwrap();
        let norm2 = s.components[0].1.norm_squared();
        assert!((norm2 + s.deficit - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_tail_matches_complement() {
        for nbar in [0.5, 2.0, 4.0, 9.0] {
            for cut in [1usize, 5, 10, 20] {
                let head: f64 = poisson_weights(nbar, cut).iter().sum();
                assert!((poisson_tail(nbar, cut) - (1.0 - head)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn propagator_basics() {
        let h = ComplexMatrix::from_real_diagonal(&[0.3, -1.2, 2.5]);
        let s = Spectral::new(&h).unwrap();
        assert!(s.propagator(0.0).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
        let t = 1.7;
        let u = s.propagator(t);
        for (k, e) in [0.3f64, -1.2, 2.5].iter().enumerate() {
            assert!((u.get(k, k) - C64::from_polar(1.0, -e * t)).norm() < 1e-14);
        }
        let bad = ComplexMatrix::from_fn(2, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(propagator(&bad, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn time_grid_endpoints() {
        let g = TimeGrid::new(3.0, 7).unwrap();
        let v = g.values();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[6], 3.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.index_of(1.5), Some(3));
        assert_eq!(g.index_of(1.4), None);
        let h = TimeGrid::with_max_step(10.0, 0.3).unwrap();
        assert!(h.step() <= 0.3);
        assert_eq!((h.samples() - 1) % 2, 0);
        assert!(TimeGrid::new(0.0, 5).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
    }

    fn jc(omega_c: f64, omega0: f64) -> ModelParams {
        ModelParams::new(1.0, omega_c, omega0, Deformation::Identity).unwrap()
    }

    #[test]
    fn equal_time_population_jc() {
        let l = layout(8);
        let p = jc(1.0, 0.25);
        let h = build_hamiltonian(ModelKind::Jc, &p, &l).unwrap();
        let o = probe_operator(Probe::Atom, &l, false).unwrap();
        let n = 2;
        let s = make_initial_state(&StateSpec::FockExcited { n }, &l).unwrap();
        let eng = CorrelationEngine::new(&h, &o, Probe::Atom, &s).unwrap();
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 3.1).collect();
        let g = eng.kernel_at(&times);
        let om = 0.25 * 3.0f64.sqrt();
        for (i, t) in times.iter().enumerate() {
            let expect = (om * t / 2.0).cos().powi(2);
            assert!((g[(i, i)].re - expect).abs() < 1e-10);
            assert!(g[(i, i)].im.abs() < 1e-12);
        }
    }

    #[test]
    fn kerr_fock_kernel() {
        let l = layout(10);
        let chi = 0.2;
        let wc = 0.9;
        let p = ModelParams::new(1.0, wc, 0.0, Deformation::LinearKerr { chi }).unwrap();
        let h = build_hamiltonian(ModelKind::FieldOnly, &p, &l).unwrap();
        let a = probe_operator(Probe::Field, &l, true).unwrap();
        let n = 3;
        let s = make_initial_state(&StateSpec::FockField { n }, &l).unwrap();
        let grid = TimeGrid::new(12.0, 25).unwrap();
        let corr = two_time_correlation(&h, &a, Probe::Field, &s, &grid, 0.4).unwrap();
        let nu = wc * (1.0 + 2.0 * chi * n as f64);
        for i in 0..25 {
            for j in 0..25 {
                let dt = grid.time(i) - grid.time(j);
                let expect = C64::from_polar(n as f64, nu * dt);
                assert!((corr.value(i, j) - expect).norm() < 1e-10);
            }
        }
        assert_eq!(corr.rank(), 1);
        assert!((corr.max_frequency - (0.4 - nu).abs()).abs() < 1e-12);
    }

    #[test]
    fn vacuum_lines_split_by_omega0() {
        let l = layout(6);
        let p = jc(1.0, 0.25);
        let h = build_hamiltonian(ModelKind::Jc, &p, &l).unwrap();
        let o = probe_operator(Probe::Atom, &l, false).unwrap();
        let s = make_initial_state(&StateSpec::FockExcited { n: 0 }, &l).unwrap();
        let eng = CorrelationEngine::new(&h, &o, Probe::Atom, &s).unwrap();
        let lines = eng.line_frequencies();
        assert_eq!(lines.len(), 2);
        assert!((lines[0] - 0.875).abs() < 1e-12);
        assert!((lines[1] - 1.125).abs() < 1e-12);
        assert!((eng.max_frequency(1.0) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn trajectory_stays_in_lower_doublet() {
        let l = layout(10);
        let p = ModelParams::new(1.0, 0.9, 0.3, Deformation::LinearKerr { chi: 0.05 }).unwrap();
        let h = build_hamiltonian(ModelKind::Djc, &p, &l).unwrap();
        let o = probe_operator(Probe::Atom, &l, false).unwrap();
        let n = 3;
        let s = make_initial_state(&StateSpec::FockExcited { n }, &l).unwrap();
        let eng = CorrelationEngine::new(&h, &o, Probe::Atom, &s).unwrap();
        let allowed = [l.index(false, n), l.index(true, n - 1)];
        for t in [0.0, 1.3, 17.0, 250.0] {
            let w = eng.trajectory(0, t);
            for (idx, z) in w.iter().enumerate() {
                if !allowed.contains(&idx) {
                    assert!(z.norm() < 1e-12, "idx {idx} t {t}");
                }
            }
            let psi = eng.spectral().evolve(&s.components[0].1, t);
            assert!((psi.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mixture_is_weighted_sum_of_components() {
        let l = layout(30);
        let p = ModelParams::new(1.0, 1.0, 0.0, Deformation::LinearKerr { chi: 0.05 }).unwrap();
        let h = build_hamiltonian(ModelKind::FieldOnly, &p, &l).unwrap();
        let a = probe_operator(Probe::Field, &l, true).unwrap();
        let thermal = make_initial_state(&StateSpec::ThermalField { nbar: 0.5 }, &l).unwrap();
        let times = [0.0, 0.7, 3.3, 9.1];
        let g = CorrelationEngine::new(&h, &a, Probe::Field, &thermal)
            .unwrap()
            .kernel_at(&times);
        let mut sum = DMatrix::zeros(4, 4);
        for (n, &pn) in thermal.photon_weights.iter().enumerate() {
            let fock = make_initial_state(&StateSpec::FockField { n }, &l).unwrap();
            let gn = CorrelationEngine::new(&h, &a, Probe::Field, &fock)
                .unwrap()
                .kernel_at(&times);
            sum += gn * C64::new(pn, 0.0);
        }
        assert!((g - sum).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn pivoted_cholesky_reproduces_low_rank_kernel() {
        let grid = TimeGrid::new(40.0, 161).unwrap();
        let k = |t1: f64, t2: f64| {
            C64::from_polar(1.0, 1.0 * (t1 - t2))
                * ((0.25 * t1 / 2.0).cos() * (0.25 * t2 / 2.0).cos()
                    + 0.3 * (0.1 * t1).sin() * (0.1 * t2).sin())
        };
        let c = CorrelationGrid::from_kernel(&grid, 1.0, Probe::Atom, 0.2, k, 1e-14).unwrap();
        assert_eq!(c.rank(), 2);
        for i in (0..161).step_by(7) {
            for j in (0..161).step_by(5) {
                let expect = k(grid.time(i), grid.time(j));
                assert!((c.value(i, j) - expect).norm() < 1e-12);
            }
        }
    }

    fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
        ModelParams::new(
            1.0,
            rng.random_range(0.7..1.2),
            rng.random_range(0.05..0.5),
            Deformation::LinearKerr {
                chi: rng.random_range(0.0..0.05),
            },
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn propagators_are_unitary(seed in 0u64..1000, t in 0.0..200.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_params(&mut rng);
            let h = build_hamiltonian(ModelKind::DRabi, &p, &layout(8)).unwrap();
            let u = propagator(&h, t).unwrap();
            let uu = u.product(&u.adjoint()).unwrap();
            prop_assert!(uu.max_abs_diff(&ComplexMatrix::identity(16)) <= 1e-12);
        }

        #[test]
        fn kernels_are_hermitian_and_psd(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_params(&mut rng);
            let l = layout(12);
            let kind = if seed % 2 == 0 { ModelKind::Djc } else { ModelKind::DRabi };
            let h = build_hamiltonian(kind, &p, &l).unwrap();
            let probe = if seed % 3 == 0 { Probe::Field } else { Probe::Atom };
            let o = probe_operator(probe, &l, false).unwrap();
            let s = make_initial_state(&StateSpec::FockExcited { n: (seed % 4) as usize }, &l).unwrap();
            let grid = TimeGrid::new(rng.random_range(5.0..50.0), 24).unwrap();
            let g = two_time_correlation(&h, &o, probe, &s, &grid, 1.0).unwrap().values();
            let gm = ComplexMatrix::from_matrix(g.clone()).unwrap();
            prop_assert!(gm.hermiticity_defect() <= 1e-12);
            let hermitian = ComplexMatrix::from_matrix((&g + g.adjoint()) * C64::new(0.5, 0.0)).unwrap();
            let min_eig = hermitian.eigenvalues().unwrap()[0];
            prop_assert!(min_eig >= -1e-10);
        }
    }
}
