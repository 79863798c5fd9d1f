//! Config-driven runs: spectrum, eigensweep and correlation datasets.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ewspec_core::analytic::AnalyticCorrelation;
use ewspec_core::dynamics::{make_initial_state, probe_operator, CorrelationEngine};
use ewspec_core::hamiltonian::{build_hamiltonian, eigen_sweep, ModelKind, ModelParams};
use ewspec_core::operators::HilbertLayout;
use ewspec_core::spectrum::{linspace, SpectrumResult};
use serde_json::json;

use crate::config::{Finite, Observation, ScenarioConfig};
use crate::output::{to_value, write_dataset, Cell, Table};
use crate::pipeline::{
    self, max_abs_diff, prepare, rabi_period, reference_for, OmegaWindow, Reference, Setup,
};

/// Requested observation times and the Rabi period they were expressed in.
struct Times {
    values: Vec<f64>,
    tau: Option<f64>,
    sweep: bool,
}

fn observation_times(cfg: &ScenarioConfig, params: &ModelParams) -> Result<Times> {
    Ok(match cfg.time.observation(cfg.default_reference())? {
        Observation::Periods {
            reference,
            values,
            sweep,
        } => {
            let tau = rabi_period(params, reference)
                .with_context(|| format!("time.reference = {reference}"))?;
            Times {
                values: values.iter().map(|k| k * tau).collect(),
                tau: Some(tau),
                sweep,
            }
        }
        Observation::Absolute(t) => Times {
            values: vec![t],
            tau: None,
            sweep: false,
        },
        Observation::GammaT(g) => Times {
            values: vec![g / cfg.spectrum.gamma()],
            tau: None,
            sweep: false,
        },
    })
}

fn setup_from(cfg: &ScenarioConfig, params: ModelParams, times: Vec<f64>) -> Setup {
    let s = &cfg.spectrum;
    let window = match (s.omega_min, s.omega_max) {
        (Some(a), Some(b)) => OmegaWindow::Explicit {
            min: a.get(),
            max: b.get(),
            points: s.points(),
        },
        _ => OmegaWindow::Auto { points: s.points() },
    };
    Setup {
        kind: cfg.model,
        params,
        state: cfg.state(),
        probe: cfg.probe(),
        cutoff: cfg.cutoff,
        gamma: s.gamma(),
        frame: s.frame_shift.map(Finite::get),
        window,
        times,
        samples_per_period: cfg.time.samples_per_period(),
        quadrature: s.quadrature,
    }
}

/// The config with every default that influenced the run written out.
fn resolved_echo(cfg: &ScenarioConfig, prepared: &pipeline::Prepared) -> ScenarioConfig {
    let mut echo = cfg.clone();
    echo.probe = Some(cfg.probe());
    echo.state = Some(cfg.state());
    echo.cutoff = Some(prepared.cutoff);
    let finite = |v: f64| Finite::try_from(v).expect("grid values are finite");
    echo.spectrum.gamma = Some(cfg.spectrum.gamma().try_into().expect("validated"));
    echo.spectrum.points = Some(prepared.omega.len());
    echo.spectrum.omega_min = Some(finite(prepared.omega[0]));
    echo.spectrum.omega_max = Some(finite(prepared.omega[prepared.omega.len() - 1]));
    echo.spectrum.frame_shift = Some(finite(prepared.frame));
    echo.time.samples_per_period = Some(cfg.time.samples_per_period().try_into().expect("validated"));
    if let Ok(Observation::Periods { reference, .. }) = cfg.time.observation(cfg.default_reference()) {
        echo.time.reference = Some(reference);
    }
    echo
}

fn output_dir(cfg: &ScenarioConfig, out: Option<&Path>) -> PathBuf {
    out.map_or_else(|| cfg.output.dir.clone(), Path::to_path_buf)
}

/// Runs a spectrum scenario and writes `<name>.csv` plus its sidecar.
pub fn run_spectrum(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<PathBuf> {
    let name = &cfg.output.name;
    let ctx = || format!("scenario `{name}`");
    let params = cfg.params.resolve(cfg.model)?;
    let times = observation_times(cfg, &params).with_context(ctx)?;
    let setup = setup_from(cfg, params, times.values.clone());
    let prepared = prepare(&setup).with_context(ctx)?;

    let numeric = if cfg.method.numeric() {
        Some(pipeline::numeric_spectra(&setup, &prepared).with_context(ctx)?)
    } else {
        None
    };
    let reference = if cfg.method.closed_form() {
        let r = reference_for(&setup, &prepared.state).with_context(ctx)?;
        let spectra = pipeline::reference_spectra(&setup, &prepared, &r).with_context(ctx)?;
        Some((r, spectra))
    } else {
        None
    };

    let mut columns: Vec<(&str, &[SpectrumResult])> = Vec::new();
    let both = numeric.is_some() && reference.is_some();
    if let Some(n) = &numeric {
        columns.push((if both { "S_numeric" } else { "S" }, n));
    }
    if let Some((_, r)) = &reference {
        columns.push((if both { "S_closed_form" } else { "S" }, r));
    }
    let table = spectrum_table(&prepared.omega, &prepared.times, times.sweep, &columns);

    let mut methods: Vec<String> = Vec::new();
    if let Some(n) = &numeric {
        methods.push(n[0].method.tag().to_string());
    }
    if let Some((r, _)) = &reference {
        methods.push(r.tag());
    }
    let diff = match (&numeric, &reference) {
        (Some(n), Some((_, r))) => Some(max_abs_diff(n, r)),
        _ => None,
    };
    let meta = json!({
        "kind": "spectrum",
        "config": to_value(&resolved_echo(cfg, &prepared)),
        "resolved_params": to_value(&setup.params),
        "rabi_period": times.tau,
        "observation_times": prepared.times,
        "grid": to_value(&prepared.summary()),
        "methods": methods,
        "max_abs_diff": diff,
    });
    write_dataset(&output_dir(cfg, out), name, &table, meta)
}

/// Long-format spectrum table: [t,] omega, one S column per method.
pub fn spectrum_table(
    omega: &[f64],
    times: &[f64],
    with_t: bool,
    columns: &[(&str, &[SpectrumResult])],
) -> Table {
    let mut header: Vec<String> = Vec::new();
    if with_t {
        header.push("t".into());
    }
    header.push("omega".into());
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    let mut table = Table::new(header);
    for (ti, &t) in times.iter().enumerate() {
        for (wi, &w) in omega.iter().enumerate() {
            let mut row: Vec<Cell> = Vec::with_capacity(columns.len() + 2);
            if with_t {
                row.push(t.into());
            }
            row.push(w.into());
            row.extend(columns.iter().map(|(_, s)| Cell::Float(s[ti].values[wi])));
            table.push(row);
        }
    }
    table
}

/// Lowest eigenvalues over a coupling sweep.
pub fn run_eigensweep(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<PathBuf> {
    let Some(sweep) = &cfg.sweep else {
        bail!("eigensweep needs a [sweep] section");
    };
    let params = cfg.params.resolve(cfg.model)?;
    let x = linspace(sweep.coupling_min.get(), sweep.coupling_max.get(), sweep.points);
    let couplings: Vec<f64> = x.iter().map(|v| 2.0 * params.omega_a * v).collect();
    let start = cfg.cutoff.unwrap_or((sweep.levels / 2 + 2).max(8));
    let layout = HilbertLayout::new(start)?;
    let result = eigen_sweep(cfg.model, &params, &couplings, &layout, sweep.levels)
        .with_context(|| format!("eigensweep `{}`", cfg.output.name))?;
    let mut header = vec!["coupling".to_string()];
    header.extend((0..sweep.levels).map(|k| format!("E{k}")));
    header.push("cutoff".into());
    let mut table = Table::new(header);
    for ((v, levels), cut) in x.iter().zip(&result.levels).zip(&result.cutoffs) {
        let mut row = vec![Cell::Float(*v)];
        row.extend(levels.iter().map(|e| Cell::Float(*e)));
        row.push(Cell::Int(*cut));
        table.push(row);
    }
    let mut echo = cfg.clone();
    echo.cutoff = Some(start);
    let meta = json!({
        "kind": "eigensweep",
        "config": to_value(&echo),
        "resolved_params": to_value(&params),
        "coupling_axis": "Omega0 / (2 omega_a)",
        "cutoffs": result.cutoffs,
    });
    write_dataset(&output_dir(cfg, out), &cfg.output.name, &table, meta)
}

/// G(t₁, t₂) on a square grid, with the analytic kernel alongside when asked.
pub fn run_correlation(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<PathBuf> {
    let name = &cfg.output.name;
    let params = cfg.params.resolve(cfg.model)?;
    let times = observation_times(cfg, &params)?;
    let t_final = times.values.iter().copied().fold(0.0, f64::max);
    let samples = cfg.correlation.as_ref().map_or(32, |c| c.samples);
    let grid = linspace(0.0, t_final, samples);
    let state_spec = cfg.state();
    let cutoff = match cfg.cutoff {
        Some(c) => c,
        None => pipeline::default_cutoff(cfg.model, &state_spec)?,
    };
    let layout = HilbertLayout::new(cutoff)?;
    let field_only = cfg.model == ModelKind::FieldOnly;
    let h = build_hamiltonian(cfg.model, &params, &layout)?;
    let op = probe_operator(cfg.probe(), &layout, field_only)?;
    let state = make_initial_state(&state_spec, &layout)?;
    let numeric = CorrelationEngine::new(&h, &op, cfg.probe(), &state)?.kernel_at(&grid);

    let analytic = if cfg.method.closed_form() {
        let setup = setup_from(cfg, params, times.values.clone());
        Some(match reference_for(&setup, &state)? {
            Reference::Kernel(a) => a,
            Reference::VrsFulltime => AnalyticCorrelation::atom_jc(&params, 0),
        })
    } else {
        None
    };
    let mut header = vec!["t1", "t2"];
    if cfg.method.numeric() {
        header.extend(["re_numeric", "im_numeric"]);
    }
    if analytic.is_some() {
        header.extend(["re_closed_form", "im_closed_form"]);
    }
    let mut table = Table::new(header);
    let mut diff: f64 = 0.0;
    for (i, &t1) in grid.iter().enumerate() {
        for (j, &t2) in grid.iter().enumerate() {
            let mut row = vec![Cell::Float(t1), Cell::Float(t2)];
            let g = numeric[(i, j)];
            if cfg.method.numeric() {
                row.extend([Cell::Float(g.re), Cell::Float(g.im)]);
            }
            if let Some(a) = &analytic {
                let z = a.eval(t1, t2);
                diff = diff.max((z - g).norm());
                row.extend([Cell::Float(z.re), Cell::Float(z.im)]);
            }
            table.push(row);
        }
    }
    let mut echo = cfg.clone();
    echo.cutoff = Some(cutoff);
    echo.state = Some(state_spec);
    echo.probe = Some(cfg.probe());
    let meta = json!({
        "kind": "correlation",
        "config": to_value(&echo),
        "resolved_params": to_value(&params),
        "samples": samples,
        "t_final": t_final,
        "analytic": analytic.as_ref().map(|a| a.name()),
        "max_abs_diff": (cfg.method == crate::config::MethodChoice::Both).then_some(diff),
    });
    write_dataset(&output_dir(cfg, out), name, &table, meta)
}
