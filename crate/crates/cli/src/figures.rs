//! Frozen figure recipes. Each figure emits one CSV per panel plus a sidecar
//! listing the parameters, grids and method tags behind every column.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ewspec_core::dynamics::{make_initial_state, Probe, StateSpec};
use ewspec_core::hamiltonian::{
    doublet_block, eigen_sweep, rwa_nmax, selective_cavity_frequency, ModelKind, ModelParams,
};
use ewspec_core::operators::{Deformation, HilbertLayout};
use ewspec_core::spectrum::{dvrs_lines, dvrs_longtime, kerr_longtime, linspace, Quadrature};
use ewspec_core::C64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{to_value, write_dataset, Cell, Table};
use crate::pipeline::{
    self, max_abs_diff, prepare, rabi_period, reference_for, OmegaWindow, Setup,
};

/// Named curves of one panel and its metadata.
type Panel = (Vec<(String, Vec<f64>)>, Value);

pub const FIGURE_IDS: [&str; 12] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c", "fig3", "fig4", "fig5", "fig6",
    "fig7",
];

// Nonlinear field.
const FIG1_CHI: f64 = 0.2;
const FIG1_OMEGA_C: f64 = 1.0;
const FIG1_GAMMA: f64 = 0.05 * FIG1_OMEGA_C;
const FIG1_FOCK: [usize; 3] = [1, 2, 3];
const FIG1_NBAR: [f64; 2] = [2.0, 4.0];
const FIG1_GAMMA_T: f64 = 20.0;

// Energy levels.
const FIG2_CHI: f64 = 0.05;
const FIG2_M: usize = 2;
const FIG2_CAPTION_OMEGA_C: f64 = 0.7692;
const FIG2_COUPLING_MAX: f64 = 0.3;
const FIG2_POINTS: usize = 121;
const FIG2_LEVELS: usize = 12;
const FIG2_START_CUTOFF: usize = 16;
const FIG2_BOX_COUPLING: f64 = 0.05;

// Deformed vacuum Rabi splitting.
const FIG3_OMEGA_C: f64 = 0.8;
const FIG3_OMEGA0: f64 = 0.25;
const FIG3_GAMMA: f64 = 0.01;
const FIG3_CHI: [f64; 3] = [0.0, 0.125, 0.25];
const FIG3_GAMMA_T: f64 = 20.0;

// Photon-number dependence.
const FIG4_OMEGA_C: f64 = 0.9;
const FIG4_OMEGA0: f64 = 0.25;
const FIG4_GAMMA: f64 = 0.01;
const FIG4_CHI: f64 = 0.0125;
const FIG4_FOCK: [usize; 3] = [1, 3, 5];
const FIG4_REFERENCE: usize = 4;
const FIG4_PERIODS: f64 = 16.0;

// Time evolution and χ dependence.
const LATE_CHI: f64 = 0.0125;
const LATE_OMEGA0: f64 = 0.125;
const LATE_GAMMA: f64 = 0.01;
const LATE_PERIODS: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
const FIG5_N: usize = 4;
const FIG6_ALPHA: f64 = 2.0;
const FIG6_REFERENCE: usize = 2;
const FIG7_CHI: [f64; 6] = [0.0, 0.0025, 0.005, 0.0075, 0.01, 0.0125];
const FIG7_PERIODS: f64 = 16.0;

const SAMPLES_PER_PERIOD: f64 = 20.0;

pub struct Dataset {
    pub name: String,
    pub table: Table,
    pub meta: Value,
}

fn kerr(chi: f64) -> Deformation {
    Deformation::LinearKerr { chi }
}

fn label(x: f64) -> String {
    format!("{x}")
}

fn spectrum_setup(
    kind: ModelKind,
    params: ModelParams,
    state: StateSpec,
    probe: Probe,
    gamma: f64,
    window: (f64, f64, usize),
    times: Vec<f64>,
) -> Setup {
    Setup {
        kind,
        params,
        state,
        probe,
        cutoff: None,
        gamma,
        frame: None,
        window: OmegaWindow::Explicit {
            min: window.0,
            max: window.1,
            points: window.2,
        },
        times,
        samples_per_period: SAMPLES_PER_PERIOD,
        quadrature: Quadrature::Simpson,
    }
}

/// Numeric and (optionally) analytic-kernel spectra of one curve.
struct Curve {
    numeric: Vec<Vec<f64>>,
    reference: Option<Vec<Vec<f64>>>,
    meta: Value,
}

fn run_curve(setup: &Setup, with_reference: bool) -> Result<Curve> {
    let prepared = prepare(setup)?;
    let numeric = pipeline::numeric_spectra(setup, &prepared)?;
    let mut methods = vec![numeric[0].method.tag().to_string()];
    let mut diff = None;
    let reference = if with_reference {
        let r = reference_for(setup, &prepared.state)?;
        let spectra = pipeline::reference_spectra(setup, &prepared, &r)?;
        methods.push(r.tag());
        diff = Some(max_abs_diff(&numeric, &spectra));
        Some(spectra.into_iter().map(|s| s.values).collect())
    } else {
        None
    };
    Ok(Curve {
        numeric: numeric.into_iter().map(|s| s.values).collect(),
        reference,
        meta: json!({
            "model": setup.kind.to_string(),
            "params": to_value(&setup.params),
            "state": to_value(&setup.state),
            "probe": to_value(&setup.probe),
            "gamma": setup.gamma,
            "observation_times": prepared.times,
            "grid": to_value(&prepared.summary()),
            "methods": methods,
            "max_abs_diff": diff,
        }),
    })
}

fn wide_table(omega: &[f64], columns: &[(String, Vec<f64>)]) -> Table {
    let mut header = vec!["omega".to_string()];
    header.extend(columns.iter().map(|(n, _)| n.clone()));
    let mut t = Table::new(header);
    for (i, &w) in omega.iter().enumerate() {
        let mut row = vec![Cell::Float(w)];
        row.extend(columns.iter().map(|(_, v)| Cell::Float(v[i])));
        t.push(row);
    }
    t
}

fn fig1(panel: &str) -> Result<Dataset> {
    let (chi, window) = match panel {
        "fig1a" => (0.0, (0.5, 1.5, 1001)),
        "fig1b" => (FIG1_CHI, (1.0, 2.6, 1601)),
        "fig1c" => (FIG1_CHI, (1.0, 8.0, 2801)),
        "fig1d" => (FIG1_CHI, (1.0, 14.0, 5201)),
        _ => unreachable!(),
    };
    let params = ModelParams::new(1.0, FIG1_OMEGA_C, 0.0, kerr(chi))?;
    let omega = linspace(window.0, window.1, window.2);
    let states: Vec<(String, StateSpec)> = match panel {
        "fig1a" | "fig1b" => FIG1_FOCK
            .iter()
            .map(|&n| (format!("n{n}"), StateSpec::FockField { n }))
            .collect(),
        "fig1c" => FIG1_NBAR
            .iter()
            .map(|&nb| {
                let alpha = C64::new(nb.sqrt(), 0.0);
                (format!("nbar{}", label(nb)), StateSpec::CoherentField { alpha })
            })
            .collect(),
        _ => FIG1_NBAR
            .iter()
            .map(|&nb| (format!("nbar{}", label(nb)), StateSpec::ThermalField { nbar: nb }))
            .collect(),
    };
    let numeric = matches!(panel, "fig1a" | "fig1b");
    let curves = states
        .par_iter()
        .map(|(name, spec)| -> Result<Panel> {
            let layout = HilbertLayout::new(spec.required_cutoff()?.max(2))?;
            let state = make_initial_state(spec, &layout)?;
            let closed = omega
                .iter()
                .map(|&w| kerr_longtime(&state, &params, FIG1_GAMMA, w))
                .collect::<ewspec_core::Result<Vec<_>>>()?;
            let mut cols = vec![(format!("S_longtime_{name}"), closed)];
            let mut meta = json!({
                "state": to_value(spec),
                "cutoff": layout.fock_cutoff(),
                "photon_deficit": state.deficit,
                "longtime": "closed_form:kerr_longtime",
            });
            if numeric {
                let setup = spectrum_setup(
                    ModelKind::FieldOnly,
                    params,
                    *spec,
                    Probe::Field,
                    FIG1_GAMMA,
                    window,
                    vec![FIG1_GAMMA_T / FIG1_GAMMA],
                );
                let curve = run_curve(&setup, false)?;
                cols.push((format!("S_numeric_{name}"), curve.numeric[0].clone()));
                meta["numeric"] = curve.meta;
            }
            Ok((cols, meta))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = Vec::new();
    let mut curve_meta = Vec::new();
    for (cols, meta) in curves {
        columns.extend(cols);
        curve_meta.push(meta);
    }
    let peaks: Vec<f64> = FIG1_FOCK
        .iter()
        .map(|&n| FIG1_OMEGA_C * (1.0 + 2.0 * chi * n as f64))
        .collect();
    Ok(Dataset {
        name: panel.to_string(),
        table: wide_table(&omega, &columns),
        meta: json!({
            "figure": panel,
            "chi": chi,
            "omega_c": FIG1_OMEGA_C,
            "gamma": FIG1_GAMMA,
            "numeric_gamma_t": numeric.then_some(FIG1_GAMMA_T),
            "fock_peak_positions": peaks,
            "curves": curve_meta,
        }),
    })
}

fn fig2(panel: &str) -> Result<Dataset> {
    let omega_c = selective_cavity_frequency(FIG2_M, FIG2_CHI)?;
    let base = ModelParams::new(1.0, omega_c, 0.0, kerr(FIG2_CHI))?;
    let (first, second) = match panel {
        "fig2a" => (ModelKind::Rabi, ModelKind::Jc),
        "fig2b" => (ModelKind::Djc, ModelKind::Jc),
        "fig2c" => (ModelKind::DRabi, ModelKind::Djc),
        _ => unreachable!(),
    };
    let x = linspace(0.0, FIG2_COUPLING_MAX, FIG2_POINTS);
    let couplings: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let layout = HilbertLayout::new(FIG2_START_CUTOFF)?;
    let sweeps = [first, second]
        .par_iter()
        .map(|&k| eigen_sweep(k, &base, &couplings, &layout, FIG2_LEVELS))
        .collect::<ewspec_core::Result<Vec<_>>>()?;

    let jc = base.for_kind(ModelKind::Jc);
    let bound = |p: &ModelParams, om: f64| rwa_nmax(&p.with_omega0(om)).unwrap_or(f64::NAN);
    let mut header = vec!["coupling".to_string()];
    for s in &sweeps {
        header.extend((0..FIG2_LEVELS).map(|k| format!("{}_E{k}", s.kind)));
    }
    header.extend(["nmax_jc".to_string(), "nmax_djc".to_string()]);
    let mut table = Table::new(header);
    for (i, (&v, &om)) in x.iter().zip(&couplings).enumerate() {
        let mut row = vec![Cell::Float(v)];
        for s in &sweeps {
            row.extend(s.levels[i].iter().map(|e| Cell::Float(*e)));
        }
        row.push(Cell::Float(bound(&jc, om)));
        row.push(Cell::Float(bound(&base, om)));
        table.push(row);
    }

    let mut meta = json!({
        "figure": panel,
        "models": [first.to_string(), second.to_string()],
        "chi": FIG2_CHI,
        "selective_m": FIG2_M,
        "omega_c": omega_c,
        "omega_c_caption": FIG2_CAPTION_OMEGA_C,
        "coupling_axis": "Omega0 / (2 omega_a)",
        "levels": FIG2_LEVELS,
        "cutoffs": sweeps.iter().map(|s| json!({ "model": s.kind.to_string(), "per_point": s.cutoffs })).collect::<Vec<_>>(),
    });
    if panel != "fig2a" {
        let lo_hi: Vec<(f64, f64)> = linspace(0.0, FIG2_BOX_COUPLING, 11)
            .iter()
            .map(|v| {
                let d = doublet_block(&base.with_omega0(2.0 * v), FIG2_M)?;
                Ok((d.e_minus, d.e_plus))
            })
            .collect::<ewspec_core::Result<_>>()?;
        let lo = lo_hi.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = lo_hi.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        meta["selective_rectangle"] = json!({
            "doublet": FIG2_M,
            "coupling": [0.0, FIG2_BOX_COUPLING],
            "energy": [lo, hi],
            "effective_detuning": doublet_block(&base, FIG2_M)?.detuning,
        });
    }
    Ok(Dataset {
        name: panel.to_string(),
        table,
        meta,
    })
}

fn fig3() -> Result<Dataset> {
    let window = (0.6, 1.4, 1601);
    let omega = linspace(window.0, window.1, window.2);
    let curves = FIG3_CHI
        .par_iter()
        .map(|&chi| -> Result<Panel> {
            let params = ModelParams::new(1.0, FIG3_OMEGA_C, FIG3_OMEGA0, kerr(chi))?;
            let closed = omega
                .iter()
                .map(|&w| dvrs_longtime(&params, FIG3_GAMMA, w))
                .collect::<ewspec_core::Result<Vec<_>>>()?;
            let setup = spectrum_setup(
                ModelKind::Djc,
                params,
                StateSpec::FockExcited { n: 0 },
                Probe::Atom,
                FIG3_GAMMA,
                window,
                vec![FIG3_GAMMA_T / FIG3_GAMMA],
            );
            let curve = run_curve(&setup, false)?;
            let name = format!("chi{}", label(chi));
            Ok((
                vec![
                    (format!("S_longtime_{name}"), closed),
                    (format!("S_numeric_{name}"), curve.numeric[0].clone()),
                ],
                json!({
                    "chi": chi,
                    "lines": to_value(&dvrs_lines(&params)?),
                    "longtime": "closed_form:dvrs_longtime",
                    "numeric": curve.meta,
                }),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = Vec::new();
    let mut metas = Vec::new();
    for (c, m) in curves {
        columns.extend(c);
        metas.push(m);
    }
    Ok(Dataset {
        name: "fig3".into(),
        table: wide_table(&omega, &columns),
        meta: json!({
            "figure": "fig3",
            "omega_c": FIG3_OMEGA_C,
            "omega0": FIG3_OMEGA0,
            "gamma": FIG3_GAMMA,
            "numeric_gamma_t": FIG3_GAMMA_T,
            "curves": metas,
        }),
    })
}

fn fig4() -> Result<Dataset> {
    let params = ModelParams::new(1.0, FIG4_OMEGA_C, FIG4_OMEGA0, kerr(FIG4_CHI))?;
    let tau = rabi_period(&params, FIG4_REFERENCE)?;
    let window = (0.5, 1.5, 2001);
    let omega = linspace(window.0, window.1, window.2);
    let curves = FIG4_FOCK
        .par_iter()
        .map(|&n| -> Result<Panel> {
            let setup = spectrum_setup(
                ModelKind::Djc,
                params,
                StateSpec::FockExcited { n },
                Probe::Atom,
                FIG4_GAMMA,
                window,
                vec![FIG4_PERIODS * tau],
            );
            let curve = run_curve(&setup, true)?;
            let reference = curve.reference.expect("requested");
            let detuning = doublet_block(&params, n)?.detuning;
            Ok((
                vec![
                    (format!("S_numeric_n{n}"), curve.numeric[0].clone()),
                    (format!("S_closed_form_n{n}"), reference[0].clone()),
                ],
                json!({
                    "n": n,
                    "effective_detuning": detuning,
                    "effective_detuning_sign": if detuning > 0.0 { "+" } else if detuning < 0.0 { "-" } else { "0" },
                    "run": curve.meta,
                }),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = Vec::new();
    let mut metas = Vec::new();
    for (c, m) in curves {
        columns.extend(c);
        metas.push(m);
    }
    Ok(Dataset {
        name: "fig4".into(),
        table: wide_table(&omega, &columns),
        meta: json!({
            "figure": "fig4",
            "omega_c": FIG4_OMEGA_C,
            "omega0": FIG4_OMEGA0,
            "gamma": FIG4_GAMMA,
            "chi": FIG4_CHI,
            "rabi_period_reference": FIG4_REFERENCE,
            "rabi_period": tau,
            "periods": FIG4_PERIODS,
            "curves": metas,
        }),
    })
}

fn time_sweep(name: &str, setup: Setup, tau: f64, with_reference: bool, extra: Value) -> Result<Dataset> {
    let prepared = prepare(&setup)?;
    let numeric = pipeline::numeric_spectra(&setup, &prepared)?;
    let mut methods = vec![numeric[0].method.tag().to_string()];
    let mut diff = None;
    let reference = if with_reference {
        let r = reference_for(&setup, &prepared.state)?;
        let spectra = pipeline::reference_spectra(&setup, &prepared, &r)?;
        methods.push(r.tag());
        diff = Some(max_abs_diff(&numeric, &spectra));
        Some(spectra)
    } else {
        None
    };
    let mut columns: Vec<(&str, &[_])> = vec![(
        if with_reference { "S_numeric" } else { "S" },
        numeric.as_slice(),
    )];
    if let Some(r) = &reference {
        columns.push(("S_closed_form", r.as_slice()));
    }
    let table = crate::scenario::spectrum_table(&prepared.omega, &prepared.times, true, &columns);
    let mut meta = json!({
        "figure": name,
        "model": setup.kind.to_string(),
        "params": to_value(&setup.params),
        "state": to_value(&setup.state),
        "gamma": setup.gamma,
        "rabi_period": tau,
        "periods": LATE_PERIODS,
        "observation_times": prepared.times,
        "grid": to_value(&prepared.summary()),
        "methods": methods,
        "max_abs_diff": diff,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
        m.extend(e);
    }
    Ok(Dataset {
        name: name.into(),
        table,
        meta,
    })
}

fn fig5() -> Result<Dataset> {
    let omega_c = selective_cavity_frequency(FIG5_N, LATE_CHI)?;
    let params = ModelParams::new(1.0, omega_c, LATE_OMEGA0, kerr(LATE_CHI))?;
    let tau = rabi_period(&params, FIG5_N)?;
    let setup = spectrum_setup(
        ModelKind::Djc,
        params,
        StateSpec::FockExcited { n: FIG5_N },
        Probe::Atom,
        LATE_GAMMA,
        (0.6, 1.4, 1601),
        LATE_PERIODS.iter().map(|k| k * tau).collect(),
    );
    time_sweep("fig5", setup, tau, true, json!({ "n": FIG5_N, "rabi_period_reference": FIG5_N }))
}

fn coherent_params(chi: f64) -> Result<ModelParams> {
    let omega_c = selective_cavity_frequency(FIG6_REFERENCE, chi)?;
    Ok(ModelParams::new(1.0, omega_c, LATE_OMEGA0, kerr(chi))?)
}

fn coherent_state() -> StateSpec {
    StateSpec::CoherentExcited {
        alpha: C64::new(FIG6_ALPHA, 0.0),
    }
}

fn fig6() -> Result<Dataset> {
    let params = coherent_params(LATE_CHI)?;
    let tau = rabi_period(&params, FIG6_REFERENCE)?;
    let setup = spectrum_setup(
        ModelKind::Djc,
        params,
        coherent_state(),
        Probe::Atom,
        LATE_GAMMA,
        (0.3, 1.7, 1401),
        LATE_PERIODS.iter().map(|k| k * tau).collect(),
    );
    time_sweep(
        "fig6",
        setup,
        tau,
        false,
        json!({ "alpha": FIG6_ALPHA, "rabi_period_reference": FIG6_REFERENCE }),
    )
}

fn fig7() -> Result<Dataset> {
    let window = (0.3, 1.7, 1401);
    let omega = linspace(window.0, window.1, window.2);
    let curves = FIG7_CHI
        .par_iter()
        .map(|&chi| -> Result<(String, Vec<f64>, Value)> {
            let params = coherent_params(chi)?;
            let tau = rabi_period(&params, FIG6_REFERENCE)?;
            let setup = spectrum_setup(
                ModelKind::Djc,
                params,
                coherent_state(),
                Probe::Atom,
                LATE_GAMMA,
                window,
                vec![FIG7_PERIODS * tau],
            );
            let curve = run_curve(&setup, false)?;
            Ok((
                format!("S_chi{}", label(chi)),
                curve.numeric[0].clone(),
                json!({ "chi": chi, "rabi_period": tau, "run": curve.meta }),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = Vec::new();
    let mut metas = Vec::new();
    for (n, v, m) in curves {
        columns.push((n, v));
        metas.push(m);
    }
    Ok(Dataset {
        name: "fig7".into(),
        table: wide_table(&omega, &columns),
        meta: json!({
            "figure": "fig7",
            "alpha": FIG6_ALPHA,
            "omega0": LATE_OMEGA0,
            "gamma": LATE_GAMMA,
            "periods": FIG7_PERIODS,
            "rabi_period_reference": FIG6_REFERENCE,
            "curves": metas,
        }),
    })
}

/// Computes the datasets of one figure panel.
pub fn build(id: &str) -> Result<Dataset> {
    let out = match id {
        "fig1a" | "fig1b" | "fig1c" | "fig1d" => fig1(id),
        "fig2a" | "fig2b" | "fig2c" => fig2(id),
        "fig3" => fig3(),
        "fig4" => fig4(),
        "fig5" => fig5(),
        "fig6" => fig6(),
        "fig7" => fig7(),
        _ => bail!("unknown figure `{id}`; expected one of {} or all", FIGURE_IDS.join(", ")),
    };
    out.with_context(|| format!("figure {id}"))
}

/// Expands `all` and validates the ids.
pub fn resolve_ids(id: &str) -> Result<Vec<&'static str>> {
    if id == "all" {
        return Ok(FIGURE_IDS.to_vec());
    }
    FIGURE_IDS
        .iter()
        .find(|f| **f == id)
        .map(|f| vec![*f])
        .ok_or_else(|| anyhow!("unknown figure `{id}`; expected one of {} or all", FIGURE_IDS.join(", ")))
}

/// Builds and writes the requested figures, panels in parallel.
pub fn reproduce(id: &str, out: &Path) -> Result<Vec<PathBuf>> {
    resolve_ids(id)?
        .par_iter()
        .map(|f| {
            let d = build(f)?;
            write_dataset(out, &d.name, &d.table, d.meta)
        })
        .collect()
}
