//! Scenario configuration.
//!
//! A scenario is a TOML document with flat sections. Unknown keys are
//! rejected, and range violations are reported against the offending
//! line. The resolved form (every default written out) is echoed into the
//! metadata sidecar, and a sidecar can be fed back in as a config.
//!
//! ```toml
//! model = "DJC"           # JC | DJC | Rabi | DRabi | FieldOnly
//! probe = "atom"          # atom | field
//! method = "both"         # numeric | closed_form | both
//! cutoff = 12             # optional Fock cutoff
//!
//! [params]
//! omega_a = 1.0
//! selective = { m = 4 }   # or omega_c = 0.9, not both
//! omega0 = 0.125
//! deformation = { kind = "linear_kerr", chi = 0.0125 }
//!
//! [state]
//! kind = "fock_excited"
//! n = 4
//!
//! [time]
//! reference = 4           # τ(n) = 2π/Ω̃_n
//! sweep_periods = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
//! samples_per_period = 20.0
//!
//! [spectrum]
//! gamma = 0.01
//! omega_min = 0.7
//! omega_max = 1.3
//! points = 1201
//!
//! [output]
//! dir = "out"
//! name = "fig5"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use ewspec_core::dynamics::{Probe, StateSpec};
use ewspec_core::hamiltonian::{selective_cavity_frequency, ModelKind, ModelParams};
use ewspec_core::operators::Deformation;
use ewspec_core::spectrum::Quadrature;
use serde::{Deserialize, Serialize};

pub const DEFAULT_GAMMA: f64 = 0.01;
pub const DEFAULT_PERIODS: f64 = 16.0;
pub const DEFAULT_SAMPLES_PER_PERIOD: f64 = 20.0;
pub const DEFAULT_POINTS: usize = 2001;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("sidecar {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
}

fn field_error(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

/// A finite float.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Finite(f64);

/// A finite float > 0.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Positive(f64);

/// A finite float ≥ 0.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NonNegative(f64);

macro_rules! checked_float {
    ($name:ident, $ok:expr, $what:literal) => {
        impl TryFrom<f64> for $name {
            type Error = String;
            fn try_from(v: f64) -> Result<Self, String> {
                let ok: fn(f64) -> bool = $ok;
                if ok(v) {
                    Ok(Self(v))
                } else {
                    Err(format!(concat!("expected ", $what, ", got {}"), v))
                }
            }
        }

        impl From<$name> for f64 {
            fn from(v: $name) -> f64 {
                v.0
            }
        }

        impl $name {
            pub fn get(self) -> f64 {
                self.0
            }
        }
    };
}

checked_float!(Finite, |v| v.is_finite(), "a finite number");
checked_float!(Positive, |v| v.is_finite() && v > 0.0, "a finite number > 0");
checked_float!(NonNegative, |v| v.is_finite() && v >= 0.0, "a finite number ≥ 0");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Numeric,
    ClosedForm,
    Both,
}

impl MethodChoice {
    pub fn numeric(self) -> bool {
        matches!(self, Self::Numeric | Self::Both)
    }

    pub fn closed_form(self) -> bool {
        matches!(self, Self::ClosedForm | Self::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Selective {
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(default = "one")]
    omega_a: Positive,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_c: Option<Positive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selective: Option<Selective>,
    #[serde(alias = "Omega0")]
    omega0: NonNegative,
    #[serde(default)]
    deformation: Deformation,
}

fn one() -> Positive {
    Positive(1.0)
}

/// Cavity frequency: given directly or tuned to make doublet m resonant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cavity {
    Explicit(f64),
    Selective(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ParamsSection {
    pub omega_a: f64,
    pub cavity: Cavity,
    pub omega0: f64,
    pub deformation: Deformation,
}

impl TryFrom<RawParams> for ParamsSection {
    type Error = String;

    fn try_from(raw: RawParams) -> Result<Self, String> {
        let cavity = match (raw.omega_c, raw.selective) {
            (Some(_), Some(_)) => {
                return Err("`omega_c` and `selective` are mutually exclusive".into())
            }
            (Some(w), None) => Cavity::Explicit(w.get()),
            (None, Some(s)) => Cavity::Selective(s.m),
            (None, None) => Cavity::Explicit(1.0),
        };
        Ok(Self {
            omega_a: raw.omega_a.get(),
            cavity,
            omega0: raw.omega0.get(),
            deformation: raw.deformation,
        })
    }
}

impl From<ParamsSection> for RawParams {
    fn from(p: ParamsSection) -> Self {
        let (omega_c, selective) = match p.cavity {
            Cavity::Explicit(w) => (Some(Positive(w)), None),
            Cavity::Selective(m) => (None, Some(Selective { m })),
        };
        Self {
            omega_a: Positive(p.omega_a),
            omega_c,
            selective,
            omega0: NonNegative(p.omega0),
            deformation: p.deformation,
        }
    }
}

impl ParamsSection {
    /// Model parameters with ω_c resolved; the deformation is forced to the
    /// identity for JC and Rabi.
    pub fn resolve(&self, kind: ModelKind) -> Result<ModelParams, ConfigError> {
        let omega_c = match self.cavity {
            Cavity::Explicit(w) => w,
            Cavity::Selective(m) => {
                let chi = self.deformation.kerr_chi().ok_or_else(|| {
                    field_error(
                        "params.selective",
                        format!("needs a linear_kerr deformation, found {}", self.deformation),
                    )
                })?;
                self.omega_a
                    * selective_cavity_frequency(m, chi)
                        .map_err(|e| field_error("params.selective", e.to_string()))?
            }
        };
        ModelParams::new(self.omega_a, omega_c, self.omega0, self.deformation)
            .map(|p| p.for_kind(kind))
            .map_err(|e| field_error("params", e.to_string()))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    /// Doublet n whose Rabi period τ(n) is the time unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<usize>,
    /// Observation time in units of τ(reference).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Positive>,
    /// Several observation times in units of τ(reference); adds a t column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_periods: Option<Vec<Positive>>,
    /// Observation time in units of 1/ω_a.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<Positive>,
    /// Observation time as the product Γt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_t: Option<Positive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_period: Option<Positive>,
}

/// How the observation times are specified.
#[derive(Clone, Debug, PartialEq)]
pub enum Observation {
    Periods { reference: usize, values: Vec<f64>, sweep: bool },
    Absolute(f64),
    GammaT(f64),
}

impl TimeSection {
    pub fn observation(&self, default_reference: Option<usize>) -> Result<Observation, ConfigError> {
        let given = [
            self.periods.is_some(),
            self.sweep_periods.is_some(),
            self.t_final.is_some(),
            self.gamma_t.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if given > 1 {
            return Err(field_error(
                "time",
                "give at most one of `periods`, `sweep_periods`, `t_final`, `gamma_t`",
            ));
        }
        if let Some(t) = self.t_final {
            return Ok(Observation::Absolute(t.get()));
        }
        if let Some(g) = self.gamma_t {
            return Ok(Observation::GammaT(g.get()));
        }
        let reference = self.reference.or(default_reference).ok_or_else(|| {
            field_error("time.reference", "needed to express times in Rabi periods")
        })?;
        if let Some(list) = &self.sweep_periods {
            if list.is_empty() {
                return Err(field_error("time.sweep_periods", "must not be empty"));
            }
            let mut values: Vec<f64> = list.iter().map(|p| p.get()).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            return Ok(Observation::Periods {
                reference,
                values,
                sweep: true,
            });
        }
        Ok(Observation::Periods {
            reference,
            values: vec![self.periods.map_or(DEFAULT_PERIODS, Positive::get)],
            sweep: false,
        })
    }

    pub fn samples_per_period(&self) -> f64 {
        self.samples_per_period
            .map_or(DEFAULT_SAMPLES_PER_PERIOD, Positive::get)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Positive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<Finite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<Finite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_shift: Option<Finite>,
    #[serde(default)]
    pub quadrature: Quadrature,
}

impl SpectrumSection {
    pub fn gamma(&self) -> f64 {
        self.gamma.map_or(DEFAULT_GAMMA, Positive::get)
    }

    pub fn points(&self) -> usize {
        self.points.unwrap_or(DEFAULT_POINTS)
    }
}

/// Coupling sweep for `eigensweep`, in units of Ω₀/2ω_a.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "zero")]
    pub coupling_min: NonNegative,
    pub coupling_max: NonNegative,
    pub points: usize,
    pub levels: usize,
}

fn zero() -> NonNegative {
    NonNegative(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    /// Samples per axis of the printed G(t₁, t₂) grid.
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_name")]
    pub name: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            name: default_name(),
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_name() -> String {
    "scenario".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<Probe>,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    pub params: ParamsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationSection>,
    #[serde(default)]
    pub output: OutputSection,
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match toml::to_string(self) {
            Ok(s) => f.write_str(&s),
            Err(_) => write!(f, "{self:?}"),
        }
    }
}

/// Parses a TOML scenario and checks the cross-field rules.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = toml::from_str(text)?;
    cfg.check()?;
    Ok(cfg)
}

/// Loads a TOML config, or the `config` member of a JSON sidecar.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if path.extension().is_some_and(|e| e == "json") {
        #[derive(Deserialize)]
        struct Sidecar {
            config: ScenarioConfig,
        }
        let side: Sidecar = serde_json::from_str(&text).map_err(|source| ConfigError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        side.config.check()?;
        Ok(side.config)
    } else {
        parse_config(&text)
    }
}

impl ScenarioConfig {
    fn check(&self) -> Result<(), ConfigError> {
        if let Some(Probe::Custom) = self.probe {
            return Err(field_error("probe", "expected `atom` or `field`"));
        }
        let s = &self.spectrum;
        let points = s.points();
        if points < 2 {
            return Err(field_error(
                "spectrum.points",
                format!("the omega grid is empty or degenerate ({points} points)"),
            ));
        }
        match (s.omega_min, s.omega_max) {
            (Some(a), Some(b)) if a.get() >= b.get() => {
                return Err(field_error(
                    "spectrum.omega_min",
                    format!("the omega grid is empty: omega_min {} ≥ omega_max {}", a.get(), b.get()),
                ))
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(field_error(
                    "spectrum.omega_min",
                    "give both omega_min and omega_max, or neither",
                ))
            }
            _ => {}
        }
        if self.time.samples_per_period() < DEFAULT_SAMPLES_PER_PERIOD {
            return Err(field_error(
                "time.samples_per_period",
                format!("must be at least {DEFAULT_SAMPLES_PER_PERIOD}"),
            ));
        }
        if let Some(state) = &self.state {
            if state.is_field_only() != (self.model == ModelKind::FieldOnly) {
                return Err(field_error(
                    "state.kind",
                    format!("state {state:?} does not fit model {}", self.model),
                ));
            }
        }
        if self.model == ModelKind::FieldOnly && self.state.is_none() {
            return Err(field_error("state", "FieldOnly needs an explicit field state"));
        }
        if let Some(sw) = &self.sweep {
            if sw.points < 2 || sw.levels == 0 || sw.coupling_max.get() <= sw.coupling_min.get() {
                return Err(field_error(
                    "sweep",
                    "needs points ≥ 2, levels ≥ 1 and coupling_max > coupling_min",
                ));
            }
        }
        if let Some(c) = &self.correlation {
            if c.samples < 2 {
                return Err(field_error("correlation.samples", "must be at least 2"));
            }
        }
        self.params.resolve(self.model)?;
        Ok(())
    }

    pub fn probe(&self) -> Probe {
        self.probe.unwrap_or(if self.model == ModelKind::FieldOnly {
            Probe::Field
        } else {
            Probe::Atom
        })
    }

    pub fn state(&self) -> StateSpec {
        self.state.unwrap_or(StateSpec::FockExcited { n: 0 })
    }

    /// Doublet index used for τ(n) when the config does not name one.
    pub fn default_reference(&self) -> Option<usize> {
        match self.state() {
            StateSpec::FockExcited { n } | StateSpec::FockPair { n } | StateSpec::Basis { n, .. } => {
                Some(n)
            }
            StateSpec::CoherentExcited { alpha } => Some(alpha.norm_sqr().round() as usize),
            _ => None,
        }
    }
}
