//! Simulation run configuration.
//!
//! ```json
//! {
//!   "source": {"kind": "pure", "state": "D"},
//!   "settings": ["HV", "DA", "RL"],
//!   "trials_per_setting": 1000000,
//!   "efficiency": 1.0,
//!   "seed": 7,
//!   "output_dir": "run-d"
//! }
//! ```
//!
//! `source.kind` is one of `pure` (`state` name or `amplitudes`),
//! `classical_mixture` (`components`, each a pure state with a `weight`),
//! `bell_phi_plus` (`phase_deg`, `visibility`) or `custom` (inline `state`
//! or a `path` relative to the config file). Settings are basis names
//! (`"DA"`, `"HV,RL"`), explicit `{"arm1": {"hwp", "qwp"}, "arm2"}`
//! objects, or the string `"tomography"` for the full tomography set, which
//! is also the default.

use std::path::{Path, PathBuf};

use qrng_core::optics::{self, Basis, MeasurementSetting, SimulationOptions, SourceModel};
use qrng_core::tomography;
use qrng_core::{Complex64, DensityMatrix, PureState};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::format::{self, SettingJson, StateJson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PureSpec {
    /// One of H, V, D, A, R, L, phi_plus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Pure {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitudes: Option<Vec<[f64; 2]>>,
    },
    ClassicalMixture {
        components: Vec<ComponentSpec>,
    },
    BellPhiPlus {
        #[serde(default)]
        phase_deg: f64,
        #[serde(default = "one")]
        visibility: f64,
    },
    Custom {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<StateJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SettingSpec {
    Named(String),
    Explicit(SettingJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SettingsSpec {
    Preset(String),
    List(Vec<SettingSpec>),
}

impl Default for SettingsSpec {
    fn default() -> Self {
        SettingsSpec::Preset("tomography".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub source: SourceSpec,
    #[serde(default)]
    pub settings: SettingsSpec,
    pub trials_per_setting: u64,
    #[serde(default = "one")]
    pub efficiency: f64,
    #[serde(default)]
    pub background: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// A configuration that passed validation, ready to run.
#[derive(Debug, Clone)]
pub struct ValidatedRun {
    pub source: DensityMatrix,
    pub settings: Vec<MeasurementSetting>,
    pub trials_per_setting: u64,
    pub options: SimulationOptions,
    pub seed: u64,
}

pub fn named_state(name: &str) -> Result<PureState> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re, im| Complex64::new(re, im);
    let amps = match name {
        "H" => return Ok(PureState::horizontal()),
        "V" => return Ok(PureState::vertical()),
        "D" => return Ok(PureState::diagonal()),
        "phi_plus" => return Ok(PureState::phi_plus(0.0)),
        "A" => vec![c(s, 0.0), c(-s, 0.0)],
        "R" => vec![c(s, 0.0), c(0.0, s)],
        "L" => vec![c(s, 0.0), c(0.0, -s)],
        other => {
            return Err(AppError::validation(format!(
                "unknown state {other:?}, expected one of H, V, D, A, R, L, phi_plus"
            )))
        }
    };
    Ok(PureState::new(amps)?)
}

fn pure_from(state: &Option<String>, amplitudes: &Option<Vec<[f64; 2]>>) -> Result<PureState> {
    match (state, amplitudes) {
        (Some(name), None) => named_state(name).map_err(|e| e.context("state")),
        (None, Some(a)) => {
            PureState::new(a.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .map_err(|e| AppError::from(e).context("amplitudes"))
        }
        _ => Err(AppError::validation(
            "give exactly one of `state` or `amplitudes`",
        )),
    }
}

impl SourceSpec {
    /// `base` resolves relative `path`s of custom sources.
    pub fn build(&self, base: &Path) -> Result<DensityMatrix> {
        let model = match self {
            SourceSpec::Pure { state, amplitudes } => {
                SourceModel::Pure(pure_from(state, amplitudes).map_err(|e| e.context("source"))?)
            }
            SourceSpec::ClassicalMixture { components } => SourceModel::ClassicalMixture(
                components
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        pure_from(&c.state, &c.amplitudes)
                            .map(|psi| (psi, c.weight))
                            .map_err(|e| e.context(format_args!("source.components[{i}]")))
                    })
                    .collect::<Result<_>>()?,
            ),
            SourceSpec::BellPhiPlus {
                phase_deg,
                visibility,
            } => SourceModel::BellPhiPlus {
                phase: phase_deg.to_radians(),
                visibility: *visibility,
            },
            SourceSpec::Custom { state, path } => {
                let rho = match (state, path) {
                    (Some(s), None) => DensityMatrix::try_from(s)?,
                    (None, Some(p)) => format::read_state(&base.join(p))?,
                    _ => {
                        return Err(
                            AppError::validation("give exactly one of `state` or `path`")
                                .context("source"),
                        )
                    }
                };
                SourceModel::Custom(rho)
            }
        };
        let field = match self {
            SourceSpec::ClassicalMixture { .. } => "source.components[*].weight",
            SourceSpec::BellPhiPlus { .. } => "source.visibility",
            _ => "source",
        };
        optics::make_source(&model).map_err(|e| AppError::from(e).context(field))
    }
}

/// Parses `"HV"`, `"HV,DA"`, `"HV⊗DA"` or `"HV*DA"`.
pub fn parse_setting(name: &str) -> Result<MeasurementSetting> {
    let parts: Vec<&str> = name.split([',', '⊗', '*']).map(str::trim).collect();
    let basis = |s: &str| s.parse::<Basis>().map_err(AppError::from);
    match parts.as_slice() {
        [a] => Ok(MeasurementSetting::basis(basis(a)?)),
        [a, b] => Ok(MeasurementSetting::basis_pair(basis(a)?, basis(b)?)),
        _ => Err(AppError::validation(format!(
            "cannot parse setting {name:?}"
        ))),
    }
}

impl SettingsSpec {
    pub fn resolve(&self, dim: usize) -> Result<Vec<MeasurementSetting>> {
        let settings = match self {
            SettingsSpec::Preset(p) if p == "tomography" => tomography::tomography_settings(dim)?,
            SettingsSpec::Preset(p) => vec![parse_setting(p).map_err(|e| e.context("settings"))?],
            SettingsSpec::List(list) => list
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    match s {
                        SettingSpec::Named(n) => parse_setting(n),
                        SettingSpec::Explicit(j) => MeasurementSetting::try_from(j),
                    }
                    .map_err(|e| e.context(format_args!("settings[{i}]")))
                })
                .collect::<Result<_>>()?,
        };
        if settings.is_empty() {
            return Err(AppError::validation("settings: empty list"));
        }
        for (i, s) in settings.iter().enumerate() {
            if s.dim() != dim {
                return Err(AppError::validation(format!(
                    "settings[{i}]: {s} has {} outcomes but the source has dimension {dim}",
                    s.outcomes()
                )));
            }
        }
        Ok(settings)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        format::read_json(path)
    }

    /// Checks every field; `base` resolves relative paths.
    pub fn validate(&self, base: &Path) -> Result<ValidatedRun> {
        if self.trials_per_setting == 0 {
            return Err(AppError::validation(
                "trials_per_setting: must be at least 1",
            ));
        }
        let options = SimulationOptions {
            efficiency: self.efficiency,
            background: self.background,
        };
        options.validate().map_err(|e| {
            let field = if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
                "efficiency"
            } else {
                "background"
            };
            AppError::from(e).context(field)
        })?;
        let source = self.source.build(base)?;
        let settings = self.settings.resolve(source.dim())?;
        Ok(ValidatedRun {
            source,
            settings,
            trials_per_setting: self.trials_per_setting,
            options,
            seed: self.seed,
        })
    }

    /// Hash of everything that determines the simulated counts. The output
    /// directory is excluded so the same run written elsewhere matches.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output_dir = None;
        crate::manifest::config_hash(&c)
    }
}
