//! JSON file formats and their conversions to the core types.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major:
//!
//! ```json
//! {"dim": 2, "entries": [[0.5, 0], [0.5, 0], [0.5, 0], [0.5, 0]]}
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use qrng_core::audit::AuditReport;
use qrng_core::bits::{BitStream, Provenance};
use qrng_core::optics::{AnalyzerSetting, CountRecord, MeasurementSetting};
use qrng_core::tomography::{BootstrapSummary, Interval, Reconstruction};
use qrng_core::{Complex64, ComplexMatrix, DensityMatrix, TensorOrder};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.dim(),
            entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = AppError;

    fn try_from(m: &MatrixJson) -> Result<Self> {
        let entries = m
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        Ok(ComplexMatrix::new(m.dim, entries)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor_order: Option<String>,
}

impl From<&DensityMatrix> for StateJson {
    fn from(rho: &DensityMatrix) -> Self {
        let m = MatrixJson::from(rho.matrix());
        Self {
            dim: m.dim,
            entries: m.entries,
            label: rho.label().to_string(),
            tensor_order: rho.tensor_order().map(|t| t.as_str().to_string()),
        }
    }
}

impl TryFrom<&StateJson> for DensityMatrix {
    type Error = AppError;

    /// Hermiticity and trace are enforced; a slightly negative spectrum (as
    /// tomography output often has) is admitted and reported through
    /// [`DensityMatrix::is_physical`].
    fn try_from(s: &StateJson) -> Result<Self> {
        let m = ComplexMatrix::try_from(&MatrixJson {
            dim: s.dim,
            entries: s.entries.clone(),
        })?;
        let rho = DensityMatrix::measured(m, s.label.clone())?;
        match &s.tensor_order {
            None => Ok(rho),
            Some(t) => {
                let order: TensorOrder = t.parse().map_err(|e: qrng_core::Error| {
                    AppError::validation(e.to_string()).context("tensor_order")
                })?;
                if rho.dim() != 4 {
                    return Err(AppError::validation("only applies to two-photon states")
                        .context("tensor_order"));
                }
                Ok(rho.with_tensor_order(order))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerJson {
    pub hwp: f64,
    pub qwp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingJson {
    pub arm1: AnalyzerJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm2: Option<AnalyzerJson>,
}

impl From<&MeasurementSetting> for SettingJson {
    fn from(s: &MeasurementSetting) -> Self {
        let arm = |a: &AnalyzerSetting| AnalyzerJson {
            hwp: a.hwp(),
            qwp: a.qwp(),
        };
        Self {
            arm1: arm(&s.arm1),
            arm2: s.arm2.as_ref().map(arm),
        }
    }
}

impl TryFrom<&SettingJson> for MeasurementSetting {
    type Error = AppError;

    fn try_from(s: &SettingJson) -> Result<Self> {
        let arm1 = AnalyzerSetting::new(s.arm1.hwp, s.arm1.qwp)
            .map_err(|e| AppError::from(e).context("arm1"))?;
        Ok(match s.arm2 {
            None => MeasurementSetting::single(arm1),
            Some(a) => MeasurementSetting::coincidence(
                arm1,
                AnalyzerSetting::new(a.hwp, a.qwp)
                    .map_err(|e| AppError::from(e).context("arm2"))?,
            ),
        })
    }
}

/// Outcome labels: `"0"`, `"1"` for one photon; `"00"` .. `"11"` for a pair,
/// first digit for arm 1.
pub fn outcome_keys(outcomes: usize) -> &'static [&'static str] {
    if outcomes == 2 {
        &["0", "1"]
    } else {
        &["00", "01", "10", "11"]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecordJson {
    pub setting: SettingJson,
    pub counts: BTreeMap<String, u64>,
    pub total_trials: u64,
    pub seed: u64,
}

impl From<&CountRecord> for CountRecordJson {
    fn from(r: &CountRecord) -> Self {
        let keys = outcome_keys(r.counts.len());
        Self {
            setting: SettingJson::from(&r.setting),
            counts: keys
                .iter()
                .map(|k| k.to_string())
                .zip(r.counts.iter().copied())
                .collect(),
            total_trials: r.total_trials,
            seed: r.seed,
        }
    }
}

impl TryFrom<&CountRecordJson> for CountRecord {
    type Error = AppError;

    fn try_from(r: &CountRecordJson) -> Result<Self> {
        let setting = MeasurementSetting::try_from(&r.setting).map_err(|e| e.context("setting"))?;
        let keys = outcome_keys(setting.outcomes());
        if let Some(extra) = r.counts.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(AppError::validation(format!(
                "unexpected outcome {extra:?}, expected keys {keys:?}"
            ))
            .context("counts"));
        }
        let counts = keys
            .iter()
            .map(|k| {
                r.counts.get(*k).copied().ok_or_else(|| {
                    AppError::validation(format!("missing outcome {k:?}")).context("counts")
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CountRecord::new(setting, counts, r.total_trials, r.seed)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReportJson {
    pub probabilities: Vec<f64>,
    #[serde(rename = "coherence_C")]
    pub coherence_c: f64,
    pub min_entropy_bound: f64,
    pub empirical_min_entropy: f64,
    pub fidelity_to_target: Option<f64>,
    #[serde(rename = "chsh_S")]
    pub chsh_s: Option<f64>,
    pub extractable_bits: u64,
}

impl From<&AuditReport> for AuditReportJson {
    fn from(r: &AuditReport) -> Self {
        Self {
            probabilities: r.probabilities.clone(),
            coherence_c: r.coherence_c,
            min_entropy_bound: r.min_entropy_bound,
            empirical_min_entropy: r.empirical_min_entropy,
            fidelity_to_target: r.fidelity_to_target,
            chsh_s: r.chsh_s,
            extractable_bits: r.extractable_bits,
        }
    }
}

/// JSON sidecar of a packed `.bin` bit file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitSidecar {
    pub length: usize,
    pub provenance: String,
    pub seed: Option<u64>,
}

impl From<&BitStream> for BitSidecar {
    fn from(b: &BitStream) -> Self {
        Self {
            length: b.len(),
            provenance: b.provenance.as_str().to_string(),
            seed: b.seed,
        }
    }
}

impl BitSidecar {
    pub fn provenance(&self) -> Result<Provenance> {
        match self.provenance.as_str() {
            "simulated" => Ok(Provenance::Simulated),
            "external" => Ok(Provenance::External),
            other => Err(AppError::validation(format!(
                "unknown provenance {other:?}, expected \"simulated\" or \"external\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalJson {
    pub mean: f64,
    pub std: f64,
    pub lower: f64,
    pub upper: f64,
}

impl From<&Interval> for IntervalJson {
    fn from(i: &Interval) -> Self {
        Self {
            mean: i.mean,
            std: i.std,
            lower: i.lower,
            upper: i.upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapJson {
    pub n_resamples: usize,
    /// Per-entry standard deviations, `[re, im]`, row-major.
    pub entry_std: Vec<[f64; 2]>,
    pub coherence: IntervalJson,
    pub min_entropy_bound: IntervalJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<IntervalJson>,
}

impl From<&BootstrapSummary> for BootstrapJson {
    fn from(b: &BootstrapSummary) -> Self {
        Self {
            n_resamples: b.n_resamples,
            entry_std: b
                .entry_std_re
                .iter()
                .zip(&b.entry_std_im)
                .map(|(&re, &im)| [re, im])
                .collect(),
            coherence: IntervalJson::from(&b.coherence),
            min_entropy_bound: IntervalJson::from(&b.min_entropy_bound),
            fidelity: b.fidelity.as_ref().map(IntervalJson::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub dim: usize,
    pub stokes: Vec<f64>,
    pub raw: MatrixJson,
    pub projected: StateJson,
    pub eigenvalues_before: Vec<f64>,
    pub eigenvalues_after: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_to_truth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapJson>,
}

impl ReconstructionReport {
    pub fn new(rec: &Reconstruction) -> Self {
        Self {
            dim: rec.raw.dim(),
            stokes: rec.stokes.values().to_vec(),
            raw: MatrixJson::from(&rec.raw),
            projected: StateJson::from(rec.state()),
            eigenvalues_before: rec.projection.eigenvalues_before.clone(),
            eigenvalues_after: rec.projection.eigenvalues_after.clone(),
            fidelity_to_truth: None,
            bootstrap: None,
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| AppError::validation(e.to_string()).context(path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| AppError::Unexpected(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let s: StateJson = read_json(path)?;
    DensityMatrix::try_from(&s).map_err(|e| e.context(path.display()))
}

/// Reads a `.bin` payload next to its `.json` sidecar.
pub fn read_bits(bin_path: &Path) -> Result<BitStream> {
    let sidecar: BitSidecar = read_json(&bin_path.with_extension("json"))?;
    let bytes = fs::read(bin_path).map_err(|e| AppError::io(bin_path, e))?;
    Ok(BitStream::from_packed(
        bytes,
        sidecar.length,
        sidecar.provenance()?,
        sidecar.seed,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qrng_core::optics::Basis;
    use qrng_core::reference;

    #[test]
    fn state_round_trip() {
        let rho = reference::two_photon();
        let json = serde_json::to_string(&StateJson::from(&rho)).unwrap();
        assert!(json.contains("\"tensor_order\":\"signal_second\""));
        let back: StateJson = serde_json::from_str(&json).unwrap();
        let back = DensityMatrix::try_from(&back).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
        assert_eq!(back.tensor_order(), rho.tensor_order());
        assert_eq!(back.label(), rho.label());
    }

    #[test]
    fn state_rejects_bad_tensor_order() {
        let mut s = StateJson::from(&reference::two_photon());
        s.tensor_order = Some("sideways".into());
        let err = DensityMatrix::try_from(&s).unwrap_err();
        assert!(err.to_string().starts_with("tensor_order"));
        let mut s = StateJson::from(&reference::single_photon());
        s.tensor_order = Some("signal_first".into());
        assert!(DensityMatrix::try_from(&s).is_err());
    }

    #[test]
    fn matrix_json_layout() {
        let m = ComplexMatrix::from_pairs(2, &[(1.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)])
            .unwrap();
        let v = serde_json::to_value(MatrixJson::from(&m)).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"dim": 2, "entries": [[1.0, 0.0], [0.0, -1.0], [0.0, 1.0], [0.0, 0.0]]})
        );
    }

    #[test]
    fn count_record_round_trip() {
        let setting = MeasurementSetting::basis_pair(Basis::DA, Basis::RL);
        let r = CountRecord::new(setting, vec![1, 2, 3, 4], 10, 9).unwrap();
        let json = CountRecordJson::from(&r);
        assert_eq!(json.counts["10"], 3);
        let v = serde_json::to_value(&json).unwrap();
        assert_eq!(v["setting"]["arm1"]["hwp"], 22.5);
        assert_eq!(v["setting"]["arm2"]["qwp"], 45.0);
        assert_eq!(CountRecord::try_from(&json).unwrap(), r);
    }

    #[test]
    fn count_record_key_errors() {
        let r = CountRecord::new(MeasurementSetting::basis(Basis::HV), vec![5, 5], 10, 0).unwrap();
        let mut json = CountRecordJson::from(&r);
        json.counts.remove("1");
        assert!(CountRecord::try_from(&json)
            .unwrap_err()
            .to_string()
            .contains("missing outcome"));
        let mut json = CountRecordJson::from(&r);
        json.counts.insert("01".into(), 1);
        assert!(CountRecord::try_from(&json)
            .unwrap_err()
            .to_string()
            .contains("unexpected"));
    }

    #[test]
    fn audit_field_names() {
        let report = AuditReport {
            probabilities: vec![0.5, 0.5],
            coherence_c: 0.5,
            min_entropy_bound: 1.0,
            empirical_min_entropy: 1.0,
            fidelity_to_target: None,
            chsh_s: Some(2.0),
            extractable_bits: 10,
        };
        let v = serde_json::to_value(AuditReportJson::from(&report)).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "chsh_S",
                "coherence_C",
                "empirical_min_entropy",
                "extractable_bits",
                "fidelity_to_target",
                "min_entropy_bound",
                "probabilities"
            ]
        );
    }

    #[test]
    fn bits_round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let bits = BitStream::from_bits(
            [
                true, false, true, true, false, false, false, false, true, true,
            ],
            Provenance::Simulated,
            Some(3),
        );
        write_file(&dir.path().join("raw.bin"), bits.as_bytes()).unwrap();
        let side = to_json(&BitSidecar::from(&bits)).unwrap();
        write_file(&dir.path().join("raw.json"), side.as_bytes()).unwrap();
        assert_eq!(
            std::fs::read(dir.path().join("raw.bin")).unwrap(),
            vec![0b0000_1101, 0b11]
        );
        assert_eq!(read_bits(&dir.path().join("raw.bin")).unwrap(), bits);
    }
}
