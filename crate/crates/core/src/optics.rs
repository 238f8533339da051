//! Jones-calculus model of the polarization analyzers, the photon sources,
//! and seeded simulation of detector counts.
//!
//! Each analyzer is a quarter-wave plate followed by a half-wave plate and a
//! polarizing beam splitter. Outcome 0 is the transmitted (H) port after the
//! plates, outcome 1 the reflected (V) port. For two-arm settings the outcome
//! index is `2 * arm1 + arm2` and arm 1 is the first tensor factor.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::math;
use crate::rng::{self, StreamRng};
use crate::state::{self, DensityMatrix, PureState, TensorOrder};

/// Tolerance on `Σ P_k = I`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Born probabilities below `-PROBABILITY_TOL` mean the state is unphysical
/// for this measurement.
pub const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Waveplate {
    Half,
    Quarter,
}

impl Waveplate {
    pub fn retardance(self) -> f64 {
        match self {
            Waveplate::Half => PI,
            Waveplate::Quarter => FRAC_PI_2,
        }
    }
}

/// Jones matrix `Rot(-θ) diag(1, e^{iδ}) Rot(θ)` of a retarder with its fast
/// axis at `theta_deg`.
pub fn waveplate_unitary(kind: Waveplate, theta_deg: f64) -> ComplexMatrix {
    let (s, c) = math::sin_cos(theta_deg.to_radians());
    let e = Complex64::from_polar(1.0, kind.retardance());
    let one = Complex64::new(1.0, 0.0);
    // Rot(θ) = [[c, s], [-s, c]]
    let cc = Complex64::new(c * c, 0.0);
    let ss = Complex64::new(s * s, 0.0);
    let cs = Complex64::new(c * s, 0.0);
    ComplexMatrix::new(
        2,
        vec![
            cc * one + ss * e,
            cs * (one - e),
            cs * (one - e),
            ss * one + cc * e,
        ],
    )
    .expect("2x2")
}

/// Wave-plate angles of one analyzer arm, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSetting {
    hwp: f64,
    qwp: f64,
}

impl AnalyzerSetting {
    pub fn new(hwp: f64, qwp: f64) -> Result<Self> {
        for angle in [hwp, qwp] {
            if !(0.0..180.0).contains(&angle) {
                return Err(Error::AngleOutOfRange(angle));
            }
        }
        Ok(Self { hwp, qwp })
    }

    pub fn hwp(&self) -> f64 {
        self.hwp
    }

    pub fn qwp(&self) -> f64 {
        self.qwp
    }

    /// Combined Jones action, QWP first then HWP.
    pub fn jones(&self) -> ComplexMatrix {
        &waveplate_unitary(Waveplate::Half, self.hwp)
            * &waveplate_unitary(Waveplate::Quarter, self.qwp)
    }

    /// The canonical basis this setting realizes, if any.
    pub fn basis(&self) -> Option<Basis> {
        Basis::ALL.into_iter().find(|b| {
            let s = b.setting();
            (s.hwp - self.hwp).abs() < 1e-9 && (s.qwp - self.qwp).abs() < 1e-9
        })
    }
}

impl fmt::Display for AnalyzerSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.basis() {
            Some(b) => write!(f, "{b}"),
            None => write!(f, "(hwp {}°, qwp {}°)", self.hwp, self.qwp),
        }
    }
}

/// The three tomography bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Eigenbasis of σz, outcome 0 = H.
    HV,
    /// Eigenbasis of σx, outcome 0 = D.
    DA,
    /// Eigenbasis of σy, outcome 0 = R.
    RL,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::HV, Basis::DA, Basis::RL];

    pub fn setting(self) -> AnalyzerSetting {
        let (hwp, qwp) = match self {
            Basis::HV => (0.0, 0.0),
            Basis::DA => (22.5, 45.0),
            Basis::RL => (0.0, 45.0),
        };
        AnalyzerSetting { hwp, qwp }
    }

    /// Index of the Pauli operator diagonal in this basis.
    pub fn pauli_index(self) -> usize {
        match self {
            Basis::DA => 1,
            Basis::RL => 2,
            Basis::HV => 3,
        }
    }

    pub fn from_pauli_index(i: usize) -> Option<Basis> {
        match i {
            1 => Some(Basis::DA),
            2 => Some(Basis::RL),
            3 => Some(Basis::HV),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::HV => "HV",
            Basis::DA => "DA",
            Basis::RL => "RL",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HV" => Ok(Basis::HV),
            "DA" => Ok(Basis::DA),
            "RL" => Ok(Basis::RL),
            _ => Err(Error::InvalidParameter {
                name: "basis",
                reason: format!("unknown basis {s:?}, expected HV, DA or RL"),
            }),
        }
    }
}

/// Analyzer settings for a single-photon (one arm) or coincidence (two arm)
/// measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    pub arm1: AnalyzerSetting,
    pub arm2: Option<AnalyzerSetting>,
}

impl MeasurementSetting {
    pub fn single(arm: AnalyzerSetting) -> Self {
        Self {
            arm1: arm,
            arm2: None,
        }
    }

    pub fn coincidence(arm1: AnalyzerSetting, arm2: AnalyzerSetting) -> Self {
        Self {
            arm1,
            arm2: Some(arm2),
        }
    }

    pub fn basis(b: Basis) -> Self {
        Self::single(b.setting())
    }

    pub fn basis_pair(a: Basis, b: Basis) -> Self {
        Self::coincidence(a.setting(), b.setting())
    }

    pub fn outcomes(&self) -> usize {
        if self.arm2.is_some() {
            4
        } else {
            2
        }
    }

    pub fn dim(&self) -> usize {
        self.outcomes()
    }

    /// Canonical basis of each arm, when both are canonical.
    pub fn bases(&self) -> Option<(Basis, Option<Basis>)> {
        let first = self.arm1.basis()?;
        match self.arm2 {
            None => Some((first, None)),
            Some(a2) => Some((first, Some(a2.basis()?))),
        }
    }

    /// Stream id used when simulating this setting.
    pub fn stream_id(&self) -> u64 {
        let mut words = vec![self.arm1.hwp.to_bits(), self.arm1.qwp.to_bits()];
        if let Some(a2) = self.arm2 {
            words.extend([a2.hwp.to_bits(), a2.qwp.to_bits()]);
        }
        rng::fnv1a(words)
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.arm2 {
            None => write!(f, "{}", self.arm1),
            Some(a2) => write!(f, "{}⊗{}", self.arm1, a2),
        }
    }
}

/// Projectors `U†|H⟩⟨H|U` and `U†|V⟩⟨V|U` for one analyzer.
pub fn analyzer_projectors(setting: &AnalyzerSetting) -> [ComplexMatrix; 2] {
    let u = setting.jones();
    let u_dag = u.adjoint();
    let h = ComplexMatrix::diag(&[1.0, 0.0]);
    let v = ComplexMatrix::diag(&[0.0, 1.0]);
    [&(&u_dag * &h) * &u, &(&u_dag * &v) * &u]
}

/// Outcome projectors of a setting: two for one arm, four tensor products
/// for two arms.
pub fn setting_projectors(setting: &MeasurementSetting) -> Vec<ComplexMatrix> {
    let first = analyzer_projectors(&setting.arm1);
    match &setting.arm2 {
        None => first.into(),
        Some(a2) => {
            let second = analyzer_projectors(a2);
            let mut out = Vec::with_capacity(4);
            for p in &first {
                for q in &second {
                    out.push(linalg::tensor_product(p, q));
                }
            }
            out
        }
    }
}

/// Born-rule probabilities `Tr(ρ P_k)` for a complete projector set.
pub fn outcome_probabilities(
    rho: &DensityMatrix,
    projectors: &[ComplexMatrix],
) -> Result<Vec<f64>> {
    let dim = rho.dim();
    let mut sum = ComplexMatrix::zeros(dim);
    for p in projectors {
        if p.dim() != dim {
            return Err(Error::InvalidDimension {
                expected: dim,
                got: p.dim(),
            });
        }
        sum = &sum + p;
    }
    let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
    if deviation > COMPLETENESS_TOL {
        return Err(Error::IncompleteProjectors(deviation));
    }
    projectors
        .iter()
        .map(|p| {
            let prob = rho.matrix().trace_product(p).re;
            if prob < -PROBABILITY_TOL {
                Err(Error::InvalidDistribution(format!(
                    "Born probability {prob:.4} is negative; state is unphysical"
                )))
            } else {
                Ok(prob.max(0.0))
            }
        })
        .collect()
}

pub fn setting_probabilities(
    rho: &DensityMatrix,
    setting: &MeasurementSetting,
) -> Result<Vec<f64>> {
    if setting.dim() != rho.dim() {
        return Err(Error::InvalidDimension {
            expected: rho.dim(),
            got: setting.dim(),
        });
    }
    outcome_probabilities(rho, &setting_projectors(setting))
}

/// A model of what the photon source emits.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    Pure(PureState),
    /// Weighted pure states; weights must be non-negative and sum to one.
    ClassicalMixture(Vec<(PureState, f64)>),
    /// `v |Φ⁺(φ)⟩⟨Φ⁺(φ)| + (1 - v) diag(½, 0, 0, ½)`: `visibility` models
    /// imperfect coherence between the two down-conversion crystals.
    BellPhiPlus {
        phase: f64,
        visibility: f64,
    },
    Custom(DensityMatrix),
}

pub const WEIGHT_TOL: f64 = 1e-9;

pub fn make_source(model: &SourceModel) -> Result<DensityMatrix> {
    match model {
        SourceModel::Pure(pure) => Ok(state::from_pure(pure).with_label("pure source")),
        SourceModel::ClassicalMixture(components) => {
            let Some((first, _)) = components.first() else {
                return Err(Error::InvalidWeights("mixture has no components".into()));
            };
            let dim = first.dim();
            let mut total = 0.0;
            let mut m = ComplexMatrix::zeros(dim);
            for (i, (psi, w)) in components.iter().enumerate() {
                if *w < 0.0 || !w.is_finite() {
                    return Err(Error::InvalidWeights(format!(
                        "weight[{i}] = {w} is negative"
                    )));
                }
                if psi.dim() != dim {
                    return Err(Error::InvalidDimension {
                        expected: dim,
                        got: psi.dim(),
                    });
                }
                total += w;
                m = &m + &ComplexMatrix::outer(psi.amplitudes()).scale(*w);
            }
            if (total - 1.0).abs() > WEIGHT_TOL {
                return Err(Error::InvalidWeights(format!(
                    "weights sum to {total}, expected 1"
                )));
            }
            let rho = DensityMatrix::new(m, "classical mixture")?;
            Ok(if dim == 4 {
                rho.with_tensor_order(TensorOrder::SignalFirst)
            } else {
                rho
            })
        }
        SourceModel::BellPhiPlus { phase, visibility } => {
            if !(0.0..=1.0).contains(visibility) {
                return Err(Error::InvalidParameter {
                    name: "visibility",
                    reason: format!("{visibility} outside [0, 1]"),
                });
            }
            let bell = ComplexMatrix::outer(PureState::phi_plus(*phase).amplitudes());
            let mixed = ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5]);
            let m = &bell.scale(*visibility) + &mixed.scale(1.0 - visibility);
            Ok(DensityMatrix::new(m, "bell phi+ source")?
                .with_tensor_order(TensorOrder::SignalFirst))
        }
        SourceModel::Custom(rho) => {
            if !rho.is_physical() {
                return Err(Error::NotPsd(rho.min_eigenvalue()));
            }
            Ok(rho.clone())
        }
    }
}

/// Counts for one setting. `counts` has one entry per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub setting: MeasurementSetting,
    pub counts: Vec<u64>,
    pub total_trials: u64,
    pub seed: u64,
}

impl CountRecord {
    pub fn new(
        setting: MeasurementSetting,
        counts: Vec<u64>,
        total_trials: u64,
        seed: u64,
    ) -> Result<Self> {
        if counts.len() != setting.outcomes() {
            return Err(Error::InvalidParameter {
                name: "counts",
                reason: format!(
                    "{} outcomes given, setting {setting} has {}",
                    counts.len(),
                    setting.outcomes()
                ),
            });
        }
        if total_trials == 0 {
            return Err(Error::InvalidParameter {
                name: "total_trials",
                reason: String::from("must be at least 1"),
            });
        }
        let detected: u64 = counts.iter().sum();
        if detected > total_trials {
            return Err(Error::InvalidParameter {
                name: "counts",
                reason: format!("{detected} detections exceed {total_trials} trials"),
            });
        }
        Ok(Self {
            setting,
            counts,
            total_trials,
            seed,
        })
    }

    pub fn detected(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Relative frequencies over detected events.
    pub fn frequencies(&self) -> Result<Vec<f64>> {
        let detected = self.detected();
        if detected == 0 {
            return Err(Error::ZeroCounts(format!("{}", self.setting)));
        }
        Ok(self
            .counts
            .iter()
            .map(|&c| c as f64 / detected as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    /// Probability that a trial yields a detection, in (0, 1].
    pub efficiency: f64,
    /// Probability that an undetected trial still registers a uniformly
    /// random outcome (dark counts, accidentals).
    pub background: f64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            efficiency: 1.0,
            background: 0.0,
        }
    }
}

impl SimulationOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "efficiency",
                reason: format!("{} outside (0, 1]", self.efficiency),
            });
        }
        if !(0.0..=1.0).contains(&self.background) {
            return Err(Error::InvalidParameter {
                name: "background",
                reason: format!("{} outside [0, 1]", self.background),
            });
        }
        Ok(())
    }
}

/// Draws a multinomial sample of size `n` by sequential conditional
/// binomials. `probs` may sum to less than one; the remainder is dropped.
pub fn sample_multinomial(rng: &mut StreamRng, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut remaining_n = n;
    let mut remaining_mass = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for &p in probs {
        let count = if remaining_n == 0 || p <= 0.0 {
            0
        } else if p >= remaining_mass {
            remaining_n
        } else {
            let q = (p / remaining_mass).clamp(0.0, 1.0);
            Binomial::new(remaining_n, q)
                .expect("probability in [0, 1]")
                .sample(rng)
        };
        out.push(count);
        remaining_n -= count;
        remaining_mass = (remaining_mass - p).max(0.0);
    }
    out
}

/// Simulates `total_trials` trials of `setting` on `rho`.
///
/// The generator stream is selected by `(seed, setting)`, so distinct
/// settings are independent and each is reproducible on its own.
pub fn simulate_counts(
    rho: &DensityMatrix,
    setting: &MeasurementSetting,
    total_trials: u64,
    options: &SimulationOptions,
    seed: u64,
) -> Result<CountRecord> {
    if total_trials == 0 {
        return Err(Error::InvalidParameter {
            name: "total_trials",
            reason: String::from("must be at least 1"),
        });
    }
    options.validate()?;
    let probs = setting_probabilities(rho, setting)?;
    let k = probs.len() as f64;
    let miss = 1.0 - options.efficiency;
    let weighted: Vec<f64> = probs
        .iter()
        .map(|p| options.efficiency * p + miss * options.background / k)
        .collect();
    let mut rng = rng::stream(seed, setting.stream_id());
    let counts = if miss == 0.0 && options.background == 0.0 {
        // Lossless: every trial lands in some outcome.
        let normalized: f64 = weighted.iter().sum();
        let w: Vec<f64> = weighted.iter().map(|p| p / normalized).collect();
        sample_multinomial(&mut rng, total_trials, &w)
    } else {
        sample_multinomial(&mut rng, total_trials, &weighted)
    };
    CountRecord::new(*setting, counts, total_trials, seed)
}
