//! State reconstruction from measurement statistics.
//!
//! Stokes parameters are expectation values of Pauli operators, with σz
//! diagonal in HV, σx in DA and σy in RL:
//!
//! ```text
//! S1 = p_D - p_A,  S2 = p_R - p_L,  S3 = p_H - p_V,  ρ01 = (S1 - i S2) / 2
//! ```
//!
//! Linear inversion of finite-count data can leave the physical set, so
//! [`project_to_physical`] maps the raw matrix onto the closest (Frobenius
//! norm) unit-trace positive semidefinite matrix.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::audit;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, HERMITIAN_TOL};
use crate::optics::{self, Basis, CountRecord, MeasurementSetting};
use crate::rng;
use crate::state::{self, DensityMatrix, FidelityConvention, TensorOrder, TRACE_TOL};

/// Stokes parameters: 4 for one photon, 16 (row-major `S_ij`) for a pair.
/// `S0` / `S00` is always 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesVector {
    values: Vec<f64>,
}

impl StokesVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != 4 && values.len() != 16 {
            return Err(Error::InvalidParameter {
                name: "stokes",
                reason: format!("length {} is neither 4 nor 16", values.len()),
            });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `S_ij` of a two-photon vector.
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.values[i * 4 + j]
    }

    pub fn is_two_photon(&self) -> bool {
        self.values.len() == 16
    }
}

/// Outcome probabilities for one setting, with a weight used when several
/// observations inform the same Stokes parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub setting: MeasurementSetting,
    pub probabilities: Vec<f64>,
    pub weight: f64,
}

impl Observation {
    /// Relative frequencies of a count record, weighted by its detections.
    pub fn from_record(record: &CountRecord) -> Result<Self> {
        Ok(Self {
            setting: record.setting,
            probabilities: record.frequencies()?,
            weight: record.detected() as f64,
        })
    }

    /// Exact expectation values `Tr(ρ P_k)`. Not clamped, so the inversion
    /// reproduces even an unphysical input exactly.
    pub fn exact(rho: &DensityMatrix, setting: &MeasurementSetting) -> Result<Self> {
        if setting.dim() != rho.dim() {
            return Err(Error::InvalidDimension {
                expected: rho.dim(),
                got: setting.dim(),
            });
        }
        let probabilities = optics::setting_projectors(setting)
            .iter()
            .map(|p| rho.matrix().trace_product(p).re)
            .collect();
        Ok(Self {
            setting: *setting,
            probabilities,
            weight: 1.0,
        })
    }
}

/// The full tomography setting list: 3 bases for one photon, 9 pairs for two.
pub fn tomography_settings(dim: usize) -> Result<Vec<MeasurementSetting>> {
    match dim {
        2 => Ok(Basis::ALL
            .iter()
            .map(|&b| MeasurementSetting::basis(b))
            .collect()),
        4 => Ok(Basis::ALL
            .iter()
            .flat_map(|&a| {
                Basis::ALL
                    .iter()
                    .map(move |&b| MeasurementSetting::basis_pair(a, b))
            })
            .collect()),
        other => Err(Error::InvalidDimension {
            expected: 2,
            got: other,
        }),
    }
}

/// Exact observations of `rho` in every tomography setting.
pub fn exact_observations(rho: &DensityMatrix) -> Result<Vec<Observation>> {
    tomography_settings(rho.dim())?
        .iter()
        .map(|s| Observation::exact(rho, s))
        .collect()
}

#[inline]
fn sign(outcome: usize) -> f64 {
    if outcome == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Weighted mean accumulator.
#[derive(Default, Clone, Copy)]
struct Mean {
    sum: f64,
    weight: f64,
}

impl Mean {
    fn add(&mut self, value: f64, weight: f64) {
        self.sum += value * weight;
        self.weight += weight;
    }

    fn get(&self) -> Option<f64> {
        (self.weight > 0.0).then(|| self.sum / self.weight)
    }
}

fn canonical_bases(obs: &Observation) -> Result<(Basis, Option<Basis>)> {
    obs.setting.bases().ok_or_else(|| Error::InvalidParameter {
        name: "setting",
        reason: format!(
            "{} is not one of the HV/DA/RL tomography settings",
            obs.setting
        ),
    })
}

pub fn stokes_single(observations: &[Observation]) -> Result<StokesVector> {
    let mut means = [Mean::default(); 3];
    for obs in observations {
        let (basis, second) = canonical_bases(obs)?;
        if second.is_some() {
            return Err(Error::InvalidDimension {
                expected: 2,
                got: 4,
            });
        }
        let p = &obs.probabilities;
        means[basis.pauli_index() - 1].add(p[0] - p[1], obs.weight);
    }
    let mut values = vec![1.0];
    let mut missing = Vec::new();
    for (k, m) in means.iter().enumerate() {
        match m.get() {
            Some(v) => values.push(v),
            None => missing.push(Basis::from_pauli_index(k + 1).expect("1..=3").name()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingSettings(missing.join(", ")));
    }
    StokesVector::new(values)
}

pub fn stokes_from_counts_single(records: &[CountRecord]) -> Result<StokesVector> {
    let obs = records
        .iter()
        .map(Observation::from_record)
        .collect::<Result<Vec<_>>>()?;
    stokes_single(&obs)
}

/// `ρ = ½ Σ S_i σ_i`. Hermitian with unit trace, not necessarily PSD.
pub fn reconstruct_single(s: &StokesVector) -> Result<ComplexMatrix> {
    if s.values.len() != 4 {
        return Err(Error::InvalidDimension {
            expected: 4,
            got: s.values.len(),
        });
    }
    let mut rho = ComplexMatrix::zeros(2);
    for (i, &si) in s.values.iter().enumerate() {
        rho = &rho + &ComplexMatrix::pauli(i).scale(0.5 * si);
    }
    Ok(rho)
}

pub fn stokes_two(observations: &[Observation]) -> Result<StokesVector> {
    // correlations[i][j] for Pauli indices 1..=3, marginals per arm.
    let mut correlations = [[Mean::default(); 3]; 3];
    let mut first = [Mean::default(); 3];
    let mut second = [Mean::default(); 3];
    for obs in observations {
        let (a, b) = canonical_bases(obs)?;
        let b = b.ok_or(Error::InvalidDimension {
            expected: 4,
            got: 2,
        })?;
        let p = &obs.probabilities;
        let (i, j) = (a.pauli_index() - 1, b.pauli_index() - 1);
        let mut corr = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for o1 in 0..2 {
            for o2 in 0..2 {
                let q = p[o1 * 2 + o2];
                corr += sign(o1) * sign(o2) * q;
                m1 += sign(o1) * q;
                m2 += sign(o2) * q;
            }
        }
        correlations[i][j].add(corr, obs.weight);
        first[i].add(m1, obs.weight);
        second[j].add(m2, obs.weight);
    }

    let mut missing: Vec<String> = Vec::new();
    let mut values = vec![0.0; 16];
    values[0] = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            match correlations[i][j].get() {
                Some(v) => values[(i + 1) * 4 + (j + 1)] = v,
                None => missing.push(format!(
                    "{}⊗{}",
                    Basis::from_pauli_index(i + 1).expect("1..=3"),
                    Basis::from_pauli_index(j + 1).expect("1..=3")
                )),
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingSettings(missing.join(", ")));
    }
    for k in 0..3 {
        // Present whenever all correlations are.
        values[(k + 1) * 4] = first[k].get().expect("marginal");
        values[k + 1] = second[k].get().expect("marginal");
    }
    StokesVector::new(values)
}

pub fn stokes_from_counts_two(records: &[CountRecord]) -> Result<StokesVector> {
    let obs = records
        .iter()
        .map(Observation::from_record)
        .collect::<Result<Vec<_>>>()?;
    stokes_two(&obs)
}

/// `ρ = ¼ Σ S_ij σ_i ⊗ σ_j`.
pub fn reconstruct_two(s: &StokesVector) -> Result<ComplexMatrix> {
    if s.values.len() != 16 {
        return Err(Error::InvalidDimension {
            expected: 16,
            got: s.values.len(),
        });
    }
    let mut rho = ComplexMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            let sij = s.pair(i, j);
            if sij == 0.0 {
                continue;
            }
            let term = linalg::tensor_product(&ComplexMatrix::pauli(i), &ComplexMatrix::pauli(j));
            rho = &rho + &term.scale(0.25 * sij);
        }
    }
    Ok(rho)
}

pub fn reconstruct_stokes(s: &StokesVector) -> Result<ComplexMatrix> {
    if s.is_two_photon() {
        reconstruct_two(s)
    } else {
        reconstruct_single(s)
    }
}

/// Result of [`physical_projection`]: eigenvalues are listed in ascending
/// order, before and after truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub state: DensityMatrix,
    pub eigenvalues_before: Vec<f64>,
    pub eigenvalues_after: Vec<f64>,
}

/// Closest unit-trace PSD spectrum to `eigenvalues` (any order), returned
/// in the same order.
pub fn truncate_spectrum(eigenvalues: &[f64]) -> Vec<f64> {
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let mut lam: Vec<f64> = order.iter().map(|&k| eigenvalues[k]).collect();

    // Zero the most negative eigenvalue while spreading its weight over the
    // rest would still leave it negative.
    let mut acc = 0.0;
    let mut last = n - 1;
    while last > 0 && lam[last] + (acc / (last + 1) as f64) < 0.0 {
        acc += lam[last];
        lam[last] = 0.0;
        last -= 1;
    }
    let share = acc / (last + 1) as f64;
    for v in &mut lam[..=last] {
        *v += share;
    }

    let mut out = vec![0.0; n];
    for (slot, &k) in order.iter().enumerate() {
        out[k] = lam[slot];
    }
    out
}

pub fn physical_projection(raw: &ComplexMatrix) -> Result<Projection> {
    let deviation = raw.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian(deviation));
    }
    let trace = raw.trace().re;
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidTrace(trace));
    }
    let eig = linalg::hermitian_eig(raw)?;
    let before = eig.eigenvalues.clone();
    if eig.min_eigenvalue() >= 0.0 {
        return Ok(Projection {
            state: DensityMatrix::new(raw.clone(), "reconstructed")?,
            eigenvalues_after: before.clone(),
            eigenvalues_before: before,
        });
    }
    let after = truncate_spectrum(&before);
    let matrix = linalg::EigenDecomposition {
        eigenvalues: after.clone(),
        eigenvectors: eig.eigenvectors,
    }
    .reassemble();
    Ok(Projection {
        state: DensityMatrix::new(matrix, "reconstructed (projected)")?,
        eigenvalues_before: before,
        eigenvalues_after: after,
    })
}

pub fn project_to_physical(raw: &ComplexMatrix) -> Result<DensityMatrix> {
    Ok(physical_projection(raw)?.state)
}

/// Stokes vector, raw inversion and physical projection of one data set.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub stokes: StokesVector,
    pub raw: ComplexMatrix,
    pub projection: Projection,
}

impl Reconstruction {
    pub fn state(&self) -> &DensityMatrix {
        &self.projection.state
    }
}

pub fn reconstruct_observations(
    observations: &[Observation],
    dim: usize,
) -> Result<Reconstruction> {
    let stokes = match dim {
        2 => stokes_single(observations)?,
        4 => stokes_two(observations)?,
        other => {
            return Err(Error::InvalidDimension {
                expected: 2,
                got: other,
            })
        }
    };
    let raw = reconstruct_stokes(&stokes)?;
    let mut projection = physical_projection(&raw)?;
    if dim == 4 {
        projection.state = projection.state.with_tensor_order(TensorOrder::SignalFirst);
    }
    Ok(Reconstruction {
        stokes,
        raw,
        projection,
    })
}

pub fn reconstruct(records: &[CountRecord], dim: usize) -> Result<Reconstruction> {
    let obs = records
        .iter()
        .map(Observation::from_record)
        .collect::<Result<Vec<_>>>()?;
    reconstruct_observations(&obs, dim)
}

/// Mean, sample standard deviation and central 95% range of a statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub mean: f64,
    pub std: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = |q: f64| {
            let idx = crate::math::floor(q * (n - 1) as f64 + 0.5) as usize;
            sorted[idx.min(n - 1)]
        };
        Self {
            mean,
            std: crate::math::sqrt(var),
            lower: rank(0.025),
            upper: rank(0.975),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub seed: u64,
    /// When false every resample reuses the observed counts: the
    /// infinite-statistics limit, useful as a zero-spread baseline.
    pub resample: bool,
    pub target: Option<DensityMatrix>,
    pub convention: FidelityConvention,
}

impl BootstrapConfig {
    pub const MIN_RESAMPLES: usize = 100;

    pub fn new(n_resamples: usize, seed: u64) -> Self {
        Self {
            n_resamples,
            seed,
            resample: true,
            target: None,
            convention: FidelityConvention::Root,
        }
    }
}

/// Spread of the reconstruction under multinomial resampling of the counts.
///
/// `coherence` is the HV coherence of a one-photon state, or of the HH/VV
/// subspace for a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub n_resamples: usize,
    pub entry_std_re: Vec<f64>,
    pub entry_std_im: Vec<f64>,
    pub coherence: Interval,
    pub min_entropy_bound: Interval,
    pub fidelity: Option<Interval>,
}

fn state_coherence(rho: &DensityMatrix) -> Result<f64> {
    match rho.dim() {
        2 => state::coherence(rho),
        _ => state::coherence(&state::subspace_restrict(rho, (0, 3))?),
    }
}

pub fn bootstrap_uncertainty(
    records: &[CountRecord],
    dim: usize,
    config: &BootstrapConfig,
) -> Result<BootstrapSummary> {
    if config.n_resamples < BootstrapConfig::MIN_RESAMPLES {
        return Err(Error::InvalidParameter {
            name: "n_resamples",
            reason: format!(
                "{} is below the minimum of {}",
                config.n_resamples,
                BootstrapConfig::MIN_RESAMPLES
            ),
        });
    }
    let base: Vec<Observation> = records
        .iter()
        .map(Observation::from_record)
        .collect::<Result<_>>()?;

    let entries = dim * dim;
    let mut re_samples = vec![Vec::with_capacity(config.n_resamples); entries];
    let mut im_samples = vec![Vec::with_capacity(config.n_resamples); entries];
    let mut coherence = Vec::with_capacity(config.n_resamples);
    let mut bound = Vec::with_capacity(config.n_resamples);
    let mut fidelity = Vec::with_capacity(config.n_resamples);

    for r in 0..config.n_resamples {
        let observations = if config.resample {
            let mut rng = rng::stream(config.seed, rng::domain::BOOTSTRAP ^ r as u64);
            base.iter()
                .zip(records)
                .map(|(obs, rec)| {
                    let n = rec.detected();
                    let counts = optics::sample_multinomial(&mut rng, n, &obs.probabilities);
                    Observation {
                        setting: obs.setting,
                        probabilities: counts.iter().map(|&c| c as f64 / n as f64).collect(),
                        weight: obs.weight,
                    }
                })
                .collect()
        } else {
            base.clone()
        };
        let rec = reconstruct_observations(&observations, dim)?;
        let rho = rec.state();
        for (k, z) in rho.matrix().entries().iter().enumerate() {
            re_samples[k].push(z.re);
            im_samples[k].push(z.im);
        }
        let c = state_coherence(rho)?;
        coherence.push(c);
        bound.push(audit::min_entropy_bound(c)?);
        if let Some(target) = &config.target {
            fidelity.push(state::fidelity(rho, target, config.convention)?);
        }
    }

    let std_of = |s: &Vec<f64>| Interval::from_samples(s).std;
    Ok(BootstrapSummary {
        n_resamples: config.n_resamples,
        entry_std_re: re_samples.iter().map(std_of).collect(),
        entry_std_im: im_samples.iter().map(std_of).collect(),
        coherence: Interval::from_samples(&coherence),
        min_entropy_bound: Interval::from_samples(&bound),
        fidelity: config
            .target
            .as_ref()
            .map(|_| Interval::from_samples(&fidelity)),
    })
}
