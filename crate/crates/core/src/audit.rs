//! Randomness quantification for HV-basis bit generation.
//!
//! The guaranteed randomness of an HV measurement is governed by the
//! coherence `C = |ρ01|` of the measured qubit state:
//!
//! ```text
//! H_min(C) = -log2((1 + √(1 - 4C²)) / 2)
//! ```
//!
//! lower-bounds the min-entropy per measurement, with equality for pure
//! states.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::math;
use crate::state::{self, DensityMatrix, FidelityConvention};

const DISTRIBUTION_TOL: f64 = 1e-9;
const COHERENCE_TOL: f64 = 1e-12;

/// `-log2 max(p0, p1)`.
pub fn min_entropy_empirical(p0: f64, p1: f64) -> Result<f64> {
    if !(p0 >= 0.0 && p1 >= 0.0) || (p0 + p1 - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::InvalidDistribution(format!(
            "({p0}, {p1}) is not a probability distribution"
        )));
    }
    Ok(math::neg_log2(p0.max(p1)).clamp(0.0, 1.0))
}

/// Lower bound on the min-entropy per HV measurement from the coherence
/// `c ∈ [0, ½]`.
pub fn min_entropy_bound(c: f64) -> Result<f64> {
    if !(0.0..=0.5 + COHERENCE_TOL).contains(&c) {
        return Err(Error::InvalidCoherence(c));
    }
    let c = c.min(0.5);
    let largest = (1.0 + math::sqrt((1.0 - 4.0 * c * c).max(0.0))) / 2.0;
    Ok(math::neg_log2(largest).clamp(0.0, 1.0))
}

/// Min-entropy of a pure state with `|a|² = a_sq`.
pub fn min_entropy_pure(a_sq: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a_sq) {
        return Err(Error::InvalidParameter {
            name: "a_sq",
            reason: format!("{a_sq} outside [0, 1]"),
        });
    }
    min_entropy_empirical(a_sq, 1.0 - a_sq)
}

/// Analyzer angles (degrees) for a CHSH test; `a`, `a_prime` act on the first
/// tensor factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Default for ChshAngles {
    /// The angles that saturate 2√2 for |Φ⁺⟩.
    fn default() -> Self {
        Self {
            a: 0.0,
            a_prime: 45.0,
            b: 22.5,
            b_prime: 67.5,
        }
    }
}

/// `|θ⟩⟨θ| - |θ⊥⟩⟨θ⊥|` for linear polarization at `theta_deg`.
pub fn linear_observable(theta_deg: f64) -> ComplexMatrix {
    let (s, c) = math::sin_cos(2.0 * theta_deg.to_radians());
    ComplexMatrix::from_pairs(2, &[(c, 0.0), (s, 0.0), (s, 0.0), (-c, 0.0)]).expect("2x2")
}

/// Correlation `E(α, β) = Tr[ρ σ(α) ⊗ σ(β)]`.
pub fn correlation(rho: &DensityMatrix, alpha: f64, beta: f64) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDimension {
            expected: 4,
            got: rho.dim(),
        });
    }
    let obs = linalg::tensor_product(&linear_observable(alpha), &linear_observable(beta));
    Ok(rho.matrix().trace_product(&obs).re)
}

/// `S = E(a,b) - E(a,b') + E(a',b) + E(a',b')`.
pub fn chsh_s(rho: &DensityMatrix, angles: &ChshAngles) -> Result<f64> {
    let e = |x, y| correlation(rho, x, y);
    Ok(e(angles.a, angles.b)? - e(angles.a, angles.b_prime)?
        + e(angles.a_prime, angles.b)?
        + e(angles.a_prime, angles.b_prime)?)
}

/// How bits are read out of HV measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// One photon measured in HV: H → 0, V → 1. On a two-photon state this
    /// acts on the signal photon alone.
    SingleHv,
    /// Both photons measured in HV: HH → 0, VV → 1, HV and VH discarded.
    CoincidenceHhVv,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::SingleHv => "single_HV",
            Scheme::CoincidenceHhVv => "coincidence_HH_VV",
        }
    }
}

impl core::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_HV" | "single-hv" | "single_hv" => Ok(Scheme::SingleHv),
            "coincidence_HH_VV" | "coincidence" | "coincidence-hh-vv" | "coincidence_hh_vv" => {
                Ok(Scheme::CoincidenceHhVv)
            }
            other => Err(Error::InvalidParameter {
                name: "scheme",
                reason: format!("unknown scheme {other:?}"),
            }),
        }
    }
}

/// The effective qubit whose HV statistics produce the bits.
pub fn bit_qubit(rho: &DensityMatrix, scheme: Scheme) -> Result<DensityMatrix> {
    match (scheme, rho.dim()) {
        (Scheme::SingleHv, 2) => Ok(rho.clone()),
        (Scheme::SingleHv, 4) => rho.signal_reduced(),
        (Scheme::CoincidenceHhVv, 4) => state::subspace_restrict(rho, (0, 3)),
        (scheme, dim) => Err(Error::SchemeMismatch {
            scheme: scheme.as_str(),
            dim,
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditOptions {
    pub convention: FidelityConvention,
    /// Angles for the CHSH value of two-photon states; `None` skips it.
    pub chsh_angles: Option<ChshAngles>,
    /// Raw bit count the extractable-bit budget is computed for.
    pub raw_length: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            convention: FidelityConvention::Root,
            chsh_angles: Some(ChshAngles::default()),
            raw_length: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    /// Probabilities of bit 0 and bit 1.
    pub probabilities: Vec<f64>,
    pub coherence_c: f64,
    pub min_entropy_bound: f64,
    pub empirical_min_entropy: f64,
    pub fidelity_to_target: Option<f64>,
    pub chsh_s: Option<f64>,
    pub extractable_bits: u64,
}

/// `floor(rate · raw_length)`.
pub fn entropy_budget(rate: f64, raw_length: u64) -> u64 {
    math::floor(rate * raw_length as f64) as u64
}

pub fn audit(
    rho: &DensityMatrix,
    scheme: Scheme,
    target: Option<&DensityMatrix>,
    options: &AuditOptions,
) -> Result<AuditReport> {
    let qubit = bit_qubit(rho, scheme)?;
    let diag = qubit.diagonal();
    let probabilities = alloc::vec![diag[0], diag[1]];
    let coherence_c = state::coherence(&qubit)?;
    let min_entropy_bound = min_entropy_bound(coherence_c)?;
    let empirical_min_entropy = min_entropy_empirical(diag[0], diag[1])?;
    let fidelity_to_target = target
        .map(|t| state::fidelity(rho, t, options.convention))
        .transpose()?;
    let chsh_s = match (rho.dim(), options.chsh_angles) {
        (4, Some(angles)) => Some(chsh_s(rho, &angles)?),
        _ => None,
    };
    Ok(AuditReport {
        probabilities,
        coherence_c,
        min_entropy_bound,
        empirical_min_entropy,
        fidelity_to_target,
        chsh_s,
        extractable_bits: entropy_budget(min_entropy_bound, options.raw_length),
    })
}
