//! Tomographically measured states and the reference values derived from
//! them, bundled so reproduction checks need no external data.
//!
//! Two-photon matrices are written in the basis order HH, HV, VH, VV with the
//! signal photon as the SECOND tensor factor: the signal's reduced state is
//! obtained by tracing out the first factor.

use crate::linalg::ComplexMatrix;
use crate::state::{DensityMatrix, TensorOrder};

/// Signal photon prepared close to |D⟩, as reconstructed by tomography.
pub const SINGLE_PHOTON: [(f64, f64); 4] =
    [(0.493, 0.0), (0.449, 0.144), (0.449, -0.144), (0.507, 0.0)];

/// Photon pair prepared close to |Φ⁺⟩, as reconstructed by tomography.
pub const TWO_PHOTON: [(f64, f64); 16] = [
    (0.409, 0.0),
    (-0.111, 0.052),
    (0.009, -0.148),
    (0.360, -0.182),
    (-0.111, -0.052),
    (0.056, 0.0),
    (-0.003, -0.006),
    (-0.052, -0.065),
    (0.009, 0.148),
    (-0.003, 0.006),
    (0.030, 0.0),
    (-0.019, 0.096),
    (0.360, 0.182),
    (-0.052, 0.065),
    (-0.019, -0.096),
    (0.505, 0.0),
];

/// Reference HH/VV subspace matrix of [`TWO_PHOTON`].
pub const SUBSPACE: [(f64, f64); 4] = [(0.447, 0.0), (0.394, -0.199), (0.394, 0.199), (0.553, 0.0)];

/// Reference reduced (signal) state of [`TWO_PHOTON`].
pub const REDUCED: [(f64, f64); 4] = [
    (0.439, 0.0),
    (-0.130, 0.148),
    (-0.130, -0.148),
    (0.561, 0.0),
];

/// Scalars reported alongside the matrices.
pub mod values {
    pub const SINGLE_P_H: f64 = 0.493;
    pub const SINGLE_P_V: f64 = 0.507;
    pub const SINGLE_COHERENCE: f64 = 0.472;
    pub const SINGLE_MIN_ENTROPY: f64 = 0.589;
    pub const SINGLE_FIDELITY: f64 = 0.974;

    pub const PAIR_FIDELITY: f64 = 0.904;
    /// Measured directly, not computed from the reconstructed matrix.
    pub const PAIR_CHSH_MEASURED: f64 = 2.457;
    pub const PAIR_P_HH: f64 = 0.447;
    pub const PAIR_P_VV: f64 = 0.553;
    pub const PAIR_COHERENCE: f64 = 0.441;
    pub const PAIR_MIN_ENTROPY: f64 = 0.443;

    pub const REDUCED_COHERENCE: f64 = 0.197;
    pub const REDUCED_MIN_ENTROPY: f64 = 0.060;

    /// Tolerance for comparing computed values against the reference ones.
    pub const TOLERANCE: f64 = 0.002;
}

pub fn single_photon() -> DensityMatrix {
    let m = ComplexMatrix::from_pairs(2, &SINGLE_PHOTON).expect("2x2 fixture");
    DensityMatrix::new(m, "measured single photon").expect("fixture is physical")
}

/// The measured pair. Its spectrum has a negative eigenvalue near -0.088, so
/// it is admitted as a measured (not strictly physical) state.
pub fn two_photon() -> DensityMatrix {
    let m = ComplexMatrix::from_pairs(4, &TWO_PHOTON).expect("4x4 fixture");
    DensityMatrix::measured(m, "measured photon pair")
        .expect("fixture is Hermitian with unit trace")
        .with_tensor_order(TensorOrder::SignalSecond)
}

pub fn subspace() -> ComplexMatrix {
    ComplexMatrix::from_pairs(2, &SUBSPACE).expect("2x2 fixture")
}

pub fn reduced() -> ComplexMatrix {
    ComplexMatrix::from_pairs(2, &REDUCED).expect("2x2 fixture")
}
