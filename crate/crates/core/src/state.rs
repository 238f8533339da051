//! Density matrices for one photon (dim 2) or a photon pair (dim 4).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Factor, HERMITIAN_TOL, PSD_TOL};
use crate::math;

pub const TRACE_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-12;

/// Which tensor factor of a two-photon matrix belongs to the signal photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorOrder {
    SignalFirst,
    SignalSecond,
}

impl TensorOrder {
    /// The factor to trace out to keep only the signal photon.
    pub fn idler_factor(self) -> Factor {
        match self {
            TensorOrder::SignalFirst => Factor::Second,
            TensorOrder::SignalSecond => Factor::First,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TensorOrder::SignalFirst => "signal_first",
            TensorOrder::SignalSecond => "signal_second",
        }
    }
}

impl core::str::FromStr for TensorOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signal_first" => Ok(Self::SignalFirst),
            "signal_second" => Ok(Self::SignalSecond),
            other => Err(Error::InvalidParameter {
                name: "tensor_order",
                reason: alloc::format!("unknown value {other:?}"),
            }),
        }
    }
}

/// A Hermitian, unit-trace matrix of dimension 2 or 4.
///
/// States built with [`DensityMatrix::new`] are also positive semidefinite.
/// [`DensityMatrix::measured`] admits raw tomographic output, which
/// may carry small negative eigenvalues; [`DensityMatrix::is_physical`]
/// tells the two apart.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    label: String,
    tensor_order: Option<TensorOrder>,
    min_eigenvalue: f64,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let state = Self::measured(matrix, label)?;
        if state.min_eigenvalue < -PSD_TOL {
            return Err(Error::NotPsd(state.min_eigenvalue));
        }
        Ok(state)
    }

    /// Validates Hermiticity and trace only.
    pub fn measured(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let dim = matrix.dim();
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidDimension {
                expected: 2,
                got: dim,
            });
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian(deviation));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(trace.re));
        }
        let min_eigenvalue = linalg::hermitian_eig(&matrix)?.min_eigenvalue();
        Ok(Self {
            matrix,
            label: label.into(),
            tensor_order: None,
            min_eigenvalue,
        })
    }

    pub fn with_tensor_order(mut self, order: TensorOrder) -> Self {
        if self.dim() == 4 {
            self.tensor_order = Some(order);
        }
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tensor_order(&self) -> Option<TensorOrder> {
        self.tensor_order
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue >= -PSD_TOL
    }

    /// Diagonal entries, i.e. the HV-basis outcome probabilities.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Phase of the off-diagonal element of a qubit state.
    pub fn phase(&self) -> Option<f64> {
        (self.dim() == 2).then(|| self.matrix[(0, 1)].arg())
    }

    /// Reduced state of the signal photon. Without tensor-order metadata the
    /// signal is taken to be the first factor.
    pub fn signal_reduced(&self) -> Result<DensityMatrix> {
        let order = self.tensor_order.unwrap_or(TensorOrder::SignalFirst);
        let reduced = linalg::partial_trace(&self.matrix, order.idler_factor())?;
        let label = alloc::format!("{} (signal reduced)", self.label);
        if self.is_physical() {
            DensityMatrix::new(reduced, label)
        } else {
            DensityMatrix::measured(reduced, label)
        }
    }
}

/// Normalized amplitudes of a pure polarization state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len != 2 && len != 4 {
            return Err(Error::InvalidDimension {
                expected: 2,
                got: len,
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// `cos θ |H⟩ + e^{iφ} sin θ |V⟩`, angles in radians.
    pub fn polarization(theta: f64, phi: f64) -> Self {
        let (s, c) = math::sin_cos(theta);
        Self {
            amplitudes: alloc::vec![Complex64::new(c, 0.0), Complex64::from_polar(s, phi)],
        }
    }

    pub fn horizontal() -> Self {
        Self::polarization(0.0, 0.0)
    }

    pub fn vertical() -> Self {
        Self::polarization(core::f64::consts::FRAC_PI_2, 0.0)
    }

    pub fn diagonal() -> Self {
        Self::polarization(core::f64::consts::FRAC_PI_4, 0.0)
    }

    /// `(|HH⟩ + e^{iφ}|VV⟩)/√2`.
    pub fn phi_plus(phi: f64) -> Self {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let zero = Complex64::new(0.0, 0.0);
        Self {
            amplitudes: alloc::vec![
                Complex64::new(s, 0.0),
                zero,
                zero,
                Complex64::from_polar(s, phi)
            ],
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

pub fn from_pure(pure: &PureState) -> DensityMatrix {
    DensityMatrix {
        matrix: ComplexMatrix::outer(&pure.amplitudes),
        label: "pure".to_string(),
        tensor_order: (pure.dim() == 4).then_some(TensorOrder::SignalFirst),
        min_eigenvalue: 0.0,
    }
}

/// Magnitude of the HV off-diagonal element of a qubit state.
pub fn coherence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::InvalidDimension {
            expected: 2,
            got: rho.dim(),
        });
    }
    Ok(rho.matrix[(0, 1)].norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityConvention {
    /// `(Tr √(√ρ σ √ρ))²`.
    Squared,
    /// `Tr √(√ρ σ √ρ)`.
    #[default]
    Root,
}

impl FidelityConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            FidelityConvention::Squared => "squared",
            FidelityConvention::Root => "root",
        }
    }
}

impl core::str::FromStr for FidelityConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(Self::Squared),
            "root" => Ok(Self::Root),
            other => Err(Error::InvalidParameter {
                name: "convention",
                reason: alloc::format!("unknown value {other:?}"),
            }),
        }
    }
}

/// Uhlmann fidelity. The inner square root is taken of whichever argument is
/// positive semidefinite, so a measured (slightly unphysical) state can be
/// compared against an ideal target.
pub fn fidelity(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    convention: FidelityConvention,
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::InvalidDimension {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let (outer, inner) = if rho.is_physical() {
        (rho, sigma)
    } else if sigma.is_physical() {
        (sigma, rho)
    } else {
        return Err(Error::NotPsd(rho.min_eigenvalue));
    };
    let root = linalg::psd_sqrt(&outer.matrix)?;
    let sandwich = (&(&root * &inner.matrix) * &root).hermitian_part();
    let eig = linalg::hermitian_eig(&sandwich)?;
    let min = eig.min_eigenvalue();
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    let value: f64 = eig
        .eigenvalues
        .iter()
        .map(|&l| math::sqrt(l.max(0.0)))
        .sum::<f64>()
        .min(1.0);
    Ok(match convention {
        FidelityConvention::Root => value,
        FidelityConvention::Squared => value * value,
    })
}

/// The renormalized 2x2 block of a two-photon state on basis indices
/// `(i, j)`, e.g. `(0, 3)` for the HH/VV coincidence subspace.
pub fn subspace_restrict(rho: &DensityMatrix, indices: (usize, usize)) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDimension {
            expected: 4,
            got: rho.dim(),
        });
    }
    let (i, j) = indices;
    if i == j || i > 3 || j > 3 {
        return Err(Error::InvalidParameter {
            name: "indices",
            reason: alloc::format!("need two distinct indices in 0..4, got ({i}, {j})"),
        });
    }
    let m = &rho.matrix;
    let block_trace = m[(i, i)].re + m[(j, j)].re;
    if block_trace <= 1e-9 {
        return Err(Error::DegenerateSubspace(block_trace));
    }
    let block = ComplexMatrix::new(2, alloc::vec![m[(i, i)], m[(i, j)], m[(j, i)], m[(j, j)]])?
        .scale(1.0 / block_trace);
    let label = alloc::format!("{} (subspace {i},{j})", rho.label);
    // A principal block of a PSD matrix is PSD; keep the parent's status.
    if rho.is_physical() {
        DensityMatrix::new(block, label)
    } else {
        DensityMatrix::measured(block, label)
    }
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix.trace_product(&rho.matrix).re
}
