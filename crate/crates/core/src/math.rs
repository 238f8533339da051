//! f64 helpers routed through `libm` so the crate stays `no_std`.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub(crate) fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `-log2(p)` with values within 1e-12 of 1 mapped to exactly 0.
pub(crate) fn neg_log2(p: f64) -> f64 {
    if (p - 1.0).abs() < 1e-12 {
        0.0
    } else {
        -log2(p)
    }
}
