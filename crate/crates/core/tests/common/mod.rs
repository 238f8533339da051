#![allow(dead_code)]

use qrng_core::linalg::ComplexMatrix;
use qrng_core::rng::{self, StreamRng};
use qrng_core::{Complex64, DensityMatrix};
use rand::Rng;

pub fn rng(seed: u64) -> StreamRng {
    rng::stream(seed, 0x7e57)
}

pub fn gaussian(rng: &mut StreamRng) -> f64 {
    // Box-Muller; plenty for test matrices
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn ginibre(rng: &mut StreamRng, dim: usize) -> ComplexMatrix {
    let entries = (0..dim * dim)
        .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
        .collect();
    ComplexMatrix::new(dim, entries).unwrap()
}

pub fn random_hermitian(rng: &mut StreamRng, dim: usize) -> ComplexMatrix {
    ginibre(rng, dim).hermitian_part()
}

/// `G G† / Tr` for a Ginibre `G`: full-rank, spread over the whole state space.
pub fn random_density(rng: &mut StreamRng, dim: usize) -> DensityMatrix {
    let g = ginibre(rng, dim);
    let m = &g * &g.adjoint();
    let t = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / t).hermitian_part(), "random").unwrap()
}

/// Random PSD matrix with a spectrum that may include (near) zeros.
pub fn random_psd(rng: &mut StreamRng, dim: usize) -> ComplexMatrix {
    let rank = rng.random_range(1..=dim);
    let g = ginibre(rng, dim);
    let mut m = ComplexMatrix::zeros(dim);
    for k in 0..rank {
        let col = g.column(k);
        m = &m + &ComplexMatrix::outer(&col);
    }
    m.hermitian_part()
}

pub fn random_pure(rng: &mut StreamRng, dim: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn qubit_from_bloch(r: [f64; 3]) -> ComplexMatrix {
    let (x, y, z) = (r[0], r[1], r[2]);
    ComplexMatrix::from_pairs(
        2,
        &[
            ((1.0 + z) / 2.0, 0.0),
            (x / 2.0, -y / 2.0),
            (x / 2.0, y / 2.0),
            ((1.0 - z) / 2.0, 0.0),
        ],
    )
    .unwrap()
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).frobenius_norm()
}
