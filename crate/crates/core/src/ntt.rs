//! Exact integer convolution by number-theoretic transform modulo
//! 998244353 (= 119·2^23 + 1, primitive root 3).
//!
//! Supports transform lengths up to 2^23. Results are exact as long as every
//! output coefficient is below the modulus.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) const MODULUS: u64 = 998_244_353;
const ROOT: u64 = 3;
pub(crate) const MAX_LOG_LEN: u32 = 23;

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    base %= MODULUS;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % MODULUS;
        }
        base = base * base % MODULUS;
        exp >>= 1;
    }
    acc
}

fn transform(a: &mut [u64], invert: bool) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w_len = pow_mod(ROOT, (MODULUS - 1) / len as u64);
        if invert {
            w_len = pow_mod(w_len, MODULUS - 2);
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut w = 1;
        for _ in 0..half {
            twiddles.push(w);
            w = w * w_len % MODULUS;
        }
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let x = *u;
                let y = *v * w % MODULUS;
                *u = if x + y >= MODULUS {
                    x + y - MODULUS
                } else {
                    x + y
                };
                *v = if x >= y { x - y } else { x + MODULUS - y };
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = pow_mod(n as u64, MODULUS - 2);
        for x in a.iter_mut() {
            *x = *x * n_inv % MODULUS;
        }
    }
}

/// Linear convolution of two 0/1 sequences. Panics if the result needs a
/// transform longer than 2^23.
pub(crate) fn convolve_bits(a: &[u8], b: &[u8]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    assert!(
        size <= 1 << MAX_LOG_LEN,
        "convolution length {out_len} exceeds transform limit"
    );
    let mut fa = vec![0u64; size];
    let mut fb = vec![0u64; size];
    for (dst, &x) in fa.iter_mut().zip(a) {
        *dst = u64::from(x);
    }
    for (dst, &x) in fb.iter_mut().zip(b) {
        *dst = u64::from(x);
    }
    transform(&mut fa, false);
    transform(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * y % MODULUS;
    }
    transform(&mut fa, true);
    fa.truncate(out_len);
    fa
}
