//! Raw bit generation from HV measurements and randomness extraction.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::audit::{self, Scheme};
use crate::error::{Error, Result};
use crate::ntt;
use crate::optics::{self, Basis, MeasurementSetting};
use crate::rng;
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Simulated,
    External,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Simulated => "simulated",
            Provenance::External => "external",
        }
    }
}

/// Packed bit sequence. Bit `i` lives in byte `i / 8` at position `i % 8`
/// (least significant bit first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    len: usize,
    pub provenance: Provenance,
    pub seed: Option<u64>,
}

impl BitStream {
    pub fn new(provenance: Provenance, seed: Option<u64>) -> Self {
        Self {
            bytes: Vec::new(),
            len: 0,
            provenance,
            seed,
        }
    }

    pub fn with_capacity(bits: usize, provenance: Provenance, seed: Option<u64>) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            ..Self::new(provenance, seed)
        }
    }

    pub fn from_bits(
        bits: impl IntoIterator<Item = bool>,
        provenance: Provenance,
        seed: Option<u64>,
    ) -> Self {
        let mut s = Self::new(provenance, seed);
        s.extend(bits);
        s
    }

    /// Wraps packed bytes. Padding bits past `len` must be zero.
    pub fn from_packed(
        bytes: Vec<u8>,
        len: usize,
        provenance: Provenance,
        seed: Option<u64>,
    ) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::InvalidParameter {
                name: "length",
                reason: alloc::format!("{} bytes cannot hold exactly {len} bits", bytes.len()),
            });
        }
        if !len.is_multiple_of(8) {
            let pad_mask = !((1u8 << (len % 8)) - 1);
            if bytes[bytes.len() - 1] & pad_mask != 0 {
                return Err(Error::InvalidParameter {
                    name: "bits",
                    reason: "non-zero padding after the last bit".into(),
                });
            }
        }
        Ok(Self {
            bytes,
            len,
            provenance,
            seed,
        })
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 1 << (self.len % 8);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.bytes[i / 8] >> (i % 8) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.bytes[i / 8] >> (i % 8) & 1 == 1)
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }
}

impl Extend<bool> for BitStream {
    fn extend<T: IntoIterator<Item = bool>>(&mut self, iter: T) {
        for bit in iter {
            self.push(bit);
        }
    }
}

/// Raw bits plus the number of discarded coincidence events (HV and VH).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedBits {
    pub stream: BitStream,
    pub discarded: u64,
}

impl GeneratedBits {
    /// Fraction of coincidence events that produced no bit.
    pub fn discard_rate(&self) -> f64 {
        let total = self.discarded + self.stream.len() as u64;
        if total == 0 {
            0.0
        } else {
            self.discarded as f64 / total as f64
        }
    }
}

/// Draws `n_bits` bits from HV measurements on `rho`.
///
/// For [`Scheme::SingleHv`] each bit is V with probability `p_V` (of the
/// signal photon when `rho` is a pair). For [`Scheme::CoincidenceHhVv`],
/// HV and VH events are discarded and only HH (0) and VV (1) count.
pub fn generate_bits(
    rho: &DensityMatrix,
    scheme: Scheme,
    n_bits: usize,
    seed: u64,
) -> Result<GeneratedBits> {
    let mut rng = rng::stream(seed, rng::domain::BITS);
    let mut stream = BitStream::with_capacity(n_bits, Provenance::Simulated, Some(seed));
    let mut discarded = 0u64;
    match scheme {
        Scheme::SingleHv => {
            let qubit = audit::bit_qubit(rho, scheme)?;
            let p = optics::setting_probabilities(&qubit, &MeasurementSetting::basis(Basis::HV))?;
            let p_one = p[1];
            for _ in 0..n_bits {
                stream.push(rng.random::<f64>() < p_one);
            }
        }
        Scheme::CoincidenceHhVv => {
            if rho.dim() != 4 {
                return Err(Error::SchemeMismatch {
                    scheme: scheme.as_str(),
                    dim: rho.dim(),
                });
            }
            let p = optics::setting_probabilities(
                rho,
                &MeasurementSetting::basis_pair(Basis::HV, Basis::HV),
            )?;
            let (p_hh, p_vv) = (p[0], p[3]);
            if p_hh + p_vv <= 1e-9 {
                return Err(Error::DegenerateSubspace(p_hh + p_vv));
            }
            while stream.len() < n_bits {
                let u = rng.random::<f64>();
                if u < p_hh {
                    stream.push(false);
                } else if u < p_hh + p_vv {
                    stream.push(true);
                } else {
                    discarded += 1;
                }
            }
        }
    }
    Ok(GeneratedBits { stream, discarded })
}

/// Von Neumann debiasing over non-overlapping pairs: 01 → 0, 10 → 1,
/// 00 and 11 dropped.
pub fn extract_von_neumann(raw: &BitStream) -> BitStream {
    let mut out = BitStream::with_capacity(raw.len() / 4, raw.provenance, raw.seed);
    let mut bits = raw.iter();
    while let (Some(a), Some(b)) = (bits.next(), bits.next()) {
        if a != b {
            out.push(a);
        }
    }
    out
}

/// Block size for the NTT-based product; keeps each transform within 2^23.
const TOEPLITZ_BLOCK: usize = 1 << 21;
/// Below this many matrix entries the direct product is used.
const DIRECT_LIMIT: usize = 1 << 16;

/// GF(2) product `T x` where `T[i][j] = diagonals[i - j + n - 1]` for an
/// `out_len × n` Toeplitz matrix (`n = raw.len()`). `diagonals` must hold
/// `out_len + n - 1` bits: entry 0 is the bottom-left corner, entry `n - 1`
/// the main diagonal.
pub fn toeplitz_hash(raw: &BitStream, out_len: usize, diagonals: &BitStream) -> Result<BitStream> {
    let n = raw.len();
    let mut out = BitStream::with_capacity(out_len, raw.provenance, raw.seed);
    if out_len == 0 || n == 0 {
        out.extend(core::iter::repeat_n(false, out_len));
        return Ok(out);
    }
    if diagonals.len() != out_len + n - 1 {
        return Err(Error::InvalidParameter {
            name: "diagonals",
            reason: alloc::format!(
                "need {} bits for a {out_len}x{n} Toeplitz matrix, got {}",
                out_len + n - 1,
                diagonals.len()
            ),
        });
    }
    let x: Vec<u8> = raw.iter().map(u8::from).collect();
    let r: Vec<u8> = diagonals.iter().map(u8::from).collect();
    let parity = if out_len.saturating_mul(n) <= DIRECT_LIMIT {
        toeplitz_direct(&x, &r, out_len)
    } else {
        toeplitz_blocked(&x, &r, out_len)
    };
    out.extend(parity.into_iter().map(|b| b == 1));
    Ok(out)
}

fn toeplitz_direct(x: &[u8], r: &[u8], out_len: usize) -> Vec<u8> {
    let n = x.len();
    (0..out_len)
        .map(|i| {
            x.iter()
                .enumerate()
                .fold(0u8, |acc, (j, &xj)| acc ^ (xj & r[i + n - 1 - j]))
        })
        .collect()
}

/// out_i = Σ_j r[i - j + n - 1] x_j (mod 2), evaluated as exact integer
/// convolutions over blocks of outputs and inputs.
fn toeplitz_blocked(x: &[u8], r: &[u8], out_len: usize) -> Vec<u8> {
    let n = x.len();
    let mut out = vec![0u8; out_len];
    for i0 in (0..out_len).step_by(TOEPLITZ_BLOCK) {
        let m = TOEPLITZ_BLOCK.min(out_len - i0);
        for j0 in (0..n).step_by(TOEPLITZ_BLOCK) {
            let b = TOEPLITZ_BLOCK.min(n - j0);
            // For i in [i0, i0+m) and j in [j0, j0+b) the diagonal index
            // k = i - j + n - 1 spans [base, base + m + b - 1).
            let base = i0 + n - j0 - b;
            let window = &r[base..base + m + b - 1];
            let conv = ntt::convolve_bits(window, &x[j0..j0 + b]);
            // (window * x_block)[t] with t = (k - base) + (j - j0) = i - i0 + b - 1
            for (t, slot) in out[i0..i0 + m].iter_mut().enumerate() {
                *slot ^= (conv[t + b - 1] & 1) as u8;
            }
        }
    }
    out
}

/// Toeplitz hashing with a seeded random matrix. `budget` is the number of
/// extractable bits certified for `raw` (see
/// [`AuditReport::extractable_bits`](crate::audit::AuditReport)).
pub fn extract_toeplitz(
    raw: &BitStream,
    out_len: usize,
    budget: usize,
    seed: u64,
) -> Result<BitStream> {
    let budget = budget.min(raw.len());
    if out_len > budget {
        return Err(Error::BudgetExceeded {
            requested: out_len,
            budget,
        });
    }
    if out_len == 0 {
        return Ok(BitStream::new(raw.provenance, raw.seed));
    }
    let mut rng = rng::stream(seed, rng::domain::TOEPLITZ);
    let diag_len = out_len + raw.len() - 1;
    let diagonals = BitStream::from_bits(
        (0..diag_len).map(|_| rng.random::<bool>()),
        Provenance::Simulated,
        Some(seed),
    );
    toeplitz_hash(raw, out_len, &diagonals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use crate::state::{from_pure, PureState};

    fn bits(s: &str) -> BitStream {
        BitStream::from_bits(
            s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1'),
            Provenance::External,
            None,
        )
    }

    fn to_string(b: &BitStream) -> alloc::string::String {
        b.iter().map(|x| if x { '1' } else { '0' }).collect()
    }

    #[test]
    fn packing_is_lsb_first() {
        let b = bits("1000 0000 01");
        assert_eq!(b.as_bytes(), &[0b0000_0001, 0b0000_0010]);
        assert_eq!(b.len(), 10);
        assert_eq!(b.get(9), Some(true));
        assert_eq!(b.get(10), None);
        let back =
            BitStream::from_packed(b.as_bytes().to_vec(), 10, Provenance::External, None).unwrap();
        assert_eq!(back, b);
        assert!(BitStream::from_packed(vec![0xff, 0xff], 10, Provenance::External, None).is_err());
        assert!(BitStream::from_packed(vec![0xff], 10, Provenance::External, None).is_err());
    }

    #[test]
    fn von_neumann_rule_table() {
        let out = extract_von_neumann(&bits("01 10 00 11 01"));
        assert_eq!(to_string(&out), "010");
        assert!(extract_von_neumann(&bits("0000000000")).is_empty());
        // trailing odd bit is ignored
        assert_eq!(to_string(&extract_von_neumann(&bits("101"))), "1");
    }

    #[test]
    fn single_hv_on_h_is_all_zero() {
        let g = generate_bits(
            &from_pure(&PureState::horizontal()),
            Scheme::SingleHv,
            1000,
            3,
        )
        .unwrap();
        assert_eq!(g.stream.len(), 1000);
        assert_eq!(g.stream.count_ones(), 0);
    }

    #[test]
    fn single_hv_on_d_is_balanced() {
        let n = 1_000_000;
        let g = generate_bits(&from_pure(&PureState::diagonal()), Scheme::SingleHv, n, 11).unwrap();
        let p1 = g.stream.count_ones() as f64 / n as f64;
        assert!((p1 - 0.5).abs() < 5.0 * libm::sqrt(0.25 / n as f64));
    }

    #[test]
    fn coincidence_bits_follow_subspace_probability() {
        let n = 1_000_000;
        let g = generate_bits(&reference::two_photon(), Scheme::CoincidenceHhVv, n, 5).unwrap();
        assert_eq!(g.stream.len(), n);
        let p = 0.505 / (0.409 + 0.505);
        let p1 = g.stream.count_ones() as f64 / n as f64;
        assert!((p1 - p).abs() < 5.0 * libm::sqrt(p * (1.0 - p) / n as f64));
        // HV + VH weight is 0.086
        assert!((g.discard_rate() - 0.086).abs() < 0.002);
    }

    #[test]
    fn coincidence_needs_pair_and_support() {
        let err = generate_bits(&reference::single_photon(), Scheme::CoincidenceHhVv, 10, 0);
        assert!(matches!(err, Err(Error::SchemeMismatch { .. })));
        let hv = DensityMatrix::new(
            crate::ComplexMatrix::diag(&[0.0, 0.5, 0.5, 0.0]),
            "anti-correlated",
        )
        .unwrap();
        assert!(matches!(
            generate_bits(&hv, Scheme::CoincidenceHhVv, 10, 0),
            Err(Error::DegenerateSubspace(_))
        ));
    }

    #[test]
    fn bits_are_seed_deterministic() {
        let rho = reference::single_photon();
        let a = generate_bits(&rho, Scheme::SingleHv, 4096, 9).unwrap();
        let b = generate_bits(&rho, Scheme::SingleHv, 4096, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn toeplitz_identity_diagonal() {
        // Only the main diagonal set: T = [I | 0], output is the prefix.
        let x = bits("10110010");
        let n = x.len();
        let m = 5;
        let mut diag = vec![false; m + n - 1];
        diag[n - 1] = true;
        let d = BitStream::from_bits(diag, Provenance::External, None);
        assert_eq!(to_string(&toeplitz_hash(&x, m, &d).unwrap()), "10110");
    }

    #[test]
    fn toeplitz_hand_computed() {
        // n = 8, m = 3, diagonals r0..r9 = 1100101001.
        // Row i uses r[i+7-j] for j = 0..8:
        //   row 0: r7..r0 = 0 1 0 1 0 0 1 1
        //   row 1: r8..r1 = 0 0 1 0 1 0 0 1
        //   row 2: r9..r2 = 1 0 0 1 0 1 0 0
        // x = 1 0 1 1 0 0 1 0
        //   row 0 · x = 0+0+0+1+0+0+1+0 = 0
        //   row 1 · x = 0+0+1+0+0+0+0+0 = 1
        //   row 2 · x = 1+0+0+1+0+0+0+0 = 0
        let x = bits("10110010");
        let d = bits("1100101001");
        assert_eq!(to_string(&toeplitz_hash(&x, 3, &d).unwrap()), "010");
    }

    #[test]
    fn toeplitz_blocked_matches_direct() {
        let mut rng = rng::stream(1, 2);
        for (n, m) in [(300usize, 200usize), (1000, 17), (64, 64)] {
            let x: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<bool>())).collect();
            let r: Vec<u8> = (0..n + m - 1)
                .map(|_| u8::from(rng.random::<bool>()))
                .collect();
            assert_eq!(toeplitz_blocked(&x, &r, m), toeplitz_direct(&x, &r, m));
        }
    }

    #[test]
    fn toeplitz_budget_contract() {
        let raw = bits("1011001011110000");
        assert!(extract_toeplitz(&raw, 0, 8, 1).unwrap().is_empty());
        assert_eq!(extract_toeplitz(&raw, 8, 8, 1).unwrap().len(), 8);
        assert_eq!(
            extract_toeplitz(&raw, 9, 8, 1),
            Err(Error::BudgetExceeded {
                requested: 9,
                budget: 8
            })
        );
    }
}
