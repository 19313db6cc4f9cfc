//! Curtain, Peak, and composite Flag preamble generation.
//!
//! The Curtain is a discrete chirp whose cyclic ambiguity function puts all
//! of its energy on the single grid line through the origin with slope `xi`.
//! The Peak is a thumbtack sequence (unit peak at the origin, uniformly small
//! elsewhere). Their normalized sum is the Flag preamble: ambiguity about 1
//! at the matched cell, about 1/2 elsewhere on the line, small off the line,
//! which is what the two-step delay-Doppler search exploits.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of a Curtain chirp `c[n] = exp(j pi n (xi n + q) / N) / sqrt(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurtainParams {
    /// Sequence length N (>= 2).
    pub n: usize,
    /// Chirp rate: slope of the ambiguity line on the delay-Doppler grid.
    pub xi: i64,
    /// Phase index in [1-N, N-1]; `xi*N - q` must be even for the chirp to be
    /// N-periodic, which is what makes the curtain line exact.
    pub q: i64,
}

impl CurtainParams {
    pub fn new(n: usize, xi: i64, q: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::LengthTooShort(n));
        }
        let bound = n as i64 - 1;
        if q < -bound || q > bound {
            return Err(Error::PhaseIndexRange { n, q });
        }
        if (xi * n as i64 - q).rem_euclid(2) != 0 {
            return Err(Error::ParityCondition { n, xi, q });
        }
        Ok(Self { n, xi, q })
    }

    /// Slope `xi` with the smallest nonnegative `q` satisfying the parity
    /// condition (q = 0 for even xi*N, q = 1 otherwise).
    pub fn auto(n: usize, xi: i64) -> Result<Self> {
        let q = (xi * n as i64).rem_euclid(2);
        Self::new(n, xi, q)
    }
}

/// Peak-sequence construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeakKind {
    /// Legendre-symbol (Weil) sequence; prime N only, provably thumbtack.
    WeilLegendre,
    /// Zadoff-Chu with root coprime to N (root 1). Constant modulus, ideal
    /// autocorrelation, but its ambiguity concentrates on a chirp line, so
    /// sidelobes are only verified empirically.
    ZadoffChu,
    /// Uniform random phases from a seeded generator.
    RandomPolyphase,
}

/// A generated Flag preamble plus its construction metadata.
#[derive(Debug, Clone)]
pub struct FlagPreamble {
    /// Unit-energy samples, length `curtain.n`.
    pub samples: Vec<Complex64>,
    pub curtain: CurtainParams,
    pub peak_kind: PeakKind,
    /// Seed used for `RandomPolyphase` (ignored by the other kinds).
    pub peak_seed: u64,
}

impl FlagPreamble {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Total energy `sum |s[n]|^2`.
pub fn energy(s: &[Complex64]) -> f64 {
    s.iter().map(|v| v.norm_sqr()).sum()
}

fn normalize(s: &mut [Complex64]) {
    let e = energy(s);
    if e > 0.0 {
        let scale = 1.0 / e.sqrt();
        for v in s.iter_mut() {
            *v *= scale;
        }
    }
}

/// Curtain chirp per `CurtainParams`; unit energy.
pub fn make_curtain(params: CurtainParams) -> Vec<Complex64> {
    let n = params.n;
    let amp = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|i| {
            let ni = i as f64;
            let phase = PI * ni * (params.xi as f64 * ni + params.q as f64) / n as f64;
            Complex64::from_polar(amp, phase)
        })
        .collect()
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2usize;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Legendre symbols (n|p) for n = 0..p-1 (0 at n = 0), via a square sieve.
fn legendre_table(p: usize) -> Vec<i8> {
    let mut table = vec![-1i8; p];
    table[0] = 0;
    for k in 1..p {
        table[(k * k) % p] = 1;
    }
    table
}

/// Unit-energy Peak sequence of length `n`.
///
/// `WeilLegendre` uses the multiplicative-character sequence
/// `p[n] = L(n)/sqrt(N)` with `p[0] = 1/sqrt(N)`; its off-origin cyclic
/// ambiguity is bounded by Weil character sums at O(1/sqrt(N)).
pub fn make_peak(n: usize, kind: PeakKind, seed: u64) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::LengthTooShort(0));
    }
    if n == 1 {
        return Ok(vec![Complex64::new(1.0, 0.0)]);
    }
    let amp = 1.0 / (n as f64).sqrt();
    match kind {
        PeakKind::WeilLegendre => {
            if !is_prime(n) {
                return Err(Error::WeilCompositeLength(n));
            }
            let table = legendre_table(n);
            Ok((0..n)
                .map(|i| {
                    let sign = if i == 0 { 1.0 } else { f64::from(table[i]) };
                    Complex64::new(amp * sign, 0.0)
                })
                .collect())
        }
        PeakKind::ZadoffChu => {
            let cf = (n % 2) as f64;
            Ok((0..n)
                .map(|i| {
                    let ni = i as f64;
                    let phase = -PI * ni * (ni + cf) / n as f64;
                    Complex64::from_polar(amp, phase)
                })
                .collect())
        }
        PeakKind::RandomPolyphase => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            Ok((0..n)
                .map(|_| Complex64::from_polar(amp, rng.gen_range(0.0..2.0 * PI)))
                .collect())
        }
    }
}

/// Composite Flag preamble `(c + p)/sqrt(2)`, renormalized to unit energy.
///
/// The sum of two unit-energy sequences only has unit energy when they are
/// orthogonal, so the result is rescaled exactly.
pub fn make_flag(curtain: CurtainParams, peak_kind: PeakKind, peak_seed: u64) -> Result<FlagPreamble> {
    let c = make_curtain(curtain);
    let p = make_peak(curtain.n, peak_kind, peak_seed)?;
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    let mut samples: Vec<Complex64> = c.iter().zip(&p).map(|(a, b)| (a + b) * inv_sqrt2).collect();
    normalize(&mut samples);
    Ok(FlagPreamble {
        samples,
        curtain,
        peak_kind,
        peak_seed,
    })
}

/// Default preamble for a given length: Weil-Legendre peak for prime N,
/// seeded random polyphase otherwise; curtain slope 1 with automatic phase
/// index.
pub fn default_flag(n: usize, peak_seed: u64) -> Result<FlagPreamble> {
    let curtain = CurtainParams::auto(n, 1)?;
    let kind = if is_prime(n) {
        PeakKind::WeilLegendre
    } else {
        PeakKind::RandomPolyphase
    };
    make_flag(curtain, kind, peak_seed)
}
