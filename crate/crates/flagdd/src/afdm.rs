//! AFDM modulator/demodulator and effective channel construction.
//!
//! Modulation is the inverse discrete affine Fourier transform
//! `s = L1^H F^H L2^H x` with `L_c = diag(e^{-j2pi c n^2})` and `F` the
//! unitary DFT, followed by a chirp-periodic prefix (CPP). The CPP carries a
//! quadratic phase so that, after stripping it, a delay-Doppler channel acts
//! circularly on the N-sample body; the residual per-delay phase is the
//! diagonal `Gamma` factor that appears in the effective channel below.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, ResolvedPath};
use crate::fft;
use crate::{Error, Result};

/// Modem parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AfdmConfig {
    /// Subcarrier count (frame body length).
    pub n: usize,
    /// First chirp parameter.
    pub c1: f64,
    /// Second chirp parameter.
    pub c2: f64,
    /// Prefix length; must cover the maximum delay spread.
    pub cpp_len: usize,
}

impl AfdmConfig {
    pub fn new(n: usize, c1: f64, c2: f64, cpp_len: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::LengthTooShort(n));
        }
        Ok(Self { n, c1, c2, cpp_len })
    }

    /// Standard full-diversity choice `c1 = (2 nu_max + 1) / (2N)`, `c2 = 0`.
    pub fn full_diversity(n: usize, max_doppler_tap: i64, cpp_len: usize) -> Result<Self> {
        let c1 = (2.0 * max_doppler_tap.unsigned_abs() as f64 + 1.0) / (2.0 * n as f64);
        Self::new(n, c1, 0.0, cpp_len)
    }

    /// Plain time-domain burst: `c1 = 0` turns the CPP into an ordinary
    /// cyclic prefix, which is how the Flag preamble is framed.
    pub fn plain_burst(n: usize, cpp_len: usize) -> Result<Self> {
        Self::new(n, 0.0, 0.0, cpp_len)
    }
}

#[inline]
fn unit_phase(cycles: f64) -> Complex64 {
    // e^{-j2pi * cycles}; reduce first so large quadratic arguments keep
    // full precision.
    let frac = cycles - cycles.floor();
    Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * frac)
}

/// Diagonal `L_c` applied in place: `x[n] *= e^{-j2pi c n^2}`.
fn apply_lambda(x: &mut [Complex64], c: f64) {
    for (i, v) in x.iter_mut().enumerate() {
        let sq = (i * i) as f64;
        *v *= unit_phase(c * sq);
    }
}

/// Conjugate diagonal `L_c^H`: `x[n] *= e^{+j2pi c n^2}`.
fn apply_lambda_conj(x: &mut [Complex64], c: f64) {
    apply_lambda(x, -c);
}

/// Forward DAFT `y = L2 F L1 r` (unitary).
pub fn daft(r: &[Complex64], cfg: &AfdmConfig) -> Result<Vec<Complex64>> {
    if r.len() != cfg.n {
        return Err(Error::LengthMismatch {
            expected: cfg.n,
            got: r.len(),
        });
    }
    let mut buf = r.to_vec();
    apply_lambda(&mut buf, cfg.c1);
    fft::forward_in_place(&mut buf);
    let scale = 1.0 / (cfg.n as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    apply_lambda(&mut buf, cfg.c2);
    Ok(buf)
}

/// Inverse DAFT `s = L1^H F^H L2^H x` (unitary).
pub fn idaft(x: &[Complex64], cfg: &AfdmConfig) -> Result<Vec<Complex64>> {
    if x.len() != cfg.n {
        return Err(Error::LengthMismatch {
            expected: cfg.n,
            got: x.len(),
        });
    }
    let mut buf = x.to_vec();
    apply_lambda_conj(&mut buf, cfg.c2);
    fft::inverse_in_place(&mut buf);
    let scale = 1.0 / (cfg.n as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    apply_lambda_conj(&mut buf, cfg.c1);
    Ok(buf)
}

/// CPP sample for body index `N + n_neg` with `n_neg in -cpp..0`:
/// `s[n] = s[N+n] e^{-j2pi c1 (N^2 + 2Nn)}`.
fn cpp_phase(cfg: &AfdmConfig, n_neg: i64) -> Complex64 {
    let n = cfg.n as f64;
    unit_phase(cfg.c1 * (n * n + 2.0 * n * n_neg as f64))
}

/// Prepends the chirp-periodic prefix to a body signal.
pub fn prepend_cpp(body: &[Complex64], cfg: &AfdmConfig) -> Vec<Complex64> {
    let n = body.len();
    let mut out = Vec::with_capacity(n + cfg.cpp_len);
    for i in 0..cfg.cpp_len {
        let n_neg = i as i64 - cfg.cpp_len as i64;
        let src = (n as i64 + n_neg) as usize;
        out.push(body[src] * cpp_phase(cfg, n_neg));
    }
    out.extend_from_slice(body);
    out
}

/// Drops the prefix, returning the N-sample body.
pub fn strip_cpp(signal: &[Complex64], cfg: &AfdmConfig) -> Result<Vec<Complex64>> {
    if signal.len() != cfg.n + cfg.cpp_len {
        return Err(Error::LengthMismatch {
            expected: cfg.n + cfg.cpp_len,
            got: signal.len(),
        });
    }
    Ok(signal[cfg.cpp_len..].to_vec())
}

/// IDAFT plus CPP: DAFT-domain symbols to the transmitted time burst.
pub fn modulate(x: &[Complex64], cfg: &AfdmConfig) -> Result<Vec<Complex64>> {
    Ok(prepend_cpp(&idaft(x, cfg)?, cfg))
}

/// DAFT of a CPP-stripped receive body.
pub fn demodulate(r: &[Complex64], cfg: &AfdmConfig) -> Result<Vec<Complex64>> {
    daft(r, cfg)
}

/// Body-domain channel operator `S = sum_i h_i Gamma_i Delta_i Pi^{tau_i}`
/// with the per-path diagonal `h_i gamma_i[n] e^{-j2pi cps_i n}` precomputed,
/// so repeated applications (effective-channel columns, iterative equalizer
/// steps) cost only complex multiply-adds.
#[derive(Debug, Clone)]
pub struct BodyChannelOp {
    n: usize,
    taps: Vec<(usize, Vec<Complex64>)>,
}

impl BodyChannelOp {
    pub fn new(paths: &[ResolvedPath], cfg: &AfdmConfig) -> Self {
        let n = cfg.n;
        let taps = paths
            .iter()
            .map(|path| {
                let tau = path.delay;
                let diag = (0..n)
                    .map(|i| {
                        let doppler = unit_phase(path.doppler_cps * i as f64);
                        let gamma = if i < tau {
                            unit_phase(
                                cfg.c1 * ((n * n) as f64 - 2.0 * n as f64 * (tau - i) as f64),
                            )
                        } else {
                            Complex64::new(1.0, 0.0)
                        };
                        path.gain * gamma * doppler
                    })
                    .collect();
                (tau, diag)
            })
            .collect();
        Self { n, taps }
    }

    /// `S v`: cyclic delay, then the precomputed diagonal.
    pub fn apply(&self, body: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (tau, diag) in &self.taps {
            for i in 0..n {
                out[i] += diag[i] * body[(i + n - tau) % n];
            }
        }
        out
    }

    /// `S^H v`.
    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (tau, diag) in &self.taps {
            for m in 0..n {
                let src = (m + tau) % n;
                out[m] += diag[src].conj() * v[src];
            }
        }
        out
    }
}


/// Dense DAFT matrices, mainly for verification.
#[derive(Debug, Clone)]
pub struct DaftMatrices {
    /// Forward transform `A = L2 F L1`.
    pub a: nalgebra::DMatrix<Complex64>,
    /// Inverse transform `A^H`.
    pub a_inv: nalgebra::DMatrix<Complex64>,
}

impl DaftMatrices {
    pub fn new(cfg: &AfdmConfig) -> Result<Self> {
        let n = cfg.n;
        let mut cols = Vec::with_capacity(n * n);
        for m in 0..n {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[m] = Complex64::new(1.0, 0.0);
            cols.extend(daft(&e, cfg)?);
        }
        let a = nalgebra::DMatrix::from_vec(n, n, cols);
        let a_inv = a.adjoint();
        Ok(Self { a, a_inv })
    }
}

/// Effective DAFT-domain channel `H_eff = A (sum_i h_i Gamma_i Delta_i
/// Pi^{tau_i}) A^H`, materialized densely; built column by column with FFTs
/// in O(N^2 log N).
pub fn effective_channel(
    chan: &ChannelRealization,
    cfg: &AfdmConfig,
) -> Result<nalgebra::DMatrix<Complex64>> {
    effective_channel_resolved(&chan.resolve(cfg.n)?, cfg)
}

/// As [`effective_channel`] for paths whose Doppler is already expressed in
/// cycles per sample (used when the taps were estimated on a different frame
/// length).
pub fn effective_channel_resolved(
    paths: &[ResolvedPath],
    cfg: &AfdmConfig,
) -> Result<nalgebra::DMatrix<Complex64>> {
    let n = cfg.n;
    if n > crate::ambiguity::GRID_GUARD {
        return Err(Error::GridTooLarge {
            n,
            max: crate::ambiguity::GRID_GUARD,
        });
    }
    for p in paths {
        if p.delay > cfg.cpp_len {
            return Err(Error::DelayExceedsCpp {
                delay: p.delay,
                cpp_len: cfg.cpp_len,
            });
        }
    }
    let op = BodyChannelOp::new(paths, cfg);
    let cols = crate::par::map_indexed(n, |m| {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[m] = Complex64::new(1.0, 0.0);
        let s = idaft(&e, cfg).expect("length fixed");
        let r = op.apply(&s);
        daft(&r, cfg).expect("length fixed")
    });
    let mut flat = Vec::with_capacity(n * n);
    for col in cols {
        flat.extend(col);
    }
    Ok(nalgebra::DMatrix::from_vec(n, n, flat))
}
