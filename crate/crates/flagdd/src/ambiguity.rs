//! Discrete cyclic cross-ambiguity functions.
//!
//! The ambiguity of a receive sequence `r` against a reference `s` at grid
//! cell `(tau, omega)` is
//!
//! `AF[tau, omega] = | sum_n r[n] conj(s[(n - tau) mod N]) e^{-j2pi omega n / N} |`
//!
//! with cyclic shifts throughout, matching the circularity the prefix induces
//! in the modem. For unit-energy inputs every cell is <= 1 (Cauchy-Schwarz).
//! [`af_cell`] is the direct O(N) sum and serves as the oracle for the
//! FFT-based slice and grid evaluations.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::fft;
use crate::par;
use crate::{Error, Result};

/// Guard on full-grid evaluation (N x N cells).
pub const GRID_GUARD: usize = 4096;

/// Full magnitude grid; rows are delay, columns are Doppler.
#[derive(Debug, Clone)]
pub struct AfGrid {
    n: usize,
    /// Row-major |AF| values, `values[tau * n + omega]`.
    values: Vec<f64>,
}

impl AfGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, tau: usize, omega: usize) -> f64 {
        self.values[tau * self.n + omega]
    }

    pub fn row(&self, tau: usize) -> &[f64] {
        &self.values[tau * self.n..(tau + 1) * self.n]
    }

    /// Cell with the largest magnitude; ties resolve to the smallest
    /// (tau, omega) in row-major order.
    pub fn max_cell(&self) -> (usize, usize, f64) {
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for tau in 0..self.n {
            for omega in 0..self.n {
                let v = self.value(tau, omega);
                if v > best.2 {
                    best = (tau, omega, v);
                }
            }
        }
        best
    }

    /// Sum of squared magnitudes over the whole grid.
    pub fn total_energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Fraction of squared-magnitude energy on the line
    /// `{(tau, (k + xi*tau) mod N)}` with intercept `k`.
    pub fn line_energy_fraction(&self, xi: i64, k: i64) -> f64 {
        let total = self.total_energy();
        if total == 0.0 {
            return 0.0;
        }
        let mut on_line = 0.0;
        for tau in 0..self.n {
            let omega = (k + xi * tau as i64).rem_euclid(self.n as i64) as usize;
            let v = self.value(tau, omega);
            on_line += v * v;
        }
        on_line / total
    }

    /// Writes `tau,doppler,magnitude` rows for heatmap rendering.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "tau,doppler,magnitude")?;
        for tau in 0..self.n {
            for omega in 0..self.n {
                writeln!(out, "{},{},{:.10e}", tau, omega, self.value(tau, omega))?;
            }
        }
        Ok(())
    }
}

fn check_lengths(r: &[Complex64], s: &[Complex64]) -> Result<usize> {
    if r.len() != s.len() {
        return Err(Error::LengthMismatch {
            expected: s.len(),
            got: r.len(),
        });
    }
    Ok(r.len())
}

/// Single ambiguity cell by direct summation; `tau` and `omega` are taken
/// mod N.
pub fn af_cell(r: &[Complex64], s: &[Complex64], tau: i64, omega: i64) -> Result<f64> {
    let n = check_lengths(r, s)?;
    Ok(af_cell_sum(r, s, tau, omega, n).norm())
}

fn af_cell_sum(r: &[Complex64], s: &[Complex64], tau: i64, omega: i64, n: usize) -> Complex64 {
    let tau = tau.rem_euclid(n as i64) as usize;
    let omega = omega.rem_euclid(n as i64) as f64;
    let step = -2.0 * PI * omega / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let shifted = s[(i + n - tau) % n];
        acc += r[i] * shifted.conj() * Complex64::from_polar(1.0, step * i as f64);
    }
    acc
}

/// Ambiguity restricted to the tau = 0 transversal: `|FFT(r . conj(s))|`,
/// indexed by Doppler. One length-N FFT.
pub fn af_doppler_slice(r: &[Complex64], s: &[Complex64]) -> Result<Vec<f64>> {
    check_lengths(r, s)?;
    let mut buf = fft::pointwise_conj(r, s);
    fft::forward_in_place(&mut buf);
    Ok(buf.iter().map(|v| v.norm()).collect())
}

/// De-chirp vector for slope `xi`: a unit-modulus chirp conjugate that is
/// exactly N-periodic. For odd `xi*N` the bare `exp(-j pi xi n^2 / N)` is
/// only N-antiperiodic and the cyclic correlation below would split into two
/// sign-flipped halves, so the same parity fix as the curtain's phase index
/// is applied.
pub fn dechirp_vector(n: usize, xi: i64) -> Vec<Complex64> {
    dechirp_cached(n, xi).as_ref().clone()
}

/// Cached de-chirp vectors; estimators evaluate many slices per (N, xi).
pub(crate) fn dechirp_cached(n: usize, xi: i64) -> std::sync::Arc<Vec<Complex64>> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};
    type Cache = Mutex<HashMap<(usize, i64), Arc<Vec<Complex64>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((n, xi))
        .or_insert_with(|| {
            let q = (xi * n as i64).rem_euclid(2) as f64;
            Arc::new(
                (0..n)
                    .map(|i| {
                        let ni = i as f64;
                        let phase = -PI * ni * (xi as f64 * ni + q) / n as f64;
                        Complex64::from_polar(1.0, phase)
                    })
                    .collect(),
            )
        })
        .clone()
}

/// Ambiguity along the slope-`xi` line with Doppler intercept `k`: entry
/// `tau` equals `AF[tau, (k + xi*tau) mod N]`.
///
/// Computed as `|IFFT{ FFT(t_k . d) . conj(FFT(s . d)) }|` with
/// `t_k[n] = r[n] e^{-j2pi k n/N}` and `d` the de-chirp vector; the entry
/// phases depend on the de-chirp convention and are not part of the
/// contract, only magnitudes are.
pub fn af_line_slice(r: &[Complex64], s: &[Complex64], xi: i64, k: i64) -> Result<Vec<f64>> {
    let n = check_lengths(r, s)?;
    let d = dechirp_cached(n, xi);
    let k = k.rem_euclid(n as i64) as f64;
    let step = -2.0 * PI * k / n as f64;
    let t_k: Vec<Complex64> = r
        .iter()
        .enumerate()
        .map(|(i, v)| v * Complex64::from_polar(1.0, step * i as f64) * d[i])
        .collect();
    let u = fft::forward(&t_k);
    let v = fft::forward(&fft::pointwise(s, &d));
    Ok(line_slice_from_spectra(&u, &v))
}

/// Magnitudes of the cyclic cross-correlation given both spectra; shared by
/// [`af_line_slice`] and the estimator's cached-spectrum path.
pub(crate) fn line_slice_from_spectra(t_spec: &[Complex64], ref_spec: &[Complex64]) -> Vec<f64> {
    let n = t_spec.len();
    let mut buf = fft::pointwise_conj(t_spec, ref_spec);
    fft::inverse_in_place(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|v| v.norm() * scale).collect()
}

/// Full N x N magnitude grid via one FFT per delay row.
pub fn full_grid(r: &[Complex64], s: &[Complex64]) -> Result<AfGrid> {
    let n = check_lengths(r, s)?;
    if n > GRID_GUARD {
        return Err(Error::GridTooLarge { n, max: GRID_GUARD });
    }
    let rows = par::map_indexed(n, |tau| {
        let shifted: Vec<Complex64> = (0..n).map(|i| s[(i + n - tau) % n]).collect();
        let mut buf = fft::pointwise_conj(r, &shifted);
        fft::forward_in_place(&mut buf);
        buf.iter().map(|v| v.norm()).collect::<Vec<f64>>()
    });
    let mut values = Vec::with_capacity(n * n);
    for row in rows {
        values.extend_from_slice(&row);
    }
    Ok(AfGrid { n, values })
}
