#![allow(dead_code)] // shared across test binaries; not every binary uses every helper

//! Shared helpers for integration tests: an exhaustive matched-filter
//! oracle, the preamble transmission chain, and cell bookkeeping.

use flagdd::afdm::{prepend_cpp, strip_cpp, AfdmConfig};
use flagdd::ambiguity::full_grid;
use flagdd::channel::{add_awgn, apply_channel_resolved, ChannelRealization};
use flagdd::estimation::{doppler_from_af_column, path_basis, PathEstimate};
use flagdd::sequences::FlagPreamble;
use num_complex::Complex64;
use rand::Rng;

/// Canonical signed Doppler representative in (-N/2, N/2].
pub fn canonical_doppler(nu: i64, n: usize) -> i64 {
    let raw = nu.rem_euclid(n as i64);
    if 2 * raw > n as i64 {
        raw - n as i64
    } else {
        raw
    }
}

/// Sorted canonical cells of an estimate list.
pub fn estimate_cells(paths: &[PathEstimate], n: usize) -> Vec<(usize, i64)> {
    let mut cells: Vec<(usize, i64)> = paths
        .iter()
        .map(|p| (p.delay_tap, canonical_doppler(p.doppler_tap, n)))
        .collect();
    cells.sort_unstable();
    cells
}

/// Sorted canonical cells of a channel realization.
pub fn truth_cells(chan: &ChannelRealization, n: usize) -> Vec<(usize, i64)> {
    let mut cells: Vec<(usize, i64)> = chan
        .paths
        .iter()
        .map(|p| (p.delay % n, canonical_doppler(p.doppler, n)))
        .collect();
    cells.sort_unstable();
    cells
}

/// Exhaustive 2D matched-filter oracle with curtain-aware greedy
/// extraction: repeatedly take the strongest unclaimed cell of the full
/// ambiguity grid of the residual, project the corresponding path signature
/// out, and continue. Independent of the line-search implementation path.
pub fn exhaustive_mf_cells(
    r: &[Complex64],
    preamble: &FlagPreamble,
    num_paths: usize,
) -> Vec<(usize, i64)> {
    let n = preamble.len();
    let mut residual = r.to_vec();
    let mut claimed: Vec<(usize, usize)> = Vec::new();
    for _ in 0..num_paths {
        let grid = full_grid(&residual, &preamble.samples).unwrap();
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for tau in 0..n {
            for omega in 0..n {
                if claimed.contains(&(tau, omega)) {
                    continue;
                }
                let v = grid.value(tau, omega);
                if v > best.2 {
                    best = (tau, omega, v);
                }
            }
        }
        claimed.push((best.0, best.1));
        let doppler = doppler_from_af_column(best.1, n);
        let basis = path_basis(&preamble.samples, best.0, doppler, n);
        let gain: Complex64 = residual.iter().zip(&basis).map(|(a, b)| a * b.conj()).sum();
        for (slot, b) in residual.iter_mut().zip(&basis) {
            *slot -= gain * b;
        }
    }
    let mut cells: Vec<(usize, i64)> = claimed
        .into_iter()
        .map(|(tau, omega)| (tau, canonical_doppler(doppler_from_af_column(omega, n), n)))
        .collect();
    cells.sort_unstable();
    cells
}

/// Transmits the preamble as a unit-power cyclic-prefixed burst through the
/// channel plus AWGN and returns the stripped body in unit-energy-preamble
/// units, mirroring the experiment harness.
pub fn transmit_preamble<R: Rng>(
    preamble: &FlagPreamble,
    chan: &ChannelRealization,
    snr_db: f64,
    cpp_len: usize,
    rng: &mut R,
) -> Vec<Complex64> {
    let n = preamble.len();
    let sqrt_n = (n as f64).sqrt();
    let cfg = AfdmConfig::plain_burst(n, cpp_len).unwrap();
    let body: Vec<Complex64> = preamble.samples.iter().map(|v| v * sqrt_n).collect();
    let burst = prepend_cpp(&body, &cfg);
    let rx = apply_channel_resolved(&burst, &chan.resolve(n).unwrap(), cpp_len).unwrap();
    let noisy = add_awgn(&rx, snr_db, 1.0, rng);
    let stripped = strip_cpp(&noisy, &cfg).unwrap();
    stripped.iter().map(|v| v / sqrt_n).collect()
}
