//! Estimation-quality and link-quality metrics.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::estimation::PathEstimate;
use crate::{Error, Result};

/// Per-trial outcome row; aggregated by the experiment harness.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrialRecord {
    pub snr_db: f64,
    pub mse: f64,
    pub detected_count: usize,
    pub false_alarms: usize,
    pub misses: usize,
    pub bit_errors: usize,
    pub bits_total: usize,
    pub fft_calls: u64,
}

/// Normalized channel-matrix error `||H - H_hat||_F^2 / ||H||_F^2`.
pub fn channel_mse(h: &DMatrix<Complex64>, h_hat: &DMatrix<Complex64>) -> Result<f64> {
    if h.shape() != h_hat.shape() {
        return Err(Error::LengthMismatch {
            expected: h.nrows(),
            got: h_hat.nrows(),
        });
    }
    let denom = h.norm_squared();
    if denom == 0.0 {
        return Err(Error::InvalidConfig(
            "channel MSE undefined for zero-norm truth".into(),
        ));
    }
    Ok((h - h_hat).norm_squared() / denom)
}

/// Detection bookkeeping for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchCounts {
    pub detected: usize,
    pub misses: usize,
    pub false_alarms: usize,
}

/// Exact-cell matching on the estimation grid of length `n`: an estimate
/// detects a truth path iff both cells coincide mod N; each truth path
/// matches at most once.
pub fn match_paths(truth: &ChannelRealization, est: &[PathEstimate], n: usize) -> MatchCounts {
    match_paths_with_tolerance(truth, est, n, 0)
}

/// Matching with a +/- `tolerance` cell window on both axes (cyclic), for
/// sensitivity studies; `tolerance = 0` is the exact rule.
pub fn match_paths_with_tolerance(
    truth: &ChannelRealization,
    est: &[PathEstimate],
    n: usize,
    tolerance: usize,
) -> MatchCounts {
    let n_i = n as i64;
    let cyc_dist = |a: i64, b: i64| -> i64 {
        let d = (a - b).rem_euclid(n_i);
        d.min(n_i - d)
    };
    let mut taken = vec![false; truth.paths.len()];
    let mut detected = 0usize;
    for e in est {
        let mut hit = None;
        for (ti, t) in truth.paths.iter().enumerate() {
            if taken[ti] {
                continue;
            }
            if cyc_dist(e.delay_tap as i64, t.delay as i64) <= tolerance as i64
                && cyc_dist(e.doppler_tap, t.doppler) <= tolerance as i64
            {
                hit = Some(ti);
                break;
            }
        }
        if let Some(ti) = hit {
            taken[ti] = true;
            detected += 1;
        }
    }
    MatchCounts {
        detected,
        misses: truth.paths.len() - detected,
        false_alarms: est.len() - detected,
    }
}

/// Bit error rate: Hamming distance over length.
pub fn ber(tx: &[u8], rx: &[u8]) -> Result<f64> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch {
            expected: tx.len(),
            got: rx.len(),
        });
    }
    if tx.is_empty() {
        return Ok(0.0);
    }
    let errors = tx.iter().zip(rx).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / tx.len() as f64)
}
