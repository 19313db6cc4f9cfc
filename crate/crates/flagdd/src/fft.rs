//! Shared FFT plans and small spectral helpers.
//!
//! All transforms are the unnormalized DFT pair used by `rustfft`:
//! `forward[k] = sum_n x[n] e^{-j2pi kn/N}` and `inverse` without the 1/N
//! factor. Callers apply their own scaling. Plans are cached per length and
//! shared across threads.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanMap = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<(FftPlanner<f64>, PlanMap)>> = OnceLock::new();
    let cell = PLANS.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cell.lock().unwrap();
    let (planner, map) = &mut *guard;
    map.entry((len, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// In-place unnormalized forward DFT.
pub fn forward_in_place(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// In-place unnormalized inverse DFT (no 1/N).
pub fn inverse_in_place(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// Forward DFT of a slice into a fresh vector.
pub fn forward(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    forward_in_place(&mut buf);
    buf
}

/// Inverse DFT (no 1/N) of a slice into a fresh vector.
pub fn inverse(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    inverse_in_place(&mut buf);
    buf
}

/// Pointwise product `a[n] * b[n]`.
pub fn pointwise(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Pointwise product with the conjugate of `b`.
pub fn pointwise_conj(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y.conj()).collect()
}

/// Textbook complex-multiplication count of one length-N FFT, used by the
/// estimator's operation counters.
pub fn fft_mul_count(len: usize) -> u64 {
    if len < 2 {
        return 0;
    }
    let n = len as f64;
    (n / 2.0 * n.log2()).ceil() as u64
}
