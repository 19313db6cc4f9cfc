//! Flag-preamble delay-Doppler estimators.
//!
//! Both estimators exploit the peak-curtain ambiguity of the Flag preamble:
//! a path at delay-Doppler cell `(tau, nu)` plants an ambiguity peak whose
//! curtain line (slope `xi`) crosses the Doppler axis at one intercept, so a
//! 1-D Doppler-axis search followed by a 1-D search along the intercepted
//! line replaces the full 2-D grid search.
//!
//! The traditional estimator takes the single best intercept per path and
//! cancels detected paths successively. The candidate-aided estimator keeps
//! the top-K thresholded intercepts, peak-searches every candidate line, and
//! after all paths are located re-solves every complex gain jointly by least
//! squares against the original received preamble, which removes the error
//! propagation of sequential gain estimation.
//!
//! Ambiguity Doppler coordinates measure modulation by `e^{+j2pi omega n/N}`
//! while a channel Doppler tap `nu` rotates by `e^{-j2pi nu n/N}`, so a path
//! peaks at grid column `(-nu) mod N`; estimates are reported as physical
//! taps (the sign conversion happens exactly once, at output).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::afdm::AfdmConfig;
use crate::ambiguity;
use crate::fft;
use crate::sequences::FlagPreamble;
use crate::{Error, Result};

/// Estimator parameters; `candidates` and `threshold` only affect the
/// proposed algorithm.
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    /// Expected path count P.
    pub paths: usize,
    /// Candidate count K.
    pub candidates: usize,
    /// Relative line-search threshold gamma in (0, 1).
    pub threshold: f64,
    pub preamble: FlagPreamble,
}

impl EstimatorConfig {
    pub fn new(paths: usize, candidates: usize, threshold: f64, preamble: FlagPreamble) -> Result<Self> {
        if paths < 1 {
            return Err(Error::InvalidConfig("estimator.p must be >= 1".into()));
        }
        if candidates < 1 || candidates > preamble.len() {
            return Err(Error::InvalidConfig(format!(
                "estimator.k must be in [1, N], got {candidates}"
            )));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "estimator.gamma must be in (0, 1), got {threshold}"
            )));
        }
        Ok(Self {
            paths,
            candidates,
            threshold,
            preamble,
        })
    }
}

/// One estimated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEstimate {
    pub delay_tap: usize,
    /// Physical Doppler tap, canonical in (-N/2, N/2].
    pub doppler_tap: i64,
    pub gain: Complex64,
    /// Line-slice magnitude at the selected cell.
    pub peak_magnitude: f64,
    /// Rank of the winning intercept inside that iteration's candidate set.
    pub candidate_index_used: usize,
}

/// Per-invocation operation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub fft_calls: u64,
    pub complex_muls: u64,
}

impl OpCounters {
    fn fft(&mut self, n: usize) {
        self.fft_calls += 1;
        self.complex_muls += fft::fft_mul_count(n);
    }

    fn muls(&mut self, count: usize) {
        self.complex_muls += count as u64;
    }
}

/// Estimates plus bookkeeping.
#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub paths: Vec<PathEstimate>,
    pub counters: OpCounters,
    /// Candidate intercepts kept per SIC iteration (one entry per path).
    pub candidate_history: Vec<Vec<usize>>,
}

/// Canonical signed Doppler tap for ambiguity column `omega`.
pub fn doppler_from_af_column(omega: usize, n: usize) -> i64 {
    let raw = (n - omega % n) % n;
    if 2 * raw > n {
        raw as i64 - n as i64
    } else {
        raw as i64
    }
}

/// Doppler-axis intercept of the curtain line through the cell of a path
/// `(tau, nu)`: the column where a tau = 0 line search sees it.
pub fn true_intercept(delay: usize, doppler: i64, xi: i64, n: usize) -> usize {
    (-doppler - xi * delay as i64).rem_euclid(n as i64) as usize
}

/// Time-domain signature of a path: `f[(n - tau) mod N] e^{-j2pi nu n / N}`,
/// the channel's action on the preamble (unit norm). The rotation advances
/// incrementally (one complex multiply per sample; drift is O(N eps)).
pub fn path_basis(preamble: &[Complex64], delay: usize, doppler: i64, n: usize) -> Vec<Complex64> {
    let step = Complex64::from_polar(
        1.0,
        -2.0 * std::f64::consts::PI * doppler as f64 / n as f64,
    );
    let mut rot = Complex64::new(1.0, 0.0);
    let shift = n - delay % n;
    (0..n)
        .map(|i| {
            let value = preamble[(i + shift) % n] * rot;
            rot *= step;
            value
        })
        .collect()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

struct SearchState<'a> {
    preamble: &'a [Complex64],
    n: usize,
    xi: i64,
    /// FFT(f . d), shared by every line slice.
    ref_spec: Vec<Complex64>,
    dechirp: std::sync::Arc<Vec<Complex64>>,
    counters: OpCounters,
}

impl<'a> SearchState<'a> {
    fn new(preamble: &'a FlagPreamble) -> Self {
        let n = preamble.len();
        let xi = preamble.curtain.xi;
        let dechirp = ambiguity::dechirp_cached(n, xi);
        let mut counters = OpCounters::default();
        let mut ref_spec = fft::pointwise(&preamble.samples, &dechirp);
        counters.muls(n);
        fft::forward_in_place(&mut ref_spec);
        counters.fft(n);
        SearchState {
            preamble: &preamble.samples,
            n,
            xi,
            ref_spec,
            dechirp,
            counters,
        }
    }

    /// Doppler-axis line search `|FFT(residual . conj(f))|`.
    fn line_search(&mut self, residual: &[Complex64]) -> Vec<f64> {
        let mut buf = fft::pointwise_conj(residual, self.preamble);
        self.counters.muls(self.n);
        fft::forward_in_place(&mut buf);
        self.counters.fft(self.n);
        buf.iter().map(|v| v.norm()).collect()
    }

    /// Spectrum of the de-chirped residual; each candidate's line slice is a
    /// cyclic shift of this, so one FFT serves all K candidates.
    fn dechirped_spectrum(&mut self, residual: &[Complex64]) -> Vec<Complex64> {
        let mut buf = fft::pointwise(residual, &self.dechirp);
        self.counters.muls(self.n);
        fft::forward_in_place(&mut buf);
        self.counters.fft(self.n);
        buf
    }

    /// Line-slice magnitudes for intercept `k`:
    /// `FFT(t_k . d)[m] = FFT(residual . d)[(m + k) mod N]`.
    fn line_slice(&mut self, dechirped_spec: &[Complex64], k: usize) -> Vec<f64> {
        let n = self.n;
        let shifted: Vec<Complex64> = (0..n).map(|m| dechirped_spec[(m + k) % n]).collect();
        let out = ambiguity::line_slice_from_spectra(&shifted, &self.ref_spec);
        self.counters.muls(n);
        self.counters.fft(n);
        out
    }
}

/// Best cell along a set of candidate lines, skipping masked cells. Ties
/// resolve to the smallest delay, then smallest Doppler column, then earlier
/// candidate.
struct CellPick {
    value: f64,
    delay: usize,
    omega: usize,
    candidate_rank: usize,
}

fn pick_best_cell(
    state: &mut SearchState<'_>,
    dechirped_spec: &[Complex64],
    candidates: &[usize],
    masked: &[(usize, usize)],
) -> CellPick {
    let n = state.n;
    let xi_step = state.xi.rem_euclid(n as i64) as usize;
    let mut best = CellPick {
        value: f64::NEG_INFINITY,
        delay: 0,
        omega: 0,
        candidate_rank: 0,
    };
    for (rank, &k) in candidates.iter().enumerate() {
        let slice = state.line_slice(dechirped_spec, k);
        let mut omega = k;
        for (tau, &value) in slice.iter().enumerate() {
            if !masked.contains(&(tau, omega)) {
                let better = value > best.value
                    || (value == best.value
                        && (tau, omega, rank) < (best.delay, best.omega, best.candidate_rank));
                if better {
                    best = CellPick {
                        value,
                        delay: tau,
                        omega,
                        candidate_rank: rank,
                    };
                }
            }
            omega += xi_step;
            if omega >= n {
                omega -= n;
            }
        }
    }
    best
}

/// Top-K intercepts above `gamma * max`, ordered by magnitude (ties by
/// index). The maximum always qualifies, so the set is never empty.
fn candidate_set(line: &[f64], k: usize, gamma: f64) -> Vec<usize> {
    let max = line.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = gamma * max;
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for (i, &v) in line.iter().enumerate() {
            if v < floor || picked.contains(&i) {
                continue;
            }
            match best {
                Some(b) if line[b] >= v => {}
                _ => best = Some(i),
            }
        }
        match best {
            Some(i) => picked.push(i),
            None => break,
        }
    }
    picked
}

fn validate_input(r: &[Complex64], cfg: &EstimatorConfig) -> Result<()> {
    if r.len() != cfg.preamble.len() {
        return Err(Error::LengthMismatch {
            expected: cfg.preamble.len(),
            got: r.len(),
        });
    }
    Ok(())
}

/// Traditional two-step Flag estimation: per path, the single best intercept
/// picks the line, the line peak picks the cell, the gain is the scalar
/// projection, and the path is cancelled from the residual. Returns exactly
/// P estimates; under noise the later ones degrade.
pub fn estimate_traditional(r: &[Complex64], cfg: &EstimatorConfig) -> Result<EstimateResult> {
    validate_input(r, cfg)?;
    let mut state = SearchState::new(&cfg.preamble);
    let n = state.n;
    let mut residual = r.to_vec();
    let mut paths = Vec::with_capacity(cfg.paths);
    let mut history = Vec::with_capacity(cfg.paths);

    for _ in 0..cfg.paths {
        let line = state.line_search(&residual);
        let k = line
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        history.push(vec![k]);
        let spec = state.dechirped_spectrum(&residual);
        let pick = pick_best_cell(&mut state, &spec, &[k], &[]);
        let doppler = doppler_from_af_column(pick.omega, n);
        let basis = path_basis(state.preamble, pick.delay, doppler, n);
        let gain = dot(&residual, &basis);
        state.counters.muls(2 * n);
        for (res, b) in residual.iter_mut().zip(&basis) {
            *res -= gain * b;
        }
        paths.push(PathEstimate {
            delay_tap: pick.delay,
            doppler_tap: doppler,
            gain,
            peak_magnitude: pick.value,
            candidate_index_used: pick.candidate_rank,
        });
    }
    Ok(EstimateResult {
        paths,
        counters: state.counters,
        candidate_history: history,
    })
}

/// Candidate-aided estimation with global least-squares gain refinement.
///
/// Phase 1 runs P SIC iterations; each keeps the top-K thresholded
/// intercepts, peak-searches every candidate line, and selects the best
/// unmasked cell (already-detected cells are masked so the same cell is
/// never returned twice). Phase 2 rebuilds the path basis matrix and
/// re-solves all gains against the original input.
///
/// FFT budget: one reference spectrum plus, per path, one line search, one
/// de-chirped residual spectrum, and one inverse transform per candidate —
/// at most `P*(K+2) + 1` calls.
pub fn estimate_proposed(r: &[Complex64], cfg: &EstimatorConfig) -> Result<EstimateResult> {
    validate_input(r, cfg)?;
    let mut state = SearchState::new(&cfg.preamble);
    let n = state.n;
    let mut residual = r.to_vec();
    let mut paths: Vec<PathEstimate> = Vec::with_capacity(cfg.paths);
    let mut masked: Vec<(usize, usize)> = Vec::with_capacity(cfg.paths);
    let mut history = Vec::with_capacity(cfg.paths);

    for _ in 0..cfg.paths {
        let line = state.line_search(&residual);
        let candidates = candidate_set(&line, cfg.candidates, cfg.threshold);
        history.push(candidates.clone());
        let spec = state.dechirped_spectrum(&residual);
        let pick = pick_best_cell(&mut state, &spec, &candidates, &masked);
        let doppler = doppler_from_af_column(pick.omega, n);
        let basis = path_basis(state.preamble, pick.delay, doppler, n);
        let provisional = dot(&residual, &basis);
        state.counters.muls(2 * n);
        for (res, b) in residual.iter_mut().zip(&basis) {
            *res -= provisional * b;
        }
        masked.push((pick.delay, pick.omega));
        paths.push(PathEstimate {
            delay_tap: pick.delay,
            doppler_tap: doppler,
            gain: provisional,
            peak_magnitude: pick.value,
            candidate_index_used: pick.candidate_rank,
        });
    }

    let gains = refine_gains_ls(r, &paths, state.preamble, &mut state.counters);
    for (path, gain) in paths.iter_mut().zip(gains) {
        path.gain = gain;
    }
    Ok(EstimateResult {
        paths,
        counters: state.counters,
        candidate_history: history,
    })
}

/// Global least-squares gains: `h = (Phi^H Phi)^{-1} Phi^H r` on the
/// original preamble. A near-singular Gram matrix (duplicate or nearly
/// parallel detected cells under heavy noise) is ridge-regularized.
fn refine_gains_ls(
    r: &[Complex64],
    paths: &[PathEstimate],
    preamble: &[Complex64],
    counters: &mut OpCounters,
) -> Vec<Complex64> {
    let n = r.len();
    let p = paths.len();
    let columns: Vec<Vec<Complex64>> = paths
        .iter()
        .map(|est| path_basis(preamble, est.delay_tap, est.doppler_tap, n))
        .collect();
    let mut gram = DMatrix::<Complex64>::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            gram[(i, j)] = dot(&columns[i], &columns[j]).conj();
        }
    }
    counters.muls(p * p * n);
    let rhs = DVector::from_iterator(p, columns.iter().map(|col| dot(r, col)));
    counters.muls(p * n);

    let svd = gram.clone().svd(false, false);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    if sigma_min <= 0.0 || sigma_max / sigma_min > 1e8 {
        let trace: f64 = (0..p).map(|i| gram[(i, i)].re).sum();
        let lambda = 1e-6 * trace / p as f64;
        for i in 0..p {
            gram[(i, i)] += Complex64::new(lambda, 0.0);
        }
    }
    counters.muls(p * p * p);
    match gram.lu().solve(&rhs) {
        Some(sol) => sol.as_slice().to_vec(),
        // Unreachable after regularization unless the input is all zeros.
        None => paths.iter().map(|p| p.gain).collect(),
    }
}

/// Converts estimates to per-sample-rate path parameters, reading the
/// estimated Doppler against the estimation grid of length `preamble_len`.
/// Delays beyond `cpp_len` cannot occur in the modeled channel; they are
/// clamped and the flag reports it.
pub fn resolved_paths_from_estimates(
    estimates: &[PathEstimate],
    preamble_len: usize,
    cpp_len: usize,
) -> (Vec<crate::channel::ResolvedPath>, bool) {
    let mut clamped = false;
    let resolved = estimates
        .iter()
        .map(|est| {
            let delay = if est.delay_tap > cpp_len {
                clamped = true;
                cpp_len
            } else {
                est.delay_tap
            };
            crate::channel::ResolvedPath {
                delay,
                doppler_cps: est.doppler_tap as f64 / preamble_len as f64,
                gain: est.gain,
            }
        })
        .collect();
    (resolved, clamped)
}

/// Effective channel matrix from estimated triples, with estimated Doppler
/// read against the preamble grid.
pub fn reconstruct_channel_matrix(
    estimates: &[PathEstimate],
    cfg: &EstimatorConfig,
    afdm_cfg: &AfdmConfig,
) -> Result<(DMatrix<Complex64>, bool)> {
    let (resolved, clamped) =
        resolved_paths_from_estimates(estimates, cfg.preamble.len(), afdm_cfg.cpp_len);
    let h = crate::afdm::effective_channel_resolved(&resolved, afdm_cfg)?;
    Ok((h, clamped))
}
