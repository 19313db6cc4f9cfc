//! Delay-Doppler channel estimation with Flag preambles on chirp-carrier
//! waveforms.
//!
//! A Flag sequence is the sum of a Curtain sequence (a discrete chirp whose
//! ambiguity function concentrates on one line of the delay-Doppler grid) and
//! a Peak sequence (thumbtack ambiguity). The resulting peak-curtain ambiguity
//! shape lets a receiver locate channel paths with two one-dimensional FFT
//! searches instead of an exhaustive two-dimensional one.
//!
//! The crate provides:
//!
//! - [`sequences`]: Curtain / Peak / Flag preamble generation for arbitrary N,
//! - [`ambiguity`]: cyclic cross-ambiguity evaluation (cells, slices, grids),
//! - [`afdm`]: an AFDM modem (DAFT transforms, chirp-periodic prefix,
//!   effective channel matrices),
//! - [`channel`]: doubly dispersive channel generation and application,
//! - [`estimation`]: the traditional two-step Flag estimator and the
//!   candidate-aided estimator with global least-squares gain refinement,
//! - [`detection`]: 4-QAM mapping and LMMSE equalization,
//! - [`metrics`]: MSE / detection / BER statistics,
//! - [`experiments`]: a deterministic Monte-Carlo harness behind the `flagdd`
//!   CLI.
//!
//! With the default `parallel` feature, Monte-Carlo trials and full ambiguity
//! grids are distributed over a rayon pool; results are identical for any
//! worker count. Disable default features for a purely sequential build.

pub mod afdm;
pub mod ambiguity;
pub mod channel;
pub mod detection;
pub mod estimation;
pub mod experiments;
pub mod fft;
pub mod metrics;
pub(crate) mod par;
pub mod sequences;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("curtain parity condition violated: xi*N - q = {xi}*{n} - {q} is odd")]
    ParityCondition { n: usize, xi: i64, q: i64 },
    #[error("curtain phase index q={q} outside [1-N, N-1] for N={n}")]
    PhaseIndexRange { n: usize, q: i64 },
    #[error("sequence length must be at least 2, got {0}")]
    LengthTooShort(usize),
    #[error("Weil-Legendre peak requires prime length, got composite N={0}; use ZadoffChu or RandomPolyphase")]
    WeilCompositeLength(usize),
    #[error("grid size {n} exceeds guard {max}")]
    GridTooLarge { n: usize, max: usize },
    #[error("path delay {delay} exceeds CPP length {cpp_len}")]
    DelayExceedsCpp { delay: usize, cpp_len: usize },
    #[error("cannot place {paths} distinct delay taps in [0, {max_delay}]")]
    TooFewDelayTaps { paths: usize, max_delay: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
