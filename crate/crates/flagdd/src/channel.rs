//! Doubly dispersive channel generation, time-domain application, and AWGN.
//!
//! A channel realization is a set of paths on the integer delay-Doppler grid
//! of a reference frame length. A path with Doppler tap `nu` rotates the
//! transmit signal by `e^{-j2pi nu n / N}` per sample; when the same physical
//! channel acts on a frame of a different length the per-sample rate
//! (cycles/sample) carries over, which is what [`ChannelRealization::resolve`]
//! captures.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::afdm::AfdmConfig;
use crate::{Error, Result};

/// One propagation path on the integer grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPath {
    pub delay: usize,
    pub doppler: i64,
    pub gain: Complex64,
}

/// A drawn channel: P paths with distinct delay taps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub paths: Vec<ChannelPath>,
}

/// Path with Doppler expressed in cycles per sample.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedPath {
    pub delay: usize,
    pub doppler_cps: f64,
    pub gain: Complex64,
}

impl ChannelRealization {
    /// Converts integer taps to per-sample rates against `ref_len`.
    pub fn resolve(&self, ref_len: usize) -> Result<Vec<ResolvedPath>> {
        if ref_len == 0 {
            return Err(Error::LengthTooShort(0));
        }
        Ok(self
            .paths
            .iter()
            .map(|p| ResolvedPath {
                delay: p.delay,
                doppler_cps: p.doppler as f64 / ref_len as f64,
                gain: p.gain,
            })
            .collect())
    }

    /// Index of the path with the largest |gain|.
    pub fn strongest_path(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.paths.iter().enumerate() {
            if p.gain.norm_sqr() > self.paths[best].gain.norm_sqr() {
                best = i;
            }
        }
        best
    }
}

/// Channel drawing scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioConfig {
    /// Path count P.
    pub p: usize,
    pub max_delay_tap: usize,
    pub max_doppler_tap: i64,
    /// Per-path average linear powers; must sum to 1.
    pub power_profile: Vec<f64>,
    /// Optional seed override for channel draws inside the harness.
    #[serde(default)]
    pub rng_seed: Option<u64>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(Error::InvalidConfig("scenario.p must be >= 1".into()));
        }
        if self.power_profile.len() != self.p {
            return Err(Error::InvalidConfig(format!(
                "scenario.powerProfile length {} != scenario.p {}",
                self.power_profile.len(),
                self.p
            )));
        }
        if self.power_profile.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidConfig(
                "scenario.powerProfile entries must be positive".into(),
            ));
        }
        let sum: f64 = self.power_profile.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidConfig(format!(
                "scenario.powerProfile must sum to 1, got {sum}"
            )));
        }
        if self.max_delay_tap + 1 < self.p {
            return Err(Error::TooFewDelayTaps {
                paths: self.p,
                max_delay: self.max_delay_tap,
            });
        }
        Ok(())
    }

    /// Simplified extended-vehicular-A profile: P taps decaying 3 dB per
    /// tap, delays in [0, max_delay_tap], Doppler in [-max_doppler_tap,
    /// max_doppler_tap].
    pub fn eva_like(p: usize, max_delay_tap: usize, max_doppler_tap: i64) -> Self {
        let raw: Vec<f64> = (0..p).map(|i| 10f64.powf(-0.3 * i as f64)).collect();
        let sum: f64 = raw.iter().sum();
        Self {
            p,
            max_delay_tap,
            max_doppler_tap,
            power_profile: raw.into_iter().map(|w| w / sum).collect(),
            rng_seed: None,
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::eva_like(4, 8, 2)
    }
}

/// Standard complex Gaussian CN(0, 1).
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws a channel: distinct delay taps uniform in [0, max_delay_tap] with
/// tap 0 forced for the first path, uniform integer Doppler, and
/// circularly-symmetric Gaussian gains with the profile variances.
pub fn draw_channel<R: Rng>(scn: &ScenarioConfig, rng: &mut R) -> Result<ChannelRealization> {
    scn.validate()?;
    let mut delays = Vec::with_capacity(scn.p);
    delays.push(0usize);
    let mut pool: Vec<usize> = (1..=scn.max_delay_tap).collect();
    for i in 0..scn.p - 1 {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
        delays.push(pool[i]);
    }
    let dopplers: Vec<i64> = (0..scn.p)
        .map(|_| rng.gen_range(-scn.max_doppler_tap..=scn.max_doppler_tap))
        .collect();
    let paths = (0..scn.p)
        .map(|i| ChannelPath {
            delay: delays[i],
            doppler: dopplers[i],
            gain: complex_gaussian(rng) * scn.power_profile[i].sqrt(),
        })
        .collect();
    Ok(ChannelRealization { paths })
}

/// Applies the linear time-varying channel to a CPP-prefixed burst:
/// `r[n] = sum_i h_i e^{-j2pi nu_i n / N} s[n - tau_i]` with the time index
/// aligned so the body starts at n = 0. Samples reaching before the burst
/// are zero; after CPP stripping the body equals the circular body-channel
/// operator applied to the transmitted body.
pub fn apply_channel(
    s: &[Complex64],
    chan: &ChannelRealization,
    cfg: &AfdmConfig,
) -> Result<Vec<Complex64>> {
    apply_channel_resolved(s, &chan.resolve(cfg.n)?, cfg.cpp_len)
}

/// As [`apply_channel`] with pre-resolved per-sample Doppler rates.
pub fn apply_channel_resolved(
    s: &[Complex64],
    paths: &[ResolvedPath],
    cpp_len: usize,
) -> Result<Vec<Complex64>> {
    for p in paths {
        if p.delay > cpp_len {
            return Err(Error::DelayExceedsCpp {
                delay: p.delay,
                cpp_len,
            });
        }
    }
    let len = s.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for path in paths {
        for idx in path.delay..len {
            let n = idx as i64 - cpp_len as i64;
            let rot = Complex64::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * frac(path.doppler_cps * n as f64),
            );
            out[idx] += path.gain * rot * s[idx - path.delay];
        }
    }
    Ok(out)
}

#[inline]
fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// Adds per-sample complex white Gaussian noise at the given SNR relative to
/// `signal_power_ref`. An infinite SNR leaves the signal untouched.
pub fn add_awgn<R: Rng>(
    r: &[Complex64],
    snr_db: f64,
    signal_power_ref: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    if snr_db.is_infinite() && snr_db > 0.0 {
        return r.to_vec();
    }
    let n0 = signal_power_ref / 10f64.powf(snr_db / 10.0);
    let sigma = n0.sqrt();
    r.iter().map(|v| v + sigma * complex_gaussian(rng)).collect()
}
