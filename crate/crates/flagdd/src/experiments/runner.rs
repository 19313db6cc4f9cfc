//! Deterministic Monte-Carlo execution of the configured studies.
//!
//! Every trial derives its own RNG streams from `(baseSeed, stream,
//! trialIndex)`, independent of the SNR / parameter grid point, so sweeps
//! see common random numbers and outputs are bit-identical for any worker
//! count. Trials are mapped over the worker pool in index order and folded
//! sequentially.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::afdm::{self, AfdmConfig};
use crate::ambiguity;
use crate::channel::{self, ChannelPath, ChannelRealization, ScenarioConfig};
use crate::detection;
use crate::estimation::{self, EstimateResult, EstimatorConfig};
use crate::metrics::{self, MatchCounts};
use crate::par;
use crate::sequences::FlagPreamble;
use crate::{Error, Result};

use super::config::{ExperimentConfig, Study};
use super::output::{ResultRow, ResultTable};

const STREAM_CHANNEL: u64 = 0x0001;
const STREAM_PRE_NOISE: u64 = 0x0002;
const STREAM_BITS: u64 = 0x0003;
const STREAM_DATA_NOISE: u64 = 0x0004;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_seed(base: u64, stream: u64, trial: u64) -> u64 {
    splitmix(base ^ splitmix(stream ^ splitmix(trial)))
}

/// Result table plus the files a run produced.
#[derive(Debug)]
pub struct StudyOutput {
    pub table: ResultTable,
    pub written: Vec<PathBuf>,
}

/// Runs the configured study and writes its CSV plus a JSON sidecar with the
/// resolved configuration into `outputPath`.
pub fn run_study(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    cfg.validate()?;
    let out_dir = Path::new(&cfg.output_path);
    std::fs::create_dir_all(out_dir)?;
    let stem = cfg.study.file_stem();
    let mut written = Vec::new();

    let table = if cfg.study == Study::AfHeatmap {
        let preamble = cfg.build_preamble()?;
        let grid = ambiguity::full_grid(&preamble.samples, &preamble.samples)?;
        let csv_path = out_dir.join(format!("{stem}.csv"));
        let mut file = std::fs::File::create(&csv_path)?;
        grid.write_csv(&mut file)?;
        written.push(csv_path);
        ResultTable::default()
    } else {
        let engine = Engine::new(cfg)?;
        let table = par::with_workers(cfg.workers, || engine.run())?;
        let csv_path = out_dir.join(format!("{stem}.csv"));
        table.write_csv(&csv_path)?;
        written.push(csv_path);
        table
    };

    let sidecar = out_dir.join(format!("{stem}_config.json"));
    let json = serde_json::json!({ "config": cfg });
    std::fs::write(&sidecar, serde_json::to_string_pretty(&json).unwrap())?;
    written.push(sidecar);
    Ok(StudyOutput { table, written })
}

/// Computes the study table without touching the filesystem.
pub fn compute_table(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let engine = Engine::new(cfg)?;
    par::with_workers(cfg.workers, || engine.run())
}

struct Engine {
    study: Study,
    scenario: ScenarioConfig,
    preamble: FlagPreamble,
    pre_cfg: AfdmConfig,
    data_cfg: AfdmConfig,
    n_pre: usize,
    sqrt_n: f64,
    paths: usize,
    k: usize,
    gamma: f64,
    snr_grid: Vec<f64>,
    trials: usize,
    channel_seed: u64,
    base_seed: u64,
    match_tolerance: usize,
    min_ber_bits: usize,
}

impl Engine {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let preamble = cfg.build_preamble()?;
        let n_pre = preamble.len();
        let cpp = cfg.cpp_len();
        Ok(Self {
            study: cfg.study,
            scenario: cfg.scenario.clone(),
            pre_cfg: AfdmConfig::plain_burst(n_pre, cpp)?,
            data_cfg: cfg.afdm_config()?,
            preamble,
            n_pre,
            sqrt_n: (n_pre as f64).sqrt(),
            paths: cfg.estimator_paths(),
            k: cfg.estimator.k,
            gamma: cfg.estimator.gamma,
            snr_grid: cfg.snr_grid_db.clone(),
            trials: cfg.trials,
            channel_seed: cfg.scenario.rng_seed.unwrap_or(cfg.base_seed),
            base_seed: cfg.base_seed,
            match_tolerance: cfg.match_tolerance,
            min_ber_bits: cfg.min_ber_bits,
        })
    }

    fn run(&self) -> Result<ResultTable> {
        match self.study {
            Study::Mse => self.run_mse(),
            Study::PdPm => self.run_pd_pm(),
            Study::Ber => self.run_ber(),
            Study::SweepK => self.run_sweep_k(),
            Study::SweepGamma => self.run_sweep_gamma(),
            Study::AfHeatmap => Ok(ResultTable::default()),
        }
    }

    fn estimator_config(&self, k: usize, gamma: f64) -> Result<EstimatorConfig> {
        EstimatorConfig::new(self.paths, k, gamma, self.preamble.clone())
    }

    fn trial_channel(&self, trial: u64) -> ChannelRealization {
        let mut rng =
            ChaCha12Rng::seed_from_u64(derive_seed(self.channel_seed, STREAM_CHANNEL, trial));
        channel::draw_channel(&self.scenario, &mut rng).expect("scenario validated")
    }

    /// Transmits the unit-power preamble burst through `chan` plus AWGN and
    /// returns the CPP-stripped body rescaled to unit-energy-preamble units.
    fn received_preamble(
        &self,
        chan: &ChannelRealization,
        snr_db: f64,
        trial: u64,
    ) -> Result<Vec<Complex64>> {
        let body: Vec<Complex64> = self.preamble.samples.iter().map(|v| v * self.sqrt_n).collect();
        let burst = afdm::prepend_cpp(&body, &self.pre_cfg);
        let resolved = chan.resolve(self.n_pre)?;
        let rx = channel::apply_channel_resolved(&burst, &resolved, self.pre_cfg.cpp_len)?;
        let mut rng =
            ChaCha12Rng::seed_from_u64(derive_seed(self.base_seed, STREAM_PRE_NOISE, trial));
        let noisy = channel::add_awgn(&rx, snr_db, 1.0, &mut rng);
        let stripped = afdm::strip_cpp(&noisy, &self.pre_cfg)?;
        Ok(stripped.iter().map(|v| v / self.sqrt_n).collect())
    }

    fn detection_counts(&self, chan: &ChannelRealization, est: &EstimateResult) -> MatchCounts {
        metrics::match_paths_with_tolerance(chan, &est.paths, self.n_pre, self.match_tolerance)
    }

    fn strongest_detected(&self, chan: &ChannelRealization, est: &EstimateResult) -> bool {
        let strongest = &chan.paths[chan.strongest_path()];
        let n = self.n_pre as i64;
        est.paths.iter().any(|p| {
            (p.delay_tap as i64 - strongest.delay as i64).rem_euclid(n) == 0
                && (p.doppler_tap - strongest.doppler).rem_euclid(n) == 0
        })
    }

    // ── MSE study ────────────────────────────────────────────────────

    fn run_mse(&self) -> Result<ResultTable> {
        let est_cfg = self.estimator_config(self.k, self.gamma)?;
        let mut aggs = vec![[Agg::default(), Agg::default()]; self.snr_grid.len()];
        for (gi, &snr) in self.snr_grid.iter().enumerate() {
            let outcomes = par::map_indexed(self.trials, |t| {
                self.mse_trial(&est_cfg, snr, t as u64)
            });
            for outcome in outcomes {
                let (trad, prop) = outcome?;
                aggs[gi][0].add_mse(&trad);
                aggs[gi][1].add_mse(&prop);
            }
        }
        let mut rows = Vec::new();
        for (vi, name) in ["traditional", "proposed"].iter().enumerate() {
            for (gi, &snr) in self.snr_grid.iter().enumerate() {
                rows.push(aggs[gi][vi].row("mse", name, snr));
            }
        }
        Ok(ResultTable { rows })
    }

    fn mse_trial(
        &self,
        est_cfg: &EstimatorConfig,
        snr: f64,
        trial: u64,
    ) -> Result<(MseOutcome, MseOutcome)> {
        let chan = self.trial_channel(trial);
        let r = self.received_preamble(&chan, snr, trial)?;
        let trad = estimation::estimate_traditional(&r, est_cfg)?;
        let prop = estimation::estimate_proposed(&r, est_cfg)?;
        let h_true = afdm::effective_channel_resolved(&chan.resolve(self.n_pre)?, &self.data_cfg)?;

        let outcome = |est: &EstimateResult| -> Result<MseOutcome> {
            let (h_hat, _) =
                estimation::reconstruct_channel_matrix(&est.paths, est_cfg, &self.data_cfg)?;
            Ok(MseOutcome {
                mse: metrics::channel_mse(&h_true, &h_hat)?,
                counts: self.detection_counts(&chan, est),
                fft_calls: est.counters.fft_calls,
            })
        };
        Ok((outcome(&trad)?, outcome(&prop)?))
    }

    // ── PD/PM study ──────────────────────────────────────────────────

    fn run_pd_pm(&self) -> Result<ResultTable> {
        let est_cfg = self.estimator_config(self.k, self.gamma)?;
        let mut aggs = vec![[Agg::default(), Agg::default(), Agg::default()]; self.snr_grid.len()];
        for (gi, &snr) in self.snr_grid.iter().enumerate() {
            let outcomes = par::map_indexed(self.trials, |t| {
                self.pd_pm_trial(&est_cfg, snr, t as u64)
            });
            for outcome in outcomes {
                let (prop_counts, prop_strongest, prop_fft, trad_counts) = outcome?;
                aggs[gi][0].add_detection(prop_counts, prop_fft);
                aggs[gi][1].add_indicator(prop_strongest);
                aggs[gi][2].add_detection(trad_counts, 0);
            }
        }
        let mut rows = Vec::new();
        let variants = ["proposed_all", "proposed_strongest", "traditional_all"];
        for (vi, name) in variants.iter().enumerate() {
            for (gi, &snr) in self.snr_grid.iter().enumerate() {
                rows.push(aggs[gi][vi].row("pd_pm", name, snr));
            }
        }
        Ok(ResultTable { rows })
    }

    fn pd_pm_trial(
        &self,
        est_cfg: &EstimatorConfig,
        snr: f64,
        trial: u64,
    ) -> Result<(MatchCounts, bool, u64, MatchCounts)> {
        let chan = self.trial_channel(trial);
        let r = self.received_preamble(&chan, snr, trial)?;
        let prop = estimation::estimate_proposed(&r, est_cfg)?;
        let trad = estimation::estimate_traditional(&r, est_cfg)?;
        Ok((
            self.detection_counts(&chan, &prop),
            self.strongest_detected(&chan, &prop),
            prop.counters.fft_calls,
            self.detection_counts(&chan, &trad),
        ))
    }

    // ── BER study ────────────────────────────────────────────────────

    fn run_ber(&self) -> Result<ResultTable> {
        let est_cfg = self.estimator_config(self.k, self.gamma)?;
        let bits_per_frame = 2 * self.data_cfg.n;
        let frames = self.trials.max(self.min_ber_bits.div_ceil(bits_per_frame));
        let mut aggs = vec![[Agg::default(), Agg::default(), Agg::default()]; self.snr_grid.len()];
        for (gi, &snr) in self.snr_grid.iter().enumerate() {
            let outcomes =
                par::map_indexed(frames, |t| self.ber_trial(&est_cfg, snr, t as u64));
            for outcome in outcomes {
                let per_variant = outcome?;
                for (vi, (errors, counts, fft)) in per_variant.into_iter().enumerate() {
                    aggs[gi][vi].add_bits(errors, bits_per_frame);
                    if let Some(c) = counts {
                        aggs[gi][vi].add_detection_counts(c, fft);
                    }
                }
            }
        }
        let mut rows = Vec::new();
        for (vi, name) in ["perfect", "proposed", "traditional"].iter().enumerate() {
            for (gi, &snr) in self.snr_grid.iter().enumerate() {
                rows.push(aggs[gi][vi].row("ber", name, snr));
            }
        }
        Ok(ResultTable { rows })
    }

    #[allow(clippy::type_complexity)]
    fn ber_trial(
        &self,
        est_cfg: &EstimatorConfig,
        snr: f64,
        trial: u64,
    ) -> Result<[(usize, Option<MatchCounts>, u64); 3]> {
        let chan = self.trial_channel(trial);
        let r = self.received_preamble(&chan, snr, trial)?;
        let prop = estimation::estimate_proposed(&r, est_cfg)?;
        let trad = estimation::estimate_traditional(&r, est_cfg)?;

        let mut bits_rng =
            ChaCha12Rng::seed_from_u64(derive_seed(self.base_seed, STREAM_BITS, trial));
        let bits: Vec<u8> = (0..2 * self.data_cfg.n)
            .map(|_| bits_rng.gen_range(0..2u8))
            .collect();
        let x = detection::qam_map(&bits)?;
        let s = afdm::modulate(&x, &self.data_cfg)?;
        let resolved_true = chan.resolve(self.n_pre)?;
        let rx = channel::apply_channel_resolved(&s, &resolved_true, self.data_cfg.cpp_len)?;
        let mut noise_rng =
            ChaCha12Rng::seed_from_u64(derive_seed(self.base_seed, STREAM_DATA_NOISE, trial));
        let noisy = channel::add_awgn(&rx, snr, 1.0, &mut noise_rng);
        let body = afdm::strip_cpp(&noisy, &self.data_cfg)?;
        let noise_var = 10f64.powf(-snr / 10.0);

        let evaluate = |paths: &[channel::ResolvedPath]| -> Result<usize> {
            let xhat =
                detection::lmmse_equalize_paths(&body, paths, &self.data_cfg, noise_var)?;
            let rx_bits = detection::qam_demap(&xhat);
            Ok(bits.iter().zip(&rx_bits).filter(|(a, b)| a != b).count())
        };

        let perfect_errors = evaluate(&resolved_true)?;
        let (prop_paths, _) = estimation::resolved_paths_from_estimates(
            &prop.paths,
            self.n_pre,
            self.data_cfg.cpp_len,
        );
        let prop_errors = evaluate(&prop_paths)?;
        let (trad_paths, _) = estimation::resolved_paths_from_estimates(
            &trad.paths,
            self.n_pre,
            self.data_cfg.cpp_len,
        );
        let trad_errors = evaluate(&trad_paths)?;

        Ok([
            (perfect_errors, None, 0),
            (
                prop_errors,
                Some(self.detection_counts(&chan, &prop)),
                prop.counters.fft_calls,
            ),
            (
                trad_errors,
                Some(self.detection_counts(&chan, &trad)),
                trad.counters.fft_calls,
            ),
        ])
    }

    // ── Candidate-count sweep ────────────────────────────────────────

    /// Half the trials use standard scenario draws and half use constructed
    /// curtain-masking channels, where candidate selection actually matters.
    fn sweep_channel(&self, trial: u64) -> ChannelRealization {
        if trial.is_multiple_of(2) {
            self.trial_channel(trial)
        } else {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(
                self.channel_seed,
                STREAM_CHANNEL,
                trial,
            ));
            curtain_masked_channel(&self.scenario, self.preamble.curtain.xi, 0.4, &mut rng)
                .expect("scenario validated")
        }
    }

    fn run_sweep_k(&self) -> Result<ResultTable> {
        let mut rows = Vec::new();
        for k in 1..=6usize {
            let est_cfg = self.estimator_config(k, self.gamma)?;
            for &snr in &self.snr_grid {
                let outcomes = par::map_indexed(self.trials, |t| {
                    self.sweep_k_trial(&est_cfg, snr, t as u64)
                });
                let mut agg = Agg::default();
                for outcome in outcomes {
                    let (included, fft) = outcome?;
                    agg.add_indicator(included);
                    agg.fft_sum += fft;
                    agg.fft_n += 1;
                }
                rows.push(agg.row("sweep_k", &k.to_string(), snr));
            }
        }
        Ok(ResultTable { rows })
    }

    /// Indicator: the strongest path's true intercept appears in the first
    /// iteration's candidate set.
    fn sweep_k_trial(
        &self,
        est_cfg: &EstimatorConfig,
        snr: f64,
        trial: u64,
    ) -> Result<(bool, u64)> {
        let chan = self.sweep_channel(trial);
        let r = self.received_preamble(&chan, snr, trial)?;
        let est = estimation::estimate_proposed(&r, est_cfg)?;
        let strongest = &chan.paths[chan.strongest_path()];
        let k_true = estimation::true_intercept(
            strongest.delay,
            strongest.doppler,
            self.preamble.curtain.xi,
            self.n_pre,
        );
        Ok((
            est.candidate_history[0].contains(&k_true),
            est.counters.fft_calls,
        ))
    }

    // ── Threshold sweep ──────────────────────────────────────────────

    /// Candidate-level miss / false-alarm statistics of the first search
    /// iteration, where the candidate sets of increasing gamma are nested
    /// (the residual does not yet depend on gamma). K is widened so the
    /// threshold is the binding constraint.
    fn run_sweep_gamma(&self) -> Result<ResultTable> {
        let k_wide = 8usize.min(self.n_pre);
        let gammas: Vec<f64> = (1..=12).map(|i| i as f64 * 0.05).collect();
        let mut rows = Vec::new();
        for &gamma in &gammas {
            let est_cfg = self.estimator_config(k_wide, gamma)?;
            for &snr in &self.snr_grid {
                let outcomes = par::map_indexed(self.trials, |t| {
                    self.sweep_gamma_trial(&est_cfg, snr, t as u64)
                });
                let mut agg = Agg::default();
                for outcome in outcomes {
                    let (missed, true_count, false_count) = outcome?;
                    agg.trials += 1;
                    agg.cand_missed += missed;
                    agg.cand_true += true_count;
                    agg.cand_false += false_count;
                    agg.cand_slots += k_wide;
                }
                rows.push(agg.row("sweep_gamma", &format!("{gamma:.2}"), snr));
            }
        }
        Ok(ResultTable { rows })
    }

    fn sweep_gamma_trial(
        &self,
        est_cfg: &EstimatorConfig,
        snr: f64,
        trial: u64,
    ) -> Result<(usize, usize, usize)> {
        let chan = self.trial_channel(trial);
        let r = self.received_preamble(&chan, snr, trial)?;
        let est = estimation::estimate_proposed(&r, est_cfg)?;
        let xi = self.preamble.curtain.xi;
        let true_ks: BTreeSet<usize> = chan
            .paths
            .iter()
            .map(|p| estimation::true_intercept(p.delay, p.doppler, xi, self.n_pre))
            .collect();
        let first = &est.candidate_history[0];
        let missed = true_ks.iter().filter(|k| !first.contains(k)).count();
        let false_count = first.iter().filter(|k| !true_ks.contains(k)).count();
        Ok((missed, true_ks.len(), false_count))
    }
}

/// Per-grid-point accumulator; folded in trial order.
#[derive(Debug, Default, Clone, Copy)]
struct Agg {
    trials: usize,
    mse_sum: f64,
    mse_sq: f64,
    mse_n: usize,
    detected: usize,
    truth: usize,
    false_alarms: usize,
    strongest_hits: usize,
    indicator_n: usize,
    bit_errors: usize,
    bits: usize,
    fft_sum: u64,
    fft_n: usize,
    cand_missed: usize,
    cand_true: usize,
    cand_false: usize,
    cand_slots: usize,
}

struct MseOutcome {
    mse: f64,
    counts: MatchCounts,
    fft_calls: u64,
}

impl Agg {
    fn add_mse(&mut self, o: &MseOutcome) {
        self.trials += 1;
        self.mse_sum += o.mse;
        self.mse_sq += o.mse * o.mse;
        self.mse_n += 1;
        self.add_counts(o.counts);
        self.fft_sum += o.fft_calls;
        self.fft_n += 1;
    }

    fn add_detection(&mut self, c: MatchCounts, fft: u64) {
        self.trials += 1;
        self.add_detection_counts(c, fft);
    }

    /// Detection bookkeeping for a trial already counted via another metric.
    fn add_detection_counts(&mut self, c: MatchCounts, fft: u64) {
        self.add_counts(c);
        if fft > 0 {
            self.fft_sum += fft;
            self.fft_n += 1;
        }
    }

    fn add_counts(&mut self, c: MatchCounts) {
        self.detected += c.detected;
        self.truth += c.detected + c.misses;
        self.false_alarms += c.false_alarms;
    }

    fn add_indicator(&mut self, hit: bool) {
        self.trials += 1;
        self.strongest_hits += usize::from(hit);
        self.indicator_n += 1;
    }

    fn add_bits(&mut self, errors: usize, total: usize) {
        self.trials += 1;
        self.bit_errors += errors;
        self.bits += total;
    }

    fn row(&self, study: &str, param: &str, snr_db: f64) -> ResultRow {
        let mse = if self.mse_n > 0 {
            let n = self.mse_n as f64;
            let mean = self.mse_sum / n;
            let var = if self.mse_n > 1 {
                ((self.mse_sq - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            Some((mean, (var / n).sqrt()))
        } else {
            None
        };
        let (pd, pm, pfa) = if self.cand_true > 0 {
            // Candidate-level statistics (threshold sweep).
            let pm = self.cand_missed as f64 / self.cand_true as f64;
            let pfa = self.cand_false as f64 / self.cand_slots.max(1) as f64;
            (Some(1.0 - pm), Some(pm), Some(pfa))
        } else if self.indicator_n > 0 {
            let pd = self.strongest_hits as f64 / self.indicator_n as f64;
            (Some(pd), Some(1.0 - pd), None)
        } else if self.truth > 0 {
            let pd = self.detected as f64 / self.truth as f64;
            let pm = 1.0 - pd;
            (
                Some(pd),
                Some(pm),
                Some(self.false_alarms as f64 / self.truth as f64),
            )
        } else {
            (None, None, None)
        };
        ResultRow {
            study: study.into(),
            param: param.into(),
            snr_db,
            trials: self.trials,
            mse_mean: mse.map(|m| m.0),
            mse_sem: mse.map(|m| m.1),
            pd,
            pm,
            pfa,
            ber: if self.bits > 0 {
                Some(self.bit_errors as f64 / self.bits as f64)
            } else {
                None
            },
            fft_calls_mean: if self.fft_n > 0 {
                Some(self.fft_sum as f64 / self.fft_n as f64)
            } else {
                None
            },
        }
    }
}

/// Constructed curtain-masking channel: a weak second path's ambiguity peak
/// lies on the strong first path's curtain line (`nu2 = nu1 - xi*d` for
/// delay offset `d`). Strong/weak magnitudes are deterministic
/// (`sqrt(profile[0])` and `weak_ratio` times that); phases are random.
/// Remaining paths, if any, are regular random draws on distinct delays.
///
/// The strong path is kept off delay 0: a detected path at delay 0
/// coincides with the basis the line search projects onto, so cancelling it
/// would null the shared intercept exactly and no line-search-based
/// estimator could see the masked path afterwards. The weak path's Doppler
/// tap follows the line geometry and may leave the scenario's physical
/// Doppler range; it stays a valid cell of the estimation grid.
pub fn curtain_masked_channel<R: Rng>(
    scn: &ScenarioConfig,
    xi: i64,
    weak_ratio: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    scn.validate()?;
    if scn.p < 2 {
        return Err(Error::InvalidConfig(
            "curtain-masking construction needs at least 2 paths".into(),
        ));
    }
    if scn.max_delay_tap < 2 {
        return Err(Error::InvalidConfig(
            "curtain-masking construction needs maxDelayTap >= 2".into(),
        ));
    }
    let nu_max = scn.max_doppler_tap;
    let strong_delay = rng.gen_range(1..scn.max_delay_tap);
    let d = rng.gen_range(1..=scn.max_delay_tap - strong_delay);
    let nu1 = rng.gen_range(-nu_max..=nu_max);
    let strong_mag = scn.power_profile[0].sqrt();
    let strong = ChannelPath {
        delay: strong_delay,
        doppler: nu1,
        gain: Complex64::from_polar(strong_mag, rng.gen_range(0.0..std::f64::consts::TAU)),
    };
    let weak = ChannelPath {
        delay: strong_delay + d,
        doppler: nu1 - xi * d as i64,
        gain: Complex64::from_polar(
            weak_ratio * strong_mag,
            rng.gen_range(0.0..std::f64::consts::TAU),
        ),
    };
    let mut paths = vec![strong, weak];
    let mut used: Vec<usize> = vec![strong_delay, strong_delay + d];
    for i in 2..scn.p {
        let mut delay = rng.gen_range(1..=scn.max_delay_tap);
        while used.contains(&delay) {
            delay = rng.gen_range(1..=scn.max_delay_tap);
        }
        used.push(delay);
        paths.push(ChannelPath {
            delay,
            doppler: rng.gen_range(-nu_max..=nu_max),
            gain: channel::complex_gaussian(rng) * scn.power_profile[i].sqrt(),
        });
    }
    Ok(ChannelRealization { paths })
}
