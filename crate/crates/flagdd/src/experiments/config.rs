//! Experiment configuration, mirrored 1:1 by the TOML config file.

use serde::{Deserialize, Serialize};

use crate::channel::ScenarioConfig;
use crate::sequences::{CurtainParams, FlagPreamble, PeakKind};
use crate::{Error, Result};

/// Which study to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Study {
    /// Candidate-count sweep: inclusion probability of the strongest path's
    /// intercept in the first candidate set, K = 1..6.
    SweepK,
    /// Threshold sweep: candidate-level miss / false-alarm trade-off over
    /// gamma.
    SweepGamma,
    /// Channel-matrix MSE of both estimators vs SNR.
    Mse,
    /// Detection / miss probabilities of the proposed estimator vs SNR.
    PdPm,
    /// Uncoded BER with perfect, proposed, and traditional CSI.
    Ber,
    /// Full ambiguity grid of the configured preamble (no trials).
    AfHeatmap,
}

impl Study {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "sweepk" | "sweep_k" => Ok(Study::SweepK),
            "sweepgamma" | "sweep_gamma" => Ok(Study::SweepGamma),
            "mse" => Ok(Study::Mse),
            "pdpm" | "pd_pm" => Ok(Study::PdPm),
            "ber" => Ok(Study::Ber),
            "afheatmap" | "af_heatmap" | "af" => Ok(Study::AfHeatmap),
            other => Err(Error::InvalidConfig(format!(
                "study: unknown study '{other}' (expected SweepK, SweepGamma, Mse, PdPm, Ber, AfHeatmap)"
            ))),
        }
    }

    pub fn file_stem(&self) -> &'static str {
        match self {
            Study::SweepK => "sweep_k",
            Study::SweepGamma => "sweep_gamma",
            Study::Mse => "mse",
            Study::PdPm => "pd_pm",
            Study::Ber => "ber",
            Study::AfHeatmap => "af_heatmap",
        }
    }
}

/// Estimator knobs (P defaults to the scenario path count).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimatorSettings {
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_k() -> usize {
    3
}

fn default_gamma() -> f64 {
    0.25
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            p: None,
            k: default_k(),
            gamma: default_gamma(),
        }
    }
}

/// Preamble regeneration parameters (samples are never serialized).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PreambleSettings {
    /// Curtain slope. The default 13 keeps the curtain lines of any two
    /// physically admissible paths distinct: with delays up to ~9 taps and
    /// |Doppler| <= 2, `13*d mod N` never lands within the Doppler span, so
    /// one path's cancellation can never hide another path's line-search
    /// intercept. Slope 1 reproduces the plain diagonal-curtain preamble.
    #[serde(default = "default_xi")]
    pub xi: i64,
    /// Peak kind; defaults to WeilLegendre for prime lengths, otherwise
    /// RandomPolyphase.
    #[serde(default)]
    pub peak_kind: Option<PeakKind>,
    #[serde(default)]
    pub peak_seed: u64,
}

fn default_xi() -> i64 {
    13
}

impl Default for PreambleSettings {
    fn default() -> Self {
        Self {
            xi: default_xi(),
            peak_kind: None,
            peak_seed: 0,
        }
    }
}

/// AFDM modem settings; `c1` defaults to the full-diversity choice
/// `(2 nu_max + 1) / (2N)` and `cppLen` to the scenario delay spread.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AfdmSettings {
    pub n: usize,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub cpp_len: Option<usize>,
}

/// Full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub study: Study,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub scenario: ScenarioConfig,
    pub afdm: AfdmSettings,
    #[serde(default)]
    pub estimator: EstimatorSettings,
    pub preamble_len: usize,
    #[serde(default)]
    pub preamble: PreambleSettings,
    pub base_seed: u64,
    #[serde(default = "default_output")]
    pub output_path: String,
    /// Detection cell tolerance for sensitivity studies; 0 = exact.
    #[serde(default)]
    pub match_tolerance: usize,
    /// Worker threads for trial evaluation (0 = library default); results
    /// do not depend on it.
    #[serde(default)]
    pub workers: usize,
    /// Minimum data bits per BER grid point.
    #[serde(default = "default_min_bits")]
    pub min_ber_bits: usize,
}

fn default_output() -> String {
    "results".into()
}

fn default_min_bits() -> usize {
    100_000
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 && self.study != Study::AfHeatmap {
            return Err(Error::InvalidConfig("trials: must be >= 1".into()));
        }
        if self.snr_grid_db.is_empty() && self.study != Study::AfHeatmap {
            return Err(Error::InvalidConfig("snrGridDb: must be nonempty".into()));
        }
        if self.preamble_len < 2 {
            return Err(Error::InvalidConfig(format!(
                "preambleLen: must be >= 2, got {}",
                self.preamble_len
            )));
        }
        self.scenario
            .validate()
            .map_err(|e| Error::InvalidConfig(format!("scenario: {e}")))?;
        if let Some(k) = self.estimator.p {
            if k < 1 {
                return Err(Error::InvalidConfig("estimator.p: must be >= 1".into()));
            }
        }
        if self.estimator.k < 1 || self.estimator.k > self.preamble_len {
            return Err(Error::InvalidConfig(format!(
                "estimator.k: must be in [1, preambleLen], got {}",
                self.estimator.k
            )));
        }
        if !(self.estimator.gamma > 0.0 && self.estimator.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "estimator.gamma: must be in (0, 1), got {}",
                self.estimator.gamma
            )));
        }
        if self.afdm.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "afdm.n: must be >= 2, got {}",
                self.afdm.n
            )));
        }
        if let Some(cpp) = self.afdm.cpp_len {
            if cpp < self.scenario.max_delay_tap {
                return Err(Error::InvalidConfig(format!(
                    "afdm.cppLen: {} is below scenario.maxDelayTap {}",
                    cpp, self.scenario.max_delay_tap
                )));
            }
        }
        self.build_preamble()?;
        Ok(())
    }

    /// Effective P for the estimator.
    pub fn estimator_paths(&self) -> usize {
        self.estimator.p.unwrap_or(self.scenario.p)
    }

    /// CPP length for both the preamble burst and the data frame.
    pub fn cpp_len(&self) -> usize {
        self.afdm.cpp_len.unwrap_or(self.scenario.max_delay_tap)
    }

    /// Resolved data-frame modem config.
    pub fn afdm_config(&self) -> Result<crate::afdm::AfdmConfig> {
        let cpp = self.cpp_len();
        match self.afdm.c1 {
            Some(c1) => crate::afdm::AfdmConfig::new(self.afdm.n, c1, self.afdm.c2, cpp),
            None => {
                let mut cfg = crate::afdm::AfdmConfig::full_diversity(
                    self.afdm.n,
                    self.scenario.max_doppler_tap,
                    cpp,
                )?;
                cfg.c2 = self.afdm.c2;
                Ok(cfg)
            }
        }
    }

    /// Regenerates the configured Flag preamble.
    pub fn build_preamble(&self) -> Result<FlagPreamble> {
        let curtain = CurtainParams::auto(self.preamble_len, self.preamble.xi)
            .map_err(|e| Error::InvalidConfig(format!("preamble: {e}")))?;
        let kind = self.preamble.peak_kind.unwrap_or_else(|| {
            if is_prime(self.preamble_len) {
                PeakKind::WeilLegendre
            } else {
                PeakKind::RandomPolyphase
            }
        });
        crate::sequences::make_flag(curtain, kind, self.preamble.peak_seed)
            .map_err(|e| Error::InvalidConfig(format!("preamble: {e}")))
    }

    /// Desk-scale defaults: preamble 127, data frame 256, EVA-like 4-path
    /// scenario.
    pub fn desk_scale(study: Study) -> Self {
        Self {
            study,
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            trials: 500,
            scenario: ScenarioConfig::default(),
            afdm: AfdmSettings {
                n: 256,
                c1: None,
                c2: 0.0,
                cpp_len: None,
            },
            estimator: EstimatorSettings::default(),
            preamble_len: 127,
            preamble: PreambleSettings::default(),
            base_seed: 1,
            output_path: default_output(),
            match_tolerance: 0,
            workers: 0,
            min_ber_bits: default_min_bits(),
        }
    }
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
