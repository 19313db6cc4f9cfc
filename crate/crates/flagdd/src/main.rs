//! `flagdd` command-line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use flagdd::experiments::{run_study, ExperimentConfig, Study};
use flagdd::{ambiguity, sequences};

#[derive(Parser)]
#[command(
    name = "flagdd",
    about = "Flag-preamble delay-Doppler channel estimation experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo study described by a TOML config file.
    Run {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override the configured study (SweepK, SweepGamma, Mse, PdPm,
        /// Ber, AfHeatmap).
        #[arg(long)]
        study: Option<String>,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the worker count (0 = library default).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Render the ambiguity grid of a Flag preamble to CSV.
    Af {
        /// Preamble length.
        #[arg(long, default_value_t = 257)]
        len: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Peak-sequence seed (random polyphase only).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run {
            config,
            study,
            seed,
            trials,
            out,
            workers,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let mut cfg = ExperimentConfig::from_toml(&text)?;
            if let Some(name) = study {
                cfg.study = Study::parse(&name)?;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(dir) = out {
                cfg.output_path = dir.to_string_lossy().into_owned();
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            cfg.validate()?;
            let output = run_study(&cfg)?;
            for path in &output.written {
                println!("wrote {}", path.display());
            }
            for row in &output.table.rows {
                println!(
                    "{} param={} snr={:.1} trials={}{}{}{}",
                    row.study,
                    row.param,
                    row.snr_db,
                    row.trials,
                    row.mse_mean
                        .map(|v| format!(" mse={v:.3e}"))
                        .unwrap_or_default(),
                    row.pd.map(|v| format!(" pd={v:.4}")).unwrap_or_default(),
                    row.ber.map(|v| format!(" ber={v:.3e}")).unwrap_or_default(),
                );
            }
            Ok(())
        }
        Command::Af { len, out, seed } => {
            let preamble = sequences::default_flag(len, seed)?;
            let grid = ambiguity::full_grid(&preamble.samples, &preamble.samples)?;
            let mut file = std::fs::File::create(&out)
                .map_err(|e| format!("cannot create {}: {e}", out.display()))?;
            grid.write_csv(&mut file)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}
