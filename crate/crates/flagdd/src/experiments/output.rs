//! Aggregated result rows and their CSV serialization.

use std::fmt::Write as _;
use std::path::Path;

/// One aggregated grid point. Metrics that a study does not produce are
/// `None` and serialize as empty CSV fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub study: String,
    /// Sweep parameter or estimator variant (e.g. "proposed", "3", "0.25").
    pub param: String,
    pub snr_db: f64,
    pub trials: usize,
    pub mse_mean: Option<f64>,
    pub mse_sem: Option<f64>,
    pub pd: Option<f64>,
    pub pm: Option<f64>,
    pub pfa: Option<f64>,
    pub ber: Option<f64>,
    pub fft_calls_mean: Option<f64>,
}

pub const CSV_HEADER: &str = "study,param,snr_db,trials,mse_mean,mse_sem,pd,pm,pfa,ber,fft_calls_mean";

fn push_opt(out: &mut String, v: Option<f64>) {
    match v {
        Some(x) => {
            let _ = write!(out, ",{x:.10e}");
        }
        None => out.push(','),
    }
}

impl ResultRow {
    fn push_csv(&self, out: &mut String) {
        let _ = write!(
            out,
            "{},{},{:.2},{}",
            self.study, self.param, self.snr_db, self.trials
        );
        push_opt(out, self.mse_mean);
        push_opt(out, self.mse_sem);
        push_opt(out, self.pd);
        push_opt(out, self.pm);
        push_opt(out, self.pfa);
        push_opt(out, self.ber);
        push_opt(out, self.fft_calls_mean);
        out.push('\n');
    }
}

/// All rows of one study run, in deterministic order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            row.push_csv(&mut out);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv_string())
    }

    /// Row lookup by variant/parameter and SNR.
    pub fn get(&self, param: &str, snr_db: f64) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.param == param && (r.snr_db - snr_db).abs() < 1e-9)
    }

    /// All rows of one variant/parameter, in grid order.
    pub fn rows_for(&self, param: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.param == param).collect()
    }
}
