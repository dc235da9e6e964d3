use std::io::Read;
use std::path::Path;

use crate::opt::Algorithm;
use crate::{Error, Result};

pub const RESULTS_HEADER: &str =
    "algorithm,noise,episode,step,score,best_rmse,terminated,terminal_step,failed,step_ms";

/// Floats in result tables: 9 significant digits, scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.8e}")
}

/// One (algorithm, noise, episode, step) entry. Steps after an episode
/// ended early carry the final best value but no score or timing.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub noise: f64,
    pub episode: usize,
    pub step: usize,
    pub score: Option<f64>,
    pub best_rmse: Option<f64>,
    pub terminated: bool,
    pub terminal_step: Option<usize>,
    pub failed: bool,
    pub step_ms: Option<f64>,
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

impl BenchRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.noise,
            self.episode,
            self.step,
            opt_float(self.score),
            opt_float(self.best_rmse),
            u8::from(self.terminated),
            self.terminal_step
                .map(|s| s.to_string())
                .unwrap_or_default(),
            u8::from(self.failed),
            opt_float(self.step_ms),
        )
    }

    fn sort_key(&self) -> (f64, Algorithm, usize, usize) {
        (self.noise, self.algorithm, self.episode, self.step)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchmarkResult {
    pub rows: Vec<BenchRow>,
}

impl BenchmarkResult {
    /// Orders rows by noise, algorithm, episode and step.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            let (ka, kb) = (a.sort_key(), b.sort_key());
            ka.0.total_cmp(&kb.0)
                .then(ka.1.cmp(&kb.1))
                .then(ka.2.cmp(&kb.2))
                .then(ka.3.cmp(&kb.3))
        });
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(RESULTS_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.to_csv_line());
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn parse(reader: impl Read) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header = csv
            .headers()
            .map_err(|e| Error::format("results csv", e.to_string()))?
            .iter()
            .collect::<Vec<_>>()
            .join(",");
        if header != RESULTS_HEADER {
            return Err(Error::format(
                "results csv",
                format!("unexpected header {header:?}"),
            ));
        }
        let mut rows = Vec::new();
        for (i, rec) in csv.records().enumerate() {
            let rec = rec.map_err(|e| Error::format("results csv", e.to_string()))?;
            let line = i + 2;
            let bad = |what: &str| Error::format("results csv", format!("line {line}: bad {what}"));
            let f = |k: usize| rec.get(k).unwrap_or("");
            let num = |k: usize, what: &str| -> Result<Option<f64>> {
                match f(k) {
                    "" => Ok(None),
                    s => s.parse().map(Some).map_err(|_| bad(what)),
                }
            };
            let flag = |k: usize, what: &str| match f(k) {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(bad(what)),
            };
            rows.push(BenchRow {
                algorithm: f(0).parse().map_err(|_| bad("algorithm"))?,
                noise: f(1).parse().map_err(|_| bad("noise"))?,
                episode: f(2).parse().map_err(|_| bad("episode"))?,
                step: f(3).parse().map_err(|_| bad("step"))?,
                score: num(4, "score")?,
                best_rmse: num(5, "best_rmse")?,
                terminated: flag(6, "terminated")?,
                terminal_step: match f(7) {
                    "" => None,
                    s => Some(s.parse().map_err(|_| bad("terminal_step"))?),
                },
                failed: flag(8, "failed")?,
                step_ms: num(9, "step_ms")?,
            });
        }
        Ok(Self { rows })
    }

    /// Final best RMSE of every successful episode in a cell.
    pub fn final_best(&self, algorithm: Algorithm, noise: f64) -> Vec<f64> {
        self.cell_values(algorithm, noise, None)
    }

    /// Best RMSE at `step` (or the last step) of every successful episode.
    pub fn cell_values(&self, algorithm: Algorithm, noise: f64, step: Option<usize>) -> Vec<f64> {
        let last = self.rows.iter().map(|r| r.step).max().unwrap_or(0);
        let step = step.unwrap_or(last);
        self.rows
            .iter()
            .filter(|r| r.algorithm == algorithm && r.noise == noise && r.step == step && !r.failed)
            .filter_map(|r| r.best_rmse)
            .collect()
    }
}

pub fn read_results(path: &Path) -> Result<BenchmarkResult> {
    BenchmarkResult::parse(std::fs::File::open(path)?)
}
