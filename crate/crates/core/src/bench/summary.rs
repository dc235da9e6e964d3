use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::results::{format_float, BenchmarkResult};
use crate::opt::Algorithm;
use crate::{stats, Error, Result};

pub const SUMMARY_HEADER: &str = "algorithm,noise,step,episodes,statistic,center,p25,p75,step_ms";

/// Central statistic of the per-step aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Statistic {
    #[default]
    Median,
    Mean,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Median => "median",
            Statistic::Mean => "mean",
        })
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(Statistic::Median),
            "mean" => Ok(Statistic::Mean),
            _ => Err(Error::config(format!(
                "unknown statistic {s:?} (median or mean)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub noise: f64,
    pub step: usize,
    /// Successful episodes aggregated.
    pub episodes: usize,
    pub statistic: Statistic,
    pub center: f64,
    pub p25: f64,
    pub p75: f64,
    /// Mean wall-clock step time; absent for the reset and the first step,
    /// which include warm-up.
    pub step_ms: Option<f64>,
}

impl SummaryRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.noise,
            self.step,
            self.episodes,
            self.statistic,
            format_float(self.center),
            format_float(self.p25),
            format_float(self.p75),
            self.step_ms.map(format_float).unwrap_or_default(),
        )
    }
}

/// Aggregates best-so-far RMSE per (algorithm, noise, step) over the
/// successful episodes.
pub fn summarize(result: &BenchmarkResult, statistic: Statistic) -> Result<Vec<SummaryRow>> {
    if result.rows.is_empty() {
        return Err(Error::invalid("cannot summarize an empty result"));
    }
    type Key = (u64, Algorithm, usize);
    let mut cells: BTreeMap<Key, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in result.rows.iter().filter(|r| !r.failed) {
        let Some(best) = r.best_rmse else { continue };
        // noise labels are nonnegative, so their bit patterns sort like values
        let entry = cells
            .entry((r.noise.to_bits(), r.algorithm, r.step))
            .or_default();
        entry.0.push(best);
        if r.step > 1 {
            entry.1.extend(r.step_ms);
        }
    }
    Ok(cells
        .into_iter()
        .map(|((noise, algorithm, step), (values, times))| SummaryRow {
            algorithm,
            noise: f64::from_bits(noise),
            step,
            episodes: values.len(),
            statistic,
            center: match statistic {
                Statistic::Median => stats::median(&values),
                Statistic::Mean => stats::mean(&values),
            },
            p25: stats::percentile(&values, 25.0),
            p75: stats::percentile(&values, 75.0),
            step_ms: (!times.is_empty()).then(|| stats::mean(&times)),
        })
        .collect())
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut csv =
        csv::Reader::from_path(path).map_err(|e| Error::format("summary csv", e.to_string()))?;
    let mut rows = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec.map_err(|e| Error::format("summary csv", e.to_string()))?;
        let bad = |what: &str| Error::format("summary csv", format!("line {}: bad {what}", i + 2));
        let f = |k: usize| rec.get(k).unwrap_or("");
        let num = |k: usize, what: &str| f(k).parse::<f64>().map_err(|_| bad(what));
        rows.push(SummaryRow {
            algorithm: f(0).parse().map_err(|_| bad("algorithm"))?,
            noise: num(1, "noise")?,
            step: f(2).parse().map_err(|_| bad("step"))?,
            episodes: f(3).parse().map_err(|_| bad("episodes"))?,
            statistic: f(4).parse().map_err(|_| bad("statistic"))?,
            center: num(5, "center")?,
            p25: num(6, "p25")?,
            p75: num(7, "p75")?,
            step_ms: match f(8) {
                "" => None,
                _ => Some(num(8, "step_ms")?),
            },
        });
    }
    Ok(rows)
}
