//! Benchmark matrix runner, result tables and landscape export.

mod landscape;
mod results;
mod summary;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use landscape::{emit_landscape, read_landscape_csv, LandscapeSlice, MINIMA_FILE};
pub use results::{format_float, read_results, BenchRow, BenchmarkResult, RESULTS_HEADER};
pub use summary::{read_summary, summarize, write_summary, Statistic, SummaryRow, SUMMARY_HEADER};

use crate::config::SceneConfig;
use crate::env::{AlignEnv, EnvConfig, NoiseLevel};
use crate::opt::{run_episode, Algorithm, EpisodeTrajectory, SearchBox};
use crate::{seed, Error, Result, SensorImage};

/// File name of the per-step results table inside the output directory.
pub const RESULTS_FILE: &str = "results.csv";

const ALGORITHM_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub algorithms: Vec<Algorithm>,
    pub noise_levels: Vec<f64>,
    pub episodes: usize,
    /// Step budget per episode.
    pub steps: usize,
    pub seed: u64,
    /// Where `results.csv` goes; `None` keeps results in memory only.
    pub out_dir: Option<PathBuf>,
}

impl BenchmarkConfig {
    /// Defaults from the scene's `[bench]` section.
    pub fn from_scene(scene: &SceneConfig) -> Result<Self> {
        let b = &scene.bench;
        Ok(Self {
            algorithms: b
                .algorithms
                .iter()
                .map(|a| a.parse())
                .collect::<Result<_>>()?,
            noise_levels: b.noise_levels.clone(),
            episodes: b.episodes,
            steps: b.steps,
            seed: b.seed,
            out_dir: None,
        })
    }

    fn validate(&self, scene: &SceneConfig) -> Result<()> {
        if self.episodes < 1 {
            return Err(Error::config("episodes must be at least 1"));
        }
        if self.algorithms.is_empty() || self.noise_levels.is_empty() {
            return Err(Error::config(
                "need at least one algorithm and one noise level",
            ));
        }
        if self.steps > scene.env.max_steps {
            return Err(Error::config(format!(
                "step budget {} exceeds env max_steps {}",
                self.steps, scene.env.max_steps
            )));
        }
        for &level in &self.noise_levels {
            NoiseLevel::from_label(level, scene.env.translation_scale)?;
            if scene.env.threshold_for(level).is_none() {
                return Err(Error::config(format!(
                    "no calibrated threshold for noise {level}; run `calibrate` first"
                )));
            }
        }
        Ok(())
    }
}

/// Environment configuration for one noise level with its calibrated
/// threshold.
pub fn env_for_level(scene: &SceneConfig, level: f64) -> Result<EnvConfig> {
    let base = EnvConfig::from_scene(scene)?;
    let theta = scene
        .env
        .threshold_for(level)
        .ok_or_else(|| Error::config(format!("no calibrated threshold for noise {level}")))?;
    Ok(base
        .with_noise(NoiseLevel::from_label(level, scene.env.translation_scale)?)
        .with_threshold(theta))
}

/// Search box for the baselines over the active dimensions.
pub fn search_box(scene: &SceneConfig) -> Result<SearchBox> {
    let dims = scene.env.active.iter().filter(|a| **a).count();
    SearchBox::centered(
        dims,
        scene.baseline.search_fraction,
        scene.baseline.search_mode,
    )
}

/// Seed of episode `episode`: shared by every algorithm and noise level so
/// all of them face the same problem instances.
pub fn episode_seed(master: u64, episode: usize) -> u64 {
    seed::derive(master, episode as u64)
}

/// Runs every (noise, algorithm) cell for `config.episodes` episodes.
///
/// With an output directory, `results.csv` is rewritten from scratch and
/// each finished episode is appended as one block, so an interrupted run
/// leaves only complete rows. An episode that errors is recorded as failed
/// and the run continues.
pub fn run_benchmark(
    scene: &SceneConfig,
    config: &BenchmarkConfig,
    reference: Arc<SensorImage>,
) -> Result<BenchmarkResult> {
    config.validate(scene)?;
    let search = search_box(scene)?;
    let mut sink = match &config.out_dir {
        Some(dir) => Some(ResultSink::create(dir)?),
        None => None,
    };
    let mut result = BenchmarkResult::default();
    for &level in &config.noise_levels {
        let env_config = env_for_level(scene, level)?;
        let mut env = AlignEnv::new(env_config, reference.clone())?;
        for (a, &algorithm) in config.algorithms.iter().enumerate() {
            for episode in 0..config.episodes {
                let ep_seed = episode_seed(config.seed, episode);
                let opt_seed =
                    seed::derive_path(config.seed, &[ALGORITHM_STREAM, episode as u64, a as u64]);
                let mut optimizer = algorithm.build(search.clone(), &scene.baseline, opt_seed);
                let outcome = run_episode(optimizer.as_mut(), &mut env, ep_seed, config.steps);
                if let Err(e) = &outcome {
                    log::warn!("{algorithm} noise {level} episode {episode} failed: {e}");
                }
                let rows = episode_rows(
                    algorithm,
                    level,
                    episode,
                    config.steps,
                    outcome.ok().as_ref(),
                );
                if let Some(sink) = sink.as_mut() {
                    sink.append(&rows)?;
                }
                log::info!(
                    "{algorithm} noise {level} episode {episode}: final best {}",
                    rows.last()
                        .and_then(|r| r.best_rmse)
                        .map_or("n/a".into(), format_float)
                );
                result.rows.extend(rows);
            }
        }
    }
    result.sort();
    if let Some(dir) = &config.out_dir {
        // final sorted rewrite; identical to the incremental file when runs
        // complete in order
        result.write(&dir.join(RESULTS_FILE))?;
    }
    Ok(result)
}

/// Table rows for one episode, padded to `steps + 1` rows. A failed
/// episode (`None`) gets rows with no scores.
pub fn episode_rows(
    algorithm: Algorithm,
    noise: f64,
    episode: usize,
    steps: usize,
    traj: Option<&EpisodeTrajectory>,
) -> Vec<BenchRow> {
    (0..=steps)
        .map(|step| {
            let base = BenchRow {
                algorithm,
                noise,
                episode,
                step,
                score: None,
                best_rmse: None,
                terminated: false,
                terminal_step: None,
                failed: traj.is_none(),
                step_ms: None,
            };
            let Some(t) = traj else { return base };
            let k = step.min(t.steps());
            BenchRow {
                score: (step <= t.steps()).then(|| t.scores[step]),
                best_rmse: Some(t.best[k]),
                terminated: t.terminated,
                terminal_step: t.terminal_step(),
                step_ms: (step <= t.steps()).then(|| t.step_ms[step]),
                ..base
            }
        })
        .collect()
}

struct ResultSink {
    file: File,
}

impl ResultSink {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut file = File::create(dir.join(RESULTS_FILE))?;
        file.write_all(format!("{RESULTS_HEADER}\n").as_bytes())?;
        file.flush()?;
        Ok(Self { file })
    }

    /// One write per block keeps rows whole.
    fn append(&mut self, rows: &[BenchRow]) -> Result<()> {
        let block: String = rows.iter().map(|r| r.to_csv_line() + "\n").collect();
        self.file.write_all(block.as_bytes())?;
        self.file.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests;
