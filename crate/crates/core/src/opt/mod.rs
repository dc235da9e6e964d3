//! Black-box alignment baselines: random search and Bayesian optimization
//! with Gaussian-process or random-forest surrogates.
//!
//! Optimizers work in absolute normalized poses over the active dimensions
//! and only ever see (proposal, score) pairs.

mod acquisition;
mod bo;
mod episode;
mod gp;
mod rf;
mod search;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use acquisition::{expected_improvement, normal_cdf, normal_pdf};
pub use bo::{bo_step, AcquisitionSettings};
pub use episode::{run_episode, run_episode_with, EpisodeTrajectory};
pub use gp::{gp_fit, gp_predict, matern52, median_distance, GpHyper, GpModel, MAX_JITTER};
pub use rf::{rf_fit, rf_predict, RfModel, RfParams};
pub use search::{latin_hypercube, random_propose, SearchBox};

use crate::config::BaselineSection;
use crate::{Error, Result};

/// One evaluation: the pose the optimizer asked for and the RMSE observed.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSample {
    pub proposal: Vec<f64>,
    pub score: f64,
}

pub trait Optimizer {
    fn algorithm(&self) -> Algorithm;

    /// Next target pose (active coordinates).
    fn propose(&mut self) -> Result<Vec<f64>>;

    /// Feeds back the score observed for `proposal`.
    fn observe(&mut self, proposal: &[f64], score: f64);

    fn history(&self) -> &[ObjectiveSample];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Random,
    BoGp,
    BoRf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Random, Algorithm::BoGp, Algorithm::BoRf];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Random => "random",
            Algorithm::BoGp => "bo-gp",
            Algorithm::BoRf => "bo-rf",
        }
    }

    /// Builds a fresh optimizer for one episode.
    pub fn build(
        self,
        search: SearchBox,
        baseline: &BaselineSection,
        seed: u64,
    ) -> Box<dyn Optimizer> {
        match self {
            Algorithm::Random => Box::new(RandomSearch::new(search, seed)),
            Algorithm::BoGp | Algorithm::BoRf => Box::new(BayesOpt::new(
                self,
                search,
                BoSettings::from(baseline),
                seed,
            )),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown algorithm {s:?} (expected one of random, bo-gp, bo-rf)"
                ))
            })
    }
}

/// Uniform proposals inside the search box.
#[derive(Debug, Clone)]
pub struct RandomSearch {
    search: SearchBox,
    rng: ChaCha8Rng,
    history: Vec<ObjectiveSample>,
}

impl RandomSearch {
    pub fn new(search: SearchBox, seed: u64) -> Self {
        Self {
            search,
            rng: ChaCha8Rng::seed_from_u64(seed),
            history: Vec::new(),
        }
    }
}

impl Optimizer for RandomSearch {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Random
    }

    fn propose(&mut self) -> Result<Vec<f64>> {
        Ok(random_propose(&self.search, &mut self.rng))
    }

    fn observe(&mut self, proposal: &[f64], score: f64) {
        self.history.push(ObjectiveSample {
            proposal: proposal.to_vec(),
            score,
        });
    }

    fn history(&self) -> &[ObjectiveSample] {
        &self.history
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoSettings {
    /// Observed steps covered by the initial Latin-hypercube design.
    pub n_init: usize,
    pub acquisition: AcquisitionSettings,
    pub gp: GpHyper,
    pub rf: RfParams,
}

impl Default for BoSettings {
    fn default() -> Self {
        Self::from(&BaselineSection::default())
    }
}

impl From<&BaselineSection> for BoSettings {
    fn from(b: &BaselineSection) -> Self {
        Self {
            n_init: b.n_init,
            acquisition: AcquisitionSettings {
                candidates: b.candidates,
                local_candidates: b.local_candidates,
                ..Default::default()
            },
            gp: GpHyper {
                jitter: b.jitter,
                ..Default::default()
            },
            rf: RfParams {
                n_trees: b.n_trees,
                bootstrap: true,
            },
        }
    }
}

/// Bayesian optimization with expected improvement over a GP or RF
/// surrogate. Proposals come from a Latin-hypercube design drawn at
/// construction until `n_init` scores have been observed.
#[derive(Debug, Clone)]
pub struct BayesOpt {
    algorithm: Algorithm,
    search: SearchBox,
    settings: BoSettings,
    design: Vec<Vec<f64>>,
    proposals: usize,
    rng: ChaCha8Rng,
    history: Vec<ObjectiveSample>,
}

impl BayesOpt {
    /// `algorithm` selects the surrogate and must be a BO variant.
    pub fn new(algorithm: Algorithm, search: SearchBox, settings: BoSettings, seed: u64) -> Self {
        assert!(algorithm != Algorithm::Random, "BayesOpt needs a surrogate");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let design = latin_hypercube(&search, settings.n_init, &mut rng);
        Self {
            algorithm,
            search,
            settings,
            design,
            proposals: 0,
            rng,
            history: Vec::new(),
        }
    }

    pub fn design(&self) -> &[Vec<f64>] {
        &self.design
    }
}

impl Optimizer for BayesOpt {
    fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    fn propose(&mut self) -> Result<Vec<f64>> {
        let k = self.proposals;
        self.proposals += 1;
        // the design covers the first n_init observed steps; a far design
        // point reached over several steps uses up several of them
        if k < self.design.len() && self.history.len() < self.settings.n_init {
            return Ok(self.design[k].clone());
        }
        if self.history.is_empty() {
            return Ok(random_propose(&self.search, &mut self.rng));
        }
        let settings = &self.settings;
        Ok(match self.algorithm {
            Algorithm::BoGp => {
                let model = gp_fit(&self.history, &settings.gp)?;
                bo_step(
                    |x: &[f64]| model.predict(x),
                    &self.history,
                    &self.search,
                    &settings.acquisition,
                    &mut self.rng,
                )
            }
            _ => {
                let model = rf_fit(&self.history, &settings.rf, &mut self.rng)?;
                bo_step(
                    |x: &[f64]| model.predict(x),
                    &self.history,
                    &self.search,
                    &settings.acquisition,
                    &mut self.rng,
                )
            }
        })
    }

    fn observe(&mut self, proposal: &[f64], score: f64) {
        self.history.push(ObjectiveSample {
            proposal: proposal.to_vec(),
            score,
        });
    }

    fn history(&self) -> &[ObjectiveSample] {
        &self.history
    }
}
