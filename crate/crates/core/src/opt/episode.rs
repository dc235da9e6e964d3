use std::time::Instant;

use super::Optimizer;
use crate::env::{AlignEnv, EnvState, VarianceBundle};
use crate::{Error, Result};

/// Per-step record of one optimizer episode. Index 0 is the reset
/// observation; index k the k-th environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrajectory {
    pub variances: VarianceBundle,
    /// Observed RMSE per step.
    pub scores: Vec<f64>,
    /// Running minimum of `scores`.
    pub best: Vec<f64>,
    /// Pose the runner believes it commanded, active coordinates.
    pub believed: Vec<Vec<f64>>,
    /// Wall-clock milliseconds spent on each step, optimizer included.
    pub step_ms: Vec<f64>,
    pub terminated: bool,
    pub truncated: bool,
}

impl EpisodeTrajectory {
    pub fn steps(&self) -> usize {
        self.scores.len() - 1
    }

    /// Step at which the episode terminated or was truncated.
    pub fn terminal_step(&self) -> Option<usize> {
        (self.terminated || self.truncated).then(|| self.steps())
    }

    pub fn final_best(&self) -> f64 {
        *self.best.last().expect("trajectory has the reset entry")
    }
}

/// Runs `optimizer` on a fresh episode of `env` seeded by `seed` for at
/// most `budget` environment steps.
///
/// Each proposal is approached by relative moves clamped to the action
/// bound, so reaching it may take several steps. The runner tracks the pose
/// it believes it commanded (the start pose plus all submitted actions);
/// the true pose differs under movement distortion, which the optimizer
/// never sees. Every step's score is fed back with the believed pose.
pub fn run_episode(
    optimizer: &mut dyn Optimizer,
    env: &mut AlignEnv,
    seed: u64,
    budget: usize,
) -> Result<EpisodeTrajectory> {
    let t0 = Instant::now();
    let (state, _) = env.reset(seed)?;
    drive(optimizer, env, state, budget, t0)
}

/// [`run_episode`] with explicitly given variances.
pub fn run_episode_with(
    optimizer: &mut dyn Optimizer,
    env: &mut AlignEnv,
    variances: VarianceBundle,
    seed: u64,
    budget: usize,
) -> Result<EpisodeTrajectory> {
    let t0 = Instant::now();
    let (state, _) = env.reset_with(variances, seed)?;
    drive(optimizer, env, state, budget, t0)
}

fn drive(
    optimizer: &mut dyn Optimizer,
    env: &mut AlignEnv,
    state: EnvState,
    budget: usize,
    t0: Instant,
) -> Result<EpisodeTrajectory> {
    let max_steps = env.config().max_steps;
    if budget > max_steps {
        return Err(Error::invalid(format!(
            "budget {budget} exceeds the episode limit {max_steps}"
        )));
    }
    let active = env.config().active;
    let bound = env.config().action_bound;

    let mut believed = active.project(state.pose.coords());
    optimizer.observe(&believed, state.last_score);
    let mut traj = EpisodeTrajectory {
        variances: state.variances,
        scores: vec![state.last_score],
        best: vec![state.last_score],
        believed: vec![believed.clone()],
        step_ms: vec![t0.elapsed().as_secs_f64() * 1e3],
        terminated: false,
        truncated: false,
    };

    let mut target: Option<Vec<f64>> = None;
    while traj.steps() < budget {
        let t = Instant::now();
        let goal = match target.take() {
            Some(g) => g,
            None => optimizer.propose()?,
        };
        let mut reached = true;
        let action: Vec<f64> = goal
            .iter()
            .zip(&believed)
            .map(|(g, b)| {
                let d = g - b;
                if d.abs() > bound {
                    reached = false;
                    d.clamp(-bound, bound)
                } else {
                    d
                }
            })
            .collect();
        let outcome = env.step(&active.embed(&action, 0.0))?;
        if reached {
            believed.clone_from(&goal);
        } else {
            for (b, a) in believed.iter_mut().zip(&action) {
                *b = (*b + a).clamp(0.0, 1.0);
            }
            target = Some(goal);
        }
        optimizer.observe(&believed, outcome.score);
        let best = traj.final_best().min(outcome.score);
        traj.scores.push(outcome.score);
        traj.best.push(best);
        traj.believed.push(believed.clone());
        traj.step_ms.push(t.elapsed().as_secs_f64() * 1e3);
        if outcome.terminated || outcome.truncated {
            traj.terminated = outcome.terminated;
            traj.truncated = outcome.truncated;
            break;
        }
    }
    Ok(traj)
}
