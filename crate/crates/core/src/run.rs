//! The run loop and seed sweeps.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::baselines::{Policy, PolicyKind};
use crate::config::{ConfigError, TaskConfig};
use crate::env::{Forager, StepOutcome};
use crate::metrics::RunMetrics;
use crate::observation::Observation;

pub const DEFAULT_WINDOW: u64 = 1000;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub seed: u64,
    pub metrics: RunMetrics,
    pub elapsed: Duration,
}

impl RunOutcome {
    pub fn steps_per_sec(&self) -> f64 {
        let secs = self.elapsed.as_secs_f64();
        if secs > 0.0 {
            self.metrics.steps as f64 / secs
        } else {
            0.0
        }
    }
}

/// Steps `env` for `steps` ticks under `policy`, calling `hook` after every
/// step with the new observation. The task never resets.
pub fn run_with<E>(
    env: &mut Forager,
    policy: &mut dyn Policy,
    steps: u64,
    window: u64,
    mut hook: impl FnMut(&Forager, &StepOutcome, &Observation) -> Result<(), E>,
) -> Result<RunOutcome, E> {
    let mut metrics = RunMetrics::new(window);
    let mut obs = Observation::default();
    let start = Instant::now();
    for _ in 0..steps {
        let action = policy.act(env);
        let out = env.step(action);
        env.observe_into(&mut obs);
        metrics.record(out.reward);
        hook(env, &out, &obs)?;
    }
    Ok(RunOutcome {
        seed: env.seed(),
        metrics,
        elapsed: start.elapsed(),
    })
}

/// One run of a named policy; the policy is seeded with the run seed.
pub fn run(
    config: Arc<TaskConfig>,
    policy: PolicyKind,
    steps: u64,
    seed: u64,
) -> Result<RunOutcome, ConfigError> {
    let mut env = Forager::from_shared(config, seed)?;
    let mut policy = policy.build(seed);
    let out = run_with(
        &mut env,
        policy.as_mut(),
        steps,
        DEFAULT_WINDOW,
        |_, _, _| Ok::<(), std::convert::Infallible>(()),
    );
    let Ok(out) = out;
    Ok(out)
}

pub fn sweep_sequential(
    config: &Arc<TaskConfig>,
    policy: PolicyKind,
    steps: u64,
    seeds: &[u64],
) -> Result<Vec<RunOutcome>, ConfigError> {
    seeds
        .iter()
        .map(|&s| run(Arc::clone(config), policy, steps, s))
        .collect()
}

/// One worker per seed; results come back in seed order.
#[cfg(feature = "parallel")]
pub fn sweep_parallel(
    config: &Arc<TaskConfig>,
    policy: PolicyKind,
    steps: u64,
    seeds: &[u64],
) -> Result<Vec<RunOutcome>, ConfigError> {
    use rayon::prelude::*;
    seeds
        .par_iter()
        .map(|&s| run(Arc::clone(config), policy, steps, s))
        .collect()
}

/// Parallel when built with the `parallel` feature, sequential otherwise.
/// Both give identical metrics.
pub fn sweep(
    config: &Arc<TaskConfig>,
    policy: PolicyKind,
    steps: u64,
    seeds: &[u64],
) -> Result<Vec<RunOutcome>, ConfigError> {
    #[cfg(feature = "parallel")]
    {
        sweep_parallel(config, policy, steps, seeds)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sweep_sequential(config, policy, steps, seeds)
    }
}
