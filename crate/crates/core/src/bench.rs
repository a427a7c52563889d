//! Throughput and memory benchmark.
//!
//! Steps a world under the constant-Up policy, producing an observation every
//! step, and samples the size of every mutable structure every `sample_every`
//! steps. Memory is reported as these deterministic structure sizes; the
//! process resident set size is added when the OS exposes it.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::env::{Forager, InternalSize};
use crate::observation::Observation;
use crate::world::Action;

/// Reference point for the text report, measured on a desktop machine.
pub const REFERENCE_FPS: f64 = 159_879.0;
pub const REFERENCE_MEMORY_GB: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeSample {
    pub step: u64,
    pub size: InternalSize,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub task: String,
    pub steps: u64,
    pub elapsed: Duration,
    pub initial_objects: usize,
    pub samples: Vec<SizeSample>,
    pub structure_bytes: usize,
    pub rss_bytes: Option<u64>,
}

impl BenchReport {
    pub fn steps_per_sec(&self) -> f64 {
        let secs = self.elapsed.as_secs_f64();
        if self.steps == 0 || secs <= 0.0 {
            0.0
        } else {
            self.steps as f64 / secs
        }
    }

    /// Largest minus smallest sampled total size over samples taken at or
    /// after `after` steps.
    pub fn size_spread(&self, after: u64) -> usize {
        let totals = self
            .samples
            .iter()
            .filter(|s| s.step >= after)
            .map(|s| s.size.total());
        match (totals.clone().min(), totals.max()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0,
        }
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let mem = match self.rss_bytes {
            Some(b) => format!("{:.3}", b as f64 / 1e9),
            None => "n/a".into(),
        };
        let _ = writeln!(
            s,
            "{:<26} {:>14} {:>12} {:>16}",
            "Environment", "Speed (FPS)", "Memory (GB)", "State size"
        );
        let _ = writeln!(
            s,
            "{:<26} {:>14.0} {:>12} {:>16}",
            self.task,
            self.steps_per_sec(),
            mem,
            self.samples.last().map_or(0, |x| x.size.total())
        );
        let _ = writeln!(
            s,
            "{:<26} {:>14.0} {:>12.1} {:>16}",
            "reference", REFERENCE_FPS, REFERENCE_MEMORY_GB, "-"
        );
        let _ = writeln!(
            s,
            "steps {}  wall {:.3}s  structures {} bytes  size spread after 1000 steps {} (initial objects {})",
            self.steps,
            self.elapsed.as_secs_f64(),
            self.structure_bytes,
            self.size_spread(1000),
            self.initial_objects
        );
        s
    }
}

/// Resident set size of this process, from `/proc/self/statm`.
pub fn resident_bytes() -> Option<u64> {
    let statm = std::fs::read_to_string("/proc/self/statm").ok()?;
    let pages: u64 = statm.split_whitespace().nth(1)?.parse().ok()?;
    Some(pages * 4096)
}

pub fn bench(
    env: &mut Forager,
    task: &str,
    steps: u64,
    sample_every: u64,
    measure_rss: bool,
) -> BenchReport {
    let sample_every = sample_every.max(1);
    let initial_objects = env.world().grid().object_count();
    let mut samples = vec![SizeSample {
        step: 0,
        size: env.internal_size(),
    }];
    let mut obs = Observation::default();
    let start = Instant::now();
    for i in 1..=steps {
        env.step(Action::Up);
        env.observe_into(&mut obs);
        if i % sample_every == 0 {
            samples.push(SizeSample {
                step: i,
                size: env.internal_size(),
            });
        }
    }
    let elapsed = start.elapsed();
    BenchReport {
        task: task.to_string(),
        steps,
        elapsed,
        initial_objects,
        samples,
        structure_bytes: env.world().structure_bytes(),
        rss_bytes: if measure_rss { resident_bytes() } else { None },
    }
}
