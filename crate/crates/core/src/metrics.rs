//! Online reward statistics.

use serde::{Deserialize, Serialize};

pub const EMA_DECAY: f64 = 0.999;

/// Exponential moving average starting from 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ema {
    pub decay: f64,
    pub value: f64,
}

impl Ema {
    pub const fn new(decay: f64) -> Self {
        Self { decay, value: 0.0 }
    }

    pub fn update(&mut self, x: f64) -> f64 {
        self.value = self.decay * self.value + (1.0 - self.decay) * x;
        self.value
    }
}

impl Default for Ema {
    fn default() -> Self {
        Self::new(EMA_DECAY)
    }
}

/// Everything a run reports. Deterministic given (config, policy, seed,
/// steps); wall-clock figures live in [`crate::run::RunOutcome`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub ema: Ema,
    pub cumulative: f64,
    pub steps: u64,
    pub window: u64,
    /// Mean reward of every completed window of `window` steps.
    pub window_means: Vec<f64>,
    #[serde(skip)]
    window_sum: f64,
    #[serde(skip)]
    window_len: u64,
}

impl RunMetrics {
    pub fn new(window: u64) -> Self {
        Self {
            ema: Ema::default(),
            cumulative: 0.0,
            steps: 0,
            window: window.max(1),
            window_means: Vec::new(),
            window_sum: 0.0,
            window_len: 0,
        }
    }

    pub fn record(&mut self, reward: f64) {
        self.ema.update(reward);
        self.cumulative += reward;
        self.steps += 1;
        self.window_sum += reward;
        self.window_len += 1;
        if self.window_len == self.window {
            self.window_means.push(self.window_sum / self.window as f64);
            self.window_sum = 0.0;
            self.window_len = 0;
        }
    }

    pub fn ema_reward(&self) -> f64 {
        self.ema.value
    }

    pub fn mean_reward(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.cumulative / self.steps as f64
        }
    }
}
