//! A fast, configurable continual-learning gridworld.
//!
//! An agent walks a toroidal grid collecting objects whose rewards may change
//! over time. [`Forager`] owns one world; [`TaskConfig`] describes it and
//! [`presets`] builds the standard tasks.
//!
//! ```
//! use forager::{Action, Forager, Preset};
//!
//! let config = Preset::TwoBiomeMorel.build(0, None).unwrap();
//! let mut env = Forager::new(config, 0).unwrap();
//! let out = env.step(Action::Up);
//! let obs = env.observe();
//! assert_eq!(obs.shape(), (7, 7, 3));
//! assert_eq!(out.tick, 1);
//! ```

pub mod baselines;
pub mod bench;
pub mod config;
pub mod env;
pub mod error;
pub mod metrics;
pub mod observation;
pub mod presets;
pub mod render;
pub mod reward;
pub mod rng;
pub mod run;
pub mod trajectory;
pub mod world;

pub use baselines::{OracleSearch, Policy, PolicyKind, RandomPolicy, SearchNearest};
pub use config::{parse_config, serialize_config, ConfigError, TaskConfig};
pub use env::{Forager, StepOutcome};
pub use error::Error;
pub use observation::{Observation, ObservationMode, ObservationSpec};
pub use presets::Preset;
pub use world::{Action, Cell, Position};
