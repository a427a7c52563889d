//! A complete environment instance.
//!
//! Every step runs in a fixed order:
//!
//! 1. apply the action and collect whatever the agent walks onto
//! 2. compute the reward of that collection (and check for extinction)
//! 3. advance the tick
//! 4. process due respawns
//! 5. advance the reward schedule
//! 6. the observation reflects the resulting state
//!
//! so the reward is a function of the collect event at the acting tick.

use std::sync::Arc;

use crate::config::{ConfigError, TaskConfig};
use crate::observation::{
    assemble_aux, encode_into, extract_fov_into, Observation, ObservationSpec, Palette,
    RewardTrace, Window,
};
use crate::reward::{
    cue_vector_into, CueConfig, Replacement, RewardSchedule, ScheduleSpec, SpeciesLifecycle,
    SwitchNotification,
};
use crate::world::{Action, Cell, Slot, SpeciesId, StructureSize, WorldState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Collected {
    pub slot: Slot,
    pub species: SpeciesId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// Tick after the step.
    pub tick: u64,
    pub action: Action,
    pub reward: f64,
    pub collected: Option<Collected>,
    pub switch: Option<SwitchNotification>,
    pub replacement: Option<Replacement>,
    pub respawned: usize,
}

/// Sizes of every structure that can change during a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InternalSize {
    pub cells: usize,
    pub queue: usize,
    pub schedule: usize,
}

impl InternalSize {
    pub fn total(&self) -> usize {
        self.cells + self.queue + self.schedule
    }
}

/// One Forager world with its reward schedule and observation state.
///
/// Not `Sync`-shared: run one instance per thread.
#[derive(Clone, Debug)]
pub struct Forager {
    config: Arc<TaskConfig>,
    seed: u64,
    world: WorldState,
    rewards: RewardSchedule,
    lifecycle: Option<SpeciesLifecycle>,
    cue: Option<CueConfig>,
    obs_spec: ObservationSpec,
    fov: usize,
    palette: Palette,
    trace: Option<RewardTrace>,
    last_action: Option<Action>,
    last_reward: f64,
    biome_rewards: Vec<f64>,
    cue_buf: Vec<f64>,
    window: Window,
}

/// FOV actually used: at most the smallest odd window covering the world.
pub fn effective_fov(fov: u32, width: u32, height: u32) -> usize {
    let cover = width.max(height) | 1;
    fov.min(cover) as usize
}

impl Forager {
    pub fn new(config: TaskConfig, seed: u64) -> Result<Self, ConfigError> {
        Self::from_shared(Arc::new(config), seed)
    }

    pub fn from_shared(config: Arc<TaskConfig>, seed: u64) -> Result<Self, ConfigError> {
        let world = WorldState::reset(&config, seed)?;
        let ids = config.species_ids();
        let rewards = RewardSchedule::from_spec(&config.schedule, &ids);
        let lifecycle = match &config.schedule {
            ScheduleSpec::Fourier {
                extinction: Some(x),
                ..
            } => Some(SpeciesLifecycle::new(x.clone(), ids.len() as u32)),
            _ => None,
        };
        let obs_spec = config.observation;
        let fov = effective_fov(obs_spec.fov, config.world.width, config.world.height);
        let palette = Palette::new(
            world.species().iter().map(|s| s.color).collect(),
            !config.walls.is_empty(),
        );
        let biomes = config.biomes.len();
        let mut env = Self {
            cue: config.cue,
            trace: obs_spec.reward_trace.map(RewardTrace::new),
            config,
            seed,
            world,
            rewards,
            lifecycle,
            obs_spec,
            fov,
            palette,
            last_action: None,
            last_reward: 0.0,
            biome_rewards: vec![0.0; biomes],
            cue_buf: vec![0.0; biomes],
            window: Window::default(),
        };
        env.refresh_cue();
        Ok(env)
    }

    /// Rebuilds the world from the same config with a new seed.
    pub fn reset(&mut self, seed: u64) -> Result<(), ConfigError> {
        *self = Self::from_shared(Arc::clone(&self.config), seed)?;
        Ok(())
    }

    pub fn config(&self) -> &TaskConfig {
        &self.config
    }

    pub fn shared_config(&self) -> Arc<TaskConfig> {
        Arc::clone(&self.config)
    }

    /// Seed of the last reset.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn rewards(&self) -> &RewardSchedule {
        &self.rewards
    }

    pub fn tick(&self) -> u64 {
        self.world.tick()
    }

    pub fn fov(&self) -> usize {
        self.fov
    }

    pub fn palette(&self) -> &Palette {
        &self.palette
    }

    pub fn observation_spec(&self) -> &ObservationSpec {
        &self.obs_spec
    }

    pub fn observation_shape(&self) -> (usize, usize, usize) {
        (
            self.fov,
            self.fov,
            self.palette.channels(self.obs_spec.mode),
        )
    }

    pub fn aux_len(&self) -> usize {
        self.obs_spec.aux_len(self.config.biomes.len())
    }

    /// True reward currently paid by `slot`.
    pub fn species_reward(&self, slot: Slot) -> f64 {
        self.rewards.current(slot).unwrap_or(0.0)
    }

    /// True reward of collecting whatever occupies `cell` (0 for empty/walls).
    pub fn cell_reward(&self, cell: Cell) -> f64 {
        match cell {
            Cell::Object(s) => self.species_reward(s),
            _ => 0.0,
        }
    }

    /// Best current reward among each biome's species.
    pub fn biome_rewards(&self) -> &[f64] {
        &self.biome_rewards
    }

    /// Cue vector at the current tick; empty when no cue is configured.
    pub fn cue_vector(&self) -> &[f64] {
        if self.cue.is_some() {
            &self.cue_buf
        } else {
            &[]
        }
    }

    pub fn phase(&self) -> Option<usize> {
        self.rewards.phase()
    }

    pub fn internal_size(&self) -> InternalSize {
        let StructureSize { cells, queue } = self.world.structure_size();
        InternalSize {
            cells,
            queue,
            schedule: self.rewards.state_len(),
        }
    }

    pub fn step(&mut self, action: Action) -> StepOutcome {
        let moved = self.world.apply_action(action);
        let mut reward = 0.0;
        let mut collected = None;
        let mut replacement = None;
        if let Some(slot) = moved.collected {
            reward = self.species_reward(slot);
            collected = Some(Collected {
                slot,
                species: self.world.species()[slot as usize].id,
            });
            if let Some(lc) = &mut self.lifecycle {
                if let Some(r) = lc.record_consumption(&mut self.world, slot) {
                    self.rewards.replace_series(slot, r.params.clone());
                    self.palette.species_colors[slot as usize] = r.color;
                    replacement = Some(r);
                }
            }
        }
        self.world.advance_tick();
        let respawned = self.world.process_respawns().len();
        let tick = self.world.tick();
        let switch = self.rewards.advance(tick);
        self.refresh_cue();

        self.last_action = Some(action);
        self.last_reward = reward;
        if let Some(t) = &mut self.trace {
            t.update(reward);
        }
        StepOutcome {
            tick,
            action,
            reward,
            collected,
            switch,
            replacement,
            respawned,
        }
    }

    fn refresh_cue(&mut self) {
        self.biome_rewards.fill(f64::NEG_INFINITY);
        for (slot, s) in self.world.species().iter().enumerate() {
            if s.blocking {
                continue;
            }
            let r = self.rewards.current(slot as Slot).unwrap_or(0.0);
            let b = &mut self.biome_rewards[s.biome];
            *b = b.max(r);
        }
        if let Some(cue) = &self.cue {
            cue_vector_into(
                cue,
                self.world.tick(),
                &self.biome_rewards,
                &mut self.cue_buf,
            );
        }
    }

    pub fn observe(&mut self) -> Observation {
        let mut obs = Observation::default();
        self.observe_into(&mut obs);
        obs
    }

    /// Writes the current observation into `obs`, reusing its buffers.
    pub fn observe_into(&mut self, obs: &mut Observation) {
        extract_fov_into(
            self.world.grid(),
            self.world.agent(),
            self.fov,
            &mut self.window,
        );
        encode_into(
            &self.window,
            self.obs_spec.mode,
            &self.palette,
            &mut obs.grid,
        )
        .expect("palette covers every live species");
        obs.fov = self.fov;
        obs.channels = self.palette.channels(self.obs_spec.mode);
        let cue = self.cue.is_some().then_some(self.cue_buf.as_slice());
        assemble_aux(
            &self.obs_spec,
            self.last_action,
            self.last_reward,
            self.trace.as_ref(),
            cue,
            &mut obs.aux,
        );
    }
}
