//! Reward laws and their evolution over time.
//!
//! A [`RewardSchedule`] holds the current reward of every species slot and is
//! advanced once per step. The Fourier variant evaluates a piecewise-constant
//! harmonic series per species and centers the values across all live
//! species, so at least one species is always worth collecting.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{Color, Slot, SpeciesId, WorldState};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RewardError {
    #[error("unknown species slot {0}")]
    UnknownSpecies(Slot),
}

/// A harmonic series evaluated on plateaus of `repeat` ticks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierParams {
    /// Cosine coefficients for harmonics `1..=N`.
    pub cos: Vec<f64>,
    /// Sine coefficients for harmonics `1..=N`.
    pub sin: Vec<f64>,
    pub period: f64,
    pub repeat: u64,
}

impl FourierParams {
    pub fn harmonics(&self) -> usize {
        self.cos.len()
    }

    /// Coefficients of harmonic `n` are normal with standard deviation `1/n`;
    /// the period is continuous-uniform on `[period_min, period_max]`.
    pub fn sample<R: Rng + ?Sized>(
        rng: &mut R,
        harmonics: u32,
        repeat: u64,
        period_min: f64,
        period_max: f64,
    ) -> Self {
        let mut cos = Vec::with_capacity(harmonics as usize);
        let mut sin = Vec::with_capacity(harmonics as usize);
        for n in 1..=harmonics {
            let normal = Normal::new(0.0, 1.0 / n as f64).expect("positive std");
            cos.push(normal.sample(rng));
            sin.push(normal.sample(rng));
        }
        let period = if period_max > period_min {
            rng.random_range(period_min..=period_max)
        } else {
            period_min
        };
        Self {
            cos,
            sin,
            period,
            repeat,
        }
    }

    pub fn value(&self, tick: u64) -> f64 {
        fourier_value(self, tick)
    }
}

/// `Σ_n a_n cos(2πn k / T) + b_n sin(2πn k / T)` with `k = ⌊tick / repeat⌋`.
pub fn fourier_value(params: &FourierParams, tick: u64) -> f64 {
    let k = (tick / params.repeat.max(1)) as f64;
    params
        .cos
        .iter()
        .zip(&params.sin)
        .enumerate()
        .map(|(i, (a, b))| {
            let angle = TAU * (i + 1) as f64 * k / params.period;
            a * angle.cos() + b * angle.sin()
        })
        .sum()
}

/// Subtracts the mean. The mean is clamped into `[min, max]` of the input so
/// rounding can never push every output below zero.
pub fn center_rewards(raw: &[f64]) -> Vec<f64> {
    let mut out = raw.to_vec();
    center_in_place(&mut out);
    out
}

pub fn center_in_place(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let mean = (values.iter().sum::<f64>() / values.len() as f64).clamp(lo, hi);
    for v in values.iter_mut() {
        *v -= mean;
    }
}

/// Serialized form of a schedule. Species are referenced by id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Static {
        rewards: BTreeMap<String, f64>,
    },
    /// Every value is multiplied by `decay` once per step. Species whose
    /// initial value is at or above `floor` never drop below it.
    Decaying {
        initial: BTreeMap<String, f64>,
        decay: f64,
        #[serde(default)]
        floor: f64,
    },
    /// Phase `⌊tick / period⌋ mod phases.len()` is active.
    Switching {
        period: u64,
        phases: Vec<BTreeMap<String, f64>>,
    },
    Fourier {
        series: BTreeMap<String, FourierParams>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        extinction: Option<ExtinctionSpec>,
    },
}

/// Extinction threshold and the sampler for replacement species.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtinctionSpec {
    pub threshold: u64,
    pub harmonics: u32,
    pub repeat: u64,
    pub period_min: f64,
    pub period_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchNotification {
    pub tick: u64,
    pub from: usize,
    pub to: usize,
}

/// Runtime reward state, indexed by species slot.
#[derive(Clone, Debug, PartialEq)]
pub enum RewardSchedule {
    Static {
        values: Vec<f64>,
    },
    Decaying {
        values: Vec<f64>,
        floors: Vec<Option<f64>>,
        decay: f64,
    },
    Switching {
        period: u64,
        phases: Vec<Vec<f64>>,
        phase: usize,
    },
    Fourier {
        /// `None` for slots outside the centering pool (blocking species).
        series: Vec<Option<FourierParams>>,
        values: Vec<f64>,
        /// Plateau index the values were computed for; `None` forces a refresh.
        plateau: Option<u64>,
    },
}

impl RewardSchedule {
    /// Resolves species ids to slots. Species missing from a table get 0.
    pub fn from_spec(spec: &ScheduleSpec, species_ids: &[&str]) -> Self {
        let table = |m: &BTreeMap<String, f64>| -> Vec<f64> {
            species_ids
                .iter()
                .map(|id| m.get(*id).copied().unwrap_or(0.0))
                .collect()
        };
        match spec {
            ScheduleSpec::Static { rewards } => RewardSchedule::Static {
                values: table(rewards),
            },
            ScheduleSpec::Decaying {
                initial,
                decay,
                floor,
            } => {
                let values = table(initial);
                let floors = values
                    .iter()
                    .map(|&v| (v >= *floor).then_some(*floor))
                    .collect();
                RewardSchedule::Decaying {
                    values,
                    floors,
                    decay: *decay,
                }
            }
            ScheduleSpec::Switching { period, phases } => RewardSchedule::Switching {
                period: *period,
                phases: phases.iter().map(table).collect(),
                phase: 0,
            },
            ScheduleSpec::Fourier { series, .. } => {
                let series: Vec<Option<FourierParams>> = species_ids
                    .iter()
                    .map(|id| series.get(*id).cloned())
                    .collect();
                let mut s = RewardSchedule::Fourier {
                    values: vec![0.0; series.len()],
                    series,
                    plateau: None,
                };
                s.refresh(0);
                s
            }
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            RewardSchedule::Static { values }
            | RewardSchedule::Decaying { values, .. }
            | RewardSchedule::Fourier { values, .. } => values,
            RewardSchedule::Switching { phases, phase, .. } => &phases[*phase],
        }
    }

    pub fn current(&self, slot: Slot) -> Option<f64> {
        self.values().get(slot as usize).copied()
    }

    /// Reward paid for collecting an object of `slot` right now.
    pub fn reward_on_collect(&self, slot: Slot) -> Result<f64, RewardError> {
        self.current(slot).ok_or(RewardError::UnknownSpecies(slot))
    }

    pub fn phase(&self) -> Option<usize> {
        match self {
            RewardSchedule::Switching { phase, .. } => Some(*phase),
            _ => None,
        }
    }

    /// Moves the schedule to `tick`. Called once per step with the new tick.
    pub fn advance(&mut self, tick: u64) -> Option<SwitchNotification> {
        match self {
            RewardSchedule::Static { .. } => None,
            RewardSchedule::Decaying {
                values,
                floors,
                decay,
            } => {
                for (v, floor) in values.iter_mut().zip(floors.iter()) {
                    *v *= *decay;
                    if let Some(f) = floor {
                        *v = v.max(*f);
                    }
                }
                None
            }
            RewardSchedule::Switching {
                period,
                phases,
                phase,
            } => {
                let next = ((tick / *period) % phases.len() as u64) as usize;
                let from = std::mem::replace(phase, next);
                (from != next).then_some(SwitchNotification {
                    tick,
                    from,
                    to: next,
                })
            }
            RewardSchedule::Fourier { .. } => {
                self.refresh(tick);
                None
            }
        }
    }

    fn refresh(&mut self, tick: u64) {
        let RewardSchedule::Fourier {
            series,
            values,
            plateau,
        } = self
        else {
            return;
        };
        // All series in one schedule share the plateau width in practice; key
        // the cache on the tick itself when they do not.
        let width = series
            .iter()
            .flatten()
            .map(|p| p.repeat)
            .min()
            .unwrap_or(1)
            .max(1);
        let uniform = series.iter().flatten().all(|p| p.repeat == width);
        let key = if uniform { tick / width } else { tick };
        if *plateau == Some(key) {
            return;
        }
        *plateau = Some(key);
        let mut pool = Vec::with_capacity(values.len());
        for (v, p) in values.iter_mut().zip(series.iter()) {
            *v = p.as_ref().map_or(0.0, |p| fourier_value(p, tick));
            if p.is_some() {
                pool.push(*v);
            }
        }
        center_in_place(&mut pool);
        let mut centered = pool.into_iter();
        for (v, p) in values.iter_mut().zip(series.iter()) {
            if p.is_some() {
                *v = centered.next().expect("pool sized by live series");
            }
        }
    }

    /// Installs a new series for `slot`; values refresh on the next advance.
    pub fn replace_series(&mut self, slot: Slot, params: FourierParams) {
        if let RewardSchedule::Fourier {
            series, plateau, ..
        } = self
        {
            series[slot as usize] = Some(params);
            *plateau = None;
        }
    }

    /// Number of scalars held as schedule state.
    pub fn state_len(&self) -> usize {
        match self {
            RewardSchedule::Static { values } => values.len(),
            RewardSchedule::Decaying { values, floors, .. } => values.len() + floors.len() + 1,
            RewardSchedule::Switching { phases, .. } => {
                phases.iter().map(Vec::len).sum::<usize>() + 2
            }
            RewardSchedule::Fourier { series, values, .. } => {
                values.len()
                    + series
                        .iter()
                        .flatten()
                        .map(|p| 2 * p.harmonics() + 2)
                        .sum::<usize>()
                    + 1
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueMode {
    Windowed,
    Always,
}

/// Global cue marking the best biome for `duration` ticks out of every
/// `period` (or always).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CueConfig {
    pub period: u64,
    pub duration: u64,
    pub mode: CueMode,
}

impl CueConfig {
    pub const fn windowed() -> Self {
        Self {
            period: 100,
            duration: 10,
            mode: CueMode::Windowed,
        }
    }

    pub fn active(&self, tick: u64) -> bool {
        match self.mode {
            CueMode::Always => true,
            CueMode::Windowed => tick % self.period.max(1) < self.duration,
        }
    }
}

/// One-hot at the best biome while the cue is active, zeros otherwise. Ties
/// go to the lowest biome index.
pub fn cue_vector(cue: &CueConfig, tick: u64, biome_rewards: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; biome_rewards.len()];
    cue_vector_into(cue, tick, biome_rewards, &mut out);
    out
}

pub fn cue_vector_into(cue: &CueConfig, tick: u64, biome_rewards: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    if !cue.active(tick) {
        return;
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, &r) in biome_rewards.iter().enumerate() {
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((i, r));
        }
    }
    if let Some((i, _)) = best {
        out[i] = 1.0;
    }
}

/// Colors replacement species may take: no black (walls), no pure blue
/// (agent), no white (background).
pub const SPECIES_PALETTE: [Color; 24] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [255, 250, 200],
    [128, 0, 0],
    [170, 255, 195],
    [128, 128, 0],
    [255, 215, 180],
    [128, 128, 128],
    [255, 99, 71],
    [46, 139, 87],
    [218, 165, 32],
    [199, 21, 133],
    [106, 90, 205],
    [0, 206, 209],
];

/// Uniform draw from the palette minus colors currently in use.
pub fn sample_color<R: Rng + ?Sized>(rng: &mut R, live: &[Color]) -> Color {
    let available: Vec<Color> = SPECIES_PALETTE
        .iter()
        .copied()
        .filter(|c| !live.contains(c))
        .collect();
    if available.is_empty() {
        // More live species than palette entries: fall back to a fresh RGB.
        loop {
            let c: Color = [rng.random(), rng.random(), rng.random()];
            if !live.contains(&c) && c != [0, 0, 0] && c != [0, 0, 255] && c != [255, 255, 255] {
                return c;
            }
        }
    }
    available[rng.random_range(0..available.len())]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Replacement {
    pub slot: Slot,
    pub old_species: SpeciesId,
    pub new_species: SpeciesId,
    pub color: Color,
    pub params: FourierParams,
}

/// Extinction bookkeeping: a species that has been collected `threshold`
/// times is replaced in its slot by a freshly sampled one.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeciesLifecycle {
    pub spec: ExtinctionSpec,
    next_id: u32,
}

impl SpeciesLifecycle {
    /// `first_free_id` must exceed every species id already in use.
    pub fn new(spec: ExtinctionSpec, first_free_id: u32) -> Self {
        Self {
            spec,
            next_id: first_free_id,
        }
    }

    /// Checks the consumption counter of `slot` (already incremented by the
    /// collect) and performs the replacement when it reaches the threshold.
    /// The world's slot is relabeled and its counter reset; the caller must
    /// install `params` in the reward schedule.
    pub fn record_consumption(
        &mut self,
        world: &mut WorldState,
        slot: Slot,
    ) -> Option<Replacement> {
        if world.consumption(slot) < self.spec.threshold {
            return None;
        }
        let old = &world.species()[slot as usize];
        let old_species = old.id;
        let region = old.biome;
        let live: Vec<Color> = world.species().iter().map(|s| s.color).collect();
        let rng = &mut world.rng_mut().schedule;
        let color = sample_color(rng, &live);
        let params = FourierParams::sample(
            rng,
            self.spec.harmonics,
            self.spec.repeat,
            self.spec.period_min,
            self.spec.period_max,
        );
        let new_species = SpeciesId(self.next_id);
        self.next_id += 1;
        world.replace_species(
            slot,
            new_species,
            format!("biome{region}-species{}", new_species.0),
            color,
        );
        Some(Replacement {
            slot,
            old_species,
            new_species,
            color,
            params,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use crate::world::{Dims, Position, Region, RespawnRule, Species};
    use proptest::prelude::*;

    fn single(a: f64, b: f64, period: f64, repeat: u64) -> FourierParams {
        FourierParams {
            cos: vec![a],
            sin: vec![b],
            period,
            repeat,
        }
    }

    #[test]
    fn fourier_at_zero_is_sum_of_cosine_coefficients() {
        let p = FourierParams {
            cos: vec![0.5, -1.25, 2.0],
            sin: vec![3.0, 4.0, 5.0],
            period: 17.3,
            repeat: 1000,
        };
        assert!((fourier_value(&p, 0) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn fourier_quarter_period() {
        // cos(2π·1·1/4) = cos(π/2) = 0.
        let p = single(1.0, 0.0, 4.0, 1);
        assert!(fourier_value(&p, 1).abs() < 1e-12);
        // sin(π/2) = 1.
        let p = single(0.0, 1.0, 4.0, 1);
        assert!((fourier_value(&p, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fourier_plateau_values() {
        let mut rng = stream_rng(1, Stream::Preset);
        let p = FourierParams::sample(&mut rng, 10, 1000, 1.0, 1000.0);
        let v0 = fourier_value(&p, 0);
        assert_eq!(fourier_value(&p, 999), v0);
        // Value at k=1 evaluated directly from the formula.
        let direct: f64 = (1..=10)
            .map(|n| {
                let ang = 2.0 * std::f64::consts::PI * n as f64 * 1.0 / p.period;
                p.cos[n - 1] * ang.cos() + p.sin[n - 1] * ang.sin()
            })
            .sum();
        assert!((fourier_value(&p, 1000) - direct).abs() < 1e-12);
        assert_eq!(
            fourier_value(&p, 1000) != fourier_value(&p, 999),
            direct != v0
        );
    }

    #[test]
    fn centering_examples() {
        let c = center_rewards(&[4.0, -2.0, -8.0, -14.0]);
        assert_eq!(c, vec![9.0, 3.0, -3.0, -9.0]);
        assert_eq!(center_rewards(&[2.5, 2.5, 2.5]), vec![0.0; 3]);
        assert_eq!(center_rewards(&[7.0]), vec![0.0]);
        // Rounding case: naive mean of three 0.1s exceeds 0.1.
        let c = center_rewards(&[0.1, 0.1, 0.1]);
        assert!(c.iter().all(|&v| v >= 0.0));
    }

    proptest! {
        #[test]
        fn centered_sums_to_zero_and_max_nonnegative(raw in prop::collection::vec(-1e3f64..1e3, 1..16)) {
            let c = center_rewards(&raw);
            let scale = raw.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            prop_assert!(c.iter().sum::<f64>().abs() <= 1e-9 * scale);
            prop_assert!(c.iter().cloned().fold(f64::NEG_INFINITY, f64::max) >= 0.0);
        }

        #[test]
        fn fourier_constant_on_plateaus(seed in 0u64..1000, k in 0u64..50, off in 0u64..1000) {
            let mut rng = stream_rng(seed, Stream::Preset);
            let p = FourierParams::sample(&mut rng, 10, 1000, 1.0, 1000.0);
            prop_assert_eq!(fourier_value(&p, k * 1000), fourier_value(&p, k * 1000 + off));
        }
    }

    fn switching() -> RewardSchedule {
        let phase = |a: f64, b: f64| BTreeMap::from([("a".to_string(), a), ("b".to_string(), b)]);
        RewardSchedule::from_spec(
            &ScheduleSpec::Switching {
                period: 1000,
                phases: vec![phase(4.0, -2.0), phase(-14.0, -8.0)],
            },
            &["a", "b"],
        )
    }

    #[test]
    fn switching_flips_at_period() {
        let mut s = switching();
        assert_eq!(s.reward_on_collect(0), Ok(4.0));
        assert_eq!(s.advance(999), None);
        assert_eq!(
            s.advance(1000),
            Some(SwitchNotification {
                tick: 1000,
                from: 0,
                to: 1
            })
        );
        assert_eq!(s.reward_on_collect(0), Ok(-14.0));
        assert_eq!(s.advance(2000).map(|n| n.to), Some(0));
        assert_eq!(s.reward_on_collect(5), Err(RewardError::UnknownSpecies(5)));
    }

    #[test]
    fn switching_phase_is_pure_function_of_tick() {
        let mut a = switching();
        let mut phases = Vec::new();
        for t in 1..5000 {
            a.advance(t);
            phases.push(a.phase().unwrap());
        }
        for (i, t) in (1..5000u64).enumerate() {
            let mut b = switching();
            b.advance(t);
            assert_eq!(b.phase().unwrap(), phases[i]);
        }
    }

    #[test]
    fn static_never_notifies() {
        let mut s = RewardSchedule::from_spec(
            &ScheduleSpec::Static {
                rewards: BTreeMap::from([("x".to_string(), 1.0)]),
            },
            &["x"],
        );
        for t in 0..10_000 {
            assert_eq!(s.advance(t), None);
        }
        assert_eq!(s.values(), &[1.0]);
    }

    #[test]
    fn decaying_multiplies_each_step_with_floor() {
        let mut s = RewardSchedule::from_spec(
            &ScheduleSpec::Decaying {
                initial: BTreeMap::from([("good".to_string(), 10.0), ("bad".to_string(), -4.0)]),
                decay: 0.5,
                floor: 1.0,
            },
            &["good", "bad"],
        );
        s.advance(1);
        assert_eq!(s.values(), &[5.0, -2.0]);
        for t in 2..10 {
            s.advance(t);
        }
        assert_eq!(s.values()[0], 1.0);
        assert!(s.values()[1] < 0.0 && s.values()[1] > -0.01);
    }

    #[test]
    fn fourier_schedule_centers_every_plateau() {
        let mut rng = stream_rng(3, Stream::Preset);
        let series: BTreeMap<String, FourierParams> = ["a", "b", "c", "d"]
            .iter()
            .map(|id| {
                (
                    id.to_string(),
                    FourierParams::sample(&mut rng, 10, 1000, 1.0, 1000.0),
                )
            })
            .collect();
        let mut s = RewardSchedule::from_spec(
            &ScheduleSpec::Fourier {
                series,
                extinction: None,
            },
            &["a", "b", "c", "d"],
        );
        for t in (0..20_000).step_by(250) {
            s.advance(t);
            let sum: f64 = s.values().iter().sum();
            assert!(sum.abs() < 1e-9);
            assert!(s.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max) >= 0.0);
        }
    }

    #[test]
    fn cue_examples() {
        let cue = CueConfig::windowed();
        let rewards = center_rewards(&[4.0, -2.0, -8.0, -14.0]);
        assert_eq!(cue_vector(&cue, 5, &rewards), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(cue_vector(&cue, 50, &rewards), vec![0.0; 4]);
        let always = CueConfig {
            mode: CueMode::Always,
            ..cue
        };
        assert_eq!(
            cue_vector(&always, 50, &[-1.0, 2.0, 0.5, 2.0]),
            vec![0.0, 1.0, 0.0, 0.0]
        );
        for t in 0..300 {
            assert_eq!(cue.active(t), t % 100 < 10);
        }
    }

    proptest! {
        #[test]
        fn cue_is_zero_or_one_hot(t in 0u64..10_000, r in prop::collection::vec(-5f64..5.0, 1..8)) {
            let v = cue_vector(&CueConfig::windowed(), t, &r);
            let ones = v.iter().filter(|&&x| x == 1.0).count();
            prop_assert!(v.iter().all(|&x| x == 0.0 || x == 1.0));
            prop_assert!(ones <= 1);
            prop_assert_eq!(ones == 1, t % 100 < 10);
        }
    }

    fn lifecycle_world() -> WorldState {
        let sp = |i: u32, color: Color| Species {
            id: SpeciesId(i),
            name: format!("s{i}"),
            color,
            blocking: false,
            biome: i as usize,
            respawn: RespawnRule::NEVER,
        };
        WorldState::new(
            Dims::new(4, 1),
            vec![sp(0, SPECIES_PALETTE[0]), sp(1, SPECIES_PALETTE[1])],
            vec![Region::new(0, 0, 2, 1), Region::new(2, 0, 4, 1)],
            Position::new(0, 0),
            9,
        )
    }

    fn extinction() -> ExtinctionSpec {
        ExtinctionSpec {
            threshold: 10_000,
            harmonics: 10,
            repeat: 1000,
            period_min: 1.0,
            period_max: 1000.0,
        }
    }

    #[test]
    fn replacement_at_threshold() {
        let mut w = lifecycle_world();
        let mut lc = SpeciesLifecycle::new(extinction(), 2);
        w.set_consumption(0, 6);
        assert_eq!(lc.record_consumption(&mut w, 0), None);
        assert_eq!(w.consumption(0), 6);

        w.set_consumption(0, 9_999);
        assert_eq!(lc.record_consumption(&mut w, 0), None);
        w.set_consumption(0, 10_000);
        let r = lc
            .record_consumption(&mut w, 0)
            .expect("replacement at 10,000");
        assert_eq!(r.old_species, SpeciesId(0));
        assert_eq!(r.new_species, SpeciesId(2));
        assert_eq!(r.params.harmonics(), 10);
        assert_eq!(r.params.repeat, 1000);
        assert!((1.0..=1000.0).contains(&r.params.period));
        assert_ne!(r.color, SPECIES_PALETTE[0]);
        assert_ne!(r.color, SPECIES_PALETTE[1]);
        assert_eq!(w.consumption(0), 0);
        assert_eq!(w.species()[0].id, SpeciesId(2));
        assert_eq!(w.species()[0].color, r.color);

        w.set_consumption(0, 10_000);
        let r2 = lc.record_consumption(&mut w, 0).unwrap();
        assert_ne!(r2.new_species, r.new_species);
    }

    #[test]
    fn sampled_colors_avoid_live_and_reserved() {
        let mut rng = stream_rng(0, Stream::Schedule);
        let live = SPECIES_PALETTE[..23].to_vec();
        for _ in 0..20 {
            assert_eq!(sample_color(&mut rng, &live), SPECIES_PALETTE[23]);
        }
        for c in SPECIES_PALETTE {
            assert!(c != [0, 0, 0] && c != [0, 0, 255] && c != [255, 255, 255]);
        }
    }
}
