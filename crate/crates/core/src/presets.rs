//! The built-in task presets.
//!
//! Constants that come from the published task descriptions live in
//! [`constants`]; geometry that was never published (world sizes, wall
//! layouts, object counts, respawn delays of the two-biome tasks) is chosen
//! here and can be overridden by editing the returned config.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::config::{
    AgentSpec, BiomeSpec, ConfigError, SpawnEntry, SpawnRule, SpeciesSpec, TaskConfig, WorldSpec,
    CONFIG_VERSION,
};
use crate::observation::{ObservationMode, ObservationSpec};
use crate::reward::{
    sample_color, CueConfig, CueMode, ExtinctionSpec, FourierParams, ScheduleSpec,
};
use crate::rng::{stream_rng, SimRng, Stream};
use crate::world::{Dims, PlacementRule, Position, Region, RespawnDelay, RespawnRule};

pub mod constants {
    pub const MOREL_REWARD: f64 = 30.0;
    pub const OYSTER_REWARD: f64 = 1.0;
    pub const DEATHCAP_REWARD: f64 = -1.0;

    /// (top purple, top yellow, bottom purple, bottom yellow) before the first switch.
    pub const SWITCH_PHASE_0: [f64; 4] = [4.0, -2.0, -8.0, -14.0];
    /// Same order after the switch.
    pub const SWITCH_PHASE_1: [f64; 4] = [-14.0, -8.0, -2.0, 4.0];
    pub const SWITCH_FOV: u32 = 9;
    /// Not published; 100 phases over a 5M-step run.
    pub const SWITCH_PERIOD: u64 = 50_000;

    pub const EXTRA_LARGE_SIZE: u32 = 1000;
    pub const EXTRA_LARGE_FOV: u32 = 11;
    pub const EXTRA_LARGE_DENSITY: f64 = 0.1;
    pub const JELLYBEAN_REWARD: f64 = 1.0;
    pub const ONION_REWARD: f64 = -1.0;

    pub const CUE_PERIOD: u64 = 100;
    pub const CUE_DURATION: u64 = 10;
    pub const EXTINCTION_THRESHOLD: u64 = 10_000;
    pub const UNENDING_RESPAWN: (u64, u64) = (9, 11);
    pub const FOURIER_HARMONICS: u32 = 10;
    pub const FOURIER_REPEAT: u64 = 1000;
    pub const FOURIER_PERIOD: (f64, f64) = (1.0, 1000.0);

    pub const MOREL_COLOR: [u8; 3] = [101, 67, 33];
    pub const OYSTER_COLOR: [u8; 3] = [255, 105, 180];
    pub const DEATHCAP_COLOR: [u8; 3] = [230, 200, 0];
    pub const PURPLE: [u8; 3] = [128, 0, 128];
    pub const YELLOW: [u8; 3] = [230, 200, 0];
    pub const JELLYBEAN_COLOR: [u8; 3] = [60, 180, 75];
    pub const ONION_COLOR: [u8; 3] = [145, 30, 180];
}

use constants::*;

/// Named presets, as accepted by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    ExtraLarge,
    TwoBiomeMorel,
    TwoBiomeSwitch,
    Unending,
    UnendingCueAlways,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::ExtraLarge,
        Preset::TwoBiomeMorel,
        Preset::TwoBiomeSwitch,
        Preset::Unending,
        Preset::UnendingCueAlways,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Preset::ExtraLarge => "forager-extra-large",
            Preset::TwoBiomeMorel => "forager-two-biome-morel",
            Preset::TwoBiomeSwitch => "forager-two-biome-switch",
            Preset::Unending => "forager-unending",
            Preset::UnendingCueAlways => "forager-unending-cue-always",
        }
    }

    pub const fn description(self) -> &'static str {
        match self {
            Preset::ExtraLarge => {
                "1000x1000 torus, jellybeans (+1) and onions (-1) at density 0.1, fov 11"
            }
            Preset::TwoBiomeMorel => {
                "morels (+30, slow respawn) vs oysters (+1) / deathcaps (-1), two biomes"
            }
            Preset::TwoBiomeSwitch => {
                "two stacked biomes, purple/yellow rewards switch on a hidden schedule"
            }
            Preset::Unending => "four biomes with Fourier rewards, extinction and a windowed cue",
            Preset::UnendingCueAlways => "the unending task with the cue shown on every step",
        }
    }

    /// Builds the preset. `seed` only matters for the unending tasks, whose
    /// species and walls are sampled; `fov` only for the morel task.
    pub fn build(self, seed: u64, fov: Option<u32>) -> Result<TaskConfig, ConfigError> {
        let mut config = match self {
            Preset::ExtraLarge => build_extra_large(),
            Preset::TwoBiomeMorel => build_two_biome_morel(fov.unwrap_or(DEFAULT_MOREL_FOV))?,
            Preset::TwoBiomeSwitch => build_two_biome_switch(),
            Preset::Unending => build_unending_four(seed, CueMode::Windowed),
            Preset::UnendingCueAlways => build_unending_four(seed, CueMode::Always),
        };
        config.seed = seed;
        Ok(config)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.strip_prefix("forager-").unwrap_or(s);
        Preset::ALL
            .into_iter()
            .find(|p| p.name().strip_prefix("forager-") == Some(key))
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}

pub const DEFAULT_MOREL_FOV: u32 = 7;

fn species(id: &str, color: [u8; 3], delay: RespawnDelay, placement: PlacementRule) -> SpeciesSpec {
    SpeciesSpec {
        id: id.into(),
        color,
        blocking: false,
        respawn: RespawnRule { delay, placement },
    }
}

fn entry(species: &str, rule: SpawnRule) -> SpawnEntry {
    SpawnEntry {
        species: species.into(),
        rule,
    }
}

fn table(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn build_extra_large() -> TaskConfig {
    let size = EXTRA_LARGE_SIZE;
    let respawn = RespawnDelay::Fixed { steps: 1 };
    TaskConfig {
        forager_config_version: CONFIG_VERSION,
        world: WorldSpec {
            width: size,
            height: size,
            wrap: true,
        },
        agent: AgentSpec::default(),
        walls: vec![],
        biomes: vec![BiomeSpec {
            name: "global".into(),
            region: Region::new(0, 0, size, size),
            spawn: vec![
                entry(
                    "jellybean",
                    SpawnRule::Density {
                        p: EXTRA_LARGE_DENSITY,
                    },
                ),
                entry(
                    "onion",
                    SpawnRule::Density {
                        p: EXTRA_LARGE_DENSITY,
                    },
                ),
            ],
        }],
        species: vec![
            species(
                "jellybean",
                JELLYBEAN_COLOR,
                respawn,
                PlacementRule::RandomInRegion,
            ),
            species("onion", ONION_COLOR, respawn, PlacementRule::RandomInRegion),
        ],
        schedule: ScheduleSpec::Static {
            rewards: table(&[("jellybean", JELLYBEAN_REWARD), ("onion", ONION_REWARD)]),
        },
        cue: None,
        observation: ObservationSpec::new(EXTRA_LARGE_FOV, ObservationMode::BinaryChannels),
        seed: 0,
    }
}

pub const MOREL_LEFT: Region = Region::new(1, 1, 13, 13);
pub const MOREL_RIGHT: Region = Region::new(17, 1, 29, 13);

/// 32×15 torus; morels in the left 12×12 biome, oysters and deathcaps in the
/// right one, 4 empty columns between them on both sides of the seam.
pub fn build_two_biome_morel(fov: u32) -> Result<TaskConfig, ConfigError> {
    if fov.is_multiple_of(2) {
        return Err(ConfigError::EvenFov(fov));
    }
    Ok(TaskConfig {
        forager_config_version: CONFIG_VERSION,
        world: WorldSpec {
            width: 32,
            height: 15,
            wrap: true,
        },
        agent: AgentSpec::default(),
        walls: vec![],
        biomes: vec![
            BiomeSpec {
                name: "morel".into(),
                region: MOREL_LEFT,
                spawn: vec![entry("morel", SpawnRule::Count { n: 6 })],
            },
            BiomeSpec {
                name: "oyster".into(),
                region: MOREL_RIGHT,
                spawn: vec![
                    entry("oyster", SpawnRule::Count { n: 12 }),
                    entry("deathcap", SpawnRule::Count { n: 12 }),
                ],
            },
        ],
        species: vec![
            species(
                "morel",
                MOREL_COLOR,
                RespawnDelay::Fixed { steps: 2000 },
                PlacementRule::Original,
            ),
            species(
                "oyster",
                OYSTER_COLOR,
                RespawnDelay::Fixed { steps: 20 },
                PlacementRule::RandomInRegion,
            ),
            species(
                "deathcap",
                DEATHCAP_COLOR,
                RespawnDelay::Fixed { steps: 20 },
                PlacementRule::RandomInRegion,
            ),
        ],
        schedule: ScheduleSpec::Static {
            rewards: table(&[
                ("morel", MOREL_REWARD),
                ("oyster", OYSTER_REWARD),
                ("deathcap", DEATHCAP_REWARD),
            ]),
        },
        cue: None,
        observation: ObservationSpec::new(fov, ObservationMode::BinaryChannels),
        seed: 0,
    })
}

pub const SWITCH_TOP: Region = Region::new(1, 1, 15, 13);
pub const SWITCH_BOTTOM: Region = Region::new(1, 17, 15, 29);

fn segment(x: u32, y: u32, len: u32, horizontal: bool) -> impl Iterator<Item = Position> {
    (0..len).map(move |i| {
        if horizontal {
            Position::new(x + i, y)
        } else {
            Position::new(x, y + i)
        }
    })
}

/// 16×30 torus with a top and a bottom biome. Both hold purple and yellow
/// mushrooms; which of them pays changes every [`SWITCH_PERIOD`] steps.
pub fn build_two_biome_switch() -> TaskConfig {
    let walls: Vec<Position> = segment(3, 5, 5, true)
        .chain(segment(11, 6, 5, false))
        .chain(segment(4, 19, 6, false))
        .chain(segment(8, 24, 5, true))
        .chain([Position::new(2, 15), Position::new(13, 15)])
        .collect();
    let respawn = RespawnDelay::Fixed { steps: 30 };
    let ids = ["purple_top", "yellow_top", "purple_bottom", "yellow_bottom"];
    let colors = [PURPLE, YELLOW, PURPLE, YELLOW];
    let phase = |values: [f64; 4]| -> BTreeMap<String, f64> {
        ids.iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    };
    TaskConfig {
        forager_config_version: CONFIG_VERSION,
        world: WorldSpec {
            width: 16,
            height: 30,
            wrap: true,
        },
        agent: AgentSpec::default(),
        walls,
        biomes: vec![
            BiomeSpec {
                name: "top".into(),
                region: SWITCH_TOP,
                spawn: vec![
                    entry("purple_top", SpawnRule::Count { n: 10 }),
                    entry("yellow_top", SpawnRule::Count { n: 10 }),
                ],
            },
            BiomeSpec {
                name: "bottom".into(),
                region: SWITCH_BOTTOM,
                spawn: vec![
                    entry("purple_bottom", SpawnRule::Count { n: 10 }),
                    entry("yellow_bottom", SpawnRule::Count { n: 10 }),
                ],
            },
        ],
        species: ids
            .iter()
            .zip(colors)
            .map(|(id, c)| species(id, c, respawn, PlacementRule::RandomInRegion))
            .collect(),
        schedule: ScheduleSpec::Switching {
            period: SWITCH_PERIOD,
            phases: vec![phase(SWITCH_PHASE_0), phase(SWITCH_PHASE_1)],
        },
        cue: None,
        observation: ObservationSpec {
            include_last_action: true,
            include_last_reward: true,
            ..ObservationSpec::new(SWITCH_FOV, ObservationMode::ColorOneHot)
        },
        seed: 0,
    }
}

pub const UNENDING_SIZE: u32 = 60;
pub const UNENDING_FOV: u32 = 9;
const UNENDING_COUNT: u32 = 90;
const UNENDING_WALL_SEGMENTS: usize = 40;

/// 60×60 torus split into four 30×30 biomes with one species each. Species
/// colors, reward series and the wall layout are sampled from `seed`.
pub fn build_unending_four(seed: u64, cue_mode: CueMode) -> TaskConfig {
    let mut rng = stream_rng(seed, Stream::Preset);
    let size = UNENDING_SIZE;
    let half = size / 2;
    let start = Position::new(half, half);
    let walls = scatter_walls(&mut rng, Dims::new(size, size), start);

    let mut biomes = Vec::new();
    let mut species_list = Vec::new();
    let mut series = BTreeMap::new();
    let mut colors = Vec::new();
    for (i, (x0, y0)) in [(0, 0), (half, 0), (0, half), (half, half)]
        .into_iter()
        .enumerate()
    {
        let id = format!("species{i}");
        let color = sample_color(&mut rng, &colors);
        colors.push(color);
        let (period_min, period_max) = FOURIER_PERIOD;
        series.insert(
            id.clone(),
            FourierParams::sample(
                &mut rng,
                FOURIER_HARMONICS,
                FOURIER_REPEAT,
                period_min,
                period_max,
            ),
        );
        biomes.push(BiomeSpec {
            name: format!("biome{i}"),
            region: Region::new(x0, y0, x0 + half, y0 + half),
            spawn: vec![entry(&id, SpawnRule::Count { n: UNENDING_COUNT })],
        });
        let (lo, hi) = UNENDING_RESPAWN;
        species_list.push(species(
            &id,
            color,
            RespawnDelay::Uniform { lo, hi },
            PlacementRule::RandomInRegion,
        ));
    }

    TaskConfig {
        forager_config_version: CONFIG_VERSION,
        world: WorldSpec {
            width: size,
            height: size,
            wrap: true,
        },
        agent: AgentSpec { start: Some(start) },
        walls,
        biomes,
        species: species_list,
        schedule: ScheduleSpec::Fourier {
            series,
            extinction: Some(ExtinctionSpec {
                threshold: EXTINCTION_THRESHOLD,
                harmonics: FOURIER_HARMONICS,
                repeat: FOURIER_REPEAT,
                period_min: FOURIER_PERIOD.0,
                period_max: FOURIER_PERIOD.1,
            }),
        },
        cue: Some(CueConfig {
            period: CUE_PERIOD,
            duration: CUE_DURATION,
            mode: cue_mode,
        }),
        observation: ObservationSpec {
            include_last_action: true,
            include_last_reward: true,
            include_cue: true,
            ..ObservationSpec::new(UNENDING_FOV, ObservationMode::Rgb)
        },
        seed,
    }
}

/// Short horizontal/vertical segments, resampled until every free cell is
/// reachable from every other.
fn scatter_walls(rng: &mut SimRng, dims: Dims, keep_free: Position) -> Vec<Position> {
    loop {
        let mut walls = Vec::new();
        for _ in 0..UNENDING_WALL_SEGMENTS {
            let len = rng.random_range(2..=5);
            let horizontal = rng.random::<bool>();
            let x = rng.random_range(0..dims.width);
            let y = rng.random_range(0..dims.height);
            for i in 0..len {
                let p = if horizontal {
                    Position::new((x + i) % dims.width, y)
                } else {
                    Position::new(x, (y + i) % dims.height)
                };
                if p != keep_free && !walls.contains(&p) {
                    walls.push(p);
                }
            }
        }
        if free_cells_connected(dims, &walls) {
            walls.sort();
            return walls;
        }
    }
}

fn free_cells_connected(dims: Dims, walls: &[Position]) -> bool {
    use crate::world::wrap;
    let mut blocked = vec![false; dims.area()];
    for &w in walls {
        blocked[dims.index(w)] = true;
    }
    let Some(start) = (0..dims.area()).find(|&i| !blocked[i]) else {
        return true;
    };
    let mut seen = blocked.clone();
    seen[start] = true;
    let mut stack = vec![dims.position(start)];
    let mut reached = 1;
    while let Some(p) = stack.pop() {
        for a in crate::world::Action::ALL {
            let (dx, dy) = a.delta();
            let q = wrap(p, dx, dy, dims);
            let i = dims.index(q);
            if !seen[i] {
                seen[i] = true;
                reached += 1;
                stack.push(q);
            }
        }
    }
    reached == blocked.iter().filter(|b| !**b).count()
}
