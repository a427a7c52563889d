//! Declarative task configuration.
//!
//! A [`TaskConfig`] fully describes an environment. It is stored as TOML with
//! a `forager_config_version` key; serialization emits keys in sorted order so
//! the text (and anything hashed from it) is canonical. See `docs/config.md`
//! for the key-by-key schema.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::observation::{
    ObservationMode, ObservationSpec, AGENT_COLOR, BACKGROUND_COLOR, WALL_COLOR,
};
use crate::reward::{CueConfig, ScheduleSpec};
use crate::world::{Color, Dims, Position, Region, RespawnDelay, RespawnRule};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error("unsupported forager_config_version {0} (expected {CONFIG_VERSION})")]
    Version(u32),
    #[error("world dimensions must be positive, got {width}x{height}")]
    Dims { width: u32, height: u32 },
    #[error("world.wrap = false is not supported; worlds are toroidal")]
    NotToroidal,
    #[error("agent start {0} is outside the world or on a wall")]
    AgentStart(Position),
    #[error("wall {at}: {reason}")]
    Wall { at: Position, reason: String },
    #[error("biome `{name}`: {reason}")]
    Biome { name: String, reason: String },
    #[error("species `{id}`: {reason}")]
    Species { id: String, reason: String },
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("cue: {0}")]
    Cue(String),
    #[error("fov must be odd, got {0}")]
    EvenFov(u32),
    #[error("observation: {0}")]
    Observation(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    pub width: u32,
    pub height: u32,
    #[serde(default = "default_wrap")]
    pub wrap: bool,
}

fn default_wrap() -> bool {
    true
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    /// Defaults to the world centre `(width / 2, height / 2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Position>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpawnRule {
    /// Each free cell independently receives the species with probability `p`.
    Density { p: f64 },
    /// Exactly `n` objects on distinct free cells.
    Count { n: u32 },
    /// Objects at the listed cells.
    Cells { cells: Vec<Position> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpawnEntry {
    pub species: String,
    pub rule: SpawnRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiomeSpec {
    pub name: String,
    pub region: Region,
    #[serde(default)]
    pub spawn: Vec<SpawnEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSpec {
    pub id: String,
    pub color: Color,
    #[serde(default)]
    pub blocking: bool,
    pub respawn: RespawnRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub forager_config_version: u32,
    pub world: WorldSpec,
    #[serde(default)]
    pub agent: AgentSpec,
    #[serde(default)]
    pub walls: Vec<Position>,
    pub biomes: Vec<BiomeSpec>,
    pub species: Vec<SpeciesSpec>,
    pub schedule: ScheduleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cue: Option<CueConfig>,
    pub observation: ObservationSpec,
    #[serde(default)]
    pub seed: u64,
}

impl TaskConfig {
    pub fn dims(&self) -> Dims {
        Dims::new(self.world.width, self.world.height)
    }

    pub fn agent_start(&self) -> Position {
        self.agent
            .start
            .unwrap_or(Position::new(self.world.width / 2, self.world.height / 2))
    }

    pub fn species_index(&self, id: &str) -> Option<usize> {
        self.species.iter().position(|s| s.id == id)
    }

    /// Biome whose spawn list names the species.
    pub fn biome_of(&self, species: &str) -> Option<usize> {
        self.biomes
            .iter()
            .position(|b| b.spawn.iter().any(|e| e.species == species))
    }

    pub fn species_ids(&self) -> Vec<&str> {
        self.species.iter().map(|s| s.id.as_str()).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.forager_config_version != CONFIG_VERSION {
            return Err(ConfigError::Version(self.forager_config_version));
        }
        let dims = self.dims();
        if dims.width == 0 || dims.height == 0 {
            return Err(ConfigError::Dims {
                width: dims.width,
                height: dims.height,
            });
        }
        if !self.world.wrap {
            return Err(ConfigError::NotToroidal);
        }

        let mut walls = HashSet::with_capacity(self.walls.len());
        for &w in &self.walls {
            if !dims.contains(w) {
                return Err(ConfigError::Wall {
                    at: w,
                    reason: "outside the world".into(),
                });
            }
            if !walls.insert(w) {
                return Err(ConfigError::Wall {
                    at: w,
                    reason: "duplicate".into(),
                });
            }
        }
        let start = self.agent_start();
        if !dims.contains(start) || walls.contains(&start) {
            return Err(ConfigError::AgentStart(start));
        }

        self.validate_species()?;
        self.validate_biomes(dims, &walls, start)?;
        self.validate_schedule()?;

        if let Some(cue) = &self.cue {
            if cue.period == 0 {
                return Err(ConfigError::Cue("period must be positive".into()));
            }
            if cue.duration > cue.period {
                return Err(ConfigError::Cue(format!(
                    "duration {} exceeds period {}",
                    cue.duration, cue.period
                )));
            }
        }

        let obs = &self.observation;
        if obs.fov == 0 || obs.fov.is_multiple_of(2) {
            return Err(ConfigError::EvenFov(obs.fov));
        }
        if let Some(beta) = obs.reward_trace {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(ConfigError::Observation(format!(
                    "reward_trace decay {beta} not in (0, 1)"
                )));
            }
        }
        if obs.include_cue && self.cue.is_none() {
            return Err(ConfigError::Observation(
                "include_cue requires a [cue] section".into(),
            ));
        }
        let replaces = matches!(
            &self.schedule,
            ScheduleSpec::Fourier {
                extinction: Some(_),
                ..
            }
        );
        if obs.mode == ObservationMode::ColorOneHot && replaces {
            return Err(ConfigError::Observation(
                "color_one_hot cannot represent colors introduced by species replacement".into(),
            ));
        }
        Ok(())
    }

    fn validate_species(&self) -> Result<(), ConfigError> {
        let mut ids = HashSet::new();
        for s in &self.species {
            let err = |reason: &str| ConfigError::Species {
                id: s.id.clone(),
                reason: reason.into(),
            };
            if s.id.is_empty() {
                return Err(err("id must not be empty"));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(err("duplicate id"));
            }
            if [AGENT_COLOR, WALL_COLOR, BACKGROUND_COLOR].contains(&s.color) {
                return Err(err("color is reserved for the agent, walls or background"));
            }
            match s.respawn.delay {
                RespawnDelay::Fixed { steps: 0 } => {
                    return Err(err("respawn delay must be at least 1"))
                }
                RespawnDelay::Uniform { lo, hi } if lo == 0 || lo > hi => {
                    return Err(err("uniform respawn delay needs 1 <= lo <= hi"))
                }
                _ => {}
            }
            if s.blocking && s.respawn.delay != RespawnDelay::Never {
                return Err(err("blocking objects never respawn"));
            }
            let membership = self
                .biomes
                .iter()
                .filter(|b| b.spawn.iter().any(|e| e.species == s.id))
                .count();
            if membership != 1 {
                return Err(err(&format!(
                    "must be spawned by exactly one biome, found {membership}"
                )));
            }
        }
        if self.species.len() > u16::MAX as usize {
            return Err(ConfigError::Species {
                id: "*".into(),
                reason: "too many species".into(),
            });
        }
        Ok(())
    }

    fn validate_biomes(
        &self,
        dims: Dims,
        walls: &HashSet<Position>,
        start: Position,
    ) -> Result<(), ConfigError> {
        let mut names = HashSet::new();
        let mut explicit = HashSet::new();
        for (i, b) in self.biomes.iter().enumerate() {
            let err = |reason: String| ConfigError::Biome {
                name: b.name.clone(),
                reason,
            };
            if !names.insert(b.name.as_str()) {
                return Err(err("duplicate biome name".into()));
            }
            let r = b.region;
            if r.is_empty() {
                return Err(err(format!("region {r:?} is empty")));
            }
            if r.x1 > dims.width || r.y1 > dims.height {
                return Err(err(format!(
                    "region {r:?} exceeds world bounds {}x{}",
                    dims.width, dims.height
                )));
            }
            if let Some(other) = self.biomes[..i].iter().find(|o| o.region.intersects(&r)) {
                return Err(err(format!("region overlaps biome `{}`", other.name)));
            }
            let mut seen = HashSet::new();
            for e in &b.spawn {
                if self.species_index(&e.species).is_none() {
                    return Err(err(format!("unknown species `{}`", e.species)));
                }
                if !seen.insert(e.species.as_str()) {
                    return Err(err(format!("species `{}` listed twice", e.species)));
                }
                match &e.rule {
                    SpawnRule::Density { p } => {
                        if !(0.0..=1.0).contains(p) {
                            return Err(err(format!(
                                "density {p} for `{}` not in [0, 1]",
                                e.species
                            )));
                        }
                    }
                    SpawnRule::Count { n } => {
                        let free = r
                            .positions()
                            .filter(|p| !walls.contains(p) && *p != start)
                            .count();
                        if *n as usize > free {
                            return Err(err(format!(
                                "count {n} for `{}` exceeds {free} free cells",
                                e.species
                            )));
                        }
                    }
                    SpawnRule::Cells { cells } => {
                        for &p in cells {
                            if !r.contains(p) {
                                return Err(err(format!(
                                    "cell {p} for `{}` lies outside the region",
                                    e.species
                                )));
                            }
                            if walls.contains(&p) {
                                return Err(err(format!("cell {p} for `{}` is a wall", e.species)));
                            }
                            if p == start {
                                return Err(err(format!(
                                    "cell {p} for `{}` is the agent start",
                                    e.species
                                )));
                            }
                            if !explicit.insert(p) {
                                return Err(err(format!(
                                    "cell {p} for `{}` is already occupied",
                                    e.species
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_schedule(&self) -> Result<(), ConfigError> {
        let err = |m: String| ConfigError::Schedule(m);
        let collectible: Vec<&str> = self
            .species
            .iter()
            .filter(|s| !s.blocking)
            .map(|s| s.id.as_str())
            .collect();
        let check_table = |name: &str, table: &BTreeMap<String, f64>| -> Result<(), ConfigError> {
            for (id, v) in table {
                let Some(i) = self.species_index(id) else {
                    return Err(err(format!("{name}: unknown species `{id}`")));
                };
                if !v.is_finite() {
                    return Err(err(format!("{name}: reward for `{id}` is not finite")));
                }
                if self.species[i].blocking && *v != 0.0 {
                    return Err(err(format!(
                        "{name}: blocking species `{id}` cannot carry a reward"
                    )));
                }
            }
            Ok(())
        };
        match &self.schedule {
            ScheduleSpec::Static { rewards } => check_table("rewards", rewards)?,
            ScheduleSpec::Decaying {
                initial,
                decay,
                floor,
            } => {
                check_table("initial", initial)?;
                if !(*decay > 0.0 && *decay <= 1.0) {
                    return Err(err(format!("decay {decay} not in (0, 1]")));
                }
                if !floor.is_finite() {
                    return Err(err("floor must be finite".into()));
                }
            }
            ScheduleSpec::Switching { period, phases } => {
                if *period == 0 {
                    return Err(err("switching period must be positive".into()));
                }
                if phases.is_empty() {
                    return Err(err("switching schedule needs at least one phase".into()));
                }
                for (i, p) in phases.iter().enumerate() {
                    check_table(&format!("phase {i}"), p)?;
                }
            }
            ScheduleSpec::Fourier { series, extinction } => {
                for (id, p) in series {
                    let Some(i) = self.species_index(id) else {
                        return Err(err(format!("series for unknown species `{id}`")));
                    };
                    if self.species[i].blocking {
                        return Err(err(format!(
                            "blocking species `{id}` cannot carry a series"
                        )));
                    }
                    if p.cos.is_empty() || p.cos.len() != p.sin.len() {
                        return Err(err(format!(
                            "series `{id}` needs equal, non-empty cos/sin lists"
                        )));
                    }
                    if !(p.period.is_finite() && p.period > 0.0) || p.repeat == 0 {
                        return Err(err(format!(
                            "series `{id}` needs period > 0 and repeat >= 1"
                        )));
                    }
                    if p.cos.iter().chain(&p.sin).any(|v| !v.is_finite()) {
                        return Err(err(format!("series `{id}` has non-finite coefficients")));
                    }
                }
                if let Some(missing) = collectible.iter().find(|id| !series.contains_key(**id)) {
                    return Err(err(format!("no series for species `{missing}`")));
                }
                if let Some(x) = extinction {
                    if x.threshold == 0 || x.harmonics == 0 || x.repeat == 0 {
                        return Err(err(
                            "extinction threshold, harmonics and repeat must be positive".into(),
                        ));
                    }
                    if !(x.period_min > 0.0
                        && x.period_min <= x.period_max
                        && x.period_max.is_finite())
                    {
                        return Err(err(
                            "extinction period range must satisfy 0 < min <= max".into()
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates a TOML document.
pub fn parse_config(text: &str) -> Result<TaskConfig, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    match table
        .get("forager_config_version")
        .and_then(|v| v.as_integer())
    {
        Some(v) if v == CONFIG_VERSION as i64 => {}
        Some(v) => return Err(ConfigError::Version(v.clamp(0, u32::MAX as i64) as u32)),
        None => {
            return Err(ConfigError::Syntax(
                "missing integer key `forager_config_version`".into(),
            ))
        }
    }
    // Deserialize from the text rather than the table to keep line numbers in errors.
    let config: TaskConfig =
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Canonical TOML text with sorted keys.
pub fn serialize_config(config: &TaskConfig) -> Result<String, ConfigError> {
    let value = toml::Value::try_from(config).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    toml::to_string(&value).map_err(|e| ConfigError::Syntax(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::PlacementRule;

    fn tiny() -> TaskConfig {
        TaskConfig {
            forager_config_version: 1,
            world: WorldSpec {
                width: 8,
                height: 6,
                wrap: true,
            },
            agent: AgentSpec::default(),
            walls: vec![Position::new(0, 0)],
            biomes: vec![BiomeSpec {
                name: "all".into(),
                region: Region::new(0, 0, 8, 6),
                spawn: vec![SpawnEntry {
                    species: "berry".into(),
                    rule: SpawnRule::Count { n: 5 },
                }],
            }],
            species: vec![SpeciesSpec {
                id: "berry".into(),
                color: [200, 0, 0],
                blocking: false,
                respawn: RespawnRule {
                    delay: RespawnDelay::Fixed { steps: 3 },
                    placement: PlacementRule::RandomInRegion,
                },
            }],
            schedule: ScheduleSpec::Static {
                rewards: BTreeMap::from([("berry".into(), 1.0)]),
            },
            cue: None,
            observation: ObservationSpec::new(3, ObservationMode::BinaryChannels),
            seed: 0,
        }
    }

    #[test]
    fn round_trip_tiny() {
        let c = tiny();
        let text = serialize_config(&c).unwrap();
        assert!(text.contains("forager_config_version = 1"));
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    #[test]
    fn serialization_is_canonical() {
        let a = serialize_config(&tiny()).unwrap();
        let b = serialize_config(&parse_config(&a).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn even_fov_rejected() {
        let mut c = tiny();
        c.observation.fov = 4;
        assert_eq!(
            c.validate().unwrap_err().to_string(),
            "fov must be odd, got 4"
        );
    }

    #[test]
    fn biome_out_of_bounds_names_biome() {
        let mut c = tiny();
        c.biomes[0].region = Region::new(0, 0, 9, 6);
        let e = c.validate().unwrap_err();
        assert!(
            matches!(&e, ConfigError::Biome { name, .. } if name == "all"),
            "{e}"
        );
        assert!(e.to_string().contains("exceeds world bounds"));
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let text = serialize_config(&tiny())
            .unwrap()
            .replace("[world]", "[world]\ncolour = 3");
        let e = parse_config(&text).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("colour"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn syntax_error() {
        assert!(matches!(
            parse_config("world = ["),
            Err(ConfigError::Syntax(_))
        ));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = tiny();
        c.walls.push(Position::new(0, 0));
        assert!(matches!(c.validate(), Err(ConfigError::Wall { .. })));

        let mut c = tiny();
        c.world.width = 0;
        assert!(matches!(c.validate(), Err(ConfigError::Dims { .. })));

        let mut c = tiny();
        c.agent.start = Some(Position::new(0, 0));
        assert!(matches!(c.validate(), Err(ConfigError::AgentStart(_))));

        let mut c = tiny();
        c.biomes[0].spawn[0].rule = SpawnRule::Cells {
            cells: vec![Position::new(0, 0)],
        };
        assert!(matches!(c.validate(), Err(ConfigError::Biome { .. })));

        let mut c = tiny();
        c.biomes[0].spawn[0].rule = SpawnRule::Cells {
            cells: vec![Position::new(1, 1), Position::new(1, 1)],
        };
        assert!(matches!(c.validate(), Err(ConfigError::Biome { .. })));

        let mut c = tiny();
        c.biomes.push(BiomeSpec {
            name: "overlap".into(),
            region: Region::new(2, 2, 4, 4),
            spawn: vec![],
        });
        assert!(matches!(c.validate(), Err(ConfigError::Biome { name, .. }) if name == "overlap"));

        let mut c = tiny();
        c.world.wrap = false;
        assert_eq!(c.validate(), Err(ConfigError::NotToroidal));

        let mut c = tiny();
        c.species[0].color = AGENT_COLOR;
        assert!(matches!(c.validate(), Err(ConfigError::Species { .. })));

        let mut c = tiny();
        c.forager_config_version = 2;
        assert_eq!(c.validate(), Err(ConfigError::Version(2)));

        let mut c = tiny();
        c.cue = Some(CueConfig {
            period: 10,
            duration: 11,
            mode: crate::reward::CueMode::Windowed,
        });
        assert!(matches!(c.validate(), Err(ConfigError::Cue(_))));

        let mut c = tiny();
        c.observation.include_cue = true;
        assert!(matches!(c.validate(), Err(ConfigError::Observation(_))));

        let mut c = tiny();
        c.biomes[0].spawn[0].rule = SpawnRule::Count { n: 100 };
        assert!(matches!(c.validate(), Err(ConfigError::Biome { .. })));
    }
}
