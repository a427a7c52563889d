//! Newline-delimited JSON trajectory logs.
//!
//! One [`StepRecord`] per line. Every record carries the schema version in
//! `schema`; readers reject other versions. Floats are written with enough
//! digits to round-trip exactly, so a log replayed through
//! [`replay`] must reproduce every reward bit for bit.

use std::io::{BufRead, BufWriter, Write};

use serde::{Deserialize, Serialize};

use crate::env::{Forager, StepOutcome};
use crate::error::Error;
use crate::observation::Observation;
use crate::world::{Action, Color, Position};

pub const TRAJECTORY_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectedRecord {
    pub slot: u16,
    pub species: u32,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplacementRecord {
    pub slot: u16,
    pub old_species: u32,
    pub new_species: u32,
    pub color: Color,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub schema: u32,
    /// Tick after the step.
    pub tick: u64,
    pub action: Action,
    pub reward: f64,
    pub agent: Position,
    pub collected: Option<CollectedRecord>,
    pub phase: Option<usize>,
    pub replacement: Option<ReplacementRecord>,
    pub cue: Vec<f64>,
    /// FNV-1a digest of the observation after the step.
    pub obs_digest: String,
}

impl StepRecord {
    pub fn new(env: &Forager, out: &StepOutcome, obs: &Observation) -> Self {
        Self {
            schema: TRAJECTORY_SCHEMA,
            tick: out.tick,
            action: out.action,
            reward: out.reward,
            agent: env.world().agent(),
            collected: out.collected.map(|c| CollectedRecord {
                slot: c.slot,
                species: c.species.0,
                name: env.world().species()[c.slot as usize].name.clone(),
            }),
            phase: env.phase(),
            replacement: out.replacement.as_ref().map(|r| ReplacementRecord {
                slot: r.slot,
                old_species: r.old_species.0,
                new_species: r.new_species.0,
                color: r.color,
            }),
            cue: env.cue_vector().to_vec(),
            obs_digest: format!("{:016x}", observation_digest(obs)),
        }
    }
}

/// 64-bit FNV-1a over the grid bytes followed by the little-endian bits of
/// every auxiliary value.
pub fn observation_digest(obs: &Observation) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let aux = obs.aux.iter().flat_map(|v| v.to_bits().to_le_bytes());
    for b in obs.grid.iter().copied().chain(aux) {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    h
}

pub struct TrajectoryWriter<W: Write> {
    out: BufWriter<W>,
    records: u64,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            out: BufWriter::new(out),
            records: 0,
        }
    }

    pub fn write(&mut self, record: &StepRecord) -> Result<(), Error> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        self.records += 1;
        Ok(())
    }

    pub fn records(&self) -> u64 {
        self.records
    }

    pub fn finish(mut self) -> Result<W, Error> {
        self.out.flush()?;
        self.out.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

pub fn read_trajectory(input: impl BufRead) -> Result<Vec<StepRecord>, Error> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: StepRecord = serde_json::from_str(&line)?;
        if record.schema != TRAJECTORY_SCHEMA {
            return Err(Error::Replay(format!(
                "line {}: schema {} (expected {TRAJECTORY_SCHEMA})",
                i + 1,
                record.schema
            )));
        }
        records.push(record);
    }
    Ok(records)
}

/// Feeds the logged actions to `env` (freshly reset with the logged seed) and
/// checks that every regenerated record equals the logged one.
pub fn replay(env: &mut Forager, records: &[StepRecord]) -> Result<(), Error> {
    let mut obs = Observation::default();
    for (i, logged) in records.iter().enumerate() {
        let out = env.step(logged.action);
        env.observe_into(&mut obs);
        let fresh = StepRecord::new(env, &out, &obs);
        if fresh.reward.to_bits() != logged.reward.to_bits() {
            return Err(Error::Replay(format!(
                "step {i}: reward {} but log has {}",
                fresh.reward, logged.reward
            )));
        }
        if &fresh != logged {
            return Err(Error::Replay(format!("step {i}: record differs from log")));
        }
    }
    Ok(())
}
