//! The toroidal grid, agent movement, collection and respawn scheduling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, SpawnRule, TaskConfig};
use crate::rng::WorldRng;

/// An RGB triple.
pub type Color = [u8; 3];

/// Index of a species in the world's species table. Grid cells and pending
/// respawn events store slots, so replacing the species occupying a slot
/// relabels all of its objects at once.
pub type Slot = u16;

/// Draws before [`WorldState::sample_empty_in_region`] stops rejection
/// sampling and enumerates the region.
const REJECTION_TRIES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct Position {
    pub x: u32,
    pub y: u32,
}

impl Position {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

impl From<[u32; 2]> for Position {
    fn from([x, y]: [u32; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Position> for [u32; 2] {
    fn from(p: Position) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub width: u32,
    pub height: u32,
}

impl Dims {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    pub const fn area(self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub const fn index(self, p: Position) -> usize {
        p.y as usize * self.width as usize + p.x as usize
    }

    #[inline]
    pub const fn position(self, index: usize) -> Position {
        Position::new(
            (index % self.width as usize) as u32,
            (index / self.width as usize) as u32,
        )
    }

    pub const fn contains(self, p: Position) -> bool {
        p.x < self.width && p.y < self.height
    }
}

/// `(p + (dx, dy)) mod dims`, componentwise.
#[inline]
pub fn wrap(p: Position, dx: i64, dy: i64, dims: Dims) -> Position {
    let x = (p.x as i64 + dx).rem_euclid(dims.width as i64);
    let y = (p.y as i64 + dy).rem_euclid(dims.height as i64);
    Position::new(x as u32, y as u32)
}

/// Shortest signed offset from `a` to `b` along one torus axis.
pub fn torus_delta(a: u32, b: u32, len: u32) -> i64 {
    let d = (b as i64 - a as i64).rem_euclid(len as i64);
    if d * 2 > len as i64 {
        d - len as i64
    } else {
        d
    }
}

/// Manhattan distance on the torus.
pub fn wrap_manhattan(a: Position, b: Position, dims: Dims) -> u64 {
    torus_delta(a.x, b.x, dims.width).unsigned_abs()
        + torus_delta(a.y, b.y, dims.height).unsigned_abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    /// Also the tie-breaking order used by path search.
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// `(dx, dy)`; y grows downwards.
    pub const fn delta(self) -> (i64, i64) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "up" => Ok(Action::Up),
            "down" => Ok(Action::Down),
            "left" => Ok(Action::Left),
            "right" => Ok(Action::Right),
            other => Err(format!("unknown action `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Cell {
    #[default]
    Empty,
    Wall,
    Object(Slot),
}

/// A half-open rectangle `[x0, x1) × [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Region {
    pub const fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub const fn full(dims: Dims) -> Self {
        Self::new(0, 0, dims.width, dims.height)
    }

    pub const fn width(&self) -> u32 {
        self.x1.saturating_sub(self.x0)
    }

    pub const fn height(&self) -> u32 {
        self.y1.saturating_sub(self.y0)
    }

    pub const fn area(&self) -> usize {
        self.width() as usize * self.height() as usize
    }

    pub const fn is_empty(&self) -> bool {
        self.area() == 0
    }

    pub const fn contains(&self, p: Position) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    /// Row-major iteration over the cells of the region.
    pub fn positions(self) -> impl Iterator<Item = Position> {
        (self.y0..self.y1).flat_map(move |y| (self.x0..self.x1).map(move |x| Position::new(x, y)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RespawnDelay {
    Never,
    Fixed {
        steps: u64,
    },
    /// Integer-uniform over `lo..=hi`.
    Uniform {
        lo: u64,
        hi: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementRule {
    Original,
    RandomInRegion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RespawnRule {
    pub delay: RespawnDelay,
    pub placement: PlacementRule,
}

impl RespawnRule {
    pub const NEVER: RespawnRule = RespawnRule {
        delay: RespawnDelay::Never,
        placement: PlacementRule::Original,
    };
}

/// Identity of a species lineage member. Replacements get fresh ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpeciesId(pub u32);

impl fmt::Display for SpeciesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Runtime description of the species currently occupying a slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Species {
    pub id: SpeciesId,
    pub name: String,
    pub color: Color,
    pub blocking: bool,
    /// Index into the world's region table.
    pub biome: usize,
    pub respawn: RespawnRule,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Placement {
    Original(Position),
    RandomInRegion(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RespawnEvent {
    pub due_tick: u64,
    pub slot: Slot,
    pub placement: Placement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct QueueEntry {
    seq: u64,
    event: RespawnEvent,
}

impl Ord for QueueEntry {
    // Min-heap on (due_tick, seq).
    fn cmp(&self, other: &Self) -> Ordering {
        (other.event.due_tick, other.seq).cmp(&(self.event.due_tick, self.seq))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Respawn events ordered by due tick, FIFO among equal ticks.
#[derive(Clone, Debug, Default)]
pub struct RespawnQueue {
    heap: BinaryHeap<QueueEntry>,
    next_seq: u64,
}

impl PartialEq for RespawnQueue {
    fn eq(&self, other: &Self) -> bool {
        self.next_seq == other.next_seq && self.sorted() == other.sorted()
    }
}

impl Eq for RespawnQueue {}

impl RespawnQueue {
    pub fn push(&mut self, event: RespawnEvent) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(QueueEntry { seq, event });
    }

    fn pop_due(&mut self, tick: u64) -> Option<RespawnEvent> {
        if self.heap.peek()?.event.due_tick <= tick {
            self.heap.pop().map(|e| e.event)
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.heap.capacity()
    }

    /// Pending events in processing order.
    pub fn sorted(&self) -> Vec<RespawnEvent> {
        let mut entries: Vec<_> = self.heap.iter().copied().collect();
        entries.sort_by(|a, b| b.cmp(a));
        entries.into_iter().map(|e| e.event).collect()
    }
}

/// A flat row-major grid of cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    dims: Dims,
    cells: Vec<Cell>,
}

impl Grid {
    pub fn new(dims: Dims) -> Self {
        Self {
            dims,
            cells: vec![Cell::Empty; dims.area()],
        }
    }

    /// # Panics
    /// If `cells.len()` differs from the area of `dims`.
    pub fn from_cells(dims: Dims, cells: Vec<Cell>) -> Self {
        assert_eq!(
            cells.len(),
            dims.area(),
            "cell count does not match dimensions"
        );
        Self { dims, cells }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn get(&self, p: Position) -> Cell {
        self.cells[self.dims.index(p)]
    }

    #[inline]
    pub fn set(&mut self, p: Position, cell: Cell) {
        let i = self.dims.index(p);
        self.cells[i] = cell;
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn walls(&self) -> impl Iterator<Item = Position> + '_ {
        self.positions_where(|c| c == Cell::Wall)
    }

    pub fn object_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c, Cell::Object(_)))
            .count()
    }

    pub fn count_slot(&self, slot: Slot) -> usize {
        self.cells
            .iter()
            .filter(|&&c| c == Cell::Object(slot))
            .count()
    }

    pub fn positions_where<'a>(
        &'a self,
        pred: impl Fn(Cell) -> bool + 'a,
    ) -> impl Iterator<Item = Position> + 'a {
        self.cells
            .iter()
            .enumerate()
            .filter(move |(_, &c)| pred(c))
            .map(|(i, _)| self.dims.position(i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveOutcome {
    pub new_pos: Position,
    pub collected: Option<Slot>,
}

/// Sizes of the structures that make up a world's mutable state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StructureSize {
    pub cells: usize,
    pub queue: usize,
}

/// Complete simulation state of one world.
///
/// Storage is the grid plus the respawn queue; the queue holds at most one
/// event per collected-and-not-yet-respawned object, so nothing grows with the
/// tick count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldState {
    grid: Grid,
    agent: Position,
    tick: u64,
    respawns: RespawnQueue,
    species: Vec<Species>,
    regions: Vec<Region>,
    consumption: Vec<u64>,
    peak_queue: usize,
    rng: WorldRng,
}

impl WorldState {
    /// An empty world with the given species table and regions.
    pub fn new(
        dims: Dims,
        species: Vec<Species>,
        regions: Vec<Region>,
        agent: Position,
        seed: u64,
    ) -> Self {
        let n = species.len();
        Self {
            grid: Grid::new(dims),
            agent,
            tick: 0,
            respawns: RespawnQueue::default(),
            species,
            regions,
            consumption: vec![0; n],
            peak_queue: 0,
            rng: WorldRng::new(seed),
        }
    }

    /// Builds the initial world for `config`: walls, species table and the
    /// initial object layout. Same `(config, seed)` gives an identical state.
    pub fn reset(config: &TaskConfig, seed: u64) -> Result<Self, ConfigError> {
        config.validate()?;
        let dims = config.dims();
        let regions: Vec<Region> = config.biomes.iter().map(|b| b.region).collect();
        let species = config
            .species
            .iter()
            .enumerate()
            .map(|(i, s)| Species {
                id: SpeciesId(i as u32),
                name: s.id.clone(),
                color: s.color,
                blocking: s.blocking,
                biome: config
                    .biome_of(&s.id)
                    .expect("validated: every species has a biome"),
                respawn: s.respawn,
            })
            .collect();
        let mut world = Self::new(dims, species, regions, config.agent_start(), seed);
        for &w in &config.walls {
            world.grid.set(w, Cell::Wall);
        }
        world.spawn_initial(config)?;
        Ok(world)
    }

    /// Places the initial objects of every biome.
    ///
    /// Explicit cells first, then one density pass over the region (every
    /// density species draws for every free cell; the first declared success
    /// claims it), then fixed counts sampled among the cells still free. The
    /// agent's start cell never receives an object.
    pub fn spawn_initial(&mut self, config: &TaskConfig) -> Result<(), ConfigError> {
        let slot_of = |id: &str| config.species_index(id).map(|i| i as Slot);
        for biome in &config.biomes {
            let mut density: Vec<(Slot, f64)> = Vec::new();
            let mut counts: Vec<(Slot, u32)> = Vec::new();
            for entry in &biome.spawn {
                let slot = slot_of(&entry.species).ok_or_else(|| ConfigError::Biome {
                    name: biome.name.clone(),
                    reason: format!("unknown species `{}`", entry.species),
                })?;
                match &entry.rule {
                    SpawnRule::Cells { cells } => {
                        for &p in cells {
                            if self.grid.get(p) != Cell::Empty || p == self.agent {
                                return Err(ConfigError::Biome {
                                    name: biome.name.clone(),
                                    reason: format!("cell {p} for `{}` is not free", entry.species),
                                });
                            }
                            self.grid.set(p, Cell::Object(slot));
                        }
                    }
                    SpawnRule::Density { p } => density.push((slot, *p)),
                    SpawnRule::Count { n } => counts.push((slot, *n)),
                }
            }
            if !density.is_empty() {
                for p in biome.region.positions() {
                    if self.grid.get(p) != Cell::Empty || p == self.agent {
                        continue;
                    }
                    let mut winner = None;
                    for &(slot, prob) in &density {
                        let hit = self.rng.spawn.random::<f64>() < prob;
                        if hit && winner.is_none() {
                            winner = Some(slot);
                        }
                    }
                    if let Some(slot) = winner {
                        self.grid.set(p, Cell::Object(slot));
                    }
                }
            }
            for (slot, n) in counts {
                let mut free: Vec<Position> = biome
                    .region
                    .positions()
                    .filter(|&p| self.grid.get(p) == Cell::Empty && p != self.agent)
                    .collect();
                if free.len() < n as usize {
                    return Err(ConfigError::Biome {
                        name: biome.name.clone(),
                        reason: format!(
                            "cannot place {n} `{}` objects: only {} free cells",
                            self.species[slot as usize].name,
                            free.len()
                        ),
                    });
                }
                // Partial Fisher-Yates.
                for i in 0..n as usize {
                    let j = self.rng.spawn.random_range(i..free.len());
                    free.swap(i, j);
                    self.grid.set(free[i], Cell::Object(slot));
                }
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        self.grid.dims
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn agent(&self) -> Position {
        self.agent
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn consumption(&self, slot: Slot) -> u64 {
        self.consumption[slot as usize]
    }

    pub fn respawn_queue(&self) -> &RespawnQueue {
        &self.respawns
    }

    /// Longest the respawn queue has been since reset.
    pub fn peak_queue(&self) -> usize {
        self.peak_queue
    }

    pub fn rng_mut(&mut self) -> &mut WorldRng {
        &mut self.rng
    }

    pub fn structure_size(&self) -> StructureSize {
        StructureSize {
            cells: self.grid.cells.len(),
            queue: self.respawns.len(),
        }
    }

    /// Approximate heap bytes held by the world.
    pub fn structure_bytes(&self) -> usize {
        self.grid.cells.capacity() * std::mem::size_of::<Cell>()
            + self.respawns.capacity() * std::mem::size_of::<QueueEntry>()
            + self.species.capacity() * std::mem::size_of::<Species>()
            + self.consumption.capacity() * std::mem::size_of::<u64>()
    }

    pub fn set_cell(&mut self, p: Position, cell: Cell) {
        self.grid.set(p, cell);
    }

    pub fn set_agent(&mut self, p: Position) {
        self.agent = p;
    }

    #[cfg(test)]
    pub(crate) fn set_consumption(&mut self, slot: Slot, count: u64) {
        self.consumption[slot as usize] = count;
    }

    /// Moves the agent one cell. Walls and blocking objects leave it in place;
    /// moving onto a collectible removes it, counts the consumption and
    /// schedules its respawn.
    pub fn apply_action(&mut self, action: Action) -> MoveOutcome {
        let (dx, dy) = action.delta();
        let target = wrap(self.agent, dx, dy, self.grid.dims);
        match self.grid.get(target) {
            Cell::Wall => MoveOutcome {
                new_pos: self.agent,
                collected: None,
            },
            Cell::Object(slot) if self.species[slot as usize].blocking => MoveOutcome {
                new_pos: self.agent,
                collected: None,
            },
            Cell::Object(slot) => {
                self.grid.set(target, Cell::Empty);
                self.agent = target;
                self.consumption[slot as usize] += 1;
                self.schedule_respawn(slot, target);
                MoveOutcome {
                    new_pos: target,
                    collected: Some(slot),
                }
            }
            Cell::Empty => {
                self.agent = target;
                MoveOutcome {
                    new_pos: target,
                    collected: None,
                }
            }
        }
    }

    fn schedule_respawn(&mut self, slot: Slot, at: Position) {
        let species = &self.species[slot as usize];
        let delay = match species.respawn.delay {
            RespawnDelay::Never => return,
            RespawnDelay::Fixed { steps } => steps,
            RespawnDelay::Uniform { lo, hi } => self.rng.respawn.random_range(lo..=hi),
        };
        let placement = match species.respawn.placement {
            PlacementRule::Original => Placement::Original(at),
            PlacementRule::RandomInRegion => Placement::RandomInRegion(species.biome),
        };
        self.respawns.push(RespawnEvent {
            due_tick: self.tick + delay.max(1),
            slot,
            placement,
        });
        self.peak_queue = self.peak_queue.max(self.respawns.len());
    }

    pub fn advance_tick(&mut self) {
        self.tick += 1;
    }

    /// Executes every event due at or before the current tick. Events that
    /// cannot be placed (original cell occupied, region full) are deferred by
    /// one tick.
    pub fn process_respawns(&mut self) -> Vec<(Slot, Position)> {
        let mut placed = Vec::new();
        let mut deferred = Vec::new();
        while let Some(event) = self.respawns.pop_due(self.tick) {
            let target = match event.placement {
                Placement::Original(p) => {
                    (self.grid.get(p) == Cell::Empty && p != self.agent).then_some(p)
                }
                Placement::RandomInRegion(r) => self.sample_empty_in_region(r),
            };
            match target {
                Some(p) => {
                    self.grid.set(p, Cell::Object(event.slot));
                    placed.push((event.slot, p));
                }
                None => deferred.push(RespawnEvent {
                    due_tick: self.tick + 1,
                    ..event
                }),
            }
        }
        for event in deferred {
            self.respawns.push(event);
        }
        placed
    }

    /// Uniform draw among the empty cells of a region, excluding the agent.
    /// Rejection sampling with an exhaustive fallback keeps the draw exactly
    /// uniform while staying O(1) on sparse regions.
    pub fn sample_empty_in_region(&mut self, region: usize) -> Option<Position> {
        let r = self.regions[region];
        if r.is_empty() {
            return None;
        }
        let free =
            |grid: &Grid, p: Position, agent: Position| grid.get(p) == Cell::Empty && p != agent;
        for _ in 0..REJECTION_TRIES {
            let p = Position::new(
                self.rng.respawn.random_range(r.x0..r.x1),
                self.rng.respawn.random_range(r.y0..r.y1),
            );
            if free(&self.grid, p, self.agent) {
                return Some(p);
            }
        }
        let count = r
            .positions()
            .filter(|&p| free(&self.grid, p, self.agent))
            .count();
        if count == 0 {
            return None;
        }
        let k = self.rng.respawn.random_range(0..count);
        r.positions()
            .filter(|&p| free(&self.grid, p, self.agent))
            .nth(k)
    }

    /// Puts a new species into `slot`. Objects on the grid and pending
    /// respawns refer to the slot, so they all become the new species.
    pub fn replace_species(&mut self, slot: Slot, id: SpeciesId, name: String, color: Color) {
        let s = &mut self.species[slot as usize];
        s.id = id;
        s.name = name;
        s.color = color;
        self.consumption[slot as usize] = 0;
    }

    /// Objects of `slot` on the grid plus its pending respawns.
    pub fn lineage_population(&self, slot: Slot) -> usize {
        self.grid.count_slot(slot)
            + self
                .respawns
                .heap
                .iter()
                .filter(|e| e.event.slot == slot)
                .count()
    }

    /// Biome index containing `p`, if any.
    pub fn biome_at(&self, p: Position) -> Option<usize> {
        self.regions.iter().position(|r| r.contains(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn species(name: &str, respawn: RespawnRule) -> Species {
        Species {
            id: SpeciesId(0),
            name: name.into(),
            color: [200, 100, 50],
            blocking: false,
            biome: 0,
            respawn,
        }
    }

    fn fixed(steps: u64, placement: PlacementRule) -> RespawnRule {
        RespawnRule {
            delay: RespawnDelay::Fixed { steps },
            placement,
        }
    }

    #[test]
    fn wrap_examples() {
        let d = Dims::new(15, 15);
        assert_eq!(wrap(Position::new(0, 0), 0, -1, d), Position::new(0, 14));
        assert_eq!(wrap(Position::new(7, 7), 0, 0, d), Position::new(7, 7));
        assert_eq!(wrap(Position::new(14, 3), 1, 0, d), Position::new(0, 3));
    }

    proptest! {
        #[test]
        fn wrap_is_invertible(w in 1u32..64, h in 1u32..64, x in 0u32..64, y in 0u32..64,
                              dx in -200i64..200, dy in -200i64..200) {
            let d = Dims::new(w, h);
            let p = Position::new(x % w, y % h);
            let q = wrap(p, dx, dy, d);
            prop_assert!(d.contains(q));
            prop_assert_eq!(wrap(q, -dx, -dy, d), p);
        }
    }

    #[test]
    fn collect_moves_and_schedules() {
        let mut w = WorldState::new(
            Dims::new(3, 3),
            vec![species("morel", fixed(5, PlacementRule::Original))],
            vec![Region::new(0, 0, 3, 3)],
            Position::new(1, 1),
            0,
        );
        w.set_cell(Position::new(1, 0), Cell::Object(0));
        let out = w.apply_action(Action::Up);
        assert_eq!(out.new_pos, Position::new(1, 0));
        assert_eq!(out.collected, Some(0));
        assert_eq!(w.grid().get(Position::new(1, 0)), Cell::Empty);
        assert_eq!(w.consumption(0), 1);
        let events = w.respawn_queue().sorted();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].due_tick, 5);
        assert_eq!(
            events[0].placement,
            Placement::Original(Position::new(1, 0))
        );
    }

    #[test]
    fn wall_blocks_movement() {
        let mut w = WorldState::new(Dims::new(3, 3), vec![], vec![], Position::new(1, 1), 0);
        w.set_cell(Position::new(2, 1), Cell::Wall);
        let out = w.apply_action(Action::Right);
        assert_eq!(out.new_pos, Position::new(1, 1));
        assert_eq!(out.collected, None);
        assert_eq!(w.agent(), Position::new(1, 1));
    }

    #[test]
    fn move_left_wraps_onto_empty() {
        let mut w = WorldState::new(Dims::new(20, 20), vec![], vec![], Position::new(0, 5), 0);
        let out = w.apply_action(Action::Left);
        assert_eq!(
            out,
            MoveOutcome {
                new_pos: Position::new(19, 5),
                collected: None
            }
        );
    }

    #[test]
    fn blocking_object_is_not_collected() {
        let mut rock = species("rock", RespawnRule::NEVER);
        rock.blocking = true;
        let mut w = WorldState::new(
            Dims::new(3, 1),
            vec![rock],
            vec![Region::new(0, 0, 3, 1)],
            Position::new(0, 0),
            0,
        );
        w.set_cell(Position::new(1, 0), Cell::Object(0));
        let out = w.apply_action(Action::Right);
        assert_eq!(out.new_pos, Position::new(0, 0));
        assert_eq!(w.consumption(0), 0);
    }

    #[test]
    fn respawn_restores_original_cell() {
        let mut w = WorldState::new(
            Dims::new(3, 3),
            vec![species("a", fixed(10, PlacementRule::Original))],
            vec![Region::new(0, 0, 3, 3)],
            Position::new(1, 1),
            0,
        );
        w.set_cell(Position::new(2, 1), Cell::Object(0));
        w.apply_action(Action::Right);
        w.apply_action(Action::Left);
        for _ in 0..9 {
            w.advance_tick();
            assert!(w.process_respawns().is_empty());
        }
        w.advance_tick();
        assert_eq!(w.tick(), 10);
        assert_eq!(w.process_respawns(), vec![(0, Position::new(2, 1))]);
        assert_eq!(w.grid().get(Position::new(2, 1)), Cell::Object(0));
    }

    /// 2×1 world: the agent collects at x=1 and parks there. Stepping the
    /// deferral chain by hand: event due at tick 1 is deferred to 2, 3, ...
    /// while occupied, and lands the first tick after the agent leaves.
    #[test]
    fn respawn_deferred_while_agent_occupies_cell() {
        let mut w = WorldState::new(
            Dims::new(2, 1),
            vec![species("a", fixed(1, PlacementRule::Original))],
            vec![Region::new(0, 0, 2, 1)],
            Position::new(0, 0),
            0,
        );
        let spawn = Position::new(1, 0);
        w.set_cell(spawn, Cell::Object(0));
        assert_eq!(w.apply_action(Action::Right).collected, Some(0));
        // Parking: moving Up/Down in a height-1 world returns to the same cell.
        for expected_due in 2..6 {
            w.advance_tick();
            assert!(w.process_respawns().is_empty());
            assert_eq!(w.respawn_queue().sorted()[0].due_tick, expected_due);
            w.apply_action(Action::Up);
            assert_eq!(w.agent(), spawn);
        }
        w.apply_action(Action::Left);
        w.advance_tick();
        assert_eq!(w.process_respawns(), vec![(0, spawn)]);
    }

    #[test]
    fn random_respawn_avoids_agent_and_objects() {
        let mut w = WorldState::new(
            Dims::new(2, 1),
            vec![species("a", fixed(1, PlacementRule::RandomInRegion))],
            vec![Region::new(0, 0, 2, 1)],
            Position::new(0, 0),
            3,
        );
        w.set_cell(Position::new(1, 0), Cell::Object(0));
        w.apply_action(Action::Right);
        // Only free cell is (0,0), now vacated by the agent.
        w.advance_tick();
        assert_eq!(w.process_respawns(), vec![(0, Position::new(0, 0))]);
    }

    #[test]
    fn random_respawn_defers_when_region_full() {
        let mut w = WorldState::new(
            Dims::new(2, 1),
            vec![species("a", fixed(1, PlacementRule::RandomInRegion))],
            vec![Region::new(1, 0, 2, 1)],
            Position::new(0, 0),
            3,
        );
        w.set_cell(Position::new(1, 0), Cell::Object(0));
        w.apply_action(Action::Right);
        w.advance_tick();
        assert!(w.process_respawns().is_empty());
        assert_eq!(w.respawn_queue().len(), 1);
        w.apply_action(Action::Left);
        w.advance_tick();
        assert_eq!(w.process_respawns(), vec![(0, Position::new(1, 0))]);
    }

    #[test]
    fn uniform_delay_within_bounds() {
        let mut w = WorldState::new(
            Dims::new(2, 1),
            vec![species(
                "a",
                RespawnRule {
                    delay: RespawnDelay::Uniform { lo: 9, hi: 11 },
                    placement: PlacementRule::Original,
                },
            )],
            vec![Region::new(0, 0, 2, 1)],
            Position::new(0, 0),
            11,
        );
        let mut seen = [false; 3];
        for _ in 0..200 {
            let t = w.tick();
            w.set_cell(Position::new(1, 0), Cell::Object(0));
            w.set_agent(Position::new(0, 0));
            w.apply_action(Action::Right);
            let due = w.respawn_queue().sorted().last().unwrap().due_tick;
            let m = due - t;
            assert!((9..=11).contains(&m));
            seen[(m - 9) as usize] = true;
            w.advance_tick();
        }
        assert_eq!(seen, [true; 3]);
    }

    #[test]
    fn queue_is_fifo_among_equal_ticks() {
        let mut q = RespawnQueue::default();
        for slot in 0..4 {
            q.push(RespawnEvent {
                due_tick: 3,
                slot,
                placement: Placement::RandomInRegion(0),
            });
        }
        q.push(RespawnEvent {
            due_tick: 1,
            slot: 9,
            placement: Placement::RandomInRegion(0),
        });
        let order: Vec<Slot> = q.sorted().iter().map(|e| e.slot).collect();
        assert_eq!(order, vec![9, 0, 1, 2, 3]);
    }

    #[test]
    fn torus_manhattan() {
        let d = Dims::new(15, 15);
        assert_eq!(
            wrap_manhattan(Position::new(0, 0), Position::new(0, 14), d),
            1
        );
        assert_eq!(
            wrap_manhattan(Position::new(0, 0), Position::new(7, 7), d),
            14
        );
        assert_eq!(
            wrap_manhattan(Position::new(0, 0), Position::new(8, 8), d),
            14
        );
    }
}
