//! Scripted reference policies.
//!
//! * [`RandomPolicy`]: uniform over the four actions.
//! * [`SearchNearest`]: breadth-first search inside the agent's FOV window
//!   towards the closest visible positive object.
//! * [`OracleSearch`]: breadth-first search over the whole torus using the
//!   true current reward of every object.
//!
//! Both searches treat walls, blocking objects and negative-reward objects as
//! impassable, break ties in the order Up, Down, Left, Right and fall back to
//! a random unblocked neighbour when no goal is reachable.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::env::Forager;
use crate::observation::{extract_fov_into, Window};
use crate::rng::{stream_rng, SimRng, Stream};
use crate::world::{wrap, Action, Cell, Dims, Position};

/// What a search sees in one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Passability {
    Free,
    Goal,
    Blocked,
}

/// Reusable buffers for [`bfs`].
#[derive(Clone, Debug, Default)]
pub struct BfsScratch {
    seen: Vec<bool>,
    queue: VecDeque<(u32, u8, u32)>,
}

/// Breadth-first search on a `width × height` 4-connected grid, wrapping at
/// the edges when `torus` is set. Returns the first action of a shortest path
/// to the nearest goal and that path's length. The start cell itself is never
/// a goal.
pub fn bfs(
    width: u32,
    height: u32,
    torus: bool,
    start: Position,
    mut cell: impl FnMut(Position) -> Passability,
    scratch: &mut BfsScratch,
) -> Option<(Action, u32)> {
    let dims = Dims::new(width, height);
    scratch.seen.clear();
    scratch.seen.resize(dims.area(), false);
    scratch.queue.clear();
    scratch.seen[dims.index(start)] = true;
    scratch
        .queue
        .push_back((dims.index(start) as u32, u8::MAX, 0));

    while let Some((idx, first, dist)) = scratch.queue.pop_front() {
        let p = dims.position(idx as usize);
        for a in Action::ALL {
            let (dx, dy) = a.delta();
            let q = if torus {
                wrap(p, dx, dy, dims)
            } else {
                let x = p.x as i64 + dx;
                let y = p.y as i64 + dy;
                if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
                    continue;
                }
                Position::new(x as u32, y as u32)
            };
            let qi = dims.index(q);
            if scratch.seen[qi] {
                continue;
            }
            scratch.seen[qi] = true;
            let first = if first == u8::MAX {
                a.index() as u8
            } else {
                first
            };
            match cell(q) {
                Passability::Blocked => {}
                Passability::Goal => {
                    return Some((Action::from_index(first as usize).unwrap(), dist + 1));
                }
                Passability::Free => scratch.queue.push_back((qi as u32, first, dist + 1)),
            }
        }
    }
    None
}

/// Shortest path on the torus from `start` to any cell in `goals`, never
/// entering `blocked`.
pub fn bfs_torus(
    dims: Dims,
    start: Position,
    is_goal: impl Fn(Position) -> bool,
    is_blocked: impl Fn(Position) -> bool,
) -> Option<(Action, u32)> {
    bfs(
        dims.width,
        dims.height,
        true,
        start,
        |p| {
            if is_blocked(p) {
                Passability::Blocked
            } else if is_goal(p) {
                Passability::Goal
            } else {
                Passability::Free
            }
        },
        &mut BfsScratch::default(),
    )
}

fn classify(env: &Forager, cell: Cell) -> Passability {
    match cell {
        Cell::Empty => Passability::Free,
        Cell::Wall => Passability::Blocked,
        Cell::Object(slot) => {
            if env.world().species()[slot as usize].blocking {
                return Passability::Blocked;
            }
            let r = env.species_reward(slot);
            if r > 0.0 {
                Passability::Goal
            } else if r < 0.0 {
                Passability::Blocked
            } else {
                Passability::Free
            }
        }
    }
}

/// Uniform over the agent's neighbours that are not blocked; uniform over all
/// four actions when every neighbour is.
pub fn random_unblocked(env: &Forager, rng: &mut SimRng) -> Action {
    let world = env.world();
    let mut open = [Action::Up; 4];
    let mut n = 0;
    for a in Action::ALL {
        let (dx, dy) = a.delta();
        let q = wrap(world.agent(), dx, dy, world.dims());
        if classify(env, world.grid().get(q)) != Passability::Blocked {
            open[n] = a;
            n += 1;
        }
    }
    if n == 0 {
        Action::ALL[rng.random_range(0..4)]
    } else {
        open[rng.random_range(0..n)]
    }
}

pub trait Policy: Send {
    fn act(&mut self, env: &Forager) -> Action;
}

#[derive(Clone, Debug)]
pub struct RandomPolicy {
    rng: SimRng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: stream_rng(seed, Stream::Policy),
        }
    }

    pub fn next_action(&mut self) -> Action {
        Action::ALL[self.rng.random_range(0..4)]
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _env: &Forager) -> Action {
        self.next_action()
    }
}

/// Always `Up`; the benchmark policy.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstantUp;

impl Policy for ConstantUp {
    fn act(&mut self, _env: &Forager) -> Action {
        Action::Up
    }
}

#[derive(Clone, Debug)]
pub struct SearchNearest {
    rng: SimRng,
    window: Window,
    scratch: BfsScratch,
}

impl SearchNearest {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: stream_rng(seed, Stream::Policy),
            window: Window::default(),
            scratch: BfsScratch::default(),
        }
    }
}

impl Policy for SearchNearest {
    fn act(&mut self, env: &Forager) -> Action {
        let world = env.world();
        extract_fov_into(world.grid(), world.agent(), env.fov(), &mut self.window);
        let size = self.window.size() as u32;
        let c = self.window.center() as u32;
        let window = &self.window;
        let found = bfs(
            size,
            size,
            false,
            Position::new(c, c),
            |p| classify(env, window.get(p.y as usize, p.x as usize)),
            &mut self.scratch,
        );
        match found {
            Some((a, _)) => a,
            None => random_unblocked(env, &mut self.rng),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleSearch {
    rng: SimRng,
    scratch: BfsScratch,
}

impl OracleSearch {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: stream_rng(seed, Stream::Policy),
            scratch: BfsScratch::default(),
        }
    }
}

impl Policy for OracleSearch {
    fn act(&mut self, env: &Forager) -> Action {
        let world = env.world();
        let dims = world.dims();
        let grid = world.grid();
        let found = bfs(
            dims.width,
            dims.height,
            true,
            world.agent(),
            |p| classify(env, grid.get(p)),
            &mut self.scratch,
        );
        match found {
            Some((a, _)) => a,
            None => random_unblocked(env, &mut self.rng),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Random,
    Nearest,
    Oracle,
    Up,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Random,
        PolicyKind::Nearest,
        PolicyKind::Oracle,
        PolicyKind::Up,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::Nearest => "nearest",
            PolicyKind::Oracle => "oracle",
            PolicyKind::Up => "up",
        }
    }

    pub fn build(self, seed: u64) -> Box<dyn Policy> {
        match self {
            PolicyKind::Random => Box::new(RandomPolicy::new(seed)),
            PolicyKind::Nearest => Box::new(SearchNearest::new(seed)),
            PolicyKind::Oracle => Box::new(OracleSearch::new(seed)),
            PolicyKind::Up => Box::new(ConstantUp),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown policy `{s}` (expected random, nearest, oracle or up)"))
    }
}
