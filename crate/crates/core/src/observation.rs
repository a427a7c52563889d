//! Agent-centred observations.
//!
//! The grid tensor has shape `(fov, fov, channels)` and is laid out row-major
//! as `(row, col, channel)`: element `(i, j, c)` lives at
//! `(i * fov + j) * channels + c`. Row `i`, column `j` of the window is the
//! world cell at offset `(j - fov/2, i - fov/2)` from the agent.
//!
//! The auxiliary vector is the concatenation, in this order, of: last-action
//! one-hot (4), last reward (1), reward trace (1), cue (one per biome). Parts
//! that are switched off contribute nothing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{wrap, Action, Cell, Color, Grid, Position, Slot};

pub const AGENT_COLOR: Color = [0, 0, 255];
pub const WALL_COLOR: Color = [0, 0, 0];
pub const BACKGROUND_COLOR: Color = [255, 255, 255];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ObservationError {
    #[error("color {0:?} has no plane in the palette")]
    UnknownColor(Color),
    #[error("species slot {0} is not in the palette")]
    UnknownSpecies(Slot),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    /// One occupancy plane per species (plus walls).
    BinaryChannels,
    /// One plane per distinct species color (plus walls).
    ColorOneHot,
    Rgb,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSpec {
    pub fov: u32,
    pub mode: ObservationMode,
    #[serde(default)]
    pub include_last_action: bool,
    #[serde(default)]
    pub include_last_reward: bool,
    /// Decay of the exponentially weighted reward trace, if enabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_trace: Option<f64>,
    #[serde(default)]
    pub include_cue: bool,
}

impl ObservationSpec {
    pub const fn new(fov: u32, mode: ObservationMode) -> Self {
        Self {
            fov,
            mode,
            include_last_action: false,
            include_last_reward: false,
            reward_trace: None,
            include_cue: false,
        }
    }

    pub fn aux_len(&self, biomes: usize) -> usize {
        4 * self.include_last_action as usize
            + self.include_last_reward as usize
            + self.reward_trace.is_some() as usize
            + if self.include_cue { biomes } else { 0 }
    }
}

/// A square window of cells, row-major.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Window {
    size: usize,
    cells: Vec<Cell>,
}

impl Window {
    pub fn from_cells(size: usize, cells: Vec<Cell>) -> Self {
        assert_eq!(cells.len(), size * size);
        Self { size, cells }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.size + col]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn center(&self) -> usize {
        self.size / 2
    }
}

/// The `fov × fov` window centred on `center`, wrapping around the torus.
pub fn extract_fov(grid: &Grid, center: Position, fov: usize) -> Window {
    let mut w = Window::default();
    extract_fov_into(grid, center, fov, &mut w);
    w
}

pub fn extract_fov_into(grid: &Grid, center: Position, fov: usize, out: &mut Window) {
    let dims = grid.dims();
    let half = (fov / 2) as i64;
    out.size = fov;
    out.cells.clear();
    out.cells.reserve(fov * fov);
    let origin = wrap(center, -half, -half, dims);
    let (w, h) = (dims.width as usize, dims.height as usize);
    let cells = grid.cells();
    for i in 0..fov {
        let y = (origin.y as usize + i) % h;
        let row = &cells[y * w..(y + 1) * w];
        let mut x = origin.x as usize;
        for _ in 0..fov {
            out.cells.push(row[x]);
            x += 1;
            if x == w {
                x = 0;
            }
        }
    }
}

/// Channel layout and colors used to encode windows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Palette {
    /// Current color of every species slot.
    pub species_colors: Vec<Color>,
    /// Plane colors for [`ObservationMode::ColorOneHot`], in plane order.
    pub color_planes: Vec<Color>,
    /// Whether a trailing wall plane is emitted in the plane-based modes.
    pub wall_plane: bool,
}

impl Palette {
    /// Color planes are the distinct species colors in order of first use.
    pub fn new(species_colors: Vec<Color>, wall_plane: bool) -> Self {
        let mut color_planes: Vec<Color> = Vec::new();
        for c in &species_colors {
            if !color_planes.contains(c) {
                color_planes.push(*c);
            }
        }
        Self {
            species_colors,
            color_planes,
            wall_plane,
        }
    }

    pub fn channels(&self, mode: ObservationMode) -> usize {
        match mode {
            ObservationMode::BinaryChannels => self.species_colors.len() + self.wall_plane as usize,
            ObservationMode::ColorOneHot => self.color_planes.len() + self.wall_plane as usize,
            ObservationMode::Rgb => 3,
        }
    }

    fn plane_of(
        &self,
        mode: ObservationMode,
        cell: Cell,
    ) -> Result<Option<usize>, ObservationError> {
        Ok(match (mode, cell) {
            (_, Cell::Empty) => None,
            (ObservationMode::BinaryChannels, Cell::Wall) => {
                self.wall_plane.then_some(self.species_colors.len())
            }
            (ObservationMode::ColorOneHot, Cell::Wall) => {
                self.wall_plane.then_some(self.color_planes.len())
            }
            (ObservationMode::BinaryChannels, Cell::Object(s)) => {
                if (s as usize) >= self.species_colors.len() {
                    return Err(ObservationError::UnknownSpecies(s));
                }
                Some(s as usize)
            }
            (ObservationMode::ColorOneHot, Cell::Object(s)) => {
                let color = self.color_of(s)?;
                Some(
                    self.color_planes
                        .iter()
                        .position(|&c| c == color)
                        .ok_or(ObservationError::UnknownColor(color))?,
                )
            }
            (ObservationMode::Rgb, _) => unreachable!("rgb has no planes"),
        })
    }

    fn color_of(&self, slot: Slot) -> Result<Color, ObservationError> {
        self.species_colors
            .get(slot as usize)
            .copied()
            .ok_or(ObservationError::UnknownSpecies(slot))
    }
}

/// Encodes a window as a `(fov, fov, channels)` byte tensor.
pub fn encode(
    window: &Window,
    mode: ObservationMode,
    palette: &Palette,
) -> Result<Vec<u8>, ObservationError> {
    let mut out = Vec::new();
    encode_into(window, mode, palette, &mut out)?;
    Ok(out)
}

pub fn encode_into(
    window: &Window,
    mode: ObservationMode,
    palette: &Palette,
    out: &mut Vec<u8>,
) -> Result<(), ObservationError> {
    let channels = palette.channels(mode);
    out.clear();
    out.resize(window.cells.len() * channels, 0);
    match mode {
        ObservationMode::Rgb => {
            for (px, &cell) in out.chunks_exact_mut(3).zip(&window.cells) {
                let color = match cell {
                    Cell::Empty => BACKGROUND_COLOR,
                    Cell::Wall => WALL_COLOR,
                    Cell::Object(s) => palette.color_of(s)?,
                };
                px.copy_from_slice(&color);
            }
            let c = window.center();
            let i = (c * window.size + c) * 3;
            out[i..i + 3].copy_from_slice(&AGENT_COLOR);
        }
        _ => {
            for (k, &cell) in window.cells.iter().enumerate() {
                if let Some(plane) = palette.plane_of(mode, cell)? {
                    out[k * channels + plane] = 1;
                }
            }
        }
    }
    Ok(())
}

/// Inverse of [`ObservationMode::BinaryChannels`] encoding. Planes past the
/// species count decode as walls.
pub fn decode_binary(tensor: &[u8], fov: usize, species: usize, wall_plane: bool) -> Window {
    let channels = species + wall_plane as usize;
    let cells = tensor
        .chunks_exact(channels)
        .map(|planes| match planes.iter().position(|&v| v == 1) {
            None => Cell::Empty,
            Some(p) if p < species => Cell::Object(p as Slot),
            Some(_) => Cell::Wall,
        })
        .collect();
    Window::from_cells(fov, cells)
}

/// Exponentially weighted trace of rewards: `v ← β v + (1 − β) r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardTrace {
    pub value: f64,
    pub decay: f64,
}

impl RewardTrace {
    pub const fn new(decay: f64) -> Self {
        Self { value: 0.0, decay }
    }

    pub fn update(&mut self, reward: f64) -> f64 {
        self.value = self.decay * self.value + (1.0 - self.decay) * reward;
        self.value
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Observation {
    pub fov: usize,
    pub channels: usize,
    /// Row-major `(row, col, channel)`.
    pub grid: Vec<u8>,
    pub aux: Vec<f64>,
}

impl Observation {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.fov, self.fov, self.channels)
    }

    pub fn at(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.grid[(row * self.fov + col) * self.channels + channel]
    }
}

/// Writes the auxiliary vector for the enabled inputs. Before the first step
/// the action one-hot is all zeros and the last reward is 0.
pub fn assemble_aux(
    spec: &ObservationSpec,
    last_action: Option<Action>,
    last_reward: f64,
    trace: Option<&RewardTrace>,
    cue: Option<&[f64]>,
    out: &mut Vec<f64>,
) {
    out.clear();
    if spec.include_last_action {
        let mut onehot = [0.0; 4];
        if let Some(a) = last_action {
            onehot[a.index()] = 1.0;
        }
        out.extend_from_slice(&onehot);
    }
    if spec.include_last_reward {
        out.push(last_reward);
    }
    if spec.reward_trace.is_some() {
        out.push(trace.map_or(0.0, |t| t.value));
    }
    if spec.include_cue {
        if let Some(cue) = cue {
            out.extend_from_slice(cue);
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn assemble(
    grid_tensor: Vec<u8>,
    fov: usize,
    channels: usize,
    last_action: Option<Action>,
    last_reward: f64,
    trace: Option<&RewardTrace>,
    cue: Option<&[f64]>,
    spec: &ObservationSpec,
) -> Observation {
    let mut aux = Vec::new();
    assemble_aux(spec, last_action, last_reward, trace, cue, &mut aux);
    Observation {
        fov,
        channels,
        grid: grid_tensor,
        aux,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Dims;
    use proptest::prelude::*;

    /// Reference: roll the whole grid so the agent sits at the window centre,
    /// tiling enough copies to cover windows larger than the world, and crop.
    fn shift_and_crop(grid: &Grid, agent: Position, fov: usize) -> Window {
        let d = grid.dims();
        let (w, h) = (d.width as usize, d.height as usize);
        let half = fov / 2;
        // Agent copy far enough right/down that the crop origin is non-negative.
        let ax = agent.x as usize + (half / w + 1) * w;
        let ay = agent.y as usize + (half / h + 1) * h;
        let tw = (ax + half) / w * w + w;
        let th = (ay + half) / h * h + h;
        let mut tiled = vec![Cell::Empty; tw * th];
        for y in 0..th {
            for x in 0..tw {
                tiled[y * tw + x] = grid.get(Position::new((x % w) as u32, (y % h) as u32));
            }
        }
        let mut cells = Vec::with_capacity(fov * fov);
        for i in 0..fov {
            for j in 0..fov {
                cells.push(tiled[(ay - half + i) * tw + (ax - half + j)]);
            }
        }
        Window::from_cells(fov, cells)
    }

    fn random_grid(w: u32, h: u32, seed: &[u8]) -> Grid {
        let cells = (0..(w * h) as usize)
            .map(|i| match seed[i % seed.len()] % 5 {
                0 => Cell::Wall,
                1 => Cell::Object(0),
                2 => Cell::Object(1),
                _ => Cell::Empty,
            })
            .collect();
        Grid::from_cells(Dims::new(w, h), cells)
    }

    #[test]
    fn corner_object_wraps_into_top_left() {
        let mut g = Grid::new(Dims::new(15, 15));
        g.set(Position::new(14, 14), Cell::Object(0));
        let w = extract_fov(&g, Position::new(0, 0), 3);
        assert_eq!(w.get(0, 0), Cell::Object(0));
        assert_eq!(w.cells().iter().filter(|c| **c != Cell::Empty).count(), 1);
    }

    #[test]
    fn full_world_window_is_cyclic_shift() {
        let g = random_grid(15, 15, &[3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5]);
        let agent = Position::new(4, 11);
        let w = extract_fov(&g, agent, 15);
        for i in 0..15 {
            for j in 0..15 {
                let p = wrap(agent, j as i64 - 7, i as i64 - 7, g.dims());
                assert_eq!(w.get(i, j), g.get(p));
            }
        }
        let mut a: Vec<_> = w.cells().to_vec();
        let mut b: Vec<_> = g.cells().to_vec();
        a.sort_by_key(|c| format!("{c:?}"));
        b.sort_by_key(|c| format!("{c:?}"));
        assert_eq!(a, b);
    }

    #[test]
    fn empty_world_encodes_to_zeros() {
        let g = Grid::new(Dims::new(9, 9));
        let w = extract_fov(&g, Position::new(3, 3), 5);
        assert!(w.cells().iter().all(|&c| c == Cell::Empty));
        let p = Palette::new(vec![[1, 2, 3], [4, 5, 6]], false);
        let t = encode(&w, ObservationMode::BinaryChannels, &p).unwrap();
        assert_eq!(t.len(), 5 * 5 * 2);
        assert!(t.iter().all(|&v| v == 0));
    }

    #[test]
    fn shared_colors_share_a_plane() {
        let purple = [128, 0, 128];
        let yellow = [230, 200, 0];
        // Four species: purple/yellow in two biomes.
        let p = Palette::new(vec![purple, yellow, purple, yellow], true);
        assert_eq!(p.channels(ObservationMode::ColorOneHot), 3);
        let w = Window::from_cells(
            3,
            vec![
                Cell::Object(0),
                Cell::Object(2),
                Cell::Object(1),
                Cell::Object(3),
                Cell::Empty,
                Cell::Wall,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ],
        );
        let t = encode(&w, ObservationMode::ColorOneHot, &p).unwrap();
        assert_eq!(&t[0..3], &[1, 0, 0]);
        assert_eq!(&t[3..6], &[1, 0, 0]);
        assert_eq!(&t[6..9], &[0, 1, 0]);
        assert_eq!(&t[9..12], &[0, 1, 0]);
        assert_eq!(&t[15..18], &[0, 0, 1]);
    }

    #[test]
    fn unknown_color_is_an_error() {
        let mut p = Palette::new(vec![[10, 10, 10]], false);
        p.species_colors[0] = [11, 11, 11];
        let w = Window::from_cells(1, vec![Cell::Object(0)]);
        assert_eq!(
            encode(&w, ObservationMode::ColorOneHot, &p),
            Err(ObservationError::UnknownColor([11, 11, 11]))
        );
    }

    #[test]
    fn rgb_paints_agent_walls_and_background() {
        let p = Palette::new(vec![[200, 10, 10]], false);
        let w = Window::from_cells(
            3,
            vec![
                Cell::Wall,
                Cell::Object(0),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ],
        );
        let t = encode(&w, ObservationMode::Rgb, &p).unwrap();
        assert_eq!(&t[0..3], &WALL_COLOR);
        assert_eq!(&t[3..6], &[200, 10, 10]);
        assert_eq!(&t[6..9], &BACKGROUND_COLOR);
        assert_eq!(&t[12..15], &AGENT_COLOR);
    }

    #[test]
    fn trace_updates() {
        let mut t = RewardTrace::new(0.9);
        assert!((t.update(1.0) - 0.1).abs() < 1e-15);
        assert!((t.update(0.0) - 0.09).abs() < 1e-15);
        let mut t = RewardTrace::new(0.9);
        for _ in 0..2000 {
            t.update(3.0);
        }
        assert!((t.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn aux_layout() {
        let all = ObservationSpec {
            include_last_action: true,
            include_last_reward: true,
            reward_trace: Some(0.9),
            include_cue: true,
            ..ObservationSpec::new(5, ObservationMode::Rgb)
        };
        assert_eq!(all.aux_len(4), 10);
        let trace = RewardTrace {
            value: 0.25,
            decay: 0.9,
        };
        let cue = [0.0, 0.0, 1.0, 0.0];
        let obs = assemble(
            vec![],
            5,
            3,
            Some(Action::Left),
            -2.0,
            Some(&trace),
            Some(&cue),
            &all,
        );
        assert_eq!(
            obs.aux,
            vec![0.0, 0.0, 1.0, 0.0, -2.0, 0.25, 0.0, 0.0, 1.0, 0.0]
        );

        let none = ObservationSpec::new(5, ObservationMode::Rgb);
        assert_eq!(none.aux_len(4), 0);
        let obs = assemble(vec![], 5, 3, Some(Action::Up), 1.0, None, None, &none);
        assert!(obs.aux.is_empty());

        let first = ObservationSpec {
            include_last_action: true,
            include_last_reward: true,
            ..none
        };
        let obs = assemble(vec![], 5, 3, None, 0.0, None, None, &first);
        assert_eq!(obs.aux, vec![0.0; 5]);
    }

    fn arb_world() -> impl Strategy<Value = (Grid, Position)> {
        (1u32..=32, 1u32..=32).prop_flat_map(|(w, h)| {
            (prop::collection::vec(0u8..5, (w * h) as usize), 0..w, 0..h)
                .prop_map(move |(seed, x, y)| (random_grid(w, h, &seed), Position::new(x, y)))
        })
    }

    proptest! {
        #[test]
        fn extract_matches_shift_and_crop((g, agent) in arb_world(), half in 0usize..20) {
            let fov = 2 * half + 1;
            prop_assert_eq!(extract_fov(&g, agent, fov), shift_and_crop(&g, agent, fov));
        }

        #[test]
        fn translation_equivariant((g, agent) in arb_world(), dx in 0i64..40, dy in 0i64..40, half in 0usize..6) {
            let d = g.dims();
            let mut shifted = Grid::new(d);
            for (i, &c) in g.cells().iter().enumerate() {
                shifted.set(wrap(d.position(i), dx, dy, d), c);
            }
            let fov = 2 * half + 1;
            prop_assert_eq!(
                extract_fov(&g, agent, fov),
                extract_fov(&shifted, wrap(agent, dx, dy, d), fov)
            );
        }

        #[test]
        fn binary_round_trip_and_channel_sum((g, agent) in arb_world(), half in 0usize..6) {
            let fov = 2 * half + 1;
            let w = extract_fov(&g, agent, fov);
            let p = Palette::new(vec![[1, 1, 1], [2, 2, 2]], true);
            let t = encode(&w, ObservationMode::BinaryChannels, &p).unwrap();
            prop_assert!(t.chunks_exact(3).all(|px| px.iter().map(|&v| v as u32).sum::<u32>() <= 1));
            prop_assert_eq!(decode_binary(&t, fov, 2, true), w);
        }
    }
}
