//! Top-down images of the whole world.
//!
//! Empty cells are white, walls black, objects their species color and the
//! agent blue. The agent's field of view is shaded light blue, wrapping
//! around the edges like the observation does.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Error;
use crate::observation::{AGENT_COLOR, BACKGROUND_COLOR, WALL_COLOR};
use crate::world::{wrap, Cell, Color, WorldState};

pub const OVERLAY_COLOR: Color = [135, 206, 250];
pub const OVERLAY_ALPHA: f64 = 0.35;

/// An 8-bit RGB raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32, fill: Color) -> Self {
        let pixels = fill.repeat(width as usize * height as usize);
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn pixel(&self, x: u32, y: u32) -> Color {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn fill_block(&mut self, x0: u32, y0: u32, size: u32, color: Color) {
        for y in y0..y0 + size {
            for x in x0..x0 + size {
                let i = (y as usize * self.width as usize + x as usize) * 3;
                self.pixels[i..i + 3].copy_from_slice(&color);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderOptions {
    /// Pixels per cell side.
    pub scale: u32,
    /// Overlay width in cells; `None` disables it.
    pub fov: Option<usize>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            scale: 8,
            fov: None,
        }
    }
}

pub fn blend(base: Color, over: Color, alpha: f64) -> Color {
    let mix = |b: u8, o: u8| ((1.0 - alpha) * b as f64 + alpha * o as f64).round() as u8;
    [
        mix(base[0], over[0]),
        mix(base[1], over[1]),
        mix(base[2], over[2]),
    ]
}

pub fn render_frame(world: &WorldState, opts: RenderOptions) -> Image {
    let dims = world.dims();
    let s = opts.scale.max(1);
    let mut colors: Vec<Color> = world
        .grid()
        .cells()
        .iter()
        .map(|c| match c {
            Cell::Empty => BACKGROUND_COLOR,
            Cell::Wall => WALL_COLOR,
            Cell::Object(slot) => world.species()[*slot as usize].color,
        })
        .collect();
    if let Some(fov) = opts.fov {
        let half = (fov / 2) as i64;
        let mut covered = vec![false; dims.area()];
        for dy in -half..=half {
            for dx in -half..=half {
                covered[dims.index(wrap(world.agent(), dx, dy, dims))] = true;
            }
        }
        for (c, &hit) in colors.iter_mut().zip(&covered) {
            if hit {
                *c = blend(*c, OVERLAY_COLOR, OVERLAY_ALPHA);
            }
        }
    }
    colors[dims.index(world.agent())] = AGENT_COLOR;

    let mut img = Image::new(dims.width * s, dims.height * s, BACKGROUND_COLOR);
    for (i, &c) in colors.iter().enumerate() {
        let p = dims.position(i);
        img.fill_block(p.x * s, p.y * s, s, c);
    }
    img
}

/// Binary PPM (`P6`).
pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn write_ppm(img: &Image, path: &Path) -> Result<(), Error> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(&encode_ppm(img))?;
    f.flush()?;
    Ok(())
}

#[cfg(feature = "png")]
pub fn write_png(img: &Image, path: &Path) -> Result<(), Error> {
    image::save_buffer(
        path,
        &img.pixels,
        img.width,
        img.height,
        image::ExtendedColorType::Rgb8,
    )
    .map_err(|e| Error::Image(e.to_string()))
}

/// Writes PNG for a `.png` extension (needs the `png` feature), PPM otherwise.
pub fn write_image(img: &Image, path: &Path) -> Result<(), Error> {
    let is_png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        #[cfg(feature = "png")]
        return write_png(img, path);
        #[cfg(not(feature = "png"))]
        return Err(Error::Image(
            "PNG output needs the `png` feature; use a .ppm path".into(),
        ));
    }
    write_ppm(img, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Dims, Position, Region};

    fn empty_world(w: u32, h: u32, agent: Position) -> WorldState {
        WorldState::new(
            Dims::new(w, h),
            vec![],
            vec![Region::new(0, 0, w, h)],
            agent,
            0,
        )
    }

    #[test]
    fn empty_world_is_background_plus_agent() {
        let world = empty_world(4, 4, Position::new(1, 2));
        let img = render_frame(
            &world,
            RenderOptions {
                scale: 3,
                fov: None,
            },
        );
        assert_eq!((img.width, img.height), (12, 12));
        for y in 0..12 {
            for x in 0..12 {
                let want = if (x / 3, y / 3) == (1, 2) {
                    AGENT_COLOR
                } else {
                    BACKGROUND_COLOR
                };
                assert_eq!(img.pixel(x, y), want, "({x},{y})");
            }
        }
    }

    #[test]
    fn overlay_wraps_and_covers_fov_squared() {
        let world = empty_world(10, 8, Position::new(0, 7));
        let img = render_frame(
            &world,
            RenderOptions {
                scale: 1,
                fov: Some(5),
            },
        );
        let shaded = blend(BACKGROUND_COLOR, OVERLAY_COLOR, OVERLAY_ALPHA);
        let mut count = 0;
        for y in 0..8u32 {
            for x in 0..10u32 {
                let dx = crate::world::torus_delta(0, x, 10).abs();
                let dy = crate::world::torus_delta(7, y, 8).abs();
                let inside = dx <= 2 && dy <= 2;
                let px = img.pixel(x, y);
                if (x, y) == (0, 7) {
                    assert_eq!(px, AGENT_COLOR);
                    count += 1;
                } else if inside {
                    assert_eq!(px, shaded, "({x},{y})");
                    count += 1;
                } else {
                    assert_eq!(px, BACKGROUND_COLOR, "({x},{y})");
                }
            }
        }
        assert_eq!(count, 25);
    }

    #[test]
    fn ppm_header_and_size() {
        let img = Image::new(3, 2, [1, 2, 3]);
        let bytes = encode_ppm(&img);
        assert!(bytes.starts_with(b"P6\n3 2\n255\n"));
        assert_eq!(bytes.len(), b"P6\n3 2\n255\n".len() + 18);
    }

    #[cfg(feature = "png")]
    #[test]
    fn png_round_trip() {
        let world = empty_world(5, 3, Position::new(2, 1));
        let img = render_frame(
            &world,
            RenderOptions {
                scale: 2,
                fov: Some(3),
            },
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.png");
        write_image(&img, &path).unwrap();
        let back = image::open(&path).unwrap().to_rgb8();
        assert_eq!(back.dimensions(), (10, 6));
        assert_eq!(back.into_raw(), img.pixels);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let img = Image::new(1, 1, [0, 0, 0]);
        let err = write_image(&img, Path::new("/nonexistent-dir/x.ppm")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
