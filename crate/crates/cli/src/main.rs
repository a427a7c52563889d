use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use forager::bench::bench;
use forager::metrics::RunMetrics;
use forager::render::{render_frame, write_image, RenderOptions};
use forager::run::{run_with, DEFAULT_WINDOW};
use forager::trajectory::{StepRecord, TrajectoryWriter};
use forager::{parse_config, serialize_config, Forager, PolicyKind, Preset, TaskConfig};

#[derive(Parser)]
#[command(name = "forager", version, about = "Forager gridworld simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in task, see `forager presets`.
    #[arg(long)]
    preset: Option<Preset>,
    /// TOML task file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a baseline policy and report reward statistics.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "random")]
        policy: PolicyKind,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// FOV for the morel preset.
        #[arg(long)]
        fov: Option<u32>,
        /// Steps per reported window mean.
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: u64,
        /// Write one JSON record per step to this file.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Save a frame every K steps (requires --out).
        #[arg(long, requires = "out")]
        render_every: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the metrics as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Step a preset under the constant-Up policy and report speed and memory.
    Bench {
        #[arg(long, default_value = "forager-extra-large")]
        preset: Preset,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 1_000)]
        sample_every: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render the initial world to a PPM (or PNG) file.
    Render {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Pixels per cell.
        #[arg(long, default_value_t = 8)]
        scale: u32,
        /// Skip the FOV overlay.
        #[arg(long)]
        no_overlay: bool,
    },
    /// List the built-in presets.
    Presets,
    /// Check a task file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print a preset as a canonical TOML task file.
    Export {
        #[arg(long)]
        preset: Preset,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        fov: Option<u32>,
    },
}

/// Exit status classes.
enum Failure {
    Config(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

trait Classify<T> {
    fn config_err(self) -> Result<T, Failure>;
    fn io_err(self) -> Result<T, Failure>;
}

impl<T> Classify<T> for Result<T> {
    fn config_err(self) -> Result<T, Failure> {
        self.map_err(Failure::Config)
    }
    fn io_err(self) -> Result<T, Failure> {
        self.map_err(Failure::Io)
    }
}

fn load(source: &Source, seed: u64, fov: Option<u32>) -> Result<TaskConfig, Failure> {
    if let Some(preset) = source.preset {
        return preset
            .build(seed, fov)
            .map_err(|e| Failure::Config(e.into()));
    }
    let path = source.config.as_deref().expect("clap enforces one source");
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .io_err()?;
    let mut config = parse_config(&text)
        .with_context(|| format!("{}", path.display()))
        .config_err()?;
    if let Some(fov) = fov {
        config.observation.fov = fov;
        config.validate().map_err(|e| Failure::Config(e.into()))?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Config(e) | Failure::Io(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            source,
            policy,
            steps,
            seed,
            fov,
            window,
            log,
            render_every,
            out,
            json,
        } => {
            let config = Arc::new(load(&source, seed, fov)?);
            run_command(
                config,
                policy,
                steps,
                seed,
                window,
                log,
                render_every.zip(out),
                json,
            )
        }
        Command::Bench {
            preset,
            steps,
            sample_every,
            seed,
        } => {
            let config = preset
                .build(seed, None)
                .map_err(|e| Failure::Config(e.into()))?;
            let mut env = Forager::new(config, seed).map_err(|e| Failure::Config(e.into()))?;
            let report = bench(&mut env, preset.name(), steps, sample_every, true);
            print!("{}", report.table());
            Ok(())
        }
        Command::Render {
            source,
            seed,
            out,
            scale,
            no_overlay,
        } => {
            let config = load(&source, seed, None)?;
            let env = Forager::new(config, seed).map_err(|e| Failure::Config(e.into()))?;
            let opts = RenderOptions {
                scale,
                fov: (!no_overlay).then_some(env.fov()),
            };
            save_frame(&env, opts, &out)
        }
        Command::Presets => {
            for p in Preset::ALL {
                println!("{:<28} {}", p.name(), p.description());
            }
            Ok(())
        }
        Command::Validate { config } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))
                .io_err()?;
            let parsed = parse_config(&text)
                .with_context(|| format!("{}", config.display()))
                .config_err()?;
            println!(
                "{}: ok ({}x{}, {} species, {} biomes)",
                config.display(),
                parsed.world.width,
                parsed.world.height,
                parsed.species.len(),
                parsed.biomes.len()
            );
            Ok(())
        }
        Command::Export { preset, seed, fov } => {
            let config = preset
                .build(seed, fov)
                .map_err(|e| Failure::Config(e.into()))?;
            let text = serialize_config(&config).map_err(|e| Failure::Config(e.into()))?;
            print!("{text}");
            Ok(())
        }
    }
}

fn save_frame(env: &Forager, opts: RenderOptions, path: &Path) -> Result<(), Failure> {
    let img = render_frame(env.world(), opts);
    write_image(&img, path)
        .with_context(|| format!("writing {}", path.display()))
        .io_err()
}

#[allow(clippy::too_many_arguments)]
fn run_command(
    config: Arc<TaskConfig>,
    policy_kind: PolicyKind,
    steps: u64,
    seed: u64,
    window: u64,
    log: Option<PathBuf>,
    frames: Option<(u64, PathBuf)>,
    json: bool,
) -> Result<(), Failure> {
    let mut env = Forager::from_shared(config, seed).map_err(|e| Failure::Config(e.into()))?;
    let mut writer = match &log {
        Some(path) => Some(TrajectoryWriter::new(
            File::create(path)
                .with_context(|| format!("creating {}", path.display()))
                .io_err()?,
        )),
        None => None,
    };
    if let Some((_, dir)) = &frames {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .io_err()?;
    }
    let mut policy = policy_kind.build(seed);
    let outcome = run_with(&mut env, policy.as_mut(), steps, window, |env, out, obs| {
        if let Some(w) = writer.as_mut() {
            w.write(&StepRecord::new(env, out, obs))
                .context("writing trajectory log")
                .io_err()?;
        }
        if let Some((every, dir)) = &frames {
            if *every > 0 && out.tick % every == 0 {
                let opts = RenderOptions {
                    scale: 8,
                    fov: Some(env.fov()),
                };
                save_frame(env, opts, &dir.join(format!("frame_{:09}.ppm", out.tick)))?;
            }
        }
        Ok(())
    })?;
    if let Some(w) = writer {
        w.finish().context("flushing trajectory log").io_err()?;
    }
    let m = &outcome.metrics;
    if json {
        let summary = Summary {
            policy: policy_kind.name(),
            seed,
            mean: m.mean_reward(),
            steps_per_sec: outcome.steps_per_sec(),
            metrics: m,
        };
        println!(
            "{}",
            serde_json::to_string(&summary)
                .context("encoding summary")
                .io_err()?
        );
    } else {
        println!("policy          {policy_kind}");
        println!("seed            {seed}");
        println!("steps           {}", m.steps);
        println!("total reward    {}", m.cumulative);
        println!("mean reward     {:.6}", m.mean_reward());
        println!("ema reward      {:.6}", m.ema_reward());
        println!("steps/sec       {:.0}", outcome.steps_per_sec());
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    policy: &'a str,
    seed: u64,
    mean: f64,
    steps_per_sec: f64,
    #[serde(flatten)]
    metrics: &'a RunMetrics,
}
