use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use lensalign::bench::{
    emit_landscape, read_results, run_benchmark, summarize, write_summary, BenchmarkConfig,
    Statistic, RESULTS_FILE,
};
use lensalign::config::SceneConfig;
use lensalign::env::{
    build_reference, calibrate_threshold, sample_variances, EnvConfig, NoiseLevel, Pose, AXIS_NAMES,
};
use lensalign::io::{pgm, sidecar};
use lensalign::opt::Algorithm;
use lensalign::optics::{render, RenderParams};
use lensalign::{Error, Result, SensorImage};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lensalign",
    version,
    about = "Active optical alignment simulator and baseline benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scene/environment config (TOML); the built-in default when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Samples per pixel, overriding the config.
    #[arg(long, global = true)]
    spp: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Render one sensor image at a pose.
    Render {
        #[command(flatten)]
        common: Common,
        /// Normalized pose x,y,z,rx,ry,rz in [0,1]; the optimum when omitted.
        #[arg(long, value_delimiter = ',')]
        pose: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Apply lens placement errors sampled at this noise level.
        #[arg(long)]
        noise: Option<f64>,
        /// Output PGM path; a float sidecar is written next to it.
        #[arg(long, default_value = "render.pgm")]
        out: PathBuf,
    },
    /// Build the reference pattern (mean of renders at the optimum).
    Reference {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of renders averaged.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Calibrate the success threshold per noise level.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        reference: ReferenceArg,
        /// Noise levels; all benchmark levels when omitted.
        #[arg(long, value_delimiter = ',')]
        noise: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Config file to write the thresholds to (defaults to --config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render two-dimensional slices of the objective around the optimum.
    Landscape {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        reference: ReferenceArg,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Dimensions by name (x,y,z,rx,ry,rz); all active ones when omitted.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "landscape")]
        out: PathBuf,
    },
    /// Run the baseline benchmark matrix.
    Bench {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        reference: ReferenceArg,
        #[arg(long, value_delimiter = ',')]
        algos: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        noise: Option<Vec<f64>>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "bench")]
        out: PathBuf,
    },
    /// Aggregate a results table per algorithm, noise level and step.
    Summarize {
        /// results.csv written by `bench`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "summary.csv")]
        out: PathBuf,
        /// median or mean; the config's choice when omitted.
        #[arg(long)]
        stat: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ReferenceArg {
    /// Reference float sidecar written by `reference`; rebuilt when omitted.
    #[arg(long)]
    reference: Option<PathBuf>,
}

fn load_scene(common: &Common) -> Result<SceneConfig> {
    let mut scene = match &common.config {
        Some(path) => SceneConfig::load(path)?,
        None => SceneConfig::builtin(),
    };
    if let Some(spp) = common.spp {
        if spp == 0 {
            return Err(Error::Config("--spp must be at least 1".into()));
        }
        scene.render.samples_per_pixel = spp;
    }
    Ok(scene)
}

fn obtain_reference(scene: &SceneConfig, arg: &ReferenceArg) -> Result<Arc<SensorImage>> {
    let image = match &arg.reference {
        Some(path) => sidecar::read(path)?,
        None => {
            log::info!(
                "building reference from {} renders",
                scene.env.reference_samples
            );
            build_reference(
                &EnvConfig::from_scene(scene)?,
                scene.env.reference_samples,
                scene.env.reference_seed,
            )?
        }
    };
    Ok(Arc::new(image))
}

fn write_image(path: &Path, image: &SensorImage) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    pgm::write_sensor_pgm(path, image, None)?;
    sidecar::write(&path.with_extension("f32"), image)?;
    Ok(())
}

fn parse_dim(name: &str) -> Result<usize> {
    AXIS_NAMES
        .iter()
        .position(|a| *a == name.trim())
        .ok_or_else(|| Error::Config(format!("unknown dimension {name:?}")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Render {
            common,
            pose,
            seed,
            noise,
            out,
        } => {
            let scene = load_scene(&common)?;
            let env = EnvConfig::from_scene(&scene)?;
            let coords: [f64; 6] = match pose {
                Some(p) => p
                    .try_into()
                    .map_err(|_| Error::Config("--pose needs six values".into()))?,
                None => Pose::optimal().coords().to_owned(),
            };
            let pose = Pose::new(coords).map_err(|e| Error::Config(e.to_string()))?;
            let lenses = match noise {
                Some(label) => {
                    let level = NoiseLevel::from_label(label, scene.env.translation_scale)?;
                    let variances = sample_variances(&env.with_noise(level).variance_model(), seed);
                    env.perturbed_system(&variances)?
                }
                None => (*env.system).clone(),
            };
            let image = render(
                &env.posed_system(&lenses, &pose),
                &RenderParams {
                    seed,
                    ..scene.render
                },
            )?;
            write_image(&out, &image)?;
            println!("{}", out.display());
        }
        Command::Reference {
            common,
            seed,
            samples,
            out,
        } => {
            let scene = load_scene(&common)?;
            let env = EnvConfig::from_scene(&scene)?;
            let image = build_reference(
                &env,
                samples.unwrap_or(scene.env.reference_samples),
                seed.unwrap_or(scene.env.reference_seed),
            )?;
            let path = out.join("reference.pgm");
            write_image(&path, &image)?;
            println!("{}", path.display());
            println!("{}", path.with_extension("f32").display());
        }
        Command::Calibrate {
            common,
            reference,
            noise,
            trials,
            seed,
            out,
        } => {
            let mut scene = load_scene(&common)?;
            let reference = obtain_reference(&scene, &reference)?;
            let env = EnvConfig::from_scene(&scene)?;
            let cal = scene.env.calibration.clone();
            let levels = noise.unwrap_or_else(|| scene.bench.noise_levels.clone());
            for label in levels {
                let level = NoiseLevel::from_label(label, scene.env.translation_scale)?;
                let c = calibrate_threshold(
                    &env,
                    &reference,
                    level,
                    trials.unwrap_or(cal.trials),
                    cal.percentile,
                    cal.margin,
                    seed.unwrap_or(cal.seed),
                )?;
                println!(
                    "noise {label}: threshold {:.6e} (noise floor {:.6e})",
                    c.threshold, c.noise_floor
                );
                scene.env.set_threshold(label, c.threshold);
            }
            if let Some(path) = out.or(common.config) {
                scene.save(&path)?;
                println!("thresholds written to {}", path.display());
            }
        }
        Command::Landscape {
            common,
            reference,
            grid,
            dims,
            seed,
            out,
        } => {
            let scene = load_scene(&common)?;
            let reference = obtain_reference(&scene, &reference)?;
            let env = EnvConfig::from_scene(&scene)?;
            let dims = match dims {
                Some(names) => names.iter().map(|n| parse_dim(n)).collect::<Result<_>>()?,
                None => env.active.indices().collect::<Vec<_>>(),
            };
            if grid < 5 {
                return Err(Error::Config("--grid must be at least 5".into()));
            }
            let slices = emit_landscape(&env, &reference, &dims, grid, seed, &out)?;
            for s in slices {
                println!(
                    "{} x {}: minimum at ({}, {})",
                    AXIS_NAMES[s.dim_i], AXIS_NAMES[s.dim_j], s.argmin.0, s.argmin.1
                );
            }
        }
        Command::Bench {
            common,
            reference,
            algos,
            noise,
            episodes,
            steps,
            seed,
            out,
        } => {
            let scene = load_scene(&common)?;
            let mut cfg = BenchmarkConfig::from_scene(&scene)?;
            if let Some(a) = algos {
                cfg.algorithms = a
                    .iter()
                    .map(|s| s.parse::<Algorithm>())
                    .collect::<Result<_>>()?;
            }
            if let Some(n) = noise {
                cfg.noise_levels = n;
            }
            cfg.episodes = episodes.unwrap_or(cfg.episodes);
            cfg.steps = steps.unwrap_or(cfg.steps);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.out_dir = Some(out.clone());
            let reference = obtain_reference(&scene, &reference)?;
            let result = run_benchmark(&scene, &cfg, reference)?;
            let stat: Statistic = scene.bench.statistic.parse()?;
            let summary = summarize(&result, stat)?;
            write_summary(&out.join("summary.csv"), &summary)?;
            for r in summary.iter().filter(|r| r.step == cfg.steps) {
                println!(
                    "{} noise {}: {stat} final best {:.4e} (p25 {:.4e}, p75 {:.4e})",
                    r.algorithm, r.noise, r.center, r.p25, r.p75
                );
            }
            println!("{}", out.join(RESULTS_FILE).display());
        }
        Command::Summarize {
            input,
            out,
            stat,
            config,
        } => {
            let stat: Statistic = match stat {
                Some(s) => s.parse()?,
                None => match config {
                    Some(p) => SceneConfig::load(&p)?.bench.statistic.parse()?,
                    None => Statistic::default(),
                },
            };
            let result = read_results(&input)?;
            let rows = summarize(&result, stat)?;
            write_summary(&out, &rows)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}
