use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use uplink_core::cacc::{cacc, spectrum_2d};
use uplink_core::harness::{
    bench_candidate_counts, run_experiment, write_bench_csv, write_metrics_csv, ExperimentSpec,
};
use uplink_core::pipeline::{estimate, highpass, Method};
use uplink_core::{RxGrid, Scene, SceneFile};

/// Uplink sensing with asynchronous transceivers: synthesis, estimation and
/// Monte-Carlo experiments.
#[derive(Parser)]
#[command(name = "uplink", version)]
struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SceneArgs {
    /// Scene config (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `scenario.rng_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Restricts the run to these methods.
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    /// Cross-antenna correlation before filtering.
    Rho,
    /// After the high-pass filter.
    Xi,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesises a received grid and writes it as a binary dump.
    Simulate {
        #[command(flatten)]
        scene: SceneArgs,
        /// Also write the drawn paths as CSV.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Estimates delay, Doppler and AoA and writes the estimates as CSV.
    Estimate {
        #[command(flatten)]
        scene: SceneArgs,
        /// Process this grid dump instead of synthesising one; the LOS path
        /// still comes from the scene config.
        #[arg(long)]
        rx: Option<PathBuf>,
        #[arg(long, default_value = "mirrored")]
        method: Method,
    },
    /// Writes the 2-D spectrum of one correlation plane as CSV.
    Spectrum {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long)]
        rx: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "rho")]
        stage: Stage,
        /// Plane index into the correlation grid.
        #[arg(long, default_value_t = 0)]
        plane: usize,
    },
    /// Runs a Monte-Carlo sweep and writes the metrics CSV.
    Experiment(ExperimentArgs),
    /// Counts candidates and times the mirrored and conventional searches.
    Bench {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn output(path: Option<&Path>) -> AnyResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| format!("{}: {e}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_scene(args: &SceneArgs) -> AnyResult<SceneFile> {
    Ok(match &args.config {
        Some(p) => SceneFile::from_path(p)?,
        None => SceneFile::default(),
    })
}

/// The scene, with its grid replaced by the dump at `rx` when given.
fn scene_with_rx(file: &SceneFile, seed: Option<u64>, rx: Option<&Path>) -> AnyResult<Scene> {
    let mut scene = file.synthesize(seed)?;
    if let Some(p) = rx {
        let f = File::open(p).map_err(|e| format!("{}: {e}", p.display()))?;
        scene.rx = RxGrid::read_from(BufReader::new(f))?;
    }
    Ok(scene)
}

fn load_spec(args: &ExperimentArgs) -> AnyResult<ExperimentSpec> {
    let mut spec = ExperimentSpec::from_path(&args.config)?;
    if let Some(s) = args.seed {
        spec.master_seed = s;
    }
    if !args.method.is_empty() {
        spec.methods = args.method.clone();
    }
    Ok(spec)
}

fn run(cli: Cli) -> AnyResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Simulate { scene, truth } => {
            let file = load_scene(&scene)?;
            let s = file.synthesize(scene.seed)?;
            if let Some(p) = truth {
                let mut w = output(Some(&p))?;
                writeln!(
                    w,
                    "path_id,los,amplitude,phase_rad,delay_s,doppler_hz,aoa_rad,spatial_freq"
                )?;
                for (i, p) in s.paths.iter().enumerate() {
                    writeln!(
                        w,
                        "{i},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                        p.is_los,
                        p.gain.norm(),
                        p.gain.arg(),
                        p.delay_s,
                        p.doppler_hz,
                        p.aoa_rad,
                        p.spatial_freq
                    )?;
                }
                w.flush()?;
            }
            let mut w = output(scene.out.as_deref())?;
            s.rx.write_to(&mut w)?;
            w.flush()?;
        }
        Command::Estimate { scene, rx, method } => {
            let file = load_scene(&scene)?;
            let s = scene_with_rx(&file, scene.seed, rx.as_deref())?;
            let los = s.los()?;
            let out = estimate(
                method,
                &s.rx,
                los.spatial_freq,
                los.delay_s,
                &s.scenario,
                &file.pipeline,
            )?;
            let mut w = output(scene.out.as_deref())?;
            out.estimates.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Spectrum {
            scene,
            rx,
            stage,
            plane,
        } => {
            let file = load_scene(&scene)?;
            let s = scene_with_rx(&file, scene.seed, rx.as_deref())?;
            let rho = cacc(&s.rx, file.pipeline.reference)?;
            let grid = match stage {
                Stage::Rho => rho,
                Stage::Xi => highpass(&rho, &file.pipeline)?,
            };
            let mut w = output(scene.out.as_deref())?;
            spectrum_2d(&grid, plane)?.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Experiment(args) => {
            let spec = load_spec(&args)?;
            let rows = run_experiment(&spec)?;
            let mut w = output(args.out.as_deref())?;
            write_metrics_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Command::Bench { exp, repeats } => {
            let spec = load_spec(&exp)?;
            let rows = bench_candidate_counts(&spec, repeats)?;
            let mut w = output(exp.out.as_deref())?;
            write_bench_csv(&rows, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
