// SPDX-License-Identifier: Apache-2.0

//! `roadview` command-line front end.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 on a data error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use roadview::alignment::world_to_lidar;
use roadview::error::Error;
use roadview::geometry::Frame;
use roadview::ground::{segment, SegParams};
use roadview::io::{self, FrameBundle, RotationFormat};
use roadview::lidar::LidarModel;
use roadview::metrics::{cloud_stats, compare, ClassHistogram};
use roadview::pipeline::{batch, generate, RunConfig, TargetSelection};
use roadview::synth::{oracle_cast, sample_scene, AnalyticScene};

/// Writes a line to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser, Debug)]
#[command(
    name = "roadview",
    version,
    about = "Synthesize vehicle-view LiDAR frames from roadside point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate vehicle-view clouds and labels for one frame.
    Generate(GenerateArgs),
    /// Run `generate` over every frame listed in a manifest.
    Batch(BatchArgs),
    /// Split a sensor-centered cloud into ground and non-ground.
    Segment(SegmentArgs),
    /// Compare two class histograms (JS distance and cosine similarity).
    Metrics(MetricsArgs),
    /// Sample a synthetic analytic scene, optionally with exact ray casts.
    Synth(SynthArgs),
    /// Summarize a cloud: counts, range histogram, intensity, beam counts.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct TargetArgs {
    /// Id of the vehicle label to use as the virtual sensor carrier.
    #[arg(long, value_name = "ID")]
    target_id: Option<String>,
    /// Use every vehicle label as a target.
    #[arg(long)]
    all_vehicles: bool,
}

impl TargetArgs {
    fn selection(&self) -> TargetSelection {
        match &self.target_id {
            Some(id) => TargetSelection::Id(id.clone()),
            None => TargetSelection::AllVehicles,
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Sensor description (TOML).
    #[arg(long, value_name = "FILE")]
    lidar_config: PathBuf,
    #[command(flatten)]
    target: TargetArgs,
    /// Directory receiving `<frame>_<target>.bin`, `_labels.json` and `_diag.json`.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Remove returns from the target's own body (default).
    #[arg(long, overrides_with = "no_ego_cull")]
    ego_cull: bool,
    /// Keep returns from the target's own body.
    #[arg(long, overrides_with = "ego_cull")]
    no_ego_cull: bool,
    /// Rotation encoding of the input labels: `axis-angle` (three radians)
    /// or `yaw` (one scalar, promoted to a rotation about z).
    #[arg(long, value_name = "FORMAT", default_value = "axis-angle")]
    rotation_format: RotationFormat,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        let model = LidarModel::load(&self.lidar_config)?;
        let mut cfg = RunConfig::new(model, self.target.selection(), &self.out_dir);
        cfg.ego_cull = self.ego_cull || !self.no_ego_cull;
        cfg.rotation_format = self.rotation_format;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// World-frame cloud (float32 x, y, z, intensity records).
    #[arg(long, value_name = "FILE")]
    cloud: PathBuf,
    /// World-frame object labels (JSON).
    #[arg(long, value_name = "FILE")]
    labels: PathBuf,
    /// Precomputed ground mask, one byte (0 or 1) per cloud point.
    #[arg(long, value_name = "FILE")]
    ground_mask: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct BatchArgs {
    /// Tab-separated `cloud<TAB>labels[<TAB>mask]` lines; relative paths
    /// resolve against the manifest's directory.
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    /// Frames processed concurrently.
    #[arg(long, value_name = "N", default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct SegmentArgs {
    /// Cloud in the sensor frame (origin at the sensor).
    #[arg(long, value_name = "FILE")]
    cloud: PathBuf,
    /// Output mask, one byte per point (1 = ground).
    #[arg(long, value_name = "FILE")]
    out_mask: PathBuf,
    /// Segmentation parameters (JSON); missing fields take defaults.
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Reference histogram JSON: `{"classes": [...], "weights": [...]}`.
    #[arg(long, value_name = "FILE")]
    a: PathBuf,
    /// Histogram to compare; classes are matched by name.
    #[arg(long, value_name = "FILE")]
    b: PathBuf,
    /// Also write the report here (it is always printed).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("scene_source").required(true).args(["scene", "random"])))]
struct SynthArgs {
    /// Scene description (JSON).
    #[arg(long, value_name = "FILE")]
    scene: Option<PathBuf>,
    /// Build a random scene from this seed instead.
    #[arg(long, value_name = "SEED")]
    random: Option<u64>,
    /// Boxes and walls in a random scene, besides the car at the origin.
    #[arg(long, value_name = "N", default_value_t = 4, requires = "random")]
    objects: usize,
    /// Surface sampling seed.
    #[arg(long, value_name = "SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Output file stem.
    #[arg(long, value_name = "NAME", default_value = "synth")]
    name: String,
    /// Also cast exact rays from this vehicle's sensor; repeatable.
    #[arg(long, value_name = "ID")]
    oracle_target: Vec<String>,
    /// Sensor for the exact ray casts (TOML); defaults to the built-in 64-beam model.
    #[arg(long, value_name = "FILE")]
    lidar_config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    /// Cloud to summarize.
    #[arg(long, value_name = "FILE")]
    cloud: PathBuf,
    /// Sensor description (TOML); enables per-beam counts.
    #[arg(long, value_name = "FILE")]
    lidar_config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RS2AD_LOG", "off")).init();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Generate(a) => {
            let cfg = a.run.config()?;
            let frame = FrameBundle::new(a.cloud, a.labels, a.ground_mask);
            for files in generate(&frame, &cfg)? {
                say!("{}", files.cloud.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Batch(a) => {
            let cfg = a.run.config()?;
            let frames = io::read_manifest(&a.manifest)?;
            let results = batch(&frames, &cfg, usize::from(a.jobs))?;
            let mut failed = 0;
            for (frame, r) in frames.iter().zip(results) {
                match r {
                    Ok(files) => log::info!("frame {}: {} targets", frame.frame_id, files.len()),
                    Err(e) => {
                        eprintln!("frame {}: {e}", frame.frame_id);
                        failed += 1;
                    }
                }
            }
            if failed > 0 {
                eprintln!("error: {failed} of {} frames failed", frames.len());
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Segment(a) => {
            let params: SegParams = match &a.params {
                Some(p) => io::read_json(p)?,
                None => SegParams::default(),
            };
            let cloud = io::read_cloud(&a.cloud, Frame::Lidar)?;
            let split = segment(&cloud, &params)?;
            io::write_mask(&a.out_mask, &split.mask())?;
            say!("{} ground of {} points", split.ground.len(), cloud.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Metrics(a) => {
            let ha: ClassHistogram = io::read_json(&a.a)?;
            let hb: ClassHistogram = io::read_json(&a.b)?;
            let report = compare(&ha, &hb)?;
            if let Some(out) = &a.out {
                io::write_json(out, &report)?;
            }
            say!("{}", to_json(&report));
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth(a) => synth(a).map(|()| ExitCode::SUCCESS),
        Command::Stats(a) => {
            let model = a.lidar_config.as_ref().map(LidarModel::load).transpose()?;
            let cloud = io::read_cloud(&a.cloud, Frame::Lidar)?;
            say!("{}", to_json(&cloud_stats(&cloud, model.as_ref())));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn synth(a: SynthArgs) -> Result<(), Error> {
    let scene = match (&a.scene, a.random) {
        (Some(p), _) => io::read_json::<AnalyticScene>(p)?,
        (None, Some(seed)) => AnalyticScene::random(seed, a.objects),
        (None, None) => unreachable!("clap requires one scene source"),
    };
    let (cloud, tags) = sample_scene(&scene, a.seed)?;
    let labels = scene.labels();
    std::fs::create_dir_all(&a.out_dir).map_err(|e| io_error(&a.out_dir, e))?;
    let path = |suffix: &str| a.out_dir.join(format!("{}{suffix}", a.name));
    io::write_json(path("_scene.json"), &scene)?;
    io::write_cloud(path(".bin"), &cloud)?;
    io::write_labels(path("_labels.json"), &labels)?;
    io::write_json(path("_truth.json"), &tags)?;
    io::write_mask(
        path("_ground.mask"),
        &tags.iter().map(|t| t.is_ground()).collect::<Vec<_>>(),
    )?;
    if !a.oracle_target.is_empty() {
        let model = match &a.lidar_config {
            Some(p) => LidarModel::load(p)?,
            None => LidarModel::default_pandar64(),
        };
        for id in &a.oracle_target {
            let target = TargetSelection::Id(id.clone()).resolve(&labels)?[0];
            let hits = oracle_cast(&scene, &world_to_lidar(target, &model), &model);
            io::write_cloud(path(&format!("_{id}_oracle.bin")), &hits.to_point_cloud())?;
        }
    }
    say!("{} points, {} labels", cloud.len(), labels.len());
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}
