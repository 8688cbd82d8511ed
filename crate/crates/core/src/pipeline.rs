// SPDX-License-Identifier: Apache-2.0

//! End-to-end generation for one frame and one or more target vehicles.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{in_ego_box, world_to_lidar, ObjectLabel, EGO_CULL_MARGIN};
use crate::error::{Error, Result};
use crate::geometry::{Frame, PointCloud};
use crate::ground::{import_mask, segment, SegParams};
use crate::io::{self, FrameBundle, RotationFormat};
use crate::labels::{map_labels, EgoLabel};
use crate::lidar::LidarModel;
use crate::plane::PlaneModel;
use crate::resample::{resample, GeneratedCloud, GroundStats, NonGroundStats, Origin, ResampleParams};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TargetSelection {
    Id(String),
    AllVehicles,
}

impl TargetSelection {
    /// Target labels in label order; fails if an explicit id is absent.
    pub fn resolve<'a>(&self, labels: &'a [ObjectLabel]) -> Result<Vec<&'a ObjectLabel>> {
        match self {
            TargetSelection::Id(id) => labels
                .iter()
                .find(|l| &l.id == id)
                .map(|l| vec![l])
                .ok_or_else(|| Error::TargetNotFound(id.clone())),
            TargetSelection::AllVehicles => Ok(labels.iter().filter(|l| l.is_vehicle()).collect()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: LidarModel,
    pub target: TargetSelection,
    pub out_dir: PathBuf,
    pub ego_cull: bool,
    pub seg: SegParams,
    pub resample: ResampleParams,
    pub rotation_format: RotationFormat,
}

impl RunConfig {
    pub fn new(model: LidarModel, target: TargetSelection, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            model,
            target,
            out_dir: out_dir.into(),
            ego_cull: true,
            seg: SegParams::default(),
            resample: ResampleParams::default(),
            rotation_format: RotationFormat::AxisAngle,
        }
    }
}

/// Per-target counters. `input_points = retained_points + range_dropped + ego_culled`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub frame_id: String,
    pub target_id: String,
    pub input_points: usize,
    pub range_dropped: usize,
    pub ego_culled: usize,
    pub retained_points: usize,
    pub ground_points: usize,
    pub nonground_points: usize,
    pub nonground: NonGroundStats,
    pub ground: GroundStats,
    pub ground_plane: PlaneModel,
    pub generated_nonground: usize,
    pub generated_ground: usize,
    pub generated_points: usize,
    pub runtime_ms: f64,
}

#[derive(Clone, Debug)]
pub struct TargetResult {
    pub target_id: String,
    pub cloud: GeneratedCloud,
    pub labels: Vec<EgoLabel>,
    pub diagnostics: Diagnostics,
}

/// Generates the view of one target from a world-frame cloud. `ground_mask`,
/// if given, flags the ground points of `world`.
pub fn generate_for_target(
    frame_id: &str,
    world: &PointCloud,
    labels: &[ObjectLabel],
    ground_mask: Option<&[bool]>,
    target: &ObjectLabel,
    cfg: &RunConfig,
) -> Result<TargetResult> {
    let start = Instant::now();
    world.expect_frame(Frame::World)?;
    if let Some(mask) = ground_mask {
        if mask.len() != world.len() {
            return Err(Error::LengthMismatch {
                expected: world.len(),
                found: mask.len(),
            });
        }
    }
    let model = &cfg.model;
    let t_lw = world_to_lidar(target, model);
    let local = t_lw.apply(world)?;

    // track input indices through both filters so a mask can follow them
    let in_range: Vec<usize> = (0..local.len())
        .filter(|&n| model.in_range(local.points[n].range()))
        .collect();
    let range_dropped = local.len() - in_range.len();
    let kept: Vec<usize> = if cfg.ego_cull {
        in_range
            .into_iter()
            .filter(|&n| !in_ego_box(&local.points[n].position, target, model, EGO_CULL_MARGIN))
            .collect()
    } else {
        in_range
    };
    let ego_culled = local.len() - range_dropped - kept.len();
    let retained = local.select(&kept);

    let split = match ground_mask {
        Some(mask) => {
            let sub: Vec<bool> = kept.iter().map(|&n| mask[n]).collect();
            import_mask(&retained, &sub)?
        }
        None => segment(&retained, &cfg.seg)?,
    };
    let r = resample(&split.ground, &split.nonground, model, &cfg.resample)?;
    let mapped = map_labels(labels, &t_lw, Some(&target.id))?;

    let diagnostics = Diagnostics {
        frame_id: frame_id.to_string(),
        target_id: target.id.clone(),
        input_points: world.len(),
        range_dropped,
        ego_culled,
        retained_points: retained.len(),
        ground_points: split.ground.len(),
        nonground_points: split.nonground.len(),
        nonground: r.nonground,
        ground: r.ground,
        ground_plane: r.ground_plane,
        generated_nonground: r.cloud.count(Origin::NonGround),
        generated_ground: r.cloud.count(Origin::Ground),
        generated_points: r.cloud.len(),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    log::info!(
        "frame {frame_id} target {}: {} in, {} retained, {} generated",
        target.id,
        diagnostics.input_points,
        diagnostics.retained_points,
        diagnostics.generated_points
    );
    Ok(TargetResult {
        target_id: target.id.clone(),
        cloud: r.cloud,
        labels: mapped,
        diagnostics,
    })
}

/// Paths of one target's outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFiles {
    pub cloud: PathBuf,
    pub labels: PathBuf,
    pub diagnostics: PathBuf,
}

impl OutputFiles {
    pub fn new(out_dir: &Path, frame_id: &str, target_id: &str) -> Self {
        let stem = format!("{frame_id}_{}", sanitize(target_id));
        Self {
            cloud: out_dir.join(format!("{stem}.bin")),
            labels: out_dir.join(format!("{stem}_labels.json")),
            diagnostics: out_dir.join(format!("{stem}_diag.json")),
        }
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Runs every selected target of a frame and writes cloud, labels and
/// diagnostics per target. Nothing is written if the target selection fails;
/// files already written are removed if a later step fails.
pub fn generate(frame: &FrameBundle, cfg: &RunConfig) -> Result<Vec<OutputFiles>> {
    let world = io::read_cloud(&frame.cloud, Frame::World)?;
    let labels = io::read_labels(&frame.labels, cfg.rotation_format)?;
    let mask = frame.ground_mask.as_ref().map(io::read_mask).transpose()?;
    let targets = cfg.target.resolve(&labels)?;

    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
        let mut outputs = Vec::with_capacity(targets.len());
        for target in targets {
            let r = generate_for_target(&frame.frame_id, &world, &labels, mask.as_deref(), target, cfg)?;
            let files = OutputFiles::new(&cfg.out_dir, &frame.frame_id, &r.target_id);
            written.push(files.cloud.clone());
            io::write_cloud(&files.cloud, &r.cloud.to_point_cloud())?;
            written.push(files.labels.clone());
            io::write_ego_labels(&files.labels, &r.labels)?;
            written.push(files.diagnostics.clone());
            io::write_json(&files.diagnostics, &r.diagnostics)?;
            outputs.push(files);
        }
        Ok(outputs)
    })();
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    result
}

/// Runs [`generate`] on every frame with up to `jobs` frames in flight.
/// Results are in manifest order.
pub fn batch(frames: &[FrameBundle], cfg: &RunConfig, jobs: usize) -> Result<Vec<Result<Vec<OutputFiles>>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidModel(format!("thread pool: {e}")))?;
    Ok(pool.install(|| frames.par_iter().map(|f| generate(f, cfg)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{sample_scene, AnalyticScene};

    #[test]
    fn bookkeeping_adds_up() {
        let scene = AnalyticScene::random(2, 4);
        let (world, _) = sample_scene(&scene, 1).unwrap();
        let labels = scene.labels();
        let cfg = RunConfig::new(LidarModel::default_pandar64(), TargetSelection::AllVehicles, "unused");
        let target = &labels[0];
        let r = generate_for_target("f", &world, &labels, None, target, &cfg).unwrap();
        let d = &r.diagnostics;
        assert_eq!(d.input_points, d.retained_points + d.range_dropped + d.ego_culled);
        assert!(d.ego_culled > 0);
        assert_eq!(d.generated_points, r.cloud.len());
        assert_eq!(r.labels.iter().filter(|l| l.is_ego).count(), 1);
    }

    #[test]
    fn unknown_target_is_reported() {
        let labels = AnalyticScene::random(2, 1).labels();
        let sel = TargetSelection::Id("nope".into());
        assert!(matches!(sel.resolve(&labels), Err(Error::TargetNotFound(id)) if id == "nope"));
        // the car near the origin plus one more car
        assert_eq!(TargetSelection::AllVehicles.resolve(&labels).unwrap().len(), 2);
    }

    #[test]
    fn mask_length_is_checked() {
        let scene = AnalyticScene::random(2, 1);
        let (world, _) = sample_scene(&scene, 1).unwrap();
        let labels = scene.labels();
        let cfg = RunConfig::new(LidarModel::default_pandar64(), TargetSelection::AllVehicles, "unused");
        let r = generate_for_target("f", &world, &labels, Some(&[true, false]), &labels[0], &cfg);
        assert!(matches!(r, Err(Error::LengthMismatch { .. })));
    }
}
