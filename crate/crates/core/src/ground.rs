// SPDX-License-Identifier: Apache-2.0

//! Ground / non-ground decomposition.
//!
//! The bundled segmenter bins the cloud into a concentric polar grid
//! (rings x azimuth bins). In every patch with enough points, the lowest
//! band of points seeds a principal-axis plane, which is refit a few times
//! on its own inliers. Points close to an upright patch plane are ground. Patches
//! that are too sparse, or whose plane is too steep, use the plane of the
//! nearest inner-ring patch instead.
//!
//! External segmentations can be imported as a per-point mask.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Frame, Point3, PointCloud};
use crate::plane::{principal_plane, PrincipalPlane};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegParams {
    /// Outer radius (m, horizontal) of each ring. Points beyond the last
    /// radius fall into the outermost ring.
    pub ring_radii: Vec<f64>,
    /// Azimuth bins per ring.
    pub azimuth_bins: Vec<usize>,
    /// Seeds are points at most this far above the patch's lowest point.
    pub seed_height_band: f64,
    pub plane_dist_threshold: f64,
    /// Minimum `|n_z|` of a unit patch normal.
    pub normal_z_min: f64,
    pub min_patch_points: usize,
}

impl Default for SegParams {
    fn default() -> Self {
        Self {
            ring_radii: vec![10.0, 25.0, 50.0, 100.0],
            azimuth_bins: vec![16, 32, 54, 32],
            seed_height_band: 0.4,
            plane_dist_threshold: 0.15,
            normal_z_min: 15f64.to_radians().cos(),
            min_patch_points: 10,
        }
    }
}

impl SegParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidModel(format!("segmentation params: {m}")));
        if self.ring_radii.is_empty() || self.ring_radii.len() != self.azimuth_bins.len() {
            return bad("ring_radii and azimuth_bins must be non-empty and of equal length");
        }
        if self.ring_radii.windows(2).any(|w| !(w[0] < w[1])) || !(self.ring_radii[0] > 0.0) {
            return bad("ring radii must be positive and increasing");
        }
        if self.azimuth_bins.contains(&0) {
            return bad("azimuth bins must be positive");
        }
        if !(self.seed_height_band > 0.0) || !(self.plane_dist_threshold > 0.0) {
            return bad("seed band and distance threshold must be positive");
        }
        if !(self.normal_z_min > 0.0 && self.normal_z_min <= 1.0) {
            return bad("normal_z_min must lie in (0, 1]");
        }
        if self.min_patch_points == 0 {
            return bad("min_patch_points must be positive");
        }
        Ok(())
    }
}

/// Exact partition of a cloud. Index lists refer to the input cloud and are
/// ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundSplit {
    pub ground: PointCloud,
    pub nonground: PointCloud,
    pub ground_indices: Vec<usize>,
    pub nonground_indices: Vec<usize>,
}

impl GroundSplit {
    fn from_mask(cloud: &PointCloud, mask: &[bool]) -> Self {
        let (g, n): (Vec<usize>, Vec<usize>) = (0..cloud.len()).partition(|&i| mask[i]);
        Self {
            ground: cloud.select(&g),
            nonground: cloud.select(&n),
            ground_indices: g,
            nonground_indices: n,
        }
    }

    /// Per-input-point ground flags.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.ground_indices.len() + self.nonground_indices.len()];
        for &i in &self.ground_indices {
            m[i] = true;
        }
        m
    }
}

/// Anything that can split a lidar-frame cloud into ground and non-ground.
pub trait GroundSegmenter: Sync {
    fn segment(&self, cloud: &PointCloud) -> Result<GroundSplit>;
}

impl GroundSegmenter for SegParams {
    fn segment(&self, cloud: &PointCloud) -> Result<GroundSplit> {
        segment(cloud, self)
    }
}

/// Splits by an externally computed mask (`true` = ground).
pub fn import_mask(cloud: &PointCloud, mask: &[bool]) -> Result<GroundSplit> {
    if mask.len() != cloud.len() {
        return Err(Error::LengthMismatch {
            expected: cloud.len(),
            found: mask.len(),
        });
    }
    Ok(GroundSplit::from_mask(cloud, mask))
}

pub fn segment(cloud: &PointCloud, params: &SegParams) -> Result<GroundSplit> {
    cloud.expect_frame(Frame::Lidar)?;
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    params.validate()?;
    let grid = PolarGrid::new(params);
    let patches = grid.bin(cloud);

    let fits: Vec<Option<PrincipalPlane>> = patches
        .par_iter()
        .map(|members| fit_patch(cloud, members, params))
        .collect();
    let planes = grid.resolve(&fits);

    let mut mask = vec![false; cloud.len()];
    for (members, plane) in patches.iter().zip(&planes) {
        if let Some(plane) = plane {
            for &i in members {
                mask[i] = plane.signed_distance(&cloud.points[i].position).abs() <= params.plane_dist_threshold;
            }
        }
    }
    Ok(GroundSplit::from_mask(cloud, &mask))
}

const REFITS: usize = 3;

fn fit_patch(cloud: &PointCloud, members: &[usize], params: &SegParams) -> Option<PrincipalPlane> {
    if members.len() < params.min_patch_points {
        return None;
    }
    let pos = |i: &usize| &cloud.points[*i].position;
    let min_z = members.iter().map(|i| pos(i).z).fold(f64::INFINITY, f64::min);
    let seeds: Vec<&Point3> = members
        .iter()
        .map(pos)
        .filter(|p| p.z <= min_z + params.seed_height_band)
        .collect();
    let mut plane = principal_plane(seeds.iter().copied())?;
    // a few refits on the inliers of the previous estimate pull the plane off
    // the feet of walls and boxes that share the seed band
    for _ in 0..REFITS {
        let inliers: Vec<&Point3> = members
            .iter()
            .map(pos)
            .filter(|p| plane.signed_distance(p).abs() <= params.plane_dist_threshold)
            .collect();
        match principal_plane(inliers.iter().copied()) {
            Some(refit) => plane = refit,
            None => break,
        }
    }
    (plane.normal.z.abs() >= params.normal_z_min).then_some(plane)
}

struct PolarGrid<'a> {
    params: &'a SegParams,
    /// Index of the first patch of each ring.
    offsets: Vec<usize>,
}

impl<'a> PolarGrid<'a> {
    fn new(params: &'a SegParams) -> Self {
        let mut offsets = Vec::with_capacity(params.azimuth_bins.len());
        let mut acc = 0;
        for &b in &params.azimuth_bins {
            offsets.push(acc);
            acc += b;
        }
        Self { params, offsets }
    }

    fn patch_count(&self) -> usize {
        self.offsets.last().unwrap() + self.params.azimuth_bins.last().unwrap()
    }

    fn patch_of(&self, p: &Point3) -> usize {
        let rho = p.x.hypot(p.y);
        let radii = &self.params.ring_radii;
        let ring = radii.partition_point(|&r| r <= rho).min(radii.len() - 1);
        let bins = self.params.azimuth_bins[ring];
        let az = p.y.atan2(p.x).rem_euclid(TAU);
        let bin = ((az / TAU * bins as f64) as usize).min(bins - 1);
        self.offsets[ring] + bin
    }

    fn bin(&self, cloud: &PointCloud) -> Vec<Vec<usize>> {
        let mut patches = vec![Vec::new(); self.patch_count()];
        for (i, p) in cloud.points.iter().enumerate() {
            patches[self.patch_of(&p.position)].push(i);
        }
        patches
    }

    /// Patches without their own plane take the inner-ring patch covering
    /// their central azimuth; innermost-ring gaps take the azimuthally
    /// nearest fitted patch of that ring.
    fn resolve(&self, fits: &[Option<PrincipalPlane>]) -> Vec<Option<PrincipalPlane>> {
        let mut out = fits.to_vec();
        let bins = &self.params.azimuth_bins;

        let n0 = bins[0];
        for (b, slot) in out.iter_mut().enumerate().take(n0) {
            if slot.is_some() {
                continue;
            }
            *slot = (1..=n0 / 2)
                .flat_map(|d| [(b + d) % n0, (b + n0 - d) % n0])
                .find_map(|nb| fits[nb]);
        }
        for ring in 1..bins.len() {
            for b in 0..bins[ring] {
                let id = self.offsets[ring] + b;
                if out[id].is_some() {
                    continue;
                }
                let center = (b as f64 + 0.5) / bins[ring] as f64;
                let inner = ((center * bins[ring - 1] as f64) as usize).min(bins[ring - 1] - 1);
                out[id] = out[self.offsets[ring - 1] + inner];
            }
        }
        out
    }
}
