// SPDX-License-Identifier: Apache-2.0

//! Virtual spinning LiDAR: beam table, ray enumeration, angular binning of
//! points onto rays, and the 2 x 25 sector grid used for occlusion.
//!
//! Beam `j` has elevation `ε_j` (ascending in `j`) and polar angle
//! `θ_j = π/2 − ε_j`; horizontal step `i` has azimuth `φ_i = i·Δβ`.
//! The angular bin of ray `(i, j)` is `θ_j ≤ θ < θ_(next lower beam)` and
//! `φ_i ≤ φ < φ_(i+1)`. The top and bottom beams extend to the vertical FOV
//! limits.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Frame, RigidTransform, RotationVector, SphericalCoord, Vector3};

/// Rays per sector along the beam axis.
pub const SECTOR_BEAMS: usize = 2;
/// Rays per sector along the azimuth axis.
pub const SECTOR_STEPS: usize = 25;

/// Angles within this many radians below a bin boundary are snapped onto it,
/// so points generated exactly on a ray bin back to that ray.
pub const ANGLE_SNAP: f64 = 1e-9;

/// Mount height above the vehicle box center used for non-ego vehicles.
pub const DEFAULT_MOUNT_HEIGHT: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RayIndex {
    /// Horizontal step in `[0, m)`.
    pub i: usize,
    /// Beam in `[0, k)`.
    pub j: usize,
}

impl RayIndex {
    pub fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorIndex {
    /// Beam group, `j / 2`.
    pub u: usize,
    /// Azimuth group, `i / 25`.
    pub v: usize,
}

pub fn sector_of(idx: RayIndex) -> SectorIndex {
    SectorIndex {
        u: idx.j / SECTOR_BEAMS,
        v: idx.i / SECTOR_STEPS,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LidarModel {
    vertical_fov: [f64; 2],
    horizontal_fov: f64,
    elevation_table: Vec<f64>,
    azimuth_resolution: f64,
    range: [f64; 2],
    mount: RigidTransform,

    steps: usize,
    polar: Vec<f64>,
    polar_top: f64,
    polar_bottom: f64,
    azimuth_step: f64,
}

impl LidarModel {
    /// Angles in degrees, ranges in meters. `mount` is the sensor pose in the
    /// vehicle frame (a `Lidar -> Vehicle` transform).
    pub fn new(
        vertical_fov: [f64; 2],
        horizontal_fov: f64,
        elevation_table: Vec<f64>,
        azimuth_resolution: f64,
        range: [f64; 2],
        mount: RigidTransform,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        let [fov_min, fov_max] = vertical_fov;
        if !(fov_min.is_finite() && fov_max.is_finite() && fov_min < fov_max) {
            return bad(format!(
                "vertical FOV [{fov_min}, {fov_max}] is not an increasing interval"
            ));
        }
        if fov_min < -90.0 || fov_max > 90.0 {
            return bad(format!("vertical FOV [{fov_min}, {fov_max}] exceeds [-90, 90]"));
        }
        if elevation_table.is_empty() {
            return bad("elevation table is empty".into());
        }
        if let Some(w) = elevation_table.windows(2).find(|w| !(w[0] < w[1])) {
            return bad(format!(
                "elevation table not strictly ascending at {} -> {}",
                w[0], w[1]
            ));
        }
        if let Some(e) = elevation_table.iter().find(|e| !(fov_min..=fov_max).contains(*e)) {
            return bad(format!("elevation {e} outside vertical FOV [{fov_min}, {fov_max}]"));
        }
        if !(azimuth_resolution > 0.0 && azimuth_resolution.is_finite()) {
            return bad(format!("azimuth resolution {azimuth_resolution} must be positive"));
        }
        if !(horizontal_fov > 0.0 && horizontal_fov <= 360.0) {
            return bad(format!("horizontal FOV {horizontal_fov} must lie in (0, 360]"));
        }
        let ratio = horizontal_fov / azimuth_resolution;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-6 {
            return bad(format!(
                "horizontal FOV / azimuth resolution = {ratio} is not a positive integer"
            ));
        }
        let [r_min, r_max] = range;
        if !(r_min >= 0.0 && r_min < r_max && r_max.is_finite()) {
            return bad(format!("range [{r_min}, {r_max}] must satisfy 0 <= min < max"));
        }
        if mount.source != Frame::Lidar || mount.target != Frame::Vehicle {
            return bad("mount must map the lidar frame into the vehicle frame".into());
        }

        let polar = elevation_table.iter().map(|e| FRAC_PI_2 - e.to_radians()).collect();
        Ok(Self {
            vertical_fov,
            horizontal_fov,
            azimuth_resolution,
            range,
            mount,
            steps: steps as usize,
            polar,
            polar_top: FRAC_PI_2 - fov_max.to_radians(),
            polar_bottom: FRAC_PI_2 - fov_min.to_radians(),
            azimuth_step: azimuth_resolution.to_radians(),
            elevation_table,
        })
    }

    /// Pandar64-like configuration: FOV [-25°, 15°], 360° x 0.2°, 64 beams,
    /// range [0.5, 200] m, mounted 0.25 m above the box center.
    pub fn default_pandar64() -> Self {
        Self::new(
            [-25.0, 15.0],
            360.0,
            pandar64_elevations(),
            0.2,
            [0.5, 200.0],
            default_mount(),
        )
        .expect("bundled configuration is valid")
    }

    /// Same sensor with a different beam table (FOV widened if needed).
    pub fn with_elevation_table(&self, table: Vec<f64>) -> Result<Self> {
        let lo = table.first().copied().unwrap_or(self.vertical_fov[0]);
        let hi = table.last().copied().unwrap_or(self.vertical_fov[1]);
        Self::new(
            [self.vertical_fov[0].min(lo), self.vertical_fov[1].max(hi)],
            self.horizontal_fov,
            table,
            self.azimuth_resolution,
            self.range,
            self.mount,
        )
    }

    pub fn with_mount(&self, mount: RigidTransform) -> Result<Self> {
        Self::new(
            self.vertical_fov,
            self.horizontal_fov,
            self.elevation_table.clone(),
            self.azimuth_resolution,
            self.range,
            mount,
        )
    }

    pub fn with_range(&self, range: [f64; 2]) -> Result<Self> {
        Self::new(
            self.vertical_fov,
            self.horizontal_fov,
            self.elevation_table.clone(),
            self.azimuth_resolution,
            range,
            self.mount,
        )
    }

    pub fn vertical_fov(&self) -> [f64; 2] {
        self.vertical_fov
    }

    pub fn horizontal_fov(&self) -> f64 {
        self.horizontal_fov
    }

    pub fn beam_count(&self) -> usize {
        self.elevation_table.len()
    }

    pub fn elevation_table(&self) -> &[f64] {
        &self.elevation_table
    }

    pub fn azimuth_resolution(&self) -> f64 {
        self.azimuth_resolution
    }

    /// Number of horizontal steps `m = β / Δβ`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn ray_count(&self) -> usize {
        self.steps * self.beam_count()
    }

    pub fn range(&self) -> [f64; 2] {
        self.range
    }

    pub fn in_range(&self, r: f64) -> bool {
        self.range[0] <= r && r <= self.range[1]
    }

    pub fn mount(&self) -> &RigidTransform {
        &self.mount
    }

    /// `(beam groups, azimuth groups)`.
    pub fn sector_grid(&self) -> (usize, usize) {
        (
            self.beam_count().div_ceil(SECTOR_BEAMS),
            self.steps.div_ceil(SECTOR_STEPS),
        )
    }

    pub fn sector_count(&self) -> usize {
        let (u, v) = self.sector_grid();
        u * v
    }

    /// Dense index of a sector, row-major over `(u, v)`.
    pub fn sector_id(&self, s: SectorIndex) -> usize {
        s.u * self.sector_grid().1 + s.v
    }

    /// Dense index of a ray, beam-major: `j * m + i`.
    pub fn ray_id(&self, idx: RayIndex) -> usize {
        idx.j * self.steps + idx.i
    }

    pub fn ray_from_id(&self, id: usize) -> RayIndex {
        RayIndex::new(id % self.steps, id / self.steps)
    }

    pub fn rays(&self) -> impl Iterator<Item = RayIndex> + '_ {
        (0..self.beam_count()).flat_map(move |j| (0..self.steps).map(move |i| RayIndex::new(i, j)))
    }

    pub fn polar_angle(&self, j: usize) -> f64 {
        self.polar[j]
    }

    pub fn azimuth(&self, i: usize) -> f64 {
        (i as f64 * self.azimuth_resolution).to_radians()
    }

    fn check(&self, idx: RayIndex) -> Result<()> {
        if idx.i < self.steps && idx.j < self.beam_count() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                i: idx.i,
                j: idx.j,
                m: self.steps,
                k: self.beam_count(),
            })
        }
    }

    /// Unit direction `(sinθ_j cosφ_i, sinθ_j sinφ_i, cosθ_j)`.
    pub fn ray_direction(&self, idx: RayIndex) -> Result<Vector3> {
        self.check(idx)?;
        Ok(self.direction_unchecked(idx))
    }

    pub(crate) fn direction_unchecked(&self, idx: RayIndex) -> Vector3 {
        let (st, ct) = self.polar[idx.j].sin_cos();
        let (sp, cp) = self.azimuth(idx.i).sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// Ray whose angular bin contains `s`, or `None` outside the FOV.
    pub fn bin_point(&self, s: &SphericalCoord) -> Option<RayIndex> {
        if !(s.r > 0.0) {
            return None;
        }
        let j = self.bin_beam(s.theta)?;
        let i = self.bin_azimuth(s.phi)?;
        Some(RayIndex::new(i, j))
    }

    fn bin_beam(&self, theta: f64) -> Option<usize> {
        // a beam sitting exactly on the lower FOV limit keeps its own ray
        let beyond_bottom = theta >= self.polar_bottom && theta > self.polar[0] + ANGLE_SNAP;
        if theta + ANGLE_SNAP < self.polar_top || beyond_bottom {
            return None;
        }
        let k = self.polar.len();
        // polar angles descend with j
        let first = self.polar.partition_point(|&t| t > theta + ANGLE_SNAP);
        Some(if first == k { k - 1 } else { first })
    }

    fn bin_azimuth(&self, phi: f64) -> Option<usize> {
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        let step = (phi / self.azimuth_step + ANGLE_SNAP / self.azimuth_step).floor() as usize;
        if step < self.steps {
            Some(step)
        } else if self.horizontal_fov >= 360.0 {
            Some(step - self.steps)
        } else {
            None
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_config_str(&text)
    }

    /// Parses the TOML sensor description. Errors name the offending key and
    /// line.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(1);
            let key = backticked(e.message()).unwrap_or_else(|| "<document>".into());
            let line = key_line(text, &key).unwrap_or(line);
            Error::Config {
                key,
                line,
                message: e.message().trim().to_string(),
            }
        })?;

        let config_err = |key: &str, message: String| Error::Config {
            key: key.to_string(),
            line: key_line(text, key).unwrap_or(1),
            message,
        };

        let table = match file.elevation_table_deg {
            Some(t) => t,
            None => uniform_elevations(file.beam_count, file.vertical_fov_deg[0], file.vertical_fov_deg[1]),
        };
        if table.len() != file.beam_count {
            return Err(config_err(
                "elevation_table_deg",
                format!("has {} entries but beam_count is {}", table.len(), file.beam_count),
            ));
        }
        let mount = match file.mount {
            Some(m) => RigidTransform::from_rotation_vector(
                &RotationVector(Vector3::from(m.rotation_vector_rad)),
                Vector3::from(m.translation_m),
                Frame::Lidar,
                Frame::Vehicle,
            ),
            None => default_mount(),
        };
        Self::new(
            file.vertical_fov_deg,
            file.horizontal_fov_deg.unwrap_or(360.0),
            table,
            file.azimuth_resolution_deg,
            file.range_m,
            mount,
        )
        .map_err(|e| {
            let msg = e.to_string();
            let key = if msg.contains("elevation") {
                "elevation_table_deg"
            } else if msg.contains("vertical FOV") {
                "vertical_fov_deg"
            } else if msg.contains("azimuth") || msg.contains("horizontal FOV") {
                "azimuth_resolution_deg"
            } else if msg.contains("range") {
                "range_m"
            } else {
                "mount"
            };
            config_err(key, msg)
        })
    }

    pub fn to_config_string(&self) -> String {
        let rv = self
            .mount
            .rotation_vector()
            .map(|v| v.0)
            .unwrap_or_else(|_| Vector3::zeros());
        let file = ConfigFile {
            vertical_fov_deg: self.vertical_fov,
            horizontal_fov_deg: Some(self.horizontal_fov),
            beam_count: self.beam_count(),
            elevation_table_deg: Some(self.elevation_table.clone()),
            azimuth_resolution_deg: self.azimuth_resolution,
            range_m: self.range,
            mount: Some(MountConfig {
                rotation_vector_rad: rv.into(),
                translation_m: self.mount.translation.into(),
            }),
        };
        toml::to_string(&file).expect("sensor config serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    vertical_fov_deg: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizontal_fov_deg: Option<f64>,
    beam_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elevation_table_deg: Option<Vec<f64>>,
    azimuth_resolution_deg: f64,
    range_m: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mount: Option<MountConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MountConfig {
    rotation_vector_rad: [f64; 3],
    translation_m: [f64; 3],
}

fn backticked(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| {
                rest.trim_start().starts_with('=') || (key == "mount" && rest.trim_start().starts_with(']'))
            }) || l.starts_with(&format!("[{key}]"))
        })
        .map(|n| n + 1)
}

/// Sensor `DEFAULT_MOUNT_HEIGHT` above the vehicle center, unrotated.
pub fn default_mount() -> RigidTransform {
    RigidTransform::from_translation(
        Vector3::new(0.0, 0.0, DEFAULT_MOUNT_HEIGHT),
        Frame::Lidar,
        Frame::Vehicle,
    )
}

/// `k` elevations evenly spaced over `[min, max]`, endpoints included.
pub fn uniform_elevations(k: usize, min: f64, max: f64) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.5 * (min + max)],
        _ => (0..k).map(|j| min + (max - min) * j as f64 / (k - 1) as f64).collect(),
    }
}

/// Bundled 64-beam table over [-25°, 15°] with twice the beam density in
/// [-6°, 2°]. Values are rounded to millidegrees.
///
/// This is a synthetic stand-in; load the factory calibration from a sensor
/// config when it is available.
pub fn pandar64_elevations() -> Vec<f64> {
    const K: usize = 64;
    const LO: f64 = -25.0;
    const DENSE: (f64, f64) = (-6.0, 2.0);
    // cumulative weight: 1 per degree outside the dense band, 2 inside
    let w1 = DENSE.0 - LO;
    let w2 = w1 + 2.0 * (DENSE.1 - DENSE.0);
    let total = w2 + (15.0 - DENSE.1);
    (0..K)
        .map(|j| {
            let w = total * j as f64 / (K - 1) as f64;
            let e = if w <= w1 {
                LO + w
            } else if w <= w2 {
                DENSE.0 + (w - w1) / 2.0
            } else {
                DENSE.1 + (w - w2)
            };
            (e * 1000.0).round() / 1000.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{to_spherical, Point3};

    fn four_beam() -> LidarModel {
        LidarModel::new(
            [-4.0, 4.0],
            360.0,
            vec![-3.0, -1.0, 1.0, 3.0],
            0.2,
            [0.5, 200.0],
            default_mount(),
        )
        .unwrap()
    }

    fn spherical_at(elevation_deg: f64, azimuth_deg: f64) -> SphericalCoord {
        SphericalCoord {
            r: 10.0,
            phi: azimuth_deg.to_radians(),
            theta: FRAC_PI_2 - elevation_deg.to_radians(),
        }
    }

    #[test]
    fn pandar64_defaults() {
        let m = LidarModel::default_pandar64();
        assert_eq!(m.vertical_fov(), [-25.0, 15.0]);
        assert_eq!(m.horizontal_fov(), 360.0);
        assert_eq!(m.beam_count(), 64);
        assert_eq!(m.azimuth_resolution(), 0.2);
        assert_eq!(m.range(), [0.5, 200.0]);
        assert_eq!(m.steps(), 1800);
        assert_eq!(m.ray_count(), 115_200);
        assert_eq!(m.sector_grid(), (32, 72));
        assert_eq!(m.mount().translation, Vector3::new(0.0, 0.0, 0.25));
    }

    #[test]
    fn pandar64_table_is_denser_in_the_middle() {
        let t = pandar64_elevations();
        assert_eq!(t.first(), Some(&-25.0));
        assert_eq!(t.last(), Some(&15.0));
        let dense = t.iter().filter(|e| (-6.0..=2.0).contains(*e)).count();
        let below = t.iter().filter(|e| (-25.0..-17.0).contains(*e)).count();
        // 8 degrees at double density vs 8 degrees at single density
        assert!(dense >= 2 * below - 1, "dense={dense} below={below}");
    }

    #[test]
    fn ray_direction_examples() {
        let m = LidarModel::new([-10.0, 10.0], 360.0, vec![0.0], 0.2, [0.5, 200.0], default_mount()).unwrap();
        let d = m.ray_direction(RayIndex::new(0, 0)).unwrap();
        assert!((d - Vector3::x()).amax() < 1e-12);
        let d = m.ray_direction(RayIndex::new(450, 0)).unwrap();
        assert!((d - Vector3::y()).amax() < 1e-12);

        let zenith = LidarModel::new([-10.0, 90.0], 360.0, vec![90.0], 1.0, [0.5, 200.0], default_mount()).unwrap();
        let d = zenith.ray_direction(RayIndex::new(17, 0)).unwrap();
        assert!((d - Vector3::z()).amax() < 1e-12);

        assert!(matches!(
            m.ray_direction(RayIndex::new(1800, 0)),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(m.ray_direction(RayIndex::new(0, 1)).is_err());
    }

    #[test]
    fn bin_point_rejects_outside_fov() {
        let m = LidarModel::default_pandar64();
        assert_eq!(m.bin_point(&spherical_at(16.0, 0.0)), None);
        assert_eq!(m.bin_point(&spherical_at(-25.5, 0.0)), None);
        assert_eq!(m.bin_point(&spherical_at(-25.0, 0.0)).map(|r| r.j), Some(0));
        assert_eq!(m.bin_point(&spherical_at(15.0, 0.0)).map(|r| r.j), Some(63));

        // the lower FOV edge is excluded, the upper one included
        let m = four_beam();
        assert_eq!(m.bin_point(&spherical_at(-4.0, 0.0)), None);
        assert_eq!(m.bin_point(&spherical_at(-3.99, 0.0)).map(|r| r.j), Some(0));
        assert_eq!(m.bin_point(&spherical_at(4.0, 0.0)).map(|r| r.j), Some(3));
    }

    #[test]
    fn bin_point_boundary_goes_to_that_bin() {
        let m = four_beam();
        for j in 0..4 {
            let s = SphericalCoord {
                r: 5.0,
                phi: 0.0,
                theta: m.polar_angle(j),
            };
            assert_eq!(m.bin_point(&s), Some(RayIndex::new(0, j)));
        }
        // exactly on an azimuth boundary
        let s = SphericalCoord {
            r: 5.0,
            phi: m.azimuth(7),
            theta: m.polar_angle(2),
        };
        assert_eq!(m.bin_point(&s), Some(RayIndex::new(7, 2)));
    }

    #[test]
    fn bin_point_matches_brute_force_enumeration() {
        let m = four_beam();
        // brute force: the bin of beam j is [θ_j, θ_lower) with FOV extension
        let membership = |theta: f64, j: usize| {
            let lo = if j == 3 {
                FRAC_PI_2 - 4f64.to_radians()
            } else {
                m.polar_angle(j)
            };
            let hi = if j == 0 {
                FRAC_PI_2 + 4f64.to_radians()
            } else {
                m.polar_angle(j - 1)
            };
            lo <= theta && theta < hi
        };
        let s = spherical_at(0.4, 0.05);
        let hits: Vec<usize> = (0..4).filter(|&j| membership(s.theta, j)).collect();
        // between the -1° and 1° beams: the bin belongs to the upper beam
        assert_eq!(hits, vec![2]);
        assert_eq!(m.bin_point(&s), Some(RayIndex::new(0, 2)));

        let mut e = -3.999;
        while e < 3.999 {
            let s = spherical_at(e, 0.05);
            let hits: Vec<usize> = (0..4).filter(|&j| membership(s.theta, j)).collect();
            assert_eq!(hits.len(), 1, "elevation {e}");
            assert_eq!(m.bin_point(&s).map(|r| r.j), Some(hits[0]), "elevation {e}");
            e += 0.0137;
        }
    }

    #[test]
    fn azimuth_wraps_into_fov() {
        let m = four_beam();
        let s = spherical_at(1.0, -0.1);
        assert_eq!(m.bin_point(&s).map(|r| r.i), Some(1799));
        let s = spherical_at(1.0, 180.0);
        assert_eq!(m.bin_point(&s).map(|r| r.i), Some(900));
    }

    #[test]
    fn partial_horizontal_fov() {
        let m = LidarModel::new([-4.0, 4.0], 90.0, vec![0.0], 1.0, [0.5, 200.0], default_mount()).unwrap();
        assert_eq!(m.steps(), 90);
        assert_eq!(m.bin_point(&spherical_at(0.0, 45.5)).map(|r| r.i), Some(45));
        assert_eq!(m.bin_point(&spherical_at(0.0, 95.0)), None);
    }

    #[test]
    fn origin_never_bins() {
        let m = four_beam();
        assert_eq!(m.bin_point(&to_spherical(&Point3::origin())), None);
    }

    #[test]
    fn sector_examples() {
        assert_eq!(sector_of(RayIndex::new(0, 0)), SectorIndex { u: 0, v: 0 });
        assert_eq!(sector_of(RayIndex::new(24, 1)), SectorIndex { u: 0, v: 0 });
        assert_eq!(sector_of(RayIndex::new(25, 2)), SectorIndex { u: 1, v: 1 });
    }

    #[test]
    fn pandar64_rays_partition_into_2304_sectors() {
        let m = LidarModel::default_pandar64();
        let mut seen = vec![0usize; m.sector_count()];
        for r in m.rays() {
            seen[m.sector_id(sector_of(r))] += 1;
        }
        assert_eq!(seen.len(), 2304);
        assert!(seen.iter().all(|&c| c == 50));
    }

    #[test]
    fn model_validation() {
        let mount = default_mount();
        assert!(LidarModel::new([-4.0, 4.0], 360.0, vec![1.0, 0.0], 0.2, [0.5, 200.0], mount).is_err());
        assert!(LidarModel::new([-4.0, 4.0], 360.0, vec![5.0], 0.2, [0.5, 200.0], mount).is_err());
        assert!(LidarModel::new([-4.0, 4.0], 360.0, vec![0.0], 0.7, [0.5, 200.0], mount).is_err());
        assert!(LidarModel::new([-4.0, 4.0], 360.0, vec![0.0], 0.2, [5.0, 5.0], mount).is_err());
        let wrong = RigidTransform::identity(Frame::Vehicle);
        assert!(LidarModel::new([-4.0, 4.0], 360.0, vec![0.0], 0.2, [0.5, 200.0], wrong).is_err());
    }

    #[test]
    fn config_round_trip() {
        let m = LidarModel::default_pandar64();
        let text = m.to_config_string();
        let back = LidarModel::from_config_str(&text).unwrap();
        assert_eq!(back.elevation_table(), m.elevation_table());
        assert_eq!(back.range(), m.range());
        assert!((back.mount().translation - m.mount().translation).amax() < 1e-15);
    }

    #[test]
    fn config_without_table_is_uniform() {
        let text =
            "vertical_fov_deg = [-15.0, 15.0]\nbeam_count = 16\nazimuth_resolution_deg = 0.4\nrange_m = [1.0, 100.0]\n";
        let m = LidarModel::from_config_str(text).unwrap();
        assert_eq!(m.beam_count(), 16);
        assert_eq!(m.elevation_table()[0], -15.0);
        assert_eq!(m.elevation_table()[15], 15.0);
        assert_eq!(m.steps(), 900);
    }

    #[test]
    fn config_errors_name_key_and_line() {
        let text = "vertical_fov_deg = [-15.0, 15.0]\nbeam_count = 2\nelevation_table_deg = [1.0, 0.0]\nazimuth_resolution_deg = 0.4\nrange_m = [1.0, 100.0]\n";
        match LidarModel::from_config_str(text) {
            Err(Error::Config { key, line, .. }) => {
                assert_eq!(key, "elevation_table_deg");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }

        let text = "vertical_fov_deg = [-15.0, 15.0]\nbeam_count = \"many\"\n";
        match LidarModel::from_config_str(text) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }

        let text = "vertical_fov_deg = [-15.0, 15.0]\nazimuth_resolution_deg = 0.4\nrange_m = [1.0, 100.0]\n";
        match LidarModel::from_config_str(text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "beam_count"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_mount_is_parsed() {
        let text = "vertical_fov_deg = [-15.0, 15.0]\nbeam_count = 2\nelevation_table_deg = [-1.0, 1.0]\nazimuth_resolution_deg = 1.0\nrange_m = [1.0, 100.0]\n\n[mount]\nrotation_vector_rad = [0.0, 0.0, 0.1]\ntranslation_m = [1.2, 0.0, 1.9]\n";
        let m = LidarModel::from_config_str(text).unwrap();
        assert_eq!(m.mount().translation, Vector3::new(1.2, 0.0, 1.9));
        assert!((m.mount().rotation_vector().unwrap().0.z - 0.1).abs() < 1e-12);
    }
}
