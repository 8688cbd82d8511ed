// SPDX-License-Identifier: Apache-2.0

//! Resampling a segmented cloud onto the virtual sensor's rays.
//!
//! Non-ground points are bucketed by the ray whose angular bin contains them.
//! Each bucket's point nearest the origin anchors a local plane fitted to
//! every non-ground point within `σ` of it; the ray is intersected with that
//! plane. Ground rays are intersected with one global ground plane, but only
//! in sectors where no non-ground return was produced.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{to_spherical, Frame, LidarPoint, Point3, PointCloud};
use crate::lidar::{LidarModel, RayIndex, SectorIndex, SECTOR_BEAMS, SECTOR_STEPS};
use crate::plane::{least_squares, principal_plane, Axis, PlaneModel};
use crate::spatial::VoxelIndex;

/// Below this `|n_z|` a neighborhood is treated as a wall and solved for x or y.
pub const VERTICAL_NORMAL_Z: f64 = 0.05;

/// Voxel size of the coarse index used for the global-nearest intensity
/// fallback, in multiples of `σ`.
const COARSE_CELL_FACTOR: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResampleParams {
    /// `σ`: radius (m) of the neighborhood gathered around `p_min`.
    pub neighborhood_radius: f64,
    pub min_fit_points: usize,
    /// Smallest `|n·d|` for which a ray is not considered parallel to a plane.
    pub parallel_eps: f64,
    /// `(beams, azimuth steps)` per occlusion sector.
    pub sector_shape: (usize, usize),
}

impl Default for ResampleParams {
    fn default() -> Self {
        Self {
            neighborhood_radius: 1.0,
            min_fit_points: 3,
            parallel_eps: 1e-6,
            sector_shape: (SECTOR_BEAMS, SECTOR_STEPS),
        }
    }
}

impl ResampleParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidModel(format!("resample params: {m}")));
        if !(self.neighborhood_radius > 0.0 && self.neighborhood_radius.is_finite()) {
            return bad("neighborhood_radius must be positive");
        }
        if self.min_fit_points < 3 {
            return bad("min_fit_points must be at least 3");
        }
        if !(self.parallel_eps >= 0.0) {
            return bad("parallel_eps must be non-negative");
        }
        if self.sector_shape.0 == 0 || self.sector_shape.1 == 0 {
            return bad("sector_shape entries must be positive");
        }
        Ok(())
    }

    pub fn sector_of(&self, ray: RayIndex) -> SectorIndex {
        SectorIndex {
            u: ray.j / self.sector_shape.0,
            v: ray.i / self.sector_shape.1,
        }
    }

    /// `(beam groups, azimuth groups)` for `model`.
    pub fn sector_grid(&self, model: &LidarModel) -> (usize, usize) {
        (
            model.beam_count().div_ceil(self.sector_shape.0),
            model.steps().div_ceil(self.sector_shape.1),
        )
    }

    fn sector_id(&self, model: &LidarModel, ray: RayIndex) -> usize {
        let s = self.sector_of(ray);
        s.u * self.sector_grid(model).1 + s.v
    }
}

/// Non-ground points whose angles fall in one ray's bin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayBucket {
    pub ray: RayIndex,
    /// Indices into the bucketed cloud, ascending.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Buckets {
    /// Non-empty buckets in ray-id order.
    pub buckets: Vec<RayBucket>,
    /// Points outside the angular field of view.
    pub dropped: usize,
}

pub fn bucket_nonground(nonground: &PointCloud, model: &LidarModel) -> Result<Buckets> {
    nonground.expect_frame(Frame::Lidar)?;
    let binned: Vec<Option<usize>> = nonground
        .points
        .par_iter()
        .map(|p| model.bin_point(&to_spherical(&p.position)).map(|r| model.ray_id(r)))
        .collect();
    let mut keyed: Vec<(usize, usize)> = binned
        .iter()
        .enumerate()
        .filter_map(|(n, r)| r.map(|r| (r, n)))
        .collect();
    let dropped = nonground.len() - keyed.len();
    keyed.sort_unstable();

    let mut buckets: Vec<RayBucket> = Vec::new();
    for (id, n) in keyed {
        match buckets.last_mut() {
            Some(b) if model.ray_id(b.ray) == id => b.members.push(n),
            _ => buckets.push(RayBucket {
                ray: model.ray_from_id(id),
                members: vec![n],
            }),
        }
    }
    Ok(Buckets { buckets, dropped })
}

/// Member nearest the origin (lowest index on ties).
pub fn nearest_member(bucket: &RayBucket, cloud: &PointCloud) -> Option<usize> {
    bucket.members.iter().copied().min_by(|&a, &b| {
        let (ra, rb) = (cloud.points[a].range(), cloud.points[b].range());
        ra.total_cmp(&rb).then(a.cmp(&b))
    })
}

/// Spatial index over the non-ground cloud for neighborhood queries.
pub struct Neighborhoods {
    index: VoxelIndex,
    radius: f64,
}

impl Neighborhoods {
    pub fn new(nonground: &PointCloud, params: &ResampleParams) -> Self {
        let pts = nonground.points.iter().map(|p| p.position).collect();
        Self {
            index: VoxelIndex::new(pts, params.neighborhood_radius),
            radius: params.neighborhood_radius,
        }
    }

    /// Points strictly closer than `σ` to `center`.
    pub fn around(&self, center: &Point3) -> Vec<Point3> {
        self.index
            .within(center, self.radius)
            .into_iter()
            .map(|n| *self.index.point(n))
            .collect()
    }
}

/// Least-squares plane through the neighborhood of `p_min`, or `None` when
/// the neighborhood cannot support one.
///
/// Near-vertical neighborhoods (principal normal with `|n_z| <` [`VERTICAL_NORMAL_Z`])
/// are solved for x or y, whichever the normal leans towards.
pub fn fit_local_plane(p_min: &Point3, neighborhoods: &Neighborhoods, params: &ResampleParams) -> Option<PlaneModel> {
    let pts = neighborhoods.around(p_min);
    fit_points(&pts, params)
}

fn fit_points(pts: &[Point3], params: &ResampleParams) -> Option<PlaneModel> {
    if pts.len() < params.min_fit_points {
        return None;
    }
    let axis = match principal_plane(pts) {
        Some(pp) if pp.normal.z.abs() < VERTICAL_NORMAL_Z => {
            if pp.normal.x.abs() >= pp.normal.y.abs() {
                Axis::X
            } else {
                Axis::Y
            }
        }
        _ => Axis::Z,
    };
    least_squares(pts, axis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    NonGround,
    Ground,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratedPoint {
    pub ray: RayIndex,
    pub point: LidarPoint,
    pub origin: Origin,
    /// Produced by the degenerate-fit fallback rather than an intersection.
    pub fallback: bool,
}

/// Resampled returns, at most one per ray.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GeneratedCloud {
    pub points: Vec<GeneratedPoint>,
}

impl GeneratedCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GeneratedPoint> {
        self.points.iter()
    }

    pub fn to_point_cloud(&self) -> PointCloud {
        PointCloud::from_points(self.points.iter().map(|g| g.point).collect(), Frame::Lidar)
    }

    pub fn count(&self, origin: Origin) -> usize {
        self.points.iter().filter(|g| g.origin == origin).count()
    }
}

/// Rays and sectors that received a non-ground return.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occupancy {
    /// Indexed by [`LidarModel::ray_id`].
    pub rays: Vec<bool>,
    /// Indexed row-major over [`ResampleParams::sector_grid`].
    pub sectors: Vec<bool>,
}

impl Occupancy {
    pub fn empty(model: &LidarModel, params: &ResampleParams) -> Self {
        let (u, v) = params.sector_grid(model);
        Self {
            rays: vec![false; model.ray_count()],
            sectors: vec![false; u * v],
        }
    }

    fn mark(&mut self, model: &LidarModel, params: &ResampleParams, ray: RayIndex) {
        self.rays[model.ray_id(ray)] = true;
        self.sectors[params.sector_id(model, ray)] = true;
    }

    pub fn ray_occupied(&self, model: &LidarModel, ray: RayIndex) -> bool {
        self.rays[model.ray_id(ray)]
    }

    pub fn sector_blocked(&self, model: &LidarModel, params: &ResampleParams, ray: RayIndex) -> bool {
        self.sectors[params.sector_id(model, ray)]
    }

    pub fn blocked_sector_count(&self) -> usize {
        self.sectors.iter().filter(|&&b| b).count()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonGroundStats {
    pub buckets: usize,
    pub out_of_fov: usize,
    pub returns: usize,
    pub degenerate_fallbacks: usize,
    /// Parallel ray or hit behind the sensor.
    pub no_intersection: usize,
    pub out_of_range: usize,
    pub blocked_sectors: usize,
}

#[derive(Clone, Debug)]
pub struct NonGroundResult {
    pub cloud: GeneratedCloud,
    pub occupancy: Occupancy,
    pub stats: NonGroundStats,
}

enum BucketOutcome {
    Hit(GeneratedPoint),
    NoIntersection,
    OutOfRange,
}

pub fn resample_nonground(
    nonground: &PointCloud,
    model: &LidarModel,
    params: &ResampleParams,
) -> Result<NonGroundResult> {
    params.validate()?;
    let Buckets { buckets, dropped } = bucket_nonground(nonground, model)?;
    let neighborhoods = Neighborhoods::new(nonground, params);

    let outcomes: Vec<BucketOutcome> = buckets
        .par_iter()
        .map(|bucket| {
            let anchor = nearest_member(bucket, nonground).expect("buckets are non-empty");
            let p_min = nonground.points[anchor];
            let d = model.direction_unchecked(bucket.ray);
            let (position, fallback) = match fit_local_plane(&p_min.position, &neighborhoods, params) {
                Some(plane) => match plane.intersect(&d, params.parallel_eps) {
                    Some((t0, _)) if !model.in_range(t0) => return BucketOutcome::OutOfRange,
                    Some((_, hit)) => (hit, false),
                    None => return BucketOutcome::NoIntersection,
                },
                // keep the anchor's range, but on the ray
                None => (Point3::from(d * p_min.range()), true),
            };
            BucketOutcome::Hit(GeneratedPoint {
                ray: bucket.ray,
                point: LidarPoint {
                    position,
                    intensity: p_min.intensity,
                },
                origin: Origin::NonGround,
                fallback,
            })
        })
        .collect();

    let mut stats = NonGroundStats {
        buckets: buckets.len(),
        out_of_fov: dropped,
        ..Default::default()
    };
    let mut occupancy = Occupancy::empty(model, params);
    let mut cloud = GeneratedCloud::default();
    for outcome in outcomes {
        match outcome {
            BucketOutcome::Hit(g) => {
                stats.degenerate_fallbacks += g.fallback as usize;
                occupancy.mark(model, params, g.ray);
                cloud.points.push(g);
            }
            BucketOutcome::NoIntersection => stats.no_intersection += 1,
            BucketOutcome::OutOfRange => stats.out_of_range += 1,
        }
    }
    stats.returns = cloud.len();
    stats.blocked_sectors = occupancy.blocked_sector_count();
    Ok(NonGroundResult {
        cloud,
        occupancy,
        stats,
    })
}

/// Global least-squares ground plane `z = ax + by + c`.
pub fn fit_ground_plane(ground: &PointCloud) -> Result<PlaneModel> {
    least_squares(ground.points.iter().map(|p| &p.position), Axis::Z).ok_or(Error::DegenerateGround)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundStats {
    pub returns: usize,
    /// Rays skipped because their sector holds a non-ground return.
    pub blocked_rays: usize,
    pub no_intersection: usize,
    pub out_of_range: usize,
    /// Intensities taken from the global-nearest fallback.
    pub far_intensity_lookups: usize,
}

/// Intersects every unoccupied, unblocked ray with the ground plane. Each
/// return copies the intensity of the nearest input ground point within `σ`
/// of the hit, or of the globally nearest one.
pub fn resample_ground(
    plane: &PlaneModel,
    ground: &PointCloud,
    model: &LidarModel,
    occupancy: &Occupancy,
    params: &ResampleParams,
) -> Result<(GeneratedCloud, GroundStats)> {
    params.validate()?;
    ground.expect_frame(Frame::Lidar)?;
    if ground.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let positions: Vec<Point3> = ground.points.iter().map(|p| p.position).collect();
    let sigma = params.neighborhood_radius;
    let fine = VoxelIndex::new(positions.clone(), sigma);
    let coarse = VoxelIndex::new(positions, sigma * COARSE_CELL_FACTOR);

    #[derive(Clone, Copy)]
    enum Outcome {
        Hit(GeneratedPoint, bool),
        Blocked,
        Skipped,
        NoIntersection,
        OutOfRange,
    }

    let outcomes: Vec<Outcome> = (0..model.ray_count())
        .into_par_iter()
        .map(|id| {
            let ray = model.ray_from_id(id);
            if occupancy.rays[id] {
                return Outcome::Skipped;
            }
            if occupancy.sector_blocked(model, params, ray) {
                return Outcome::Blocked;
            }
            let d = model.direction_unchecked(ray);
            let Some((t0, hit)) = plane.intersect(&d, params.parallel_eps) else {
                return Outcome::NoIntersection;
            };
            if !model.in_range(t0) {
                return Outcome::OutOfRange;
            }
            let (source, far) = match fine.nearest_within(&hit, sigma) {
                Some(n) => (n, false),
                None => (coarse.nearest(&hit).expect("ground cloud is non-empty"), true),
            };
            Outcome::Hit(
                GeneratedPoint {
                    ray,
                    point: LidarPoint {
                        position: hit,
                        intensity: ground.points[source].intensity,
                    },
                    origin: Origin::Ground,
                    fallback: false,
                },
                far,
            )
        })
        .collect();

    let mut stats = GroundStats::default();
    let mut cloud = GeneratedCloud::default();
    for outcome in outcomes {
        match outcome {
            Outcome::Hit(g, far) => {
                stats.far_intensity_lookups += far as usize;
                cloud.points.push(g);
            }
            Outcome::Blocked => stats.blocked_rays += 1,
            Outcome::Skipped => {}
            Outcome::NoIntersection => stats.no_intersection += 1,
            Outcome::OutOfRange => stats.out_of_range += 1,
        }
    }
    stats.returns = cloud.len();
    Ok((cloud, stats))
}

/// `V = V_n ∪ V_g`; fails if a ray appears twice.
pub fn fuse(vn: GeneratedCloud, vg: GeneratedCloud) -> Result<GeneratedCloud> {
    let mut seen = HashSet::with_capacity(vn.len() + vg.len());
    let mut points = vn.points;
    points.extend(vg.points);
    for g in &points {
        if !seen.insert(g.ray) {
            return Err(Error::DuplicateRay(g.ray));
        }
    }
    Ok(GeneratedCloud { points })
}

#[derive(Clone, Debug)]
pub struct Resampled {
    pub cloud: GeneratedCloud,
    pub ground_plane: PlaneModel,
    pub nonground: NonGroundStats,
    pub ground: GroundStats,
}

/// Full resampling of a split cloud: non-ground, then ground, then fusion.
pub fn resample(
    ground: &PointCloud,
    nonground: &PointCloud,
    model: &LidarModel,
    params: &ResampleParams,
) -> Result<Resampled> {
    let vn = resample_nonground(nonground, model, params)?;
    let ground_plane = fit_ground_plane(ground)?;
    let (vg, ground_stats) = resample_ground(&ground_plane, ground, model, &vn.occupancy, params)?;
    Ok(Resampled {
        cloud: fuse(vn.cloud, vg)?,
        ground_plane,
        nonground: vn.stats,
        ground: ground_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::from_spherical;
    use crate::geometry::SphericalCoord;
    use nalgebra::{Matrix3, Vector3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn cloud(points: Vec<Point3>) -> PointCloud {
        PointCloud::from_points(
            points
                .into_iter()
                .enumerate()
                .map(|(n, p)| LidarPoint {
                    position: p,
                    intensity: n as f64,
                })
                .collect(),
            Frame::Lidar,
        )
    }

    fn model() -> LidarModel {
        LidarModel::default_pandar64()
    }

    /// Beams at -25°, -10°, 0° and 15°.
    fn sparse_model() -> LidarModel {
        model().with_elevation_table(vec![-25.0, -10.0, 0.0, 15.0]).unwrap()
    }

    /// Dense sampling of the wall `x = 10` for `|y| <= half`, `z` in `[z0, z1]`.
    fn wall(half: f64, z0: f64, z1: f64, step: f64) -> Vec<Point3> {
        let mut out = Vec::new();
        let ny = (2.0 * half / step) as i64;
        let nz = ((z1 - z0) / step) as i64;
        for a in 0..=ny {
            for b in 0..=nz {
                out.push(Point3::new(10.0, -half + a as f64 * step, z0 + b as f64 * step));
            }
        }
        out
    }

    #[test]
    fn empty_cloud_has_no_buckets() {
        let b = bucket_nonground(&PointCloud::new(Frame::Lidar), &model()).unwrap();
        assert!(b.buckets.is_empty());
        assert_eq!(b.dropped, 0);
        let r = resample_nonground(&PointCloud::new(Frame::Lidar), &model(), &ResampleParams::default()).unwrap();
        assert!(r.cloud.is_empty());
        assert!(!r.occupancy.rays.contains(&true) && !r.occupancy.sectors.contains(&true));
    }

    #[test]
    fn on_ray_point_lands_in_its_bucket() {
        let m = model();
        let d = m.ray_direction(RayIndex::new(3, 5)).unwrap();
        let b = bucket_nonground(&cloud(vec![Point3::from(d * 10.0)]), &m).unwrap();
        assert_eq!(
            b.buckets,
            vec![RayBucket {
                ray: RayIndex::new(3, 5),
                members: vec![0]
            }]
        );
    }

    #[test]
    fn buckets_match_exhaustive_rebinning() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Point3> = (0..10_000)
            .map(|_| {
                from_spherical(&SphericalCoord {
                    r: rng.random_range(1.0..100.0),
                    phi: rng.random_range(-3.2..3.2),
                    theta: rng.random_range(74f64.to_radians()..116f64.to_radians()),
                })
            })
            .collect();
        let c = cloud(pts.clone());
        let b = bucket_nonground(&c, &m).unwrap();

        // oracle: scan beams and steps for the half-open bins directly
        let polar: Vec<f64> = (0..m.beam_count()).map(|j| m.polar_angle(j)).collect();
        let (top, bottom) = (
            std::f64::consts::FRAC_PI_2 - m.vertical_fov()[1].to_radians(),
            std::f64::consts::FRAC_PI_2 - m.vertical_fov()[0].to_radians(),
        );
        let step = m.azimuth_resolution().to_radians();
        let oracle = |p: &Point3| -> Option<RayIndex> {
            let s = to_spherical(p);
            let j = (0..polar.len()).find(|&j| {
                let lo = if j + 1 == polar.len() { top } else { polar[j] };
                let hi = if j == 0 { bottom } else { polar[j - 1] };
                lo <= s.theta && (s.theta < hi || (j == 0 && s.theta <= hi))
            })?;
            let phi = s.phi.rem_euclid(std::f64::consts::TAU);
            let i = (0..m.steps()).find(|&i| i as f64 * step <= phi && phi < (i + 1) as f64 * step)?;
            Some(RayIndex::new(i, j))
        };
        let mut expected: Vec<(usize, usize)> = pts
            .iter()
            .enumerate()
            .filter_map(|(n, p)| oracle(p).map(|r| (m.ray_id(r), n)))
            .collect();
        expected.sort_unstable();
        let got: Vec<(usize, usize)> = b
            .buckets
            .iter()
            .flat_map(|bk| bk.members.iter().map(|&n| (m.ray_id(bk.ray), n)))
            .collect();
        assert_eq!(got, expected);
        assert_eq!(b.dropped, pts.len() - expected.len());
        assert!(b.dropped > 0);
    }

    #[test]
    fn local_fit_examples() {
        let params = ResampleParams::default();
        let mut pts = Vec::new();
        for a in -2..=2 {
            for b in -2..=2 {
                let (x, y) = (5.0 + a as f64 * 0.2, b as f64 * 0.2);
                pts.push(Point3::new(x, y, 2.0 * x + 3.0 * y + 1.0));
            }
        }
        // spread along the steep plane stays within σ of the anchor
        let near: Vec<Point3> = pts.iter().filter(|p| (*p - pts[12]).norm() < 1.0).copied().collect();
        let p = fit_points(&near, &params).unwrap();
        assert_eq!(p.axis, Axis::Z);
        assert!((p.a - 2.0).abs() < 1e-9 && (p.b - 3.0).abs() < 1e-9 && (p.c - 1.0).abs() < 1e-9);

        let flat: Vec<Point3> = pts.iter().map(|p| Point3::new(p.x, p.y, 0.0)).collect();
        let n = Neighborhoods::new(&cloud(flat.clone()), &params);
        let p = fit_local_plane(&flat[12], &n, &params).unwrap();
        assert!(p.a.abs() < 1e-15 && p.b.abs() < 1e-15 && p.c.abs() < 1e-15);
    }

    #[test]
    fn noisy_local_fit_matches_normal_equations() {
        let params = ResampleParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = Normal::new(0.0, 1e-3).unwrap();
        let pts: Vec<Point3> = (0..50)
            .map(|_| {
                let (x, y) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
                Point3::new(x, y, 0.1 * x - 0.2 * y + 3.0 + noise.sample(&mut rng))
            })
            .collect();
        let p = fit_points(&pts, &params).unwrap();

        // uncentered normal equations [Σxx Σxy Σx; Σxy Σyy Σy; Σx Σy n]·θ = [Σxz Σyz Σz]
        let mut a = Matrix3::zeros();
        let mut rhs = Vector3::zeros();
        for q in &pts {
            let row = Vector3::new(q.x, q.y, 1.0);
            a += row * row.transpose();
            rhs += row * q.z;
        }
        let theta = a.lu().solve(&rhs).unwrap();
        assert!((p.a - theta[0]).abs() < 1e-9);
        assert!((p.b - theta[1]).abs() < 1e-9);
        assert!((p.c - theta[2]).abs() < 1e-9);
    }

    #[test]
    fn wall_return_is_on_the_wall() {
        let m = sparse_model();
        let pts = wall(3.0, -1.5, 1.5, 0.05);
        let r = resample_nonground(&cloud(pts), &m, &ResampleParams::default()).unwrap();
        // the 0° beam at azimuth 0
        let j = 2;
        let g = r.cloud.iter().find(|g| g.ray == RayIndex::new(0, j)).unwrap();
        assert!((g.point.position - Point3::new(10.0, 0.0, 0.0)).norm() < 0.02);
        assert!(!g.fallback);
        for g in r.cloud.iter() {
            assert!((g.point.position.x - 10.0).abs() < 1e-6, "{:?}", g);
        }
    }

    #[test]
    fn degenerate_bucket_falls_back_on_ray() {
        let m = model();
        let d = m.ray_direction(RayIndex::new(100, 40)).unwrap();
        let pts = vec![
            Point3::from(d * 20.0 + Vector3::new(0.0, 0.0, -0.001)),
            Point3::from(d * 20.5),
        ];
        let c = cloud(pts);
        let r = resample_nonground(&c, &m, &ResampleParams::default()).unwrap();
        assert_eq!(r.stats.degenerate_fallbacks, r.cloud.len());
        let g = r.cloud.iter().find(|g| g.point.intensity == 0.0).unwrap();
        assert!(g.fallback);
        let expected_range = c.points[0].range();
        let d = m.ray_direction(g.ray).unwrap();
        assert!((g.point.position - Point3::from(d * expected_range)).norm() < 1e-12);
    }

    #[test]
    fn ground_plane_fits() {
        let mut pts = Vec::new();
        for a in 0..20 {
            for b in 0..20 {
                let (x, y) = (a as f64 - 10.0, b as f64 * 0.7 - 7.0);
                pts.push(Point3::new(x, y, 0.01 * x - 1.8));
            }
        }
        let p = fit_ground_plane(&cloud(pts.clone())).unwrap();
        assert!((p.a - 0.01).abs() < 1e-12 && p.b.abs() < 1e-12 && (p.c + 1.8).abs() < 1e-12);
        let flat: Vec<Point3> = pts.iter().map(|p| Point3::new(p.x, p.y, -2.0)).collect();
        let p = fit_ground_plane(&cloud(flat)).unwrap();
        assert!(p.a.abs() < 1e-15 && p.b.abs() < 1e-15 && (p.c + 2.0).abs() < 1e-14);

        let line = cloud((0..10).map(|k| Point3::new(k as f64, 0.0, -2.0)).collect());
        assert!(matches!(fit_ground_plane(&line), Err(Error::DegenerateGround)));
    }

    fn flat_ground(z: f64) -> PointCloud {
        let mut pts = Vec::new();
        for a in -100..=100 {
            for b in -100..=100 {
                pts.push(Point3::new(a as f64 * 0.5, b as f64 * 0.5, z));
            }
        }
        cloud(pts)
    }

    #[test]
    fn flat_ground_ranges_follow_beam_elevation() {
        let m = model();
        let params = ResampleParams::default();
        let ground = flat_ground(-1.9);
        let plane = PlaneModel::new(0.0, 0.0, -1.9);
        let (vg, _) = resample_ground(&plane, &ground, &m, &Occupancy::empty(&m, &params), &params).unwrap();
        for g in vg.iter() {
            let e = m.elevation_table()[g.ray.j];
            assert!(e < 0.0);
            // t0 = −c / (n·d) = 1.9 / sin(−ε)
            let expected = 1.9 / (-e).to_radians().sin();
            assert!((g.point.range() - expected).abs() < 1e-9);
        }
        // every downward beam returns on all steps while within range
        let down = m
            .elevation_table()
            .iter()
            .filter(|&&e| e < 0.0 && 1.9 / (-e).to_radians().sin() <= 200.0)
            .count();
        assert_eq!(vg.len(), down * m.steps());
    }

    #[test]
    fn ten_degree_beam_hits_flat_ground_at_10_94() {
        let m = sparse_model();
        let params = ResampleParams::default();
        let (vg, _) = resample_ground(
            &PlaneModel::new(0.0, 0.0, -1.9),
            &flat_ground(-1.9),
            &m,
            &Occupancy::empty(&m, &params),
            &params,
        )
        .unwrap();
        let g = vg.iter().find(|g| g.ray == RayIndex::new(0, 1)).unwrap();
        assert!((g.point.range() - 10.94).abs() < 0.01);
        // upward and horizontal beams never reach ground below the sensor
        assert!(vg.iter().all(|g| g.ray.j <= 1));
    }

    #[test]
    fn blocked_sector_has_no_ground() {
        let m = model();
        let params = ResampleParams::default();
        let mut occ = Occupancy::empty(&m, &params);
        let ray = RayIndex::new(30, 2);
        occ.mark(&m, &params, ray);
        let (vg, stats) =
            resample_ground(&PlaneModel::new(0.0, 0.0, -1.9), &flat_ground(-1.9), &m, &occ, &params).unwrap();
        let sector = params.sector_of(ray);
        assert!(vg.iter().all(|g| params.sector_of(g.ray) != sector));
        assert_eq!(stats.blocked_rays, 49);
    }

    #[test]
    fn ground_intensity_is_copied_from_nearby_points() {
        let m = model();
        let params = ResampleParams::default();
        let ground = flat_ground(-1.9);
        let (vg, stats) = resample_ground(
            &PlaneModel::new(0.0, 0.0, -1.9),
            &ground,
            &m,
            &Occupancy::empty(&m, &params),
            &params,
        )
        .unwrap();
        assert!(stats.far_intensity_lookups > 0);
        for g in vg.iter() {
            let n = g.point.intensity as usize;
            let src = ground.points[n].position;
            let best = ground
                .points
                .iter()
                .map(|p| (p.position - g.point.position).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(((src - g.point.position).norm() - best).abs() < 1e-12);
        }
    }

    #[test]
    fn fuse_rejects_duplicates() {
        let g = |i: usize| GeneratedPoint {
            ray: RayIndex::new(i, 0),
            point: LidarPoint::new(1.0, 0.0, 0.0, 0.0),
            origin: Origin::Ground,
            fallback: false,
        };
        assert!(fuse(GeneratedCloud::default(), GeneratedCloud::default())
            .unwrap()
            .is_empty());
        let vg = GeneratedCloud {
            points: vec![g(1), g(2)],
        };
        assert_eq!(fuse(GeneratedCloud::default(), vg.clone()).unwrap(), vg);
        let vn = GeneratedCloud { points: vec![g(2)] };
        assert!(matches!(fuse(vn, vg), Err(Error::DuplicateRay(r)) if r == RayIndex::new(2, 0)));
    }

    #[test]
    fn wall_and_ground_fuse_disjointly() {
        let m = model();
        let params = ResampleParams::default();
        let ground = flat_ground(-1.9);
        let ng = cloud(wall(4.0, -1.9, 2.0, 0.1));
        let vn = resample_nonground(&ng, &m, &params).unwrap();
        let (n_len, occupied) = (vn.cloud.len(), vn.occupancy.clone());
        let plane = fit_ground_plane(&ground).unwrap();
        let (vg, _) = resample_ground(&plane, &ground, &m, &vn.occupancy, &params).unwrap();
        let g_len = vg.len();
        for g in vg.iter() {
            assert!(!occupied.sector_blocked(&m, &params, g.ray));
        }
        let v = fuse(vn.cloud, vg).unwrap();
        assert_eq!(v.len(), n_len + g_len);
        assert!(n_len > 0 && g_len > 0);
    }
}
