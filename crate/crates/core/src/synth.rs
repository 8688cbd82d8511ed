// SPDX-License-Identifier: Apache-2.0

//! Analytic test scenes: a ground plane with boxes and vertical walls.
//!
//! [`sample_scene`] turns a scene into a world-frame cloud with per-point
//! truth tags. [`oracle_cast`] intersects a sensor's rays with the exact
//! surfaces, with no sampling and no plane fitting, as an independent
//! reference for the resampling pipeline.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::ObjectLabel;
use crate::error::{Error, Result};
use crate::geometry::{Frame, LidarPoint, Point3, PointCloud, RigidTransform, RotationVector, Vector3};
use crate::labels::BevBox;
use crate::lidar::LidarModel;
use crate::plane::PlaneModel;
use crate::resample::{GeneratedCloud, GeneratedPoint, Origin};

/// Oriented box resting anywhere in the scene; yaw about +z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneBox {
    pub id: String,
    #[serde(default = "default_category")]
    pub category: String,
    pub center: [f64; 3],
    /// `(length, width, height)`.
    pub size: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
}

fn default_category() -> String {
    "car".into()
}

impl SceneBox {
    pub fn label(&self) -> ObjectLabel {
        ObjectLabel {
            id: self.id.clone(),
            category: self.category.clone(),
            size: Vector3::from(self.size),
            center: Point3::from(self.center),
            rotation: RotationVector::new(0.0, 0.0, self.yaw),
        }
    }

    fn footprint(&self) -> BevBox {
        BevBox::new([self.center[0], self.center[1]], [self.size[0], self.size[1]], self.yaw)
    }

    /// Box frame → world.
    fn pose(&self) -> RigidTransform {
        RigidTransform::from_rotation_vector(
            &RotationVector::new(0.0, 0.0, self.yaw),
            Vector3::from(self.center),
            Frame::Vehicle,
            Frame::World,
        )
    }
}

/// Vertical wall over the segment `start → end`, between two heights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub z_min: f64,
    pub z_max: f64,
}

impl Wall {
    /// Thin bird's-eye rectangle along the segment.
    pub fn footprint(&self) -> BevBox {
        let (dx, dy) = (self.end[0] - self.start[0], self.end[1] - self.start[1]);
        let mid = [0.5 * (self.start[0] + self.end[0]), 0.5 * (self.start[1] + self.end[1])];
        BevBox::new(mid, [dx.hypot(dy), 0.1], dy.atan2(dx))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticScene {
    /// World-frame ground `z = ax + by + c`.
    pub ground: PlaneModel,
    /// Ground is sampled over `|x|, |y| <= ground_half_extent`; the oracle
    /// treats it as the unbounded plane, as the pipeline extrapolates it.
    #[serde(default = "default_extent")]
    pub ground_half_extent: f64,
    #[serde(default)]
    pub boxes: Vec<SceneBox>,
    #[serde(default)]
    pub walls: Vec<Wall>,
    /// Points per square meter on every surface.
    pub density: f64,
    /// Standard deviation (m) of the perpendicular sampling noise.
    #[serde(default)]
    pub noise_sigma: f64,
}

fn default_extent() -> f64 {
    60.0
}

impl AnalyticScene {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(format!("scene: {m}")));
        if !(self.density > 0.0 && self.density.is_finite()) {
            return bad("density must be positive".into());
        }
        if !(self.noise_sigma >= 0.0) || !(self.ground_half_extent > 0.0) {
            return bad("noise_sigma must be non-negative and ground_half_extent positive".into());
        }
        if ![self.ground.a, self.ground.b, self.ground.c]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("ground coefficients must be finite".into());
        }
        for b in &self.boxes {
            if b.size.iter().any(|s| !(*s > 0.0)) {
                return bad(format!("box `{}` has a non-positive extent", b.id));
            }
        }
        for w in &self.walls {
            let len = (w.end[0] - w.start[0]).hypot(w.end[1] - w.start[1]);
            if !(len > 0.0 && w.z_max > w.z_min) {
                return bad("walls need a positive length and height".into());
            }
        }
        Ok(())
    }

    /// Labels of every box.
    pub fn labels(&self) -> Vec<ObjectLabel> {
        self.boxes.iter().map(SceneBox::label).collect()
    }

    /// Labels of the boxes that count as vehicles.
    pub fn vehicles(&self) -> Vec<ObjectLabel> {
        self.labels().into_iter().filter(ObjectLabel::is_vehicle).collect()
    }

    /// `n` car poses for the virtual sensor: the scene's vehicles first,
    /// then free-standing poses (not sampled as surfaces) clear of every box
    /// and wall.
    pub fn target_poses(&self, n: usize, seed: u64) -> Vec<ObjectLabel> {
        let mut out: Vec<ObjectLabel> = self.vehicles().into_iter().take(n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut taken: Vec<BevBox> = self.boxes.iter().map(SceneBox::footprint).collect();
        taken.extend(self.walls.iter().map(Wall::footprint));
        let size = [4.5, 1.8, 1.6];
        let mut attempts = 0;
        while out.len() < n && attempts < 10_000 {
            attempts += 1;
            let (x, y, yaw) = (
                rng.random_range(-15.0..15.0),
                rng.random_range(-15.0..15.0),
                rng.random_range(-PI..PI),
            );
            let grown = BevBox::new([x, y], [size[0] + 3.0, size[1] + 3.0], yaw);
            if taken.iter().any(|f| crate::labels::bev_iou(f, &grown) > 0.0) {
                continue;
            }
            taken.push(BevBox::new([x, y], [size[0], size[1]], yaw));
            out.push(ObjectLabel {
                id: format!("pose{}", out.len()),
                category: "car".into(),
                size: Vector3::from(size),
                center: Point3::new(x, y, self.ground_z(x, y) + 0.5 * size[2]),
                rotation: RotationVector::new(0.0, 0.0, yaw),
            });
        }
        out
    }

    pub fn ground_z(&self, x: f64, y: f64) -> f64 {
        self.ground.a * x + self.ground.b * y + self.ground.c
    }

    /// Random scene: ground plus `objects` boxes and walls that keep clear
    /// of the origin and of each other's footprints. Box `0` is always a car
    /// near the origin.
    pub fn random(seed: u64, objects: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ground = PlaneModel::new(
            rng.random_range(-0.01..0.01),
            rng.random_range(-0.01..0.01),
            rng.random_range(-0.3..0.3),
        );
        let mut scene = Self {
            ground,
            ground_half_extent: 60.0,
            boxes: Vec::new(),
            walls: Vec::new(),
            density: 25.0,
            noise_sigma: 0.0,
        };
        let mut footprints: Vec<BevBox> = Vec::new();
        let place = |scene: &mut Self,
                     footprints: &mut Vec<BevBox>,
                     rng: &mut ChaCha8Rng,
                     size: [f64; 3],
                     near: bool,
                     category: &str| {
            for _ in 0..200 {
                let (r, a) = if near {
                    (rng.random_range(0.0..4.0), rng.random_range(-3.2..3.2))
                } else {
                    (rng.random_range(8.0..35.0), rng.random_range(-3.2..3.2))
                };
                let yaw: f64 = rng.random_range(-PI..PI);
                let (x, y) = (r * f64::cos(a), r * f64::sin(a));
                // keep a 1.5 m gap between footprints
                let grown = BevBox::new([x, y], [size[0] + 3.0, size[1] + 3.0], yaw);
                if footprints.iter().any(|f| crate::labels::bev_iou(f, &grown) > 0.0) {
                    continue;
                }
                footprints.push(BevBox::new([x, y], [size[0], size[1]], yaw));
                let z = scene.ground_z(x, y) + 0.5 * size[2];
                let id = scene.boxes.len().to_string();
                scene.boxes.push(SceneBox {
                    id,
                    category: category.into(),
                    center: [x, y, z],
                    size,
                    yaw,
                });
                return;
            }
        };
        place(&mut scene, &mut footprints, &mut rng, [4.5, 1.8, 1.6], true, "car");
        for k in 0..objects {
            if k % 3 == 2 {
                for _ in 0..200 {
                    let a: f64 = rng.random_range(-3.2..3.2);
                    let r = rng.random_range(20.0..40.0);
                    let (cx, cy) = (r * a.cos(), r * a.sin());
                    // walls run tangentially
                    let half = rng.random_range(5.0..10.0);
                    let (tx, ty) = (-a.sin() * half, a.cos() * half);
                    let z0 = scene.ground_z(cx, cy);
                    let wall = Wall {
                        start: [cx - tx, cy - ty],
                        end: [cx + tx, cy + ty],
                        z_min: z0,
                        z_max: z0 + rng.random_range(2.0..4.0),
                    };
                    let f = wall.footprint();
                    let grown = BevBox::new(f.center, [2.0 * f.half[0] + 3.0, 2.0 * f.half[1] + 3.0], f.yaw);
                    if footprints.iter().any(|b| crate::labels::bev_iou(b, &grown) > 0.0) {
                        continue;
                    }
                    footprints.push(f);
                    scene.walls.push(wall);
                    break;
                }
            } else {
                let size = if k % 3 == 0 {
                    [4.6, 1.9, 1.6]
                } else {
                    [
                        rng.random_range(3.0..8.0),
                        rng.random_range(2.0..3.0),
                        rng.random_range(2.0..3.5),
                    ]
                };
                place(
                    &mut scene,
                    &mut footprints,
                    &mut rng,
                    size,
                    false,
                    if k % 3 == 0 { "car" } else { "truck" },
                );
            }
        }
        scene
    }
}

/// What a sampled point was drawn from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthTag {
    Ground,
    /// A box, by id.
    Object(String),
    /// A wall, by index.
    Wall(usize),
}

impl TruthTag {
    pub fn is_ground(&self) -> bool {
        matches!(self, TruthTag::Ground)
    }
}

/// Stratified grid over a parallelogram `origin + s·u + t·v`,
/// `round(|u|·√ρ) × round(|v|·√ρ)` cells with one jittered sample each.
fn stratified(origin: Point3, u: Vector3, v: Vector3, density: f64, rng: &mut ChaCha8Rng) -> Vec<Point3> {
    let root = density.sqrt();
    let nu = (u.norm() * root).round() as usize;
    let nv = (v.norm() * root).round() as usize;
    let mut out = Vec::with_capacity(nu * nv);
    for a in 0..nu {
        for b in 0..nv {
            let s = (a as f64 + rng.random::<f64>()) / nu as f64;
            let t = (b as f64 + rng.random::<f64>()) / nv as f64;
            out.push(origin + u * s + v * t);
        }
    }
    out
}

/// World-frame cloud sampled from every surface, with one tag per point.
/// Deterministic for a fixed seed.
pub fn sample_scene(scene: &AnalyticScene, seed: u64) -> Result<(PointCloud, Vec<TruthTag>)> {
    scene.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, scene.noise_sigma).expect("sigma validated");
    let mut points = Vec::new();
    let mut tags = Vec::new();
    let mut push = |p: Point3, n: &Vector3, tag: TruthTag, intensity: f64, rng: &mut ChaCha8Rng| {
        let p = if scene.noise_sigma > 0.0 {
            p + n * noise.sample(rng)
        } else {
            p
        };
        points.push(LidarPoint { position: p, intensity });
        tags.push(tag);
    };

    // ground, leaving out box footprints
    let e = scene.ground_half_extent;
    let g = &scene.ground;
    let g_normal = Vector3::new(g.a, g.b, -1.0).normalize();
    let footprints: Vec<BevBox> = scene.boxes.iter().map(SceneBox::footprint).collect();
    for p in stratified(
        Point3::new(-e, -e, 0.0),
        Vector3::x() * 2.0 * e,
        Vector3::y() * 2.0 * e,
        scene.density,
        &mut rng,
    ) {
        if footprints.iter().any(|f| f.contains([p.x, p.y])) {
            continue;
        }
        let intensity = rng.random_range(0u32..20) as f64;
        push(
            Point3::new(p.x, p.y, scene.ground_z(p.x, p.y)),
            &g_normal,
            TruthTag::Ground,
            intensity,
            &mut rng,
        );
    }

    // four sides and the top of every box
    for b in &scene.boxes {
        let pose = b.pose();
        let [l, w, h] = b.size;
        let (hl, hw, hh) = (0.5 * l, 0.5 * w, 0.5 * h);
        let faces = [
            (
                Point3::new(hl, -hw, -hh),
                Vector3::new(0.0, w, 0.0),
                Vector3::new(0.0, 0.0, h),
                Vector3::x(),
            ),
            (
                Point3::new(-hl, -hw, -hh),
                Vector3::new(0.0, w, 0.0),
                Vector3::new(0.0, 0.0, h),
                -Vector3::x(),
            ),
            (
                Point3::new(-hl, hw, -hh),
                Vector3::new(l, 0.0, 0.0),
                Vector3::new(0.0, 0.0, h),
                Vector3::y(),
            ),
            (
                Point3::new(-hl, -hw, -hh),
                Vector3::new(l, 0.0, 0.0),
                Vector3::new(0.0, 0.0, h),
                -Vector3::y(),
            ),
            (
                Point3::new(-hl, -hw, hh),
                Vector3::new(l, 0.0, 0.0),
                Vector3::new(0.0, w, 0.0),
                Vector3::z(),
            ),
        ];
        let intensity = 40.0 + (b.id.bytes().map(u32::from).sum::<u32>() % 50) as f64;
        for (origin, u, v, n) in faces {
            let n = pose.transform_vector(&n);
            for p in stratified(origin, u, v, scene.density, &mut rng) {
                push(
                    pose.transform_point(&p),
                    &n,
                    TruthTag::Object(b.id.clone()),
                    intensity,
                    &mut rng,
                );
            }
        }
    }

    for (k, w) in scene.walls.iter().enumerate() {
        let along = Vector3::new(w.end[0] - w.start[0], w.end[1] - w.start[1], 0.0);
        let n = Vector3::new(-along.y, along.x, 0.0).normalize();
        let origin = Point3::new(w.start[0], w.start[1], w.z_min);
        for p in stratified(
            origin,
            along,
            Vector3::z() * (w.z_max - w.z_min),
            scene.density,
            &mut rng,
        ) {
            push(p, &n, TruthTag::Wall(k), 90.0 + k as f64, &mut rng);
        }
    }
    Ok((PointCloud::from_points(points, Frame::World), tags))
}

/// Exact nearest hit of every ray of `model`, posed by `t_lw` (world →
/// lidar), against the scene surfaces; returns are in the lidar frame and
/// range-gated like the pipeline. Boxes that contain the sensor origin are
/// ignored, as the pipeline culls the carrying vehicle. Intensities are 0.
pub fn oracle_cast(scene: &AnalyticScene, t_lw: &RigidTransform, model: &LidarModel) -> GeneratedCloud {
    let t_wl = t_lw.inverse();
    let origin = t_wl.transform_point(&Point3::origin());
    let boxes: Vec<(RigidTransform, [f64; 3])> = scene
        .boxes
        .iter()
        .map(|b| (b.pose().inverse(), b.size.map(|s| 0.5 * s)))
        .filter(|(to_box, half)| {
            let o = to_box.transform_point(&origin);
            !(0..3).all(|k| o[k].abs() <= half[k])
        })
        .collect();

    let hits: Vec<Option<GeneratedPoint>> = (0..model.ray_count())
        .into_par_iter()
        .map(|id| {
            let ray = model.ray_from_id(id);
            let d_l = model.direction_unchecked(ray);
            let d = t_wl.transform_vector(&d_l);
            let mut best: Option<(f64, Origin)> = None;
            let mut consider = |t: Option<f64>, kind: Origin| {
                if let Some(t) = t.filter(|t| *t > 0.0) {
                    if best.is_none_or(|(bt, _)| t < bt) {
                        best = Some((t, kind));
                    }
                }
            };
            consider(ground_hit(scene, &origin, &d), Origin::Ground);
            for (to_box, half) in &boxes {
                consider(
                    slab_hit(&to_box.transform_point(&origin), &to_box.transform_vector(&d), half),
                    Origin::NonGround,
                );
            }
            for w in &scene.walls {
                consider(wall_hit(w, &origin, &d), Origin::NonGround);
            }
            let (t, kind) = best?;
            model.in_range(t).then(|| GeneratedPoint {
                ray,
                point: LidarPoint {
                    position: Point3::from(d_l * t),
                    intensity: 0.0,
                },
                origin: kind,
                fallback: false,
            })
        })
        .collect();
    GeneratedCloud {
        points: hits.into_iter().flatten().collect(),
    }
}

fn ground_hit(scene: &AnalyticScene, o: &Point3, d: &Vector3) -> Option<f64> {
    let g = &scene.ground;
    let n = Vector3::new(g.a, g.b, -1.0);
    let nd = n.dot(d);
    if nd == 0.0 {
        return None;
    }
    Some(-(n.dot(&o.coords) + g.c) / nd)
}

/// Entry distance of a ray into an axis-aligned box centered at the origin.
pub fn slab_hit(o: &Point3, d: &Vector3, half: &[f64; 3]) -> Option<f64> {
    let (mut t_near, mut t_far) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..3 {
        if d[k] == 0.0 {
            if o[k].abs() > half[k] {
                return None;
            }
            continue;
        }
        let (a, b) = ((-half[k] - o[k]) / d[k], (half[k] - o[k]) / d[k]);
        t_near = t_near.max(a.min(b));
        t_far = t_far.min(a.max(b));
    }
    (t_near <= t_far && t_near > 0.0).then_some(t_near)
}

fn wall_hit(w: &Wall, o: &Point3, d: &Vector3) -> Option<f64> {
    let along = Vector3::new(w.end[0] - w.start[0], w.end[1] - w.start[1], 0.0);
    let n = Vector3::new(-along.y, along.x, 0.0);
    let nd = n.dot(d);
    if nd == 0.0 {
        return None;
    }
    let s = Point3::new(w.start[0], w.start[1], 0.0);
    let t = n.dot(&(s - o)) / nd;
    let p = o + d * t;
    let u = (p - s).dot(&along) / along.norm_squared();
    ((0.0..=1.0).contains(&u) && p.z >= w.z_min && p.z <= w.z_max).then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lidar::RayIndex;

    fn ground_only(density: f64) -> AnalyticScene {
        AnalyticScene {
            ground: PlaneModel::new(0.0, 0.0, -1.9),
            ground_half_extent: 50.0,
            boxes: Vec::new(),
            walls: Vec::new(),
            density,
            noise_sigma: 0.0,
        }
    }

    #[test]
    fn ground_only_sampling() {
        let (cloud, tags) = sample_scene(&ground_only(1.0), 3).unwrap();
        assert_eq!(cloud.len(), 10_000);
        assert!(tags.iter().all(TruthTag::is_ground));
        assert!(cloud.iter().all(|p| p.position.z == -1.9));
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut scene = AnalyticScene::random(5, 4);
        scene.noise_sigma = 0.02;
        let a = sample_scene(&scene, 17).unwrap();
        let b = sample_scene(&scene, 17).unwrap();
        assert_eq!(a, b);
        let c = sample_scene(&scene, 18).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn face_counts_are_exact() {
        // 2 x 1.5 x 1 box: the 2 x 1.5 top gets round(2√10)·round(1.5√10) = 6·5
        let mut scene = ground_only(10.0);
        scene.ground_half_extent = 1.0;
        scene.boxes.push(SceneBox {
            id: "b".into(),
            category: "barrier".into(),
            center: [20.0, 0.0, 0.0],
            size: [2.0, 1.5, 1.0],
            yaw: 0.3,
        });
        let (cloud, tags) = sample_scene(&scene, 1).unwrap();
        let top = cloud
            .iter()
            .zip(&tags)
            .filter(|(p, t)| !t.is_ground() && (p.position.z - 0.5).abs() < 1e-12)
            .count();
        assert_eq!(top, 30);
        // sides: 2 x 1 → 6·3, 1.5 x 1 → 5·3
        assert_eq!(tags.iter().filter(|t| !t.is_ground()).count(), 30 + 2 * 18 + 2 * 15);
    }

    #[test]
    fn ground_is_empty_under_boxes() {
        let mut scene = ground_only(4.0);
        scene.boxes.push(SceneBox {
            id: "c".into(),
            category: "car".into(),
            center: [5.0, 5.0, -1.1],
            size: [4.0, 2.0, 1.6],
            yaw: 0.7,
        });
        let (cloud, tags) = sample_scene(&scene, 2).unwrap();
        let fp = scene.boxes[0].footprint();
        for (p, t) in cloud.iter().zip(&tags) {
            if t.is_ground() {
                assert!(!fp.contains([p.position.x, p.position.y]));
            }
        }
    }

    #[test]
    fn slab_examples() {
        let half = [0.5; 3];
        assert_eq!(slab_hit(&Point3::new(-10.0, 0.0, 0.0), &Vector3::x(), &half), Some(9.5));
        assert_eq!(slab_hit(&Point3::new(-10.0, 0.0, 0.0), &-Vector3::x(), &half), None);
        assert_eq!(slab_hit(&Point3::new(-10.0, 2.0, 0.0), &Vector3::x(), &half), None);
    }

    #[test]
    fn oracle_examples() {
        let flat = LidarModel::default_pandar64()
            .with_elevation_table(vec![-10.0, 0.0, 10.0])
            .unwrap();
        let t_lw = RigidTransform::identity(Frame::World);
        let t_lw = RigidTransform {
            target: Frame::Lidar,
            ..t_lw
        };
        let mut scene = ground_only(1.0);
        let out = oracle_cast(&scene, &t_lw, &flat);
        assert!(out.iter().all(|g| g.ray.j == 0));
        assert_eq!(out.len(), flat.steps());

        scene.boxes.push(SceneBox {
            id: "cube".into(),
            category: "barrier".into(),
            center: [10.0, 0.0, 0.0],
            size: [1.0; 3],
            yaw: 0.0,
        });
        let out = oracle_cast(&scene, &t_lw, &flat);
        let g = out.iter().find(|g| g.ray == RayIndex::new(0, 1)).unwrap();
        assert!((g.point.position - Point3::new(9.5, 0.0, 0.0)).norm() < 1e-12);
        assert_eq!(g.origin, Origin::NonGround);
    }

    #[test]
    fn oracle_hits_lie_on_surfaces() {
        let scene = AnalyticScene::random(3, 5);
        let model = LidarModel::default_pandar64();
        let target = &scene.vehicles()[0];
        let t_lw = crate::alignment::world_to_lidar(target, &model);
        let out = oracle_cast(&scene, &t_lw, &model);
        let t_wl = t_lw.inverse();
        assert!(out.len() > 10_000);
        for g in out.iter() {
            let p = t_wl.transform_point(&g.point.position);
            let on_ground = (scene.ground_z(p.x, p.y) - p.z).abs() < 1e-9;
            let on_box = scene.boxes.iter().any(|b| {
                let q = b.pose().inverse().transform_point(&p);
                let h = b.size.map(|s| 0.5 * s);
                let inside = (0..3).all(|k| q[k].abs() <= h[k] + 1e-9);
                inside && (0..3).any(|k| (q[k].abs() - h[k]).abs() < 1e-9)
            });
            let on_wall = scene.walls.iter().any(|w| {
                let along = Vector3::new(w.end[0] - w.start[0], w.end[1] - w.start[1], 0.0);
                let n = Vector3::new(-along.y, along.x, 0.0).normalize();
                n.dot(&(p - Point3::new(w.start[0], w.start[1], p.z))).abs() < 1e-9
            });
            assert!(on_ground || on_box || on_wall, "{g:?}");
            assert_eq!(on_ground && !on_box && !on_wall, g.origin == Origin::Ground);
            let d = model.ray_direction(g.ray).unwrap();
            assert!((g.point.position - Point3::from(d * g.point.range())).norm() < 1e-9);
        }
    }
}
