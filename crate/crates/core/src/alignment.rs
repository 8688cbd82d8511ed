// SPDX-License-Identifier: Apache-2.0

//! World → vehicle → virtual-LiDAR transform chain and range gating.

use crate::error::Result;
use crate::geometry::{Frame, Point3, PointCloud, RigidTransform, RotationVector, Vector3};
use crate::lidar::LidarModel;

/// Margin added to every side of the ego box by [`ego_cull`].
pub const EGO_CULL_MARGIN: f64 = 0.2;

/// Categories treated as vehicles when every vehicle is selected as a target.
pub const VEHICLE_CATEGORIES: &[&str] = &[
    "car",
    "truck",
    "bus",
    "van",
    "trailer",
    "construction_vehicle",
    "vehicle",
];

/// Annotated 3D box in the world frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectLabel {
    pub id: String,
    pub category: String,
    /// `(length, width, height)` along the box's own x, y, z axes.
    pub size: Vector3,
    pub center: Point3,
    pub rotation: RotationVector,
}

impl ObjectLabel {
    pub fn is_vehicle(&self) -> bool {
        VEHICLE_CATEGORIES
            .iter()
            .any(|c| c.eq_ignore_ascii_case(self.category.trim()))
    }

    /// The eight box corners in the label's frame.
    pub fn corners(&self) -> [Point3; 8] {
        let pose = vehicle_to_world(self);
        let h = self.size * 0.5;
        let mut out = [Point3::origin(); 8];
        for (n, c) in out.iter_mut().enumerate() {
            let sx = if n & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if n & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if n & 4 == 0 { -1.0 } else { 1.0 };
            *c = pose.transform_point(&Point3::new(sx * h.x, sy * h.y, sz * h.z));
        }
        out
    }
}

/// `T_wc`: vehicle-box frame into the world frame.
pub fn vehicle_to_world(label: &ObjectLabel) -> RigidTransform {
    RigidTransform::from_rotation_vector(&label.rotation, label.center.coords, Frame::Vehicle, Frame::World)
}

/// `T_lw = T_lc · T_cw`, where `T_lc` is the inverse of the sensor's mount
/// pose and `T_cw` the inverse of [`vehicle_to_world`].
pub fn world_to_lidar(label: &ObjectLabel, model: &LidarModel) -> RigidTransform {
    let lidar_from_vehicle = model.mount().inverse();
    let vehicle_from_world = vehicle_to_world(label).inverse();
    lidar_from_vehicle.compose(&vehicle_from_world)
}

/// Indices of the points with `r_min <= r <= r_max`.
pub fn range_filter_indices(cloud: &PointCloud, model: &LidarModel) -> Result<Vec<usize>> {
    cloud.expect_frame(Frame::Lidar)?;
    Ok(cloud
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| model.in_range(p.range()))
        .map(|(n, _)| n)
        .collect())
}

/// Keeps the points within the sensor's closed range interval, in order.
pub fn range_filter(cloud: &PointCloud, model: &LidarModel) -> Result<PointCloud> {
    let keep = range_filter_indices(cloud, model)?;
    Ok(cloud.select(&keep))
}

/// Whether a lidar-frame point lies inside the ego box grown by `margin`.
pub fn in_ego_box(p: &Point3, ego: &ObjectLabel, model: &LidarModel, margin: f64) -> bool {
    let half = ego.size * 0.5 + Vector3::repeat(margin);
    let q = model.mount().transform_point(p);
    q.x.abs() <= half.x && q.y.abs() <= half.y && q.z.abs() <= half.z
}

/// Drops lidar-frame points that fall inside the ego vehicle's box grown by
/// `margin` on every side. Returns the kept cloud and the number removed.
pub fn ego_cull(cloud: &PointCloud, ego: &ObjectLabel, model: &LidarModel, margin: f64) -> Result<(PointCloud, usize)> {
    cloud.expect_frame(Frame::Lidar)?;
    let points: Vec<_> = cloud
        .points
        .iter()
        .filter(|p| !in_ego_box(&p.position, ego, model, margin))
        .copied()
        .collect();
    let removed = cloud.len() - points.len();
    Ok((PointCloud::from_points(points, Frame::Lidar), removed))
}
