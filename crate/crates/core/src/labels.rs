// SPDX-License-Identifier: Apache-2.0

//! Moving box labels into the virtual sensor's frame, and bird's-eye-view
//! overlap of rotated boxes.

use crate::alignment::ObjectLabel;
use crate::error::Result;
use crate::geometry::{inv_rodrigues, rodrigues, RigidTransform};

/// A label expressed in the lidar frame of one target vehicle.
#[derive(Clone, Debug, PartialEq)]
pub struct EgoLabel {
    pub label: ObjectLabel,
    /// The label of the vehicle carrying the virtual sensor.
    pub is_ego: bool,
}

/// Maps world-frame labels through `t_lw`: centers by `R·X + t`, rotations by
/// `inv_rodrigues(R · rodrigues(Θ))`. Ids, categories and sizes are copied.
pub fn map_labels(labels: &[ObjectLabel], t_lw: &RigidTransform, ego_id: Option<&str>) -> Result<Vec<EgoLabel>> {
    labels
        .iter()
        .map(|l| {
            let rotation = inv_rodrigues(&(t_lw.rotation * rodrigues(&l.rotation)))?;
            Ok(EgoLabel {
                label: ObjectLabel {
                    id: l.id.clone(),
                    category: l.category.clone(),
                    size: l.size,
                    center: t_lw.transform_point(&l.center),
                    rotation,
                },
                is_ego: ego_id == Some(l.id.as_str()),
            })
        })
        .collect()
}

/// Rotated rectangle in the xy plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BevBox {
    pub center: [f64; 2],
    /// Half length and half width.
    pub half: [f64; 2],
    pub yaw: f64,
}

impl BevBox {
    pub fn new(center: [f64; 2], size: [f64; 2], yaw: f64) -> Self {
        debug_assert!(size[0] > 0.0 && size[1] > 0.0, "box extents must be positive");
        Self {
            center,
            half: [size[0] * 0.5, size[1] * 0.5],
            yaw,
        }
    }

    /// Top-down footprint of a label; yaw is the heading of the box's x axis.
    pub fn from_label(label: &ObjectLabel) -> Self {
        let r = rodrigues(&label.rotation);
        Self::new(
            [label.center.x, label.center.y],
            [label.size.x, label.size.y],
            r[(1, 0)].atan2(r[(0, 0)]),
        )
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.yaw.sin_cos();
        let [hl, hw] = self.half;
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
            .map(|(u, v)| [self.center[0] + c * u - s * v, self.center[1] + s * u + c * v])
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half[0] * self.half[1]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let (s, c) = self.yaw.sin_cos();
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        (c * dx + s * dy).abs() <= self.half[0] && (-s * dx + c * dy).abs() <= self.half[1]
    }
}

/// Intersection over union of two rotated rectangles.
pub fn bev_iou(a: &BevBox, b: &BevBox) -> f64 {
    let inter = polygon_area(&clip(&a.corners(), &b.corners()));
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Sutherland–Hodgman clip of `subject` by the convex CCW polygon `clipper`.
fn clip(subject: &[[f64; 2]], clipper: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = subject.to_vec();
    for k in 0..clipper.len() {
        if out.is_empty() {
            break;
        }
        let (p, q) = (clipper[k], clipper[(k + 1) % clipper.len()]);
        // > 0 on the inner (left) side of p→q
        let side = |v: [f64; 2]| (q[0] - p[0]) * (v[1] - p[1]) - (q[1] - p[1]) * (v[0] - p[0]);
        let input = std::mem::take(&mut out);
        for n in 0..input.len() {
            let (cur, prev) = (input[n], input[(n + input.len() - 1) % input.len()]);
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(crossing(prev, cur, sp, sc));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(crossing(prev, cur, sp, sc));
            }
        }
    }
    out
}

fn crossing(a: [f64; 2], b: [f64; 2], sa: f64, sb: f64) -> [f64; 2] {
    let t = sa / (sa - sb);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Shoelace area (absolute).
fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let twice: f64 = (0..poly.len())
        .map(|n| {
            let (p, q) = (poly[n], poly[(n + 1) % poly.len()]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum();
    0.5 * twice.abs()
}
