// SPDX-License-Identifier: Apache-2.0

//! Point types, spherical coordinates and rigid transforms.
//!
//! Transforms use the column-vector convention: `p' = R p + t`, and
//! `a.compose(&b)` applies `b` first. Rotation vectors are axis-angle
//! (direction = axis, magnitude = angle in radians) everywhere.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;
pub type Matrix3 = nalgebra::Matrix3<f64>;

/// Largest element-wise deviation of `RᵀR` from identity (and of `det R`
/// from one) accepted when constructing a [`RigidTransform`].
pub const TRANSFORM_TOLERANCE: f64 = 1e-9;

/// Orthonormality tolerance accepted by [`inv_rodrigues`].
pub const INV_RODRIGUES_TOLERANCE: f64 = 1e-6;

/// Below this angle (radians) [`rodrigues`] uses its series expansion.
pub const SMALL_ANGLE: f64 = 1e-8;

/// Coordinate frame a cloud or transform endpoint is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    World,
    Vehicle,
    Lidar,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LidarPoint {
    pub position: Point3,
    /// Reflectance in `[0, 255]`.
    pub intensity: f64,
}

impl LidarPoint {
    pub fn new(x: f64, y: f64, z: f64, intensity: f64) -> Self {
        Self {
            position: Point3::new(x, y, z),
            intensity,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.position.coords.iter().all(|c| c.is_finite())
            && self.intensity.is_finite()
            && (0.0..=255.0).contains(&self.intensity)
    }

    pub fn range(&self) -> f64 {
        self.position.coords.norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub points: Vec<LidarPoint>,
    pub frame: Frame,
}

impl PointCloud {
    pub fn new(frame: Frame) -> Self {
        Self {
            points: Vec::new(),
            frame,
        }
    }

    pub fn from_points(points: Vec<LidarPoint>, frame: Frame) -> Self {
        Self { points, frame }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LidarPoint> {
        self.points.iter()
    }

    /// Index of the first point that is non-finite or has an out-of-range
    /// intensity.
    pub fn first_invalid(&self) -> Option<usize> {
        self.points.iter().position(|p| !p.is_valid())
    }

    pub(crate) fn expect_frame(&self, expected: Frame) -> Result<()> {
        if self.frame == expected {
            Ok(())
        } else {
            Err(Error::FrameMismatch {
                expected,
                found: self.frame,
            })
        }
    }

    /// Sub-cloud made of the points at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            frame: self.frame,
        }
    }
}

/// `r` in meters, azimuth `phi` in `(-π, π]`, polar angle `theta` in `[0, π]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalCoord {
    pub r: f64,
    pub phi: f64,
    pub theta: f64,
}

/// Cartesian to spherical. The origin maps to `(0, 0, 0)`.
pub fn to_spherical(p: &Point3) -> SphericalCoord {
    let r = p.coords.norm();
    if r == 0.0 {
        return SphericalCoord {
            r: 0.0,
            phi: 0.0,
            theta: 0.0,
        };
    }
    let mut phi = p.y.atan2(p.x);
    // atan2 returns -π for (-x, -0.0); keep the half-open (-π, π] range.
    if phi == -std::f64::consts::PI {
        phi = std::f64::consts::PI;
    }
    SphericalCoord {
        r,
        phi,
        theta: (p.z / r).clamp(-1.0, 1.0).acos(),
    }
}

pub fn from_spherical(s: &SphericalCoord) -> Point3 {
    let (st, ct) = s.theta.sin_cos();
    let (sp, cp) = s.phi.sin_cos();
    Point3::new(s.r * st * cp, s.r * st * sp, s.r * ct)
}

/// Axis-angle rotation vector in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationVector(pub Vector3);

impl RotationVector {
    pub fn new(rx: f64, ry: f64, rz: f64) -> Self {
        Self(Vector3::new(rx, ry, rz))
    }

    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn angle(&self) -> f64 {
        self.0.norm()
    }

    pub fn to_matrix(&self) -> Matrix3 {
        rodrigues(self)
    }
}

fn skew(v: &Vector3) -> Matrix3 {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rotation matrix of an axis-angle vector.
pub fn rodrigues(r: &RotationVector) -> Matrix3 {
    let theta = r.angle();
    if theta < SMALL_ANGLE {
        let k = skew(&r.0);
        return Matrix3::identity() + k + 0.5 * k * k;
    }
    let k = skew(&(r.0 / theta));
    let (s, c) = theta.sin_cos();
    Matrix3::identity() + s * k + (1.0 - c) * (k * k)
}

/// Largest element-wise deviation of `m` from a proper rotation.
pub fn orthonormality_error(m: &Matrix3) -> f64 {
    let gram = m.transpose() * m - Matrix3::identity();
    let det = (m.determinant() - 1.0).abs();
    gram.amax().max(det)
}

/// Inverse of [`rodrigues`], using [`INV_RODRIGUES_TOLERANCE`].
pub fn inv_rodrigues(m: &Matrix3) -> Result<RotationVector> {
    inv_rodrigues_with_tolerance(m, INV_RODRIGUES_TOLERANCE)
}

/// Axis-angle vector with magnitude in `[0, π]`. At exactly π the axis is
/// chosen so that its first nonzero component is positive.
pub fn inv_rodrigues_with_tolerance(m: &Matrix3, tolerance: f64) -> Result<RotationVector> {
    let deviation = orthonormality_error(m);
    if !(deviation <= tolerance) {
        return Err(Error::NonOrthonormalInput { deviation });
    }
    // w = sin(θ)·axis
    let w = 0.5 * Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
    let s = w.norm();
    let c = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = s.atan2(c);

    if theta < SMALL_ANGLE {
        return Ok(RotationVector(w));
    }
    if c > -0.5 {
        return Ok(RotationVector(w * (theta / s)));
    }

    // Near π: (R + Rᵀ)/2 − cos θ·I = (1 − cos θ)·a·aᵀ.
    let b = 0.5 * (m + m.transpose()) - c * Matrix3::identity();
    let k = (0..3).max_by(|&x, &y| b[(x, x)].total_cmp(&b[(y, y)])).unwrap_or(0);
    let mut axis: Vector3 = b.column(k).into_owned() / (b[(k, k)] * (1.0 - c)).sqrt();
    axis.normalize_mut();

    if s > 1e-10 {
        if axis.dot(&w) < 0.0 {
            axis = -axis;
        }
    } else if let Some(first) = axis.iter().copied().find(|v| v.abs() > 1e-12) {
        if first < 0.0 {
            axis = -axis;
        }
    }
    Ok(RotationVector(axis * theta))
}

/// Intrinsic Z-Y-X Euler angles `(roll, pitch, yaw)` of a rotation matrix,
/// for exporting labels to tools that expect Euler angles.
pub fn euler_zyx(m: &Matrix3) -> (f64, f64, f64) {
    let pitch = (-m[(2, 0)]).clamp(-1.0, 1.0).asin();
    if m[(2, 0)].abs() < 1.0 - 1e-12 {
        let roll = m[(2, 1)].atan2(m[(2, 2)]);
        let yaw = m[(1, 0)].atan2(m[(0, 0)]);
        (roll, pitch, yaw)
    } else {
        // gimbal lock: fold everything into yaw
        let yaw = (-m[(0, 1)]).atan2(m[(1, 1)]);
        (0.0, pitch, yaw)
    }
}

/// Rotation + translation mapping points from `source` to `target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3,
    pub translation: Vector3,
    pub source: Frame,
    pub target: Frame,
}

impl RigidTransform {
    pub fn new(rotation: Matrix3, translation: Vector3, source: Frame, target: Frame) -> Result<Self> {
        Self::with_tolerance(rotation, translation, source, target, TRANSFORM_TOLERANCE)
    }

    pub fn with_tolerance(
        rotation: Matrix3,
        translation: Vector3,
        source: Frame,
        target: Frame,
        tolerance: f64,
    ) -> Result<Self> {
        let deviation = orthonormality_error(&rotation);
        if !(deviation <= tolerance) || translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonOrthonormalInput { deviation });
        }
        Ok(Self {
            rotation,
            translation,
            source,
            target,
        })
    }

    /// Identity within a single frame.
    pub fn identity(frame: Frame) -> Self {
        Self::relabel(Matrix3::identity(), Vector3::zeros(), frame, frame)
    }

    pub fn from_translation(t: Vector3, source: Frame, target: Frame) -> Self {
        Self::relabel(Matrix3::identity(), t, source, target)
    }

    /// Transform built from an axis-angle rotation; always orthonormal.
    pub fn from_rotation_vector(r: &RotationVector, t: Vector3, source: Frame, target: Frame) -> Self {
        Self::relabel(rodrigues(r), t, source, target)
    }

    fn relabel(rotation: Matrix3, translation: Vector3, source: Frame, target: Frame) -> Self {
        Self {
            rotation,
            translation,
            source,
            target,
        }
    }

    /// `self ∘ other`: applies `other` first. `other.target` is expected to
    /// equal `self.source`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        debug_assert_eq!(
            other.target, self.source,
            "composing transforms across unrelated frames"
        );
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
            source: other.source,
            target: self.target,
        }
    }

    /// `R' = Rᵀ`, `t' = −Rᵀ t`.
    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
            source: self.target,
            target: self.source,
        }
    }

    pub fn transform_point(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn transform_vector(&self, v: &Vector3) -> Vector3 {
        self.rotation * v
    }

    /// Maps every point of `cloud`; order and intensities are preserved.
    pub fn apply(&self, cloud: &PointCloud) -> Result<PointCloud> {
        cloud.expect_frame(self.source)?;
        Ok(PointCloud {
            points: cloud
                .points
                .iter()
                .map(|p| LidarPoint {
                    position: self.transform_point(&p.position),
                    intensity: p.intensity,
                })
                .collect(),
            frame: self.target,
        })
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut h = Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        h
    }

    pub fn rotation_vector(&self) -> Result<RotationVector> {
        inv_rodrigues(&self.rotation)
    }
}

/// Geodesic angle between two rotation matrices, in radians.
pub fn rotation_angle_between(a: &Matrix3, b: &Matrix3) -> f64 {
    let rel = a.transpose() * b;
    // atan2 keeps precision near 0 and π, unlike acos of the trace
    let w = Vector3::new(
        rel[(2, 1)] - rel[(1, 2)],
        rel[(0, 2)] - rel[(2, 0)],
        rel[(1, 0)] - rel[(0, 1)],
    );
    (0.5 * w.norm()).atan2(0.5 * (rel.trace() - 1.0))
}
