// SPDX-License-Identifier: Apache-2.0

//! Plane models and the two fitting kernels used by segmentation and
//! resampling: unweighted least squares on an explicit `z = ax + by + c`
//! form, and a principal-axis (PCA) normal estimate.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::geometry::{Point3, Vector3};

/// Largest accepted condition number of the (centered) normal-equation
/// matrix before a fit is reported as degenerate.
pub const MAX_CONDITION: f64 = 1e8;

/// Coordinate a plane is solved for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    #[default]
    Z,
}

impl Axis {
    /// `(dependent, first free, second free)` coordinate indices.
    fn layout(self) -> (usize, usize, usize) {
        match self {
            Axis::X => (0, 1, 2),
            Axis::Y => (1, 0, 2),
            Axis::Z => (2, 0, 1),
        }
    }
}

/// Explicit plane `w = a·u + b·v + c`, where `w` is the coordinate named by
/// `axis` and `(u, v)` are the other two in `x, y, z` order. With the default
/// axis this is `z = ax + by + c` with normal `(a, b, -1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default)]
    pub axis: Axis,
}

impl PlaneModel {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c, axis: Axis::Z }
    }

    pub fn with_axis(axis: Axis, a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c, axis }
    }

    /// Unnormalized normal: `a`, `b` on the free axes and `-1` on the
    /// dependent one.
    pub fn normal(&self) -> Vector3 {
        let (w, u, v) = self.axis.layout();
        let mut n = Vector3::zeros();
        n[u] = self.a;
        n[v] = self.b;
        n[w] = -1.0;
        n
    }

    /// Signed residual `a·u + b·v + c − w`, i.e. `n·p + c`.
    pub fn residual(&self, p: &Point3) -> f64 {
        self.normal().dot(&p.coords) + self.c
    }

    /// Euclidean distance from `p` to the plane.
    pub fn distance(&self, p: &Point3) -> f64 {
        self.residual(p).abs() / self.normal().norm()
    }

    /// Intersection of the ray `t·d` (origin at zero) with the plane:
    /// `t0 = −c / (n·d)`. `None` when `|n·d| < parallel_eps` or `t0 <= 0`.
    pub fn intersect(&self, d: &Vector3, parallel_eps: f64) -> Option<(f64, Point3)> {
        let nd = self.normal().dot(d);
        if !(nd.abs() >= parallel_eps) {
            return None;
        }
        let t0 = -self.c / nd;
        (t0 > 0.0 && t0.is_finite()).then(|| (t0, Point3::from(d * t0)))
    }
}

/// Least-squares plane solved for `axis`, or `None` when fewer than three
/// points are given or the free coordinates are (nearly) collinear.
pub fn least_squares<'a>(points: impl IntoIterator<Item = &'a Point3>, axis: Axis) -> Option<PlaneModel> {
    let (w, u, v) = axis.layout();
    let pts: Vec<(f64, f64, f64)> = points.into_iter().map(|p| (p[u], p[v], p[w])).collect();
    let n = pts.len();
    if n < 3 {
        return None;
    }
    // centered normal equations keep the condition number scale-free
    let inv = 1.0 / n as f64;
    let (mu, mv, mw) = pts
        .iter()
        .fold((0.0, 0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2));
    let (mu, mv, mw) = (mu * inv, mv * inv, mw * inv);
    let (mut suu, mut suv, mut svv, mut suw, mut svw) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(pu, pv, pw) in &pts {
        let (du, dv, dw) = (pu - mu, pv - mv, pw - mw);
        suu += du * du;
        suv += du * dv;
        svv += dv * dv;
        suw += du * dw;
        svw += dv * dw;
    }
    let normal = Matrix3::new(suu, suv, 0.0, suv, svv, 0.0, 0.0, 0.0, n as f64);
    let eig = normal.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > 0.0 && hi / lo < MAX_CONDITION) {
        return None;
    }
    let det = suu * svv - suv * suv;
    let a = (suw * svv - svw * suv) / det;
    let b = (svw * suu - suw * suv) / det;
    let c = mw - a * mu - b * mv;
    [a, b, c]
        .iter()
        .all(|x| x.is_finite())
        .then_some(PlaneModel::with_axis(axis, a, b, c))
}

/// Principal-axis fit of a point set.
#[derive(Clone, Copy, Debug)]
pub struct PrincipalPlane {
    /// Unit normal (eigenvector of the smallest covariance eigenvalue),
    /// oriented so that `normal.z >= 0`.
    pub normal: Vector3,
    pub centroid: Point3,
    /// Covariance eigenvalues, ascending.
    pub eigenvalues: [f64; 3],
}

impl PrincipalPlane {
    /// Signed distance of `p` along the normal.
    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&(p - self.centroid))
    }

    /// The plane in explicit `z = ax + by + c` form, if it is not vertical.
    pub fn to_model(&self) -> Option<PlaneModel> {
        let n = self.normal;
        if n.z.abs() < 1e-12 {
            return None;
        }
        let a = -n.x / n.z;
        let b = -n.y / n.z;
        Some(PlaneModel::new(
            a,
            b,
            self.centroid.z - a * self.centroid.x - b * self.centroid.y,
        ))
    }
}

pub fn principal_plane<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Option<PrincipalPlane> {
    let pts: Vec<&Point3> = points.into_iter().collect();
    if pts.len() < 3 {
        return None;
    }
    let inv = 1.0 / pts.len() as f64;
    let centroid = Point3::from(pts.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) * inv);
    let mut cov = Matrix3::zeros();
    for p in &pts {
        let d = *p - centroid;
        cov += d * d.transpose();
    }
    cov *= inv;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut normal: Vector3 = eig.eigenvectors.column(order[0]).into_owned();
    if normal.z < 0.0 {
        normal = -normal;
    }
    let norm = normal.norm();
    if !(norm > 0.0) {
        return None;
    }
    Some(PrincipalPlane {
        normal: normal / norm,
        centroid,
        eigenvalues: order.map(|k| eig.eigenvalues[k]),
    })
}
