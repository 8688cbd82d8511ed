// SPDX-License-Identifier: Apache-2.0

//! Checks shared by the property tests and the acceptance suite.

#![allow(dead_code)]

use std::collections::HashSet;

use roadview::geometry::PointCloud;
use roadview::lidar::{sector_of, LidarModel};
use roadview::resample::{GeneratedCloud, Origin};

/// Violation counts of the generated-cloud invariants.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Violations {
    pub off_ray: usize,
    pub out_of_range: usize,
    pub duplicate_rays: usize,
    /// Ground returns sharing a sector with a non-ground return.
    pub occlusion: usize,
    /// Intensities that do not occur in the source cloud.
    pub foreign_intensity: usize,
}

impl Violations {
    pub fn total(&self) -> usize {
        self.off_ray + self.out_of_range + self.duplicate_rays + self.occlusion + self.foreign_intensity
    }

    pub fn add(&mut self, o: &Violations) {
        self.off_ray += o.off_ray;
        self.out_of_range += o.out_of_range;
        self.duplicate_rays += o.duplicate_rays;
        self.occlusion += o.occlusion;
        self.foreign_intensity += o.foreign_intensity;
    }
}

pub fn audit(cloud: &GeneratedCloud, model: &LidarModel, source: &PointCloud) -> Violations {
    let mut v = Violations::default();
    let [r_min, r_max] = model.range();
    let mut rays = HashSet::new();
    let blocked: HashSet<_> = cloud
        .iter()
        .filter(|g| g.origin == Origin::NonGround)
        .map(|g| sector_of(g.ray))
        .collect();
    let intensities: HashSet<u64> = source.iter().map(|p| p.intensity.to_bits()).collect();
    for g in cloud.iter() {
        let p = g.point.position.coords;
        let r = p.norm();
        let d = model.ray_direction(g.ray).expect("generated rays are valid");
        if (p - d * r).norm() > 1e-6 * r {
            v.off_ray += 1;
        }
        if !(r_min..=r_max).contains(&r) {
            v.out_of_range += 1;
        }
        if !rays.insert(g.ray) {
            v.duplicate_rays += 1;
        }
        if g.origin == Origin::Ground && blocked.contains(&sector_of(g.ray)) {
            v.occlusion += 1;
        }
        if !intensities.contains(&g.point.intensity.to_bits()) {
            v.foreign_intensity += 1;
        }
    }
    v
}
