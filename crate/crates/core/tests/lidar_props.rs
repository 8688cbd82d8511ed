// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};

use proptest::prelude::*;
use roadview::geometry::{to_spherical, Point3, SphericalCoord};
use roadview::lidar::{default_mount, sector_of, LidarModel, RayIndex};

fn pandar() -> LidarModel {
    LidarModel::default_pandar64()
}

/// Small irregular table for exhaustive sweeps.
fn small() -> LidarModel {
    LidarModel::new(
        [-20.0, 10.0],
        360.0,
        vec![-20.0, -12.5, -3.0, 0.0, 4.0, 10.0],
        10.0,
        [0.5, 200.0],
        default_mount(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn ray_direction_recovers_its_angles(i in 0usize..1800, j in 0usize..64) {
        let m = pandar();
        let idx = RayIndex::new(i, j);
        let s = to_spherical(&Point3::from(m.ray_direction(idx).unwrap()));
        prop_assert!((s.theta - m.polar_angle(j)).abs() < 1e-9);
        let dphi = (s.phi - m.azimuth(i)).rem_euclid(std::f64::consts::TAU);
        prop_assert!(dphi.min(std::f64::consts::TAU - dphi) < 1e-9);
    }

    #[test]
    fn points_on_a_ray_bin_to_that_ray(i in 0usize..1800, j in 0usize..64) {
        let m = pandar();
        let idx = RayIndex::new(i, j);
        let d = m.ray_direction(idx).unwrap();
        for t in [1.0, 50.0, 199.0] {
            prop_assert_eq!(m.bin_point(&to_spherical(&Point3::from(d * t))), Some(idx));
        }
    }

    #[test]
    fn in_fov_points_bin_exactly_once(eps in -20.0..10.0f64, phi in -180.0..180.0f64, r in 0.1..300.0f64) {
        let m = small();
        let s = SphericalCoord { r, phi: phi.to_radians(), theta: (90.0 - eps).to_radians() };
        let idx = m.bin_point(&s).expect("inside the field of view");
        // the bin is the upper beam of the pair bracketing the elevation
        let table = m.elevation_table();
        prop_assert!(table[idx.j] >= eps - 1e-9 || idx.j == table.len() - 1);
        if idx.j > 0 {
            prop_assert!(table[idx.j - 1] < eps + 1e-9);
        }
    }
}

/// Sweeps elevations across every beam boundary, on both sides and exactly
/// on it: no in-FOV direction is unassigned and assignment is monotone.
#[test]
fn boundary_sweep_partitions_the_fov() {
    let m = small();
    let table = m.elevation_table().to_vec();
    let mut probes: Vec<f64> = Vec::new();
    for e in &table {
        probes.extend([e - 1e-7, *e, e + 1e-7]);
    }
    probes.extend((0..=3000).map(|k| -20.0 + 30.0 * k as f64 / 3000.0));
    probes.retain(|e| (-20.0..=10.0).contains(e));
    probes.sort_by(f64::total_cmp);
    let mut last_j = 0;
    for e in probes {
        let s = SphericalCoord {
            r: 10.0,
            phi: 0.3,
            theta: (90.0 - e).to_radians(),
        };
        let idx = m.bin_point(&s).unwrap_or_else(|| panic!("elevation {e} not binned"));
        // beams are indexed bottom-up, so j never drops as elevation rises
        assert!(idx.j >= last_j, "elevation {e} -> {idx:?}");
        last_j = idx.j;
        if table.contains(&e) {
            assert_eq!(table[idx.j], e, "an exact beam elevation belongs to its own beam");
        }
    }
}

#[test]
fn sectors_cover_the_grid_in_blocks() {
    let m = pandar();
    let (rows, cols) = m.sector_grid();
    let mut members: HashMap<(usize, usize), HashSet<(usize, usize)>> = HashMap::new();
    for idx in m.rays() {
        let s = sector_of(idx);
        members.entry((s.u, s.v)).or_default().insert((idx.j / 2, idx.i / 25));
    }
    assert_eq!(members.len(), rows * cols);
    for (key, blocks) in members {
        assert_eq!(blocks.len(), 1, "sector {key:?} spans several 2x25 blocks");
        assert!(blocks.contains(&key));
    }
}
