// SPDX-License-Identifier: Apache-2.0

//! Uniform voxel hash over a fixed point set.

use std::collections::HashMap;

use crate::geometry::Point3;

type Key = [i64; 3];

#[derive(Clone, Debug)]
pub struct VoxelIndex {
    cell: f64,
    points: Vec<Point3>,
    cells: HashMap<Key, Vec<usize>>,
    lo: Key,
    hi: Key,
}

impl VoxelIndex {
    pub fn new(points: Vec<Point3>, cell: f64) -> Self {
        assert!(cell > 0.0, "voxel size must be positive");
        let mut cells: HashMap<Key, Vec<usize>> = HashMap::new();
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for (n, p) in points.iter().enumerate() {
            let k = key(p, cell);
            for a in 0..3 {
                lo[a] = lo[a].min(k[a]);
                hi[a] = hi[a].max(k[a]);
            }
            cells.entry(k).or_default().push(n);
        }
        Self {
            cell,
            points,
            cells,
            lo,
            hi,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, n: usize) -> &Point3 {
        &self.points[n]
    }

    /// Indices of points strictly closer than `radius` to `p`, ascending.
    pub fn within(&self, p: &Point3, radius: f64) -> Vec<usize> {
        let span = (radius / self.cell).ceil() as i64;
        let c = key(p, self.cell);
        let r2 = radius * radius;
        let mut out = Vec::new();
        for dx in -span..=span {
            for dy in -span..=span {
                for dz in -span..=span {
                    if let Some(members) = self.cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        out.extend(
                            members
                                .iter()
                                .copied()
                                .filter(|&n| (self.points[n] - p).norm_squared() < r2),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Closest point within `radius` (ties broken by lower index).
    pub fn nearest_within(&self, p: &Point3, radius: f64) -> Option<usize> {
        self.within(p, radius)
            .into_iter()
            .min_by(|&a, &b| self.dist2(a, p).total_cmp(&self.dist2(b, p)).then(a.cmp(&b)))
    }

    /// Globally closest point, searching outward shell by shell.
    pub fn nearest(&self, p: &Point3) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let c = key(p, self.cell);
        let max_shell = (0..3)
            .map(|a| (c[a] - self.lo[a]).abs().max((self.hi[a] - c[a]).abs()))
            .max()
            .unwrap_or(0);
        let mut best: Option<(f64, usize)> = None;
        for r in 0..=max_shell {
            self.visit_shell(c, r, |n| {
                let d = self.dist2(n, p);
                if best.is_none_or(|(bd, bn)| d < bd || (d == bd && n < bn)) {
                    best = Some((d, n));
                }
            });
            // every point in shell r + 1 is at least r cells away
            if let Some((d, _)) = best {
                let reach = r as f64 * self.cell;
                if d <= reach * reach {
                    break;
                }
            }
        }
        best.map(|(_, n)| n)
    }

    fn visit_shell(&self, c: Key, r: i64, mut f: impl FnMut(usize)) {
        // offsets limited to the occupied bounding box
        let lo = |a: usize| (self.lo[a] - c[a]).max(-r);
        let hi = |a: usize| (self.hi[a] - c[a]).min(r);
        for dx in lo(0)..=hi(0) {
            for dy in lo(1)..=hi(1) {
                let mut visit = |dz: i64| {
                    if let Some(members) = self.cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        members.iter().for_each(|&n| f(n));
                    }
                };
                if dx.abs() == r || dy.abs() == r {
                    (lo(2)..=hi(2)).for_each(&mut visit);
                } else {
                    if -r >= lo(2) {
                        visit(-r);
                    }
                    if r != 0 && r <= hi(2) {
                        visit(r);
                    }
                }
            }
        }
    }

    fn dist2(&self, n: usize, p: &Point3) -> f64 {
        (self.points[n] - p).norm_squared()
    }
}

fn key(p: &Point3, cell: f64) -> Key {
    [
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    ]
}
