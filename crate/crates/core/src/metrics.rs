// SPDX-License-Identifier: Apache-2.0

//! Distribution similarity between class histograms, and cloud summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{to_spherical, PointCloud};
use crate::lidar::LidarModel;

/// Width (m) of the range bins reported by [`cloud_stats`].
pub const RANGE_BIN: f64 = 10.0;

/// Per-class weights (counts or percentages) in a fixed class order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassHistogram {
    pub classes: Vec<String>,
    pub weights: Vec<f64>,
}

impl ClassHistogram {
    pub fn new(classes: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if classes.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: classes.len(),
                found: weights.len(),
            });
        }
        Ok(Self { classes, weights })
    }

    /// Reorders `other`'s weights into this histogram's class order.
    pub fn align(&self, other: &ClassHistogram) -> Result<Vec<f64>> {
        if self.classes.len() != other.classes.len() {
            return Err(Error::LengthMismatch {
                expected: self.classes.len(),
                found: other.classes.len(),
            });
        }
        self.classes
            .iter()
            .map(|c| {
                other
                    .classes
                    .iter()
                    .position(|o| o == c)
                    .map(|k| other.weights[k])
                    .ok_or_else(|| Error::schema("classes", format!("class `{c}` missing from the other histogram")))
            })
            .collect()
    }
}

/// Weights divided by their total.
pub fn normalize(weights: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::ZeroTotal);
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// `Σ p log2(p / m)` with `0·log 0 = 0`.
fn kl2(p: &[f64], m: &[f64]) -> f64 {
    p.iter()
        .zip(m)
        .filter(|(pk, _)| **pk > 0.0)
        .map(|(pk, mk)| pk * (pk / mk).log2())
        .sum()
}

/// Square root of the base-2 Jensen–Shannon divergence; lies in `[0, 1]`.
pub fn js_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let js = 0.5 * kl2(p, &m) + 0.5 * kl2(q, &m);
    // rounding can push identical inputs a hair below zero
    Ok(js.max(0.0).sqrt().min(1.0))
}

pub fn cosine_similarity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    let (np, nq) = (norm(p), norm(q));
    if np == 0.0 || nq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    Ok((dot / (np * nq)).clamp(-1.0, 1.0))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub js_distance: f64,
    pub cosine_similarity: f64,
}

/// Both metrics on independently normalized histograms, after aligning
/// `b` to `a`'s class order.
pub fn compare(a: &ClassHistogram, b: &ClassHistogram) -> Result<MetricReport> {
    let bw = a.align(b)?;
    let (p, q) = (normalize(&a.weights)?, normalize(&bw)?);
    Ok(MetricReport {
        js_distance: js_distance(&p, &q)?,
        cosine_similarity: cosine_similarity(&p, &q)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudStats {
    pub count: usize,
    /// Bin `k` counts points with range in `[10k, 10(k+1))` m.
    pub range_histogram: Vec<usize>,
    pub intensity: Option<IntensityStats>,
    /// Points per beam, when a sensor model was supplied. Points outside
    /// the vertical field of view are not counted.
    pub beam_counts: Option<Vec<usize>>,
}

pub fn cloud_stats(cloud: &PointCloud, model: Option<&LidarModel>) -> CloudStats {
    let mut range_histogram = Vec::new();
    let mut intensity: Option<IntensityStats> = None;
    let mut sum = 0.0;
    for p in cloud.iter() {
        let bin = (p.range() / RANGE_BIN).floor() as usize;
        if bin >= range_histogram.len() {
            range_histogram.resize(bin + 1, 0);
        }
        range_histogram[bin] += 1;
        sum += p.intensity;
        let s = intensity.get_or_insert(IntensityStats {
            min: p.intensity,
            mean: 0.0,
            max: p.intensity,
        });
        s.min = s.min.min(p.intensity);
        s.max = s.max.max(p.intensity);
    }
    if let Some(s) = intensity.as_mut() {
        s.mean = sum / cloud.len() as f64;
    }
    let beam_counts = model.map(|m| {
        let mut counts = vec![0; m.beam_count()];
        for p in cloud.iter() {
            if let Some(r) = m.bin_point(&to_spherical(&p.position)) {
                counts[r.j] += 1;
            }
        }
        counts
    });
    CloudStats {
        count: cloud.len(),
        range_histogram,
        intensity,
        beam_counts,
    }
}
