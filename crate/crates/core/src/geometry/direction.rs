//! Direction clouds: geometric prediction of the set `E` of front normals.

use serde::{Deserialize, Serialize};

use super::opening::level_set_points;
use super::SetDescriptor;
use crate::sphere;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionCluster {
    pub mean: Vec<f64>,
    pub weight: f64,
    pub count: usize,
}

/// Weighted unit vectors with a greedy angular clustering.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DirectionSetEstimate {
    pub dim: usize,
    pub directions: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub clusters: Vec<DirectionCluster>,
}

/// Clustering radius in degrees.
const CLUSTER_DEG: f64 = 10.0;

impl DirectionSetEstimate {
    pub fn new(dim: usize, directions: Vec<Vec<f64>>, weights: Vec<f64>) -> Self {
        let mut s = Self { dim, directions, weights, clusters: vec![] };
        s.clusters = s.cluster(CLUSTER_DEG);
        s
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    /// Largest angle (degrees) between any member and `e`.
    pub fn max_angle_from(&self, e: &[f64]) -> f64 {
        self.directions.iter().map(|d| sphere::angle(d, e).to_degrees()).fold(0.0, f64::max)
    }

    /// Largest angular hole (degrees) left by the cloud on the sphere.
    ///
    /// Exact in 2D; in 3D the covering radius measured from a dense probe set
    /// is doubled so both notions read as a gap width. In 1D it is 0 when both
    /// orientations are present and 180 otherwise.
    pub fn coverage_gap_deg(&self) -> f64 {
        if self.directions.is_empty() {
            return 360.0;
        }
        match self.dim {
            1 => {
                let pos = self.directions.iter().any(|d| d[0] > 0.0);
                let neg = self.directions.iter().any(|d| d[0] < 0.0);
                if pos && neg {
                    0.0
                } else {
                    180.0
                }
            }
            2 => {
                let mut a: Vec<f64> = self.directions.iter().map(|d| d[1].atan2(d[0])).collect();
                a.sort_by(f64::total_cmp);
                let mut gap = a[0] + std::f64::consts::TAU - a[a.len() - 1];
                for w in a.windows(2) {
                    gap = gap.max(w[1] - w[0]);
                }
                gap.to_degrees()
            }
            _ => {
                let probes = sphere::fibonacci_sphere(4000);
                let cover = probes
                    .iter()
                    .map(|p| self.directions.iter().map(|d| sphere::angle(p, d)).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max);
                2.0 * cover.to_degrees()
            }
        }
    }

    /// Greedy clustering in decreasing weight order.
    pub fn cluster(&self, radius_deg: f64) -> Vec<DirectionCluster> {
        let mut order: Vec<usize> = (0..self.directions.len()).collect();
        order.sort_by(|&a, &b| self.weights[b].total_cmp(&self.weights[a]));
        let mut clusters: Vec<(Vec<f64>, Vec<f64>, f64, usize)> = Vec::new();
        let r = radius_deg.to_radians();
        for i in order {
            let d = &self.directions[i];
            let w = self.weights[i];
            match clusters.iter_mut().find(|c| sphere::angle(&c.0, d) <= r) {
                Some(c) => {
                    for (s, v) in c.1.iter_mut().zip(d) {
                        *s += w * v;
                    }
                    c.2 += w;
                    c.3 += 1;
                }
                None => clusters.push((d.clone(), d.iter().map(|v| w * v).collect(), w, 1)),
            }
        }
        clusters
            .into_iter()
            .map(|(seed, sum, weight, count)| DirectionCluster {
                mean: sphere::normalized(&sum).unwrap_or(seed),
                weight,
                count,
            })
            .collect()
    }
}

/// Finite-`R` prediction of the direction set: unit vectors `(x−ξ)/|x−ξ|`
/// at points `x` with `dist(x, U) = R` and `ξ` ranging over their projections.
pub fn predict_e(u: &SetDescriptor, r: f64, samples: usize) -> DirectionSetEstimate {
    let dim = u.dim();
    let mut dirs = Vec::new();
    for x in level_set_points(u, r, samples) {
        if let Ok(p) = u.projections(&x, 1e-6 * r) {
            for xi in p.points {
                if let Some(d) = sphere::normalized(&sphere::sub(&x, &xi)) {
                    dirs.push(d);
                }
            }
        }
    }
    let w = vec![1.0; dirs.len()];
    DirectionSetEstimate::new(dim, dirs, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_covers_circle_half_space_is_one_direction() {
        let b = SetDescriptor::ball(vec![0.0, 0.0], 1.0);
        let e = predict_e(&b, 50.0, 512);
        assert!(e.coverage_gap_deg() < 15.0);
        let h = SetDescriptor::lower_half_space(2);
        let e = predict_e(&h, 10.0, 64);
        assert!(!e.is_empty());
        assert!(e.max_angle_from(&[0.0, 1.0]) < 1e-6);
        assert_eq!(e.clusters.len(), 1);
        assert!(predict_e(&SetDescriptor::Empty { dim: 2 }, 5.0, 10).is_empty());
    }
}
