//! Direction clouds of front normals measured on a run.

use serde::{Deserialize, Serialize};

use super::planarity::planarity_defect_with;
use super::{DiagnosticsError, Stencil};
use crate::geometry::DirectionSetEstimate;
use crate::lattice::Window;
use crate::scalar::Real;
use crate::solver::GridField;
use crate::sphere;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CloudConfig {
    pub gradient_threshold: f64,
    /// Cells whose local planarity defect exceeds this are skipped.
    pub max_defect: f64,
    /// Structure-tensor ball radius in units of the minimal spacing.
    pub radius_cells: f64,
    /// Cap on planarity evaluations per snapshot; candidates are thinned by a fixed stride.
    pub max_probes: usize,
    pub window: Option<Window>,
}

impl Default for CloudConfig {
    fn default() -> Self {
        Self { gradient_threshold: 0.05, max_defect: 0.1, radius_cells: 10.0, max_probes: 1500, window: None }
    }
}

/// Collects `−∇u/|∇u|` weighted by `|∇u|` over locally planar cells with
/// a steep enough gradient, across snapshots at `t ≥ 1`.
pub fn estimate_e_from_run<T: Real>(snapshots: &[GridField<T>], gradient_threshold: f64) -> Result<DirectionSetEstimate, DiagnosticsError> {
    estimate_e_from_run_with(snapshots, &CloudConfig { gradient_threshold, ..CloudConfig::default() })
}

pub fn estimate_e_from_run_with<T: Real>(snapshots: &[GridField<T>], cfg: &CloudConfig) -> Result<DirectionSetEstimate, DiagnosticsError> {
    if snapshots.len() < 3 {
        return Err(DiagnosticsError::Precondition(format!("need at least 3 snapshots, got {}", snapshots.len())));
    }
    if let Some(s) = snapshots.iter().find(|s| s.time() < 1.0) {
        return Err(DiagnosticsError::TooEarly(s.time()));
    }
    let dim = snapshots[0].lattice().dim();
    let mut dirs = Vec::new();
    let mut weights = Vec::new();
    for field in snapshots {
        let l = field.lattice();
        let st = Stencil::new(field);
        let radius = cfg.radius_cells * l.min_spacing();
        let margin = (cfg.radius_cells * l.min_spacing() / l.spacing().iter().copied().fold(f64::INFINITY, f64::min)).ceil() as usize + 2;
        let mut ix = vec![0usize; dim];
        let mut g = vec![0.0; dim];
        let mut candidates = Vec::new();
        for idx in 0..l.len() {
            l.unravel(idx, &mut ix);
            if !st.interior(&ix, margin) {
                continue;
            }
            st.gradient(idx, &mut g);
            let norm = sphere::norm(&g);
            if norm < cfg.gradient_threshold {
                continue;
            }
            let c = l.center_of(&ix);
            if cfg.window.as_ref().is_some_and(|w| !w.contains(&c)) {
                continue;
            }
            candidates.push((c, g.iter().map(|v| -v / norm).collect::<Vec<f64>>(), norm));
        }
        let stride = candidates.len().div_ceil(cfg.max_probes.max(1)).max(1);
        for (c, d, w) in candidates.into_iter().step_by(stride) {
            let p = planarity_defect_with(&st, &c, radius)?;
            if p.defect <= cfg.max_defect {
                dirs.push(d);
                weights.push(w);
            }
        }
    }
    Ok(DirectionSetEstimate::new(dim, dirs, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    #[test]
    fn planar_fronts_give_one_direction_and_flat_gives_none() {
        let l = Lattice::from_bounds(&[-5.0, -5.0], &[5.0, 5.0], 0.1).unwrap();
        let snaps: Vec<GridField<f64>> =
            (1..4).map(|t| GridField::from_fn(l.clone(), t as f64, |x| 1.0 / (1.0 + (x[1] - 0.5 * t as f64).exp()))).collect();
        let e = estimate_e_from_run(&snaps, 0.05).unwrap();
        assert!(!e.is_empty());
        assert!(e.max_angle_from(&[0.0, 1.0]) < 1e-6);
        let ones: Vec<GridField<f64>> = (1..4).map(|t| GridField::from_fn(l.clone(), t as f64, |_| 1.0)).collect();
        assert!(estimate_e_from_run(&ones, 0.05).unwrap().is_empty());
        assert!(estimate_e_from_run(&ones[..2], 0.05).is_err());
    }
}
