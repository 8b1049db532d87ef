//! Boundary no-contamination budget.
//!
//! A zero-flux face solves the whole-space problem for the mirror-extended
//! data, so it misrepresents `U` exactly where the reflection of `U` differs
//! from `U` beyond the face. A frozen face misrepresents `U` at boundary
//! cells whose value would move during the run: cells of `U` closer than the
//! margin to `∂U`, and cells outside `U` that a front can reach. The region
//! of interest must keep `c*·T + margin` away from all such points.

use serde::{Deserialize, Serialize};

use super::{Scenario, ScenarioError, BUDGET_MARGIN};
use crate::geometry::SetDescriptor;
use crate::lattice::{Lattice, Window};
use crate::solver::{boundary_cells, Boundary, GridField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub required: f64,
    /// Distance from the region of interest to the nearest misrepresented
    /// point (infinite when there is none).
    pub distance: f64,
    pub nearest: Option<Vec<f64>>,
}

fn roi_distance(roi: &[Window], x: &[f64]) -> f64 {
    roi.iter().map(|w| w.distance(x)).fold(f64::INFINITY, f64::min)
}

/// Reflects `y` into `[lo, hi]` as repeated zero-flux mirrors do.
fn fold(y: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    let m = (y - lo).rem_euclid(2.0 * width);
    lo + if m > width { 2.0 * width - m } else { m }
}

pub(super) fn check(s: &Scenario, lattice: &Lattice, c_star: f64) -> Result<BudgetReport, ScenarioError> {
    let required = c_star * s.solver.horizon + BUDGET_MARGIN;
    let (distance, nearest) = match s.solver.boundary {
        Boundary::NeumannZero => mirror_sources(&s.descriptor, lattice, &s.roi, required),
        Boundary::DirichletFrozen => frozen_sources(&s.descriptor, lattice, &s.roi, required)?,
    };
    if distance < required {
        let kind = match s.solver.boundary {
            Boundary::NeumannZero => "mirror image of the set across a zero-flux face",
            Boundary::DirichletFrozen => "frozen boundary cell whose value would change",
        };
        return Err(ScenarioError::Budget { distance, required, source_kind: format!("{kind} at {:?}", nearest.unwrap_or_default()) });
    }
    Ok(BudgetReport { required, distance, nearest })
}

fn mirror_sources(u: &SetDescriptor, lattice: &Lattice, roi: &[Window], required: f64) -> (f64, Option<Vec<f64>>) {
    let n = lattice.dim();
    let bounds = lattice.bounds();
    let mut best = (f64::INFINITY, None);
    let mut ix = vec![0usize; n];
    for a in 0..n {
        let h = lattice.spacing()[a];
        let layers = (required / h).ceil() as usize;
        for i in 0..lattice.len() {
            lattice.unravel(i, &mut ix);
            for (side, edge) in [(-1.0, 0), (1.0, lattice.dims()[a] - 1)] {
                if ix[a] != edge {
                    continue;
                }
                let face = if side < 0.0 { bounds.lo[a] } else { bounds.hi[a] };
                let mut y = lattice.center(i);
                for k in 1..=layers {
                    y[a] = face + side * (k as f64 - 0.5) * h;
                    let d = roi_distance(roi, &y);
                    if d >= best.0 || d >= required {
                        continue;
                    }
                    let mut m = y.clone();
                    m[a] = fold(y[a], bounds.lo[a], bounds.hi[a]);
                    if u.contains(&m) != u.contains(&y) {
                        best = (d, Some(y.clone()));
                    }
                }
            }
        }
    }
    best
}

fn frozen_sources(u: &SetDescriptor, lattice: &Lattice, roi: &[Window], required: f64) -> Result<(f64, Option<Vec<f64>>), ScenarioError> {
    let cells: Vec<usize> = boundary_cells(lattice).into_iter().filter(|&i| roi_distance(roi, &lattice.center(i)) < required).collect();
    if cells.is_empty() {
        return Ok((f64::INFINITY, None));
    }
    let pad = (BUDGET_MARGIN / lattice.min_spacing()).ceil() as usize + 2;
    let wide = pad_lattice(lattice, pad);
    let core = u.erode(BUDGET_MARGIN, Some(&wide))?;
    let mut best = (f64::INFINITY, None);
    for i in cells {
        let x = lattice.center(i);
        let moving = if u.contains(&x) { !core.contains(&x) } else { u.dist(&x) < required };
        let d = roi_distance(roi, &x);
        if moving && d < best.0 {
            best = (d, Some(x));
        }
    }
    Ok(best)
}

fn pad_lattice(lattice: &Lattice, cells: usize) -> Lattice {
    let n = lattice.dim();
    let dims = (0..n).map(|a| lattice.dims()[a] + 2 * cells).collect();
    let lower = (0..n).map(|a| lattice.lower()[a] - cells as f64 * lattice.spacing()[a]).collect();
    Lattice::new(dims, lattice.spacing().to_vec(), lower).expect("padded lattice is valid")
}

/// The lattice extended on both sides of every axis by half its width,
/// aligned so every original cell is also a cell of the result.
pub fn doubled_lattice(lattice: &Lattice) -> Lattice {
    let n = lattice.dim();
    let ext: Vec<usize> = (0..n).map(|a| lattice.dims()[a].div_ceil(2)).collect();
    let dims = (0..n).map(|a| lattice.dims()[a] + 2 * ext[a]).collect();
    let lower = (0..n).map(|a| lattice.lower()[a] - ext[a] as f64 * lattice.spacing()[a]).collect();
    Lattice::new(dims, lattice.spacing().to_vec(), lower).expect("doubled lattice is valid")
}

/// Largest `|u − v|` over cells of `small` inside the region of interest,
/// across paired snapshots, with `big` a run on an enclosing aligned lattice.
pub(super) fn roi_difference(small: &[GridField<f64>], big: &[GridField<f64>], roi: &[Window]) -> Result<f64, ScenarioError> {
    if small.len() != big.len() {
        return Err(ScenarioError::Config(format!("{} vs {} snapshots in the doubling test", small.len(), big.len())));
    }
    let Some(first) = small.first() else {
        return Ok(0.0);
    };
    let ls = first.lattice();
    let lb = big[0].lattice();
    let n = ls.dim();
    let offset: Vec<usize> = (0..n).map(|a| ((ls.lower()[a] - lb.lower()[a]) / ls.spacing()[a]).round() as usize).collect();
    let mut ix = vec![0usize; n];
    let mut jx = vec![0usize; n];
    let cells: Vec<(usize, usize)> = (0..ls.len())
        .filter(|&i| {
            let x = ls.center(i);
            roi.iter().any(|w| w.contains(&x))
        })
        .map(|i| {
            ls.unravel(i, &mut ix);
            for a in 0..n {
                jx[a] = ix[a] + offset[a];
            }
            (i, lb.ravel(&jx))
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (a, b) in small.iter().zip(big) {
        for &(i, j) in &cells {
            worst = worst.max((a.values()[i] - b.values()[j]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_reflects_repeatedly() {
        assert_eq!(fold(11.0, 0.0, 10.0), 9.0);
        assert_eq!(fold(-3.0, 0.0, 10.0), 3.0);
        assert_eq!(fold(23.0, 0.0, 10.0), 3.0);
        assert_eq!(fold(5.0, 0.0, 10.0), 5.0);
    }

    #[test]
    fn doubled_lattice_contains_original_cells() {
        let l = Lattice::from_bounds(&[-5.0, 0.0], &[5.0, 3.0], 0.25).unwrap();
        let d = doubled_lattice(&l);
        assert_eq!(d.dims(), &[80, 24]);
        let c = l.center(l.ravel(&[3, 7]));
        let k = d.ravel(&[23, 13]);
        let cd = d.center(k);
        assert!(c.iter().zip(&cd).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn symmetric_sets_have_no_mirror_sources() {
        let l = Lattice::from_bounds(&[-10.0, -60.0], &[10.0, 130.0], 0.5).unwrap();
        let u = SetDescriptor::lower_half_space(2);
        let roi = [Window::new(vec![-10.0, -20.0], vec![10.0, 130.0])];
        let (d, _) = mirror_sources(&u, &l, &roi, 100.0);
        assert!(d >= 100.0);
        let roi = [Window::new(vec![-10.0, -50.0], vec![10.0, 130.0])];
        let (d, at) = mirror_sources(&u, &l, &roi, 100.0);
        assert!(d < 100.0 && at.unwrap()[1] < -120.0);
    }
}
