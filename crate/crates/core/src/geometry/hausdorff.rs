//! Windowed Hausdorff distance.

use serde::{Deserialize, Serialize};

use super::{GeometryError, SetDescriptor};
use crate::lattice::{Lattice, Window};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffReport {
    pub value: f64,
    /// `sup_{x∈A} dist(x, B)` over the window samples.
    pub a_to_b: f64,
    pub b_to_a: f64,
    pub window: Window,
    pub spacing: f64,
}

/// Hausdorff distance between the parts of `A` and `B` visible in `window`.
///
/// Each set is sampled by the lattice nodes of spacing `h` it contains plus
/// the projections of the remaining nodes onto it, which puts samples on the
/// boundary where directed distances are typically attained.
pub fn hausdorff(a: &SetDescriptor, b: &SetDescriptor, window: &Window, h: f64) -> Result<HausdorffReport, GeometryError> {
    if a.dim() != b.dim() || window.dim() != a.dim() {
        return Err(GeometryError::Dimension { expected: a.dim(), got: b.dim().max(window.dim()) });
    }
    let report = |v: f64, ab: f64, ba: f64| HausdorffReport { value: v, a_to_b: ab, b_to_a: ba, window: window.clone(), spacing: h };
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(report(0.0, 0.0, 0.0)),
        (true, false) | (false, true) => return Ok(report(f64::INFINITY, f64::INFINITY, f64::INFINITY)),
        _ => {}
    }
    let lattice = Lattice::from_bounds(&window.lo, &window.hi, h)?;
    let sa = samples(a, &lattice, window);
    let sb = samples(b, &lattice, window);
    let directed = |s: &[Vec<f64>], other: &SetDescriptor| s.iter().map(|x| other.dist(x)).fold(0.0, f64::max);
    let ab = directed(&sa, b);
    let ba = directed(&sb, a);
    Ok(report(ab.max(ba), ab, ba))
}

fn samples(u: &SetDescriptor, lattice: &Lattice, window: &Window) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..lattice.len() {
        let x = lattice.center(i);
        match u.nearest(&x) {
            Some((0.0, _)) => out.push(x),
            Some((_, p)) if window.contains(&p) => out.push(p),
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_balls_and_identity() {
        let a = SetDescriptor::ball(vec![0.0, 0.0], 3.0);
        let b = SetDescriptor::ball(vec![0.0, 0.0], 2.0);
        let w = Window::around(&[0.0, 0.0], 4.0);
        let r = hausdorff(&a, &b, &w, 0.05).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
        assert!(hausdorff(&a, &a, &w, 0.05).unwrap().value < 1e-12);
        let e = SetDescriptor::Empty { dim: 2 };
        assert_eq!(hausdorff(&e, &e, &w, 0.1).unwrap().value, 0.0);
        assert!(hausdorff(&a, &e, &w, 0.1).unwrap().value.is_infinite());
    }
}
