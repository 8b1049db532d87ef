//! Local distance from one-dimensional symmetry.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Stencil};
use crate::scalar::Real;
use crate::solver::GridField;
use crate::sphere;

/// Local oscillation below which a neighborhood counts as flat.
pub const FLAT_OSCILLATION: f64 = 1e-3;
/// Anisotropy below which the principal direction is reported as ambiguous.
const AMBIGUOUS_ANISOTROPY: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarityResult {
    /// RMS residual of the best 1D reprojection over the local oscillation.
    pub defect: f64,
    /// Principal structure-tensor direction, oriented along decreasing `u`.
    pub direction: Vec<f64>,
    /// `(λ₁ − λ₂) / λ₁` of the structure tensor.
    pub anisotropy: f64,
    pub direction_ambiguous: bool,
    pub oscillation: f64,
    pub flat: bool,
    pub samples: usize,
}

/// Planarity defect over the ball `B(x, radius)`.
pub fn planarity_defect<T: Real>(field: &GridField<T>, x: &[f64], radius: f64) -> Result<PlanarityResult, DiagnosticsError> {
    planarity_defect_with(&Stencil::new(field), x, radius)
}

pub(crate) fn planarity_defect_with<T: Real>(st: &Stencil<'_, T>, x: &[f64], radius: f64) -> Result<PlanarityResult, DiagnosticsError> {
    let l = st.lattice();
    let n = l.dim();
    if x.len() != n || !(radius > 0.0) {
        return Err(DiagnosticsError::Degenerate(format!("point of dimension {} and radius {radius}", x.len())));
    }
    let frac = l.fractional(x);
    let mut lo = vec![0usize; n];
    let mut hi = vec![0usize; n];
    for a in 0..n {
        let r = radius / l.spacing()[a];
        let (a_lo, a_hi) = ((frac[a] - r).ceil(), (frac[a] + r).floor());
        if a_lo < 1.0 || a_hi > (l.dims()[a] - 2) as f64 {
            return Err(DiagnosticsError::Window(format!("ball of radius {radius} around {x:?} leaves the grid")));
        }
        lo[a] = a_lo as usize;
        hi[a] = a_hi as usize;
    }

    let mut offsets = Vec::new();
    let mut values = Vec::new();
    let mut tensor = DMatrix::<f64>::zeros(n, n);
    let mut mean_grad = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut ix = lo.clone();
    loop {
        let c = l.center_of(&ix);
        let d = sphere::sub(&c, x);
        if sphere::norm(&d) <= radius {
            let idx = l.ravel(&ix);
            st.gradient(idx, &mut g);
            for i in 0..n {
                mean_grad[i] += g[i];
                for j in 0..n {
                    tensor[(i, j)] += g[i] * g[j];
                }
            }
            offsets.push(d);
            values.push(st.at(idx));
        }
        let mut a = n;
        loop {
            if a == 0 {
                break;
            }
            a -= 1;
            if ix[a] < hi[a] {
                ix[a] += 1;
                break;
            }
            ix[a] = lo[a];
        }
        if ix == lo {
            break;
        }
    }
    let m = values.len();
    if m < n + 2 {
        return Err(DiagnosticsError::Degenerate(format!("only {m} cells in the ball")));
    }
    let vmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let oscillation = vmax - vmin;

    let eig = SymmetricEigen::new(tensor / m as f64);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let top = eig.eigenvalues[order[0]];
    let second = if n > 1 { eig.eigenvalues[order[1]] } else { 0.0 };
    let anisotropy = if top > 0.0 { (top - second) / top } else { 0.0 };
    let mut e: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    if sphere::dot(&e, &mean_grad) > 0.0 {
        e.iter_mut().for_each(|v| *v = -*v);
    }

    let flat = oscillation < FLAT_OSCILLATION;
    let defect = if flat { 0.0 } else { reprojection_rms(&offsets, &values, &e, l.min_spacing()) / oscillation };
    Ok(PlanarityResult {
        defect,
        direction: e,
        anisotropy,
        direction_ambiguous: !flat && anisotropy < AMBIGUOUS_ANISOTROPY,
        oscillation,
        flat,
        samples: m,
    })
}

/// RMS residual of a least-squares piecewise-linear fit `u ≈ g(d·e)` with
/// knots every `h`, lightly regularized on second differences so that
/// knots without nearby samples stay determined.
fn reprojection_rms(offsets: &[Vec<f64>], values: &[f64], e: &[f64], h: f64) -> f64 {
    let s: Vec<f64> = offsets.iter().map(|d| sphere::dot(d, e)).collect();
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let knots = (((smax - smin) / h).ceil() as usize).max(1) + 1;
    let mut ata = DMatrix::<f64>::zeros(knots, knots);
    let mut aty = DVector::<f64>::zeros(knots);
    let basis = |si: f64| {
        let u = ((si - smin) / h).max(0.0);
        let k = (u.floor() as usize).min(knots - 2);
        (k, u - k as f64)
    };
    for (&si, &vi) in s.iter().zip(values) {
        let (k, w) = basis(si);
        let (a, b) = (1.0 - w, w);
        ata[(k, k)] += a * a;
        ata[(k, k + 1)] += a * b;
        ata[(k + 1, k)] += a * b;
        ata[(k + 1, k + 1)] += b * b;
        aty[k] += a * vi;
        aty[k + 1] += b * vi;
    }
    let mu = 1e-6 * values.len() as f64 / knots as f64;
    for k in 1..knots.saturating_sub(1) {
        let row = [(k - 1, 1.0), (k, -2.0), (k + 1, 1.0)];
        for &(i, ci) in &row {
            for &(j, cj) in &row {
                ata[(i, j)] += mu * ci * cj;
            }
        }
    }
    for k in 0..knots {
        ata[(k, k)] += 1e-14;
    }
    let coef = match ata.clone().cholesky() {
        Some(ch) => ch.solve(&aty),
        None => ata.lu().solve(&aty).unwrap_or_else(|| DVector::zeros(knots)),
    };
    let sq: f64 = s
        .iter()
        .zip(values)
        .map(|(&si, &vi)| {
            let (k, w) = basis(si);
            let g = coef[k] * (1.0 - w) + coef[k + 1] * w;
            (vi - g).powi(2)
        })
        .sum();
    (sq / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn front(x: &[f64]) -> f64 {
        let s = 0.6 * x[0] + 0.8 * x[1];
        1.0 / (1.0 + (s).exp())
    }

    #[test]
    fn planar_field_has_tiny_defect() {
        let l = Lattice::from_bounds(&[-6.0, -6.0], &[6.0, 6.0], 0.1).unwrap();
        let u = GridField::from_fn(l, 1.0, front);
        let r = planarity_defect(&u, &[0.0, 0.0], 1.0).unwrap();
        assert!(r.defect <= 1e-3, "{r:?}");
        assert!(sphere::angle(&r.direction, &[0.6, 0.8]) < 1e-3);
    }

    #[test]
    fn corner_is_not_planar_and_flat_is_flat() {
        let l = Lattice::from_bounds(&[-6.0, -6.0], &[6.0, 6.0], 0.1).unwrap();
        let corner = GridField::from_fn(l.clone(), 1.0, |x| 1.0 / (1.0 + (x[1] - x[0].abs()).exp()));
        assert!(planarity_defect(&corner, &[0.0, 0.0], 2.0).unwrap().defect > 0.05);
        let flat = GridField::constant(l, 1.0);
        let r = planarity_defect(&flat, &[0.0, 0.0], 1.0).unwrap();
        assert!(r.flat && r.defect == 0.0);
        assert!(planarity_defect(&flat, &[5.5, 0.0], 1.0).is_err());
    }
}
