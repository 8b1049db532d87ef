//! `σ_k(D²u)` over a window.

use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Stencil};
use crate::lattice::Window;
use crate::scalar::Real;
use crate::solver::GridField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaResult {
    pub k: usize,
    pub sup_abs: f64,
    pub argmax: Vec<f64>,
    pub time: f64,
}

/// Elementary symmetric polynomial `σ_k` of the eigenvalues of the symmetric
/// row-major `n × n` matrix `a`, from characteristic-polynomial coefficients.
pub fn sigma_k(a: &[f64], n: usize, k: usize) -> f64 {
    let tr: f64 = (0..n).map(|i| a[i * n + i]).sum();
    match k {
        0 => 1.0,
        1 => tr,
        2 => {
            let tr_sq: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[i * n + j] * a[j * n + i]).sum();
            0.5 * (tr * tr - tr_sq)
        }
        3 if n == 3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => 0.0,
    }
}

/// Centered-difference Hessian at the cell containing `x`.
pub fn hessian_at<T: Real>(field: &GridField<T>, x: &[f64]) -> Option<Vec<f64>> {
    let st = Stencil::new(field);
    let ix = field.lattice().cell_of(x)?;
    if !st.interior(&ix, 1) {
        return None;
    }
    let n = field.lattice().dim();
    let mut out = vec![0.0; n * n];
    st.hessian(field.lattice().ravel(&ix), &mut out);
    Some(out)
}

/// Sup of `|σ_k(D²u)|` over the cell centers in `window`, which must keep
/// two cells of clearance from the grid boundary.
pub fn hessian_sigma<T: Real>(field: &GridField<T>, k: usize, window: &Window) -> Result<SigmaResult, DiagnosticsError> {
    let l = field.lattice();
    let n = l.dim();
    if k < 2 || k > n {
        return Err(DiagnosticsError::KOutOfRange { k, dim: n });
    }
    if field.time() < 1.0 {
        return Err(DiagnosticsError::TooEarly(field.time()));
    }
    if window.dim() != n {
        return Err(DiagnosticsError::Window(format!("window has dimension {}, field {n}", window.dim())));
    }
    let range = l.index_range(window).ok_or_else(|| DiagnosticsError::Window("window holds no cell centers".into()))?;
    for (a, &(lo, hi)) in range.iter().enumerate() {
        if lo < 2 || hi + 2 >= l.dims()[a] {
            return Err(DiagnosticsError::Window(format!("window reaches within two cells of the boundary on axis {a}")));
        }
    }
    let st = Stencil::new(field);
    let mut hess = vec![0.0; n * n];
    let mut ix = vec![0usize; n];
    let mut best = (-1.0, vec![0.0; n]);
    let count: usize = range.iter().map(|(lo, hi)| hi - lo + 1).product();
    for m in 0..count {
        let mut r = m;
        for a in (0..n).rev() {
            let w = range[a].1 - range[a].0 + 1;
            ix[a] = range[a].0 + r % w;
            r /= w;
        }
        let idx = l.ravel(&ix);
        st.hessian(idx, &mut hess);
        let s = sigma_k(&hess, n, k).abs();
        if s > best.0 {
            best = (s, l.center_of(&ix));
        }
    }
    Ok(SigmaResult { k, sup_abs: best.0, argmax: best.1, time: field.time() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    #[test]
    fn quadratics_are_exact() {
        let l = Lattice::from_bounds(&[-2.0, -2.0], &[2.0, 2.0], 0.125).unwrap();
        let w = Window::around(&[0.0, 0.0], 1.5);
        let cyl = GridField::from_fn(l.clone(), 1.0, |x| x[0] * x[0] + x[1]);
        assert!(hessian_sigma(&cyl, 2, &w).unwrap().sup_abs <= 1e-10);
        let bowl = GridField::from_fn(l, 1.0, |x| x[0] * x[0] + x[1] * x[1]);
        let r = hessian_sigma(&bowl, 2, &w).unwrap();
        assert!((r.sup_abs - 4.0).abs() <= 1e-9);
    }

    #[test]
    fn preconditions() {
        let l = Lattice::from_bounds(&[-2.0, -2.0], &[2.0, 2.0], 0.125).unwrap();
        let u = GridField::from_fn(l, 1.0, |x| x[0]);
        assert!(matches!(hessian_sigma(&u, 3, &Window::around(&[0.0, 0.0], 1.0)), Err(DiagnosticsError::KOutOfRange { .. })));
        assert!(hessian_sigma(&u, 2, &Window::around(&[0.0, 0.0], 1.95)).is_err());
        let mut early = u.clone();
        early.set_time(0.5);
        assert!(hessian_sigma(&early, 2, &Window::around(&[0.0, 0.0], 1.0)).is_err());
    }
}
