//! Effect of cutting the initial support to a cylinder.

use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Stencil};
use crate::geometry::SetDescriptor;
use crate::lattice::Lattice;
use crate::reaction::ReactionFn;
use crate::scalar::Real;
use crate::solver::{self, GridField, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub sigma: f64,
    pub tau: f64,
    /// `3στ`: horizontal radius kept in the truncated datum.
    pub truncation_radius: f64,
    /// `στ`: horizontal radius of the half-cylinder where errors are measured.
    pub roi_radius: f64,
    /// `sup |u − u'|` over the half-cylinder at time `τ`.
    pub sup_c0: f64,
    /// `sup |∇u − ∇u'|` over the interior of the half-cylinder.
    pub max_grad_diff: f64,
    pub roi_cells: usize,
}

fn horizontal_norm(x: &[f64]) -> f64 {
    x[..x.len() - 1].iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Runs from `1_U` and from `1_{U ∩ {|x'| ≤ 3στ}}` up to time `τ` and compares
/// them over `{|x'| ≤ στ, x_N ≥ 0}`.
///
/// The geometry outside the cylinder `|x'| ≤ l_radius` must lie below the
/// cone `x_N ≤ σ/(2c*)·|x'|`; this is checked on the cells of `U` up to one
/// cell diagonal.
#[allow(clippy::too_many_arguments)]
pub fn truncation_error<T: Real>(
    u: &SetDescriptor,
    sigma: f64,
    tau: f64,
    l_radius: f64,
    lattice: &Lattice,
    f: &ReactionFn<T>,
    cfg: &SolverConfig,
) -> Result<TruncationReport, DiagnosticsError> {
    let n = lattice.dim();
    if n < 2 || u.dim() != n {
        return Err(DiagnosticsError::Precondition("truncation needs a set and grid of equal dimension ≥ 2".into()));
    }
    if !(sigma > 0.0) || !(tau >= 1.0) {
        return Err(DiagnosticsError::Precondition(format!("need σ > 0 and τ ≥ 1, got {sigma} and {tau}")));
    }
    let c_star = f.minimal_speed().map_err(|e| DiagnosticsError::Precondition(e.to_string()))?.as_f64();
    let slope = sigma / (2.0 * c_star);
    let diag = lattice.spacing().iter().map(|h| h * h).sum::<f64>().sqrt();
    for i in 0..lattice.len() {
        let x = lattice.center(i);
        let r = horizontal_norm(&x);
        if r >= l_radius && u.contains(&x) && x[n - 1] > slope * r + diag {
            return Err(DiagnosticsError::Precondition(format!(
                "point {x:?} of U lies above the cone x_N ≤ {slope}·|x'| outside |x'| ≤ {l_radius}"
            )));
        }
    }
    let cut = 3.0 * sigma * tau;
    let full: GridField<T> = solver::rasterize(u, lattice);
    let trunc = GridField::from_fn(lattice.clone(), 0.0, |x| {
        if horizontal_norm(x) <= cut && u.contains(x) {
            T::one()
        } else {
            T::zero()
        }
    });
    let run_cfg = SolverConfig { horizon: tau, snapshot_every: tau, ..cfg.clone() };
    let a = solver::run(&full, f, &run_cfg, &mut |_| Ok(()))?;
    let b = solver::run(&trunc, f, &run_cfg, &mut |_| Ok(()))?;

    let roi = sigma * tau;
    let (sa, sb) = (Stencil::new(&a), Stencil::new(&b));
    let mut ix = vec![0usize; n];
    let (mut ga, mut gb) = (vec![0.0; n], vec![0.0; n]);
    let mut report = TruncationReport {
        sigma,
        tau,
        truncation_radius: cut,
        roi_radius: roi,
        sup_c0: 0.0,
        max_grad_diff: 0.0,
        roi_cells: 0,
    };
    for i in 0..lattice.len() {
        lattice.unravel(i, &mut ix);
        let x = lattice.center_of(&ix);
        if horizontal_norm(&x) > roi || x[n - 1] < 0.0 {
            continue;
        }
        report.roi_cells += 1;
        report.sup_c0 = report.sup_c0.max((sa.at(i) - sb.at(i)).abs());
        if sa.interior(&ix, 1) {
            sa.gradient(i, &mut ga);
            sb.gradient(i, &mut gb);
            let d = ga.iter().zip(&gb).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            report.max_grad_diff = report.max_grad_diff.max(d);
        }
    }
    if report.roi_cells == 0 {
        return Err(DiagnosticsError::Window("half-cylinder holds no cells".into()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_truncation_radius_changes_nothing() {
        let l = Lattice::from_bounds(&[-6.0, -4.0], &[6.0, 6.0], 0.25).unwrap();
        let f = ReactionFn::<f64>::logistic();
        let cfg = SolverConfig::explicit(0.0125, 2.0, 1.0);
        let r = truncation_error(&SetDescriptor::lower_half_space(2), 5.0, 2.0, 0.0, &l, &f, &cfg).unwrap();
        assert_eq!(r.sup_c0, 0.0);
    }

    #[test]
    fn steep_geometry_is_rejected() {
        let l = Lattice::from_bounds(&[-6.0, -4.0], &[6.0, 6.0], 0.25).unwrap();
        let f = ReactionFn::<f64>::logistic();
        let cfg = SolverConfig::explicit(0.0125, 2.0, 1.0);
        let v = SetDescriptor::v_shape(2, 1.0);
        assert!(matches!(truncation_error(&v, 0.3, 2.0, 0.0, &l, &f, &cfg), Err(DiagnosticsError::Precondition(_))));
    }
}
