//! Least-squares fit of a front position against `a·t + b·ln t + d`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::FrontError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontFit {
    /// Linear coefficient `a`.
    pub speed: f64,
    /// Constant `d`.
    pub shift: f64,
    /// Coefficient `b` of `ln t`.
    pub log_coef: f64,
    pub rms: f64,
    /// `(a − c) / c` against the reference speed passed in.
    pub relative_speed_error: f64,
}

pub const MIN_SAMPLES: usize = 20;

/// Fits `position ≈ a·t + b·ln t + d` by SVD. Needs at least 20 samples,
/// all at positive times spanning a factor of 3 or more.
pub fn fit_front_position(samples: &[(f64, f64)], c: f64) -> Result<FrontFit, FrontError> {
    if samples.len() < MIN_SAMPLES {
        return Err(FrontError::Fit(format!("need at least {MIN_SAMPLES} samples, got {}", samples.len())));
    }
    if samples.iter().any(|&(t, x)| !(t > 0.0) || !t.is_finite() || !x.is_finite()) {
        return Err(FrontError::Fit("times must be positive and values finite".into()));
    }
    let tmin = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let tmax = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if tmax < 3.0 * tmin {
        return Err(FrontError::Fit(format!("times span [{tmin}, {tmax}], less than a factor 3")));
    }
    // Columns are scaled to unit max to keep the conditioning honest.
    let ln_max = tmax.ln().abs().max(tmin.ln().abs()).max(1.0);
    let a = DMatrix::from_fn(samples.len(), 3, |i, j| {
        let t = samples[i].0;
        match j {
            0 => t / tmax,
            1 => t.ln() / ln_max,
            _ => 1.0,
        }
    });
    let y = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-10 * smax) {
        return Err(FrontError::Fit(format!("degenerate design matrix (singular values {smin:e} / {smax:e})")));
    }
    let coef = svd.solve(&y, 0.0).map_err(|e| FrontError::Fit(e.to_string()))?;
    let resid = &a * &coef - &y;
    let rms = (resid.norm_squared() / samples.len() as f64).sqrt();
    let speed = coef[0] / tmax;
    Ok(FrontFit {
        speed,
        shift: coef[2],
        log_coef: coef[1] / ln_max,
        rms,
        relative_speed_error: if c != 0.0 { (speed - c) / c } else { f64::NAN },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_generator() {
        let s: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let t = 10.0 + 4.0 * i as f64;
                let noise = 1e-3 * ((i * 7919 % 13) as f64 / 6.0 - 1.0);
                (t, 2.0 * t - 1.5 * t.ln() + 0.3 + noise)
            })
            .collect();
        let fit = fit_front_position(&s, 2.0).unwrap();
        assert!((fit.speed - 2.0).abs() < 1e-2 && (fit.log_coef + 1.5).abs() < 1e-2 && (fit.shift - 0.3).abs() < 1e-2, "{fit:?}");
    }

    #[test]
    fn rejects_short_or_narrow_data() {
        let s: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, 0.0)).collect();
        assert!(fit_front_position(&s, 2.0).is_err());
        let s: Vec<(f64, f64)> = (0..30).map(|i| (10.0 + 0.1 * i as f64, 0.0)).collect();
        assert!(fit_front_position(&s, 2.0).is_err());
    }
}
