//! Line profiles and invasion reach.

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::fronts::FrontProfile;
use crate::geometry::SetDescriptor;
use crate::scalar::Real;
use crate::solver::GridField;
use crate::sphere;

/// `u(x + s·e)` sampled at `s` in `[-L, L]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledProfile {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileComparison {
    /// `min_σ sup_s |u(s) − φ(s − σ)|` with `σ` restricted to `[-L, L]`.
    pub distance: f64,
    pub shift: f64,
    pub oscillation: f64,
    /// The samples span most of `(0, 1)` and stay close to the front.
    pub is_front: bool,
}

/// Samples the field along `x + s·e` at half the minimal spacing with
/// multilinear interpolation.
pub fn extract_profile<T: Real>(field: &GridField<T>, x: &[f64], e: &[f64], half_length: f64) -> Result<SampledProfile, DiagnosticsError> {
    let dir = sphere::normalized(e).ok_or_else(|| DiagnosticsError::Degenerate("zero direction".into()))?;
    if !(half_length > 0.0) || x.len() != field.lattice().dim() || dir.len() != x.len() {
        return Err(DiagnosticsError::Degenerate("bad segment".into()));
    }
    let step = 0.5 * field.lattice().min_spacing();
    let half = (half_length / step).ceil() as i64;
    let mut s = Vec::with_capacity(2 * half as usize + 1);
    let mut values = Vec::with_capacity(s.capacity());
    for k in -half..=half {
        let sk = (k as f64 * step).clamp(-half_length, half_length);
        let v = field
            .sample(&sphere::axpy(x, sk, &dir))
            .ok_or_else(|| DiagnosticsError::Window(format!("segment leaves the grid at s = {sk}")))?;
        s.push(sk);
        values.push(v);
    }
    Ok(SampledProfile { point: x.to_vec(), direction: dir, s, values, time: field.time() })
}

impl SampledProfile {
    pub fn oscillation(&self) -> f64 {
        let max = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Best-shift sup-norm distance to a front profile.
    pub fn compare<T: Real>(&self, phi: &FrontProfile<T>) -> ProfileComparison {
        let half = self.s.last().copied().unwrap_or(0.0);
        let cost = |sigma: f64| {
            self.s
                .iter()
                .zip(&self.values)
                .map(|(&s, &v)| (v - phi.eval(s - sigma).as_f64()).abs())
                .fold(0.0, f64::max)
        };
        let step = if self.s.len() > 1 { 0.5 * (self.s[1] - self.s[0]) } else { 0.01 };
        let mut best = (f64::INFINITY, 0.0);
        let mut sigma = -half;
        while sigma <= half + 1e-12 {
            let c = cost(sigma);
            if c < best.0 {
                best = (c, sigma);
            }
            sigma += step;
        }
        let (mut a, mut b) = ((best.1 - step).max(-half), (best.1 + step).min(half));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let m1 = b - g * (b - a);
            let m2 = a + g * (b - a);
            if cost(m1) <= cost(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let mid = 0.5 * (a + b);
        if cost(mid) < best.0 {
            best = (cost(mid), mid);
        }
        let oscillation = self.oscillation();
        ProfileComparison { distance: best.0, shift: best.1, oscillation, is_front: oscillation >= 0.5 && best.0 <= 0.1 }
    }
}

/// Largest `dist(x, anchor)` over the region where `u ≥ level`.
///
/// Besides cell centers, the level crossing between each qualifying cell and
/// a neighbor below the level is located by linear interpolation, which
/// gives sub-cell resolution of the reach.
pub fn level_set_radius<T: Real>(field: &GridField<T>, level: f64, anchor: &SetDescriptor) -> Result<f64, DiagnosticsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(DiagnosticsError::Degenerate(format!("level {level} outside (0, 1)")));
    }
    let l = field.lattice();
    let n = l.dim();
    let strides = l.strides();
    let vals = field.values();
    let mut ix = vec![0usize; n];
    let mut reach: Option<f64> = None;
    for (idx, v) in vals.iter().enumerate() {
        let v = v.as_f64();
        if v < level {
            continue;
        }
        l.unravel(idx, &mut ix);
        let c = l.center_of(&ix);
        let mut best = anchor.dist(&c);
        for a in 0..n {
            for up in [false, true] {
                let ok = if up { ix[a] + 1 < l.dims()[a] } else { ix[a] > 0 };
                if !ok {
                    continue;
                }
                let j = if up { idx + strides[a] } else { idx - strides[a] };
                let w = vals[j].as_f64();
                if w >= level {
                    continue;
                }
                let t = (v - level) / (v - w);
                let mut p = c.clone();
                p[a] += if up { t } else { -t } * l.spacing()[a];
                best = best.max(anchor.dist(&p));
            }
        }
        reach = Some(reach.map_or(best, |r: f64| r.max(best)));
    }
    reach.ok_or(DiagnosticsError::EmptyLevel(level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronts::shoot_profile;
    use crate::lattice::Lattice;
    use crate::reaction::ReactionFn;

    #[test]
    fn synthetic_front_matches_profile() {
        let f = ReactionFn::<f64>::logistic();
        let phi = shoot_profile(&f, 2.0, 0.005).unwrap();
        let l = Lattice::from_bounds(&[-30.0], &[30.0], 0.05).unwrap();
        let u = GridField::from_fn(l, 1.0, |x| phi.eval(x[0] - 1.3));
        let p = extract_profile(&u, &[0.0], &[1.0], 10.0).unwrap();
        let c = p.compare(&phi);
        assert!(c.distance <= 1e-4 && (c.shift - 1.3).abs() < 1e-3 && c.is_front, "{c:?}");
        let one = GridField::constant(u.lattice().clone(), 1.0);
        let c = extract_profile(&one, &[0.0], &[1.0], 10.0).unwrap().compare(&phi);
        assert!(!c.is_front && c.distance > 0.5);
    }

    #[test]
    fn reach_of_an_indicator() {
        let l = Lattice::from_bounds(&[-5.0, -5.0], &[5.0, 5.0], 0.1).unwrap();
        let ball = SetDescriptor::ball(vec![0.0, 0.0], 2.0);
        let u: GridField<f64> = crate::solver::rasterize(&ball, &l);
        let r = level_set_radius(&u, 0.5, &ball).unwrap();
        assert!(r < 0.1, "{r}");
        let zero = GridField::constant(l, 0.0);
        assert!(matches!(level_set_radius(&zero, 0.5, &ball), Err(DiagnosticsError::EmptyLevel(_))));
    }
}
