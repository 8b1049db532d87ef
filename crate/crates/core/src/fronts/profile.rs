//! Traveling-front profiles by phase-plane shooting.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::FrontError;
use crate::reaction::ReactionFn;
use crate::scalar::Real;

/// Truncation level at both ends of the table.
pub const TAIL_LEVEL: f64 = 1e-8;
/// Offset from 1 used when `f'(1) = 0` and there is no unstable eigendirection.
const DEGENERATE_START: f64 = 1e-3;
const MAX_STEPS: usize = 50_000_000;

/// Decay past the last node: a combination of the two linearized modes at 0.
#[derive(Debug, Clone, Copy)]
enum RightTail<T> {
    /// `a e^{λ₊ s} + b e^{λ₋ s}`
    Distinct { a: T, b: T, lp: T, lm: T },
    /// `(a + b s) e^{λ s}` at the minimal speed.
    Double { a: T, b: T, l: T },
}

impl<T: Real> RightTail<T> {
    fn fit(c: T, d0: T, phi: T, psi: T) -> Self {
        let two = T::lit(2.0);
        let disc = c * c - T::lit(4.0) * d0;
        if disc.as_f64() <= 1e-12 * c.as_f64() * c.as_f64() {
            let l = -c / two;
            Self::Double { a: phi, b: psi - l * phi, l }
        } else {
            let sq = disc.max(T::zero()).sqrt();
            let lp = (-c + sq) / two;
            let lm = (-c - sq) / two;
            let a = (psi - lm * phi) / (lp - lm);
            Self::Distinct { a, b: phi - a, lp, lm }
        }
    }

    fn value(&self, s: T) -> T {
        let v = match *self {
            Self::Distinct { a, b, lp, lm } => a * (lp * s).exp() + b * (lm * s).exp(),
            Self::Double { a, b, l } => (a + b * s) * (l * s).exp(),
        };
        v.max(T::zero())
    }

    fn deriv(&self, s: T) -> T {
        if self.value(s) == T::zero() {
            return T::zero();
        }
        match *self {
            Self::Distinct { a, b, lp, lm } => a * lp * (lp * s).exp() + b * lm * (lm * s).exp(),
            Self::Double { a, b, l } => (b + l * (a + b * s)) * (l * s).exp(),
        }
    }
}

/// Residual sup-norms of a tabulated profile over its interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileResidual {
    /// `|ψ' + cψ + f(φ)|` with `ψ'` the centered difference of the tabulated `φ'`.
    pub ode: f64,
    /// `|φ'' + cφ' + f(φ)|` with `φ''` the second difference of the tabulated `φ`.
    pub finite_difference: f64,
}

/// Decreasing solution of `φ'' + cφ' + f(φ) = 0` with `φ(-∞) = 1`,
/// `φ(+∞) = 0` and `φ(0) = 1/2`, tabulated on a uniform grid.
#[derive(Debug, Clone)]
pub struct FrontProfile<T: Real> {
    reaction: ReactionFn<T>,
    speed: T,
    dz: f64,
    /// `z = 0` sits at table index `base + frac`, with `frac` chosen so the
    /// interpolant returns exactly 1/2 there.
    base: usize,
    frac: f64,
    phi: Vec<T>,
    dphi: Vec<T>,
    /// Rate of `1 - φ ~ e^{μ z}` at the left end; zero when degenerate.
    left_rate: T,
    right: RightTail<T>,
}

/// Integrates the front ODE from the unstable manifold of 1 until `φ ≤ 1e-8`
/// with fixed-step RK4, then normalizes `φ(0) = 1/2`.
pub fn shoot_profile<T: Real>(f: &ReactionFn<T>, c: T, zstep: f64) -> Result<FrontProfile<T>, FrontError> {
    let c_star = f.minimal_speed()?;
    if !c.is_finite() || c < c_star * (T::one() - T::lit(T::slack(1e-12))) {
        return Err(FrontError::SpeedBelowMinimal { c: c.as_f64(), c_star: c_star.as_f64() });
    }
    if !(zstep > 0.0 && zstep <= 0.01) {
        return Err(FrontError::Parameter(format!("zstep must lie in (0, 0.01], got {zstep}")));
    }
    let two = T::lit(2.0);
    let d1 = f.deriv_at_1();
    let left_rate = if d1 < T::zero() { (-c + (c * c - T::lit(4.0) * d1).sqrt()) / two } else { T::zero() };
    let (p0, q0) = if left_rate > T::zero() {
        let eps = T::lit(TAIL_LEVEL);
        (T::one() - eps, -left_rate * eps)
    } else {
        // Slow manifold to leading order: cφ' ≈ -f(φ).
        let p = T::one() - T::lit(DEGENERATE_START);
        (p, -f.eval(p) / c)
    };

    let h = T::lit(zstep);
    let half = T::lit(0.5);
    let sixth = T::lit(1.0 / 6.0);
    let rhs = |p: T, q: T| (q, -c * q - f.eval(p));
    let rk4 = |p: T, q: T, h: T| {
        let (k1p, k1q) = rhs(p, q);
        let (k2p, k2q) = rhs(p + half * h * k1p, q + half * h * k1q);
        let (k3p, k3q) = rhs(p + half * h * k2p, q + half * h * k2q);
        let (k4p, k4q) = rhs(p + h * k3p, q + h * k3q);
        (p + h * sixth * (k1p + two * (k2p + k3p) + k4p), q + h * sixth * (k1q + two * (k2q + k3q) + k4q))
    };
    let (mut p, mut q) = (p0, q0);
    let mut phi = vec![p];
    let mut dphi = vec![q];
    let stop = T::lit(TAIL_LEVEL);
    while p > stop {
        if phi.len() > MAX_STEPS {
            return Err(FrontError::Integration(format!("no decay to {TAIL_LEVEL} within {MAX_STEPS} steps")));
        }
        (p, q) = rk4(p, q, h);
        if !p.is_finite() || !q.is_finite() {
            return Err(FrontError::Integration("non-finite state".into()));
        }
        if q >= T::zero() || p < T::zero() {
            return Err(FrontError::Integration(format!("profile lost monotonicity at φ = {p}")));
        }
        phi.push(p);
        dphi.push(q);
    }

    let half_level = T::lit(0.5);
    let base = phi
        .windows(2)
        .position(|w| w[0] >= half_level && w[1] < half_level)
        .ok_or_else(|| FrontError::Integration("profile never crosses 1/2".into()))?;
    let frac = exact_crossing(phi[base], phi[base + 1], half_level);
    let n = phi.len();
    let right = RightTail::fit(c, f.deriv_at_0(), phi[n - 1], dphi[n - 1]);
    Ok(FrontProfile { reaction: f.clone(), speed: c, dz: zstep, base, frac, phi, dphi, left_rate, right })
}

/// Weight `t` in `[0, 1]` at which `a + t (b - a)` evaluates to `level` in
/// floating point, or the closest representable miss. Needs `a >= level > b`.
fn exact_crossing<T: Real>(a: T, b: T, level: T) -> f64 {
    let d = b - a;
    let at = |t: T| a + t * d;
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut t = ((level - a) / d).max(lo).min(hi);
    loop {
        let v = at(t);
        if v == level {
            return t.as_f64();
        }
        if v > level {
            lo = t;
        } else {
            hi = t;
        }
        t = lo + (hi - lo) * T::lit(0.5);
        if t <= lo || t >= hi {
            let miss = |t: T| (at(t) - level).abs();
            return if miss(lo) <= miss(hi) { lo.as_f64() } else { hi.as_f64() };
        }
    }
}

impl<T: Real> FrontProfile<T> {
    pub fn speed(&self) -> T {
        self.speed
    }

    pub fn reaction(&self) -> &ReactionFn<T> {
        &self.reaction
    }

    pub fn step(&self) -> f64 {
        self.dz
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn z_at(&self, k: usize) -> f64 {
        (k as f64 - self.base as f64 - self.frac) * self.dz
    }

    pub fn z_min(&self) -> f64 {
        self.z_at(0)
    }

    pub fn z_max(&self) -> f64 {
        self.z_at(self.phi.len() - 1)
    }

    pub fn phi_table(&self) -> &[T] {
        &self.phi
    }

    pub fn dphi_table(&self) -> &[T] {
        &self.dphi
    }

    /// Tabulated `(z, φ, φ')` triples.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, T, T)> + '_ {
        (0..self.phi.len()).map(|k| (self.z_at(k), self.phi[k], self.dphi[k]))
    }

    fn locate(&self, z: f64) -> Option<(usize, T)> {
        // Keep the fractional part apart from `base` so `z = 0` reproduces `frac` bit for bit.
        let u = z / self.dz + self.frac;
        let last = self.phi.len() - 1;
        let idx = u + self.base as f64;
        if !(idx >= 0.0 && idx <= last as f64) {
            return None;
        }
        let floor = u.floor();
        let k = (self.base as f64 + floor) as usize;
        if k >= last {
            return Some((last - 1, T::one()));
        }
        Some((k, T::lit(u - floor)))
    }

    /// `φ(z)`: linear interpolation inside the table, linearized tails outside.
    pub fn eval(&self, z: f64) -> T {
        if let Some((k, w)) = self.locate(z) {
            return self.phi[k] + w * (self.phi[k + 1] - self.phi[k]);
        }
        if z < self.z_min() {
            let gap = T::one() - self.phi[0];
            T::one() - gap * (self.left_rate * T::lit(z - self.z_min())).exp()
        } else {
            self.right.value(T::lit(z - self.z_max()))
        }
    }

    /// `φ'(z)`, interpolated like [`eval`](Self::eval).
    pub fn deriv(&self, z: f64) -> T {
        if let Some((k, w)) = self.locate(z) {
            return self.dphi[k] + w * (self.dphi[k + 1] - self.dphi[k]);
        }
        if z < self.z_min() {
            let gap = T::one() - self.phi[0];
            -gap * self.left_rate * (self.left_rate * T::lit(z - self.z_min())).exp()
        } else {
            self.right.deriv(T::lit(z - self.z_max()))
        }
    }

    /// `φ''(z)` from the ODE itself.
    pub fn second_deriv(&self, z: f64) -> T {
        -self.speed * self.deriv(z) - self.reaction.eval(self.eval(z))
    }

    /// Linearized decay rate at `+∞`: `(-c + sqrt(c² - 4 f'(0))) / 2`.
    pub fn decay_rate(&self) -> T {
        let c = self.speed;
        let disc = (c * c - T::lit(4.0) * self.reaction.deriv_at_0()).max(T::zero());
        (-c + disc.sqrt()) / T::lit(2.0)
    }

    /// Least-squares slope of `ln φ` against `z` over the nodes with `φ` in `[lo, hi]`.
    pub fn measured_decay_rate(&self, lo: f64, hi: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .nodes()
            .filter(|(_, p, _)| (lo..=hi).contains(&p.as_f64()))
            .map(|(z, p, _)| (z, p.as_f64().ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mz = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mz) * (p.1 - ml)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mz).powi(2)).sum();
        Some(sxy / sxx)
    }

    pub fn residual(&self) -> ProfileResidual {
        let c = self.speed.as_f64();
        let (p, q) = (&self.phi, &self.dphi);
        let h = self.dz;
        let mut out = ProfileResidual { ode: 0.0, finite_difference: 0.0 };
        for k in 1..p.len().saturating_sub(1) {
            let fk = self.reaction.eval(p[k]).as_f64();
            let cq = c * q[k].as_f64();
            let dq = (q[k + 1].as_f64() - q[k - 1].as_f64()) / (2.0 * h);
            let d2p = (p[k + 1].as_f64() - 2.0 * p[k].as_f64() + p[k - 1].as_f64()) / (h * h);
            out.ode = out.ode.max((dq + cq + fk).abs());
            out.finite_difference = out.finite_difference.max((d2p + cq + fk).abs());
        }
        out
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.phi.windows(2).all(|w| w[1] < w[0]) && self.phi.iter().all(|&p| p > T::zero() && p < T::one())
    }

    /// CSV with columns `z,phi,dphi`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), FrontError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["z", "phi", "dphi"]).map_err(csv_err)?;
        for (z, p, q) in self.nodes() {
            out.write_record([z.to_string(), p.to_string(), q.to_string()]).map_err(csv_err)?;
        }
        out.flush().map_err(|e| FrontError::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> FrontError {
    FrontError::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_minimal_front() {
        let f = ReactionFn::<f64>::logistic();
        let p = shoot_profile(&f, 2.0, 0.005).unwrap();
        assert!(p.is_strictly_decreasing());
        assert_eq!(p.eval(0.0), 0.5);
        let r = p.residual();
        assert!(r.ode <= 1e-6 && r.finite_difference <= 1e-4, "{r:?}");
        assert!(p.phi_table()[0] >= 1.0 - 1e-6 && *p.phi_table().last().unwrap() <= 1e-6);
    }

    #[test]
    fn tails_join_the_table_continuously() {
        let f = ReactionFn::<f64>::logistic();
        let p = shoot_profile(&f, 2.5, 0.005).unwrap();
        for z in [p.z_min(), p.z_max()] {
            assert!((p.eval(z - 1e-9) - p.eval(z + 1e-9)).abs() < 1e-9);
            assert!((p.deriv(z - 1e-9) - p.deriv(z + 1e-9)).abs() < 1e-8);
        }
        assert!(p.eval(p.z_max() + 50.0) > 0.0);
        assert!(p.eval(p.z_min() - 50.0) < 1.0);
    }

    #[test]
    fn below_minimal_speed_is_rejected() {
        let f = ReactionFn::<f64>::logistic();
        assert!(matches!(shoot_profile(&f, 1.0, 0.005), Err(FrontError::SpeedBelowMinimal { .. })));
        assert!(shoot_profile(&f, 2.0, 0.05).is_err());
    }

    #[test]
    fn degenerate_state_one_still_shoots() {
        let f = ReactionFn::<f64>::logistic_power(2.0).unwrap();
        let p = shoot_profile(&f, 2.0, 0.005).unwrap();
        assert!(p.is_strictly_decreasing());
        assert!(p.residual().ode <= 1e-6);
    }
}
