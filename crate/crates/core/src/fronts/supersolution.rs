//! Retracting multi-front supersolutions.
//!
//! `v(t, x) = 2 Σ_{e ∈ S} φ(x·e − c*(t − T) + R/2)` with `φ` the minimal-speed
//! front and `S` an ε-net of the unit sphere. Each term solves the equation
//! exactly, so the residual is `2 Σ f(φ_i) − f(2 Σ φ_i)`, nonnegative for any
//! subadditive `f`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FrontError, FrontProfile};
use crate::reaction::ReactionFn;
use crate::scalar::Real;
use crate::sphere;

/// Random probes used to certify a 3D net.
const COVER_PROBES: usize = 20_000;

/// Serializable parameters of a [`Supersolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionParams {
    pub dim: usize,
    pub lambda: f64,
    pub speed: f64,
    pub minimal_speed: f64,
    pub epsilon: f64,
    pub horizon: f64,
    pub shift: f64,
    /// Largest distance from a probe direction to the net.
    pub cover_radius: f64,
    pub directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Supersolution<T: Real> {
    profile: FrontProfile<T>,
    params: SupersolutionParams,
}

/// Builds the supersolution that stays below `lambda` at the origin on
/// `[0, horizon]` and is at least 1 outside the ball of radius `R + c·horizon`
/// at time 0.
pub fn build_supersolution<T: Real>(
    profile: &FrontProfile<T>,
    lambda: f64,
    c: f64,
    horizon: f64,
    epsilon: f64,
    dim: usize,
) -> Result<Supersolution<T>, FrontError> {
    let c_star = profile.reaction().minimal_speed()?.as_f64();
    let cp = profile.speed().as_f64();
    if (cp - c_star).abs() > 1e-9 * c_star {
        return Err(FrontError::Parameter(format!("profile speed {cp} is not the minimal speed {c_star}")));
    }
    if !(1..=3).contains(&dim) {
        return Err(FrontError::Parameter(format!("dimension must be 1, 2 or 3, got {dim}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) || !(horizon > 0.0 && horizon.is_finite()) {
        return Err(FrontError::Parameter(format!("need lambda > 0 and horizon > 0, got {lambda} and {horizon}")));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(FrontError::Parameter(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    if !((1.0 - epsilon) * c > c_star) {
        return Err(FrontError::Parameter(format!("need (1 - epsilon)·c > c* = {c_star}, got c = {c}, epsilon = {epsilon}")));
    }
    let (directions, cover_radius) = epsilon_net(dim, epsilon);
    let target = lambda / (2.0 * directions.len() as f64);
    let shift = 2.0 * level_crossing(profile, 0.999 * target);
    let params = SupersolutionParams {
        dim,
        lambda,
        speed: c,
        minimal_speed: c_star,
        epsilon,
        horizon,
        shift,
        cover_radius,
        directions,
    };
    Ok(Supersolution { profile: profile.clone(), params })
}

/// Smallest positive `z` (to bisection accuracy) with `φ(z) ≤ level`.
fn level_crossing<T: Real>(profile: &FrontProfile<T>, level: f64) -> f64 {
    let phi = |z: f64| profile.eval(z).as_f64();
    let mut lo = 1e-6;
    if phi(lo) <= level {
        return lo;
    }
    let mut hi = 1.0;
    while phi(hi) > level {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// ε-net of the unit sphere and its measured cover radius.
///
/// 2D uses equal angles at spacing at most `2 arcsin(ε/2)`, whose cover
/// radius is exact. 3D densifies a Fibonacci sphere until random probes and
/// a dense Fibonacci probe set all lie within `ε`.
pub fn epsilon_net(dim: usize, epsilon: f64) -> (Vec<Vec<f64>>, f64) {
    match dim {
        1 => (vec![vec![1.0], vec![-1.0]], 0.0),
        2 => {
            let spacing = 2.0 * (epsilon / 2.0).asin();
            let n = ((2.0 * std::f64::consts::PI / spacing).ceil() as usize).max(3);
            let half_gap = std::f64::consts::PI / n as f64;
            (sphere::spread_directions(2, n), 2.0 * (half_gap / 2.0).sin())
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            let mut probes: Vec<Vec<f64>> = (0..COVER_PROBES).map(|_| sphere::random_unit(&mut rng, 3)).collect();
            probes.extend(sphere::fibonacci_sphere(COVER_PROBES));
            let mut n = ((4.0 / (epsilon * epsilon)).ceil() as usize).max(8);
            loop {
                let net = sphere::fibonacci_sphere(n);
                let radius = probes
                    .iter()
                    .map(|p| net.iter().map(|e| sphere::dist(p, e)).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max);
                if radius <= epsilon {
                    return (net, radius);
                }
                n = n + n / 4 + 1;
            }
        }
    }
}

impl<T: Real> Supersolution<T> {
    pub fn params(&self) -> &SupersolutionParams {
        &self.params
    }

    pub fn profile(&self) -> &FrontProfile<T> {
        &self.profile
    }

    pub fn shift(&self) -> f64 {
        self.params.shift
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.params.directions
    }

    fn argument(&self, t: f64, x: &[f64], e: &[f64]) -> f64 {
        let p = &self.params;
        sphere::dot(x, e) - p.minimal_speed * (t - p.horizon) + 0.5 * p.shift
    }

    pub fn value(&self, t: f64, x: &[f64]) -> T {
        let sum: T = self.params.directions.iter().map(|e| self.profile.eval(self.argument(t, x, e))).sum();
        T::lit(2.0) * sum
    }

    /// `∂t v − Δv − f(v)` at `(t, x)`, using the front ODE for each term.
    pub fn residual_at(&self, f: &ReactionFn<T>, t: f64, x: &[f64]) -> T {
        let two = T::lit(2.0);
        let mut own = T::zero();
        let mut sum = T::zero();
        for e in &self.params.directions {
            let phi = self.profile.eval(self.argument(t, x, e));
            own += f.eval(phi);
            sum += phi;
        }
        two * own - f.eval(two * sum)
    }

    /// Radius along `dir` at which `v(t, ·)` first reaches `level`, scanning outward from the origin.
    pub fn level_radius(&self, t: f64, level: f64, dir: &[f64]) -> Option<f64> {
        let at = |r: f64| self.value(t, &sphere::axpy(&vec![0.0; dir.len()], r, dir)).as_f64();
        if at(0.0) >= level {
            return Some(0.0);
        }
        let step = 0.25;
        let limit = 4.0 * (self.params.shift + self.params.speed * self.params.horizon) + 100.0;
        let mut r = 0.0;
        while r < limit {
            let next = r + step;
            if at(next) >= level {
                let (mut lo, mut hi) = (r, next);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if at(mid) >= level {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Some(hi);
            }
            r = next;
        }
        None
    }
}

/// Minimum of `∂t v − Δv − f(v)` over `points`, with `f` free so that
/// non-subadditive nonlinearities can be probed against the same `v`.
pub fn supersolution_residual<T: Real>(v: &Supersolution<T>, f: &ReactionFn<T>, points: &[(f64, Vec<f64>)]) -> T {
    points.iter().map(|(t, x)| v.residual_at(f, *t, x)).fold(T::infinity(), T::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronts::shoot_profile;

    #[test]
    fn planar_net_has_exact_cover_radius() {
        let (net, radius) = epsilon_net(2, 0.2);
        assert_eq!(net.len(), 32);
        assert!(radius <= 0.2);
        let probe = [(0.5f64).cos(), (0.5f64).sin()];
        assert!(net.iter().any(|e| sphere::dist(&probe, e) <= radius + 1e-12));
    }

    #[test]
    fn spatial_net_is_certified() {
        let (net, radius) = epsilon_net(3, 0.3);
        assert!(radius <= 0.3);
        assert!(net.len() >= 40);
    }

    #[test]
    fn parameter_errors() {
        let f = ReactionFn::<f64>::logistic();
        let p = shoot_profile(&f, 2.0, 0.005).unwrap();
        assert!(build_supersolution(&p, 0.1, 3.0, 10.0, 0.6, 2).is_err());
        assert!(build_supersolution(&p, 0.1, 2.1, 10.0, 0.2, 2).is_err());
        let fast = shoot_profile(&f, 3.0, 0.005).unwrap();
        assert!(build_supersolution(&fast, 0.1, 3.0, 10.0, 0.2, 2).is_err());
    }
}
