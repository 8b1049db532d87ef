//! The opening function
//! `O(x) = sup_{ξ∈π_x, y∈U∖{ξ}} (x−ξ)/|x−ξ| · (y−ξ)/|y−ξ|`
//! and its supremum over distance level sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GeometryError, SetDescriptor};
use crate::sphere;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpeningConfig {
    /// Number of radial shells around each projection point.
    pub shells: usize,
    /// Directions per shell.
    pub directions: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub refine_iterations: usize,
    pub seed: u64,
    /// Slack when collecting projection points.
    pub projection_tol: f64,
    /// Reported accuracy of one estimate; monotonicity is checked with twice this.
    pub tolerance: f64,
}

impl Default for OpeningConfig {
    fn default() -> Self {
        Self {
            shells: 48,
            directions: 64,
            r_min: 1e-3,
            r_max: 1e7,
            refine_iterations: 20,
            seed: 42,
            projection_tol: 1e-7,
            tolerance: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeningEstimate {
    /// `-inf` when `U` is empty or has no point besides the projection.
    pub value: f64,
    pub projections: Vec<Vec<f64>>,
    /// The point `y ∈ U` realising `value`.
    pub witness: Option<Vec<f64>>,
}

/// Estimates `O(x)` from below: every candidate `y` is checked to lie in `U`.
pub fn opening(u: &SetDescriptor, x: &[f64], cfg: &OpeningConfig) -> Result<OpeningEstimate, GeometryError> {
    if x.len() != u.dim() {
        return Err(GeometryError::Dimension { expected: u.dim(), got: x.len() });
    }
    let none = |projections| OpeningEstimate { value: f64::NEG_INFINITY, projections, witness: None };
    if u.is_empty() {
        return Ok(none(vec![]));
    }
    let proj = u.projections(x, cfg.projection_tol)?;
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    for (k, xi) in proj.points.iter().enumerate() {
        let Some(n) = sphere::normalized(&sphere::sub(x, xi)) else { continue };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
        if let Some((v, y)) = sup_at(u, xi, &n, cfg, &mut rng) {
            if v > best {
                best = v;
                witness = Some(y);
            }
        }
    }
    if witness.is_none() {
        return Ok(none(proj.points));
    }
    Ok(OpeningEstimate { value: best, projections: proj.points, witness })
}

fn score(u: &SetDescriptor, xi: &[f64], n: &[f64], y: &[f64]) -> Option<f64> {
    let d = sphere::sub(y, xi);
    let r = sphere::norm(&d);
    if !(r > 1e-12 * (1.0 + sphere::norm(xi))) || !r.is_finite() || !u.contains(y) {
        return None;
    }
    Some(sphere::dot(n, &d) / r)
}

fn sup_at(u: &SetDescriptor, xi: &[f64], n: &[f64], cfg: &OpeningConfig, rng: &mut ChaCha8Rng) -> Option<(f64, Vec<f64>)> {
    let dim = xi.len();
    let mut pool: Vec<(f64, Vec<f64>)> = Vec::new();
    let push = |y: Vec<f64>, pool: &mut Vec<(f64, Vec<f64>)>| {
        if let Some(v) = score(u, xi, n, &y) {
            pool.push((v, y));
        }
    };

    // Stratified shells: geometric radii, jittered direction sets.
    let shells = cfg.shells.max(2);
    let ratio = (cfg.r_max / cfg.r_min).ln() / (shells - 1) as f64;
    let base = sphere::spread_directions(dim, cfg.directions.max(2));
    for s in 0..shells {
        let r = cfg.r_min * (ratio * (s as f64 + rng.gen::<f64>() - 0.5)).exp();
        let twist = rng.gen_range(0.0..std::f64::consts::TAU);
        for d in &base {
            let d = if dim == 2 { rotate2(d, twist) } else if dim == 3 { sphere::random_unit(rng, 3) } else { d.clone() };
            push(sphere::axpy(xi, r, &d), &mut pool);
        }
    }
    for y in limit_candidates(u, xi) {
        push(y, &mut pool);
    }
    if pool.is_empty() {
        return None;
    }
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));
    pool.truncate(6);
    let mut best = pool[0].clone();
    for (v0, y0) in pool {
        let (v, y) = climb(u, xi, n, v0, y0, cfg.refine_iterations, rng);
        if v > best.0 {
            best = (v, y);
        }
    }
    Some(best)
}

fn climb(
    u: &SetDescriptor,
    xi: &[f64],
    n: &[f64],
    mut v: f64,
    mut y: Vec<f64>,
    iterations: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<f64>) {
    let dim = xi.len();
    let mut step = 0.25 * sphere::dist(&y, xi);
    for _ in 0..iterations {
        let mut improved = false;
        let r = sphere::sub(&y, xi);
        let mut trials: Vec<Vec<f64>> = (0..4 * dim).map(|_| sphere::axpy(&y, step, &sphere::random_unit(rng, dim))).collect();
        trials.push(sphere::axpy(xi, 2.0, &r));
        trials.push(sphere::axpy(xi, 0.5, &r));
        for t in trials {
            if let Some(vt) = score(u, xi, n, &t) {
                if vt > v {
                    v = vt;
                    y = t;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (v, y)
}

fn rotate2(d: &[f64], a: f64) -> Vec<f64> {
    let (s, c) = a.sin_cos();
    vec![c * d[0] - s * d[1], s * d[0] + c * d[1]]
}

const FAR: [f64; 8] = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e9];

/// Deterministic candidates that capture suprema attained only in a limit:
/// along boundary planes, far along wedge branches, far along graphs, and
/// arbitrarily close to `ξ` on curved boundaries.
fn limit_candidates(u: &SetDescriptor, xi: &[f64]) -> Vec<Vec<f64>> {
    let dim = xi.len();
    let mut out = Vec::new();
    match u {
        SetDescriptor::Empty { .. } => {}
        SetDescriptor::HalfSpace { normal, .. } => {
            for t in orthonormal_complement(normal) {
                for &l in &FAR {
                    for s in [-1.0, 1.0] {
                        let y = sphere::axpy(xi, s * l, &t);
                        out.push(sphere::axpy(&y, -1e-12 * l, normal));
                    }
                }
            }
        }
        SetDescriptor::Ball { center, radius, .. } => {
            if let Some(radial) = sphere::normalized(&sphere::sub(xi, center)) {
                for t in orthonormal_complement(&radial) {
                    for k in 1..=9 {
                        let th = 10f64.powi(-k);
                        for s in [-1.0, 1.0] {
                            let dir: Vec<f64> = radial.iter().zip(&t).map(|(a, b)| a * th.cos() + s * b * th.sin()).collect();
                            out.push(sphere::axpy(center, radius * (1.0 - 1e-13), &dir));
                        }
                    }
                }
            }
        }
        SetDescriptor::Polytope { faces, .. } => {
            for f in faces.iter().filter(|f| f.signed(xi).abs() <= 1e-9 * (1.0 + sphere::norm(xi))) {
                for t in orthonormal_complement(&f.normal) {
                    for k in -6..=6 {
                        for s in [-1.0, 1.0] {
                            let y = sphere::axpy(xi, s * 10f64.powi(k), &t);
                            out.push(sphere::axpy(&y, -1e-12, &f.normal));
                        }
                    }
                }
            }
        }
        SetDescriptor::VShape { slope, .. } => {
            let m = (1.0 + slope * slope).sqrt();
            for sx in [-1.0, 1.0] {
                for &l in &FAR {
                    let mut y = xi.to_vec();
                    y[0] = sx * l / m;
                    y[1] = slope * l / m - 1e-9 * l;
                    out.push(y);
                }
            }
            for a in 2..dim {
                for &l in &FAR {
                    for s in [-1.0, 1.0] {
                        let mut y = xi.to_vec();
                        y[a] += s * l;
                        y[1] -= 1e-12 * l;
                        out.push(y);
                    }
                }
            }
        }
        SetDescriptor::Subgraph { gamma, .. } => {
            let hd = dim - 1;
            let dirs = if hd == 0 { vec![] } else { sphere::spread_directions(hd, if hd == 1 { 2 } else { 16 }) };
            for u in &dirs {
                for k in -3..=9 {
                    for m in [1.0, 2.0, 5.0] {
                        let s = m * 10f64.powi(k);
                        let yp = sphere::axpy(&xi[..hd], s, u);
                        let g = gamma.eval(&yp);
                        let mut y = yp;
                        y.push(g - 1e-12 * (1.0 + g.abs()));
                        out.push(y);
                    }
                }
            }
        }
        SetDescriptor::Union { parts, .. } => {
            for p in parts {
                out.extend(limit_candidates(p, xi));
                if let Some((d, q)) = p.nearest(xi) {
                    if d > 0.0 {
                        out.push(q.clone());
                        out.extend(limit_candidates(p, &q));
                    }
                }
            }
        }
        SetDescriptor::Raster { mask, .. } => {
            let l = mask.lattice();
            let h = l.spacing();
            for i in (0..l.len()).filter(|&i| mask.bits()[i]) {
                let c = l.center(i);
                out.push(c.clone());
                for corner in 0..(1usize << dim) {
                    let y = (0..dim).map(|a| c[a] + if corner >> a & 1 == 1 { 0.5 } else { -0.5 } * h[a]).collect();
                    out.push(y);
                }
            }
        }
    }
    out
}

/// Orthonormal basis of the complement of a unit vector.
fn orthonormal_complement(n: &[f64]) -> Vec<Vec<f64>> {
    let dim = n.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for a in 0..dim {
        let mut v = vec![0.0; dim];
        v[a] = 1.0;
        let p = sphere::dot(&v, n);
        v = sphere::axpy(&v, -p, n);
        for b in &basis {
            let p = sphere::dot(&v, b);
            v = sphere::axpy(&v, -p, b);
        }
        if let Some(u) = sphere::normalized(&v) {
            if sphere::norm(&v) > 1e-6 {
                basis.push(u);
            }
        }
        if basis.len() + 1 == dim {
            break;
        }
    }
    basis
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub radius: f64,
    pub sup: f64,
    pub argmax: Option<Vec<f64>>,
    /// Number of level-set points evaluated.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeningProfile {
    pub entries: Vec<ProfileEntry>,
    pub tolerance: f64,
    /// Whether `R ↦ sup O` is nonincreasing up to twice the tolerance.
    pub monotone: bool,
}

/// `sup {O(x) : dist(x, U) = R}` for each radius, estimated over points shot
/// from boundary projections of `directions` seeds around the set.
pub fn opening_profile(
    u: &SetDescriptor,
    radii: &[f64],
    directions: usize,
    cfg: &OpeningConfig,
) -> Result<OpeningProfile, GeometryError> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(GeometryError::Invalid("radii must be positive and strictly increasing".into()));
    }
    if directions == 0 {
        return Err(GeometryError::Invalid("need at least one direction".into()));
    }
    let mut entries = Vec::with_capacity(radii.len());
    for &r in radii {
        let pts = level_set_points(u, r, directions);
        let mut sup = f64::NEG_INFINITY;
        let mut arg = None;
        for x in &pts {
            let est = opening(u, x, cfg)?;
            if est.value > sup {
                sup = est.value;
                arg = Some(x.clone());
            }
        }
        entries.push(ProfileEntry { radius: r, sup, argmax: arg, points: pts.len() });
    }
    let slack = 2.0 * cfg.tolerance;
    let monotone = entries
        .iter()
        .enumerate()
        .all(|(i, a)| entries[i + 1..].iter().all(|b| b.sup <= a.sup + slack));
    Ok(OpeningProfile { entries, tolerance: cfg.tolerance, monotone })
}

/// Points at distance `r` from `U` (within `1e-6·r`): seeds on a sphere around
/// the set are projected, and the ray from the projection through the seed is
/// bisected on the distance.
pub(crate) fn level_set_points(u: &SetDescriptor, r: f64, directions: usize) -> Vec<Vec<f64>> {
    let Some((anchor, scale)) = u.anchor() else { return vec![] };
    let dim = u.dim();
    let mut out = Vec::new();
    for d in sphere::spread_directions(dim, directions) {
        let x0 = sphere::axpy(&anchor, scale + r, &d);
        let Some((d0, xi)) = u.nearest(&x0) else { continue };
        if d0 == 0.0 {
            continue;
        }
        // A seed that lands on its own projection gives no outward ray.
        let Some(dir) = sphere::normalized(&sphere::sub(&x0, &xi)) else { continue };
        if let Some(x) = shoot(u, &xi, &dir, r) {
            out.push(x);
        }
    }
    out
}

pub(crate) fn shoot(u: &SetDescriptor, xi: &[f64], dir: &[f64], r: f64) -> Option<Vec<f64>> {
    let at = |s: f64| sphere::axpy(xi, s, dir);
    let mut hi = r;
    let mut tries = 0;
    while u.dist(&at(hi)) < r {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let d = u.dist(&at(mid));
        if (d - r).abs() <= 1e-6 * r {
            return Some(at(mid));
        }
        if d < r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(at(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_space_opening_is_zero() {
        let h = SetDescriptor::lower_half_space(2);
        let o = opening(&h, &[0.0, 3.0], &OpeningConfig::default()).unwrap();
        assert!(o.value.abs() <= 1e-3 && o.value <= 1e-12, "{}", o.value);
    }

    #[test]
    fn v_shape_opening_is_sin_two_alpha() {
        let v = SetDescriptor::v_shape(2, 1.0);
        for h in [0.5, 4.0, 100.0] {
            let o = opening(&v, &[0.0, h], &OpeningConfig::default()).unwrap();
            assert!((o.value - 1.0).abs() < 1e-2, "h={h}: {}", o.value);
        }
        let v = SetDescriptor::v_shape(2, 0.5);
        let o = opening(&v, &[0.0, 4.0], &OpeningConfig::default()).unwrap();
        assert!((o.value - 0.8).abs() < 1e-2, "{}", o.value);
    }

    #[test]
    fn empty_and_singleton_give_minus_infinity() {
        let cfg = OpeningConfig::default();
        assert_eq!(opening(&SetDescriptor::Empty { dim: 2 }, &[1.0, 1.0], &cfg).unwrap().value, f64::NEG_INFINITY);
        let p = SetDescriptor::ball(vec![0.0, 0.0], 0.0);
        assert_eq!(opening(&p, &[1.0, 1.0], &cfg).unwrap().value, f64::NEG_INFINITY);
        let b = SetDescriptor::ball(vec![0.0, 0.0], 1.0);
        assert!(matches!(opening(&b, &[0.1, 0.0], &cfg), Err(GeometryError::Inside(_))));
    }

    #[test]
    fn level_set_points_hit_radius() {
        let sq = SetDescriptor::cuboid(&[-5.0, -5.0], &[5.0, 5.0]).unwrap();
        for x in level_set_points(&sq, 7.0, 16) {
            assert!((sq.dist(&x) - 7.0).abs() <= 7e-6);
        }
    }
}
