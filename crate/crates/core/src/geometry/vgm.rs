//! Sampled vanishing-global-mean test for height functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sphere;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VgmScale {
    pub separation: f64,
    /// `sup |γ(x')−γ(y')| / |x'−y'|` over sampled pairs at this separation.
    pub sup_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VgmReport {
    pub scales: Vec<VgmScale>,
    /// Last ratio at most half the first.
    pub decaying: bool,
    /// `sup |γ(x')−γ(y')| / (|x'−y'| + 1)` over all sampled pairs.
    pub m_estimate: f64,
}

/// Samples pairs `(x', x' + s·u)` at each separation `s`. Anchors are a grid
/// over `[-extent, extent]` that includes the origin, plus `random_pairs`
/// random anchors and directions.
pub fn vgm_check(
    gamma: &dyn Fn(&[f64]) -> f64,
    horizontal_dim: usize,
    separations: &[f64],
    extent: f64,
    random_pairs: usize,
    seed: u64,
) -> VgmReport {
    let hd = horizontal_dim.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = 2001usize;
    let mut m_est: f64 = 0.0;
    let mut scales = Vec::with_capacity(separations.len());
    let axis_dirs = sphere::spread_directions(hd, if hd == 1 { 2 } else { 8 });
    for &s in separations {
        let mut sup: f64 = 0.0;
        let pair = |x: &[f64], u: &[f64], sup: &mut f64, m: &mut f64| {
            let y = sphere::axpy(x, s, u);
            let dg = (gamma(x) - gamma(&y)).abs();
            *sup = sup.max(dg / s);
            *m = m.max(dg / (s + 1.0));
        };
        for i in 0..grid {
            let t = -extent + 2.0 * extent * i as f64 / (grid - 1) as f64;
            let mut x = vec![0.0; hd];
            x[0] = t;
            for u in &axis_dirs {
                pair(&x, u, &mut sup, &mut m_est);
                // Pairs centred on the anchor catch symmetric extrema.
                let c = sphere::axpy(&x, -0.5 * s, u);
                pair(&c, u, &mut sup, &mut m_est);
            }
        }
        for _ in 0..random_pairs {
            let x: Vec<f64> = (0..hd).map(|_| rng.gen_range(-extent..=extent)).collect();
            let u = sphere::random_unit(&mut rng, hd);
            pair(&x, &u, &mut sup, &mut m_est);
        }
        scales.push(VgmScale { separation: s, sup_ratio: sup });
    }
    let decaying = match (scales.first(), scales.last()) {
        (Some(a), Some(b)) if scales.len() >= 2 => b.sup_ratio <= 0.5 * a.sup_ratio,
        _ => false,
    };
    VgmReport { scales, decaying, m_estimate: m_est }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_and_linear_height_functions() {
        let sin = |x: &[f64]| x[0].sin();
        let r = vgm_check(&sin, 1, &[1.0, 10.0, 100.0], 1000.0, 2000, 1);
        assert!(r.decaying);
        assert!(r.scales[0].sup_ratio <= 2.0 && r.scales[1].sup_ratio <= 0.2 && r.scales[2].sup_ratio <= 0.02);
        let lin = |x: &[f64]| 0.5 * x[0];
        let r = vgm_check(&lin, 1, &[1.0, 10.0, 100.0], 1000.0, 100, 1);
        assert!(!r.decaying);
        for s in &r.scales {
            assert!((s.sup_ratio - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn square_root_decays_like_inverse_root() {
        let g = |x: &[f64]| x[0].abs().sqrt();
        let r = vgm_check(&g, 1, &[1.0, 10.0, 100.0], 1000.0, 0, 1);
        for s in &r.scales {
            let bound = s.separation.powf(-0.5);
            assert!(s.sup_ratio <= bound + 1e-12 && s.sup_ratio >= 0.99 * bound, "{s:?}");
        }
    }
}
