//! Distance to a subgraph `{x_N ≤ γ(x')}` by bounded local minimization.
//!
//! For `x` above the graph, `B = x_N − γ(x')` bounds the distance, so every
//! minimizer has horizontal coordinate within `B` of `x'`. The squared distance
//! to the closed vertical ray over `y'` is `|x'−y'|² + max(0, x_N − γ(y'))²`;
//! it is sampled densely on that disc and the best local minima are refined.

use super::Gamma;

const REFINED: usize = 6;

/// Candidate nearest points sorted by distance; the first one is the best found.
pub(super) fn minimizers(gamma: &Gamma, dim: usize, x: &[f64]) -> Vec<(f64, Vec<f64>)> {
    let xn = x[dim - 1];
    let xp = &x[..dim - 1];
    let bound = xn - gamma.eval(xp);
    if bound <= 0.0 {
        return vec![(0.0, x.to_vec())];
    }
    let sq = |y: &[f64]| -> f64 {
        let dh: f64 = xp.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        let dv = (xn - gamma.eval(y)).max(0.0);
        dh + dv * dv
    };
    let point = |y: &[f64]| -> (f64, Vec<f64>) {
        let mut p = y.to_vec();
        p.push(xn.min(gamma.eval(y)));
        (sq(y).sqrt(), p)
    };
    let mut out = match dim {
        1 => vec![point(&[])],
        2 => line_search(&sq, xp[0], bound).into_iter().map(|y| point(&[y])).collect(),
        _ => plane_search(&sq, xp, bound).into_iter().map(|y| point(&y)).collect::<Vec<_>>(),
    };
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn line_search(sq: &impl Fn(&[f64]) -> f64, x0: f64, bound: f64) -> Vec<f64> {
    let step = (bound / 4000.0).clamp(1e-3, 0.05);
    let n = ((2.0 * bound / step).ceil() as usize).max(16);
    let h = 2.0 * bound / n as f64;
    let ys: Vec<f64> = (0..=n).map(|i| x0 - bound + i as f64 * h).collect();
    let g: Vec<f64> = ys.iter().map(|&y| sq(&[y])).collect();
    let mut minima: Vec<usize> = (0..=n)
        .filter(|&i| (i == 0 || g[i] <= g[i - 1]) && (i == n || g[i] <= g[i + 1]))
        .collect();
    minima.sort_by(|&a, &b| g[a].total_cmp(&g[b]));
    minima.truncate(REFINED);
    minima
        .into_iter()
        .map(|i| {
            let lo = ys[i.saturating_sub(1)];
            let hi = ys[(i + 1).min(n)];
            golden(|y| sq(&[y]), lo, hi, ys[i])
        })
        .collect()
}

/// Golden-section refinement on `[lo, hi]`, never worse than `start`.
fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, start: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if hi - lo <= 1e-13 * (1.0 + lo.abs()) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    let m = 0.5 * (lo + hi);
    if f(m) <= f(start) {
        m
    } else {
        start
    }
}

fn plane_search(sq: &impl Fn(&[f64]) -> f64, x0: &[f64], bound: f64) -> Vec<Vec<f64>> {
    let n = 160usize;
    let h = 2.0 * bound / n as f64;
    let mut g = vec![f64::INFINITY; (n + 1) * (n + 1)];
    let at = |i: usize, j: usize| vec![x0[0] - bound + i as f64 * h, x0[1] - bound + j as f64 * h];
    for i in 0..=n {
        for j in 0..=n {
            let y = at(i, j);
            let r2 = (y[0] - x0[0]).powi(2) + (y[1] - x0[1]).powi(2);
            if r2 <= bound * bound * (1.0 + 1e-9) {
                g[i * (n + 1) + j] = sq(&y);
            }
        }
    }
    let mut minima = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let v = g[i * (n + 1) + j];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a >= 0 && b >= 0 && a <= n as i64 && b <= n as i64 && g[a as usize * (n + 1) + b as usize] < v {
                    is_min = false;
                }
            }
            if is_min {
                minima.push((v, i, j));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.truncate(REFINED);
    minima
        .into_iter()
        .map(|(_, i, j)| {
            // Compass search from the grid minimum.
            let mut y = at(i, j);
            let mut fy = sq(&y);
            let mut s = h;
            while s > 1e-12 * (1.0 + bound) {
                let mut moved = false;
                for (a, sign) in [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)] {
                    let mut t = y.clone();
                    t[a] += sign * s;
                    let ft = sq(&t);
                    if ft < fy {
                        y = t;
                        fy = ft;
                        moved = true;
                    }
                }
                if !moved {
                    s *= 0.5;
                }
            }
            y
        })
        .collect()
}
