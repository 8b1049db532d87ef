//! Direction sets on the unit sphere and small vector helpers.

use rand::Rng;

/// Deterministic, roughly uniform unit vectors: `{±1}` in 1D, equally spaced
/// angles in 2D, a Fibonacci lattice in 3D.
pub fn spread_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => fibonacci_sphere(count),
    }
}

pub fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let a = golden * k as f64;
            vec![r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

/// Uniformly distributed unit vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    match dim {
        1 => vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }],
        2 => {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            vec![a.cos(), a.sin()]
        }
        _ => {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).max(0.0).sqrt();
            vec![r * a.cos(), r * a.sin(), z]
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn axpy(a: &[f64], s: f64, d: &[f64]) -> Vec<f64> {
    a.iter().zip(d).map(|(x, y)| x + s * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Unit vector along `a`, or `None` for a (near) zero vector.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| a.iter().map(|v| v / n).collect())
}

/// Angle between two unit vectors in radians.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_points_are_unit_and_spread() {
        let pts = fibonacci_sphere(200);
        for p in &pts {
            assert!((norm(p) - 1.0).abs() < 1e-12);
        }
        let mean_z: f64 = pts.iter().map(|p| p[2]).sum::<f64>() / 200.0;
        assert!(mean_z.abs() < 1e-12);
    }

    #[test]
    fn planar_directions_are_equally_spaced() {
        let d = spread_directions(2, 8);
        assert!((angle(&d[0], &d[1]) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }
}
