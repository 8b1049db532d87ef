//! Exact Euclidean projection onto `{x : nᵢ·x ≤ bᵢ}`.

use nalgebra::{DMatrix, DVector};

use super::Face;
use crate::sphere;

/// Projects `x` onto the polytope by enumerating candidate active sets of at
/// most `N` faces. The projection lies on the affine hull of its active faces,
/// so the nearest feasible candidate is the projection.
pub(super) fn nearest(faces: &[Face], x: &[f64]) -> Option<(f64, Vec<f64>)> {
    if faces.iter().all(|f| f.signed(x) <= 0.0) {
        return Some((0.0, x.to_vec()));
    }
    let dim = x.len();
    let m = faces.len();
    let scale = 1.0 + sphere::norm(x) + faces.iter().map(|f| f.offset.abs()).fold(0.0, f64::max);
    let feas_tol = 1e-10 * scale;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset = Vec::with_capacity(dim);
    for k in 1..=dim.min(m) {
        subsets(m, k, 0, &mut subset, &mut |s| {
            if let Some(y) = affine_projection(faces, s, x) {
                if faces.iter().all(|f| f.signed(&y) <= feas_tol) {
                    let d = sphere::dist(x, &y);
                    if best.as_ref().map_or(true, |(b, _)| d < *b) {
                        best = Some((d, y));
                    }
                }
            }
        });
    }
    best
}

fn subsets(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..m {
        cur.push(i);
        subsets(m, k, i + 1, cur, f);
        cur.pop();
    }
}

fn affine_projection(faces: &[Face], s: &[usize], x: &[f64]) -> Option<Vec<f64>> {
    let k = s.len();
    let g = DMatrix::from_fn(k, k, |i, j| sphere::dot(&faces[s[i]].normal, &faces[s[j]].normal));
    let r = DVector::from_fn(k, |i, _| faces[s[i]].signed(x));
    if g.determinant().abs() < 1e-12 {
        return None;
    }
    let lambda = g.lu().solve(&r)?;
    let mut y = x.to_vec();
    for (i, &fi) in s.iter().enumerate() {
        for (a, n) in faces[fi].normal.iter().enumerate() {
            y[a] -= lambda[i] * n;
        }
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::super::SetDescriptor;

    #[test]
    fn square_corner_and_edge() {
        let sq = SetDescriptor::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let (d, p) = sq.nearest(&[4.0, 5.0]).unwrap();
        assert!((d - 25f64.sqrt()).abs() < 1e-12);
        assert_eq!(p, vec![1.0, 1.0]);
        let (d, p) = sq.nearest(&[0.3, 3.0]).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
        assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
        assert_eq!(sq.nearest(&[0.5, 0.5]).unwrap().0, 0.0);
    }

    #[test]
    fn infeasible_polytope_is_empty() {
        let faces = vec![
            super::Face::new(vec![1.0, 0.0], -1.0).unwrap(),
            super::Face::new(vec![-1.0, 0.0], -1.0).unwrap(),
        ];
        let p = SetDescriptor::polytope(faces).unwrap();
        assert!(p.is_empty());
    }
}
