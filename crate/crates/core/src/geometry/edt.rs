//! Exact squared Euclidean distance transform on cell-centered lattices.
//!
//! Separable lower envelope of parabolas, one pass per axis, linear in the
//! number of cells. Anisotropic spacing is handled by weighting each axis.

use crate::lattice::Lattice;
use crate::scalar::Real;

/// Sentinel for "no feature reachable" in [`nearest_features`].
pub const NO_FEATURE: usize = usize::MAX;

/// Squared distance from every cell center to the nearest feature cell center.
/// Cells are `+inf` when there is no feature at all.
pub fn squared_edt<T: Real>(lattice: &Lattice, features: &[bool]) -> Vec<T> {
    transform::<T>(lattice, features).0
}

/// Squared distances together with the linear index of a nearest feature.
pub fn nearest_features(lattice: &Lattice, features: &[bool]) -> (Vec<f64>, Vec<usize>) {
    transform::<f64>(lattice, features)
}

/// O(n²) reference transform. Kept for tests and tiny grids.
pub fn squared_edt_brute(lattice: &Lattice, features: &[bool]) -> Vec<f64> {
    let n = lattice.len();
    let dim = lattice.dim();
    let h = lattice.spacing();
    let mut a = vec![0; dim];
    let mut b = vec![0; dim];
    let feats: Vec<usize> = (0..n).filter(|&i| features[i]).collect();
    (0..n)
        .map(|i| {
            lattice.unravel(i, &mut a);
            feats
                .iter()
                .map(|&j| {
                    lattice.unravel(j, &mut b);
                    (0..dim)
                        .map(|k| {
                            let d = (a[k] as f64 - b[k] as f64) * h[k];
                            d * d
                        })
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn transform<T: Real>(lattice: &Lattice, features: &[bool]) -> (Vec<T>, Vec<usize>) {
    assert_eq!(features.len(), lattice.len(), "feature mask does not match lattice");
    let inf = T::infinity();
    let mut dist: Vec<T> = features.iter().map(|&f| if f { T::zero() } else { inf }).collect();
    let mut owner: Vec<usize> = (0..features.len()).map(|i| if features[i] { i } else { NO_FEATURE }).collect();

    let dims = lattice.dims();
    let strides = lattice.strides();
    let max_len = *dims.iter().max().unwrap();
    let mut line_f = vec![T::zero(); max_len];
    let mut line_o = vec![0usize; max_len];
    let mut out_f = vec![T::zero(); max_len];
    let mut out_o = vec![0usize; max_len];
    let mut v = vec![0usize; max_len];
    let mut z = vec![T::zero(); max_len + 1];

    for axis in 0..lattice.dim() {
        let n = dims[axis];
        let stride = strides[axis];
        let w = T::lit(lattice.spacing()[axis] * lattice.spacing()[axis]);
        let lines = lattice.len() / n;
        for line in 0..lines {
            // Base index of this line: enumerate all index tuples with axis fixed at 0.
            let outer = line / stride;
            let inner = line % stride;
            let base = outer * stride * n + inner;
            for i in 0..n {
                line_f[i] = dist[base + i * stride];
                line_o[i] = owner[base + i * stride];
            }
            envelope(&line_f[..n], &line_o[..n], w, &mut out_f, &mut out_o, &mut v, &mut z);
            for i in 0..n {
                dist[base + i * stride] = out_f[i];
                owner[base + i * stride] = out_o[i];
            }
        }
    }
    (dist, owner)
}

/// One-dimensional lower envelope of `f(p) + w (q - p)^2`.
fn envelope<T: Real>(
    f: &[T],
    owner: &[usize],
    w: T,
    out_f: &mut [T],
    out_o: &mut [usize],
    v: &mut [usize],
    z: &mut [T],
) {
    let n = f.len();
    let inf = T::infinity();
    let mut k: isize = -1;
    for q in 0..n {
        if f[q] == inf {
            continue;
        }
        let qf = T::lit(q as f64);
        loop {
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = -inf;
                z[1] = inf;
                break;
            }
            let p = v[k as usize];
            let pf = T::lit(p as f64);
            let s = ((f[q] + w * qf * qf) - (f[p] + w * pf * pf)) / (T::lit(2.0) * w * (qf - pf));
            if s <= z[k as usize] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k as usize] = q;
            z[k as usize] = s;
            z[k as usize + 1] = inf;
            break;
        }
    }
    if k < 0 {
        for q in 0..n {
            out_f[q] = inf;
            out_o[q] = NO_FEATURE;
        }
        return;
    }
    let mut j = 0usize;
    for q in 0..n {
        let qf = T::lit(q as f64);
        while z[j + 1] < qf {
            j += 1;
        }
        let p = v[j];
        let d = qf - T::lit(p as f64);
        out_f[q] = f[p] + w * d * d;
        out_o[q] = owner[p];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_feature_line() {
        let l = Lattice::new(vec![5], vec![0.5], vec![0.0]).unwrap();
        let d: Vec<f64> = squared_edt(&l, &[false, false, true, false, false]);
        assert_eq!(d, vec![1.0, 0.25, 0.0, 0.25, 1.0]);
    }

    #[test]
    fn no_features_is_infinite() {
        let l = Lattice::new(vec![3, 3], vec![1.0; 2], vec![0.0; 2]).unwrap();
        let (d, o) = nearest_features(&l, &[false; 9]);
        assert!(d.iter().all(|v| v.is_infinite()));
        assert!(o.iter().all(|&v| v == NO_FEATURE));
    }

    #[test]
    fn owners_realise_distances() {
        let l = Lattice::new(vec![7, 9], vec![1.0, 0.7], vec![0.0; 2]).unwrap();
        let mut feat = vec![false; l.len()];
        for i in [3, 17, 40, 61] {
            feat[i] = true;
        }
        let (d, o) = nearest_features(&l, &feat);
        for i in 0..l.len() {
            let r = crate::sphere::dist(&l.center(i), &l.center(o[i]));
            assert!((r * r - d[i]).abs() < 1e-9);
        }
    }
}
