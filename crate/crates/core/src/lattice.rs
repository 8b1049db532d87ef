//! Cell-centered rectangular lattices and axis-aligned windows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("lattice dimension must be 1..=3, got {0}")]
    Dimension(usize),
    #[error("axis {axis}: {reason}")]
    Axis { axis: usize, reason: String },
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
}

/// Cell-centered lattice. Cell `i` along axis `a` covers
/// `[lower[a] + i h, lower[a] + (i + 1) h]` and is sampled at its center.
///
/// Values are stored row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    dims: Vec<usize>,
    spacing: Vec<f64>,
    lower: Vec<f64>,
}

impl Lattice {
    pub fn new(dims: Vec<usize>, spacing: Vec<f64>, lower: Vec<f64>) -> Result<Self, LatticeError> {
        let n = dims.len();
        if !(1..=3).contains(&n) {
            return Err(LatticeError::Dimension(n));
        }
        if spacing.len() != n {
            return Err(LatticeError::Length { expected: n, got: spacing.len() });
        }
        if lower.len() != n {
            return Err(LatticeError::Length { expected: n, got: lower.len() });
        }
        for a in 0..n {
            if dims[a] == 0 {
                return Err(LatticeError::Axis { axis: a, reason: "extent must be >= 1".into() });
            }
            if !(spacing[a] > 0.0) || !spacing[a].is_finite() {
                return Err(LatticeError::Axis { axis: a, reason: format!("spacing must be > 0, got {}", spacing[a]) });
            }
            if !lower[a].is_finite() {
                return Err(LatticeError::Axis { axis: a, reason: "non-finite bound".into() });
            }
        }
        Ok(Self { dims, spacing, lower })
    }

    /// Lattice covering `[lo, hi]` with cubic cells of side `h`.
    pub fn from_bounds(lo: &[f64], hi: &[f64], h: f64) -> Result<Self, LatticeError> {
        if lo.len() != hi.len() {
            return Err(LatticeError::Length { expected: lo.len(), got: hi.len() });
        }
        let dims = lo
            .iter()
            .zip(hi)
            .enumerate()
            .map(|(a, (l, u))| {
                let n = ((u - l) / h).round();
                if n >= 1.0 {
                    Ok(n as usize)
                } else {
                    Err(LatticeError::Axis { axis: a, reason: format!("empty extent [{l}, {u}]") })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(dims, vec![h; lo.len()], lo.to_vec())
    }

    /// Builds from the center of cell zero (the on-disk convention).
    pub fn from_origin(dims: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self, LatticeError> {
        let lower = origin.iter().zip(&spacing).map(|(o, h)| o - 0.5 * h).collect();
        Self::new(dims, spacing, lower)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.lower[axis] + self.dims[axis] as f64 * self.spacing[axis]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Center of cell zero.
    pub fn origin(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.coord(a, 0)).collect()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self) -> Window {
        Window {
            lo: self.lower.clone(),
            hi: (0..self.dim()).map(|a| self.upper(a)).collect(),
        }
    }

    /// Center coordinate of index `i` on `axis`.
    ///
    /// The lower half is measured from the lower face and the upper half from
    /// the upper face, so a lattice symmetric about a plane has bitwise mirrored
    /// centers.
    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let n = self.dims[axis];
        let h = self.spacing[axis];
        if 2 * i + 1 <= n {
            self.lower[axis] + (i as f64 + 0.5) * h
        } else {
            self.upper(axis) - ((n - i) as f64 - 0.5) * h
        }
    }

    pub fn strides(&self) -> Vec<usize> {
        let n = self.dim();
        let mut s = vec![1; n];
        for a in (0..n.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.dims[a + 1];
        }
        s
    }

    pub fn unravel(&self, mut idx: usize, out: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            out[a] = idx % self.dims[a];
            idx /= self.dims[a];
        }
    }

    pub fn ravel(&self, ix: &[usize]) -> usize {
        ix.iter().zip(&self.dims).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn center(&self, idx: usize) -> Vec<f64> {
        let mut ix = vec![0; self.dim()];
        self.unravel(idx, &mut ix);
        ix.iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    pub fn center_of(&self, ix: &[usize]) -> Vec<f64> {
        ix.iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    /// Fractional index of `x` (cell centers sit at integers).
    pub fn fractional(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|a| (x[a] - self.lower[a]) / self.spacing[a] - 0.5)
            .collect()
    }

    /// Index of the cell containing `x`, if inside the lattice.
    pub fn cell_of(&self, x: &[f64]) -> Option<Vec<usize>> {
        (0..self.dim())
            .map(|a| {
                let f = ((x[a] - self.lower[a]) / self.spacing[a]).floor();
                (f >= 0.0 && (f as usize) < self.dims[a]).then_some(f as usize)
            })
            .collect()
    }

    /// Index range `[lo, hi]` (inclusive) of cell centers inside `w` on each axis.
    pub fn index_range(&self, w: &Window) -> Option<Vec<(usize, usize)>> {
        (0..self.dim())
            .map(|a| {
                let h = self.spacing[a];
                let lo = ((w.lo[a] - self.lower[a]) / h - 0.5).ceil().max(0.0);
                let hi = ((w.hi[a] - self.lower[a]) / h - 0.5).floor().min(self.dims[a] as f64 - 1.0);
                (lo <= hi).then_some((lo as usize, hi as usize))
            })
            .collect()
    }

    pub fn same_shape(&self, other: &Lattice) -> bool {
        self.dims == other.dims
            && self.spacing.iter().zip(&other.spacing).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs())
            && self.lower.iter().zip(&other.lower).all(|(a, b)| (a - b).abs() <= 1e-9)
    }
}

/// Axis-aligned closed box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    /// Cube of half-width `r` around `c`.
    pub fn around(c: &[f64], r: f64) -> Self {
        Self { lo: c.iter().map(|v| v - r).collect(), hi: c.iter().map(|v| v + r).collect() }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    /// Distance from `x` to the box (zero inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| {
                let d = (l - v).max(v - h).max(0.0);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_centers_are_bitwise_mirrored() {
        let l = Lattice::from_bounds(&[-5.0, -5.0], &[5.0, 5.0], 0.1).unwrap();
        assert_eq!(l.dims(), &[100, 100]);
        for i in 0..100 {
            assert_eq!(l.coord(0, i), -l.coord(0, 99 - i));
        }
        assert!((l.coord(0, 0) + 4.95).abs() < 1e-12);
    }

    #[test]
    fn ravel_roundtrip_and_strides() {
        let l = Lattice::new(vec![3, 4, 5], vec![1.0; 3], vec![0.0; 3]).unwrap();
        assert_eq!(l.strides(), vec![20, 5, 1]);
        let mut ix = [0; 3];
        for idx in 0..l.len() {
            l.unravel(idx, &mut ix);
            assert_eq!(l.ravel(&ix), idx);
        }
    }

    #[test]
    fn rejects_bad_lattices() {
        assert!(Lattice::new(vec![0], vec![1.0], vec![0.0]).is_err());
        assert!(Lattice::new(vec![2], vec![-1.0], vec![0.0]).is_err());
        assert!(Lattice::new(vec![2, 2, 2, 2], vec![1.0; 4], vec![0.0; 4]).is_err());
    }

    #[test]
    fn index_range_and_cells() {
        let l = Lattice::from_bounds(&[0.0], &[10.0], 1.0).unwrap();
        assert_eq!(l.index_range(&Window::new(vec![2.0], vec![4.6])), Some(vec![(2, 4)]));
        assert_eq!(l.cell_of(&[9.99]), Some(vec![9]));
        assert_eq!(l.cell_of(&[10.01]), None);
        let o = Lattice::from_origin(vec![10], vec![1.0], vec![0.5]).unwrap();
        assert!(o.same_shape(&l));
    }
}
