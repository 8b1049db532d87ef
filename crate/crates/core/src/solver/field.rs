use serde::{Deserialize, Serialize};

use crate::lattice::{Lattice, LatticeError};
use crate::scalar::Real;

/// Time-stamped scalar field on a lattice, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField<T> {
    lattice: Lattice,
    time: f64,
    values: Vec<T>,
}

impl<T: Real> GridField<T> {
    pub fn new(lattice: Lattice, time: f64, values: Vec<T>) -> Result<Self, LatticeError> {
        if values.len() != lattice.len() {
            return Err(LatticeError::Length { expected: lattice.len(), got: values.len() });
        }
        Ok(Self { lattice, time, values })
    }

    pub fn constant(lattice: Lattice, value: T) -> Self {
        let n = lattice.len();
        Self { lattice, time: 0.0, values: vec![value; n] }
    }

    pub fn from_fn(lattice: Lattice, time: f64, mut f: impl FnMut(&[f64]) -> T) -> Self {
        let values = (0..lattice.len()).map(|i| f(&lattice.center(i))).collect();
        Self { lattice, time, values }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub(crate) fn values_vec_mut(&mut self) -> &mut Vec<T> {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, ix: &[usize]) -> T {
        self.values[self.lattice.ravel(ix)]
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Riemann sum of the field over the lattice.
    pub fn integral(&self) -> f64 {
        let vol: f64 = self.lattice.spacing().iter().product();
        self.values.iter().map(|v| v.as_f64()).sum::<f64>() * vol
    }

    pub fn to_f64(&self) -> GridField<f64> {
        GridField { lattice: self.lattice.clone(), time: self.time, values: self.values.iter().map(|v| v.as_f64()).collect() }
    }

    /// Multilinear interpolation between cell centers; `None` outside the
    /// hull of the centers.
    pub fn sample(&self, x: &[f64]) -> Option<f64> {
        let l = &self.lattice;
        let dim = l.dim();
        let frac = l.fractional(x);
        let mut base = [0usize; 3];
        let mut w = [0.0f64; 3];
        for a in 0..dim {
            let n = l.dims()[a];
            let f = frac[a];
            if !(f >= -1e-9 && f <= (n - 1) as f64 + 1e-9) {
                return None;
            }
            let f = f.clamp(0.0, (n - 1) as f64);
            let i = (f.floor() as usize).min(n.saturating_sub(2));
            base[a] = i;
            w[a] = if n == 1 { 0.0 } else { f - i as f64 };
        }
        let strides = l.strides();
        let mut acc = 0.0;
        for corner in 0..(1usize << dim) {
            let mut idx = 0;
            let mut weight = 1.0;
            for a in 0..dim {
                let up = corner >> a & 1 == 1;
                if up && l.dims()[a] == 1 {
                    weight = 0.0;
                    break;
                }
                idx += (base[a] + up as usize) * strides[a];
                weight *= if up { w[a] } else { 1.0 - w[a] };
            }
            if weight != 0.0 {
                acc += weight * self.values[idx].as_f64();
            }
        }
        Some(acc)
    }

    /// Reflection `i ↦ n−1−i` along `axis`.
    pub fn mirrored(&self, axis: usize) -> Self {
        let l = &self.lattice;
        let mut ix = vec![0; l.dim()];
        let n = l.dims()[axis];
        let mut values = vec![T::zero(); self.values.len()];
        for (i, v) in values.iter_mut().enumerate() {
            l.unravel(i, &mut ix);
            ix[axis] = n - 1 - ix[axis];
            *v = self.values[l.ravel(&ix)];
        }
        Self { lattice: self.lattice.clone(), time: self.time, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_exact_on_linear_fields() {
        let l = Lattice::from_bounds(&[0.0, 0.0], &[4.0, 3.0], 0.5).unwrap();
        let f = GridField::from_fn(l, 0.0, |x| 2.0 * x[0] - x[1] + 0.25);
        let v = f.sample(&[1.3, 2.1]).unwrap();
        assert!((v - (2.6 - 2.1 + 0.25)).abs() < 1e-12);
        assert!(f.sample(&[0.1, 1.0]).is_none());
    }

    #[test]
    fn mirror_is_an_involution() {
        let l = Lattice::from_bounds(&[0.0, 0.0], &[2.0, 3.0], 0.5).unwrap();
        let f = GridField::from_fn(l, 1.0, |x| x[0] * 10.0 + x[1]);
        assert_eq!(f.mirrored(1).mirrored(1), f);
        assert_ne!(f.mirrored(0), f);
    }
}
