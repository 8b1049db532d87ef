//! Boolean masks on lattices, used as the raster set kind.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::edt::{nearest_features, NO_FEATURE};
use crate::lattice::{Lattice, LatticeError, Window};

/// One bit per cell. As a set, a mask is the union of its filled closed cells.
#[derive(Clone)]
pub struct GridMask {
    lattice: Lattice,
    bits: Vec<bool>,
    features: OnceLock<Arc<FeatureMap>>,
}

struct FeatureMap {
    owner: Vec<usize>,
    count: usize,
}

impl GridMask {
    pub fn new(lattice: Lattice, bits: Vec<bool>) -> Result<Self, LatticeError> {
        if bits.len() != lattice.len() {
            return Err(LatticeError::Length { expected: lattice.len(), got: bits.len() });
        }
        Ok(Self { lattice, bits, features: OnceLock::new() })
    }

    pub fn from_fn(lattice: Lattice, mut f: impl FnMut(&[f64]) -> bool) -> Self {
        let bits = (0..lattice.len()).map(|i| f(&lattice.center(i))).collect();
        Self { lattice, bits, features: OnceLock::new() }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty_set(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Packs bits LSB-first in row-major order, padded to whole bytes.
    pub fn packed(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }

    pub fn from_packed(lattice: Lattice, bytes: &[u8]) -> Result<Self, LatticeError> {
        let n = lattice.len();
        if bytes.len() != n.div_ceil(8) {
            return Err(LatticeError::Length { expected: n.div_ceil(8), got: bytes.len() });
        }
        let bits = (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
        Self::new(lattice, bits)
    }

    /// Closed box of cell `idx`.
    pub fn cell_box(&self, idx: usize) -> Window {
        let c = self.lattice.center(idx);
        let h = self.lattice.spacing();
        Window {
            lo: c.iter().zip(h).map(|(v, h)| v - 0.5 * h).collect(),
            hi: c.iter().zip(h).map(|(v, h)| v + 0.5 * h).collect(),
        }
    }

    fn feature_map(&self) -> &FeatureMap {
        self.features.get_or_init(|| {
            let (_, owner) = nearest_features(&self.lattice, &self.bits);
            Arc::new(FeatureMap { owner, count: self.count() })
        })
    }

    /// Nearest filled cell to `x` and the distance to its closed box.
    ///
    /// Candidates are the nearest features of the lattice nodes around `x`
    /// plus the cells in a one-cell neighborhood, so the answer is exact up
    /// to the lattice tolerance `h·√N`.
    pub fn nearest_cell(&self, x: &[f64]) -> Option<(usize, f64)> {
        let fm = self.feature_map();
        if fm.count == 0 {
            return None;
        }
        let l = &self.lattice;
        let dim = l.dim();
        let frac = l.fractional(x);
        let mut base = vec![0usize; dim];
        for a in 0..dim {
            let n = l.dims()[a] as f64;
            base[a] = frac[a].floor().clamp(0.0, n - 1.0) as usize;
        }
        let mut best: Option<(usize, f64)> = None;
        let consider = |cell: usize, best: &mut Option<(usize, f64)>| {
            if cell == NO_FEATURE || !self.bits[cell] {
                return;
            }
            let d = self.cell_box(cell).distance(x);
            if best.map_or(true, |(_, b)| d < b) {
                *best = Some((cell, d));
            }
        };
        let mut ix = vec![0usize; dim];
        let span = 3usize.pow(dim as u32);
        for code in 0..span {
            let mut c = code;
            let mut ok = true;
            for a in 0..dim {
                let off = (c % 3) as isize - 1;
                c /= 3;
                let i = base[a] as isize + off;
                if i < 0 || i >= l.dims()[a] as isize {
                    ok = false;
                    break;
                }
                ix[a] = i as usize;
            }
            if !ok {
                continue;
            }
            let node = l.ravel(&ix);
            consider(node, &mut best);
            consider(fm.owner[node], &mut best);
        }
        best
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if let Some(ix) = self.lattice.cell_of(x) {
            if self.bits[self.lattice.ravel(&ix)] {
                return true;
            }
        }
        matches!(self.nearest_cell(x), Some((_, d)) if d == 0.0)
    }
}

impl PartialEq for GridMask {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice && self.bits == other.bits
    }
}

impl std::fmt::Debug for GridMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridMask")
            .field("dims", &self.lattice.dims())
            .field("spacing", &self.lattice.spacing())
            .field("filled", &self.count())
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct MaskRepr {
    dims: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
    /// Hex of the packed bit payload.
    bits: String,
}

impl Serialize for GridMask {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MaskRepr {
            dims: self.lattice.dims().to_vec(),
            spacing: self.lattice.spacing().to_vec(),
            origin: self.lattice.origin(),
            bits: hex::encode(self.packed()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridMask {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = MaskRepr::deserialize(d)?;
        let lattice = Lattice::from_origin(r.dims, r.spacing, r.origin).map_err(D::Error::custom)?;
        let bytes = hex::decode(&r.bits).map_err(D::Error::custom)?;
        GridMask::from_packed(lattice, &bytes).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> GridMask {
        let l = Lattice::from_bounds(&[-2.0, -2.0], &[12.0, 12.0], 0.1).unwrap();
        GridMask::from_fn(l, |x| x.iter().all(|&v| (0.0..=10.0).contains(&v)))
    }

    #[test]
    fn pack_roundtrip() {
        let m = square();
        let back = GridMask::from_packed(m.lattice().clone(), &m.packed()).unwrap();
        assert_eq!(back, m);
        let json = serde_json::to_string(&m).unwrap();
        let back: GridMask = serde_json::from_str(&json).unwrap();
        assert_eq!(back.bits(), m.bits());
    }

    #[test]
    fn distance_to_union_of_cells() {
        let m = square();
        assert_eq!(m.nearest_cell(&[5.0, 5.0]).unwrap().1, 0.0);
        let (_, d) = m.nearest_cell(&[11.5, 5.0]).unwrap();
        assert!((d - 1.5).abs() < 1e-9, "{d}");
        let (_, d) = m.nearest_cell(&[40.0, 5.0]).unwrap();
        assert!((d - 30.0).abs() < 1e-9, "{d}");
        assert!(m.contains(&[0.0, 0.0]));
        assert!(!m.contains(&[-0.01, 3.0]));
    }
}
