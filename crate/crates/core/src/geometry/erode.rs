//! Erosion `U_δ = {x ∈ U : dist(x, ∂U) ≥ δ}`.

use super::edt::squared_edt;
use super::{Face, GeometryError, GridMask, SetDescriptor};
use crate::lattice::Lattice;

pub(super) fn erode(u: &SetDescriptor, delta: f64, window: Option<&Lattice>) -> Result<SetDescriptor, GeometryError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(GeometryError::Invalid(format!("erosion depth must be > 0, got {delta}")));
    }
    let dim = u.dim();
    Ok(match u {
        SetDescriptor::Empty { .. } => u.clone(),
        SetDescriptor::HalfSpace { normal, offset, .. } => {
            SetDescriptor::HalfSpace { dim, normal: normal.clone(), offset: offset - delta }
        }
        SetDescriptor::Ball { center, radius, .. } => {
            if *radius < delta {
                SetDescriptor::Empty { dim }
            } else {
                SetDescriptor::Ball { dim, center: center.clone(), radius: radius - delta }
            }
        }
        SetDescriptor::Polytope { faces, .. } => {
            let faces: Vec<Face> = faces.iter().map(|f| Face { normal: f.normal.clone(), offset: f.offset - delta }).collect();
            let p = SetDescriptor::Polytope { dim, faces };
            if p.is_empty() {
                SetDescriptor::Empty { dim }
            } else {
                p
            }
        }
        SetDescriptor::Raster { mask, .. } => SetDescriptor::raster(erode_mask(mask, delta)),
        SetDescriptor::VShape { .. } | SetDescriptor::Subgraph { .. } | SetDescriptor::Union { .. } => {
            let lattice = window.ok_or(GeometryError::NeedsWindow("erosion of this set kind"))?;
            SetDescriptor::raster(erode_mask(&u.rasterize(lattice), delta))
        }
    })
}

/// Keeps filled cells whose center is at least `δ` from the union of empty
/// cells' boundaries. Cells beyond the lattice are treated as unconstrained.
pub(super) fn erode_mask(mask: &GridMask, delta: f64) -> GridMask {
    let l = mask.lattice();
    let complement: Vec<bool> = mask.bits().iter().map(|b| !b).collect();
    let d2: Vec<f64> = squared_edt(l, &complement);
    let half = 0.5 * l.min_spacing();
    let bits = mask
        .bits()
        .iter()
        .zip(&d2)
        .map(|(&b, &d)| b && d.sqrt() - half >= delta - 1e-9)
        .collect();
    GridMask::new(l.clone(), bits).expect("same lattice")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let b = SetDescriptor::ball(vec![0.0, 0.0], 3.0);
        assert_eq!(b.erode(1.0, None).unwrap(), SetDescriptor::ball(vec![0.0, 0.0], 2.0));
        assert_eq!(b.erode(4.0, None).unwrap(), SetDescriptor::Empty { dim: 2 });
        let h = SetDescriptor::lower_half_space(2);
        assert_eq!(h.erode(2.0, None).unwrap(), SetDescriptor::HalfSpace { dim: 2, normal: vec![0.0, 1.0], offset: -2.0 });
        let v = SetDescriptor::v_shape(2, 1.0);
        assert!(matches!(v.erode(1.0, None), Err(GeometryError::NeedsWindow(_))));
    }

    #[test]
    fn raster_square_erodes_to_inner_square() {
        let l = Lattice::from_bounds(&[-1.0, -1.0], &[11.0, 11.0], 0.1).unwrap();
        let sq = SetDescriptor::cuboid(&[0.0, 0.0], &[10.0, 10.0]).unwrap();
        let m = sq.rasterize(&l);
        let e = erode_mask(&m, 1.0);
        for i in 0..l.len() {
            let c = l.center(i);
            let inner = c.iter().all(|&v| (1.0..=9.0).contains(&v));
            assert_eq!(e.bits()[i], inner, "{c:?}");
        }
    }
}
