//! Set descriptors for the initial support and the geometric functionals
//! built on them: distance, projections, erosion, Hausdorff distance, the
//! opening function and direction-set predictions.

mod direction;
pub mod edt;
mod erode;
mod gamma;
mod hausdorff;
mod mask;
mod opening;
mod polytope;
mod subgraph;
mod vgm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use direction::{predict_e, DirectionSetEstimate, DirectionCluster};
pub use gamma::{Gamma, GammaTerm};
pub use hausdorff::{hausdorff, HausdorffReport};
pub use mask::GridMask;
pub use opening::{opening, opening_profile, OpeningConfig, OpeningEstimate, OpeningProfile, ProfileEntry};
pub use vgm::{vgm_check, VgmReport, VgmScale};

use crate::lattice::{Lattice, LatticeError};
use crate::sphere;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid descriptor: {0}")]
    Invalid(String),
    #[error("point {0:?} lies in the closure of the set")]
    Inside(Vec<f64>),
    #[error("{0} needs a raster window")]
    NeedsWindow(&'static str),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Closed half-space `{x : normal·x ≤ offset}` with a unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Face {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self, GeometryError> {
        let n = sphere::norm(&normal);
        if !(n > 0.0) || !n.is_finite() || !offset.is_finite() {
            return Err(GeometryError::Invalid(format!("bad half-space normal {normal:?}")));
        }
        Ok(Self { normal: normal.iter().map(|v| v / n).collect(), offset: offset / n })
    }

    #[inline]
    pub fn signed(&self, x: &[f64]) -> f64 {
        sphere::dot(&self.normal, x) - self.offset
    }
}

/// Description of a set `U ⊂ R^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetDescriptor {
    Empty { dim: usize },
    HalfSpace { dim: usize, normal: Vec<f64>, offset: f64 },
    Ball { dim: usize, center: Vec<f64>, radius: f64 },
    #[serde(rename = "convex-polytope")]
    Polytope { dim: usize, faces: Vec<Face> },
    /// `{x₂ ≤ slope·|x₁|}`, constant in the remaining coordinates.
    VShape { dim: usize, slope: f64 },
    /// `{x_N ≤ γ(x₁, …, x_{N−1})}`.
    Subgraph { dim: usize, gamma: Gamma },
    Union { dim: usize, parts: Vec<SetDescriptor> },
    Raster { dim: usize, mask: GridMask },
}

/// Points of the closure of `U` nearest to a query point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSet {
    pub points: Vec<Vec<f64>>,
    pub distance: f64,
    pub tolerance: f64,
}

impl SetDescriptor {
    pub fn half_space(normal: Vec<f64>, offset: f64) -> Result<Self, GeometryError> {
        let f = Face::new(normal, offset)?;
        Ok(Self::HalfSpace { dim: f.normal.len(), normal: f.normal, offset: f.offset })
    }

    /// `{x_N ≤ 0}` in dimension `dim`.
    pub fn lower_half_space(dim: usize) -> Self {
        let mut n = vec![0.0; dim];
        n[dim - 1] = 1.0;
        Self::HalfSpace { dim, normal: n, offset: 0.0 }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Self::Ball { dim: center.len(), center, radius }
    }

    pub fn polytope(faces: Vec<Face>) -> Result<Self, GeometryError> {
        let dim = faces.first().map(|f| f.normal.len()).ok_or_else(|| GeometryError::Invalid("polytope without faces".into()))?;
        let s = Self::Polytope { dim, faces };
        s.validate()?;
        Ok(s)
    }

    /// Axis-aligned box as a polytope.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self, GeometryError> {
        let n = lo.len();
        let mut faces = Vec::with_capacity(2 * n);
        for a in 0..n {
            let mut e = vec![0.0; n];
            e[a] = 1.0;
            faces.push(Face::new(e.clone(), hi[a])?);
            e[a] = -1.0;
            faces.push(Face::new(e, -lo[a])?);
        }
        Self::polytope(faces)
    }

    pub fn v_shape(dim: usize, slope: f64) -> Self {
        Self::VShape { dim, slope }
    }

    pub fn subgraph(dim: usize, gamma: Gamma) -> Self {
        Self::Subgraph { dim, gamma }
    }

    pub fn union(parts: Vec<SetDescriptor>) -> Result<Self, GeometryError> {
        let dim = parts.first().map(|p| p.dim()).ok_or_else(|| GeometryError::Invalid("empty union".into()))?;
        let s = Self::Union { dim, parts };
        s.validate()?;
        Ok(s)
    }

    pub fn raster(mask: GridMask) -> Self {
        Self::Raster { dim: mask.lattice().dim(), mask }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Empty { dim }
            | Self::HalfSpace { dim, .. }
            | Self::Ball { dim, .. }
            | Self::Polytope { dim, .. }
            | Self::VShape { dim, .. }
            | Self::Subgraph { dim, .. }
            | Self::Union { dim, .. }
            | Self::Raster { dim, .. } => *dim,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Empty { .. } => "empty",
            Self::HalfSpace { .. } => "half-space",
            Self::Ball { .. } => "ball",
            Self::Polytope { .. } => "convex-polytope",
            Self::VShape { .. } => "v-shape",
            Self::Subgraph { .. } => "subgraph",
            Self::Union { .. } => "union",
            Self::Raster { .. } => "raster",
        }
    }

    /// Parses and validates a JSON descriptor, normalizing half-space normals.
    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let s: Self = serde_json::from_str(text).map_err(|e| GeometryError::Parse(e.to_string()))?;
        let s = s.normalized()?;
        s.validate()?;
        Ok(s)
    }

    /// Returns a copy with unit normals on all half-spaces and faces.
    pub fn normalized(self) -> Result<Self, GeometryError> {
        Ok(match self {
            Self::HalfSpace { normal, offset, .. } => Self::half_space(normal, offset)?,
            Self::Polytope { dim, faces } => Self::Polytope {
                dim,
                faces: faces.into_iter().map(|f| Face::new(f.normal, f.offset)).collect::<Result<_, _>>()?,
            },
            Self::Union { dim, parts } => Self::Union {
                dim,
                parts: parts.into_iter().map(|p| p.normalized()).collect::<Result<_, _>>()?,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let dim = self.dim();
        if !(1..=3).contains(&dim) {
            return Err(GeometryError::Invalid(format!("dimension must be 1..=3, got {dim}")));
        }
        let check = |len: usize| {
            if len == dim {
                Ok(())
            } else {
                Err(GeometryError::Dimension { expected: dim, got: len })
            }
        };
        match self {
            Self::Empty { .. } => Ok(()),
            Self::HalfSpace { normal, offset, .. } => {
                check(normal.len())?;
                if (sphere::norm(normal) - 1.0).abs() > 1e-9 || !offset.is_finite() {
                    return Err(GeometryError::Invalid("half-space normal must be a unit vector".into()));
                }
                Ok(())
            }
            Self::Ball { center, radius, .. } => {
                check(center.len())?;
                if !(*radius >= 0.0) || !radius.is_finite() || center.iter().any(|v| !v.is_finite()) {
                    return Err(GeometryError::Invalid(format!("ball radius must be finite and >= 0, got {radius}")));
                }
                Ok(())
            }
            Self::Polytope { faces, .. } => {
                if faces.is_empty() {
                    return Err(GeometryError::Invalid("polytope without faces".into()));
                }
                for f in faces {
                    check(f.normal.len())?;
                    if (sphere::norm(&f.normal) - 1.0).abs() > 1e-9 {
                        return Err(GeometryError::Invalid("polytope face normals must be unit vectors".into()));
                    }
                }
                Ok(())
            }
            Self::VShape { slope, .. } => {
                if dim < 2 {
                    return Err(GeometryError::Invalid("v-shape needs dimension >= 2".into()));
                }
                if !(*slope >= 0.0) || !slope.is_finite() {
                    return Err(GeometryError::Invalid(format!("v-shape slope must be >= 0, got {slope}")));
                }
                Ok(())
            }
            Self::Subgraph { gamma, .. } => gamma.validate(dim - 1).map_err(GeometryError::Invalid),
            Self::Union { parts, .. } => {
                for p in parts {
                    check(p.dim())?;
                    p.validate()?;
                }
                Ok(())
            }
            Self::Raster { mask, .. } => check(mask.lattice().dim()),
        }
    }

    /// Whether the set is known to be empty.
    pub fn is_empty(&self) -> bool {
        match self {
            Self::Empty { .. } => true,
            Self::Union { parts, .. } => parts.iter().all(|p| p.is_empty()),
            Self::Raster { mask, .. } => mask.is_empty_set(),
            Self::Polytope { dim, .. } => self.nearest(&vec![0.0; *dim]).is_none(),
            _ => false,
        }
    }

    /// Whether every point is convex-set kind (nonpositive opening everywhere).
    pub fn is_convex_kind(&self) -> bool {
        matches!(self, Self::HalfSpace { .. } | Self::Ball { .. } | Self::Polytope { .. } | Self::Empty { .. })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::Empty { .. } => false,
            Self::HalfSpace { normal, offset, .. } => sphere::dot(normal, x) <= *offset,
            Self::Ball { center, radius, .. } => {
                x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= radius * radius
            }
            Self::Polytope { faces, .. } => faces.iter().all(|f| f.signed(x) <= 0.0),
            Self::VShape { slope, .. } => x[1] <= slope * x[0].abs(),
            Self::Subgraph { dim, gamma } => x[dim - 1] <= gamma.eval(&x[..dim - 1]),
            Self::Union { parts, .. } => parts.iter().any(|p| p.contains(x)),
            Self::Raster { mask, .. } => mask.contains(x),
        }
    }

    /// Euclidean distance to the closure; `+inf` for the empty set.
    pub fn dist(&self, x: &[f64]) -> f64 {
        self.nearest(x).map_or(f64::INFINITY, |(d, _)| d)
    }

    /// Distance and one nearest point of the closure.
    pub fn nearest(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        match self {
            Self::Empty { .. } => None,
            Self::HalfSpace { normal, offset, .. } => {
                let s = sphere::dot(normal, x) - offset;
                if s <= 0.0 {
                    Some((0.0, x.to_vec()))
                } else {
                    Some((s, sphere::axpy(x, -s, normal)))
                }
            }
            Self::Ball { center, radius, .. } => {
                let r = sphere::dist(x, center);
                if r <= *radius {
                    Some((0.0, x.to_vec()))
                } else {
                    let t = radius / r;
                    Some((r - radius, center.iter().zip(x).map(|(c, v)| c + t * (v - c)).collect()))
                }
            }
            Self::Polytope { faces, .. } => polytope::nearest(faces, x),
            Self::VShape { .. } => {
                let (a, b) = self.v_shape_halves();
                let pa = a.nearest(x).unwrap();
                let pb = b.nearest(x).unwrap();
                Some(if pb.0 < pa.0 { pb } else { pa })
            }
            Self::Subgraph { dim, gamma } => Some(
                subgraph::minimizers(gamma, *dim, x)
                    .into_iter()
                    .next()
                    .expect("subgraph minimization yields a point"),
            ),
            Self::Union { parts, .. } => parts
                .iter()
                .filter_map(|p| p.nearest(x))
                .min_by(|a, b| a.0.total_cmp(&b.0)),
            Self::Raster { mask, .. } => mask.nearest_cell(x).map(|(cell, d)| {
                let b = mask.cell_box(cell);
                let p = x.iter().enumerate().map(|(a, v)| v.clamp(b.lo[a], b.hi[a])).collect();
                (d, p)
            }),
        }
    }

    /// The two half-spaces whose union is a v-shape.
    pub(crate) fn v_shape_halves(&self) -> (SetDescriptor, SetDescriptor) {
        let Self::VShape { dim, slope } = self else { unreachable!("not a v-shape") };
        let mut a = vec![0.0; *dim];
        let mut b = vec![0.0; *dim];
        a[0] = -slope;
        a[1] = 1.0;
        b[0] = *slope;
        b[1] = 1.0;
        (
            SetDescriptor::half_space(a, 0.0).unwrap(),
            SetDescriptor::half_space(b, 0.0).unwrap(),
        )
    }

    /// All detected nearest points of the closure within `tol` of optimal.
    pub fn projections(&self, x: &[f64], tol: f64) -> Result<ProjectionSet, GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::Dimension { expected: self.dim(), got: x.len() });
        }
        let Some((d, p)) = self.nearest(x) else {
            return Ok(ProjectionSet { points: vec![], distance: f64::INFINITY, tolerance: tol });
        };
        if d == 0.0 {
            return Err(GeometryError::Inside(x.to_vec()));
        }
        let mut cands: Vec<(f64, Vec<f64>)> = match self {
            Self::VShape { .. } => {
                let (a, b) = self.v_shape_halves();
                vec![a.nearest(x).unwrap(), b.nearest(x).unwrap()]
            }
            Self::Subgraph { dim, gamma } => subgraph::minimizers(gamma, *dim, x),
            Self::Union { parts, .. } => {
                let mut v = Vec::new();
                for part in parts {
                    if let Ok(ps) = part.projections(x, tol) {
                        v.extend(ps.points.into_iter().map(|q| (ps.distance, q)));
                    }
                }
                v
            }
            _ => vec![(d, p)],
        };
        cands.retain(|(dc, _)| *dc <= d + tol);
        let mut points: Vec<Vec<f64>> = Vec::new();
        for (_, q) in cands {
            let gap = tol.max(1e-9 * (1.0 + d));
            if points.iter().all(|r| sphere::dist(r, &q) > gap) {
                points.push(q);
            }
        }
        Ok(ProjectionSet { points, distance: d, tolerance: tol })
    }

    /// A point of the set (or its closure) used to anchor samplers, plus a
    /// length scale for the set's features.
    pub(crate) fn anchor(&self) -> Option<(Vec<f64>, f64)> {
        let dim = self.dim();
        match self {
            Self::Empty { .. } => None,
            Self::Ball { center, radius, .. } => Some((center.clone(), radius.max(1.0))),
            Self::Union { parts, .. } => {
                let anchors: Vec<_> = parts.iter().filter_map(|p| p.anchor()).collect();
                let first = anchors.first()?.0.clone();
                let scale = anchors.iter().map(|(c, s)| sphere::dist(c, &first) + s).fold(1.0, f64::max);
                Some((first, scale))
            }
            Self::Raster { mask, .. } => {
                let l = mask.lattice();
                let filled: Vec<usize> = (0..l.len()).filter(|&i| mask.bits()[i]).collect();
                if filled.is_empty() {
                    return None;
                }
                let mut c = vec![0.0; dim];
                for &i in &filled {
                    for (a, v) in l.center(i).iter().enumerate() {
                        c[a] += v / filled.len() as f64;
                    }
                }
                let p = self.nearest(&c)?.1;
                let scale = filled.iter().map(|&i| sphere::dist(&l.center(i), &p)).fold(1.0, f64::max);
                Some((p, scale))
            }
            Self::Polytope { .. } => {
                let p = self.nearest(&vec![0.0; dim])?.1;
                // Longest feasible excursion along the axes gives the size.
                let mut scale: f64 = 1.0;
                for a in 0..dim {
                    for s in [-1.0, 1.0] {
                        let mut t = 1.0;
                        while t < 1e6 {
                            let mut q = p.clone();
                            q[a] += s * t;
                            if !self.contains(&q) {
                                break;
                            }
                            t *= 2.0;
                        }
                        scale = scale.max(t);
                    }
                }
                Some((p, scale))
            }
            _ => {
                let p = self.nearest(&vec![0.0; dim])?.1;
                Some((p, 1.0))
            }
        }
    }

    /// Rasterizes onto `lattice`: a cell is filled iff its center lies in the set.
    pub fn rasterize(&self, lattice: &Lattice) -> GridMask {
        GridMask::from_fn(lattice.clone(), |x| self.contains(x))
    }

    /// `U_δ = {x ∈ U : dist(x, ∂U) ≥ δ}`.
    ///
    /// Closed forms are used where they exist; v-shapes, subgraphs and unions
    /// fall back to a raster on `window`, which is then required.
    pub fn erode(&self, delta: f64, window: Option<&Lattice>) -> Result<SetDescriptor, GeometryError> {
        erode::erode(self, delta, window)
    }
}
