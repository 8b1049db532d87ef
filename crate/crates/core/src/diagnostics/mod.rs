//! Quantities extracted from snapshots: k-Hessians, planarity defects,
//! profiles along lines, invasion reach, direction clouds and truncation
//! errors.

mod cloud;
mod hessian;
mod planarity;
mod report;
mod sampling;
mod truncation;

use thiserror::Error;

use crate::fronts::FrontError;
use crate::geometry::GeometryError;
use crate::lattice::Lattice;
use crate::scalar::Real;
use crate::solver::{GridField, SolverError};

pub use cloud::{estimate_e_from_run, estimate_e_from_run_with, CloudConfig};
pub use hessian::{hessian_at, hessian_sigma, sigma_k, SigmaResult};
pub use planarity::{planarity_defect, PlanarityResult, FLAT_OSCILLATION};
pub use report::{DefectSample, DiagnosticsReport, SigmaSample};
pub use sampling::{extract_profile, level_set_radius, ProfileComparison, SampledProfile};
pub use truncation::{truncation_error, TruncationReport};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("k = {k} outside 2..={dim}")]
    KOutOfRange { k: usize, dim: usize },
    #[error("window: {0}")]
    Window(String),
    #[error("snapshot at t = {0} is earlier than t = 1")]
    TooEarly(f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("no cell at or above level {0}")]
    EmptyLevel(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Front(#[from] FrontError),
    #[error("i/o: {0}")]
    Io(String),
}

/// Read-only stencil access to a field widened to f64.
pub(crate) struct Stencil<'a, T: Real> {
    field: &'a GridField<T>,
    strides: Vec<usize>,
}

impl<'a, T: Real> Stencil<'a, T> {
    pub(crate) fn new(field: &'a GridField<T>) -> Self {
        Self { strides: field.lattice().strides(), field }
    }

    pub(crate) fn lattice(&self) -> &Lattice {
        self.field.lattice()
    }

    #[inline]
    pub(crate) fn at(&self, idx: usize) -> f64 {
        self.field.values()[idx].as_f64()
    }

    /// True when every axis index lies in `[margin, n − 1 − margin]`.
    pub(crate) fn interior(&self, ix: &[usize], margin: usize) -> bool {
        ix.iter().zip(self.lattice().dims()).all(|(&i, &n)| i >= margin && i + margin < n)
    }

    /// Centered gradient; `ix` must be at least one cell inside.
    pub(crate) fn gradient(&self, idx: usize, out: &mut [f64]) {
        let h = self.lattice().spacing();
        for (a, g) in out.iter_mut().enumerate() {
            let s = self.strides[a];
            *g = (self.at(idx + s) - self.at(idx - s)) / (2.0 * h[a]);
        }
    }

    /// Centered Hessian, row-major `dim × dim`.
    pub(crate) fn hessian(&self, idx: usize, out: &mut [f64]) {
        let h = self.lattice().spacing();
        let n = self.lattice().dim();
        let u0 = self.at(idx);
        for a in 0..n {
            let sa = self.strides[a];
            out[a * n + a] = (self.at(idx + sa) - 2.0 * u0 + self.at(idx - sa)) / (h[a] * h[a]);
            for b in a + 1..n {
                let sb = self.strides[b];
                let m = (self.at(idx + sa + sb) - self.at(idx + sa - sb) - self.at(idx - sa + sb) + self.at(idx - sa - sb))
                    / (4.0 * h[a] * h[b]);
                out[a * n + b] = m;
                out[b * n + a] = m;
            }
        }
    }
}
