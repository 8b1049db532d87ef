//! Fisher-KPP reaction-diffusion laboratory.

pub mod diagnostics;
pub mod fronts;
pub mod geometry;
pub mod lattice;
pub mod reaction;
pub mod scalar;
pub mod scenarios;
pub mod solver;
pub mod sphere;

pub use geometry::{GridMask, SetDescriptor};
pub use lattice::{Lattice, Window};
pub use reaction::{ReactionFn, ReactionSpec};
pub use scalar::Real;

pub type Reaction = ReactionFn<f64>;
pub type Reaction32 = ReactionFn<f32>;
pub type Field = solver::GridField<f64>;
pub type Field32 = solver::GridField<f32>;
pub type Profile = fronts::FrontProfile<f64>;
pub type Profile32 = fronts::FrontProfile<f32>;
