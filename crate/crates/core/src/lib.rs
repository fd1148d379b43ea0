//! Expanding Baker Maps: the two-parameter family `Ψ_{a,b}` on the triangle
//! `𝒯`, the one-parameter family `Λ_t`, tent maps and their products.
//!
//! The crate evaluates the maps exactly, decides parameter-region membership,
//! builds invariant and restrictive domains, checks affine conjugacies,
//! iterates the renormalization operators `H_Δ`, `H_Π` and counts coexisting
//! attractors by orbit simulation.

pub mod conjugacy;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod maps;
pub mod regions;
pub mod renorm;

pub use error::{Error, GeometryError, Result};
pub use geometry::{fold, reflect, Line, Point, PolygonDomain};
pub use maps::{BranchId, GenericEbm, LambdaParam, Mat2, Params, PiecewiseMap, TentParam};
