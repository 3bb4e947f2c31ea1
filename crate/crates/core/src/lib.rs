//! Kolmogorov-type homogeneous groups and their intrinsic Taylor calculus.
//!
//! The group `𝒢_B` lives on `ℝ × ℝ^d` and is determined by a block
//! sub-diagonal matrix `B`. This crate builds and validates such groups,
//! evaluates the group law, dilations and homogeneous norm, constructs the
//! switching paths that realize commutator flows, evaluates intrinsic
//! Taylor polynomials `T_n u(ζ, ·)` and their remainders, and runs the
//! convergence and regularity experiments exposed by the `kolmo` CLI.

pub mod calculus;
pub mod diffop;
pub mod error;
pub mod field;
pub mod fit;
pub mod group;
pub mod harness;
pub mod multiindex;
pub mod par;
pub mod paths;
pub mod presets;
pub mod regularity;

pub use error::{CalculusError, GroupError};
pub use field::{ScalarField, SharedField};
pub use group::{GroupSpec, Point};
pub use multiindex::{MultiIndex, TaylorTermIndex};
pub use paths::VectorField;
