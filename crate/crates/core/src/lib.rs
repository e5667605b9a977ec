//! Scattering in one dimension near zero energy: transfer matrices, the
//! Laurent expansion of the evolution operator about k = 0, low-energy
//! amplitude series and zero-energy resonance classification.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod halfline;
pub mod lowenergy;
pub mod mesh;
pub mod numerics;
pub mod oracles;
pub mod potential;
pub mod propagate;
pub mod validate;
pub mod zeroenergy;

pub use config::Settings;
pub use error::{Error, Result};
pub use numerics::{Mat2C, C64};
pub use potential::{PotentialSpec, SupportWindow};
