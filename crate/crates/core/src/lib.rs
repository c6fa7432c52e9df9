//! Exact-diagonalization toolkit for thermal area-law certificates on small
//! lattice models.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod entangle;
pub mod error;
pub mod exec;
pub mod heatfit;
pub mod lattice;
pub mod linalg;
pub mod models;
pub mod random;
pub mod spectral;
pub mod thermo;

pub use error::{Error, Result};
pub use exec::Exec;
