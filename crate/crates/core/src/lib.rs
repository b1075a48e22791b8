//! Numerical laboratory for maximal averages over thin spherical shells.

pub mod annulus;
pub mod atoms;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod littlewood_paley;
pub mod maximal;
pub mod random;
pub mod special;
pub mod spectral;

pub use error::{DecodeError, Error, Result};
pub use grid::{Field, GridSpec};
