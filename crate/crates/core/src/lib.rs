//! Exact homological algebra over finite local rings.

pub mod cochains;
pub mod complex;
pub mod deformation;
pub mod dold_kan;
pub mod error;
pub mod linalg;
pub mod patching;
pub mod selmer;
pub mod resolution;
pub mod ring;
pub mod zmod;

pub use error::{Error, Result};
