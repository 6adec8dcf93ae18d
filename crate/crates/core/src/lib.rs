//! Core library: exact Lie-algebra models, nilpotent boundary geometry,
//! Schottky group dynamics, thermodynamic formalism, twisted transfer
//! operators, and the Dolgopyat operator laboratory.

pub mod bundled;
pub mod dolgopyat;
pub mod error;
pub mod kfield;
pub mod lie;
pub mod lnic;
pub mod mobius;
pub mod ncp;
pub mod nil;
pub mod schottky;
pub mod shift;
pub mod suspension;
pub mod thermo;
pub mod twist;
pub mod rng;

pub use error::{Error, Result};
