//! Superintegrable oscillator on a conformally flat space of nonconstant
//! curvature: symbolic operator algebra, classical dynamics and quantum
//! spectra.

pub mod algebra;
pub mod classical;
pub mod error;
pub mod model;
pub mod spectra;

pub use error::{Error, Result};
pub use model::{EffectiveMinimum, ModelParams, Threshold};
