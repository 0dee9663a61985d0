//! Squeezed vacuum through an EIT medium, seen by mono- and bichromatic
//! homodyne detection.
//!
//! Noise powers are shot-noise normalized (vacuum = 1) and detunings are in
//! Hz unless a name says otherwise.

pub mod eit;
pub mod error;
pub mod measurement;
pub mod opo;
pub mod pulse;
pub mod spectral;

pub use error::{Error, Result};
