//! Exact construction, certification and simulation of rank-one (C,F)
//! systems whose spectrum contains a prescribed irrational rotation.

pub mod certified;
pub mod cf_params;
pub mod constructions;
pub mod contfrac;
pub mod error;
pub mod experiment;
pub mod simulator;
pub mod torus;
pub mod verifier;
mod serde_dec;

pub use error::{Error, Result};
