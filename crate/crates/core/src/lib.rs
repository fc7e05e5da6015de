//! Spectrally multiplexed Hong-Ou-Mandel interference of weak coherent
//! time-bin qubits, with the MDI-QKD and repeater rate models built on it.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod hom;
pub mod keyrate;
pub mod photonic;
pub mod qubit;
pub mod repeater;
pub mod run;
pub mod ssmm;
pub mod sweep;
pub mod validation;

pub use error::{Error, Result};
