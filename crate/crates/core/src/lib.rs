//! Classical Fourier-optics emulation of Grover search.
//!
//! A transverse beam profile circulates in a cavity containing an oracle
//! phase plate and, in the focal plane of a lens, a second phase plate that
//! performs the inversion about the average. Each roundtrip is one Grover
//! iteration. The crate simulates that cavity ([`cavity`]), the discrete
//! amplitude-amplification model it emulates ([`grover`]), and the
//! bookkeeping that connects the two ([`analysis`]).

pub mod analysis;
pub mod cavity;
pub mod config;
pub mod error;
pub mod experiment;
pub mod field;
pub mod grover;
pub mod optics;

pub use error::{Error, ErrorCategory, Result};
