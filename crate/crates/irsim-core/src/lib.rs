//! Deterministic link-level simulation core for reflecting-surface-assisted
//! mmWave coverage.
//!
//! The crate models a passive reflecting panel between a blocked access
//! point and a terminal, and implements a low-cost channel-acquisition
//! pipeline built on small activated blocks of the panel (reflecting unit
//! sets):
//!
//! 1. per-RUS DFT codeword search from terminal power feedback
//!    ([`codebook`]),
//! 2. wideband delay estimation from per-subband channel estimates
//!    ([`delay`]),
//! 3. trilateration of the terminal from the RUS-to-terminal ranges
//!    ([`positioner`]),
//! 4. channel reconstruction at the estimated position and phase-conjugate
//!    reflecting coefficients ([`beam`]).
//!
//! [`sim`] chains the steps into Monte Carlo trials and position sweeps.
//! Everything is `no_std + alloc` and uses `libm` for float math, so results
//! are bit-reproducible across platforms and thread counts; all randomness
//! flows through the keyed streams in [`rng`].

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod beam;
pub mod channel;
pub mod codebook;
pub mod delay;
mod error;
pub mod geometry;
pub mod positioner;
pub mod rng;
pub mod sim;

pub use error::Error;
pub use num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;
