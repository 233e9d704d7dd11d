//! Adaptive compressive subsampling for resistive tactile arrays.
//!
//! A frame is read one taxel at a time through a [`FrameSource`]; a
//! [`sampling::Sampler`] decides which taxels to read (uniform lattice,
//! seeded random, or adaptive binary bisection with neighbor search). Full
//! frames are recovered from the readings with patchwise orthogonal matching
//! pursuit over a learned or analytic patch [`Dictionary`], or classified
//! directly with sparse-representation classification.

pub mod analytics;
pub mod classify;
pub mod dictionary;
pub mod error;
pub mod frame;
pub mod io;
pub mod omp;
pub mod par;
pub mod reconstruction;
pub mod sampling;
pub mod sim;
pub mod source;

pub use dictionary::Dictionary;
pub use error::{Error, Result};
pub use frame::{Measurement, MeasurementSet, PixelIndex, Scheme, TactileFrame};
pub use omp::{omp, sparse_to_dense, LinearOperator, OmpSolution, SparseCode};
pub use par::Exec;
pub use source::{FrameSource, Hold, ReplaySource};
