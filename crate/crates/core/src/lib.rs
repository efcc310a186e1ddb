//! Operators of the form `R = I + K` (K compact) on sequence spaces whose
//! orbits split the space into a diverging set and a recurrent set, together
//! with the machinery needed to certify that dichotomy at finite scale:
//! separating sequences of linear forms over a union of lines, big-integer
//! modulus schedules, exact closed-form iterates, and the cycle/bump
//! construction over symmetric norms.
//!
//! Everything in this crate is pure computation over immutable values; IO,
//! configuration and spectral diagnostics live in the companion `wildorbit-lab`
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod diagonal;
pub mod error;
pub mod forms;
pub mod hajek;
pub mod lines;
pub mod net;
pub mod powersum;
pub mod rotation;
pub mod schedule;
pub mod vector;

pub use error::Error;
pub use vector::{Field, NormSpec, PlanePoint, SparseVector};

/// Complex scalar used throughout; real-mode values keep an exactly zero
/// imaginary part.
pub type Cplx = num_complex::Complex64;
