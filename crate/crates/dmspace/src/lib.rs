//! Finite distance measure spaces.
//!
//! Distances may be infinite, measures are finite and need not be normalized.
//! Most routines are generic over [`space::Scalar`], implemented for `f64` and
//! exact rationals [`space::Q`].

pub mod approx;
pub mod ghlp;
pub mod gluing;
pub mod hyperbolic;
pub mod prokhorov;
pub mod solenoid;
pub mod space;

/// Seed used by the experiment drivers when none is given.
pub const DEFAULT_SEED: u64 = 0;
