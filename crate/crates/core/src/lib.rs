//! Exact computations on finite spaces of homogeneous type.
//!
//! A finite quasimetric measure space has finitely many distinct balls, so every
//! supremum over balls in the classical weighted theory becomes a maximum over a
//! finite catalog. This crate builds on that fact:
//!
//! * [`space`] profiles the quasitriangle constant, the doubling constant and
//!   enumerates canonical balls.
//! * [`orlicz`] provides Young functions, their conjugates, local Luxemburg
//!   norms and the tail integral that controls Orlicz maximal operators.
//! * [`maximal`] evaluates the uncentered Hardy–Littlewood maximal operator and
//!   its Orlicz variant exactly.
//! * [`weights`] computes the Muckenhoupt, Fujii–Wilson, bump and Sawyer
//!   testing constants.
//! * [`czdecomp`] runs the Calderón–Zygmund stopping-time selection and its
//!   multi-level refinement, with exhaustive property checkers.
//! * [`verify`] checks the two-weight chain with explicit constants and runs
//!   lower-bound and reverse Hölder probes.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod czdecomp;
mod error;
pub mod maximal;
pub mod numeric;
pub mod orlicz;
pub mod quad;
pub mod space;
pub mod verify;
pub mod weights;

pub use czdecomp::CZConfig;
pub use error::{Error, Result};
pub use maximal::FieldVector;
pub use orlicz::{LebesgueExponent, TailIntegral, YoungFunction};
pub use space::{Ball, CanonicalBall, Metric, QuasiMetricSpace, SpaceProfile, SpaceSpec};
pub use weights::WeightVector;

