//! A desk-scale laboratory for Deep Random secrecy key agreement.
//!
//! The crate simulates the single-instance protocol (degradation, dispersion,
//! synchronization and sampling), the reuse-and-recombine block engine with
//! non-contributive avoidance, canonical opponent strategies with the public
//! discard rule, repetition-code reconciliation with multiply-add-shift
//! privacy amplification, the authenticated extension (verification codes,
//! wallet, secret renewal), and Monte-Carlo / exhaustive checks of the
//! supporting mathematics. [`harness`] ties everything together into a
//! reproducible parameter-sweep runner.

pub mod adversary;
pub mod auth;
pub mod bits;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod protocol;
pub mod reconcile;
pub mod recombine;
pub mod rng;
pub mod statcheck;

pub use bits::{BitVector, Permutation};
pub use error::{Error, Result};
