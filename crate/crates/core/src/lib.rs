//! Core library for representing quantum channels and superchannels by their
//! Choi matrices, classifying and decomposing incoherent channels, and
//! quantifying channel coherence.
//!
//! Everything is built on one dense complex matrix type, [`mat::CMatrix`].
//! A channel `A -> B` is carried by its Choi matrix on the composite space
//! `A ⊗ B`, a superchannel by its Choi matrix on `(A ⊗ B) ⊗ (A' ⊗ B')`.
//! The fixed incoherence basis is always the computational product basis,
//! with composite index `(j, a) -> j * |B| + a`.
//!
//! Modules:
//!
//! * [`mat`] — dense complex matrices, Kronecker products, partial traces,
//!   Hermitian eigendecomposition, dephasing, entropy.
//! * [`channel`] — channels as Choi matrices or Kraus sets, validation,
//!   application, composition, and named constructors.
//! * [`incoherent`] — the completely dephasing superchannel, incoherence
//!   tests, and the row-stochastic convex decomposition of incoherent
//!   channels into deterministic relabelings.
//! * [`superchannel`] — superchannels, validation of the Choi conditions,
//!   selective application, sandwich construction, and Kronecker
//!   factorization of single-Kraus superchannels.
//! * [`coherence`] — the l1 and relative-entropy coherence measures for
//!   states and channels, maximally coherent channel constructors.
//! * [`harness`] — seeded random generators and the randomized property
//!   suites for the axioms and monotonicity statements.
//!
//! The crate is `no_std` (with `alloc`); all IO and serialization live in
//! the companion CLI crate.

#![no_std]

extern crate alloc;

mod error;

pub mod channel;
pub mod coherence;
pub mod harness;
pub mod incoherent;
pub mod mat;
pub mod superchannel;

pub use error::{Error, Result};
pub use mat::{CMatrix, DimPair, Subsystem, C64};

/// Default tolerance for validity checks and residual comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;
