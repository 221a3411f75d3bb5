//! Polar codes with a length- and rate-preserving repetition-code concatenation.
//!
//! The crate provides:
//!
//! * the Arikan transform `x = u·G_N` with `G_N = F^{⊗n}` in natural
//!   (non-bit-reversed) row order, plus naive matrix oracles ([`xform`]),
//! * bit-channel reliability computation (Gaussian-approximation density
//!   evolution for the BI-AWGN channel, the exact BEC recursion, and a
//!   genie-aided Monte Carlo estimator) together with the analytic
//!   word-error-rate prediction ([`reliability`]),
//! * information-set selection and the constrained search for an optimal
//!   layout of non-overlapping outer repetition blocks at preserved rate
//!   and block length ([`design`]),
//! * successive cancellation decoding, successive list decoding, the
//!   repetition-aware variants of both, and a brute-force ML oracle
//!   ([`decode`]),
//! * BPSK modulation, AWGN simulation, LLR computation and seeded random
//!   streams ([`channel`]),
//! * reproducible Monte Carlo word-error-rate sweeps with machine-readable
//!   output, exposed both as a library ([`sim`], [`verify`]) and through the
//!   `polarsim` command-line tool.
//!
//! Monte Carlo trial loops run data-parallel on rayon when the default
//! `parallel` feature is enabled and fall back to a sequential loop
//! otherwise; results are bit-identical either way.

pub mod channel;
pub mod decode;
pub(crate) mod parallel;
pub mod design;
pub mod error;
pub mod reliability;
pub mod sim;
pub mod spec_io;
pub mod verify;
pub mod xform;

pub use error::{Error, Result};
pub use xform::{BitVector, PolarParams};
