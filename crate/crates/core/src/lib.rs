//! Link-level Monte-Carlo simulator comparing OFDM and single-carrier
//! uplinks received by a large antenna array with matched-filter detection.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`]: tapped-delay-line Rayleigh channels, frequency responses and
//!   sampled impulse responses.
//! * [`modem`]: Gray QPSK/16QAM mapping, max-log demapping, root-raised-cosine
//!   pulses and AWGN.
//! * [`turbo`]: rate-1/3 parallel concatenated code with a QPP interleaver and an
//!   iterative max-log-MAP decoder.
//! * [`ofdm_link`] and [`sc_link`]: transmit chains and matched-filter receivers.
//! * [`metrics`]: complexity counts, BLER intervals, spectral/energy efficiency
//!   and Welch PSD.
//! * [`harness`]: seeded trials, campaigns and CSV output.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod harness;
mod linalg;
pub mod metrics;
pub mod modem;
pub mod ofdm_link;
pub mod sc_link;
pub mod turbo;

pub use error::{Error, Result};

/// Complex baseband sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
