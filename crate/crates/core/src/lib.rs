//! Nonbinary LDPC decoding core.
//!
//! Galois-field arithmetic, parity-check matrices, the AWGN prior generator,
//! EMS / Min-Max decoding with truncated messages and an analytical cycle
//! model of the emulation pipeline. Everything here is `no_std` with `alloc`;
//! file formats, the Monte-Carlo harness and the CLI live in the `nbldpc`
//! crate.

#![no_std]

extern crate alloc;

pub mod channel;
pub mod code;
pub mod cycles;
pub mod decoder;
mod error;
pub mod gf;
pub mod message;
pub mod seed;
pub mod stats;

pub use channel::{generate_priors, sigma_from_snr, ChannelConfig};
pub use code::{build_regular_2dc, expand_qc, ParityCheckMatrix, QcBaseMatrix, QcCell, Rate, RowEntry};
pub use cycles::{CycleConfig, CycleParams, CycleReport};
pub use decoder::{decode, Algorithm, DecodeOutcome, Decoder, DecoderConfig};
pub use error::Error;
pub use gf::{Field, Symbol};
pub use message::{Entry, Llrv};
