//! Bidirectional piggybacking (BPD) for (n, k; 2) MDS array codes.
//!
//! Two substripes a and b are each encoded with a systematic [n, k] MDS code
//! over E = GF(16). Symbols from the first half of a are added to b-parities,
//! and λ-scaled symbols from the second half of b are added to a-parities,
//! so a single systematic node can be rebuilt from roughly k + k/(2(r-1))
//! downloaded symbols instead of 2k. λ is drawn from an extension of E so
//! that the piggybacked code stays MDS.

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod base_code;
pub mod cli;
pub mod codec;
pub mod construct;
pub mod descriptor;
pub mod error;
pub mod field;
pub mod linalg;
pub mod verify;

pub use base_code::{BaseKind, CodeParams, ParityMatrix};
pub use codec::{Codeword, RepairReport, Stripe};
pub use construct::{construct, BlockGenerator, BpdCode, PiggybackPlan};
pub use error::{BpdError, Result};
pub use field::{EPoly, Elem, FieldTower, Gf16};
pub use verify::MdsReport;
