//! Two-party secure function evaluation from communication-efficient
//! representations.
//!
//! The crate turns three descriptions of a function — protocol trees from
//! the communication-complexity model, oblivious branching programs, and
//! circuits whose gates are look-up tables — into semi-honest private
//! protocols built on 1-out-of-w oblivious transfer, with exact cost
//! accounting. A garbled-protocol variant and write-oblivious RAM
//! simulations round out the toolkit.
//!
//! Modules, bottom up:
//!
//! * [`bits`], [`rng`], [`prf`] — bit strings, XOR shares, seeded
//!   randomness, PRG/PRF.
//! * [`meter`], [`channel`], [`exec`] — cost tallies, framed transports,
//!   and the two-endpoint runner.
//! * [`ot`] — 1-out-of-w oblivious transfer (ideal, group, and
//!   reduction-to-1-of-2 backends).
//! * [`ind`] — private indirect indexing and secure pointer jumping.
//! * [`cc`], [`median`] — protocol trees, list induction, compilation, and
//!   the distance/median example protocols.
//! * [`bp`] — oblivious branching programs, their compiler, the
//!   comparison/automaton/inequality programs, and the randomized-protocol
//!   transforms.
//! * [`lut`] — private look-up-table gates, circuits, merging and sorting.
//! * [`oram`] — write-oblivious memory simulations with access-trace
//!   auditing.
//! * [`garbled`] — the garbled next-message-circuit protocol variant.
//! * [`harness`] — run configuration, JSON reports, and statistical
//!   privacy smoke tests.

#![forbid(unsafe_code)]
#![warn(missing_docs)]

pub mod bits;
pub mod bp;
pub mod cc;
pub mod channel;
pub mod exec;
pub mod garbled;
pub mod harness;
pub mod ind;
pub mod lut;
pub mod median;
pub mod meter;
pub mod oram;
pub mod ot;
pub mod prf;
pub mod rng;

pub use bits::{xor_reconstruct, BitString, Role, XorShare};
pub use exec::{run_pair, Endpoint, OtBackendKind, PairConfig, ProtoError, TransportKind};
pub use prf::{prf_eval, prg_expand};
pub use rng::{SecurityParam, SeededRng};
