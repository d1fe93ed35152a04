//! Per-run cost accounting.
//!
//! Each endpoint owns a [`CostMeter`] that tallies oblivious-transfer
//! invocations by width, framed bytes sent per frame type, logical rounds,
//! and PRF/PRG usage. Protocol-shape checks compare these tallies against
//! the expected censuses, so counts must depend only on protocol structure,
//! never on inputs.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

/// Monotone tally of a single endpoint's costs during one run.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize)]
pub struct CostMeter {
    /// OT invocations where this endpoint acted as sender, keyed by width.
    pub ot_by_width: BTreeMap<usize, u64>,
    /// Framed bytes sent by this endpoint (header included).
    pub bytes_sent: u64,
    /// Frames sent by this endpoint.
    pub frames_sent: u64,
    /// Payload bytes sent per frame type byte.
    pub bytes_by_type: BTreeMap<u8, u64>,
    /// Logical rounds: strictly sequential message-wait phases declared by
    /// the protocol schedule (parallel OTs count once).
    pub rounds: u64,
    /// Pseudo-random function evaluations performed by protocol steps.
    pub prf_evals: u64,
    /// Pseudo-random generator output bits drawn by protocol steps.
    pub prg_bits: u64,
}

impl CostMeter {
    /// Records one OT of the given width with this endpoint as sender.
    pub fn note_ot(&mut self, width: usize) {
        *self.ot_by_width.entry(width).or_insert(0) += 1;
    }

    /// Records a sent frame of `payload_len` payload bytes.
    pub fn note_frame(&mut self, ftype: u8, payload_len: usize) {
        self.frames_sent += 1;
        self.bytes_sent += 5 + payload_len as u64;
        *self.bytes_by_type.entry(ftype).or_insert(0) += payload_len as u64;
    }

    /// Advances the round counter by `n` sequential phases.
    pub fn note_rounds(&mut self, n: u64) {
        self.rounds += n;
    }

    /// Records `n` PRF evaluations.
    pub fn note_prf(&mut self, n: u64) {
        self.prf_evals += n;
    }

    /// Records `n` PRG output bits.
    pub fn note_prg_bits(&mut self, n: u64) {
        self.prg_bits += n;
    }

    /// Total OT invocations across all widths.
    pub fn ot_total(&self) -> u64 {
        self.ot_by_width.values().sum()
    }

    /// The OT census as a sorted `(width, count)` list.
    pub fn ot_census(&self) -> Vec<(usize, u64)> {
        self.ot_by_width.iter().map(|(w, c)| (*w, *c)).collect()
    }

    /// Element-wise sum, used to combine the two endpoints' views.
    pub fn merged_with(&self, other: &CostMeter) -> CostMeter {
        let mut out = self.clone();
        for (w, c) in &other.ot_by_width {
            *out.ot_by_width.entry(*w).or_insert(0) += c;
        }
        out.bytes_sent += other.bytes_sent;
        out.frames_sent += other.frames_sent;
        for (t, b) in &other.bytes_by_type {
            *out.bytes_by_type.entry(*t).or_insert(0) += b;
        }
        out.rounds = out.rounds.max(other.rounds);
        out.prf_evals += other.prf_evals;
        out.prg_bits += other.prg_bits;
        out
    }
}

/// Shared handle to an endpoint's meter, also held by its channel.
pub type MeterHandle = Arc<Mutex<CostMeter>>;

/// Fresh zeroed meter handle.
pub fn new_meter() -> MeterHandle {
    Arc::new(Mutex::new(CostMeter::default()))
}
