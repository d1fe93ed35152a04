//! 1-out-of-w oblivious transfer.
//!
//! Three interchangeable backends satisfy the same contract — the chooser
//! learns exactly `values[j]`, the sender learns nothing about `j`:
//!
//! * **ideal** — a trusted-dealer simulation inside the harness. The
//!   chooser's endpoint is handed `values[j]` out of band; nothing crosses
//!   the channel. Functional tests run on this backend so correctness never
//!   depends on number theory.
//! * **group** — a two-message protocol over the Ristretto prime-order
//!   group. Wire layout (all points 32-byte compressed):
//!   1. sender → chooser, `OT_MSG`: `w:u32 | elem_bits:u32 | C_1..C_{w-1}`
//!   2. chooser → sender, `OT_MSG`: `B` where `B = g^r − C_j` (`C_0` is the
//!      identity), so `B` is uniform whatever `j` is
//!   3. sender → chooser, `OT_MSG`: `g^y | ct_0..ct_{w-1}` with
//!      `ct_i = x_i ⊕ KDF(y·(B + C_i), i)`; the chooser opens slot `j` with
//!      `KDF(r·g^y, j)`.
//! * **reduction** — 1-of-w from `log2 w` concurrent 1-of-2 base transfers
//!   of PRF keys selected by the bits of the index; the sender then ships
//!   every value masked under its index's key combination. Each masked
//!   value carries a 32-bit all-zero tag so the chooser can recognize a
//!   correct decryption.

use std::sync::mpsc;
use std::sync::Arc;

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use thiserror::Error;

use crate::bits::BitString;
use crate::channel::FrameType;
use crate::exec::{BaseOt, Endpoint, OtBackendKind, ProtoError};
use crate::prf::prf_eval;
use crate::rng::SeededRng;

/// Width of the integrity tag appended inside the reduction backend.
pub const REDUCTION_TAG_BITS: usize = 32;

/// OT failures.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OtError {
    /// Sender offered no values.
    #[error("sender input must hold at least one value")]
    EmptyValues,
    /// Sender values had mixed lengths.
    #[error("sender values must all have the same bit length")]
    UnequalLengths,
    /// Chooser index outside `[0, w)`.
    #[error("choice index {index} out of range for width {width}")]
    IndexOutOfRange {
        /// Requested index.
        index: usize,
        /// Sender width.
        width: usize,
    },
    /// The reduction backend requires a power-of-two width.
    #[error("width {0} is not a power of two")]
    WidthNotPowerOfTwo(usize),
    /// Sender and chooser disagreed on the transfer shape.
    #[error("width/length mismatch between sender and chooser: {0}")]
    ShapeMismatch(&'static str),
    /// A group element failed to decode.
    #[error("malformed group element on the wire")]
    BadPoint,
    /// The reduction's all-zero tag did not verify.
    #[error("integrity tag check failed after decryption")]
    IntegrityCheckFailed,
    /// Malformed OT message.
    #[error("malformed OT message: {0}")]
    BadMessage(&'static str),
    /// The in-process dealer disappeared (peer endpoint failed).
    #[error("ideal dealer closed")]
    DealerClosed,
}

/// The sender's list of `w` equal-length values.
///
/// Values may be held densely or generated on demand; the ideal backend
/// evaluates a lazy list only at the chosen index, which keeps wide
/// transfers cheap in tests while the meter still records the full width.
#[derive(Clone)]
pub struct OtSenderInput {
    /// Number of values `w`.
    pub width: usize,
    /// Bit length of each value.
    pub elem_bits: usize,
    values: OtValues,
}

#[derive(Clone)]
enum OtValues {
    Dense(Arc<Vec<BitString>>),
    Lazy(Arc<dyn Fn(usize) -> BitString + Send + Sync>),
}

impl OtSenderInput {
    /// Wraps explicit values, checking they are non-empty and equal-length.
    pub fn dense(values: Vec<BitString>) -> Result<OtSenderInput, OtError> {
        let first = values.first().ok_or(OtError::EmptyValues)?;
        let elem_bits = first.len();
        if values.iter().any(|v| v.len() != elem_bits) {
            return Err(OtError::UnequalLengths);
        }
        Ok(OtSenderInput {
            width: values.len(),
            elem_bits,
            values: OtValues::Dense(Arc::new(values)),
        })
    }

    /// Wraps a generator; `f(i)` must return `elem_bits` bits for `i < width`.
    pub fn lazy(
        width: usize,
        elem_bits: usize,
        f: impl Fn(usize) -> BitString + Send + Sync + 'static,
    ) -> OtSenderInput {
        OtSenderInput {
            width,
            elem_bits,
            values: OtValues::Lazy(Arc::new(f)),
        }
    }

    /// Value at index `i`.
    pub fn get(&self, i: usize) -> BitString {
        let v = match &self.values {
            OtValues::Dense(vs) => vs[i].clone(),
            OtValues::Lazy(f) => f(i),
        };
        debug_assert_eq!(v.len(), self.elem_bits);
        v
    }
}

/// The chooser's index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OtChoice(pub usize);

/// Default element length `X = max(k, ceil(log2 w))`.
pub fn default_elem_bits(k: usize, width: usize) -> usize {
    k.max(log2_exact_or_ceil(width))
}

fn log2_exact_or_ceil(w: usize) -> usize {
    (usize::BITS - w.next_power_of_two().leading_zeros() - 1) as usize
}

/// Exact log2 of a power of two.
pub fn log2_exact(w: usize) -> Result<usize, OtError> {
    if !w.is_power_of_two() {
        return Err(OtError::WidthNotPowerOfTwo(w));
    }
    Ok(w.trailing_zeros() as usize)
}

/// One offer deposited with the ideal dealer.
pub struct Offer {
    pub(crate) width: usize,
    pub(crate) elem_bits: usize,
    pub(crate) provider: Box<dyn Fn(usize) -> BitString + Send>,
}

/// One endpoint's ports to the in-process dealer.
pub struct IdealPort {
    pub(crate) offers_out: mpsc::Sender<Offer>,
    pub(crate) offers_in: mpsc::Receiver<Offer>,
}

/// Sender half of one oblivious transfer.
///
/// Meters one OT of `input.width`, except on the reduction backend which
/// meters its base width-2 transfers instead. Round accounting is left to
/// the calling protocol, which knows its own schedule.
pub fn ot_send(ep: &mut Endpoint, input: &OtSenderInput) -> Result<(), ProtoError> {
    if input.width == 0 {
        return Err(OtError::EmptyValues.into());
    }
    match ep.backend {
        OtBackendKind::Ideal => {
            ep.meter.lock().unwrap().note_ot(input.width);
            ideal_send(ep, input)
        }
        OtBackendKind::Group => {
            ep.meter.lock().unwrap().note_ot(input.width);
            group_send(ep, input)
        }
        OtBackendKind::ReduceOt12(base) => reduce_send(ep, input, base),
    }
}

/// Chooser half of one oblivious transfer; returns `values[choice]`.
pub fn ot_recv(
    ep: &mut Endpoint,
    width: usize,
    elem_bits: usize,
    choice: OtChoice,
) -> Result<BitString, ProtoError> {
    if choice.0 >= width {
        return Err(OtError::IndexOutOfRange {
            index: choice.0,
            width,
        }
        .into());
    }
    match ep.backend {
        OtBackendKind::Ideal => ideal_recv(ep, width, elem_bits, choice),
        OtBackendKind::Group => group_recv(ep, width, elem_bits, choice),
        OtBackendKind::ReduceOt12(base) => reduce_recv(ep, width, elem_bits, choice, base),
    }
}

// ---------------------------------------------------------------- ideal

fn ideal_send(ep: &mut Endpoint, input: &OtSenderInput) -> Result<(), ProtoError> {
    let port = ep.ideal.as_ref().expect("ideal backend without dealer");
    let values = input.values.clone();
    let elem_bits = input.elem_bits;
    let offer = Offer {
        width: input.width,
        elem_bits,
        provider: Box::new(move |i| match &values {
            OtValues::Dense(vs) => vs[i].clone(),
            OtValues::Lazy(f) => f(i),
        }),
    };
    port.offers_out
        .send(offer)
        .map_err(|_| OtError::DealerClosed)?;
    Ok(())
}

fn ideal_recv(
    ep: &mut Endpoint,
    width: usize,
    elem_bits: usize,
    choice: OtChoice,
) -> Result<BitString, ProtoError> {
    let port = ep.ideal.as_ref().expect("ideal backend without dealer");
    let offer = port.offers_in.recv().map_err(|_| OtError::DealerClosed)?;
    if offer.width != width || offer.elem_bits != elem_bits {
        return Err(OtError::ShapeMismatch("dealer offer does not match request").into());
    }
    let value = (offer.provider)(choice.0);
    ep.record_delivery(&value.to_wire());
    Ok(value)
}

// ---------------------------------------------------------------- group

fn rng_scalar(rng: &mut SeededRng) -> Scalar {
    let mut wide = [0u8; 64];
    rng.fill_bytes(&mut wide);
    Scalar::from_bytes_mod_order_wide(&wide)
}

fn point_kdf(point: &RistrettoPoint, slot: usize, out_bits: usize) -> BitString {
    let key_bytes = point.compress().to_bytes();
    let key = BitString::from_wire(&[(256u32).to_le_bytes().as_slice(), &key_bytes].concat())
        .expect("32 key bytes");
    prf_eval(&key, &BitString::from_u64(slot as u64, 64), out_bits)
}

fn stride_bytes(elem_bits: usize) -> usize {
    elem_bits.div_ceil(8)
}

fn pack_value(v: &BitString) -> Vec<u8> {
    v.as_raw().to_vec()
}

fn unpack_value(bytes: &[u8], elem_bits: usize) -> Result<BitString, OtError> {
    BitString::from_wire(&[(elem_bits as u32).to_le_bytes().as_slice(), bytes].concat())
        .map_err(|_| OtError::BadMessage("dirty value padding"))
}

fn group_send(ep: &mut Endpoint, input: &OtSenderInput) -> Result<(), ProtoError> {
    let w = input.width;
    let g = RISTRETTO_BASEPOINT_POINT;
    // shifts C_1..C_{w-1}; C_0 is the identity so a zero choice needs no shift
    let shifts: Vec<RistrettoPoint> = (1..w).map(|_| g * rng_scalar(&mut ep.rng)).collect();
    let mut setup = Vec::with_capacity(8 + 32 * (w - 1));
    setup.extend_from_slice(&(w as u32).to_le_bytes());
    setup.extend_from_slice(&(input.elem_bits as u32).to_le_bytes());
    for c in &shifts {
        setup.extend_from_slice(&c.compress().to_bytes());
    }
    ep.chan.send(FrameType::OtMsg, &setup)?;

    let b_msg = ep.chan.recv_expect(FrameType::OtMsg)?;
    if b_msg.len() != 32 {
        return Err(OtError::BadMessage("chooser key wrong length").into());
    }
    let b_point = CompressedRistretto::from_slice(&b_msg)
        .map_err(|_| OtError::BadPoint)?
        .decompress()
        .ok_or(OtError::BadPoint)?;

    let y = rng_scalar(&mut ep.rng);
    let gy = g * y;
    let stride = stride_bytes(input.elem_bits);
    let mut transfer = Vec::with_capacity(32 + w * stride);
    transfer.extend_from_slice(&gy.compress().to_bytes());
    for i in 0..w {
        let pk = if i == 0 {
            b_point
        } else {
            b_point + shifts[i - 1]
        };
        let pad = point_kdf(&(pk * y), i, input.elem_bits);
        ep.meter.lock().unwrap().note_prf(1);
        let ct = input.get(i).xor(&pad).expect("kdf length matches");
        transfer.extend_from_slice(&pack_value(&ct));
    }
    ep.chan.send(FrameType::OtMsg, &transfer)?;
    Ok(())
}

fn group_recv(
    ep: &mut Endpoint,
    width: usize,
    elem_bits: usize,
    choice: OtChoice,
) -> Result<BitString, ProtoError> {
    let setup = ep.chan.recv_expect(FrameType::OtMsg)?;
    if setup.len() < 8 {
        return Err(OtError::BadMessage("short setup").into());
    }
    let w = u32::from_le_bytes(setup[..4].try_into().unwrap()) as usize;
    let eb = u32::from_le_bytes(setup[4..8].try_into().unwrap()) as usize;
    if w != width || eb != elem_bits {
        return Err(OtError::ShapeMismatch("sender setup does not match request").into());
    }
    if setup.len() != 8 + 32 * (w - 1) {
        return Err(OtError::BadMessage("setup length mismatch").into());
    }
    let mut shifts = Vec::with_capacity(w - 1);
    for i in 0..w - 1 {
        let bytes = &setup[8 + 32 * i..8 + 32 * (i + 1)];
        shifts.push(
            CompressedRistretto::from_slice(bytes)
                .map_err(|_| OtError::BadPoint)?
                .decompress()
                .ok_or(OtError::BadPoint)?,
        );
    }

    let g = RISTRETTO_BASEPOINT_POINT;
    let r = rng_scalar(&mut ep.rng);
    let shift_j = if choice.0 == 0 {
        RistrettoPoint::identity()
    } else {
        shifts[choice.0 - 1]
    };
    let b_point = g * r - shift_j;
    ep.chan
        .send(FrameType::OtMsg, &b_point.compress().to_bytes())?;

    let transfer = ep.chan.recv_expect(FrameType::OtMsg)?;
    let stride = stride_bytes(elem_bits);
    if transfer.len() != 32 + w * stride {
        return Err(OtError::BadMessage("transfer length mismatch").into());
    }
    let gy = CompressedRistretto::from_slice(&transfer[..32])
        .map_err(|_| OtError::BadPoint)?
        .decompress()
        .ok_or(OtError::BadPoint)?;
    let ct = &transfer[32 + choice.0 * stride..32 + (choice.0 + 1) * stride];
    let pad = point_kdf(&(gy * r), choice.0, elem_bits);
    ep.meter.lock().unwrap().note_prf(1);
    let value = unpack_value(ct, elem_bits)?
        .xor(&pad)
        .expect("lengths match");
    Ok(value)
}

// ------------------------------------------------------------- reduction

fn reduce_mask(keys: &[BitString], index: usize, bits: usize, out_bits: usize) -> BitString {
    // keys[t] is the key for bit t of the index (most significant first)
    let mut mask = BitString::zeros(out_bits);
    let idx = BitString::from_u64(index as u64, bits);
    for key in keys.iter().take(bits) {
        let layer = prf_eval(key, &idx, out_bits);
        mask = mask.xor(&layer).expect("lengths match");
    }
    mask
}

fn base_backend(base: BaseOt) -> OtBackendKind {
    match base {
        BaseOt::Ideal => OtBackendKind::Ideal,
        BaseOt::Group => OtBackendKind::Group,
    }
}

fn reduce_send(ep: &mut Endpoint, input: &OtSenderInput, base: BaseOt) -> Result<(), ProtoError> {
    let w = input.width;
    let bits = log2_exact(w)?;
    let padded_bits = input.elem_bits + REDUCTION_TAG_BITS;

    // one key pair per index bit; the chooser learns the key matching its bit
    let key_pairs: Vec<(BitString, BitString)> = (0..bits)
        .map(|_| {
            (
                BitString::random(&mut ep.rng, ep.k),
                BitString::random(&mut ep.rng, ep.k),
            )
        })
        .collect();

    let saved_backend = ep.backend;
    ep.backend = base_backend(base);
    for (k0, k1) in &key_pairs {
        let pair = OtSenderInput::dense(vec![k0.clone(), k1.clone()])?;
        ep.meter.lock().unwrap().note_ot(2);
        match ep.backend {
            OtBackendKind::Ideal => ideal_send(ep, &pair)?,
            OtBackendKind::Group => group_send(ep, &pair)?,
            _ => unreachable!(),
        }
    }
    ep.backend = saved_backend;

    let stride = stride_bytes(padded_bits);
    let mut payload = Vec::with_capacity(8 + w * stride);
    payload.extend_from_slice(&(w as u32).to_le_bytes());
    payload.extend_from_slice(&(input.elem_bits as u32).to_le_bytes());
    for i in 0..w {
        let tagged = input.get(i).concat(&BitString::zeros(REDUCTION_TAG_BITS));
        let keys: Vec<BitString> = (0..bits)
            .map(|t| {
                let bit = (i >> (bits - 1 - t)) & 1;
                if bit == 0 {
                    key_pairs[t].0.clone()
                } else {
                    key_pairs[t].1.clone()
                }
            })
            .collect();
        let mask = reduce_mask(&keys, i, bits, padded_bits);
        ep.meter.lock().unwrap().note_prf(bits as u64);
        let masked = tagged.xor(&mask).expect("lengths match");
        payload.extend_from_slice(&pack_value(&masked));
    }
    ep.chan.send(FrameType::OtMsg, &payload)?;
    Ok(())
}

fn reduce_recv(
    ep: &mut Endpoint,
    width: usize,
    elem_bits: usize,
    choice: OtChoice,
    base: BaseOt,
) -> Result<BitString, ProtoError> {
    let bits = log2_exact(width)?;
    let padded_bits = elem_bits + REDUCTION_TAG_BITS;

    let saved_backend = ep.backend;
    ep.backend = base_backend(base);
    let mut keys = Vec::with_capacity(bits);
    for t in 0..bits {
        let bit = (choice.0 >> (bits - 1 - t)) & 1;
        let key = match ep.backend {
            OtBackendKind::Ideal => ideal_recv(ep, 2, ep.k, OtChoice(bit))?,
            OtBackendKind::Group => group_recv(ep, 2, ep.k, OtChoice(bit))?,
            _ => unreachable!(),
        };
        keys.push(key);
    }
    ep.backend = saved_backend;

    let payload = ep.chan.recv_expect(FrameType::OtMsg)?;
    if payload.len() < 8 {
        return Err(OtError::BadMessage("short reduction payload").into());
    }
    let w = u32::from_le_bytes(payload[..4].try_into().unwrap()) as usize;
    let eb = u32::from_le_bytes(payload[4..8].try_into().unwrap()) as usize;
    if w != width || eb != elem_bits {
        return Err(OtError::ShapeMismatch("reduction payload does not match request").into());
    }
    let stride = stride_bytes(padded_bits);
    if payload.len() != 8 + w * stride {
        return Err(OtError::BadMessage("reduction payload length mismatch").into());
    }
    let slot = &payload[8 + choice.0 * stride..8 + (choice.0 + 1) * stride];
    let masked = unpack_value(slot, padded_bits)?;
    let mask = reduce_mask(&keys, choice.0, bits, padded_bits);
    ep.meter.lock().unwrap().note_prf(bits as u64);
    let tagged = masked.xor(&mask).expect("lengths match");
    let tag = tagged.slice(elem_bits, REDUCTION_TAG_BITS);
    if tag != BitString::zeros(REDUCTION_TAG_BITS) {
        return Err(OtError::IntegrityCheckFailed.into());
    }
    Ok(tagged.slice(0, elem_bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{run_pair, PairConfig, TransportKind};

    fn transfer_once(
        cfg: &PairConfig,
        values: Vec<BitString>,
        j: usize,
    ) -> (BitString, crate::meter::CostMeter, Vec<u8>, Vec<u8>) {
        let width = values.len();
        let elem_bits = values[0].len();
        let out = run_pair(
            cfg,
            move |ep| {
                let input = OtSenderInput::dense(values.clone())?;
                ot_send(ep, &input)
            },
            move |ep| ot_recv(ep, width, elem_bits, OtChoice(j)),
        )
        .unwrap();
        (
            out.bob,
            out.meter_a.merged_with(&out.meter_b),
            out.log_a,
            out.log_b,
        )
    }

    fn u8s(vals: &[u64], bits: usize) -> Vec<BitString> {
        vals.iter().map(|&v| BitString::from_u64(v, bits)).collect()
    }

    #[test]
    fn default_element_length() {
        assert_eq!(default_elem_bits(128, 4), 128);
        assert_eq!(default_elem_bits(8, 1 << 20), 20);
    }

    #[test]
    fn trivial_examples() {
        let cfg = PairConfig::ideal(1);
        let (got, ..) = transfer_once(&cfg, u8s(&[9], 8), 0);
        assert_eq!(got.to_u64(), 9);
        let (got, meter, ..) = transfer_once(&cfg, u8s(&[5, 7, 9, 11], 8), 2);
        assert_eq!(got.to_u64(), 9);
        assert_eq!(meter.ot_census(), vec![(4, 1)]);
    }

    #[test]
    fn correctness_exhaustive_all_backends() {
        let backends = [
            OtBackendKind::Ideal,
            OtBackendKind::Group,
            OtBackendKind::ReduceOt12(BaseOt::Ideal),
            OtBackendKind::ReduceOt12(BaseOt::Group),
        ];
        for backend in backends {
            let widths: &[usize] = if backend == OtBackendKind::ReduceOt12(BaseOt::Group) {
                &[2, 4]
            } else {
                &[1, 2, 4, 8]
            };
            for &w in widths {
                let mut rng = SeededRng::from_u64(w as u64);
                let values: Vec<BitString> =
                    (0..w).map(|_| BitString::random(&mut rng, 8)).collect();
                for j in 0..w {
                    let cfg = PairConfig {
                        transport: TransportKind::Mem,
                        backend,
                        k: 64,
                        seed: 17,
                        record: false,
                    };
                    let (got, ..) = transfer_once(&cfg, values.clone(), j);
                    assert_eq!(got, values[j], "backend {backend:?} w={w} j={j}");
                }
            }
        }
    }

    #[test]
    fn non_power_of_two_width_group_ok_reduction_err() {
        let values = u8s(&[1, 2, 3], 4);
        let cfg = PairConfig {
            transport: TransportKind::Mem,
            backend: OtBackendKind::Group,
            k: 64,
            seed: 3,
            record: false,
        };
        let (got, ..) = transfer_once(&cfg, values.clone(), 2);
        assert_eq!(got.to_u64(), 3);

        let cfg = PairConfig {
            transport: TransportKind::Mem,
            backend: OtBackendKind::ReduceOt12(BaseOt::Ideal),
            k: 64,
            seed: 3,
            record: false,
        };
        let res = run_pair(
            &cfg,
            move |ep| {
                let input = OtSenderInput::dense(values.clone())?;
                ot_send(ep, &input)
            },
            move |ep| ot_recv(ep, 3, 4, OtChoice(2)),
        );
        assert!(res.is_err());
    }

    #[test]
    fn reduction_meters_log_w_base_ots() {
        for (w, expect) in [(2usize, 1u64), (4, 2), (8, 3)] {
            let mut rng = SeededRng::from_u64(5);
            let values: Vec<BitString> = (0..w).map(|_| BitString::random(&mut rng, 8)).collect();
            let cfg = PairConfig {
                transport: TransportKind::Mem,
                backend: OtBackendKind::ReduceOt12(BaseOt::Ideal),
                k: 64,
                seed: 9,
                record: false,
            };
            let (_, meter, ..) = transfer_once(&cfg, values, w - 1);
            assert_eq!(meter.ot_census(), vec![(2, expect)]);
        }
    }

    #[test]
    fn ideal_sender_transcript_identical_across_choices() {
        // the sender's view: bytes received over the channel. With the ideal
        // dealer nothing crosses the channel at all.
        let mut rng = SeededRng::from_u64(2);
        let values: Vec<BitString> = (0..4).map(|_| BitString::random(&mut rng, 8)).collect();
        let mut transcripts = Vec::new();
        for j in 0..4 {
            let cfg = PairConfig {
                record: true,
                ..PairConfig::ideal(7)
            };
            let (_, _, log_a, _) = transfer_once(&cfg, values.clone(), j);
            transcripts.push(log_a);
        }
        assert!(transcripts.iter().all(|t| t == &transcripts[0]));
        assert!(transcripts[0].is_empty());
    }

    #[test]
    fn group_chooser_privacy_marginals() {
        // sender-side transcript over many runs must not distinguish the
        // chooser picking 0 from picking w-1 at 4 sigma per byte and bit
        let w = 4usize;
        let trials = 2000usize;
        let mut logs0: Vec<Vec<u8>> = Vec::new();
        let mut logs1: Vec<Vec<u8>> = Vec::new();
        for t in 0..trials {
            for (j, bucket) in [(0usize, &mut logs0), (w - 1, &mut logs1)] {
                let cfg = PairConfig {
                    transport: TransportKind::Mem,
                    backend: OtBackendKind::Group,
                    k: 64,
                    seed: 1000 + t as u64,
                    record: true,
                };
                let mut rng = SeededRng::from_u64(t as u64);
                let values: Vec<BitString> =
                    (0..w).map(|_| BitString::random(&mut rng, 8)).collect();
                let (_, _, log_a, _) = transfer_once(&cfg, values, j);
                bucket.push(log_a);
            }
        }
        let len = logs0[0].len();
        assert!(logs0.iter().chain(&logs1).all(|l| l.len() == len));
        for pos in 0..len {
            for bit in 0..8 {
                let c0 = logs0.iter().filter(|l| (l[pos] >> bit) & 1 == 1).count() as f64;
                let c1 = logs1.iter().filter(|l| (l[pos] >> bit) & 1 == 1).count() as f64;
                let n = trials as f64;
                let p = (c0 + c1) / (2.0 * n);
                if p == 0.0 || p == 1.0 {
                    continue;
                }
                let z = (c0 - c1).abs() / (p * (1.0 - p) * 2.0 * n).sqrt();
                assert!(z < 4.0, "byte {pos} bit {bit}: z={z:.2}");
            }
        }
    }

    #[test]
    fn reduction_wrong_slot_fails_tag() {
        // decrypting any slot other than the chosen one with the chooser's
        // derived keys must trip the integrity tag, for every (w <= 4, j, i)
        for w in [2usize, 4] {
            let bits = log2_exact(w).unwrap();
            for j in 0..w {
                let mut rng = SeededRng::from_u64((w * 10 + j) as u64);
                let k = 64;
                let elem_bits = 8;
                let padded = elem_bits + REDUCTION_TAG_BITS;
                let key_pairs: Vec<(BitString, BitString)> = (0..bits)
                    .map(|_| {
                        (
                            BitString::random(&mut rng, k),
                            BitString::random(&mut rng, k),
                        )
                    })
                    .collect();
                let values: Vec<BitString> = (0..w)
                    .map(|_| BitString::random(&mut rng, elem_bits))
                    .collect();
                let masked: Vec<BitString> = (0..w)
                    .map(|i| {
                        let keys: Vec<BitString> = (0..bits)
                            .map(|t| {
                                let bit = (i >> (bits - 1 - t)) & 1;
                                if bit == 0 {
                                    key_pairs[t].0.clone()
                                } else {
                                    key_pairs[t].1.clone()
                                }
                            })
                            .collect();
                        values[i]
                            .concat(&BitString::zeros(REDUCTION_TAG_BITS))
                            .xor(&reduce_mask(&keys, i, bits, padded))
                            .unwrap()
                    })
                    .collect();
                // chooser's held keys for choice j
                let held: Vec<BitString> = (0..bits)
                    .map(|t| {
                        let bit = (j >> (bits - 1 - t)) & 1;
                        if bit == 0 {
                            key_pairs[t].0.clone()
                        } else {
                            key_pairs[t].1.clone()
                        }
                    })
                    .collect();
                for i in 0..w {
                    let opened = masked[i].xor(&reduce_mask(&held, i, bits, padded)).unwrap();
                    let tag_ok = opened.slice(elem_bits, REDUCTION_TAG_BITS)
                        == BitString::zeros(REDUCTION_TAG_BITS);
                    if i == j {
                        assert!(tag_ok, "w={w} j={j}: correct slot must verify");
                        assert_eq!(opened.slice(0, elem_bits), values[i]);
                    } else {
                        assert!(!tag_ok, "w={w} j={j} i={i}: wrong slot must fail the tag");
                    }
                }
            }
        }
    }

    #[test]
    fn tcp_transport_matches_mem_bytes() {
        let values = u8s(&[3, 1, 4, 1], 8);
        let run = |transport| {
            let cfg = PairConfig {
                transport,
                backend: OtBackendKind::Group,
                k: 64,
                seed: 11,
                record: false,
            };
            let (got, meter, ..) = transfer_once(&cfg, values.clone(), 2);
            (got, meter.bytes_sent, meter.ot_census())
        };
        let (v1, b1, c1) = run(TransportKind::Mem);
        let (v2, b2, c2) = run(TransportKind::Tcp);
        assert_eq!(v1.to_u64(), 4);
        assert_eq!(v1, v2);
        assert_eq!(b1, b2);
        assert_eq!(c1, c2);
    }
}
