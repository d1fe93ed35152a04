//! Statistical privacy smoke tests.
//!
//! Definition-style privacy says a party's view is simulatable from its
//! own input and output. The operational check here: fix one party's
//! input and the protocol output, vary the counterpart's input between two
//! variants, and run many seeded trials of each. The examined party's
//! received payloads (channel frames plus ideal-OT deliveries) are then
//! compared position by position: if any byte's bit frequency separates
//! the two variants at four standard deviations, the view leaked something
//! the output does not explain.
//!
//! A deliberately broken pointer-jumping variant that skips the fresh
//! entry mask is included as the negative control; it reveals the
//! intermediate index in the clear and must fail the same check.

use crate::bits::BitString;
use crate::exec::{run_pair, PairConfig, ProtoError};
use crate::garbled::{distance2_alice_circuit, distance2_bob_circuit, garbled_alice, garbled_bob};
use crate::ind::{gind_alice, gind_bob, GindShape, IndexedList};
use crate::lut::lut_eval;
use crate::ot::{ot_recv, ot_send, OtChoice, OtSenderInput};
use serde::Serialize;

/// Protocols wired into the smoke harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmokeProtocol {
    /// Two-level pointer jumping, Alice's view examined.
    Gind,
    /// The broken variant leaking the intermediate index; must fail.
    GindLeaky,
    /// A single shared table read.
    LutEval,
    /// The garbled two-bit distance protocol.
    Garbled,
}

impl SmokeProtocol {
    /// Parses a protocol name.
    pub fn parse(name: &str) -> Option<SmokeProtocol> {
        match name {
            "gind" => Some(SmokeProtocol::Gind),
            "gind-leaky" => Some(SmokeProtocol::GindLeaky),
            "lut" => Some(SmokeProtocol::LutEval),
            "garbled" => Some(SmokeProtocol::Garbled),
            _ => None,
        }
    }
}

/// Smoke verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SmokeVerdict {
    /// No byte position distinguishes the variants at four sigma.
    Pass,
    /// At least one position does.
    Fail,
    /// Zero trials prove nothing.
    Inconclusive,
}

/// Smoke outcome with the offending positions, if any.
#[derive(Debug, Clone, Serialize)]
pub struct SmokeReport {
    /// The verdict.
    pub verdict: SmokeVerdict,
    /// Trials per input variant.
    pub trials: usize,
    /// Largest two-sample z-score observed.
    pub worst_z: f64,
    /// `(byte position, bit)` pairs beyond four sigma.
    pub offenders: Vec<(usize, u8)>,
}

fn gind_view(seed: u64, variant: bool, leaky: bool) -> Result<Vec<u8>, ProtoError> {
    // Bob's inner index list varies, Alice's outer list is constant, so
    // the composed value is 5 for both variants; only the intermediate
    // index differs
    let y_list: Vec<u64> = if variant { vec![3, 2] } else { vec![0, 1] };
    let x_list = vec![5u64, 5, 5, 5];
    let cfg = PairConfig {
        record: true,
        ..PairConfig::ideal(seed)
    };
    let shape = GindShape {
        widths: vec![2, 4],
        last_elem_bits: 3,
    };
    if leaky {
        let out = run_pair(
            &cfg,
            move |ep| {
                // level 1 without the entry mask: the delivered value IS the index
                let j1 = ot_recv(ep, 2, 2, OtChoice(0))?;
                let x = IndexedList::from_u64s(&x_list, 3).unwrap();
                crate::ind::ind_sender(ep, &j1, &x)
            },
            move |ep| {
                let plain = OtSenderInput::dense(
                    y_list.iter().map(|&v| BitString::from_u64(v, 2)).collect(),
                )?;
                ot_send(ep, &plain)?;
                crate::ind::ind_chooser(ep, &BitString::zeros(2), 4, 3)
            },
        )?;
        Ok(out.log_a)
    } else {
        let shape_b = shape.clone();
        let out = run_pair(
            &cfg,
            move |ep| {
                let x = IndexedList::from_u64s(&x_list, 3).unwrap();
                gind_alice(ep, &shape, BitString::zeros(1), &[x])
            },
            move |ep| {
                let y = IndexedList::from_u64s(&y_list, 2).unwrap();
                gind_bob(ep, &shape_b, BitString::zeros(1), &[y])
            },
        )?;
        Ok(out.log_a)
    }
}

fn lut_view(seed: u64, variant: bool) -> Result<Vec<u8>, ProtoError> {
    // constant tables pin the output to 6 ^ 9 = 15 while Bob's index share
    // flips between variants
    let j_b = if variant { 3u64 } else { 0 };
    let cfg = PairConfig {
        record: true,
        ..PairConfig::ideal(seed)
    };
    let out = run_pair(
        &cfg,
        move |ep| {
            let table = IndexedList::from_u64s(&[6, 6, 6, 6], 4).unwrap();
            lut_eval(ep, &BitString::from_u64(1, 2), &table)
        },
        move |ep| {
            let table = IndexedList::from_u64s(&[9, 9, 9, 9], 4).unwrap();
            lut_eval(ep, &BitString::from_u64(j_b, 2), &table)
        },
    )?;
    Ok(out.log_a)
}

fn garbled_view(seed: u64, variant: bool) -> Result<Vec<u8>, ProtoError> {
    // x = 00 fixed; y is 01 or 10, either way distance 1
    let y = if variant { 0b10u64 } else { 0b01 };
    let cfg = PairConfig {
        record: true,
        k: 64,
        ..PairConfig::ideal(seed)
    };
    let a = distance2_alice_circuit(&BitString::from_u64(0, 2));
    let b = distance2_bob_circuit(&BitString::from_u64(y, 2));
    let (ac, bc) = (a.clone(), b.clone());
    let out = run_pair(
        &cfg,
        move |ep| garbled_alice(ep, &a, &b, false),
        move |ep| garbled_bob(ep, &bc, &ac, false),
    )?;
    Ok(out.log_a)
}

/// Runs `trials` per input variant and tests per-byte-bit frequency
/// indistinguishability of the examined party's received payloads.
pub fn privacy_smoke(
    protocol: SmokeProtocol,
    trials: usize,
    seed: u64,
) -> Result<SmokeReport, ProtoError> {
    if trials == 0 {
        return Ok(SmokeReport {
            verdict: SmokeVerdict::Inconclusive,
            trials,
            worst_z: 0.0,
            offenders: Vec::new(),
        });
    }
    let view = |variant: bool, t: usize| -> Result<Vec<u8>, ProtoError> {
        let s = seed
            .wrapping_mul(2)
            .wrapping_add(u64::from(variant))
            .wrapping_mul(1_000_003)
            .wrapping_add(t as u64);
        match protocol {
            SmokeProtocol::Gind => gind_view(s, variant, false),
            SmokeProtocol::GindLeaky => gind_view(s, variant, true),
            SmokeProtocol::LutEval => lut_view(s, variant),
            SmokeProtocol::Garbled => garbled_view(s, variant),
        }
    };
    let mut group_a = Vec::with_capacity(trials);
    let mut group_b = Vec::with_capacity(trials);
    for t in 0..trials {
        group_a.push(view(false, t)?);
        group_b.push(view(true, t)?);
    }
    let len = group_a[0].len();
    if group_a.iter().chain(&group_b).any(|v| v.len() != len) {
        // differing view lengths distinguish the variants outright
        return Ok(SmokeReport {
            verdict: SmokeVerdict::Fail,
            trials,
            worst_z: f64::INFINITY,
            offenders: vec![(usize::MAX, 0)],
        });
    }
    let mut worst_z: f64 = 0.0;
    let mut offenders = Vec::new();
    for pos in 0..len {
        for bit in 0..8u8 {
            let c0 = group_a.iter().filter(|v| (v[pos] >> bit) & 1 == 1).count() as f64;
            let c1 = group_b.iter().filter(|v| (v[pos] >> bit) & 1 == 1).count() as f64;
            let n = trials as f64;
            let p = (c0 + c1) / (2.0 * n);
            if p == 0.0 || p == 1.0 {
                continue; // structurally constant position
            }
            let z = (c0 - c1).abs() / (p * (1.0 - p) * 2.0 * n).sqrt();
            if z > worst_z {
                worst_z = z;
            }
            if z > 4.0 {
                offenders.push((pos, bit));
            }
        }
    }
    Ok(SmokeReport {
        verdict: if offenders.is_empty() {
            SmokeVerdict::Pass
        } else {
            SmokeVerdict::Fail
        },
        trials,
        worst_z,
        offenders,
    })
}
