//! Pseudo-random generator and pseudo-random function.
//!
//! Both are instantiated from SHA-256 in counter mode and are treated as
//! black boxes by the protocols: `prg_expand` stretches a short seed,
//! `prf_eval` is a keyed function with caller-chosen output length.

use sha2::{Digest, Sha256};

use crate::bits::BitString;

fn counter_stream(domain: &[u8], key: &BitString, input: &[u8], out_bits: usize) -> BitString {
    let mut bytes = Vec::with_capacity(out_bits.div_ceil(8));
    let mut counter = 0u64;
    while bytes.len() * 8 < out_bits {
        let mut h = Sha256::new();
        h.update(domain);
        h.update((key.len() as u64).to_le_bytes());
        h.update(key.as_raw());
        h.update((input.len() as u64).to_le_bytes());
        h.update(input);
        h.update(counter.to_le_bytes());
        bytes.extend_from_slice(&h.finalize());
        counter += 1;
    }
    bytes.truncate(out_bits.div_ceil(8));
    if !out_bits.is_multiple_of(8) {
        let last = bytes.len() - 1;
        bytes[last] &= !((1u8 << (8 - out_bits % 8)) - 1);
    }
    BitString::from_wire(&[(out_bits as u32).to_le_bytes().as_slice(), &bytes].concat())
        .expect("constructed wire form is canonical")
}

/// Expands `seed` to exactly `out_len_bits` pseudo-random bits.
///
/// Deterministic in the seed; two calls with the same seed give identical
/// output regardless of process or platform.
pub fn prg_expand(seed: &BitString, out_len_bits: usize) -> BitString {
    assert!(out_len_bits >= 1, "output length must be at least one bit");
    counter_stream(b"sfe.prg", seed, &[], out_len_bits)
}

/// Evaluates the keyed pseudo-random function `F_key(input)` with an output
/// of exactly `out_len_bits` bits.
pub fn prf_eval(key: &BitString, input: &BitString, out_len_bits: usize) -> BitString {
    counter_stream(b"sfe.prf", key, &input.to_wire(), out_len_bits)
}
