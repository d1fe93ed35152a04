//! Bit-level values and XOR-additive secret shares.
//!
//! A [`BitString`] stores an ordered sequence of bits, most significant
//! first: bit 0 is the most significant bit of byte 0. Index and tree-path
//! decompositions throughout the crate are big-endian, so bit 0 of an index
//! is the first edge taken from the root.

use thiserror::Error;

use crate::rng::SeededRng;

/// Errors raised by bit-string operations on malformed inputs.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    /// XOR of two strings with different lengths; usually means shares of
    /// different values were combined.
    #[error("length mismatch: {left} vs {right} bits")]
    LengthMismatch {
        /// Bit length of the left operand.
        left: usize,
        /// Bit length of the right operand.
        right: usize,
    },
    /// A serialized bit string had trailing padding bits that were not zero.
    #[error("non-zero padding bits in serialized bit string")]
    DirtyPadding,
    /// A serialized bit string was truncated or had an inconsistent header.
    #[error("malformed serialized bit string: {0}")]
    Malformed(&'static str),
    /// Shares passed to reconstruction carried the same party tag.
    #[error("cannot reconstruct from two shares held by the same party")]
    SameRole,
}

/// Party tag: Alice is `A`, Bob is `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Alice, the party sending the first message of a protocol.
    A,
    /// Bob.
    B,
}

impl Role {
    /// The other party.
    pub fn other(self) -> Role {
        match self {
            Role::A => Role::B,
            Role::B => Role::A,
        }
    }

    /// Lowercase name used in reports and rng derivation labels.
    pub fn name(self) -> &'static str {
        match self {
            Role::A => "alice",
            Role::B => "bob",
        }
    }
}

/// An immutable string of bits with explicit length.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    bytes: Vec<u8>,
}

impl BitString {
    /// The all-zero string of `len` bits.
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            bytes: vec![0u8; len.div_ceil(8)],
        }
    }

    /// Builds a string from explicit bits, `bits[0]` becoming bit 0 (MSB).
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = BitString::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set_bit(i, b);
        }
        s
    }

    /// Encodes `value` big-endian in exactly `len` bits.
    ///
    /// `value` must fit, i.e. `value < 2^len`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(
            len >= 64 || value < (1u64 << len),
            "value {value} does not fit in {len} bits"
        );
        let mut s = BitString::zeros(len);
        for i in 0..len.min(64) {
            // bit (len-1) is the least significant
            let shift = len - 1 - i;
            if shift < 64 && (value >> shift) & 1 == 1 {
                s.set_bit(i, true);
            }
        }
        s
    }

    /// Interprets the string as a big-endian integer; requires `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "bit string too long for u64");
        let mut v = 0u64;
        for i in 0..self.len {
            v = (v << 1) | u64::from(self.bit(i));
        }
        v
    }

    /// Number of bits.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when the string holds no bits.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit `i`, counting from the most significant end.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    /// Sets bit `i`.
    pub fn set_bit(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u8 << (7 - i % 8);
        if value {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    /// Bitwise XOR; errors unless both strings have the same length.
    pub fn xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        if self.len != other.len {
            return Err(BitsError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitString {
            len: self.len,
            bytes,
        })
    }

    /// Concatenation, `self` bits first.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = BitString::zeros(self.len + other.len);
        for i in 0..self.len {
            out.set_bit(i, self.bit(i));
        }
        for i in 0..other.len {
            out.set_bit(self.len + i, other.bit(i));
        }
        out
    }

    /// The sub-string of bits `[start, start+len)`.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = BitString::zeros(len);
        for i in 0..len {
            out.set_bit(i, self.bit(start + i));
        }
        out
    }

    /// A uniformly random string of `len` bits drawn from `rng`.
    pub fn random(rng: &mut SeededRng, len: usize) -> BitString {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        let mut s = BitString { len, bytes };
        s.clear_padding();
        s
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> u32 {
        self.bytes.iter().map(|b| b.count_ones()).sum()
    }

    /// Raw packed bytes (padding bits are zero).
    pub fn as_raw(&self) -> &[u8] {
        &self.bytes
    }

    /// Canonical wire form: 4-byte little-endian bit count, then
    /// `ceil(len/8)` payload bytes with zero padding bits.
    pub fn to_wire(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.bytes.len());
        out.extend_from_slice(&(self.len as u32).to_le_bytes());
        out.extend_from_slice(&self.bytes);
        out
    }

    /// Parses the canonical wire form, rejecting dirty padding.
    pub fn from_wire(data: &[u8]) -> Result<BitString, BitsError> {
        if data.len() < 4 {
            return Err(BitsError::Malformed("missing length header"));
        }
        let len = u32::from_le_bytes(data[..4].try_into().unwrap()) as usize;
        let payload = &data[4..];
        if payload.len() != len.div_ceil(8) {
            return Err(BitsError::Malformed("payload length mismatch"));
        }
        let s = BitString {
            len,
            bytes: payload.to_vec(),
        };
        if !len.is_multiple_of(8) {
            let last = s.bytes[s.bytes.len() - 1];
            if last & ((1u8 << (8 - len % 8)) - 1) != 0 {
                return Err(BitsError::DirtyPadding);
            }
        }
        Ok(s)
    }

    /// Binary rendering, e.g. `"0110"`.
    pub fn to_bin_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect()
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_bin(text: &str) -> Result<BitString, BitsError> {
        let mut bits = Vec::with_capacity(text.len());
        for ch in text.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(BitsError::Malformed("expected only 0/1 characters")),
            }
        }
        Ok(BitString::from_bits(&bits))
    }

    fn clear_padding(&mut self) {
        if !self.len.is_multiple_of(8) && !self.bytes.is_empty() {
            let keep = !((1u8 << (8 - self.len % 8)) - 1);
            let last = self.bytes.len() - 1;
            self.bytes[last] &= keep;
        }
    }
}

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitString({})", self.to_bin_string())
    }
}

/// Bitwise XOR of two equal-length strings.
///
/// This is both the share-reconstruction rule (`share_A ⊕ share_B`) and the
/// plain bitwise exclusive-or used everywhere else.
pub fn xor_reconstruct(a: &BitString, b: &BitString) -> Result<BitString, BitsError> {
    a.xor(b)
}

/// One party's XOR-additive share of a value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorShare {
    /// The share itself; uniformly distributed for a fresh mask.
    pub share: BitString,
    /// Who holds it.
    pub role: Role,
}

impl XorShare {
    /// Wraps a share for `role`.
    pub fn new(share: BitString, role: Role) -> Self {
        XorShare { share, role }
    }

    /// Splits `value` into two shares using a fresh uniform mask.
    pub fn split(value: &BitString, rng: &mut SeededRng) -> (XorShare, XorShare) {
        let mask = BitString::random(rng, value.len());
        let other = value.xor(&mask).expect("equal lengths");
        (XorShare::new(other, Role::A), XorShare::new(mask, Role::B))
    }

    /// Recombines two shares held by distinct parties.
    pub fn reconstruct(a: &XorShare, b: &XorShare) -> Result<BitString, BitsError> {
        if a.role == b.role {
            return Err(BitsError::SameRole);
        }
        a.share.xor(&b.share)
    }
}
