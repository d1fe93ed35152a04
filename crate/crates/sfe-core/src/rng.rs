//! Seeded, replayable randomness.
//!
//! Every random choice a party makes flows through a [`SeededRng`], so a
//! protocol run is a deterministic function of the run seed and the messages
//! received. The stream is SHA-256 in counter mode over the seed.

use sha2::{Digest, Sha256};

/// Security parameter in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecurityParam(pub usize);

impl SecurityParam {
    /// Minimum accepted by real (group / reduction) backends.
    pub const MIN_REAL: usize = 64;

    /// Validates `k` for a real backend: at least 64 bits.
    pub fn for_real_backend(k: usize) -> Result<SecurityParam, String> {
        if k < Self::MIN_REAL {
            Err(format!(
                "security parameter {k} below minimum {}",
                Self::MIN_REAL
            ))
        } else {
            Ok(SecurityParam(k))
        }
    }

    /// Validates `k` for ideal/test backends: any positive value.
    pub fn for_ideal_backend(k: usize) -> Result<SecurityParam, String> {
        if k == 0 {
            Err("security parameter must be positive".into())
        } else {
            Ok(SecurityParam(k))
        }
    }
}

/// Deterministic random stream: identical (seed, counter) gives identical
/// output, across runs and processes.
#[derive(Debug, Clone)]
pub struct SeededRng {
    key: [u8; 32],
    counter: u64,
    buf: [u8; 32],
    used: usize,
}

impl SeededRng {
    /// Seeds from raw bytes (hashed down to the internal key).
    pub fn from_seed_bytes(seed: &[u8]) -> Self {
        let mut h = Sha256::new();
        h.update(b"sfe.rng.seed");
        h.update((seed.len() as u64).to_le_bytes());
        h.update(seed);
        SeededRng {
            key: h.finalize().into(),
            counter: 0,
            buf: [0u8; 32],
            used: 32,
        }
    }

    /// Seeds from a `u64`, the form used by the CLI.
    pub fn from_u64(seed: u64) -> Self {
        Self::from_seed_bytes(&seed.to_le_bytes())
    }

    /// A child rng whose stream is independent of the parent's for distinct
    /// labels. Used to give each party, trial and subsystem its own stream.
    pub fn derive(&self, label: &str) -> SeededRng {
        let mut h = Sha256::new();
        h.update(b"sfe.rng.derive");
        h.update(self.key);
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        SeededRng {
            key: h.finalize().into(),
            counter: 0,
            buf: [0u8; 32],
            used: 32,
        }
    }

    /// A child rng indexed by a number, e.g. per-trial streams.
    pub fn derive_indexed(&self, label: &str, index: u64) -> SeededRng {
        self.derive(&format!("{label}.{index}"))
    }

    fn refill(&mut self) {
        let mut h = Sha256::new();
        h.update(b"sfe.rng.block");
        h.update(self.key);
        h.update(self.counter.to_le_bytes());
        self.buf = h.finalize().into();
        self.counter += 1;
        self.used = 0;
    }

    /// Fills `out` with the next stream bytes.
    pub fn fill_bytes(&mut self, out: &mut [u8]) {
        for byte in out.iter_mut() {
            if self.used == 32 {
                self.refill();
            }
            *byte = self.buf[self.used];
            self.used += 1;
        }
    }

    /// Next 8 stream bytes as a `u64`.
    pub fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.fill_bytes(&mut b);
        u64::from_le_bytes(b)
    }

    /// Uniform value in `[0, bound)` by rejection sampling.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        if bound.is_power_of_two() {
            return self.next_u64() & (bound - 1);
        }
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Next single bit.
    pub fn next_bool(&mut self) -> bool {
        let mut b = [0u8; 1];
        self.fill_bytes(&mut b);
        b[0] & 1 == 1
    }
}
