//! Randomized protocols: the revealed-seed derandomization and the
//! sampled-strings randomness reduction.
//!
//! The revealed-seed transform takes a family of programs parameterized by
//! a public random string. Alice samples a short seed, sends it in the
//! clear, both parties expand it and compile the induced deterministic
//! program — total overhead one `k`-bit message. The sampled-strings
//! transform replaces a protocol's randomness by a table of `t` pre-drawn
//! strings and a uniform choice among them, trading a small statistical
//! distance for `log t` random bits per run.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bits::BitString;
use crate::bp::BranchingProgram;
use crate::cc::CompileOpts;
use crate::channel::FrameType;
use crate::exec::{Endpoint, ProtoError};
use crate::prf::prg_expand;
use crate::rng::SeededRng;

/// A family of programs indexed by a public random string.
/// Shared program builder indexed by the public random string.
pub type BpBuilderFn<X, Y> = Arc<dyn Fn(&BitString) -> BranchingProgram<X, Y> + Send + Sync>;

/// A family of programs indexed by a public random string.
#[derive(Clone)]
pub struct RandomizedBpFamily<X, Y> {
    /// Bits of public randomness the family consumes.
    pub rand_bits: usize,
    /// Builds the deterministic program for a given random string.
    pub build: BpBuilderFn<X, Y>,
}

impl<X, Y> RandomizedBpFamily<X, Y> {
    /// Wraps a builder.
    pub fn new(
        rand_bits: usize,
        build: impl Fn(&BitString) -> BranchingProgram<X, Y> + Send + Sync + 'static,
    ) -> Self {
        RandomizedBpFamily {
            rand_bits,
            build: Arc::new(build),
        }
    }

    /// The deterministic program induced by expanding `seed`.
    pub fn instantiate(&self, seed: &BitString) -> BranchingProgram<X, Y> {
        let r = prg_expand(seed, self.rand_bits);
        (self.build)(&r)
    }
}

/// Alice's side of the revealed-seed transform: samples a `k`-bit seed,
/// sends it, and compiles the induced program. Returns her output share.
pub fn run_derandomized_alice<X, Y>(
    ep: &mut Endpoint,
    family: &RandomizedBpFamily<X, Y>,
    x: &X,
    opts: &CompileOpts,
) -> Result<BitString, ProtoError>
where
    X: Clone + Send + Sync + 'static,
    Y: 'static,
{
    let seed = BitString::random(&mut ep.rng, ep.k);
    ep.chan.send(FrameType::Seed, seed.as_raw())?;
    {
        let mut meter = ep.meter.lock().unwrap();
        meter.note_rounds(1);
        meter.note_prg_bits(family.rand_bits as u64);
    }
    let bp = family.instantiate(&seed);
    crate::bp::compile_and_run_bp_alice(ep, &bp, x, opts)
}

/// Bob's side of the revealed-seed transform.
pub fn run_derandomized_bob<X, Y>(
    ep: &mut Endpoint,
    family: &RandomizedBpFamily<X, Y>,
    y: &Y,
    opts: &CompileOpts,
) -> Result<BitString, ProtoError>
where
    X: 'static,
    Y: Clone + Send + Sync + 'static,
{
    let raw = ep.chan.recv_expect(FrameType::Seed)?;
    if raw.len() != ep.k.div_ceil(8) {
        return Err(ProtoError::Setup(format!(
            "seed message has {} bytes, expected {}",
            raw.len(),
            ep.k.div_ceil(8)
        )));
    }
    let mut wire = (ep.k as u32).to_le_bytes().to_vec();
    wire.extend_from_slice(&raw);
    let seed = BitString::from_wire(&wire)?;
    {
        let mut meter = ep.meter.lock().unwrap();
        meter.note_rounds(1);
        meter.note_prg_bits(family.rand_bits as u64);
    }
    let bp = family.instantiate(&seed);
    crate::bp::compile_and_run_bp_bob(ep, &bp, y, opts)
}

/// A public-coin randomized protocol as a black box: a deterministic
/// outcome for every `(x, y, r)`.
/// Shared outcome callback of a public-coin protocol.
pub type CoinOutcomeFn<X, Y> = Arc<dyn Fn(&X, &Y, &BitString) -> u64 + Send + Sync>;

/// A public-coin randomized protocol as a black box: a deterministic
/// outcome for every `(x, y, r)`.
#[derive(Clone)]
pub struct PublicCoinProtocol<X, Y> {
    /// Bits of shared randomness per run.
    pub rand_bits: usize,
    eval: CoinOutcomeFn<X, Y>,
}

impl<X, Y> PublicCoinProtocol<X, Y> {
    /// Wraps an outcome function.
    pub fn new(
        rand_bits: usize,
        eval: impl Fn(&X, &Y, &BitString) -> u64 + Send + Sync + 'static,
    ) -> Self {
        PublicCoinProtocol {
            rand_bits,
            eval: Arc::new(eval),
        }
    }

    /// Outcome under a specific random string.
    pub fn run_with(&self, x: &X, y: &Y, r: &BitString) -> u64 {
        (self.eval)(x, y, r)
    }

    /// Exact output distribution over all `2^rand_bits` strings; only
    /// sensible for small `rand_bits`.
    pub fn output_distribution(&self, x: &X, y: &Y) -> BTreeMap<u64, f64> {
        assert!(self.rand_bits <= 24, "enumeration only at desk scale");
        let total = 1u64 << self.rand_bits;
        let mut dist = BTreeMap::new();
        for rv in 0..total {
            let r = BitString::from_u64(rv, self.rand_bits);
            *dist.entry(self.run_with(x, y, &r)).or_insert(0.0) += 1.0 / total as f64;
        }
        dist
    }
}

/// A protocol transformed to use a fixed table of sampled random strings.
#[derive(Clone)]
pub struct SampledProtocol<X, Y> {
    /// The protocol being emulated.
    pub base: PublicCoinProtocol<X, Y>,
    /// The pre-drawn strings `r_1 ... r_t`.
    pub strings: Vec<BitString>,
}

/// Draws `t` random strings for `base`; the transformed protocol picks one
/// uniformly per run, so it needs only `log2 t` fresh random bits.
pub fn reduce_randomness<X, Y>(
    base: &PublicCoinProtocol<X, Y>,
    t: usize,
    rng: &mut SeededRng,
) -> SampledProtocol<X, Y>
where
    X: Clone,
    Y: Clone,
{
    assert!(t >= 1);
    let strings = (0..t)
        .map(|_| BitString::random(rng, base.rand_bits))
        .collect();
    SampledProtocol {
        base: base.clone(),
        strings,
    }
}

impl<X, Y> SampledProtocol<X, Y> {
    /// Runs with the `i`-th sampled string.
    pub fn run_with_choice(&self, x: &X, y: &Y, i: usize) -> u64 {
        self.base.run_with(x, y, &self.strings[i])
    }

    /// Runs with a fresh uniform choice of string.
    pub fn run(&self, x: &X, y: &Y, rng: &mut SeededRng) -> u64 {
        let i = rng.next_below(self.strings.len() as u64) as usize;
        self.run_with_choice(x, y, i)
    }

    /// Exact output distribution: uniform over the sampled strings.
    pub fn output_distribution(&self, x: &X, y: &Y) -> BTreeMap<u64, f64> {
        let mut dist = BTreeMap::new();
        let t = self.strings.len() as f64;
        for r in &self.strings {
            *dist.entry(self.base.run_with(x, y, r)).or_insert(0.0) += 1.0 / t;
        }
        dist
    }
}

/// Total-variation distance between two finite distributions.
pub fn statistical_distance(p: &BTreeMap<u64, f64>, q: &BTreeMap<u64, f64>) -> f64 {
    let keys: std::collections::BTreeSet<u64> = p.keys().chain(q.keys()).copied().collect();
    0.5 * keys
        .into_iter()
        .map(|z| (p.get(&z).unwrap_or(&0.0) - q.get(&z).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::programs::{bp_millionaires, compare_oracle, CompareOutcome};
    use crate::bp::run_plaintext_bp;
    use crate::exec::{run_pair, PairConfig};

    /// The sampled-randomness desk protocol: equality testing by a random
    /// inner product, 1 output bit, 3 random bits.
    fn inner_product_protocol() -> PublicCoinProtocol<BitString, BitString> {
        PublicCoinProtocol::new(3, |x: &BitString, y: &BitString, r: &BitString| {
            let d = x.xor(y).unwrap();
            let dot = (0..3).filter(|&i| d.bit(i) && r.bit(i)).count() % 2;
            u64::from(dot == 0)
        })
    }

    #[test]
    fn derandomized_run_is_deterministic_and_meters_seed() {
        let family = RandomizedBpFamily::new(128, |r: &BitString| {
            bp_millionaires(8, 1e-6, &r.slice(0, 64))
        });
        let run = |seed: u64| {
            let x = BitString::from_u64(99, 8);
            let y = BitString::from_u64(200, 8);
            let (fa, fb) = (family.clone(), family.clone());
            let cfg = PairConfig {
                record: true,
                ..PairConfig::ideal(seed)
            };
            run_pair(
                &cfg,
                move |ep| run_derandomized_alice(ep, &fa, &x, &CompileOpts::default()),
                move |ep| run_derandomized_bob(ep, &fb, &y, &CompileOpts::default()),
            )
            .unwrap()
        };
        let out1 = run(7);
        let out2 = run(7);
        assert_eq!(
            out1.alice, out2.alice,
            "same config must replay identically"
        );
        assert_eq!(out1.bob, out2.bob);
        // byte-identical transcripts, not just outputs
        assert_eq!(out1.log_a, out2.log_a);
        assert_eq!(out1.log_b, out2.log_b);
        let v = out1.alice.xor(&out1.bob).unwrap().to_u64();
        assert_eq!(CompareOutcome::from_code(v), Some(CompareOutcome::YLarger));
        // the revealed seed is the only Seed-frame traffic: exactly k bits
        assert_eq!(
            out1.meter_a.bytes_by_type.get(&(FrameType::Seed as u8)),
            Some(&16u64)
        );
        assert_eq!(out1.meter_a.prg_bits, 128);
    }

    #[test]
    fn derandomized_millionaires_error_rate() {
        // 300 seeded trials, random pairs; the digest width targets error
        // well below 1/300 so zero failures are expected
        let family = RandomizedBpFamily::new(128, |r: &BitString| {
            bp_millionaires(16, 2f64.powi(-20), &r.slice(0, 64))
        });
        let mut rng = SeededRng::from_u64(22);
        for _ in 0..300 {
            let seed = BitString::random(&mut rng, 64);
            let bp = family.instantiate(&seed);
            let x = BitString::from_u64(rng.next_below(1 << 16), 16);
            let y = BitString::from_u64(rng.next_below(1 << 16), 16);
            let got = CompareOutcome::from_code(run_plaintext_bp(&bp, &x, &y)).unwrap();
            assert_eq!(got, compare_oracle(&x, &y));
        }
    }

    #[test]
    fn derandomized_distribution_matches_base() {
        // the transformed protocol draws a fresh seed per run; over 10^4
        // trials its outcome distribution must sit within 2*eps (plus
        // sampling noise) of the base protocol run on true randomness
        let n = 8usize;
        let eps = 2f64.powi(-20);
        let family = RandomizedBpFamily::new(128, move |r: &BitString| {
            bp_millionaires(n, eps, &r.slice(0, 64))
        });
        let x = BitString::from_u64(0b1011_0010, 8);
        let y = BitString::from_u64(0b1011_0100, 8);
        let trials = 10_000u64;
        let mut rng = SeededRng::from_u64(41);
        let mut base_counts = std::collections::BTreeMap::new();
        let mut derand_counts = std::collections::BTreeMap::new();
        for _ in 0..trials {
            // base: labels built from true protocol randomness
            let r = BitString::random(&mut rng, 128);
            let out = run_plaintext_bp(&(family.build)(&r), &x, &y);
            *base_counts.entry(out).or_insert(0.0) += 1.0 / trials as f64;
            // transformed: a short revealed seed expanded by the generator
            let seed = BitString::random(&mut rng, 64);
            let out = run_plaintext_bp(&family.instantiate(&seed), &x, &y);
            *derand_counts.entry(out).or_insert(0.0) += 1.0 / trials as f64;
        }
        let tv = statistical_distance(&base_counts, &derand_counts);
        // 2*eps is negligible here; the observable budget is sampling noise
        assert!(tv <= 2.0 * eps + 0.02, "total variation {tv}");
        // and both distributions sit on the correct outcome
        assert!(base_counts.get(&CompareOutcome::YLarger.code()).copied().unwrap_or(0.0) > 0.99);
    }

    #[test]
    fn reduce_randomness_t1_is_deterministic() {
        let base = inner_product_protocol();
        let mut rng = SeededRng::from_u64(1);
        let sampled = reduce_randomness(&base, 1, &mut rng);
        let x = BitString::from_u64(5, 3);
        let y = BitString::from_u64(2, 3);
        let first = sampled.run(&x, &y, &mut rng);
        for _ in 0..10 {
            assert_eq!(sampled.run(&x, &y, &mut rng), first);
        }
    }

    #[test]
    fn sampled_support_is_subset_of_base() {
        let base = inner_product_protocol();
        let mut rng = SeededRng::from_u64(2);
        let sampled = reduce_randomness(&base, 16, &mut rng);
        for xv in 0..8u64 {
            for yv in 0..8u64 {
                let x = BitString::from_u64(xv, 3);
                let y = BitString::from_u64(yv, 3);
                let base_dist = base.output_distribution(&x, &y);
                let s_dist = sampled.output_distribution(&x, &y);
                for z in s_dist.keys() {
                    assert!(base_dist.contains_key(z), "support escaped");
                }
            }
        }
    }

    #[test]
    fn sampled_distribution_close_to_base() {
        // the desk check: n=3, one output bit, t=256 sampled strings;
        // exhaustively computed statistical distance stays within 0.1
        let base = inner_product_protocol();
        let mut rng = SeededRng::from_u64(3);
        let sampled = reduce_randomness(&base, 256, &mut rng);
        let mut worst: f64 = 0.0;
        for xv in 0..8u64 {
            for yv in 0..8u64 {
                let x = BitString::from_u64(xv, 3);
                let y = BitString::from_u64(yv, 3);
                let d = statistical_distance(
                    &base.output_distribution(&x, &y),
                    &sampled.output_distribution(&x, &y),
                );
                worst = worst.max(d);
            }
        }
        assert!(worst <= 0.1, "statistical distance {worst} above 0.1");
    }
}
