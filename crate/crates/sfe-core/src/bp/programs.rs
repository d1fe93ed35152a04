//! Concrete branching programs: string equality, automaton acceptance,
//! hashed-prefix binary-search comparison (the millionaires program and its
//! first-difference variant), and position-wise inequality.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::bits::BitString;
use crate::bp::BranchingProgram;
use crate::prf::prf_eval;

/// String equality on `nbits`-bit inputs: width 3, cost `2 * nbits`.
///
/// Odd layers hold `{sent-0, sent-1, trap}`, even layers `{live, trap}`;
/// the first disagreement drops the walk into the absorbing trap and the
/// final layer maps live to 1, trap to 0. Layout per input bit:
///
/// ```text
///           x_i = 0        y_i == sent bit
/// live ──┬──────────▶ sent-0 ──────────────▶ live ─ ... ─▶ leaf 1
///        │  x_i = 1              y_i != sent bit
///        └──────────▶ sent-1 ──────┐
///                                  ▼
/// trap ─────────────▶ trap ─────▶ trap ─ ... ─▶ leaf 0
/// ```
pub fn bp_string_equality(nbits: usize) -> BranchingProgram<BitString, BitString> {
    assert!(nbits >= 1);
    let c = 2 * nbits;
    let mut sizes = vec![1u64];
    for layer in 1..=c {
        sizes.push(if layer % 2 == 1 { 3 } else { 2 });
    }
    BranchingProgram::new(
        sizes,
        1,
        move |node, x: &BitString| {
            let i = node.layer / 2;
            if node.layer == 0 {
                u64::from(x.bit(0))
            } else if node.index == 0 {
                u64::from(x.bit(i))
            } else {
                2 // trap rides along
            }
        },
        move |node, y: &BitString| {
            let i = (node.layer - 1) / 2;
            match node.index {
                0 | 1 => u64::from(y.bit(i) != (node.index == 1)),
                _ => 1,
            }
        },
        |leaf| u64::from(leaf == 0),
    )
}

/// A deterministic finite automaton over the binary alphabet; the
/// transition table is Alice's private input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    /// `delta[q][bit]` is the successor state.
    pub delta: Vec<[u64; 2]>,
}

impl Dfa {
    /// Plain acceptance oracle: run `alpha` from state 0.
    pub fn accepts(&self, alpha: &BitString, accept: u64) -> bool {
        let mut q = 0u64;
        for i in 0..alpha.len() {
            q = self.delta[q as usize][usize::from(alpha.bit(i))];
        }
        q == accept
    }
}

/// Acceptance of Bob's `input_len`-bit string by Alice's automaton with
/// `n_states` states. The state count and accepting state are public
/// structure; the transition table stays Alice's input. Width `2·n_states`:
/// Bob's move pairs the current state with his next symbol, Alice's move
/// applies her transition table.
pub fn bp_dfa_accept(
    n_states: usize,
    accept: u64,
    input_len: usize,
) -> BranchingProgram<Dfa, BitString> {
    assert!(n_states >= 1 && input_len >= 1);
    let q = n_states as u64;
    let c = 2 * input_len + 2;
    let mut sizes = vec![1u64];
    for layer in 1..=c {
        if layer % 2 == 1 || layer == c {
            sizes.push(q);
        } else {
            sizes.push(2 * q);
        }
    }
    BranchingProgram::new(
        sizes,
        1,
        move |node, x: &Dfa| {
            if node.layer == 0 {
                0 // enter the start state
            } else {
                let state = node.index / 2;
                let symbol = (node.index % 2) as usize;
                x.delta[state as usize][symbol]
            }
        },
        move |node, y: &BitString| {
            let i = (node.layer - 1) / 2;
            if i < input_len {
                2 * node.index + u64::from(y.bit(i))
            } else {
                node.index // final padding move
            }
        },
        move |leaf| u64::from(leaf == accept),
    )
}

// ----------------------------------------------- binary-search comparison

/// Outcome of the numeric comparison program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOutcome {
    /// Alice's value is larger.
    XLarger,
    /// Bob's value is larger.
    YLarger,
    /// The values are equal.
    Equal,
}

impl CompareOutcome {
    /// Leaf code.
    pub fn code(self) -> u64 {
        match self {
            CompareOutcome::XLarger => 0,
            CompareOutcome::YLarger => 1,
            CompareOutcome::Equal => 2,
        }
    }

    /// Decodes a leaf code.
    pub fn from_code(code: u64) -> Option<CompareOutcome> {
        match code {
            0 => Some(CompareOutcome::XLarger),
            1 => Some(CompareOutcome::YLarger),
            2 => Some(CompareOutcome::Equal),
            _ => None,
        }
    }
}

/// Comparison oracle on big-endian bit strings.
pub fn compare_oracle(x: &BitString, y: &BitString) -> CompareOutcome {
    match x.to_u64().cmp(&y.to_u64()) {
        std::cmp::Ordering::Greater => CompareOutcome::XLarger,
        std::cmp::Ordering::Less => CompareOutcome::YLarger,
        std::cmp::Ordering::Equal => CompareOutcome::Equal,
    }
}

/// First index (from the most significant end) where the strings differ.
pub fn first_diff_oracle(x: &BitString, y: &BitString) -> Option<usize> {
    (0..x.len()).find(|&i| x.bit(i) != y.bit(i))
}

/// Outcome of the first-difference program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstDiffOutcome {
    /// First differing bit position.
    Index(usize),
    /// The inputs were equal, so the promise `x != y` was broken.
    PromiseViolation,
}

#[derive(Clone, Copy)]
enum CompareLeaf {
    Sign,
    FirstDiff,
}

/// Digest width for `steps` equality tests with total error `epsilon`.
pub fn comparison_digest_bits(n_bits: usize, epsilon: f64) -> usize {
    let steps = n_bits.next_power_of_two().trailing_zeros().max(1) as f64;
    (steps / epsilon).log2().ceil() as usize
}

fn ceil_log2(n: usize) -> usize {
    (n.next_power_of_two().trailing_zeros()) as usize
}

/// Binary-search intervals `(lo, hi)` reachable at each step; invariants:
/// the length-`lo` prefixes agree, the length-`hi` prefixes do not.
fn interval_steps(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut steps = vec![vec![(0usize, n)]];
    for _ in 0..ceil_log2(n) {
        let mut next: Vec<(usize, usize)> = steps
            .last()
            .unwrap()
            .iter()
            .flat_map(|&(lo, hi)| {
                if hi - lo <= 1 {
                    vec![(lo, hi)]
                } else {
                    let mid = (lo + hi).div_ceil(2);
                    vec![(lo, mid), (mid, hi)]
                }
            })
            .collect();
        next.sort_unstable();
        next.dedup();
        steps.push(next);
    }
    steps
}

fn tested_len(interval: (usize, usize)) -> usize {
    let (lo, hi) = interval;
    if hi - lo <= 1 {
        0 // settled interval; a dummy always-equal test keeps the shape
    } else {
        (lo + hi).div_ceil(2)
    }
}

type DigestCache = Arc<Mutex<HashMap<(usize, BitString), BitString>>>;

struct DigestFamily {
    keys: Vec<BitString>,
    bits: usize,
    cache: DigestCache,
}

impl DigestFamily {
    fn new(seed: &BitString, n_bits: usize, digest_bits: usize) -> DigestFamily {
        let keys = (0..=n_bits)
            .map(|len| prf_eval(seed, &BitString::from_u64(len as u64, 32), 128))
            .collect();
        DigestFamily {
            keys,
            bits: digest_bits,
            cache: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    fn digest(&self, input: &BitString, len: usize) -> BitString {
        if len == 0 {
            return BitString::zeros(self.bits);
        }
        let key = (len, input.clone());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let d = prf_eval(&self.keys[len], &input.slice(0, len), self.bits);
        self.cache.lock().unwrap().insert(key, d.clone());
        d
    }
}

fn build_comparison_bp(
    n_bits: usize,
    epsilon: f64,
    shared_seed: &BitString,
    leaf_mode: CompareLeaf,
) -> BranchingProgram<BitString, BitString> {
    assert!(n_bits >= 2);
    assert!(
        epsilon > 0.0 && epsilon < 1.0 / n_bits as f64,
        "error bound must be below 1/n"
    );
    let a_bits = comparison_digest_bits(n_bits, epsilon);
    let steps = interval_steps(n_bits);
    let s_count = steps.len() - 1;
    debug_assert!(steps[s_count].iter().all(|&(lo, hi)| hi - lo == 1));
    let finals = steps[s_count].clone();
    let family = Arc::new(DigestFamily::new(shared_seed, n_bits, a_bits));

    // layer sizes: per step, `a_bits` exchanged digest bits; then the final
    // bit exchange resolving the located position
    let c = 2 * a_bits * s_count + 2;
    let mut sizes = vec![1u64];
    #[allow(clippy::needless_range_loop)]
    for s in 0..s_count {
        let i_s = steps[s].len() as u64;
        for t in 0..a_bits {
            if !(s == 0 && t == 0) {
                sizes.push(2 * i_s); // even layer: (interval, flag)
            }
            sizes.push(4 * i_s); // odd layer: (interval, flag, sent bit)
        }
    }
    sizes.push(finals.len() as u64); // final even layer: located interval
    sizes.push(2 * finals.len() as u64); // final odd layer: (interval, bit)
    match leaf_mode {
        CompareLeaf::Sign => sizes.push(3),
        CompareLeaf::FirstDiff => sizes.push(finals.len() as u64 + 1),
    }
    debug_assert_eq!(sizes.len(), c + 1);

    let step_of = move |layer: usize| (layer / (2 * a_bits), (layer % (2 * a_bits)) / 2);
    let steps_a = Arc::new(steps);
    let steps_b = steps_a.clone();
    let finals_a = Arc::new(finals);
    let finals_b = finals_a.clone();
    let finals_leaf = finals_a.clone();
    let fam_a = family.clone();
    let fam_b = family;
    let final_even = 2 * a_bits * s_count;

    let a_fn = move |node: &crate::bp::BpNode, x: &BitString| -> u64 {
        if node.layer == final_even {
            let (lo, _) = finals_a[node.index as usize];
            2 * node.index + u64::from(x.bit(lo))
        } else {
            let (s, t) = step_of(node.layer);
            let (iv, flag) = if node.layer == 0 {
                (0u64, 0u64)
            } else {
                (node.index / 2, node.index % 2)
            };
            let interval = steps_a[s][iv as usize];
            let u = fam_a.digest(x, tested_len(interval));
            4 * iv + 2 * flag + u64::from(u.bit(t))
        }
    };

    let b_fn = move |node: &crate::bp::BpNode, y: &BitString| -> u64 {
        if node.layer == final_even + 1 {
            let iv = node.index / 2;
            let sigma = node.index % 2 == 1;
            let (lo, _) = finals_b[iv as usize];
            let differ = y.bit(lo) != sigma;
            return match leaf_mode {
                CompareLeaf::Sign => {
                    if !differ {
                        2
                    } else if sigma {
                        0
                    } else {
                        1
                    }
                }
                CompareLeaf::FirstDiff => {
                    if differ {
                        iv
                    } else {
                        finals_b.len() as u64
                    }
                }
            };
        }
        let (s, t) = step_of(node.layer);
        let iv = node.index / 4;
        let flag = (node.index / 2) % 2;
        let sigma = node.index % 2 == 1;
        let interval = steps_b[s][iv as usize];
        let v = fam_b.digest(y, tested_len(interval));
        let differ = flag == 1 || v.bit(t) != sigma;
        let flag2 = u64::from(differ);
        if t + 1 < a_bits {
            return 2 * iv + flag2;
        }
        // step boundary: descend the search
        let (lo, hi) = interval;
        let child = if hi - lo <= 1 {
            (lo, hi)
        } else {
            let mid = (lo + hi).div_ceil(2);
            if differ {
                (lo, mid)
            } else {
                (mid, hi)
            }
        };
        let next = &steps_b[s + 1];
        let child_idx = next
            .binary_search(&child)
            .expect("child interval enumerated") as u64;
        if s + 1 == s_count {
            child_idx // final even layer is indexed by interval alone
        } else {
            2 * child_idx
        }
    };

    // sign leaves carry the outcome code; first-difference leaves report
    // the located position, with one sentinel node for the equal case
    let leaf_bits = match leaf_mode {
        CompareLeaf::Sign => 2,
        CompareLeaf::FirstDiff => bits_for(n_bits as u64),
    };
    let positions: Vec<u64> = finals_leaf.iter().map(|&(lo, _)| lo as u64).collect();
    let n = n_bits as u64;
    let leaf_fn = move |leaf: u64| -> u64 {
        match leaf_mode {
            CompareLeaf::Sign => leaf,
            CompareLeaf::FirstDiff => {
                if (leaf as usize) < positions.len() {
                    positions[leaf as usize]
                } else {
                    n
                }
            }
        }
    };

    BranchingProgram::new(sizes, leaf_bits, a_fn, b_fn, leaf_fn)
}

fn bits_for(max_value: u64) -> usize {
    (64 - max_value.leading_zeros() as usize).max(1)
}

/// Who-is-larger on `n_bits`-bit values with error at most `epsilon`:
/// a hashed-prefix binary search for the first disagreeing position, then
/// one exact bit comparison. Both parties must derive the hash keys from
/// the same `shared_seed` (normally revealed by the seed message).
pub fn bp_millionaires(
    n_bits: usize,
    epsilon: f64,
    shared_seed: &BitString,
) -> BranchingProgram<BitString, BitString> {
    build_comparison_bp(n_bits, epsilon, shared_seed, CompareLeaf::Sign)
}

/// First differing bit position under the promise `x != y`; on equal
/// inputs the program lands on a sentinel leaf reported as a promise
/// violation.
pub fn bp_first_diff(
    n_bits: usize,
    epsilon: f64,
    shared_seed: &BitString,
) -> BranchingProgram<BitString, BitString> {
    build_comparison_bp(n_bits, epsilon, shared_seed, CompareLeaf::FirstDiff)
}

/// Decodes a first-difference leaf value.
pub fn first_diff_outcome(leaf: u64, n_bits: usize) -> FirstDiffOutcome {
    if leaf == n_bits as u64 {
        FirstDiffOutcome::PromiseViolation
    } else {
        FirstDiffOutcome::Index(leaf as usize)
    }
}

// ------------------------------------------------ position-wise inequality

fn inner_product(a: &BitString, b: &BitString) -> bool {
    debug_assert_eq!(a.len(), b.len());
    (0..a.len()).filter(|&i| a.bit(i) && b.bit(i)).count() % 2 == 1
}

/// Direct oracle: is there a position with `x[i] == y[i]`?
pub fn any_equal_oracle(x: &[BitString], y: &[BitString]) -> bool {
    x.iter().zip(y.iter()).any(|(a, b)| a == b)
}

/// Position-wise inequality via random inner products: the walk sits on a
/// row while its inner products agree and advances on each disagreement;
/// running out of rows drops it into an explicit reject trap. The output is
/// 1 iff the trap was never entered, so a surviving row witnesses some
/// position where the lists agree (up to one-sided error: an all-unequal
/// instance survives a row only by `m` coin-flip collisions).
pub fn bp_positionwise_inequality(
    n: usize,
    m: usize,
    elem_bits: usize,
    shared_seed: &BitString,
) -> BranchingProgram<Vec<BitString>, Vec<BitString>> {
    assert!(m > n, "need more layers than rows");
    assert!(n >= 1 && elem_bits >= 1);
    let r_strings: Arc<Vec<BitString>> = Arc::new(
        (1..=m)
            .map(|j| prf_eval(shared_seed, &BitString::from_u64(j as u64, 32), elem_bits))
            .collect(),
    );
    let rows_at = move |j: usize| (j + 1).min(n) as u64;
    let trap_at = move |j: usize| j >= n;

    // even layer 2j holds rows 1..=min(j+1, n) plus the trap once j >= n;
    // odd layers pair each row with the bit Alice just sent
    let c = 2 * m;
    let mut sizes = vec![1u64];
    for layer in 1..=c {
        if layer % 2 == 1 {
            let j = (layer - 1) / 2;
            sizes.push(2 * rows_at(j) + u64::from(trap_at(j)));
        } else {
            let j = layer / 2;
            sizes.push(rows_at(j) + u64::from(trap_at(j)));
        }
    }

    let rs_a = r_strings.clone();
    let rs_b = r_strings;
    let a_fn = move |node: &crate::bp::BpNode, x: &Vec<BitString>| -> u64 {
        let j = node.layer / 2; // comparison j+1 uses r_{j+1}
        let rows = rows_at(j);
        if trap_at(j) && node.index == rows {
            return 2 * rows; // trap rides along
        }
        let row = node.index; // row r = index + 1
        let sigma = inner_product(&x[row as usize], &rs_a[j]);
        2 * row + u64::from(sigma)
    };
    let b_fn = move |node: &crate::bp::BpNode, y: &Vec<BitString>| -> u64 {
        let j = (node.layer - 1) / 2;
        let rows = rows_at(j);
        let next_rows = rows_at(j + 1);
        if trap_at(j) && node.index == 2 * rows {
            return next_rows; // stay trapped
        }
        let row = node.index / 2;
        let sigma = node.index % 2 == 1;
        let agrees = inner_product(&y[row as usize], &rs_b[j]) == sigma;
        if agrees {
            row
        } else if row as usize + 1 == n {
            next_rows // mismatch on the last row: reject trap
        } else {
            row + 1
        }
    };
    let final_rows = rows_at(m);
    BranchingProgram::new(sizes, 1, a_fn, b_fn, move |leaf| {
        u64::from(leaf < final_rows)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::{compile_and_run_bp_alice, compile_and_run_bp_bob, run_plaintext_bp};
    use crate::cc::CompileOpts;
    use crate::exec::{run_pair, PairConfig};
    use crate::rng::SeededRng;

    #[test]
    fn dfa_single_state_accepts_everything() {
        let bp = bp_dfa_accept(1, 0, 3);
        let dfa = Dfa {
            delta: vec![[0, 0]],
        };
        for v in 0..8u64 {
            let alpha = BitString::from_u64(v, 3);
            assert_eq!(run_plaintext_bp(&bp, &dfa, &alpha), 1);
        }
    }

    #[test]
    fn dfa_parity_automaton() {
        // state = parity of ones seen so far
        let parity = Dfa {
            delta: vec![[0, 1], [1, 0]],
        };
        let bp = bp_dfa_accept(2, 0, 3);
        let alpha = BitString::parse_bin("101").unwrap();
        // two ones: parity 0, accepted by the even-parity state
        assert_eq!(run_plaintext_bp(&bp, &parity, &alpha), 1);
        let bp_odd = bp_dfa_accept(2, 1, 3);
        assert_eq!(run_plaintext_bp(&bp_odd, &parity, &alpha), 0);
    }

    #[test]
    fn dfa_random_automata_match_simulation() {
        let mut rng = SeededRng::from_u64(14);
        for _ in 0..20 {
            let delta: Vec<[u64; 2]> = (0..4)
                .map(|_| [rng.next_below(4), rng.next_below(4)])
                .collect();
            let dfa = Dfa { delta };
            let accept = rng.next_below(4);
            let bp = bp_dfa_accept(4, accept, 4);
            for v in 0..16u64 {
                let alpha = BitString::from_u64(v, 4);
                assert_eq!(
                    run_plaintext_bp(&bp, &dfa, &alpha),
                    u64::from(dfa.accepts(&alpha, accept)),
                );
            }
        }
    }

    #[test]
    fn dfa_single_state_compiled_width_one_levels() {
        let bp = bp_dfa_accept(1, 0, 2);
        let dfa = Dfa { delta: vec![[0, 0]] };
        for v in 0..4u64 {
            let alpha = BitString::from_u64(v, 2);
            let (ba, bb) = (bp.clone(), bp.clone());
            let d = dfa.clone();
            let out = run_pair(
                &PairConfig::ideal(650 + v),
                move |ep| compile_and_run_bp_alice(ep, &ba, &d, &CompileOpts::default()),
                move |ep| compile_and_run_bp_bob(ep, &bb, &alpha, &CompileOpts::default()),
            )
            .unwrap();
            assert_eq!(out.alice.xor(&out.bob).unwrap().to_u64(), 1);
        }
    }

    #[test]
    fn dfa_compiled_matches_plaintext() {
        let parity = Dfa {
            delta: vec![[0, 1], [1, 0]],
        };
        let bp = bp_dfa_accept(2, 1, 3);
        for v in 0..8u64 {
            let alpha = BitString::from_u64(v, 3);
            let expected = run_plaintext_bp(&bp, &parity, &alpha);
            let (ba, bb) = (bp.clone(), bp.clone());
            let dfa = parity.clone();
            let out = run_pair(
                &PairConfig::ideal(600 + v),
                move |ep| compile_and_run_bp_alice(ep, &ba, &dfa, &CompileOpts::default()),
                move |ep| compile_and_run_bp_bob(ep, &bb, &alpha, &CompileOpts::default()),
            )
            .unwrap();
            assert_eq!(out.alice.xor(&out.bob).unwrap().to_u64(), expected);
        }
    }

    #[test]
    fn millionaires_equal_inputs() {
        let seed = BitString::from_u64(42, 64);
        let bp = bp_millionaires(8, 1e-6, &seed);
        let x = BitString::from_u64(173, 8);
        let out = run_plaintext_bp(&bp, &x, &x);
        assert_eq!(CompareOutcome::from_code(out), Some(CompareOutcome::Equal));
    }

    #[test]
    fn millionaires_explicit_example() {
        let seed = BitString::from_u64(7, 64);
        let bp = bp_millionaires(8, 1e-6, &seed);
        let x = BitString::from_u64(5, 8);
        let y = BitString::from_u64(3, 8);
        assert_eq!(
            CompareOutcome::from_code(run_plaintext_bp(&bp, &x, &y)),
            Some(CompareOutcome::XLarger)
        );
        assert_eq!(
            CompareOutcome::from_code(run_plaintext_bp(&bp, &y, &x)),
            Some(CompareOutcome::YLarger)
        );
    }

    #[test]
    fn millionaires_random_pairs_match_oracle() {
        let mut rng = SeededRng::from_u64(88);
        for trial in 0..300u64 {
            let seed = BitString::random(&mut rng, 64);
            let bp = bp_millionaires(16, 2f64.powi(-20), &seed);
            let x = BitString::from_u64(rng.next_below(1 << 16), 16);
            let y = BitString::from_u64(rng.next_below(1 << 16), 16);
            let got = CompareOutcome::from_code(run_plaintext_bp(&bp, &x, &y)).unwrap();
            assert_eq!(got, compare_oracle(&x, &y), "trial {trial}");
        }
    }

    #[test]
    fn millionaires_compiled_matches_plaintext() {
        let mut rng = SeededRng::from_u64(5);
        for trial in 0..5u64 {
            let seed = BitString::random(&mut rng, 64);
            let bp = bp_millionaires(8, 1e-6, &seed);
            let x = BitString::from_u64(rng.next_below(256), 8);
            let y = BitString::from_u64(rng.next_below(256), 8);
            let expected = run_plaintext_bp(&bp, &x, &y);
            let (ba, bb) = (bp.clone(), bp.clone());
            let out = run_pair(
                &PairConfig::ideal(7100 + trial),
                move |ep| compile_and_run_bp_alice(ep, &ba, &x, &CompileOpts::default()),
                move |ep| compile_and_run_bp_bob(ep, &bb, &y, &CompileOpts::default()),
            )
            .unwrap();
            assert_eq!(out.alice.xor(&out.bob).unwrap().to_u64(), expected);
        }
    }

    #[test]
    fn first_diff_examples() {
        let seed = BitString::from_u64(3, 64);
        let bp = bp_first_diff(8, 1e-6, &seed);
        let x = BitString::parse_bin("10000000").unwrap();
        let y = BitString::parse_bin("00000000").unwrap();
        assert_eq!(
            first_diff_outcome(run_plaintext_bp(&bp, &x, &y), 8),
            FirstDiffOutcome::Index(0)
        );
        assert_eq!(
            first_diff_outcome(run_plaintext_bp(&bp, &x, &x), 8),
            FirstDiffOutcome::PromiseViolation
        );
    }

    #[test]
    fn first_diff_random_promise_pairs() {
        let mut rng = SeededRng::from_u64(123);
        for trial in 0..200u64 {
            let seed = BitString::random(&mut rng, 64);
            let bp = bp_first_diff(16, 2f64.powi(-20), &seed);
            let xv = rng.next_below(1 << 16);
            let mut yv = rng.next_below(1 << 16);
            if xv == yv {
                yv ^= 1;
            }
            let x = BitString::from_u64(xv, 16);
            let y = BitString::from_u64(yv, 16);
            let expect = first_diff_oracle(&x, &y).unwrap();
            assert_eq!(
                first_diff_outcome(run_plaintext_bp(&bp, &x, &y), 16),
                FirstDiffOutcome::Index(expect),
                "trial {trial}"
            );
        }
    }

    #[test]
    fn poswise_equal_first_row_always_one() {
        let mut rng = SeededRng::from_u64(9);
        let seed = BitString::random(&mut rng, 64);
        let bp = bp_positionwise_inequality(4, 12, 8, &seed);
        let shared: Vec<BitString> = (0..4).map(|_| BitString::random(&mut rng, 8)).collect();
        let mut ys = shared.clone();
        ys[1] = BitString::zeros(8); // make other rows differ, row 0 equal
        assert_eq!(run_plaintext_bp(&bp, &shared, &ys), 1);
    }

    #[test]
    fn poswise_no_equal_pair_rejects() {
        let mut rng = SeededRng::from_u64(10);
        let mut failures = 0u32;
        for _ in 0..1000 {
            let seed = BitString::random(&mut rng, 64);
            let bp = bp_positionwise_inequality(4, 64, 16, &seed);
            let xs: Vec<BitString> = (0..4).map(|_| BitString::random(&mut rng, 16)).collect();
            let ys: Vec<BitString> = xs
                .iter()
                .map(|x| {
                    // flip one bit so every row differs
                    let mut y = x.clone();
                    y.set_bit(0, !x.bit(0));
                    y
                })
                .collect();
            assert!(!any_equal_oracle(&xs, &ys));
            if run_plaintext_bp(&bp, &xs, &ys) != 0 {
                failures += 1;
            }
        }
        assert_eq!(failures, 0, "observed error above the 2^-20 target");
    }

    #[test]
    fn poswise_compiled_matches_plaintext() {
        let mut rng = SeededRng::from_u64(11);
        for trial in 0..5u64 {
            let seed = BitString::random(&mut rng, 64);
            let bp = bp_positionwise_inequality(3, 8, 6, &seed);
            let xs: Vec<BitString> = (0..3).map(|_| BitString::random(&mut rng, 6)).collect();
            let ys: Vec<BitString> = if trial % 2 == 0 {
                xs.clone()
            } else {
                (0..3).map(|_| BitString::random(&mut rng, 6)).collect()
            };
            let expected = run_plaintext_bp(&bp, &xs, &ys);
            let (ba, bb) = (bp.clone(), bp.clone());
            let out = run_pair(
                &PairConfig::ideal(7300 + trial),
                move |ep| compile_and_run_bp_alice(ep, &ba, &xs, &CompileOpts::default()),
                move |ep| compile_and_run_bp_bob(ep, &bb, &ys, &CompileOpts::default()),
            )
            .unwrap();
            assert_eq!(out.alice.xor(&out.bob).unwrap().to_u64(), expected);
        }
    }
}
