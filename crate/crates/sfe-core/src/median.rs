//! Joint median of two equal-size multisets as a protocol tree.
//!
//! Both parties hold `m` values from `{1..n}`, `m` a power of two; the
//! median of the combined multiset of `2m` values is defined as its `m`-th
//! smallest element. The protocol repeatedly compares the parties' current
//! lower medians: a tie is the answer; otherwise the party with the smaller
//! median drops its lower half and the other drops its upper half, which
//! preserves the target rank. After `log2 m` halvings each side holds one
//! value and the answer is the smaller of the two.
//!
//! Message schedule, fixed up front so the whole run fits a full binary
//! tree: each comparison stage interleaves the two candidates bit by bit,
//! most significant first — Alice's bit at even depths, Bob's at odd — for
//! `2*ceil(log2 n)` levels per stage. Every leaf value is decodable from
//! the transcript alone, since both candidates of every stage appear in it.

use crate::bits::BitString;
use crate::cc::{run_plaintext, CompileOpts, ProtocolTree};
use crate::exec::{Endpoint, ProtoError};
use crate::meter::CostMeter;

/// Sort-and-pick oracle: the `m`-th smallest of the combined multiset.
pub fn median_oracle(x: &[u64], y: &[u64]) -> u64 {
    assert_eq!(x.len(), y.len());
    let mut all: Vec<u64> = x.iter().chain(y.iter()).copied().collect();
    all.sort_unstable();
    all[x.len() - 1]
}

/// Checks multiset sizes and value ranges; returns the sorted multisets.
pub fn validate_median_inputs(
    x: &[u64],
    y: &[u64],
    n_max: u64,
) -> Result<(Vec<u64>, Vec<u64>), ProtoError> {
    if x.len() != y.len() || x.is_empty() || !x.len().is_power_of_two() {
        return Err(ProtoError::Setup(format!(
            "multiset sizes must be equal powers of two, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    for &v in x.iter().chain(y.iter()) {
        if v == 0 || v > n_max {
            return Err(ProtoError::Setup(format!(
                "element {v} outside 1..={n_max}"
            )));
        }
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_unstable();
    ys.sort_unstable();
    Ok((xs, ys))
}

fn value_bits(n_max: u64) -> usize {
    // values are sent as value-1, so n values need ceil(log2 n) bits
    (64 - (n_max - 1).leading_zeros() as usize).max(1)
}

/// Candidates `(a_k, b_k)` of every completed stage, decoded from a path.
fn decode_stages(path_bit: impl Fn(usize) -> bool, stages: usize, vb: usize) -> Vec<(u64, u64)> {
    (0..stages)
        .map(|k| {
            let mut a = 0u64;
            let mut b = 0u64;
            for t in 0..vb {
                a = (a << 1) | u64::from(path_bit(k * 2 * vb + 2 * t));
                b = (b << 1) | u64::from(path_bit(k * 2 * vb + 2 * t + 1));
            }
            (a, b)
        })
        .collect()
}

fn lower_median(set: &[u64]) -> u64 {
    if set.len() == 1 {
        set[0]
    } else {
        set[set.len() / 2 - 1]
    }
}

/// Evolves `set` through the comparison outcomes of earlier stages and
/// returns the party's current candidate (as value-1). Once a stage tied,
/// the set stops changing.
fn candidate_after(set: &[u64], outcomes: &[(u64, u64)], is_alice: bool) -> u64 {
    let mut current = set.to_vec();
    for &(a, b) in outcomes {
        if a == b {
            break;
        }
        let keep_upper = if is_alice { a < b } else { b < a };
        let half = current.len() / 2;
        if half == 0 {
            break;
        }
        if keep_upper {
            current.drain(..half);
        } else {
            current.truncate(half);
        }
    }
    lower_median(&current) - 1
}

/// Builds the median protocol tree for multisets of size `m` over
/// `{1..n_max}`. Tree height is `2 * ceil(log2 n) * (log2 m + 1)`.
pub fn median_tree(n_max: u64, m: usize) -> ProtocolTree<Vec<u64>, Vec<u64>> {
    assert!(m.is_power_of_two() && m >= 1);
    assert!(n_max >= 2);
    let vb = value_bits(n_max);
    let stages = m.trailing_zeros() as usize + 1;
    let depth = 2 * vb * stages;
    let leaf_bits = 64 - n_max.leading_zeros() as usize;

    let a_fn = move |node: &crate::cc::TreeNode, x: &Vec<u64>| -> bool {
        let k = node.depth / (2 * vb);
        let t = (node.depth % (2 * vb)) / 2;
        let outcomes = decode_stages(|i| node.path_bit(i), k, vb);
        let cand = candidate_after(x, &outcomes, true);
        (cand >> (vb - 1 - t)) & 1 == 1
    };
    let b_fn = move |node: &crate::cc::TreeNode, y: &Vec<u64>| -> bool {
        let k = node.depth / (2 * vb);
        let t = (node.depth % (2 * vb) - 1) / 2;
        let outcomes = decode_stages(|i| node.path_bit(i), k, vb);
        let cand = candidate_after(y, &outcomes, false);
        (cand >> (vb - 1 - t)) & 1 == 1
    };
    let leaf_fn = move |leaf: &crate::cc::TreeNode| -> u64 {
        let all = decode_stages(|i| leaf.path_bit(i), stages, vb);
        for &(a, b) in &all {
            if a == b {
                return a + 1;
            }
        }
        let (a, b) = all[stages - 1];
        a.min(b) + 1
    };
    ProtocolTree::new(depth, leaf_bits, a_fn, b_fn, leaf_fn)
}

/// How to evaluate the median protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedianMode {
    /// Walk the tree in the clear.
    Plaintext,
    /// Compile through pointer jumping and reveal both shares.
    Compiled,
}

/// Runs the median protocol end to end and returns the median with the
/// merged cost meter (zeroed in plaintext mode).
pub fn run_median(
    cfg: &crate::exec::PairConfig,
    x: &[u64],
    y: &[u64],
    n_max: u64,
    mode: MedianMode,
) -> Result<(u64, CostMeter), ProtoError> {
    let (xs, ys) = validate_median_inputs(x, y, n_max)?;
    let tree = median_tree(n_max, xs.len());
    match mode {
        MedianMode::Plaintext => Ok((run_plaintext(&tree, &xs, &ys), CostMeter::default())),
        MedianMode::Compiled => {
            let (ta, tb) = (tree.clone(), tree);
            let out = crate::exec::run_pair(
                cfg,
                move |ep: &mut Endpoint| {
                    let share =
                        crate::cc::compile_and_run_cc_alice(ep, &ta, &xs, &CompileOpts::default())?;
                    crate::cc::reveal_share(ep, &share)
                },
                move |ep: &mut Endpoint| {
                    let share =
                        crate::cc::compile_and_run_cc_bob(ep, &tb, &ys, &CompileOpts::default())?;
                    crate::cc::reveal_share(ep, &share)
                },
            )?;
            let a: BitString = out.alice;
            let b: BitString = out.bob;
            if a != b {
                return Err(ProtoError::Setup(
                    "parties reconstructed different medians".into(),
                ));
            }
            Ok((a.to_u64(), out.meter_a.merged_with(&out.meter_b)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::PairConfig;
    use crate::rng::SeededRng;

    #[test]
    fn oracle_examples() {
        assert_eq!(median_oracle(&[1, 3, 5, 7], &[2, 4, 6, 8]), 4);
        assert_eq!(median_oracle(&[5, 5], &[5, 5]), 5);
    }

    #[test]
    fn plaintext_worked_examples() {
        let (v, _) = run_median(
            &PairConfig::ideal(1),
            &[1, 3, 5, 7],
            &[2, 4, 6, 8],
            8,
            MedianMode::Plaintext,
        )
        .unwrap();
        assert_eq!(v, 4);
        let (v, _) = run_median(
            &PairConfig::ideal(2),
            &[5, 5],
            &[5, 5],
            8,
            MedianMode::Plaintext,
        )
        .unwrap();
        assert_eq!(v, 5);
    }

    fn multisets(n: u64, m: usize) -> Vec<Vec<u64>> {
        // all non-decreasing m-tuples over 1..=n
        fn rec(n: u64, m: usize, lo: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if cur.len() == m {
                out.push(cur.clone());
                return;
            }
            for v in lo..=n {
                cur.push(v);
                rec(n, m, v, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, m, 1, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn plaintext_matches_oracle_exhaustively_small() {
        for m in [2usize, 4] {
            let sets = multisets(4, m);
            for x in &sets {
                for y in &sets {
                    let (v, _) =
                        run_median(&PairConfig::ideal(3), x, y, 4, MedianMode::Plaintext).unwrap();
                    assert_eq!(v, median_oracle(x, y), "x={x:?} y={y:?}");
                }
            }
        }
    }

    #[test]
    fn compiled_matches_oracle_sampled() {
        let mut rng = SeededRng::from_u64(99);
        for trial in 0..20u64 {
            let m = if trial % 2 == 0 { 2 } else { 4 };
            let x: Vec<u64> = (0..m).map(|_| rng.next_below(16) + 1).collect();
            let y: Vec<u64> = (0..m).map(|_| rng.next_below(16) + 1).collect();
            let (v, meter) = run_median(
                &PairConfig::ideal(7000 + trial),
                &x,
                &y,
                16,
                MedianMode::Compiled,
            )
            .unwrap();
            assert_eq!(v, median_oracle(&x, &y), "x={x:?} y={y:?}");
            // one OT per tree level
            let stages = (m as u64).trailing_zeros() + 1;
            assert_eq!(meter.ot_total(), 2 * 4 * u64::from(stages));
        }
    }

    #[test]
    fn input_validation() {
        assert!(run_median(
            &PairConfig::ideal(1),
            &[1, 2, 3],
            &[1, 2, 3],
            8,
            MedianMode::Plaintext
        )
        .is_err());
        assert!(run_median(
            &PairConfig::ideal(1),
            &[0, 2],
            &[1, 2],
            8,
            MedianMode::Plaintext
        )
        .is_err());
        assert!(run_median(
            &PairConfig::ideal(1),
            &[1, 9],
            &[1, 2],
            8,
            MedianMode::Plaintext
        )
        .is_err());
    }
}
