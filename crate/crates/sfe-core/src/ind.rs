//! Private indirect indexing and its generalization to pointer jumping.
//!
//! The parties hold XOR shares of an index `j` into a list owned by one of
//! them. One invocation leaves them holding fresh XOR shares of the indexed
//! entry: the list owner permutes entry *positions* by its own index share,
//! masks every entry with a fresh one-time pad, and plays OT sender; the
//! other party selects position `own share` and receives the masked entry.
//! Because `sender_share ⊕ chooser_share = j`, the chooser lands exactly on
//! the entry for `j`, and the two new shares XOR to it.
//!
//! Chaining invocations with the sender role alternating over list owners
//! walks a path of lists — secure pointer jumping — without either party
//! ever seeing an intermediate index. One OT of the list's width is the
//! entire cost of each hop.

use std::sync::Arc;

use thiserror::Error;

use crate::bits::BitString;
use crate::exec::{Endpoint, ProtoError};
use crate::ot::{log2_exact, ot_recv, ot_send, OtChoice, OtSenderInput};

/// Indexing-layer failures.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndError {
    /// List widths must be powers of two so XOR permutation is a bijection.
    #[error("list width {0} is not a power of two")]
    WidthNotPowerOfTwo(usize),
    /// An index share had the wrong number of bits for the list width.
    #[error("index share has {got} bits, width {width} needs {need}")]
    ShareWidthMismatch {
        /// Bits in the share.
        got: usize,
        /// List width.
        width: usize,
        /// Required bits.
        need: usize,
    },
    /// A list entry was not a valid index into the next level.
    #[error("entry {value} at position {position} exceeds next width {next_width}")]
    EntryOutOfRange {
        /// Offending entry value.
        value: u64,
        /// Its position.
        position: usize,
        /// Width it must index into.
        next_width: usize,
    },
    /// Level shapes passed to the two parties disagree.
    #[error("inconsistent level shape: {0}")]
    BadShape(String),
}

/// A list of `width` entries of `elem_bits` bits each, dense or generated.
#[derive(Clone)]
pub struct IndexedList {
    /// Number of entries; a power of two.
    pub width: usize,
    /// Bits per entry.
    pub elem_bits: usize,
    entries: ListEntries,
}

#[derive(Clone)]
enum ListEntries {
    Dense(Arc<Vec<BitString>>),
    Gen(Arc<dyn Fn(usize) -> BitString + Send + Sync>),
}

impl IndexedList {
    /// Dense list from explicit entries.
    pub fn dense(entries: Vec<BitString>, elem_bits: usize) -> Result<IndexedList, IndError> {
        let width = entries.len();
        if !width.is_power_of_two() {
            return Err(IndError::WidthNotPowerOfTwo(width));
        }
        if entries.iter().any(|e| e.len() != elem_bits) {
            return Err(IndError::BadShape(format!(
                "entries must all be {elem_bits} bits"
            )));
        }
        Ok(IndexedList {
            width,
            elem_bits,
            entries: ListEntries::Dense(Arc::new(entries)),
        })
    }

    /// Dense list of integer entries.
    pub fn from_u64s(values: &[u64], elem_bits: usize) -> Result<IndexedList, IndError> {
        Self::dense(
            values
                .iter()
                .map(|&v| BitString::from_u64(v, elem_bits))
                .collect(),
            elem_bits,
        )
    }

    /// Lazily generated list; `f(i)` must be `elem_bits` bits for `i < width`.
    pub fn lazy(
        width: usize,
        elem_bits: usize,
        f: impl Fn(usize) -> BitString + Send + Sync + 'static,
    ) -> Result<IndexedList, IndError> {
        if !width.is_power_of_two() {
            return Err(IndError::WidthNotPowerOfTwo(width));
        }
        Ok(IndexedList {
            width,
            elem_bits,
            entries: ListEntries::Gen(Arc::new(f)),
        })
    }

    /// Entry at position `i`.
    pub fn get(&self, i: usize) -> BitString {
        match &self.entries {
            ListEntries::Dense(v) => v[i].clone(),
            ListEntries::Gen(f) => f(i),
        }
    }

    /// Bits needed for an index into this list.
    pub fn index_bits(&self) -> usize {
        log2_exact(self.width).expect("validated at construction")
    }

    /// Checks every dense entry indexes into a level of `next_width`; no-op
    /// for generated lists, whose producers guarantee the range.
    pub fn validate_entries_below(&self, next_width: usize) -> Result<(), IndError> {
        if let ListEntries::Dense(v) = &self.entries {
            for (position, e) in v.iter().enumerate() {
                let value = e.to_u64();
                if value >= next_width as u64 {
                    return Err(IndError::EntryOutOfRange {
                        value,
                        position,
                        next_width,
                    });
                }
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for IndexedList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.entries {
            ListEntries::Dense(_) => "dense",
            ListEntries::Gen(_) => "generated",
        };
        write!(
            f,
            "IndexedList({kind}, w={}, {} bits)",
            self.width, self.elem_bits
        )
    }
}

fn check_share(share: &BitString, width: usize) -> Result<(), IndError> {
    let need = log2_exact(width).map_err(|_| IndError::WidthNotPowerOfTwo(width))?;
    if share.len() != need {
        return Err(IndError::ShareWidthMismatch {
            got: share.len(),
            width,
            need,
        });
    }
    Ok(())
}

pub(crate) fn ind_sender_inner(
    ep: &mut Endpoint,
    index_share: &BitString,
    list: &IndexedList,
    note_round: bool,
) -> Result<BitString, ProtoError> {
    check_share(index_share, list.width)?;
    let mask = BitString::random(&mut ep.rng, list.elem_bits);
    let shift = index_share.to_u64() as usize;
    let inner = list.clone();
    let pad = mask.clone();
    // position p holds the masked entry for index share ⊕ p
    let permuted = OtSenderInput::lazy(list.width, list.elem_bits, move |p| {
        pad.xor(&inner.get(p ^ shift)).expect("equal entry lengths")
    });
    if note_round {
        ep.meter
            .lock()
            .unwrap()
            .note_rounds(ep.backend.round_cost());
    }
    ot_send(ep, &permuted)?;
    Ok(mask)
}

pub(crate) fn ind_chooser_inner(
    ep: &mut Endpoint,
    index_share: &BitString,
    width: usize,
    elem_bits: usize,
    note_round: bool,
) -> Result<BitString, ProtoError> {
    check_share(index_share, width)?;
    if note_round {
        ep.meter
            .lock()
            .unwrap()
            .note_rounds(ep.backend.round_cost());
    }
    ot_recv(
        ep,
        width,
        elem_bits,
        OtChoice(index_share.to_u64() as usize),
    )
}

/// Sender half of one indexing hop: the party owning `list`, holding its
/// XOR share of the current index. Returns this party's fresh output share
/// (the mask it sampled).
pub fn ind_sender(
    ep: &mut Endpoint,
    index_share: &BitString,
    list: &IndexedList,
) -> Result<BitString, ProtoError> {
    ind_sender_inner(ep, index_share, list, true)
}

/// Chooser half of one indexing hop: the party not owning the list, holding
/// its XOR share of the current index. Returns this party's fresh output
/// share (the masked entry it retrieved).
pub fn ind_chooser(
    ep: &mut Endpoint,
    index_share: &BitString,
    width: usize,
    elem_bits: usize,
) -> Result<BitString, ProtoError> {
    ind_chooser_inner(ep, index_share, width, elem_bits, true)
}

/// Alice's side of `Ind_AB` (Bob owns the list): pass the masked index
/// `π ⊕ j`, get back Alice's share of `y[j]`.
pub fn ind_ab_alice(
    ep: &mut Endpoint,
    masked_index: &BitString,
    width: usize,
    elem_bits: usize,
) -> Result<BitString, ProtoError> {
    ind_chooser(ep, masked_index, width, elem_bits)
}

/// Bob's side of `Ind_AB`: pass the mask `π` and the list, get Bob's share.
pub fn ind_ab_bob(
    ep: &mut Endpoint,
    mask: &BitString,
    list: &IndexedList,
) -> Result<BitString, ProtoError> {
    ind_sender(ep, mask, list)
}

/// Alice's side of `Ind_BA` (Alice owns the list).
pub fn ind_ba_alice(
    ep: &mut Endpoint,
    mask: &BitString,
    list: &IndexedList,
) -> Result<BitString, ProtoError> {
    ind_sender(ep, mask, list)
}

/// Bob's side of `Ind_BA`.
pub fn ind_ba_bob(
    ep: &mut Endpoint,
    masked_index: &BitString,
    width: usize,
    elem_bits: usize,
) -> Result<BitString, ProtoError> {
    ind_chooser(ep, masked_index, width, elem_bits)
}

/// Common shape of a pointer-jumping instance: level `1` is Bob's, level
/// `2` Alice's, and so on, alternating up to an even level count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GindShape {
    /// Width of each level, `widths[0]` being level 1.
    pub widths: Vec<usize>,
    /// Entry bits of the final level (levels below the last carry indices).
    pub last_elem_bits: usize,
}

impl GindShape {
    /// Entry bits at 1-based level `ell`: indices into the next level, the
    /// caller-chosen payload width at the last.
    pub fn elem_bits_at(&self, ell: usize) -> usize {
        if ell == self.widths.len() {
            self.last_elem_bits
        } else {
            log2_exact(self.widths[ell]).expect("validated")
        }
    }

    /// Validates evenness, widths, and returns the level count.
    pub fn validate(&self) -> Result<usize, IndError> {
        let c = self.widths.len();
        if c == 0 || !c.is_multiple_of(2) {
            return Err(IndError::BadShape(format!(
                "level count {c} must be a positive even number"
            )));
        }
        for &w in &self.widths {
            if !w.is_power_of_two() {
                return Err(IndError::WidthNotPowerOfTwo(w));
            }
        }
        Ok(c)
    }
}

fn run_gind_side(
    ep: &mut Endpoint,
    shape: &GindShape,
    initial_share: BitString,
    my_lists: &[IndexedList],
    my_levels_odd: bool,
) -> Result<BitString, ProtoError> {
    let c = shape.validate()?;
    let my_count = c / 2;
    if my_lists.len() != my_count {
        return Err(IndError::BadShape(format!(
            "expected {my_count} lists, got {}",
            my_lists.len()
        ))
        .into());
    }
    for (slot, list) in my_lists.iter().enumerate() {
        let ell = if my_levels_odd {
            2 * slot + 1
        } else {
            2 * slot + 2
        };
        if list.width != shape.widths[ell - 1] || list.elem_bits != shape.elem_bits_at(ell) {
            return Err(IndError::BadShape(format!(
                "list for level {ell} has shape ({}, {}), expected ({}, {})",
                list.width,
                list.elem_bits,
                shape.widths[ell - 1],
                shape.elem_bits_at(ell)
            ))
            .into());
        }
        if ell < c {
            list.validate_entries_below(shape.widths[ell])?;
        }
    }

    let mut share = initial_share;
    for ell in 1..=c {
        let i_am_sender = (ell % 2 == 1) == my_levels_odd;
        share = if i_am_sender {
            let list = &my_lists[(ell - 1) / 2];
            ind_sender(ep, &share, list)?
        } else {
            ind_chooser(ep, &share, shape.widths[ell - 1], shape.elem_bits_at(ell))?
        };
    }
    Ok(share)
}

/// Alice's side of generalized indirect indexing. Her `lists` are the even
/// levels (the last carries the payload); `masked_index` is `π ⊕ j_0`, or
/// plain `j_0` when the initial index is public to her (mask all zeros).
pub fn gind_alice(
    ep: &mut Endpoint,
    shape: &GindShape,
    masked_index: BitString,
    lists: &[IndexedList],
) -> Result<BitString, ProtoError> {
    run_gind_side(ep, shape, masked_index, lists, false)
}

/// Bob's side of generalized indirect indexing: his `lists` are the odd
/// levels and `mask` is his share `π` of the initial index.
pub fn gind_bob(
    ep: &mut Endpoint,
    shape: &GindShape,
    mask: BitString,
    lists: &[IndexedList],
) -> Result<BitString, ProtoError> {
    run_gind_side(ep, shape, mask, lists, true)
}

/// Alice's side of two-level indexing `x[y[j]]` with `j` known to her.
/// With `reveal`, Bob sends his final share and Alice returns the value
/// itself; otherwise she returns her share.
pub fn ind_two_level_alice(
    ep: &mut Endpoint,
    j: u64,
    x_list: &IndexedList,
    y_width: usize,
    reveal: bool,
) -> Result<BitString, ProtoError> {
    let y_bits = log2_exact(y_width).map_err(|_| IndError::WidthNotPowerOfTwo(y_width))?;
    let x_bits = x_list.index_bits();
    let inner_share = ind_chooser(ep, &BitString::from_u64(j, y_bits), y_width, x_bits)?;
    let my_share = ind_sender(ep, &inner_share, x_list)?;
    if reveal {
        let bob_share =
            BitString::from_wire(&ep.chan.recv_expect(crate::channel::FrameType::Data)?)?;
        ep.meter.lock().unwrap().note_rounds(1);
        Ok(my_share.xor(&bob_share)?)
    } else {
        Ok(my_share)
    }
}

/// Bob's side of two-level indexing: he owns the inner index list `y`.
pub fn ind_two_level_bob(
    ep: &mut Endpoint,
    y_list: &IndexedList,
    x_width: usize,
    x_elem_bits: usize,
    reveal: bool,
) -> Result<Option<BitString>, ProtoError> {
    y_list.validate_entries_below(x_width)?;
    let zero_mask = BitString::zeros(y_list.index_bits());
    let inner_share = ind_sender(ep, &zero_mask, y_list)?;
    let my_share = ind_chooser(ep, &inner_share, x_width, x_elem_bits)?;
    if reveal {
        ep.chan
            .send(crate::channel::FrameType::Data, &my_share.to_wire())?;
        ep.meter.lock().unwrap().note_rounds(1);
        Ok(None)
    } else {
        Ok(Some(my_share))
    }
}

/// A complete in-memory pointer-jumping instance, used by tests, demos and
/// the list file format.
#[derive(Debug, Clone)]
pub struct GindInstance {
    /// Level widths, level 1 first.
    pub shape: GindShape,
    /// Initial index `j_0` into level 1.
    pub initial_index: u64,
    /// Bob's lists (levels 1, 3, ...), as integers.
    pub odd_lists: Vec<Vec<u64>>,
    /// Alice's lists (levels 2, 4, ...), as integers.
    pub even_lists: Vec<Vec<u64>>,
}

impl GindInstance {
    /// Plain pointer-jumping oracle: follows the lists in the clear.
    pub fn plain_eval(&self) -> u64 {
        let mut idx = self.initial_index as usize;
        let c = self.shape.widths.len();
        for ell in 1..=c {
            let list = if ell % 2 == 1 {
                &self.odd_lists[(ell - 1) / 2]
            } else {
                &self.even_lists[ell / 2 - 1]
            };
            idx = list[idx] as usize;
        }
        idx as u64
    }

    /// Bob's lists as [`IndexedList`]s.
    pub fn odd_indexed(&self) -> Result<Vec<IndexedList>, IndError> {
        self.odd_lists
            .iter()
            .enumerate()
            .map(|(slot, vals)| {
                let ell = 2 * slot + 1;
                IndexedList::from_u64s(vals, self.shape.elem_bits_at(ell))
            })
            .collect()
    }

    /// Alice's lists as [`IndexedList`]s.
    pub fn even_indexed(&self) -> Result<Vec<IndexedList>, IndError> {
        self.even_lists
            .iter()
            .enumerate()
            .map(|(slot, vals)| {
                let ell = 2 * slot + 2;
                IndexedList::from_u64s(vals, self.shape.elem_bits_at(ell))
            })
            .collect()
    }

    /// Uniformly random instance with the given widths.
    pub fn random(
        widths: &[usize],
        last_elem_bits: usize,
        rng: &mut crate::rng::SeededRng,
    ) -> GindInstance {
        let shape = GindShape {
            widths: widths.to_vec(),
            last_elem_bits,
        };
        let c = widths.len();
        let mut odd_lists = Vec::new();
        let mut even_lists = Vec::new();
        for ell in 1..=c {
            let bound = if ell == c {
                1u64 << last_elem_bits.min(63)
            } else {
                widths[ell] as u64
            };
            let list: Vec<u64> = (0..widths[ell - 1])
                .map(|_| rng.next_below(bound))
                .collect();
            if ell % 2 == 1 {
                odd_lists.push(list);
            } else {
                even_lists.push(list);
            }
        }
        GindInstance {
            shape,
            initial_index: rng.next_below(widths[0] as u64),
            odd_lists,
            even_lists,
        }
    }
}

/// Runs a [`GindInstance`] with the initial index public to Alice and both
/// parties revealing their shares at the end (used by demos and tests);
/// returns `(value, alice_share, bob_share, merged_meter)`.
pub fn run_gind_instance(
    cfg: &crate::exec::PairConfig,
    inst: &GindInstance,
) -> Result<(u64, BitString, BitString, crate::meter::CostMeter), ProtoError> {
    let shape_a = inst.shape.clone();
    let shape_b = inst.shape.clone();
    let even = inst.even_indexed()?;
    let odd = inst.odd_indexed()?;
    let j0 = inst.initial_index;
    let out = crate::exec::run_pair(
        cfg,
        move |ep| {
            let masked = BitString::from_u64(j0, log2_exact(shape_a.widths[0])?);
            gind_alice(ep, &shape_a, masked, &even)
        },
        move |ep| {
            let mask = BitString::zeros(log2_exact(shape_b.widths[0])?);
            gind_bob(ep, &shape_b, mask, &odd)
        },
    )?;
    let value = out.alice.xor(&out.bob)?.to_u64();
    Ok((
        value,
        out.alice,
        out.bob,
        out.meter_a.merged_with(&out.meter_b),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{run_pair, PairConfig};
    use crate::rng::SeededRng;

    #[test]
    fn ind_ab_trivial() {
        // π = 0, j = 1, list [3, 8]: shares must XOR to 8
        let cfg = PairConfig::ideal(4);
        let out = run_pair(
            &cfg,
            |ep| ind_ab_alice(ep, &BitString::from_u64(1, 1), 2, 4),
            |ep| {
                let list = IndexedList::from_u64s(&[3, 8], 4).unwrap();
                ind_ab_bob(ep, &BitString::zeros(1), &list)
            },
        )
        .unwrap();
        assert_eq!(out.alice.xor(&out.bob).unwrap().to_u64(), 8);
    }

    #[test]
    fn ind_ba_trivial_and_census() {
        let cfg = PairConfig::ideal(5);
        let out = run_pair(
            &cfg,
            |ep| {
                let list = IndexedList::from_u64s(&[6, 2], 4).unwrap();
                ind_ba_alice(ep, &BitString::zeros(1), &list)
            },
            |ep| ind_ba_bob(ep, &BitString::from_u64(0, 1), 2, 4),
        )
        .unwrap();
        assert_eq!(out.alice.xor(&out.bob).unwrap().to_u64(), 6);
        let merged = out.meter_a.merged_with(&out.meter_b);
        assert_eq!(merged.ot_census(), vec![(2, 1)]);
    }

    #[test]
    fn ind_exhaustive_w4() {
        // all (mask, j) pairs at width 4 reconstruct y[j]
        let values = [9u64, 4, 13, 0];
        for mask in 0..4u64 {
            for j in 0..4u64 {
                let cfg = PairConfig::ideal(100 + mask * 4 + j);
                let masked = BitString::from_u64(mask ^ j, 2);
                let pi = BitString::from_u64(mask, 2);
                let out = run_pair(
                    &cfg,
                    move |ep| ind_ab_alice(ep, &masked, 4, 4),
                    move |ep| {
                        let list = IndexedList::from_u64s(&values, 4).unwrap();
                        ind_ab_bob(ep, &pi, &list)
                    },
                )
                .unwrap();
                assert_eq!(
                    out.alice.xor(&out.bob).unwrap().to_u64(),
                    values[j as usize],
                    "mask={mask} j={j}"
                );
            }
        }
    }

    #[test]
    fn alice_output_share_is_uniform() {
        // fresh masks each run: Alice's share bits within 4 sigma of half
        let trials = 1000;
        let mut ones = [0u32; 4];
        for t in 0..trials {
            let cfg = PairConfig::ideal(5000 + t);
            let out = run_pair(
                &cfg,
                |ep| ind_ab_alice(ep, &BitString::from_u64(2, 2), 4, 4),
                |ep| {
                    let list = IndexedList::from_u64s(&[1, 2, 3, 4], 4).unwrap();
                    ind_ab_bob(ep, &BitString::zeros(2), &list)
                },
            )
            .unwrap();
            for (i, count) in ones.iter_mut().enumerate() {
                if out.alice.bit(i) {
                    *count += 1;
                }
            }
        }
        let sigma = (trials as f64).sqrt() / 2.0;
        for count in ones {
            let dev = (f64::from(count) - trials as f64 / 2.0).abs();
            assert!(dev < 4.0 * sigma, "biased share bit: {count}/{trials}");
        }
    }

    #[test]
    fn two_level_examples() {
        // x[y[0]] with x = [10,20,30,40], y = [2,0,3,0] (padded to width 4)
        let cfg = PairConfig::ideal(8);
        let x_vals = [10u64, 20, 30, 40];
        let out = run_pair(
            &cfg,
            move |ep| {
                let x = IndexedList::from_u64s(&x_vals, 6).unwrap();
                ind_two_level_alice(ep, 0, &x, 4, true)
            },
            move |ep| {
                let y = IndexedList::from_u64s(&[2, 0, 3, 0], 2).unwrap();
                ind_two_level_bob(ep, &y, 4, 6, true)
            },
        )
        .unwrap();
        assert_eq!(out.alice.to_u64(), 30);
        assert_eq!(out.bob, None);
    }

    #[test]
    fn two_level_constant_inner_list() {
        // y all zeros: any j lands on x[0]
        for j in 0..4u64 {
            let cfg = PairConfig::ideal(80 + j);
            let out = run_pair(
                &cfg,
                move |ep| {
                    let x = IndexedList::from_u64s(&[7, 1, 2, 3], 4).unwrap();
                    ind_two_level_alice(ep, j, &x, 4, true)
                },
                |ep| {
                    let y = IndexedList::from_u64s(&[0, 0, 0, 0], 2).unwrap();
                    ind_two_level_bob(ep, &y, 4, 4, true)
                },
            )
            .unwrap();
            assert_eq!(out.alice.to_u64(), 7);
        }
    }

    #[test]
    fn two_level_exhaustive_matches_composition() {
        let x_vals = [5u64, 9, 12, 1];
        let y_vals = [2u64, 0, 3, 1];
        for j in 0..4u64 {
            let cfg = PairConfig::ideal(200 + j);
            let out = run_pair(
                &cfg,
                move |ep| {
                    let x = IndexedList::from_u64s(&x_vals, 4).unwrap();
                    ind_two_level_alice(ep, j, &x, 4, true)
                },
                move |ep| {
                    let y = IndexedList::from_u64s(&y_vals, 2).unwrap();
                    ind_two_level_bob(ep, &y, 4, 4, true)
                },
            )
            .unwrap();
            assert_eq!(out.alice.to_u64(), x_vals[y_vals[j as usize] as usize]);
        }
    }

    #[test]
    fn gind_hamming_worked_instance() {
        // the two-bit distance instance: lists below walk to x4[6] = 1
        let inst = GindInstance {
            shape: GindShape {
                widths: vec![2, 4, 8, 16],
                last_elem_bits: 2,
            },
            initial_index: 0,
            odd_lists: vec![vec![1, 2], vec![1, 2, 5, 6, 9, 10, 13, 14]],
            even_lists: vec![
                vec![1, 3, 5, 7],
                vec![0, 1, 0, 1, 1, 2, 1, 2, 0, 1, 0, 1, 1, 2, 1, 2],
            ],
        };
        assert_eq!(inst.plain_eval(), 1);
        let (value, _, _, meter) = run_gind_instance(&PairConfig::ideal(3), &inst).unwrap();
        assert_eq!(value, 1);
        assert_eq!(meter.ot_census(), vec![(2, 1), (4, 1), (8, 1), (16, 1)],);
    }

    #[test]
    fn gind_c2_agrees_with_two_level_shares() {
        let mut rng = SeededRng::from_u64(21);
        for trial in 0..20 {
            let inst = GindInstance::random(&[4, 8], 5, &mut rng);
            let (value, ..) = run_gind_instance(&PairConfig::ideal(trial), &inst).unwrap();
            assert_eq!(value, inst.plain_eval());
        }
    }

    #[test]
    fn gind_random_instances_match_oracle() {
        let mut rng = SeededRng::from_u64(77);
        for trial in 0..100 {
            let inst = GindInstance::random(&[2, 4, 8, 16], 6, &mut rng);
            let (value, _, _, meter) =
                run_gind_instance(&PairConfig::ideal(9000 + trial), &inst).unwrap();
            assert_eq!(value, inst.plain_eval(), "trial {trial}");
            assert_eq!(meter.ot_census(), vec![(2, 1), (4, 1), (8, 1), (16, 1)]);
        }
    }

    #[test]
    fn gind_census_is_input_independent() {
        let mut rng = SeededRng::from_u64(31);
        let mut censuses = Vec::new();
        for trial in 0..10 {
            let inst = GindInstance::random(&[4, 4, 2, 8], 3, &mut rng);
            let (_, _, _, meter) =
                run_gind_instance(&PairConfig::ideal(400 + trial), &inst).unwrap();
            censuses.push(meter.ot_census());
        }
        assert!(censuses.iter().all(|c| c == &censuses[0]));
    }

    #[test]
    fn shape_validation_errors() {
        let shape = GindShape {
            widths: vec![2, 3],
            last_elem_bits: 4,
        };
        assert!(shape.validate().is_err());
        let shape = GindShape {
            widths: vec![2, 4, 8],
            last_elem_bits: 4,
        };
        assert!(shape.validate().is_err(), "odd level count must fail");
        let list = IndexedList::from_u64s(&[5, 1], 3).unwrap();
        assert_eq!(
            list.validate_entries_below(4),
            Err(IndError::EntryOutOfRange {
                value: 5,
                position: 0,
                next_width: 4
            })
        );
    }
}
