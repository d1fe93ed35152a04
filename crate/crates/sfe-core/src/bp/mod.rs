//! Oblivious branching programs and their compilation.
//!
//! A branching program here is a layered DAG: layer 0 has a single node,
//! even layers are labeled with Alice's successor functions, odd layers
//! with Bob's, and the last layer carries output values. Merging equivalent
//! states keeps layers narrow, so the width — the largest layer — can be
//! far below the `2^depth` explosion of the full protocol tree.
//!
//! Compilation tabulates each party's successor choices into per-layer
//! index lists and runs them through secure pointer jumping: one OT per
//! layer, of width equal to the layer size padded up to a power of two
//! (the XOR position permutation needs a power-of-two domain).

pub mod programs;
pub mod random;

use std::sync::Arc;

use crate::bits::BitString;
use crate::exec::{Endpoint, OtBackendKind, ProtoError};
use crate::ind::{gind_alice, gind_bob, GindShape, IndError, IndexedList};

/// A node position inside a branching program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpNode {
    /// Layer, `0..=depth`.
    pub layer: usize,
    /// Position within the layer.
    pub index: u64,
}

/// A layered branching program over inputs `X` (Alice) and `Y` (Bob).
/// Shared successor callback over one party's input.
pub type SuccessorFn<I> = Arc<dyn Fn(&BpNode, &I) -> u64 + Send + Sync>;
/// Shared output-value callback on final-layer nodes.
pub type BpLeafFn = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

/// A layered branching program over inputs `X` (Alice) and `Y` (Bob).
#[derive(Clone)]
pub struct BranchingProgram<X, Y> {
    /// Node count per layer; `layer_sizes[0] == 1`, length `depth + 1`.
    pub layer_sizes: Vec<u64>,
    /// Bits of an output value.
    pub leaf_bits: usize,
    a: SuccessorFn<X>,
    b: SuccessorFn<Y>,
    leaf: BpLeafFn,
}

impl<X, Y> BranchingProgram<X, Y> {
    /// Builds a program; `layer_sizes` spans layers `0..=depth` with a
    /// single entry node and an even depth.
    pub fn new(
        layer_sizes: Vec<u64>,
        leaf_bits: usize,
        a: impl Fn(&BpNode, &X) -> u64 + Send + Sync + 'static,
        b: impl Fn(&BpNode, &Y) -> u64 + Send + Sync + 'static,
        leaf: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> BranchingProgram<X, Y> {
        assert!(layer_sizes.len() >= 3, "need at least layers 0..=2");
        assert_eq!(layer_sizes[0], 1, "layer 0 must hold exactly one node");
        assert!(
            (layer_sizes.len() - 1).is_multiple_of(2),
            "depth must be even"
        );
        assert!(layer_sizes.iter().all(|&s| s >= 1));
        BranchingProgram {
            layer_sizes,
            leaf_bits,
            a: Arc::new(a),
            b: Arc::new(b),
            leaf: Arc::new(leaf),
        }
    }

    /// Number of edge layers.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// The width: the largest layer.
    pub fn width(&self) -> u64 {
        *self.layer_sizes.iter().max().unwrap()
    }

    /// Successor of a node under this party's labels.
    pub fn successor_a(&self, node: &BpNode, x: &X) -> u64 {
        debug_assert!(node.layer.is_multiple_of(2) && node.layer < self.depth());
        (self.a)(node, x)
    }

    /// Successor under Bob's labels.
    pub fn successor_b(&self, node: &BpNode, y: &Y) -> u64 {
        debug_assert!(node.layer % 2 == 1);
        (self.b)(node, y)
    }

    /// Output value of final-layer node `index`.
    pub fn leaf_value(&self, index: u64) -> u64 {
        (self.leaf)(index)
    }
}

/// Walks the program on plaintext inputs and returns the output value.
pub fn run_plaintext_bp<X, Y>(bp: &BranchingProgram<X, Y>, x: &X, y: &Y) -> u64 {
    let mut node = BpNode { layer: 0, index: 0 };
    while node.layer < bp.depth() {
        let next = if node.layer.is_multiple_of(2) {
            bp.successor_a(&node, x)
        } else {
            bp.successor_b(&node, y)
        };
        debug_assert!(
            next < bp.layer_sizes[node.layer + 1],
            "successor {next} escapes layer {}",
            node.layer + 1
        );
        node = BpNode {
            layer: node.layer + 1,
            index: next,
        };
    }
    bp.leaf_value(node.index)
}

fn padded(width: u64) -> usize {
    (width as usize).next_power_of_two()
}

fn index_bits(width: u64) -> usize {
    padded(width).trailing_zeros() as usize
}

/// The pointer-jumping shape of a program: per-layer widths padded to
/// powers of two, which is what the per-layer OTs use.
pub fn bp_shape<X, Y>(bp: &BranchingProgram<X, Y>) -> GindShape {
    GindShape {
        widths: (1..=bp.depth())
            .map(|l| padded(bp.layer_sizes[l]))
            .collect(),
        last_elem_bits: bp.leaf_bits,
    }
}

fn bp_level_list<X, Y, F>(bp: &BranchingProgram<X, Y>, layer: usize, entry_at: F) -> IndexedList
where
    F: Fn(u64) -> u64 + Send + Sync + 'static,
{
    let c = bp.depth();
    let size = bp.layer_sizes[layer];
    let width = padded(size);
    let elem_bits = if layer == c {
        bp.leaf_bits
    } else {
        index_bits(bp.layer_sizes[layer + 1])
    };
    let entries: Vec<BitString> = (0..width as u64)
        .map(|i| {
            // padding positions never get selected; zero entries keep shape
            let v = if i < size { entry_at(i) } else { 0 };
            BitString::from_u64(v, elem_bits)
        })
        .collect();
    IndexedList::dense(entries, elem_bits).expect("padded width is a power of two")
}

/// Alice's hard-wired lists: her first move plus one list per even layer,
/// the final one carrying output values.
pub fn induce_bp_lists_alice<X, Y>(bp: &BranchingProgram<X, Y>, x: &X) -> (u64, Vec<IndexedList>)
where
    X: Clone + Send + Sync + 'static,
    Y: 'static,
{
    let c = bp.depth();
    let j = bp.successor_a(&BpNode { layer: 0, index: 0 }, x);
    let lists = (2..=c)
        .step_by(2)
        .map(|layer| {
            let a = bp.a.clone();
            let leaf = bp.leaf.clone();
            let input = x.clone();
            let is_leaf = layer == c;
            bp_level_list(bp, layer, move |i| {
                if is_leaf {
                    leaf(i)
                } else {
                    a(&BpNode { layer, index: i }, &input)
                }
            })
        })
        .collect();
    (j, lists)
}

/// Bob's hard-wired lists, one per odd layer.
pub fn induce_bp_lists_bob<X, Y>(bp: &BranchingProgram<X, Y>, y: &Y) -> Vec<IndexedList>
where
    X: 'static,
    Y: Clone + Send + Sync + 'static,
{
    let c = bp.depth();
    (1..c)
        .step_by(2)
        .map(|layer| {
            let b = bp.b.clone();
            let input = y.clone();
            bp_level_list(bp, layer, move |i| b(&BpNode { layer, index: i }, &input))
        })
        .collect()
}

fn check_bp_budget<X, Y>(
    ep: &Endpoint,
    bp: &BranchingProgram<X, Y>,
    opts: &crate::cc::CompileOpts,
) -> Result<(), ProtoError> {
    let total: u64 = (1..=bp.depth())
        .map(|l| padded(bp.layer_sizes[l]) as u64)
        .sum();
    if ep.backend != OtBackendKind::Ideal && total > opts.max_total_entries {
        return Err(ProtoError::Compile(format!(
            "program needs {total} list entries, over the budget of {}",
            opts.max_total_entries
        )));
    }
    Ok(())
}

/// Alice's side of program compilation: her XOR share of the output.
pub fn compile_and_run_bp_alice<X, Y>(
    ep: &mut Endpoint,
    bp: &BranchingProgram<X, Y>,
    x: &X,
    opts: &crate::cc::CompileOpts,
) -> Result<BitString, ProtoError>
where
    X: Clone + Send + Sync + 'static,
    Y: 'static,
{
    check_bp_budget(ep, bp, opts)?;
    let (j, lists) = induce_bp_lists_alice(bp, x);
    let shape = bp_shape(bp);
    let first_bits = index_bits(bp.layer_sizes[1]);
    gind_alice(ep, &shape, BitString::from_u64(j, first_bits), &lists)
}

/// Bob's side of program compilation.
pub fn compile_and_run_bp_bob<X, Y>(
    ep: &mut Endpoint,
    bp: &BranchingProgram<X, Y>,
    y: &Y,
    opts: &crate::cc::CompileOpts,
) -> Result<BitString, ProtoError>
where
    X: 'static,
    Y: Clone + Send + Sync + 'static,
{
    check_bp_budget(ep, bp, opts)?;
    let lists = induce_bp_lists_bob(bp, y);
    let shape = bp_shape(bp);
    let first_bits = index_bits(bp.layer_sizes[1]);
    gind_bob(ep, &shape, BitString::zeros(first_bits), &lists)
}

// --------------------------------------------------------- tabulated form

/// A fully tabulated program: both inputs hard-wired, one successor per
/// node. This is the textual serialization used by golden tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabulatedBp {
    /// Node count per layer.
    pub layer_sizes: Vec<u64>,
    /// Successor per node, for layers `0..depth`.
    pub successors: Vec<Vec<u64>>,
    /// Output value per final-layer node.
    pub leaf_values: Vec<u64>,
}

impl TabulatedBp {
    /// Hard-wires both inputs of a program.
    pub fn tabulate<X, Y>(bp: &BranchingProgram<X, Y>, x: &X, y: &Y) -> TabulatedBp {
        let c = bp.depth();
        let successors = (0..c)
            .map(|layer| {
                (0..bp.layer_sizes[layer])
                    .map(|index| {
                        let node = BpNode { layer, index };
                        if layer % 2 == 0 {
                            bp.successor_a(&node, x)
                        } else {
                            bp.successor_b(&node, y)
                        }
                    })
                    .collect()
            })
            .collect();
        let leaf_values = (0..bp.layer_sizes[c]).map(|i| bp.leaf_value(i)).collect();
        TabulatedBp {
            layer_sizes: bp.layer_sizes.clone(),
            successors,
            leaf_values,
        }
    }

    /// Walks the tabulated program.
    pub fn walk(&self) -> u64 {
        let mut idx = 0u64;
        for layer in self.successors.iter() {
            idx = layer[idx as usize];
        }
        self.leaf_values[idx as usize]
    }

    /// Textual form: a header with the layer sizes, one successor line per
    /// layer, then the leaf values.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let sizes: Vec<String> = self.layer_sizes.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("c: {}\n", self.layer_sizes.len() - 1));
        out.push_str(&format!("sizes: {}\n", sizes.join(" ")));
        for (layer, succ) in self.successors.iter().enumerate() {
            let vals: Vec<String> = succ.iter().map(|s| s.to_string()).collect();
            out.push_str(&format!("succ{layer}: {}\n", vals.join(" ")));
        }
        let leaves: Vec<String> = self.leaf_values.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("leaves: {}\n", leaves.join(" ")));
        out
    }

    /// Parses the textual form, validating sizes and successor ranges.
    pub fn parse(text: &str) -> Result<TabulatedBp, IndError> {
        let mut c = None;
        let mut sizes: Option<Vec<u64>> = None;
        let mut successors: Vec<(usize, Vec<u64>)> = Vec::new();
        let mut leaves: Option<Vec<u64>> = None;
        let bad = |msg: String| IndError::BadShape(msg);
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line
                .split_once(':')
                .ok_or_else(|| bad(format!("bad line: {line}")))?;
            let nums: Result<Vec<u64>, _> =
                rest.split_whitespace().map(|t| t.parse::<u64>()).collect();
            let nums = nums.map_err(|e| bad(format!("bad number: {e}")))?;
            match head.trim() {
                "c" => c = nums.first().copied().map(|v| v as usize),
                "sizes" => sizes = Some(nums),
                "leaves" => leaves = Some(nums),
                other if other.starts_with("succ") => {
                    let layer: usize = other[4..]
                        .parse()
                        .map_err(|e| bad(format!("bad succ layer: {e}")))?;
                    successors.push((layer, nums));
                }
                other => return Err(bad(format!("unknown key {other}"))),
            }
        }
        let c = c.ok_or_else(|| bad("missing c".into()))?;
        let layer_sizes = sizes.ok_or_else(|| bad("missing sizes".into()))?;
        let leaf_values = leaves.ok_or_else(|| bad("missing leaves".into()))?;
        if layer_sizes.len() != c + 1 {
            return Err(bad("sizes length must be c + 1".into()));
        }
        successors.sort_by_key(|(l, _)| *l);
        if successors.len() != c || successors.iter().enumerate().any(|(i, (l, _))| i != *l) {
            return Err(bad("need successor lines for layers 0..c".into()));
        }
        let successors: Vec<Vec<u64>> = successors.into_iter().map(|(_, s)| s).collect();
        for (layer, succ) in successors.iter().enumerate() {
            if succ.len() != layer_sizes[layer] as usize {
                return Err(bad(format!("succ{layer} has wrong node count")));
            }
            for &v in succ {
                if v >= layer_sizes[layer + 1] {
                    return Err(IndError::EntryOutOfRange {
                        value: v,
                        position: layer,
                        next_width: layer_sizes[layer + 1] as usize,
                    });
                }
            }
        }
        if leaf_values.len() != layer_sizes[c] as usize {
            return Err(bad("leaf count mismatch".into()));
        }
        Ok(TabulatedBp {
            layer_sizes,
            successors,
            leaf_values,
        })
    }
}
