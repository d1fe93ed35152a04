//! Protocol trees in the communication-complexity model and their
//! compilation into private protocols.
//!
//! A protocol tree is a full binary tree of even height: even-depth nodes
//! are labeled with Alice's next-message functions, odd-depth nodes with
//! Bob's, and leaves with output values. Walking the tree by those labels
//! runs the protocol in the clear. Compilation hard-wires each party's
//! choices into per-level index lists (node `i` at level `ell` maps to
//! child `2i + choice`), then runs the lists through secure pointer
//! jumping, so the whole transcript stays hidden and the parties end with
//! XOR shares of the leaf value.
//!
//! Nodes are numbered from the left: a node's index read in binary, most
//! significant bit first, is exactly the message path from the root.

use std::sync::Arc;

use crate::bits::{BitString, Role};
use crate::exec::{Endpoint, OtBackendKind, ProtoError};
use crate::ind::{gind_alice, gind_bob, GindInstance, GindShape, IndError, IndexedList};

/// A node position: `index` among the `2^depth` nodes of its depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    /// Depth below the root.
    pub depth: usize,
    /// Position from the left, `0 <= index < 2^depth`.
    pub index: u64,
}

impl TreeNode {
    /// The root.
    pub fn root() -> TreeNode {
        TreeNode { depth: 0, index: 0 }
    }

    /// Message bit `t` on the path from the root to this node.
    pub fn path_bit(&self, t: usize) -> bool {
        assert!(t < self.depth, "path bit {t} beyond depth {}", self.depth);
        (self.index >> (self.depth - 1 - t)) & 1 == 1
    }

    /// The child reached by sending `bit`.
    pub fn child(&self, bit: bool) -> TreeNode {
        TreeNode {
            depth: self.depth + 1,
            index: 2 * self.index + u64::from(bit),
        }
    }
}

/// A full binary protocol tree over inputs `X` (Alice) and `Y` (Bob).
///
/// Labels are host-language callbacks so trees whose explicit form would be
/// huge stay cheap to describe; the induced lists below are their tabulated
/// serialization.
/// Shared label callback over one party's input.
pub type TreeLabelFn<I> = Arc<dyn Fn(&TreeNode, &I) -> bool + Send + Sync>;
/// Shared leaf-value callback.
pub type LeafFn = Arc<dyn Fn(&TreeNode) -> u64 + Send + Sync>;

/// A full binary protocol tree over inputs `X` (Alice) and `Y` (Bob).
#[derive(Clone)]
pub struct ProtocolTree<X, Y> {
    /// Tree height; even, with Alice controlling even depths.
    pub depth: usize,
    /// Bits of a leaf value.
    pub leaf_bits: usize,
    a: TreeLabelFn<X>,
    b: TreeLabelFn<Y>,
    leaf: LeafFn,
}

impl<X, Y> ProtocolTree<X, Y> {
    /// Builds a tree from its label functions.
    pub fn new(
        depth: usize,
        leaf_bits: usize,
        a: impl Fn(&TreeNode, &X) -> bool + Send + Sync + 'static,
        b: impl Fn(&TreeNode, &Y) -> bool + Send + Sync + 'static,
        leaf: impl Fn(&TreeNode) -> u64 + Send + Sync + 'static,
    ) -> ProtocolTree<X, Y> {
        assert!(
            depth >= 2 && depth.is_multiple_of(2),
            "tree height must be even and positive"
        );
        ProtocolTree {
            depth,
            leaf_bits,
            a: Arc::new(a),
            b: Arc::new(b),
            leaf: Arc::new(leaf),
        }
    }

    /// Alice's label at an even-depth node.
    pub fn a_label(&self, node: &TreeNode, x: &X) -> bool {
        debug_assert!(node.depth.is_multiple_of(2));
        (self.a)(node, x)
    }

    /// Bob's label at an odd-depth node.
    pub fn b_label(&self, node: &TreeNode, y: &Y) -> bool {
        debug_assert!(node.depth % 2 == 1);
        (self.b)(node, y)
    }

    /// Value of a leaf.
    pub fn leaf_value(&self, node: &TreeNode) -> u64 {
        debug_assert_eq!(node.depth, self.depth);
        (self.leaf)(node)
    }
}

/// Runs the tree in the clear and returns the leaf value reached.
pub fn run_plaintext<X, Y>(tree: &ProtocolTree<X, Y>, x: &X, y: &Y) -> u64 {
    let mut node = TreeNode::root();
    while node.depth < tree.depth {
        let bit = if node.depth.is_multiple_of(2) {
            tree.a_label(&node, x)
        } else {
            tree.b_label(&node, y)
        };
        node = node.child(bit);
    }
    tree.leaf_value(&node)
}

/// The bit-exchange distance protocol: Alice sends her bits one at a time,
/// Bob answers each with agree/disagree, and the leaf counts disagreements.
pub fn build_hamming_tree(n: usize) -> ProtocolTree<BitString, BitString> {
    assert!(n >= 1);
    let leaf_bits = 64 - (n as u64).leading_zeros() as usize;
    ProtocolTree::new(
        2 * n,
        leaf_bits,
        |node, x: &BitString| x.bit(node.depth / 2),
        |node, y: &BitString| y.bit(node.depth / 2) != node.path_bit(node.depth - 1),
        |leaf| {
            (0..leaf.depth / 2)
                .map(|i| u64::from(leaf.path_bit(2 * i + 1)))
                .sum()
        },
    )
}

/// One party's hard-wired view of a tree: an initial index for Alice and
/// one child-index list per controlled level.
#[derive(Debug, Clone)]
pub struct InducedLists {
    /// Which party the lists belong to.
    pub role: Role,
    /// Alice's first move, an index into level 1; `None` for Bob.
    pub initial_index: Option<u64>,
    /// `(level, list)` pairs, levels ascending; Alice holds the even
    /// levels (the last carrying leaf values), Bob the odd ones.
    pub levels: Vec<(usize, IndexedList)>,
}

/// Entry count threshold above which induced lists are generated lazily.
const DENSE_LIMIT: u64 = 1 << 16;

fn build_level(
    width: u64,
    elem_bits: usize,
    entry_at: impl Fn(usize) -> BitString + Send + Sync + 'static,
) -> IndexedList {
    if width <= DENSE_LIMIT {
        let entries: Vec<BitString> = (0..width as usize).map(&entry_at).collect();
        IndexedList::dense(entries, elem_bits).expect("width is a power of two")
    } else {
        IndexedList::lazy(width as usize, elem_bits, entry_at).expect("width is a power of two")
    }
}

/// Hard-wires `x` into the tree for Alice: her first move `j` plus the even
/// levels, the last list carrying leaf values.
pub fn induce_lists_alice<X, Y>(tree: &ProtocolTree<X, Y>, x: &X) -> InducedLists
where
    X: Clone + Send + Sync + 'static,
    Y: 'static,
{
    let c = tree.depth;
    let levels = (2..=c)
        .step_by(2)
        .map(|level| {
            let elem_bits = if level == c {
                tree.leaf_bits
            } else {
                level + 1
            };
            let a = tree.a.clone();
            let leaf = tree.leaf.clone();
            let input = x.clone();
            let list = build_level(1u64 << level, elem_bits, move |i| {
                let node = TreeNode {
                    depth: level,
                    index: i as u64,
                };
                let value = if level == c {
                    leaf(&node)
                } else {
                    2 * node.index + u64::from(a(&node, &input))
                };
                BitString::from_u64(value, elem_bits)
            });
            (level, list)
        })
        .collect();
    InducedLists {
        role: Role::A,
        initial_index: Some(u64::from(tree.a_label(&TreeNode::root(), x))),
        levels,
    }
}

/// Hard-wires `y` into the tree for Bob: the odd levels.
pub fn induce_lists_bob<X, Y>(tree: &ProtocolTree<X, Y>, y: &Y) -> InducedLists
where
    X: 'static,
    Y: Clone + Send + Sync + 'static,
{
    let c = tree.depth;
    let levels = (1..c)
        .step_by(2)
        .map(|level| {
            let elem_bits = level + 1;
            let b = tree.b.clone();
            let input = y.clone();
            let list = build_level(1u64 << level, elem_bits, move |i| {
                let node = TreeNode {
                    depth: level,
                    index: i as u64,
                };
                let value = 2 * node.index + u64::from(b(&node, &input));
                BitString::from_u64(value, elem_bits)
            });
            (level, list)
        })
        .collect();
    InducedLists {
        role: Role::B,
        initial_index: None,
        levels,
    }
}

/// Compilation limits.
#[derive(Debug, Clone, Copy)]
pub struct CompileOpts {
    /// Cap on total induced entries when the backend has to touch every
    /// entry; compile refuses beyond it instead of thrashing.
    pub max_total_entries: u64,
}

impl Default for CompileOpts {
    fn default() -> Self {
        CompileOpts {
            max_total_entries: 1 << 22,
        }
    }
}

/// The pointer-jumping shape of a tree of height `c`: widths `2, 4, ..., 2^c`.
pub fn tree_shape(c: usize, leaf_bits: usize) -> GindShape {
    GindShape {
        widths: (1..=c).map(|ell| 1usize << ell).collect(),
        last_elem_bits: leaf_bits,
    }
}

fn check_budget(ep: &Endpoint, c: usize, opts: &CompileOpts) -> Result<(), ProtoError> {
    if c >= 48 {
        return Err(ProtoError::Compile(format!(
            "tree height {c} is beyond addressable list sizes"
        )));
    }
    let total: u64 = (1..=c as u32).map(|ell| 1u64 << ell).sum();
    if ep.backend != OtBackendKind::Ideal && total > opts.max_total_entries {
        return Err(ProtoError::Compile(format!(
            "2^{c}-leaf tree needs {total} list entries, over the budget of {} \
             for a backend that touches every entry",
            opts.max_total_entries
        )));
    }
    Ok(())
}

/// Alice's side of tree compilation: returns her XOR share of the leaf
/// value reached on the joint inputs.
pub fn compile_and_run_cc_alice<X, Y>(
    ep: &mut Endpoint,
    tree: &ProtocolTree<X, Y>,
    x: &X,
    opts: &CompileOpts,
) -> Result<BitString, ProtoError>
where
    X: Clone + Send + Sync + 'static,
    Y: 'static,
{
    check_budget(ep, tree.depth, opts)?;
    let induced = induce_lists_alice(tree, x);
    let lists: Vec<IndexedList> = induced.levels.into_iter().map(|(_, l)| l).collect();
    let shape = tree_shape(tree.depth, tree.leaf_bits);
    let j = induced.initial_index.expect("Alice holds the first move");
    gind_alice(ep, &shape, BitString::from_u64(j, 1), &lists)
}

/// Bob's side of tree compilation.
pub fn compile_and_run_cc_bob<X, Y>(
    ep: &mut Endpoint,
    tree: &ProtocolTree<X, Y>,
    y: &Y,
    opts: &CompileOpts,
) -> Result<BitString, ProtoError>
where
    X: 'static,
    Y: Clone + Send + Sync + 'static,
{
    check_budget(ep, tree.depth, opts)?;
    let induced = induce_lists_bob(tree, y);
    let lists: Vec<IndexedList> = induced.levels.into_iter().map(|(_, l)| l).collect();
    let shape = tree_shape(tree.depth, tree.leaf_bits);
    gind_bob(ep, &shape, BitString::zeros(1), &lists)
}

/// Share-reveal step appended after compilation when both parties should
/// learn the value: each sends its share, each reconstructs.
pub fn reveal_share(ep: &mut Endpoint, my_share: &BitString) -> Result<BitString, ProtoError> {
    use crate::channel::FrameType;
    ep.chan.send(FrameType::Data, &my_share.to_wire())?;
    let theirs = BitString::from_wire(&ep.chan.recv_expect(FrameType::Data)?)?;
    ep.meter.lock().unwrap().note_rounds(1);
    Ok(my_share.xor(&theirs)?)
}

// ------------------------------------------------------------ list dumps

/// Renders induced lists in the line-per-level dump format: `j: <n>` for
/// Alice's first move, then `x<level>:` / `y<level>:` lines with decimal
/// entries.
pub fn dump_lists(lists: &InducedLists) -> String {
    let mut out = String::new();
    if let Some(j) = lists.initial_index {
        out.push_str(&format!("j: {j}\n"));
    }
    let tag = match lists.role {
        Role::A => 'x',
        Role::B => 'y',
    };
    for (level, list) in &lists.levels {
        let entries: Vec<String> = (0..list.width)
            .map(|i| list.get(i).to_u64().to_string())
            .collect();
        out.push_str(&format!("{tag}{level}: {}\n", entries.join(" ")));
    }
    out
}

/// Parses a complete instance (both parties' dumps concatenated) back into
/// a [`GindInstance`]. Level numbering, widths and entry ranges are
/// validated.
pub fn parse_instance(text: &str, last_elem_bits: usize) -> Result<GindInstance, IndError> {
    let mut initial = None;
    let mut levels: Vec<(usize, char, Vec<u64>)> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| IndError::BadShape(format!("bad line: {line}")))?;
        if head.trim() == "j" {
            initial = Some(
                rest.trim()
                    .parse::<u64>()
                    .map_err(|e| IndError::BadShape(format!("bad initial index: {e}")))?,
            );
            continue;
        }
        let tag = head
            .chars()
            .next()
            .ok_or_else(|| IndError::BadShape("empty level tag".into()))?;
        if tag != 'x' && tag != 'y' {
            return Err(IndError::BadShape(format!("unknown level tag {tag}")));
        }
        let level: usize = head[1..]
            .parse()
            .map_err(|e| IndError::BadShape(format!("bad level number: {e}")))?;
        let entries: Result<Vec<u64>, _> =
            rest.split_whitespace().map(|t| t.parse::<u64>()).collect();
        let entries = entries.map_err(|e| IndError::BadShape(format!("bad entry: {e}")))?;
        levels.push((level, tag, entries));
    }
    levels.sort_by_key(|(level, ..)| *level);
    let c = levels.len();
    if c == 0 || !c.is_multiple_of(2) {
        return Err(IndError::BadShape(format!(
            "need a positive even number of levels, got {c}"
        )));
    }
    let mut widths = Vec::with_capacity(c);
    let mut odd_lists = Vec::new();
    let mut even_lists = Vec::new();
    for (pos, (level, tag, entries)) in levels.into_iter().enumerate() {
        if level != pos + 1 {
            return Err(IndError::BadShape(format!(
                "levels must be 1..=c without gaps; found {level} at position {}",
                pos + 1
            )));
        }
        let expect_tag = if level % 2 == 1 { 'y' } else { 'x' };
        if tag != expect_tag {
            return Err(IndError::BadShape(format!(
                "level {level} should be tagged {expect_tag}"
            )));
        }
        if !entries.len().is_power_of_two() {
            return Err(IndError::WidthNotPowerOfTwo(entries.len()));
        }
        widths.push(entries.len());
        if level % 2 == 1 {
            odd_lists.push(entries);
        } else {
            even_lists.push(entries);
        }
    }
    let shape = GindShape {
        widths,
        last_elem_bits,
    };
    shape.validate()?;
    let inst = GindInstance {
        shape,
        initial_index: initial.ok_or_else(|| IndError::BadShape("missing j line".into()))?,
        odd_lists,
        even_lists,
    };
    for ell in 1..c {
        let list = if ell % 2 == 1 {
            &inst.odd_lists[(ell - 1) / 2]
        } else {
            &inst.even_lists[ell / 2 - 1]
        };
        for (i, &v) in list.iter().enumerate() {
            if v >= inst.shape.widths[ell] as u64 {
                return Err(IndError::EntryOutOfRange {
                    value: v,
                    position: i,
                    next_width: inst.shape.widths[ell],
                });
            }
        }
    }
    Ok(inst)
}
