//! Circuits whose gates are look-up tables, evaluated over XOR-shared
//! wires.
//!
//! A table read with a shared index and shared entries costs exactly two
//! oblivious transfers of the table width: each party plays list owner once
//! with its own table share, using its index share as the position
//! permutation, and the two resulting shares XOR into a fresh sharing of
//! `R_A[j] ⊕ R_B[j]` with `j = j_A ⊕ j_B`. The two transfers are
//! independent and run within one round trip.
//!
//! Wires carry fixed-width bit strings; every wire is written exactly once
//! (constants and inputs at load, gate outputs afterwards), which is what
//! makes the circuit form write-oblivious. Gate outputs may be split
//! across several wires and wires may be concatenated for free — both are
//! local share manipulations.

use std::sync::Arc;

use thiserror::Error;

use crate::bits::{BitString, Role};
use crate::exec::{Endpoint, ProtoError};
use crate::ind::{ind_chooser_inner, ind_sender_inner, IndexedList};

/// Wire identifier inside one circuit.
pub type WireId = usize;

/// Circuit structure failures detected at load or build time.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LutError {
    /// A wire was written twice or never written before use.
    #[error("wire {0} violates single-write evaluation order")]
    WireOrder(WireId),
    /// Declared widths disagree somewhere.
    #[error("width mismatch: {0}")]
    Width(String),
    /// Table shape invalid.
    #[error("bad table: {0}")]
    Table(String),
    /// Inputs supplied at evaluation do not match the circuit.
    #[error("bad inputs: {0}")]
    Inputs(String),
}

/// Where a gate's table entries come from.
#[derive(Debug, Clone)]
pub enum TableSource {
    /// A party's private (or public) table; the counterpart contributes
    /// all-zero shares.
    Owned {
        /// The contributing party.
        owner: Role,
        /// Entries, each `entry_bits` long; missing tail positions up to
        /// the power-of-two width read as zero.
        entries: Arc<Vec<BitString>>,
    },
    /// Entries live on wires, i.e. both parties hold shares of them.
    Wires(Vec<WireId>),
}

/// One table-read gate.
#[derive(Debug, Clone)]
pub struct LutGate {
    /// Table width; a power of two.
    pub width: usize,
    /// Bits per entry.
    pub entry_bits: usize,
    /// Wires whose concatenated bits form the shared index; total bits
    /// must equal `log2(width)`.
    pub index_wires: Vec<WireId>,
    /// The entries.
    pub table: TableSource,
    /// Output wires; their widths partition `entry_bits` in order.
    pub outputs: Vec<WireId>,
}

/// A circuit element.
#[derive(Debug, Clone)]
pub enum Gate {
    /// A table read: two OTs of the table width.
    Lut(LutGate),
    /// Free local concatenation of wire values.
    Concat {
        /// Wires joined in order.
        inputs: Vec<WireId>,
        /// Receiving wire.
        output: WireId,
    },
}

/// A circuit with look-up-table gates.
#[derive(Debug, Clone, Default)]
pub struct LutCircuit {
    /// Bit width per wire.
    pub wire_bits: Vec<usize>,
    /// Publicly known wires preloaded at evaluation.
    pub constants: Vec<(WireId, BitString)>,
    /// Alice's input wires.
    pub inputs_a: Vec<WireId>,
    /// Bob's input wires.
    pub inputs_b: Vec<WireId>,
    /// Gates in evaluation order.
    pub gates: Vec<Gate>,
    /// Output wires.
    pub outputs: Vec<WireId>,
}

impl LutCircuit {
    /// Number of table-read gates.
    pub fn lut_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Lut(_)))
            .count()
    }

    /// Checks the single-write discipline, widths and table shapes.
    pub fn validate(&self) -> Result<(), LutError> {
        let n = self.wire_bits.len();
        let mut written = vec![false; n];
        fn write(w: WireId, written: &mut [bool]) -> Result<(), LutError> {
            if w >= written.len() || written[w] {
                return Err(LutError::WireOrder(w));
            }
            written[w] = true;
            Ok(())
        }
        fn read(w: WireId, written: &[bool]) -> Result<(), LutError> {
            if w >= written.len() || !written[w] {
                return Err(LutError::WireOrder(w));
            }
            Ok(())
        }
        for (w, value) in &self.constants {
            if *w >= n || value.len() != self.wire_bits[*w] {
                return Err(LutError::Width(format!("constant on wire {w}")));
            }
            write(*w, &mut written)?;
        }
        for &w in self.inputs_a.iter().chain(&self.inputs_b) {
            write(w, &mut written)?;
        }
        for gate in &self.gates {
            match gate {
                Gate::Lut(g) => {
                    if !g.width.is_power_of_two() {
                        return Err(LutError::Width(format!("gate width {}", g.width)));
                    }
                    let idx_bits: usize = g.index_wires.iter().map(|&w| self.wire_bits[w]).sum();
                    if (1usize << idx_bits) != g.width {
                        return Err(LutError::Width(format!(
                            "index wires carry {idx_bits} bits for width {}",
                            g.width
                        )));
                    }
                    for &w in &g.index_wires {
                        read(w, &written)?;
                    }
                    match &g.table {
                        TableSource::Owned { entries, .. } => {
                            if entries.len() > g.width {
                                return Err(LutError::Table("more entries than width".into()));
                            }
                            if entries.iter().any(|e| e.len() != g.entry_bits) {
                                return Err(LutError::Table("entry width mismatch".into()));
                            }
                        }
                        TableSource::Wires(ws) => {
                            if ws.len() > g.width {
                                return Err(LutError::Table("more entries than width".into()));
                            }
                            for &w in ws {
                                read(w, &written)?;
                                if self.wire_bits[w] != g.entry_bits {
                                    return Err(LutError::Table(
                                        "entry wire width mismatch".into(),
                                    ));
                                }
                            }
                        }
                    }
                    let out_bits: usize = g.outputs.iter().map(|&w| self.wire_bits[w]).sum();
                    if out_bits != g.entry_bits {
                        return Err(LutError::Width(
                            "gate outputs must partition the entry bits".into(),
                        ));
                    }
                    for &w in &g.outputs {
                        write(w, &mut written)?;
                    }
                }
                Gate::Concat { inputs, output } => {
                    let total: usize = inputs.iter().map(|&w| self.wire_bits[w]).sum();
                    if *output >= n || total != self.wire_bits[*output] {
                        return Err(LutError::Width("concat width mismatch".into()));
                    }
                    for &w in inputs {
                        read(w, &written)?;
                    }
                    write(*output, &mut written)?;
                }
            }
        }
        for &w in &self.outputs {
            read(w, &written)?;
        }
        Ok(())
    }
}

fn table_entry(entries: &[BitString], i: usize, entry_bits: usize) -> BitString {
    entries
        .get(i)
        .cloned()
        .unwrap_or_else(|| BitString::zeros(entry_bits))
}

struct WireStore {
    values: Vec<Option<BitString>>,
}

impl WireStore {
    fn new(n: usize) -> WireStore {
        WireStore {
            values: vec![None; n],
        }
    }

    fn set(&mut self, w: WireId, v: BitString) {
        debug_assert!(self.values[w].is_none());
        self.values[w] = Some(v);
    }

    fn get(&self, w: WireId) -> &BitString {
        self.values[w].as_ref().expect("validated read-after-write")
    }

    fn concat_of(&self, wires: &[WireId]) -> BitString {
        let mut out = BitString::zeros(0);
        for &w in wires {
            out = out.concat(self.get(w));
        }
        out
    }
}

fn split_onto(store: &mut WireStore, value: &BitString, outputs: &[WireId], wire_bits: &[usize]) {
    let mut at = 0;
    for &w in outputs {
        let bits = wire_bits[w];
        store.set(w, value.slice(at, bits));
        at += bits;
    }
}

fn load_inputs(
    circuit: &LutCircuit,
    store: &mut WireStore,
    wires: &[WireId],
    values: &[BitString],
) -> Result<(), LutError> {
    if wires.len() != values.len() {
        return Err(LutError::Inputs(format!(
            "expected {} inputs, got {}",
            wires.len(),
            values.len()
        )));
    }
    for (&w, v) in wires.iter().zip(values) {
        if v.len() != circuit.wire_bits[w] {
            return Err(LutError::Inputs(format!("input wire {w} width mismatch")));
        }
        store.set(w, v.clone());
    }
    Ok(())
}

/// Evaluates the circuit in the clear: both inputs known, tables read
/// directly. The reference oracle for the secure evaluation.
pub fn plain_eval(
    circuit: &LutCircuit,
    a_inputs: &[BitString],
    b_inputs: &[BitString],
) -> Result<Vec<BitString>, LutError> {
    circuit.validate()?;
    let mut store = WireStore::new(circuit.wire_bits.len());
    for (w, v) in &circuit.constants {
        store.set(*w, v.clone());
    }
    load_inputs(circuit, &mut store, &circuit.inputs_a, a_inputs)?;
    load_inputs(circuit, &mut store, &circuit.inputs_b, b_inputs)?;
    for gate in &circuit.gates {
        match gate {
            Gate::Lut(g) => {
                let j = store.concat_of(&g.index_wires).to_u64() as usize;
                let value = match &g.table {
                    TableSource::Owned { entries, .. } => table_entry(entries, j, g.entry_bits),
                    TableSource::Wires(ws) => {
                        if j < ws.len() {
                            store.get(ws[j]).clone()
                        } else {
                            BitString::zeros(g.entry_bits)
                        }
                    }
                };
                split_onto(&mut store, &value, &g.outputs, &circuit.wire_bits);
            }
            Gate::Concat { inputs, output } => {
                let v = store.concat_of(inputs);
                store.set(*output, v);
            }
        }
    }
    Ok(circuit
        .outputs
        .iter()
        .map(|&w| store.get(w).clone())
        .collect())
}

/// One side of the private table read: both parties call this with their
/// index share and their table share; the returned shares XOR to
/// `R_A[j_A ⊕ j_B] ⊕ R_B[j_A ⊕ j_B]`. Exactly two OTs of `width`,
/// counted as a single round since they are independent.
pub fn lut_eval(
    ep: &mut Endpoint,
    index_share: &BitString,
    my_table: &IndexedList,
) -> Result<BitString, ProtoError> {
    ep.meter
        .lock()
        .unwrap()
        .note_rounds(ep.backend.round_cost());
    let (s1, s2) = match ep.role {
        Role::A => {
            let s1 = ind_chooser_inner(ep, index_share, my_table.width, my_table.elem_bits, false)?;
            let s2 = ind_sender_inner(ep, index_share, my_table, false)?;
            (s1, s2)
        }
        Role::B => {
            let s1 = ind_sender_inner(ep, index_share, my_table, false)?;
            let s2 = ind_chooser_inner(ep, index_share, my_table.width, my_table.elem_bits, false)?;
            (s1, s2)
        }
    };
    Ok(s1.xor(&s2)?)
}

fn my_table_share(
    ep: &Endpoint,
    gate: &LutGate,
    store: &WireStore,
) -> Result<IndexedList, ProtoError> {
    let entries: Vec<BitString> = match &gate.table {
        TableSource::Owned { owner, entries } => (0..gate.width)
            .map(|i| {
                if *owner == ep.role {
                    table_entry(entries, i, gate.entry_bits)
                } else {
                    BitString::zeros(gate.entry_bits)
                }
            })
            .collect(),
        TableSource::Wires(ws) => (0..gate.width)
            .map(|i| {
                if i < ws.len() {
                    store.get(ws[i]).clone()
                } else {
                    BitString::zeros(gate.entry_bits)
                }
            })
            .collect(),
    };
    Ok(IndexedList::dense(entries, gate.entry_bits)?)
}

/// One endpoint's secure evaluation of the circuit; returns this party's
/// shares of the output wires. Costs two OTs of the gate width per
/// table-read gate, whatever the inputs.
pub fn eval_lut_circuit(
    ep: &mut Endpoint,
    circuit: &LutCircuit,
    my_inputs: &[BitString],
) -> Result<Vec<BitString>, ProtoError> {
    circuit
        .validate()
        .map_err(|e| ProtoError::Setup(e.to_string()))?;
    let mut store = WireStore::new(circuit.wire_bits.len());
    for (w, v) in &circuit.constants {
        // public constants: Alice carries the value, Bob the zero share
        let mine = if ep.role == Role::A {
            v.clone()
        } else {
            BitString::zeros(v.len())
        };
        store.set(*w, mine);
    }
    let (my_wires, other_wires) = match ep.role {
        Role::A => (&circuit.inputs_a, &circuit.inputs_b),
        Role::B => (&circuit.inputs_b, &circuit.inputs_a),
    };
    load_inputs(circuit, &mut store, my_wires, my_inputs)
        .map_err(|e| ProtoError::Setup(e.to_string()))?;
    for &w in other_wires {
        store.set(w, BitString::zeros(circuit.wire_bits[w]));
    }
    for gate in &circuit.gates {
        match gate {
            Gate::Lut(g) => {
                let index_share = store.concat_of(&g.index_wires);
                let table = my_table_share(ep, g, &store)?;
                let share = lut_eval(ep, &index_share, &table)?;
                split_onto(&mut store, &share, &g.outputs, &circuit.wire_bits);
            }
            Gate::Concat { inputs, output } => {
                let v = store.concat_of(inputs);
                store.set(*output, v);
            }
        }
    }
    Ok(circuit
        .outputs
        .iter()
        .map(|&w| store.get(w).clone())
        .collect())
}

// -------------------------------------------------------------- builder

/// Incremental circuit construction with the usual gadgets.
#[derive(Default)]
pub struct CircuitBuilder {
    circuit: LutCircuit,
}

impl CircuitBuilder {
    /// Fresh empty builder.
    pub fn new() -> CircuitBuilder {
        CircuitBuilder::default()
    }

    fn fresh(&mut self, bits: usize) -> WireId {
        self.circuit.wire_bits.push(bits);
        self.circuit.wire_bits.len() - 1
    }

    /// Declares an input wire owned by Alice.
    pub fn input_a(&mut self, bits: usize) -> WireId {
        let w = self.fresh(bits);
        self.circuit.inputs_a.push(w);
        w
    }

    /// Declares an input wire owned by Bob.
    pub fn input_b(&mut self, bits: usize) -> WireId {
        let w = self.fresh(bits);
        self.circuit.inputs_b.push(w);
        w
    }

    /// A publicly known constant wire.
    pub fn constant(&mut self, value: BitString) -> WireId {
        let w = self.fresh(value.len());
        self.circuit.constants.push((w, value));
        w
    }

    /// Adds a table-read gate; `out_splits` gives the output wire widths,
    /// which must sum to `entry_bits`.
    pub fn lut(
        &mut self,
        width: usize,
        entry_bits: usize,
        index_wires: Vec<WireId>,
        table: TableSource,
        out_splits: &[usize],
    ) -> Vec<WireId> {
        let outputs: Vec<WireId> = out_splits.iter().map(|&b| self.fresh(b)).collect();
        self.circuit.gates.push(Gate::Lut(LutGate {
            width,
            entry_bits,
            index_wires,
            table,
            outputs: outputs.clone(),
        }));
        outputs
    }

    /// A Boolean gate as a width-4 public table over two 1-bit wires.
    pub fn bool_gate(&mut self, a: WireId, b: WireId, truth: [bool; 4]) -> WireId {
        let entries: Vec<BitString> = truth
            .iter()
            .map(|&t| BitString::from_u64(u64::from(t), 1))
            .collect();
        self.lut(
            4,
            1,
            vec![a, b],
            TableSource::Owned {
                owner: Role::A,
                entries: Arc::new(entries),
            },
            &[1],
        )[0]
    }

    /// AND of two 1-bit wires.
    pub fn and(&mut self, a: WireId, b: WireId) -> WireId {
        self.bool_gate(a, b, [false, false, false, true])
    }

    /// XOR of two 1-bit wires.
    pub fn xor(&mut self, a: WireId, b: WireId) -> WireId {
        self.bool_gate(a, b, [false, true, true, false])
    }

    /// Joins wires into one, first wire becoming the most significant bits.
    pub fn concat(&mut self, inputs: Vec<WireId>) -> WireId {
        let total: usize = inputs.iter().map(|&w| self.circuit.wire_bits[w]).sum();
        let output = self.fresh(total);
        self.circuit.gates.push(Gate::Concat { inputs, output });
        output
    }

    /// `sel ? b : a` on 1-bit wires, a width-8 public table.
    pub fn mux1(&mut self, sel: WireId, a: WireId, b: WireId) -> WireId {
        // index (sel, a, b)
        let entries: Vec<BitString> = (0..8u64)
            .map(|i| {
                let sel = i & 4 != 0;
                let av = i & 2 != 0;
                let bv = i & 1 != 0;
                BitString::from_u64(u64::from(if sel { bv } else { av }), 1)
            })
            .collect();
        self.lut(
            8,
            1,
            vec![sel, a, b],
            TableSource::Owned {
                owner: Role::A,
                entries: Arc::new(entries),
            },
            &[1],
        )[0]
    }

    /// Finishes the circuit with the given output wires.
    pub fn build(mut self, outputs: Vec<WireId>) -> Result<LutCircuit, LutError> {
        self.circuit.outputs = outputs;
        self.circuit.validate()?;
        Ok(self.circuit)
    }
}

// ------------------------------------------------------------- merging

/// A built merger or sorter: the circuit, the output element wire groups,
/// and the number of update-gadget instances inside.
pub struct MergeCircuit {
    /// The circuit.
    pub circuit: LutCircuit,
    /// Per output element, its bit wires most significant first.
    pub element_outputs: Vec<Vec<WireId>>,
    /// Update-gadget instances; input-independent by construction.
    pub gadgets: usize,
}

/// Table entries `(exhausted flag, value)` for one party's sorted array,
/// with the sentinel row marking the array consumed.
fn array_entries(values: &[u64], elem_bits: usize) -> Vec<BitString> {
    let mut entries: Vec<BitString> = values
        .iter()
        .map(|&v| BitString::zeros(1).concat(&BitString::from_u64(v, elem_bits)))
        .collect();
    entries.push(BitString::from_u64(1, 1).concat(&BitString::zeros(elem_bits)));
    entries
}

struct ArrayRef {
    width: usize,
    table: TableSource,
}

/// The comparison table: state `(gt, eq)` times the next bit pair maps to
/// the updated state, scanning most significant bits first and tracking
/// whether `b > a`.
fn cmp_state_entries() -> Vec<BitString> {
    (0..16u64)
        .map(|i| {
            let gt = i & 8 != 0;
            let eq = i & 4 != 0;
            let a_t = i & 2 != 0;
            let b_t = i & 1 != 0;
            let gt2 = gt || (eq && b_t && !a_t);
            let eq2 = eq && (a_t == b_t);
            BitString::from_u64(u64::from(gt2) << 1 | u64::from(eq2), 2)
        })
        .collect()
}

fn takeb_entries() -> Vec<BitString> {
    // index (b_exh, a_exh, gt): emit from b unless it is exhausted or
    // strictly larger while a remains
    (0..8u64)
        .map(|i| {
            let b_exh = i & 4 != 0;
            let a_exh = i & 2 != 0;
            let gt = i & 1 != 0;
            let take_b = !b_exh && (a_exh || !gt);
            BitString::from_u64(u64::from(take_b), 1)
        })
        .collect()
}

fn incr_entries(idx_bits: usize, limit: u64, on_take: bool) -> Vec<BitString> {
    // index (take_b, position): saturating advance of the matching cursor
    (0..(2u64 << idx_bits))
        .map(|i| {
            let take_b = i >> idx_bits != 0;
            let pos = i & ((1 << idx_bits) - 1);
            let bump = if take_b == on_take { 1 } else { 0 };
            BitString::from_u64((pos + bump).min(limit), idx_bits)
        })
        .collect()
}

fn public(entries: Vec<BitString>) -> TableSource {
    TableSource::Owned {
        owner: Role::A,
        entries: Arc::new(entries),
    }
}

/// Emits one merge pass over two sorted arrays of `n` elements each into
/// the builder, returning the `2n` output element wire groups.
fn emit_merger(
    builder: &mut CircuitBuilder,
    a_ref: &ArrayRef,
    b_ref: &ArrayRef,
    n: usize,
    elem_bits: usize,
) -> Vec<Vec<WireId>> {
    let idx_bits = (n + 1).next_power_of_two().trailing_zeros() as usize;
    let width = 1usize << idx_bits;
    debug_assert_eq!(a_ref.width, width);
    let mut i_a = builder.constant(BitString::zeros(idx_bits));
    let mut i_b = builder.constant(BitString::zeros(idx_bits));
    let splits: Vec<usize> = vec![1; elem_bits + 1];
    let mut outputs = Vec::with_capacity(2 * n);
    for _ in 0..2 * n {
        let a_read = builder.lut(
            width,
            elem_bits + 1,
            vec![i_a],
            a_ref.table.clone(),
            &splits,
        );
        let b_read = builder.lut(
            width,
            elem_bits + 1,
            vec![i_b],
            b_ref.table.clone(),
            &splits,
        );
        let (a_exh, a_bits) = (a_read[0], &a_read[1..]);
        let (b_exh, b_bits) = (b_read[0], &b_read[1..]);
        let mut state = builder.constant(BitString::from_u64(1, 2)); // eq set, gt clear
        for t in 0..elem_bits {
            state = builder.lut(
                16,
                2,
                vec![state, a_bits[t], b_bits[t]],
                public(cmp_state_entries()),
                &[2],
            )[0];
        }
        let split = builder.lut(
            4,
            2,
            vec![state],
            public((0..4u64).map(|i| BitString::from_u64(i, 2)).collect()),
            &[1, 1],
        );
        let gt = split[0];
        let take_b = builder.lut(8, 1, vec![b_exh, a_exh, gt], public(takeb_entries()), &[1])[0];
        let out_bits: Vec<WireId> = (0..elem_bits)
            .map(|t| builder.mux1(take_b, a_bits[t], b_bits[t]))
            .collect();
        i_a = builder.lut(
            2 * width,
            idx_bits,
            vec![take_b, i_a],
            public(incr_entries(idx_bits, n as u64, false)),
            &[idx_bits],
        )[0];
        i_b = builder.lut(
            2 * width,
            idx_bits,
            vec![take_b, i_b],
            public(incr_entries(idx_bits, n as u64, true)),
            &[idx_bits],
        )[0];
        outputs.push(out_bits);
    }
    outputs
}

/// Builds the two-party merger: Alice's sorted `a`, Bob's sorted `b`, both
/// of `n` elements, merged into `2n` shared outputs. `2n` update gadgets.
pub fn build_merge_circuit(
    a_vals: &[u64],
    b_vals: &[u64],
    elem_bits: usize,
) -> Result<MergeCircuit, LutError> {
    if a_vals.len() != b_vals.len() || a_vals.is_empty() {
        return Err(LutError::Inputs("need equal non-empty arrays".into()));
    }
    let n = a_vals.len();
    let mut builder = CircuitBuilder::new();
    let width = (n + 1).next_power_of_two();
    let a_ref = ArrayRef {
        width,
        table: TableSource::Owned {
            owner: Role::A,
            entries: Arc::new(array_entries(a_vals, elem_bits)),
        },
    };
    let b_ref = ArrayRef {
        width,
        table: TableSource::Owned {
            owner: Role::B,
            entries: Arc::new(array_entries(b_vals, elem_bits)),
        },
    };
    let element_outputs = emit_merger(&mut builder, &a_ref, &b_ref, n, elem_bits);
    let flat: Vec<WireId> = element_outputs.iter().flatten().copied().collect();
    let circuit = builder.build(flat)?;
    Ok(MergeCircuit {
        circuit,
        element_outputs,
        gadgets: 2 * n,
    })
}

/// Reference merge used as the oracle.
pub fn merge_oracle(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while out.len() < a.len() + b.len() {
        // ties emit from b, matching the gadget's rule
        if i == a.len() || (j < b.len() && b[j] <= a[i]) {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
        }
    }
    out
}

/// Merges two sorted arrays through the gadget circuit evaluated in the
/// clear; returns the merged array and the gadget count.
pub fn lut_merge(a: &[u64], b: &[u64], elem_bits: usize) -> Result<(Vec<u64>, usize), LutError> {
    let built = build_merge_circuit(a, b, elem_bits)?;
    let outs = plain_eval(&built.circuit, &[], &[])?;
    let values = (0..built.element_outputs.len())
        .map(|e| {
            let mut v = 0u64;
            for t in 0..elem_bits {
                v = (v << 1) | outs[e * elem_bits + t].to_u64();
            }
            v
        })
        .collect::<Vec<u64>>();
    debug_assert!(
        values.windows(2).all(|w| w[0] <= w[1]),
        "merge output unsorted"
    );
    Ok((values, built.gadgets))
}

/// Bottom-up merge sort built from the merger; `values.len()` must be a
/// power of two. Returns the sorted array and the total gadget count,
/// which is exactly `n * log2 n`.
pub fn lut_merge_sort(values: &[u64], elem_bits: usize) -> Result<(Vec<u64>, usize), LutError> {
    let n = values.len();
    if !n.is_power_of_two() || n == 0 {
        return Err(LutError::Inputs("length must be a power of two".into()));
    }
    let mut runs: Vec<Vec<u64>> = values.iter().map(|&v| vec![v]).collect();
    let mut gadgets = 0usize;
    while runs.len() > 1 {
        let mut next = Vec::with_capacity(runs.len() / 2);
        for pair in runs.chunks(2) {
            let (merged, g) = lut_merge(&pair[0], &pair[1], elem_bits)?;
            gadgets += g;
            next.push(merged);
        }
        runs = next;
    }
    Ok((runs.pop().unwrap(), gadgets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{run_pair, PairConfig};
    use crate::rng::SeededRng;

    fn secure_eval(
        cfg: &PairConfig,
        circuit: &LutCircuit,
        a_inputs: Vec<BitString>,
        b_inputs: Vec<BitString>,
    ) -> (Vec<BitString>, crate::meter::CostMeter) {
        let (ca, cb) = (circuit.clone(), circuit.clone());
        let out = run_pair(
            cfg,
            move |ep| eval_lut_circuit(ep, &ca, &a_inputs),
            move |ep| eval_lut_circuit(ep, &cb, &b_inputs),
        )
        .unwrap();
        let values = out
            .alice
            .iter()
            .zip(&out.bob)
            .map(|(a, b)| a.xor(b).unwrap())
            .collect();
        (values, out.meter_a.merged_with(&out.meter_b))
    }

    #[test]
    fn lut_eval_equal_index_shares_hit_slot_zero() {
        // j_A == j_B means j = 0: shares XOR to R_A[0] ^ R_B[0]
        let ra: Vec<u64> = vec![3, 5, 7, 9];
        let rb: Vec<u64> = vec![8, 1, 2, 6];
        for j_shared in 0..4u64 {
            let (ra, rb) = (ra.clone(), rb.clone());
            let out = run_pair(
                &PairConfig::ideal(900 + j_shared),
                move |ep| {
                    let t = IndexedList::from_u64s(&ra, 4).unwrap();
                    lut_eval(ep, &BitString::from_u64(j_shared, 2), &t)
                },
                move |ep| {
                    let t = IndexedList::from_u64s(&rb, 4).unwrap();
                    lut_eval(ep, &BitString::from_u64(j_shared, 2), &t)
                },
            )
            .unwrap();
            assert_eq!(out.alice.xor(&out.bob).unwrap().to_u64(), 3 ^ 8);
        }
    }

    #[test]
    fn lut_eval_exhaustive_w4() {
        let mut rng = SeededRng::from_u64(31);
        let ra: Vec<u64> = (0..4).map(|_| rng.next_below(16)).collect();
        let rb: Vec<u64> = (0..4).map(|_| rng.next_below(16)).collect();
        for ja in 0..4u64 {
            for jb in 0..4u64 {
                let (ra_c, rb_c) = (ra.clone(), rb.clone());
                let out = run_pair(
                    &PairConfig::ideal(910 + ja * 4 + jb),
                    move |ep| {
                        let t = IndexedList::from_u64s(&ra_c, 4).unwrap();
                        lut_eval(ep, &BitString::from_u64(ja, 2), &t)
                    },
                    move |ep| {
                        let t = IndexedList::from_u64s(&rb_c, 4).unwrap();
                        lut_eval(ep, &BitString::from_u64(jb, 2), &t)
                    },
                )
                .unwrap();
                let j = (ja ^ jb) as usize;
                assert_eq!(
                    out.alice.xor(&out.bob).unwrap().to_u64(),
                    ra[j] ^ rb[j],
                    "ja={ja} jb={jb}"
                );
                let merged = out.meter_a.merged_with(&out.meter_b);
                assert_eq!(merged.ot_census(), vec![(4, 2)]);
                // parallel transfers: one logical OT round on each side
                assert_eq!(out.meter_a.rounds, 1);
                assert_eq!(out.meter_b.rounds, 1);
            }
        }
    }

    #[test]
    fn and_gate_truth_table() {
        let mut b = CircuitBuilder::new();
        let a_in = b.input_a(1);
        let b_in = b.input_b(1);
        let out = b.and(a_in, b_in);
        let circuit = b.build(vec![out]).unwrap();
        for av in 0..2u64 {
            for bv in 0..2u64 {
                let a_vals = vec![BitString::from_u64(av, 1)];
                let b_vals = vec![BitString::from_u64(bv, 1)];
                let plain = plain_eval(&circuit, &a_vals, &b_vals).unwrap();
                assert_eq!(plain[0].to_u64(), av & bv);
                let (vals, meter) = secure_eval(
                    &PairConfig::ideal(77 + av * 2 + bv),
                    &circuit,
                    a_vals,
                    b_vals,
                );
                assert_eq!(vals[0].to_u64(), av & bv);
                assert_eq!(meter.ot_census(), vec![(4, 2)]);
            }
        }
    }

    #[test]
    fn two_gate_formula_circuit() {
        // (a AND b) XOR c over all 8 inputs
        let mut b = CircuitBuilder::new();
        let a_in = b.input_a(1);
        let b_in = b.input_b(1);
        let c_in = b.input_b(1);
        let t = b.and(a_in, b_in);
        let out = b.xor(t, c_in);
        let circuit = b.build(vec![out]).unwrap();
        for av in 0..2u64 {
            for bv in 0..2u64 {
                for cv in 0..2u64 {
                    let a_vals = vec![BitString::from_u64(av, 1)];
                    let b_vals = vec![BitString::from_u64(bv, 1), BitString::from_u64(cv, 1)];
                    let (vals, meter) = secure_eval(
                        &PairConfig::ideal(100 + av * 4 + bv * 2 + cv),
                        &circuit,
                        a_vals,
                        b_vals,
                    );
                    assert_eq!(vals[0].to_u64(), (av & bv) ^ cv);
                    assert_eq!(meter.ot_total(), 4); // two gates, two OTs each
                }
            }
        }
    }

    #[test]
    fn validate_rejects_double_write_and_bad_reads() {
        let mut circuit = LutCircuit {
            wire_bits: vec![1, 1],
            constants: vec![(0, BitString::zeros(1)), (0, BitString::zeros(1))],
            ..Default::default()
        };
        assert!(matches!(circuit.validate(), Err(LutError::WireOrder(0))));
        circuit.constants = vec![(0, BitString::zeros(1))];
        // concat reads wire 1 before anything writes it
        circuit.gates = vec![Gate::Concat {
            inputs: vec![1],
            output: 1,
        }];
        assert!(circuit.validate().is_err());
    }

    #[test]
    fn merge_oracle_cases() {
        assert_eq!(merge_oracle(&[1, 3], &[2, 4]), vec![1, 2, 3, 4]);
        assert_eq!(merge_oracle(&[5, 6], &[1, 2]), vec![1, 2, 5, 6]);
        // tie: b's element first
        assert_eq!(merge_oracle(&[2, 4], &[2, 9]), vec![2, 2, 4, 9]);
    }

    #[test]
    fn merger_matches_oracle() {
        let (merged, gadgets) = lut_merge(&[1, 3], &[2, 4], 4).unwrap();
        assert_eq!(merged, vec![1, 2, 3, 4]);
        assert_eq!(gadgets, 4);
        // a exhausted early: remaining outputs drawn from b
        let (merged, _) = lut_merge(&[1, 2], &[8, 9], 4).unwrap();
        assert_eq!(merged, vec![1, 2, 8, 9]);
        let (merged, _) = lut_merge(&[8, 9], &[1, 2], 4).unwrap();
        assert_eq!(merged, vec![1, 2, 8, 9]);
        // ties everywhere
        let (merged, _) = lut_merge(&[3, 3], &[3, 3], 4).unwrap();
        assert_eq!(merged, vec![3, 3, 3, 3]);
    }

    #[test]
    fn merger_random_matches_oracle() {
        let mut rng = SeededRng::from_u64(6);
        for _ in 0..30 {
            let mut a: Vec<u64> = (0..4).map(|_| rng.next_below(16)).collect();
            let mut b: Vec<u64> = (0..4).map(|_| rng.next_below(16)).collect();
            a.sort_unstable();
            b.sort_unstable();
            let (merged, gadgets) = lut_merge(&a, &b, 4).unwrap();
            assert_eq!(merged, merge_oracle(&a, &b));
            assert_eq!(gadgets, 8);
        }
    }

    #[test]
    fn secure_merge_matches_plain() {
        let a = [1u64, 5];
        let b = [2u64, 4];
        let built = build_merge_circuit(&a, &b, 4).unwrap();
        let (vals, meter) = secure_eval(&PairConfig::ideal(55), &built.circuit, vec![], vec![]);
        let merged: Vec<u64> = (0..4)
            .map(|e| {
                let mut v = 0u64;
                for t in 0..4 {
                    v = (v << 1) | vals[e * 4 + t].to_u64();
                }
                v
            })
            .collect();
        assert_eq!(merged, vec![1, 2, 4, 5]);
        // census: two OTs per table-read gate, widths fixed by structure
        assert_eq!(meter.ot_total() as usize, 2 * built.circuit.lut_count());
    }

    #[test]
    fn sort_examples_and_gadget_count() {
        let (sorted, _) = lut_merge_sort(&[7], 4).unwrap();
        assert_eq!(sorted, vec![7]);
        let (sorted, gadgets) = lut_merge_sort(&[3, 1, 2, 4], 4).unwrap();
        assert_eq!(sorted, vec![1, 2, 3, 4]);
        // n log2 n gadgets exactly
        assert_eq!(gadgets, 4 * 2);
        let mut rng = SeededRng::from_u64(8);
        for _ in 0..5 {
            let vals: Vec<u64> = (0..16).map(|_| rng.next_below(256)).collect();
            let (sorted, gadgets) = lut_merge_sort(&vals, 8).unwrap();
            let mut expect = vals.clone();
            expect.sort_unstable();
            assert_eq!(sorted, expect);
            assert_eq!(gadgets, 16 * 4);
        }
    }

    #[test]
    fn gadget_count_is_input_independent() {
        let mut rng = SeededRng::from_u64(12);
        let mut counts = Vec::new();
        for _ in 0..5 {
            let mut a: Vec<u64> = (0..4).map(|_| rng.next_below(64)).collect();
            let mut b: Vec<u64> = (0..4).map(|_| rng.next_below(64)).collect();
            a.sort_unstable();
            b.sort_unstable();
            let built = build_merge_circuit(&a, &b, 6).unwrap();
            counts.push((built.gadgets, built.circuit.lut_count()));
        }
        assert!(counts.iter().all(|c| c == &counts[0]));
    }
}
