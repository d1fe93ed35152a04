//! Garbled evaluation of an interactive protocol.
//!
//! Each party's next-message function is a Boolean circuit with its input
//! and randomness hard-wired: the only live inputs are the messages
//! received so far. Each party garbles its own circuit — fresh `k`-bit
//! labels `(W^0, W^1)` and a permute bit per wire, one four-entry
//! encrypted table per gate — and ships tables plus the garbled values of
//! its constant wires to the peer, who evaluates the circuit on garbled
//! values only.
//!
//! The protocol then runs message by message. A message produced on one
//! circuit must become an input of the other, and the two garblings are
//! unrelated, so each message crosses through one width-2 oblivious
//! transfer: the party holding the garbled output (who also garbled the
//! destination wire) builds a two-entry table keyed by the possible
//! permute bits of the source wire, and the counterpart — who garbled the
//! source wire and so knows its permute bit — retrieves exactly the
//! garbled destination value, with neither side learning the message bit.
//! Total: one OT per message, a constant number of PRF calls per gate.
//!
//! The final output wires belong to Alice's circuit; Bob returns their
//! garbled values and Alice decodes them locally against her own secrets,
//! so no decoding table ever crosses the channel.

use thiserror::Error;

use crate::bits::BitString;
use crate::channel::FrameType;
use crate::exec::{Endpoint, ProtoError};
use crate::ot::{ot_recv, ot_send, OtChoice, OtSenderInput};
use crate::prf::prf_eval;
use crate::rng::SeededRng;

/// Wire identifier inside one next-message circuit.
pub type WireId = usize;

/// Garbled-protocol failures.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GarbledError {
    /// Circuit structure broken (wire reuse, range, arity).
    #[error("bad circuit: {0}")]
    BadCircuit(String),
    /// The two circuits' message schedules do not line up.
    #[error("message schedules inconsistent: {0}")]
    Schedule(String),
    /// An output wire was needed before its inputs arrived.
    #[error("wire {0} not computable yet")]
    NotReady(WireId),
    /// A garbled output label matched neither wire secret.
    #[error("garbled output label does not decode")]
    BadOutputLabel,
    /// Malformed garbling payload on the wire.
    #[error("malformed garbling message: {0}")]
    BadMessage(&'static str),
}

/// A two-input Boolean gate with an explicit truth table
/// (`truth[2*a + b]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoolGate {
    /// First input wire.
    pub a: WireId,
    /// Second input wire.
    pub b: WireId,
    /// Truth table indexed by the two input bits.
    pub truth: [bool; 4],
    /// Output wire.
    pub out: WireId,
}

/// One party's next-message circuit: constants carry the hard-wired input
/// and randomness, message inputs arrive one per received message, message
/// outputs leave one per sent message, and `finals` are the protocol
/// output wires (non-empty only for Alice).
#[derive(Debug, Clone, Default)]
pub struct NextMessageCircuit {
    /// Total wire count.
    pub wires: usize,
    /// Hard-wired constant wires and their plaintext bits.
    pub consts: Vec<(WireId, bool)>,
    /// Gates in evaluation order.
    pub gates: Vec<BoolGate>,
    /// Wires fed by incoming messages, in arrival order.
    pub msg_in: Vec<WireId>,
    /// Wires whose values are sent, in send order.
    pub msg_out: Vec<WireId>,
    /// Output wires revealed at the end.
    pub finals: Vec<WireId>,
}

impl NextMessageCircuit {
    /// Structural validation: wires in range, written exactly once.
    pub fn validate(&self) -> Result<(), GarbledError> {
        let mut written = vec![false; self.wires];
        let mut write = |w: WireId| -> Result<(), GarbledError> {
            if w >= written.len() || written[w] {
                return Err(GarbledError::BadCircuit(format!("wire {w} rewritten")));
            }
            written[w] = true;
            Ok(())
        };
        for (w, _) in &self.consts {
            write(*w)?;
        }
        for &w in &self.msg_in {
            write(w)?;
        }
        for g in &self.gates {
            if g.a >= self.wires || g.b >= self.wires {
                return Err(GarbledError::BadCircuit("gate input out of range".into()));
            }
            write(g.out)?;
        }
        for &w in self.msg_out.iter().chain(&self.finals) {
            if w >= self.wires {
                return Err(GarbledError::BadCircuit("output wire out of range".into()));
            }
        }
        Ok(())
    }
}

/// Builder for next-message circuits.
#[derive(Default)]
pub struct NmcBuilder {
    circ: NextMessageCircuit,
}

impl NmcBuilder {
    /// Fresh builder.
    pub fn new() -> NmcBuilder {
        NmcBuilder::default()
    }

    fn fresh(&mut self) -> WireId {
        self.circ.wires += 1;
        self.circ.wires - 1
    }

    /// A hard-wired constant bit.
    pub fn constant(&mut self, bit: bool) -> WireId {
        let w = self.fresh();
        self.circ.consts.push((w, bit));
        w
    }

    /// The next incoming-message wire.
    pub fn msg_input(&mut self) -> WireId {
        let w = self.fresh();
        self.circ.msg_in.push(w);
        w
    }

    /// A two-input gate.
    pub fn gate(&mut self, a: WireId, b: WireId, truth: [bool; 4]) -> WireId {
        let out = self.fresh();
        self.circ.gates.push(BoolGate { a, b, truth, out });
        out
    }

    /// XOR gate.
    pub fn xor(&mut self, a: WireId, b: WireId) -> WireId {
        self.gate(a, b, [false, true, true, false])
    }

    /// AND gate.
    pub fn and(&mut self, a: WireId, b: WireId) -> WireId {
        self.gate(a, b, [false, false, false, true])
    }

    /// Registers a wire as the next outgoing message.
    pub fn send(&mut self, w: WireId) {
        self.circ.msg_out.push(w);
    }

    /// Registers a final output wire.
    pub fn final_out(&mut self, w: WireId) {
        self.circ.finals.push(w);
    }

    /// Finishes and validates.
    pub fn build(self) -> Result<NextMessageCircuit, GarbledError> {
        self.circ.validate()?;
        Ok(self.circ)
    }
}

// ------------------------------------------------------------ plaintext

struct PlainEval<'c> {
    circ: &'c NextMessageCircuit,
    values: Vec<Option<bool>>,
    next_gate: usize,
}

impl<'c> PlainEval<'c> {
    fn new(circ: &'c NextMessageCircuit) -> PlainEval<'c> {
        let mut values = vec![None; circ.wires];
        for &(w, bit) in &circ.consts {
            values[w] = Some(bit);
        }
        PlainEval {
            circ,
            values,
            next_gate: 0,
        }
    }

    fn feed(&mut self, w: WireId, bit: bool) {
        self.values[w] = Some(bit);
    }

    fn settle(&mut self) {
        while self.next_gate < self.circ.gates.len() {
            let g = self.circ.gates[self.next_gate];
            match (self.values[g.a], self.values[g.b]) {
                (Some(a), Some(b)) => {
                    self.values[g.out] = Some(g.truth[usize::from(a) * 2 + usize::from(b)]);
                    self.next_gate += 1;
                }
                _ => break,
            }
        }
    }

    fn get(&mut self, w: WireId) -> Result<bool, GarbledError> {
        self.settle();
        self.values[w].ok_or(GarbledError::NotReady(w))
    }
}

/// Runs the interactive protocol in the clear: alternating single-bit
/// messages starting with Alice, ending with Alice's final output bits.
/// The oracle the garbled execution is checked against.
pub fn run_plain_protocol(
    alice: &NextMessageCircuit,
    bob: &NextMessageCircuit,
) -> Result<(BitString, Vec<bool>), GarbledError> {
    alice.validate()?;
    bob.validate()?;
    if alice.msg_out.len() != bob.msg_in.len() || bob.msg_out.len() != alice.msg_in.len() {
        return Err(GarbledError::Schedule(
            "message counts do not line up".into(),
        ));
    }
    if alice.msg_out.len() != bob.msg_out.len() {
        return Err(GarbledError::Schedule(
            "alternation needs equal message counts".into(),
        ));
    }
    let mut ea = PlainEval::new(alice);
    let mut eb = PlainEval::new(bob);
    let mut transcript = Vec::new();
    for t in 0..alice.msg_out.len() {
        let m_even = ea.get(alice.msg_out[t])?;
        eb.feed(bob.msg_in[t], m_even);
        transcript.push(m_even);
        let m_odd = eb.get(bob.msg_out[t])?;
        ea.feed(alice.msg_in[t], m_odd);
        transcript.push(m_odd);
    }
    let mut z = BitString::zeros(alice.finals.len());
    for (i, &w) in alice.finals.iter().enumerate() {
        z.set_bit(i, ea.get(w)?);
    }
    Ok((z, transcript))
}

// ------------------------------------------------------------- garbling

/// Secrets of one garbled wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireSecrets {
    /// Label for value 0.
    pub w0: BitString,
    /// Label for value 1.
    pub w1: BitString,
    /// Permute bit.
    pub perm: bool,
}

impl WireSecrets {
    /// The garbled value carrying plaintext `bit`.
    pub fn garbled(&self, bit: bool) -> GarbledValue {
        GarbledValue {
            label: if bit {
                self.w1.clone()
            } else {
                self.w0.clone()
            },
            select: self.perm ^ bit,
        }
    }

    /// Decodes a garbled value by matching its label.
    pub fn decode(&self, gv: &GarbledValue) -> Result<bool, GarbledError> {
        if gv.label == self.w0 && !gv.select ^ self.perm {
            Ok(false)
        } else if gv.label == self.w1 && gv.select ^ self.perm {
            Ok(true)
        } else {
            Err(GarbledError::BadOutputLabel)
        }
    }
}

/// A wire's garbled value: a label plus the permuted select bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GarbledValue {
    /// The active label.
    pub label: BitString,
    /// `select = perm ⊕ value`.
    pub select: bool,
}

impl GarbledValue {
    fn pack(&self) -> BitString {
        self.label
            .concat(&BitString::from_u64(u64::from(self.select), 1))
    }

    fn unpack(packed: &BitString, k: usize) -> Result<GarbledValue, GarbledError> {
        if packed.len() != k + 1 {
            return Err(GarbledError::BadMessage("garbled value length"));
        }
        Ok(GarbledValue {
            label: packed.slice(0, k),
            select: packed.bit(k),
        })
    }
}

/// One gate's four encrypted entries, indexed by the input select bits in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateTable {
    /// Entries, each `k + 1` bits.
    pub entries: [BitString; 4],
}

/// The garbler's view of its own circuit.
pub struct Garbling {
    /// Per-wire secrets.
    pub secrets: Vec<WireSecrets>,
    /// Per-gate tables, in gate order.
    pub tables: Vec<GateTable>,
    /// Garbled values of the constant wires.
    pub const_values: Vec<(WireId, GarbledValue)>,
}

fn prf_entry_mask(label: &BitString, gate_id: usize, select: bool, k: usize) -> BitString {
    let input =
        BitString::from_u64(gate_id as u64, 32).concat(&BitString::from_u64(u64::from(select), 1));
    prf_eval(label, &input, k + 1)
}

/// Garbles a circuit: samples labels and permute bits for every wire and
/// encrypts each gate's four outcomes under the matching input labels.
pub fn garble(circ: &NextMessageCircuit, k: usize, rng: &mut SeededRng) -> (Garbling, u64) {
    let secrets: Vec<WireSecrets> = (0..circ.wires)
        .map(|_| WireSecrets {
            w0: BitString::random(rng, k),
            w1: BitString::random(rng, k),
            perm: rng.next_bool(),
        })
        .collect();
    let mut prf_calls = 0u64;
    let tables: Vec<GateTable> = circ
        .gates
        .iter()
        .enumerate()
        .map(|(gate_id, g)| {
            let entries: Vec<BitString> = (0..4usize)
                .map(|idx| {
                    let c_i = idx & 2 != 0;
                    let c_j = idx & 1 != 0;
                    let b_i = c_i ^ secrets[g.a].perm;
                    let b_j = c_j ^ secrets[g.b].perm;
                    let b_k = g.truth[usize::from(b_i) * 2 + usize::from(b_j)];
                    let payload = secrets[g.out].garbled(b_k).pack();
                    let key_i = if b_i {
                        &secrets[g.a].w1
                    } else {
                        &secrets[g.a].w0
                    };
                    let key_j = if b_j {
                        &secrets[g.b].w1
                    } else {
                        &secrets[g.b].w0
                    };
                    prf_calls += 2;
                    payload
                        .xor(&prf_entry_mask(key_i, gate_id, c_j, k))
                        .unwrap()
                        .xor(&prf_entry_mask(key_j, gate_id, c_i, k))
                        .unwrap()
                })
                .collect();
            GateTable {
                entries: entries.try_into().expect("four entries"),
            }
        })
        .collect();
    let const_values = circ
        .consts
        .iter()
        .map(|&(w, bit)| (w, secrets[w].garbled(bit)))
        .collect();
    (
        Garbling {
            secrets,
            tables,
            const_values,
        },
        prf_calls,
    )
}

/// Decrypts one gate given its garbled inputs.
pub fn eval_garbled_gate(
    table: &GateTable,
    gate_id: usize,
    in_a: &GarbledValue,
    in_b: &GarbledValue,
    k: usize,
) -> Result<GarbledValue, GarbledError> {
    let idx = usize::from(in_a.select) * 2 + usize::from(in_b.select);
    let payload = table.entries[idx]
        .xor(&prf_entry_mask(&in_a.label, gate_id, in_b.select, k))
        .map_err(|_| GarbledError::BadMessage("entry length"))?
        .xor(&prf_entry_mask(&in_b.label, gate_id, in_a.select, k))
        .expect("lengths match");
    GarbledValue::unpack(&payload, k)
}

// ------------------------------------------------------- wire encodings

fn encode_garbling_setup(g: &Garbling, k: usize) -> Vec<u8> {
    let mut packed = BitString::zeros(0);
    for t in &g.tables {
        for e in &t.entries {
            packed = packed.concat(e);
        }
    }
    for (_, gv) in &g.const_values {
        packed = packed.concat(&gv.pack());
    }
    let mut out = Vec::new();
    out.extend_from_slice(&(g.tables.len() as u32).to_le_bytes());
    out.extend_from_slice(&(g.const_values.len() as u32).to_le_bytes());
    out.extend_from_slice(&(k as u32).to_le_bytes());
    for (w, _) in &g.const_values {
        out.extend_from_slice(&(*w as u32).to_le_bytes());
    }
    out.extend_from_slice(&packed.to_wire());
    out
}

struct PeerGarbling {
    tables: Vec<GateTable>,
    const_values: Vec<(WireId, GarbledValue)>,
}

fn decode_garbling_setup(data: &[u8], k: usize) -> Result<PeerGarbling, GarbledError> {
    if data.len() < 12 {
        return Err(GarbledError::BadMessage("short setup"));
    }
    let gates = u32::from_le_bytes(data[0..4].try_into().unwrap()) as usize;
    let consts = u32::from_le_bytes(data[4..8].try_into().unwrap()) as usize;
    let their_k = u32::from_le_bytes(data[8..12].try_into().unwrap()) as usize;
    if their_k != k {
        return Err(GarbledError::BadMessage("security parameter mismatch"));
    }
    let mut at = 12;
    let mut const_wires = Vec::with_capacity(consts);
    for _ in 0..consts {
        if data.len() < at + 4 {
            return Err(GarbledError::BadMessage("short const wire list"));
        }
        const_wires.push(u32::from_le_bytes(data[at..at + 4].try_into().unwrap()) as usize);
        at += 4;
    }
    let packed =
        BitString::from_wire(&data[at..]).map_err(|_| GarbledError::BadMessage("packed bits"))?;
    let expect = gates * 4 * (k + 1) + consts * (k + 1);
    if packed.len() != expect {
        return Err(GarbledError::BadMessage("packed length mismatch"));
    }
    let mut pos = 0;
    let mut tables = Vec::with_capacity(gates);
    for _ in 0..gates {
        let mut entries = Vec::with_capacity(4);
        for _ in 0..4 {
            entries.push(packed.slice(pos, k + 1));
            pos += k + 1;
        }
        tables.push(GateTable {
            entries: entries.try_into().expect("four entries"),
        });
    }
    let mut const_values = Vec::with_capacity(consts);
    for w in const_wires {
        let gv = GarbledValue::unpack(&packed.slice(pos, k + 1), k)?;
        pos += k + 1;
        const_values.push((w, gv));
    }
    Ok(PeerGarbling {
        tables,
        const_values,
    })
}

// ------------------------------------------------------------ execution

struct GarbledEval<'c> {
    circ: &'c NextMessageCircuit,
    tables: Vec<GateTable>,
    values: Vec<Option<GarbledValue>>,
    next_gate: usize,
    k: usize,
    prf_calls: u64,
}

impl<'c> GarbledEval<'c> {
    fn new(
        circ: &'c NextMessageCircuit,
        peer: PeerGarbling,
        k: usize,
    ) -> Result<GarbledEval<'c>, GarbledError> {
        if peer.tables.len() != circ.gates.len() {
            return Err(GarbledError::BadMessage("table count mismatch"));
        }
        let mut values = vec![None; circ.wires];
        for (w, gv) in peer.const_values {
            if w >= circ.wires {
                return Err(GarbledError::BadMessage("const wire out of range"));
            }
            values[w] = Some(gv);
        }
        Ok(GarbledEval {
            circ,
            tables: peer.tables,
            values,
            next_gate: 0,
            k,
            prf_calls: 0,
        })
    }

    fn feed(&mut self, w: WireId, gv: GarbledValue) {
        self.values[w] = Some(gv);
    }

    fn settle(&mut self) -> Result<(), GarbledError> {
        while self.next_gate < self.circ.gates.len() {
            let g = self.circ.gates[self.next_gate];
            let (a, b) = match (&self.values[g.a], &self.values[g.b]) {
                (Some(a), Some(b)) => (a.clone(), b.clone()),
                _ => break,
            };
            let out =
                eval_garbled_gate(&self.tables[self.next_gate], self.next_gate, &a, &b, self.k)?;
            self.prf_calls += 2;
            self.values[g.out] = Some(out);
            self.next_gate += 1;
        }
        Ok(())
    }

    fn get(&mut self, w: WireId) -> Result<GarbledValue, GarbledError> {
        self.settle()?;
        self.values[w].clone().ok_or(GarbledError::NotReady(w))
    }
}

/// Translation-table sender: holds the garbled source value and owns the
/// destination wire's secrets. One width-2 OT.
pub fn translate_send(
    ep: &mut Endpoint,
    held: &GarbledValue,
    dst: &WireSecrets,
) -> Result<(), ProtoError> {
    let mut entries = vec![BitString::zeros(0); 2];
    // entry at the held select bit decodes message 0, the other message 1
    entries[usize::from(held.select)] = dst.w0.concat(&BitString::from_u64(u64::from(dst.perm), 1));
    entries[usize::from(!held.select)] =
        dst.w1.concat(&BitString::from_u64(u64::from(!dst.perm), 1));
    ep.meter
        .lock()
        .unwrap()
        .note_rounds(ep.backend.round_cost());
    ot_send(ep, &OtSenderInput::dense(entries)?)
}

/// Translation receiver: garbled the source wire, so chooses by its
/// permute bit and obtains the destination's garbled value.
pub fn translate_recv(
    ep: &mut Endpoint,
    src_perm: bool,
    k: usize,
) -> Result<GarbledValue, ProtoError> {
    ep.meter
        .lock()
        .unwrap()
        .note_rounds(ep.backend.round_cost());
    let packed = ot_recv(ep, 2, k + 1, OtChoice(usize::from(src_perm)))?;
    GarbledValue::unpack(&packed, k).map_err(|e| ProtoError::Setup(e.to_string()))
}

fn check_schedules(
    mine: &NextMessageCircuit,
    theirs: &NextMessageCircuit,
) -> Result<usize, GarbledError> {
    mine.validate()?;
    theirs.validate()?;
    if mine.msg_out.len() != theirs.msg_in.len()
        || theirs.msg_out.len() != mine.msg_in.len()
        || mine.msg_out.len() != theirs.msg_out.len()
    {
        return Err(GarbledError::Schedule("message counts differ".into()));
    }
    Ok(2 * mine.msg_out.len())
}

/// Alice's side of the garbled protocol run. Returns the protocol output
/// `z`; with `reveal_to_bob` she sends the plaintext result back at the
/// end.
pub fn garbled_alice(
    ep: &mut Endpoint,
    my_circ: &NextMessageCircuit,
    peer_circ: &NextMessageCircuit,
    reveal_to_bob: bool,
) -> Result<BitString, ProtoError> {
    let c = check_schedules(my_circ, peer_circ).map_err(|e| ProtoError::Setup(e.to_string()))?;
    let k = ep.k;
    let (my_garbling, prf_calls) = garble(my_circ, k, &mut ep.rng);
    ep.meter.lock().unwrap().note_prf(prf_calls);
    ep.chan
        .send(FrameType::Data, &encode_garbling_setup(&my_garbling, k))?;
    let peer_setup = decode_garbling_setup(&ep.chan.recv_expect(FrameType::Data)?, k)
        .map_err(|e| ProtoError::Setup(e.to_string()))?;
    ep.meter.lock().unwrap().note_rounds(1);
    let mut eval =
        GarbledEval::new(peer_circ, peer_setup, k).map_err(|e| ProtoError::Setup(e.to_string()))?;

    for round in 0..c {
        if round % 2 == 0 {
            // my message: produced on my circuit (peer evaluates it); the
            // peer sends the translation table into its own circuit and I
            // choose by my output wire's permute bit
            let src = my_circ.msg_out[round / 2];
            let gv = translate_recv(ep, my_garbling.secrets[src].perm, k)?;
            eval.feed(peer_circ.msg_in[round / 2], gv);
        } else {
            // peer's message: I evaluated it on the peer's circuit and own
            // the destination secrets in my own circuit
            let held = eval
                .get(peer_circ.msg_out[round / 2])
                .map_err(|e| ProtoError::Setup(e.to_string()))?;
            let dst = &my_garbling.secrets[my_circ.msg_in[round / 2]];
            translate_send(ep, &held, dst)?;
        }
    }
    ep.meter.lock().unwrap().note_prf(eval.prf_calls);

    // the peer evaluated my circuit's final wires; decode against my secrets
    let payload = ep.chan.recv_expect(FrameType::Data)?;
    ep.meter.lock().unwrap().note_rounds(1);
    let packed = BitString::from_wire(&payload)?;
    if packed.len() != my_circ.finals.len() * (k + 1) {
        return Err(ProtoError::Setup("final values length mismatch".into()));
    }
    let mut z = BitString::zeros(my_circ.finals.len());
    for (i, &w) in my_circ.finals.iter().enumerate() {
        let gv = GarbledValue::unpack(&packed.slice(i * (k + 1), k + 1), k)
            .map_err(|e| ProtoError::Setup(e.to_string()))?;
        let bit = my_garbling.secrets[w]
            .decode(&gv)
            .map_err(|e| ProtoError::Setup(e.to_string()))?;
        z.set_bit(i, bit);
    }
    if reveal_to_bob {
        ep.chan.send(FrameType::Data, &z.to_wire())?;
        ep.meter.lock().unwrap().note_rounds(1);
    }
    Ok(z)
}

/// Bob's side of the garbled protocol run; returns the plaintext output
/// only under `reveal_to_bob`.
pub fn garbled_bob(
    ep: &mut Endpoint,
    my_circ: &NextMessageCircuit,
    peer_circ: &NextMessageCircuit,
    reveal_to_bob: bool,
) -> Result<Option<BitString>, ProtoError> {
    let c = check_schedules(my_circ, peer_circ).map_err(|e| ProtoError::Setup(e.to_string()))?;
    let k = ep.k;
    let (my_garbling, prf_calls) = garble(my_circ, k, &mut ep.rng);
    ep.meter.lock().unwrap().note_prf(prf_calls);
    let peer_setup = decode_garbling_setup(&ep.chan.recv_expect(FrameType::Data)?, k)
        .map_err(|e| ProtoError::Setup(e.to_string()))?;
    ep.chan
        .send(FrameType::Data, &encode_garbling_setup(&my_garbling, k))?;
    ep.meter.lock().unwrap().note_rounds(1);
    let mut eval =
        GarbledEval::new(peer_circ, peer_setup, k).map_err(|e| ProtoError::Setup(e.to_string()))?;

    for round in 0..c {
        if round % 2 == 0 {
            // Alice's message: I evaluate it on her circuit and feed it
            // into mine through the translation table I build
            let held = eval
                .get(peer_circ.msg_out[round / 2])
                .map_err(|e| ProtoError::Setup(e.to_string()))?;
            let dst = &my_garbling.secrets[my_circ.msg_in[round / 2]];
            translate_send(ep, &held, dst)?;
        } else {
            let src = my_circ.msg_out[round / 2];
            let gv = translate_recv(ep, my_garbling.secrets[src].perm, k)?;
            eval.feed(peer_circ.msg_in[round / 2], gv);
        }
    }

    // evaluate Alice's final wires and return their garbled values
    let mut packed = BitString::zeros(0);
    for &w in &peer_circ.finals {
        let gv = eval.get(w).map_err(|e| ProtoError::Setup(e.to_string()))?;
        packed = packed.concat(&gv.pack());
    }
    ep.meter.lock().unwrap().note_prf(eval.prf_calls);
    ep.chan.send(FrameType::Data, &packed.to_wire())?;
    ep.meter.lock().unwrap().note_rounds(1);
    if reveal_to_bob {
        let z = BitString::from_wire(&ep.chan.recv_expect(FrameType::Data)?)?;
        ep.meter.lock().unwrap().note_rounds(1);
        Ok(Some(z))
    } else {
        Ok(None)
    }
}

// ----------------------------------------------------- example circuits

/// Alice's next-message circuit for the two-bit distance protocol: she
/// sends her bits in the clear rounds and sums Bob's two disagreement
/// replies into a two-bit count.
pub fn distance2_alice_circuit(x: &BitString) -> NextMessageCircuit {
    assert_eq!(x.len(), 2);
    let mut b = NmcBuilder::new();
    let x0 = b.constant(x.bit(0));
    let x1 = b.constant(x.bit(1));
    b.send(x0);
    b.send(x1);
    let m1 = b.msg_input();
    let m3 = b.msg_input();
    let hi = b.and(m1, m3);
    let lo = b.xor(m1, m3);
    b.final_out(hi);
    b.final_out(lo);
    b.build().expect("well-formed")
}

/// Bob's circuit for the two-bit distance protocol: each reply is the XOR
/// of Alice's bit with his own, i.e. the disagreement indicator.
pub fn distance2_bob_circuit(y: &BitString) -> NextMessageCircuit {
    assert_eq!(y.len(), 2);
    let mut b = NmcBuilder::new();
    let y0 = b.constant(y.bit(0));
    let y1 = b.constant(y.bit(1));
    let m0 = b.msg_input();
    let r0 = b.xor(m0, y0);
    b.send(r0);
    let m2 = b.msg_input();
    let r1 = b.xor(m2, y1);
    b.send(r1);
    b.build().expect("well-formed")
}

/// A degenerate protocol whose messages and output are constants; garbles
/// to zero gate tables.
pub fn constant_protocol_circuits(
    bits: (bool, bool),
    z: bool,
) -> (NextMessageCircuit, NextMessageCircuit) {
    let mut a = NmcBuilder::new();
    let ca = a.constant(bits.0);
    let cz = a.constant(z);
    a.send(ca);
    let _ = a.msg_input();
    a.final_out(cz);
    let mut b = NmcBuilder::new();
    let cb = b.constant(bits.1);
    let _ = b.msg_input();
    b.send(cb);
    (a.build().unwrap(), b.build().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{run_pair, PairConfig};

    fn bs(text: &str) -> BitString {
        BitString::parse_bin(text).unwrap()
    }

    #[test]
    fn plain_protocol_is_distance() {
        for xv in 0..4u64 {
            for yv in 0..4u64 {
                let a = distance2_alice_circuit(&BitString::from_u64(xv, 2));
                let b = distance2_bob_circuit(&BitString::from_u64(yv, 2));
                let (z, transcript) = run_plain_protocol(&a, &b).unwrap();
                assert_eq!(z.to_u64(), (xv ^ yv).count_ones() as u64);
                assert_eq!(transcript.len(), 4);
            }
        }
    }

    #[test]
    fn garbled_gate_decrypts_correct_label() {
        let mut rng = SeededRng::from_u64(3);
        let a = distance2_alice_circuit(&bs("10"));
        let (g, _) = garble(&a, 64, &mut rng);
        // gate 0 is the AND over the two message inputs
        let gate = a.gates[0];
        for av in [false, true] {
            for bv in [false, true] {
                let in_a = g.secrets[gate.a].garbled(av);
                let in_b = g.secrets[gate.b].garbled(bv);
                let out = eval_garbled_gate(&g.tables[0], 0, &in_a, &in_b, 64).unwrap();
                let expect = gate.truth[usize::from(av) * 2 + usize::from(bv)];
                assert_eq!(g.secrets[gate.out].decode(&out).unwrap(), expect);
            }
        }
    }

    #[test]
    fn xor_gate_all_inputs_and_not_via_constant() {
        let mut builder = NmcBuilder::new();
        let one = builder.constant(true);
        let m = builder.msg_input();
        let out = builder.xor(m, one); // NOT gate as XOR with hard-wired 1
        builder.send(out);
        let circ = NextMessageCircuit {
            finals: vec![],
            ..builder.circ
        };
        let mut rng = SeededRng::from_u64(4);
        let (g, _) = garble(&circ, 64, &mut rng);
        for mv in [false, true] {
            let in_a = g.secrets[m].garbled(mv);
            let in_b = g.secrets[one].garbled(true);
            let out_gv = eval_garbled_gate(&g.tables[0], 0, &in_a, &in_b, 64).unwrap();
            assert_eq!(g.secrets[out].decode(&out_gv).unwrap(), !mv);
        }
    }

    #[test]
    fn table_entry_positions_follow_perm_bits_only() {
        // the entry order is determined by the select bits, i.e. by the
        // permute bits, never by the plaintext truth values
        let mut rng = SeededRng::from_u64(5);
        let a = distance2_alice_circuit(&bs("01"));
        let (g, _) = garble(&a, 32, &mut rng);
        let gate = a.gates[0];
        for idx in 0..4usize {
            let c_i = idx & 2 != 0;
            let c_j = idx & 1 != 0;
            let in_a = g.secrets[gate.a].garbled(c_i ^ g.secrets[gate.a].perm);
            let in_b = g.secrets[gate.b].garbled(c_j ^ g.secrets[gate.b].perm);
            assert_eq!(usize::from(in_a.select) * 2 + usize::from(in_b.select), idx);
        }
    }

    #[test]
    fn fresh_garblings_share_no_labels() {
        let a = distance2_alice_circuit(&bs("11"));
        let mut rng1 = SeededRng::from_u64(10);
        let mut rng2 = SeededRng::from_u64(11);
        let (g1, _) = garble(&a, 64, &mut rng1);
        let (g2, _) = garble(&a, 64, &mut rng2);
        for s1 in &g1.secrets {
            for s2 in &g2.secrets {
                assert_ne!(s1.w0, s2.w0);
                assert_ne!(s1.w0, s2.w1);
                assert_ne!(s1.w1, s2.w0);
                assert_ne!(s1.w1, s2.w1);
            }
        }
    }

    #[test]
    fn translation_exhaustive_over_perm_bits_and_message() {
        for src_perm in [false, true] {
            for dst_perm in [false, true] {
                for m in [false, true] {
                    let out = run_pair(
                        &PairConfig::ideal(
                            100 + u64::from(src_perm) * 4 + u64::from(dst_perm) * 2 + u64::from(m),
                        ),
                        move |ep| {
                            // sender side: holds the garbled source value
                            let mut rng = SeededRng::from_u64(77);
                            let src = WireSecrets {
                                w0: BitString::random(&mut rng, ep.k),
                                w1: BitString::random(&mut rng, ep.k),
                                perm: src_perm,
                            };
                            let dst = WireSecrets {
                                w0: BitString::random(&mut rng, ep.k),
                                w1: BitString::random(&mut rng, ep.k),
                                perm: dst_perm,
                            };
                            let held = src.garbled(m);
                            translate_send(ep, &held, &dst)?;
                            Ok(dst)
                        },
                        move |ep| translate_recv(ep, src_perm, ep.k),
                    )
                    .unwrap();
                    let dst = out.alice;
                    let got = out.bob;
                    assert_eq!(dst.decode(&got).unwrap(), m);
                    assert_eq!(got.select, m ^ dst_perm);
                }
            }
        }
    }

    fn run_garbled_distance(seed: u64, xv: u64, yv: u64) -> (u64, crate::meter::CostMeter) {
        let a = distance2_alice_circuit(&BitString::from_u64(xv, 2));
        let b = distance2_bob_circuit(&BitString::from_u64(yv, 2));
        let (ac, bc) = (a.clone(), b.clone());
        let out = run_pair(
            &PairConfig::ideal(seed),
            move |ep| garbled_alice(ep, &a, &b, false),
            move |ep| garbled_bob(ep, &bc, &ac, false),
        )
        .unwrap();
        (out.alice.to_u64(), out.meter_a.merged_with(&out.meter_b))
    }

    #[test]
    fn garbled_distance_exhaustive_and_census() {
        for xv in 0..4u64 {
            for yv in 0..4u64 {
                let (z, meter) = run_garbled_distance(3000 + xv * 4 + yv, xv, yv);
                assert_eq!(z, (xv ^ yv).count_ones() as u64, "x={xv} y={yv}");
                // exactly c = 4 width-2 transfers
                assert_eq!(meter.ot_census(), vec![(2, 4)]);
                // a constant number of PRF calls per gate: 4 gates total,
                // 8 garbling + 2 evaluation calls each
                assert_eq!(meter.prf_evals, 4 * 10);
            }
        }
    }

    #[test]
    fn garbled_zero_gate_protocol() {
        for (a_bit, b_bit, z) in [(false, true, true), (true, false, false)] {
            let (ac, bc) = constant_protocol_circuits((a_bit, b_bit), z);
            assert!(ac.gates.is_empty() && bc.gates.is_empty());
            let (ac2, bc2) = (ac.clone(), bc.clone());
            let out = run_pair(
                &PairConfig::ideal(500 + u64::from(z)),
                move |ep| garbled_alice(ep, &ac, &bc, true),
                move |ep| garbled_bob(ep, &bc2, &ac2, true),
            )
            .unwrap();
            assert_eq!(out.alice.to_u64(), u64::from(z));
            assert_eq!(out.bob.unwrap().to_u64(), u64::from(z));
            let merged = out.meter_a.merged_with(&out.meter_b);
            assert_eq!(merged.prf_evals, 0);
            assert_eq!(merged.ot_census(), vec![(2, 2)]);
        }
    }

    #[test]
    fn schedule_mismatch_aborts() {
        let a = distance2_alice_circuit(&bs("01"));
        let (_, bad_bob) = constant_protocol_circuits((false, false), false);
        let (ac, bc) = (a.clone(), bad_bob.clone());
        let res = run_pair(
            &PairConfig::ideal(1),
            move |ep| garbled_alice(ep, &a, &bad_bob, false),
            move |ep| garbled_bob(ep, &bc, &ac, false),
        );
        assert!(res.is_err());
    }
}
