//! One endpoint of a protocol over a real TCP connection.
//!
//! Two-process runs carry real traffic, so they are limited to backends
//! that live entirely on the channel: the group OT and the reduction over
//! group base transfers. The in-process trusted dealer cannot cross a
//! process boundary.
//!
//! Each side supplies its own input parameters; anything omitted is drawn
//! from the shared run seed, which both processes must agree on anyway to
//! keep the protocol-tree masks coherent with the peer's expectations.

use std::net::TcpStream;

use serde_json::{json, Value};

use crate::bits::{BitString, Role};
use crate::bp::programs::bp_string_equality;
use crate::bp::random::{run_derandomized_alice, run_derandomized_bob, RandomizedBpFamily};
use crate::bp::{compile_and_run_bp_alice, compile_and_run_bp_bob};
use crate::cc::{
    build_hamming_tree, compile_and_run_cc_alice, compile_and_run_cc_bob, reveal_share, CompileOpts,
};
use crate::channel::Channel;
use crate::exec::{Endpoint, ProtoError};
use crate::harness::{MeterDump, Params, Report, RunConfig};
use crate::median::{median_tree, validate_median_inputs};
use crate::meter::{new_meter, CostMeter};
use crate::rng::SeededRng;

fn remote_endpoint(cfg: &RunConfig, role: Role, stream: TcpStream) -> Result<Endpoint, ProtoError> {
    if cfg.backend.needs_dealer() {
        return Err(ProtoError::Setup(
            "two-process runs need a channel-only backend: group or ot12-group".into(),
        ));
    }
    let meter = new_meter();
    let chan = Channel::from_tcp(stream, meter.clone())?;
    Ok(Endpoint {
        role,
        chan,
        rng: SeededRng::from_u64(cfg.seed).derive(role.name()),
        meter,
        k: cfg.k,
        backend: cfg.backend,
        ideal: None,
        recorder: None,
    })
}

fn my_bits(cfg: &RunConfig, role: Role, key: &str, len: usize) -> Result<BitString, ProtoError> {
    let p = Params(&cfg.params);
    let mut rng = SeededRng::from_u64(cfg.seed).derive("inputs");
    if role == Role::B {
        // keep the seeded-input stream aligned with the local runner,
        // which draws Alice's input first
        let _ = BitString::random(&mut rng, len);
    }
    p.bits(key, len, &mut rng)
}

fn run_half(cfg: &RunConfig, ep: &mut Endpoint) -> Result<Value, ProtoError> {
    let p = Params(&cfg.params);
    let role = ep.role;
    match cfg.protocol.as_str() {
        "hamming" => {
            let n = p.usize("n", 2)?;
            let tree = build_hamming_tree(n);
            let share = match role {
                Role::A => {
                    let x = my_bits(cfg, role, "x", n)?;
                    compile_and_run_cc_alice(ep, &tree, &x, &CompileOpts::default())?
                }
                Role::B => {
                    let y = my_bits(cfg, role, "y", n)?;
                    compile_and_run_cc_bob(ep, &tree, &y, &CompileOpts::default())?
                }
            };
            let value = reveal_share(ep, &share)?;
            Ok(json!({"distance": value.to_u64()}))
        }
        "equality" => {
            let n = p.usize("bits", 4)?;
            let bp = bp_string_equality(n);
            let share = match role {
                Role::A => {
                    let x = my_bits(cfg, role, "x", n)?;
                    compile_and_run_bp_alice(ep, &bp, &x, &CompileOpts::default())?
                }
                Role::B => {
                    let y = my_bits(cfg, role, "y", n)?;
                    compile_and_run_bp_bob(ep, &bp, &y, &CompileOpts::default())?
                }
            };
            let value = reveal_share(ep, &share)?;
            Ok(json!({"equal": value.to_u64() == 1}))
        }
        "millionaires" => {
            let n = p.usize("n", 16)?;
            let eps_exp = p.u64("eps_exp", 20)? as i32;
            let epsilon = 2f64.powi(-eps_exp);
            let family = RandomizedBpFamily::new(128, move |r: &BitString| {
                crate::bp::programs::bp_millionaires(n, epsilon, &r.slice(0, 64))
            });
            let key = if role == Role::A { "x" } else { "y" };
            let value = p.u64(
                key,
                SeededRng::from_u64(cfg.seed)
                    .derive(key)
                    .next_below(1 << n.min(63)),
            )?;
            let input = BitString::from_u64(value, n);
            let share = match role {
                Role::A => run_derandomized_alice(ep, &family, &input, &CompileOpts::default())?,
                Role::B => run_derandomized_bob(ep, &family, &input, &CompileOpts::default())?,
            };
            let out = reveal_share(ep, &share)?;
            let winner = match crate::bp::programs::CompareOutcome::from_code(out.to_u64()) {
                Some(crate::bp::programs::CompareOutcome::XLarger) => "x",
                Some(crate::bp::programs::CompareOutcome::YLarger) => "y",
                Some(crate::bp::programs::CompareOutcome::Equal) => "equal",
                None => return Err(ProtoError::Setup("bad outcome code".into())),
            };
            Ok(json!({"winner": winner, "mine": value}))
        }
        "median" => {
            let n = p.u64("n", 16)?;
            let m = p.usize("m", 4)?;
            let key = if role == Role::A { "x" } else { "y" };
            let mine = match p.u64_list(key)? {
                Some(v) => v,
                None => {
                    let mut rng = SeededRng::from_u64(cfg.seed).derive(key);
                    (0..m).map(|_| rng.next_below(n) + 1).collect()
                }
            };
            let (sorted, _) = validate_median_inputs(&mine, &mine, n)?;
            let tree = median_tree(n, m);
            let share = match role {
                Role::A => compile_and_run_cc_alice(ep, &tree, &sorted, &CompileOpts::default())?,
                Role::B => compile_and_run_cc_bob(ep, &tree, &sorted, &CompileOpts::default())?,
            };
            let value = reveal_share(ep, &share)?;
            Ok(json!({"median": value.to_u64()}))
        }
        "garbled-demo" => {
            let key = if role == Role::A { "x" } else { "y" };
            let mine = my_bits(cfg, role, key, 2)?;
            let (alice_circ, bob_circ);
            match role {
                Role::A => {
                    alice_circ = crate::garbled::distance2_alice_circuit(&mine);
                    bob_circ = crate::garbled::distance2_bob_circuit(&BitString::zeros(2));
                    let z = crate::garbled::garbled_alice(ep, &alice_circ, &bob_circ, true)?;
                    Ok(json!({"distance": z.to_u64()}))
                }
                Role::B => {
                    bob_circ = crate::garbled::distance2_bob_circuit(&mine);
                    alice_circ = crate::garbled::distance2_alice_circuit(&BitString::zeros(2));
                    let z = crate::garbled::garbled_bob(ep, &bob_circ, &alice_circ, true)?;
                    Ok(json!({"distance": z.map(|v| v.to_u64())}))
                }
            }
        }
        other => Err(ProtoError::Setup(format!(
            "protocol {other} is not available over two-process transport"
        ))),
    }
}

/// Runs this process's side of the protocol over `stream` and reports its
/// own outputs and meter; census checks need both meters and are local-run
/// only.
pub fn run_remote(cfg: &RunConfig, role: Role, stream: TcpStream) -> Result<Report, ProtoError> {
    let start = std::time::Instant::now();
    let mut ep = remote_endpoint(cfg, role, stream)?;
    let outputs = run_half(cfg, &mut ep)?;
    let my_meter = ep.meter.lock().unwrap().clone();
    let (alice_meter, bob_meter) = match role {
        Role::A => (my_meter, CostMeter::default()),
        Role::B => (CostMeter::default(), my_meter),
    };
    Ok(Report {
        schema: 1,
        protocol: cfg.protocol.clone(),
        params: cfg.params.clone(),
        seed: cfg.seed,
        transport: "tcp".into(),
        ot_backend: super::backend_name(cfg.backend).into(),
        k: cfg.k,
        outputs,
        meter: MeterDump::new(alice_meter, bob_meter),
        bound_checks: Vec::new(),
        wall_time_ms: if cfg.timing {
            Some(start.elapsed().as_millis())
        } else {
            None
        },
    })
}
