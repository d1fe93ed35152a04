//! Two-endpoint execution.
//!
//! A protocol is a pair of functions, one per party, each driving an
//! [`Endpoint`]. Endpoints share no state: they synchronize only through
//! channel messages (and, for the ideal OT backend, through the in-process
//! trusted dealer). Both endpoints of a run live in one process, either
//! connected by an in-memory pipe or by a loopback TCP socket; real
//! two-process TCP runs are limited to the group and reduction backends,
//! since the ideal dealer cannot cross a process boundary.

use std::net::{TcpListener, TcpStream};
use std::sync::{mpsc, Arc, Mutex};

use thiserror::Error;

use crate::bits::{BitsError, Role};
use crate::channel::{Channel, ChannelError, ReceivedLog};
use crate::meter::{new_meter, CostMeter, MeterHandle};
use crate::ot::{IdealPort, Offer, OtError};
use crate::rng::SeededRng;

/// Failures surfaced by protocol executions.
#[derive(Debug, Error)]
pub enum ProtoError {
    /// Transport or framing failure.
    #[error(transparent)]
    Channel(#[from] ChannelError),
    /// Malformed shares or bit strings.
    #[error(transparent)]
    Bits(#[from] BitsError),
    /// Oblivious-transfer sub-protocol failure.
    #[error(transparent)]
    Ot(#[from] OtError),
    /// Indexing-layer failure.
    #[error(transparent)]
    Ind(#[from] crate::ind::IndError),
    /// A protocol precondition did not hold.
    #[error("protocol setup error: {0}")]
    Setup(String),
    /// Compilation refused, e.g. the memory budget was exceeded.
    #[error("compile refused: {0}")]
    Compile(String),
    /// The peer endpoint panicked or aborted.
    #[error("peer endpoint failed")]
    PeerFailed,
}

/// Which OT implementation a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtBackendKind {
    /// Trusted-dealer simulation inside the harness; zero channel bytes.
    Ideal,
    /// Two-message OT over a prime-order group.
    Group,
    /// 1-of-w from log w base 1-of-2 transfers; the base OTs use this kind.
    ReduceOt12(BaseOt),
}

/// Base OT used inside the reduction backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseOt {
    /// Ideal dealer base.
    Ideal,
    /// Group-based base.
    Group,
}

impl OtBackendKind {
    /// True when the backend needs the in-process dealer.
    pub fn needs_dealer(self) -> bool {
        matches!(
            self,
            OtBackendKind::Ideal | OtBackendKind::ReduceOt12(BaseOt::Ideal)
        )
    }

    /// Logical message flights consumed by one OT on this backend.
    pub fn round_cost(self) -> u64 {
        match self {
            OtBackendKind::Ideal => 1,
            OtBackendKind::Group => 3,
            OtBackendKind::ReduceOt12(BaseOt::Ideal) => 2,
            OtBackendKind::ReduceOt12(BaseOt::Group) => 4,
        }
    }
}

/// One party's execution context.
pub struct Endpoint {
    /// This endpoint's party tag.
    pub role: Role,
    /// Framed channel to the peer.
    pub chan: Channel,
    /// This party's private randomness.
    pub rng: SeededRng,
    /// Cost tally for this endpoint.
    pub meter: MeterHandle,
    /// Security parameter in bits.
    pub k: usize,
    /// OT backend in use.
    pub backend: OtBackendKind,
    /// Dealer ports when the backend needs them.
    pub(crate) ideal: Option<IdealPort>,
    /// Log of received payloads, when recording is on.
    pub recorder: Option<ReceivedLog>,
}

impl Endpoint {
    /// Records an out-of-band delivery (ideal OT) into the received log.
    pub(crate) fn record_delivery(&self, bytes: &[u8]) {
        if let Some(log) = &self.recorder {
            let mut log = log.lock().unwrap();
            log.push(0xFE);
            log.extend_from_slice(bytes);
        }
    }
}

/// Transport used between the two endpoints of a local run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    /// In-memory pipe.
    Mem,
    /// Loopback TCP socket pair.
    Tcp,
}

/// Configuration for running a protocol pair locally.
#[derive(Debug, Clone)]
pub struct PairConfig {
    /// Transport between the endpoints.
    pub transport: TransportKind,
    /// OT backend.
    pub backend: OtBackendKind,
    /// Security parameter in bits.
    pub k: usize,
    /// Run seed; each endpoint derives its own stream from it.
    pub seed: u64,
    /// Record received payloads for privacy checks.
    pub record: bool,
}

impl PairConfig {
    /// Ideal backend over the in-memory transport; the default for tests.
    pub fn ideal(seed: u64) -> PairConfig {
        PairConfig {
            transport: TransportKind::Mem,
            backend: OtBackendKind::Ideal,
            k: 128,
            seed,
            record: false,
        }
    }
}

/// Everything a finished run returns.
pub struct PairOutcome<RA, RB> {
    /// Alice's output.
    pub alice: RA,
    /// Bob's output.
    pub bob: RB,
    /// Alice's meter.
    pub meter_a: CostMeter,
    /// Bob's meter.
    pub meter_b: CostMeter,
    /// Alice's received-payload log (empty unless recording).
    pub log_a: Vec<u8>,
    /// Bob's received-payload log.
    pub log_b: Vec<u8>,
}

fn tcp_loopback_pair() -> Result<(TcpStream, TcpStream), ChannelError> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let client = TcpStream::connect(addr)?;
    let (server, _) = listener.accept()?;
    Ok((client, server))
}

/// Runs `alice` and `bob` on two threads connected per `cfg` and returns
/// both outputs with their cost meters.
pub fn run_pair<RA, RB, FA, FB>(
    cfg: &PairConfig,
    alice: FA,
    bob: FB,
) -> Result<PairOutcome<RA, RB>, ProtoError>
where
    RA: Send,
    RB: Send,
    FA: FnOnce(&mut Endpoint) -> Result<RA, ProtoError> + Send,
    FB: FnOnce(&mut Endpoint) -> Result<RB, ProtoError> + Send,
{
    let meter_a = new_meter();
    let meter_b = new_meter();
    let (chan_a, chan_b) = match cfg.transport {
        TransportKind::Mem => Channel::mem_pair(meter_a.clone(), meter_b.clone()),
        TransportKind::Tcp => {
            let (sa, sb) = tcp_loopback_pair()?;
            (
                Channel::from_tcp(sa, meter_a.clone())?,
                Channel::from_tcp(sb, meter_b.clone())?,
            )
        }
    };

    // dealer ports: each direction is an offer queue from sender to chooser
    let (port_a, port_b) = if cfg.backend.needs_dealer() {
        let (tx_to_b, rx_at_b) = mpsc::channel::<Offer>();
        let (tx_to_a, rx_at_a) = mpsc::channel::<Offer>();
        (
            Some(IdealPort {
                offers_out: tx_to_b,
                offers_in: rx_at_a,
            }),
            Some(IdealPort {
                offers_out: tx_to_a,
                offers_in: rx_at_b,
            }),
        )
    } else {
        (None, None)
    };

    let root = SeededRng::from_u64(cfg.seed);
    let rng_a = root.derive("alice");
    let rng_b = root.derive("bob");

    let build = |role: Role,
                 mut chan: Channel,
                 rng: SeededRng,
                 meter: MeterHandle,
                 ideal: Option<IdealPort>,
                 record: bool| {
        let recorder: Option<ReceivedLog> = if record {
            let log = Arc::new(Mutex::new(Vec::new()));
            chan.set_recorder(log.clone());
            Some(log)
        } else {
            None
        };
        Endpoint {
            role,
            chan,
            rng,
            meter,
            k: cfg.k,
            backend: cfg.backend,
            ideal,
            recorder,
        }
    };

    let record = cfg.record;
    let k_ok = match cfg.backend {
        OtBackendKind::Ideal => cfg.k >= 1,
        _ => cfg.k >= crate::rng::SecurityParam::MIN_REAL,
    };
    if !k_ok {
        return Err(ProtoError::Setup(format!(
            "security parameter {} too small for backend {:?}",
            cfg.k, cfg.backend
        )));
    }

    std::thread::scope(|scope| {
        let handle_a = scope.spawn(move || {
            let mut ep = build(Role::A, chan_a, rng_a, meter_a, port_a, record);
            let out = alice(&mut ep)?;
            let log = ep
                .recorder
                .take()
                .map(|l| l.lock().unwrap().clone())
                .unwrap_or_default();
            let meter = ep.meter.lock().unwrap().clone();
            Ok::<_, ProtoError>((out, meter, log))
        });
        let handle_b = scope.spawn(move || {
            let mut ep = build(Role::B, chan_b, rng_b, meter_b, port_b, record);
            let out = bob(&mut ep)?;
            let log = ep
                .recorder
                .take()
                .map(|l| l.lock().unwrap().clone())
                .unwrap_or_default();
            let meter = ep.meter.lock().unwrap().clone();
            Ok::<_, ProtoError>((out, meter, log))
        });
        let res_a = handle_a.join().map_err(|_| ProtoError::PeerFailed)?;
        let res_b = handle_b.join().map_err(|_| ProtoError::PeerFailed)?;
        let (alice, meter_a, log_a) = res_a?;
        let (bob, meter_b, log_b) = res_b?;
        Ok(PairOutcome {
            alice,
            bob,
            meter_a,
            meter_b,
            log_a,
            log_b,
        })
    })
}
