//! Framed duplex channels over in-memory pipes or TCP.
//!
//! Wire format, identical on both transports: a 4-byte little-endian payload
//! length, one frame-type byte, then the payload. One frame carries one
//! logical message.

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::{mpsc, Arc, Mutex};

use thiserror::Error;

use crate::meter::MeterHandle;

/// Frame type byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameType {
    /// Ordinary protocol payload.
    Data = 0,
    /// A message belonging to an OT sub-protocol.
    OtMsg = 1,
    /// A revealed random seed.
    Seed = 2,
    /// Orderly end of a run.
    End = 3,
}

impl FrameType {
    /// Parses the type byte.
    pub fn from_byte(b: u8) -> Result<FrameType, ChannelError> {
        match b {
            0 => Ok(FrameType::Data),
            1 => Ok(FrameType::OtMsg),
            2 => Ok(FrameType::Seed),
            3 => Ok(FrameType::End),
            _ => Err(ChannelError::BadFrame("unknown frame type")),
        }
    }
}

/// Largest accepted payload; guards against corrupt length headers.
pub const MAX_FRAME_LEN: usize = 1 << 28;

/// Transport and framing failures.
#[derive(Debug, Error)]
pub enum ChannelError {
    /// Underlying byte stream failed.
    #[error("transport error: {0}")]
    Transport(#[from] std::io::Error),
    /// The peer hung up mid-protocol.
    #[error("channel closed by peer")]
    Closed,
    /// A frame violated the wire format.
    #[error("bad frame: {0}")]
    BadFrame(&'static str),
    /// Received a frame of an unexpected type.
    #[error("unexpected frame type: expected {expected:?}, got {got:?}")]
    UnexpectedType {
        /// What the protocol state machine was waiting for.
        expected: FrameType,
        /// What arrived.
        got: FrameType,
    },
}

/// Encodes one frame.
pub fn encode_frame(ftype: FrameType, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(5 + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.push(ftype as u8);
    out.extend_from_slice(payload);
    out
}

/// Decodes one frame from an exact buffer.
pub fn decode_frame(buf: &[u8]) -> Result<(FrameType, Vec<u8>), ChannelError> {
    if buf.len() < 5 {
        return Err(ChannelError::BadFrame("truncated header"));
    }
    let len = u32::from_le_bytes(buf[..4].try_into().unwrap()) as usize;
    if len > MAX_FRAME_LEN {
        return Err(ChannelError::BadFrame("payload too large"));
    }
    let ftype = FrameType::from_byte(buf[4])?;
    if buf.len() != 5 + len {
        return Err(ChannelError::BadFrame("length mismatch"));
    }
    Ok((ftype, buf[5..].to_vec()))
}

/// A reliable ordered byte stream; the two transports implement this.
trait Wire: Send {
    fn send_all(&mut self, data: &[u8]) -> Result<(), ChannelError>;
    fn recv_exact(&mut self, out: &mut [u8]) -> Result<(), ChannelError>;
}

struct MemWire {
    tx: mpsc::Sender<Vec<u8>>,
    rx: mpsc::Receiver<Vec<u8>>,
    pending: Vec<u8>,
    offset: usize,
}

impl Wire for MemWire {
    fn send_all(&mut self, data: &[u8]) -> Result<(), ChannelError> {
        self.tx
            .send(data.to_vec())
            .map_err(|_| ChannelError::Closed)
    }

    fn recv_exact(&mut self, out: &mut [u8]) -> Result<(), ChannelError> {
        let mut filled = 0;
        while filled < out.len() {
            if self.offset == self.pending.len() {
                self.pending = self.rx.recv().map_err(|_| ChannelError::Closed)?;
                self.offset = 0;
            }
            let take = (out.len() - filled).min(self.pending.len() - self.offset);
            out[filled..filled + take]
                .copy_from_slice(&self.pending[self.offset..self.offset + take]);
            self.offset += take;
            filled += take;
        }
        Ok(())
    }
}

struct TcpWire {
    stream: TcpStream,
}

impl Wire for TcpWire {
    fn send_all(&mut self, data: &[u8]) -> Result<(), ChannelError> {
        self.stream.write_all(data)?;
        Ok(())
    }

    fn recv_exact(&mut self, out: &mut [u8]) -> Result<(), ChannelError> {
        match self.stream.read_exact(out) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Err(ChannelError::Closed),
            Err(e) => Err(e.into()),
        }
    }
}

/// Append-only log of payloads this endpoint received; feeds the statistical
/// privacy checks. OT deliveries from the ideal backend are appended too.
pub type ReceivedLog = Arc<Mutex<Vec<u8>>>;

/// One endpoint's framed view of the duplex connection.
pub struct Channel {
    /// Logical channel id; informational, not on the wire.
    pub id: u32,
    wire: Box<dyn Wire>,
    meter: MeterHandle,
    recorder: Option<ReceivedLog>,
}

impl Channel {
    fn new(wire: Box<dyn Wire>, meter: MeterHandle) -> Channel {
        Channel {
            id: 0,
            wire,
            meter,
            recorder: None,
        }
    }

    /// Creates a connected in-memory pair. Meters are per endpoint.
    pub fn mem_pair(meter_a: MeterHandle, meter_b: MeterHandle) -> (Channel, Channel) {
        let (tx_ab, rx_ab) = mpsc::channel();
        let (tx_ba, rx_ba) = mpsc::channel();
        let a = MemWire {
            tx: tx_ab,
            rx: rx_ba,
            pending: Vec::new(),
            offset: 0,
        };
        let b = MemWire {
            tx: tx_ba,
            rx: rx_ab,
            pending: Vec::new(),
            offset: 0,
        };
        (
            Channel::new(Box::new(a), meter_a),
            Channel::new(Box::new(b), meter_b),
        )
    }

    /// Wraps a connected TCP stream.
    pub fn from_tcp(stream: TcpStream, meter: MeterHandle) -> Result<Channel, ChannelError> {
        stream.set_nodelay(true)?;
        Ok(Channel::new(Box::new(TcpWire { stream }), meter))
    }

    /// Starts recording received payloads into `log`.
    pub fn set_recorder(&mut self, log: ReceivedLog) {
        self.recorder = Some(log);
    }

    /// Sends one frame, metering its bytes.
    pub fn send(&mut self, ftype: FrameType, payload: &[u8]) -> Result<(), ChannelError> {
        self.meter
            .lock()
            .unwrap()
            .note_frame(ftype as u8, payload.len());
        self.wire.send_all(&encode_frame(ftype, payload))
    }

    /// Receives the next frame.
    pub fn recv(&mut self) -> Result<(FrameType, Vec<u8>), ChannelError> {
        let mut header = [0u8; 5];
        self.wire.recv_exact(&mut header)?;
        let len = u32::from_le_bytes(header[..4].try_into().unwrap()) as usize;
        if len > MAX_FRAME_LEN {
            return Err(ChannelError::BadFrame("payload too large"));
        }
        let ftype = FrameType::from_byte(header[4])?;
        let mut payload = vec![0u8; len];
        self.wire.recv_exact(&mut payload)?;
        if let Some(log) = &self.recorder {
            let mut log = log.lock().unwrap();
            log.push(ftype as u8);
            log.extend_from_slice(&payload);
        }
        Ok((ftype, payload))
    }

    /// Receives a frame that must have the given type.
    pub fn recv_expect(&mut self, expected: FrameType) -> Result<Vec<u8>, ChannelError> {
        let (got, payload) = self.recv()?;
        if got != expected {
            return Err(ChannelError::UnexpectedType { expected, got });
        }
        Ok(payload)
    }
}
