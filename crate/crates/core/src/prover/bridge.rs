//! Length-prefixed JSON bridge to an external prover server.
//!
//! Each frame is a 4-byte big-endian payload length followed by one JSON
//! document. The client sends commands tagged by `cmd`:
//!
//! ```text
//! {"cmd":"init","problem_id":"...","statement":"..."}
//! {"cmd":"run_tac","tactic":"...","timeout_ms":10000}
//! {"cmd":"rollback"}
//! {"cmd":"close"}
//! ```
//!
//! and every command is answered with `{"error": string|null, "tactic_state": string}`.
//! After a failing `run_tac` the client issues `rollback` so the server can
//! restore its pre-submission checkpoint.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{ProverBackend, ProverConnection, ProverError, ProverReply, TIMEOUT_ERROR};

pub const MAX_FRAME_LEN: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum BridgeCommand {
    Init {
        problem_id: String,
        statement: String,
    },
    RunTac {
        tactic: String,
        timeout_ms: u64,
    },
    Rollback,
    Close,
}

pub fn write_frame<W: Write, T: Serialize>(w: &mut W, msg: &T) -> io::Result<()> {
    let payload = serde_json::to_vec(msg)?;
    if payload.len() > MAX_FRAME_LEN {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("frame of {} bytes exceeds limit", payload.len()),
        ));
    }
    w.write_all(&(payload.len() as u32).to_be_bytes())?;
    w.write_all(&payload)?;
    w.flush()
}

/// Reads one frame; `Ok(None)` on a clean end of stream.
pub fn read_frame<R: Read, T: DeserializeOwned>(r: &mut R) -> io::Result<Option<T>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME_LEN {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("frame of {len} bytes exceeds limit"),
        ));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    serde_json::from_slice(&buf)
        .map(Some)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

fn is_timeout(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut)
}

#[derive(Debug, Clone)]
pub struct BridgeProver {
    pub addr: String,
    pub connect_timeout: Duration,
    /// Added to each step budget to absorb transport latency.
    pub io_margin: Duration,
}

impl BridgeProver {
    pub fn new(addr: impl Into<String>) -> Self {
        Self {
            addr: addr.into(),
            connect_timeout: Duration::from_secs(5),
            io_margin: Duration::from_secs(5),
        }
    }

    fn dial(&self) -> Result<TcpStream, ProverError> {
        let unavailable = |e: io::Error| ProverError::BridgeUnavailable(format!("{}: {e}", self.addr));
        let addrs: Vec<SocketAddr> = self.addr.to_socket_addrs().map_err(unavailable)?.collect();
        let mut last = io::Error::new(io::ErrorKind::NotFound, "no address resolved");
        for a in addrs {
            match TcpStream::connect_timeout(&a, self.connect_timeout) {
                Ok(s) => {
                    s.set_nodelay(true).ok();
                    return Ok(s);
                }
                Err(e) => last = e,
            }
        }
        Err(unavailable(last))
    }
}

fn exchange(stream: &mut TcpStream, cmd: &BridgeCommand) -> io::Result<ProverReply> {
    write_frame(stream, cmd)?;
    read_frame(stream)?
        .ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "bridge closed the stream"))
}

fn init(stream: &mut TcpStream, problem_id: &str, statement: &str) -> Result<(), ProverError> {
    stream
        .set_read_timeout(Some(Duration::from_secs(60)))
        .map_err(|e| ProverError::Protocol(e.to_string()))?;
    let reply = exchange(
        stream,
        &BridgeCommand::Init {
            problem_id: problem_id.to_string(),
            statement: statement.to_string(),
        },
    )
    .map_err(|e| ProverError::BridgeUnavailable(e.to_string()))?;
    match reply.error {
        Some(e) => Err(ProverError::BadStatement(e)),
        None => Ok(()),
    }
}

impl ProverBackend for BridgeProver {
    fn connect(
        &self,
        problem_id: &str,
        statement: &str,
    ) -> Result<Box<dyn ProverConnection>, ProverError> {
        let mut stream = self.dial()?;
        init(&mut stream, problem_id, statement)?;
        Ok(Box::new(BridgeConnection {
            prover: self.clone(),
            stream: Some(stream),
            problem_id: problem_id.to_string(),
            statement: statement.to_string(),
            accepted: Vec::new(),
        }))
    }
}

struct BridgeConnection {
    prover: BridgeProver,
    /// `None` after a timeout desynchronised the stream.
    stream: Option<TcpStream>,
    problem_id: String,
    statement: String,
    accepted: Vec<String>,
}

impl BridgeConnection {
    /// Re-establishes the session by replaying every accepted step.
    fn reconnect(&mut self) -> Result<TcpStream, ProverError> {
        let mut stream = self.prover.dial()?;
        init(&mut stream, &self.problem_id, &self.statement)?;
        for tactic in &self.accepted {
            let reply = exchange(
                &mut stream,
                &BridgeCommand::RunTac {
                    tactic: tactic.clone(),
                    timeout_ms: 0,
                },
            )
            .map_err(|e| ProverError::Protocol(e.to_string()))?;
            if let Some(err) = reply.error {
                return Err(ProverError::Protocol(format!(
                    "replay of accepted step {tactic:?} failed: {err}"
                )));
            }
        }
        Ok(stream)
    }
}

impl ProverConnection for BridgeConnection {
    fn submit(&mut self, tactic: &str, budget: Duration) -> Result<ProverReply, ProverError> {
        let mut stream = match self.stream.take() {
            Some(s) => s,
            None => self.reconnect()?,
        };
        let proto = |e: io::Error| ProverError::Protocol(e.to_string());
        stream
            .set_read_timeout(Some(budget + self.prover.io_margin))
            .map_err(proto)?;
        let cmd = BridgeCommand::RunTac {
            tactic: tactic.to_string(),
            timeout_ms: budget.as_millis() as u64,
        };
        let reply = match exchange(&mut stream, &cmd) {
            Ok(r) => r,
            Err(e) if is_timeout(&e) => return Err(ProverError::Timeout),
            Err(e) => return Err(proto(e)),
        };
        if reply.error.is_some() {
            exchange(&mut stream, &BridgeCommand::Rollback).map_err(proto)?;
        } else {
            self.accepted.push(tactic.to_string());
        }
        self.stream = Some(stream);
        Ok(reply)
    }

    fn close(&mut self) {
        if let Some(mut s) = self.stream.take() {
            let _ = exchange(&mut s, &BridgeCommand::Close);
        }
    }
}

/// Serves the bridge protocol on `listener`, backing each client with a
/// connection from `backend`. Runs until the listener fails.
pub fn serve(listener: TcpListener, backend: Arc<dyn ProverBackend>) {
    for stream in listener.incoming() {
        let Ok(stream) = stream else { break };
        let backend = Arc::clone(&backend);
        thread::spawn(move || {
            if let Err(e) = handle_client(stream, backend.as_ref()) {
                log::debug!("bridge client ended: {e}");
            }
        });
    }
}

/// Binds `listener` on a background thread.
pub fn spawn_server(listener: TcpListener, backend: Arc<dyn ProverBackend>) -> JoinHandle<()> {
    thread::spawn(move || serve(listener, backend))
}

fn handle_client(mut stream: TcpStream, backend: &dyn ProverBackend) -> io::Result<()> {
    let mut conn: Option<Box<dyn ProverConnection>> = None;
    while let Some(cmd) = read_frame::<_, BridgeCommand>(&mut stream)? {
        let reply = match cmd {
            BridgeCommand::Init {
                problem_id,
                statement,
            } => match backend.connect(&problem_id, &statement) {
                Ok(c) => {
                    conn = Some(c);
                    ProverReply::ok(statement)
                }
                Err(e) => ProverReply::err(e.to_string()),
            },
            BridgeCommand::RunTac { tactic, timeout_ms } => match conn.as_mut() {
                None => ProverReply::err("session not initialised"),
                Some(c) => {
                    let budget = if timeout_ms == 0 {
                        Duration::MAX
                    } else {
                        Duration::from_millis(timeout_ms)
                    };
                    match c.submit(&tactic, budget) {
                        Ok(r) => r,
                        Err(ProverError::Timeout) => ProverReply::err(TIMEOUT_ERROR),
                        Err(e) => ProverReply::err(e.to_string()),
                    }
                }
            },
            // Connections never apply failed steps, so the checkpoint is
            // already current.
            BridgeCommand::Rollback => ProverReply::ok(""),
            BridgeCommand::Close => {
                write_frame(&mut stream, &ProverReply::ok(""))?;
                if let Some(mut c) = conn.take() {
                    c.close();
                }
                return Ok(());
            }
        };
        write_frame(&mut stream, &reply)?;
    }
    Ok(())
}
