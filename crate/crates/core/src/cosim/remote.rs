//! Simulators over TCP. [`RemoteSimulator`] is the master-side handle and
//! behaves like any in-process simulator; [`serve_connection`] exposes a
//! local simulator to one master.
//!
//! Session: the client sends HELLO and the server answers with its own
//! HELLO carrying the simulator id. The client then sends INIT and the
//! server replies with an INIT listing its ports. Each STEP is answered by
//! STEP_OK or ERROR. TERMINATE is acknowledged with TERMINATE and closes the
//! session.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::protocol::{decode_message, encode_message, Frame, PortDecl, PROTOCOL_VERSION};
use super::{Direction, Location, PortSpec, Simulator, SimulatorDescriptor};
use crate::error::{Error, Result};

pub const DEFAULT_STEP_TIMEOUT: Duration = Duration::from_secs(30);

struct Connection {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    line: Vec<u8>,
    timeout: Option<Duration>,
}

impl Connection {
    fn new(stream: TcpStream, timeout: Option<Duration>) -> Result<Self> {
        let io = |e| Error::Remote(format!("socket setup: {e}"));
        stream.set_nodelay(true).map_err(io)?;
        stream.set_read_timeout(timeout).map_err(io)?;
        let writer = stream.try_clone().map_err(io)?;
        Ok(Connection {
            reader: BufReader::new(stream),
            writer,
            line: Vec::new(),
            timeout,
        })
    }

    fn send(&mut self, frame: &Frame) -> Result<()> {
        let bytes = encode_message(frame)?;
        self.writer
            .write_all(&bytes)
            .map_err(|e| Error::Remote(format!("send {}: {e}", frame.kind())))
    }

    /// `Ok(None)` on a clean end of stream.
    fn recv(&mut self) -> Result<Option<Frame>> {
        self.line.clear();
        match self.reader.read_until(b'\n', &mut self.line) {
            Ok(0) => Ok(None),
            Ok(_) => decode_message(&self.line).map(Some),
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                Err(Error::Timeout(self.timeout.unwrap_or_default()))
            }
            Err(e) => Err(Error::Remote(format!("receive: {e}"))),
        }
    }

    fn expect(&mut self) -> Result<Frame> {
        match self.recv()? {
            Some(Frame::Error { message }) => Err(Error::Remote(message)),
            Some(f) => Ok(f),
            None => Err(Error::Remote("connection closed by peer".into())),
        }
    }
}

/// Master-side handle of a simulator served elsewhere.
pub struct RemoteSimulator {
    descriptor: SimulatorDescriptor,
    conn: Connection,
    outputs: BTreeMap<String, f64>,
    terminated: bool,
}

impl RemoteSimulator {
    /// Connects and performs the HELLO/INIT handshake. `step_timeout`
    /// bounds every wait for a reply.
    pub fn connect(endpoint: &str, step_timeout: Duration) -> Result<Self> {
        let addrs: Vec<_> = endpoint
            .to_socket_addrs()
            .map_err(|e| Error::Remote(format!("cannot resolve `{endpoint}`: {e}")))?
            .collect();
        let mut last = None;
        let mut stream = None;
        for a in &addrs {
            match TcpStream::connect_timeout(a, step_timeout) {
                Ok(s) => {
                    stream = Some(s);
                    break;
                }
                Err(e) => last = Some(e),
            }
        }
        let stream = stream.ok_or_else(|| {
            Error::Remote(format!(
                "cannot connect to `{endpoint}`: {}",
                last.map(|e| e.to_string()).unwrap_or_else(|| "no address".into())
            ))
        })?;
        let mut conn = Connection::new(stream, Some(step_timeout))?;

        conn.send(&Frame::Hello {
            version: PROTOCOL_VERSION,
            id: "master".into(),
        })?;
        let id = match conn.expect()? {
            Frame::Hello { version, id } if version == PROTOCOL_VERSION => id,
            Frame::Hello { version, .. } => {
                let _ = conn.send(&Frame::Terminate);
                return Err(Error::Remote(format!(
                    "protocol version mismatch: server {version}, client {PROTOCOL_VERSION}"
                )));
            }
            other => return Err(Error::Protocol(format!("expected HELLO, got {}", other.kind()))),
        };

        conn.send(&Frame::Init {
            ports: Vec::new(),
            params: BTreeMap::new(),
        })?;
        let ports = match conn.expect()? {
            Frame::Init { ports, .. } => ports,
            other => return Err(Error::Protocol(format!("expected INIT, got {}", other.kind()))),
        };
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for p in ports {
            let spec = PortSpec::new(p.name, p.unit, p.default);
            match p.dir {
                Direction::In => inputs.push(spec),
                Direction::Out => outputs.push(spec),
            }
        }
        let descriptor = SimulatorDescriptor {
            id,
            inputs,
            outputs,
            location: Location::Remote(endpoint.to_string()),
        };
        descriptor.validate()?;
        Ok(RemoteSimulator {
            descriptor,
            conn,
            outputs: BTreeMap::new(),
            terminated: false,
        })
    }
}

impl Simulator for RemoteSimulator {
    fn descriptor(&self) -> &SimulatorDescriptor {
        &self.descriptor
    }

    fn step(&mut self, t: f64, dt: f64, inputs: &[f64]) -> Result<Vec<f64>> {
        let inputs = self
            .descriptor
            .inputs
            .iter()
            .zip(inputs)
            .map(|(p, &v)| (p.name.clone(), v))
            .collect();
        self.conn.send(&Frame::Step { t, dt, inputs })?;
        match self.conn.expect()? {
            Frame::StepOk { t: echoed, outputs } => {
                if echoed.to_bits() != t.to_bits() {
                    return Err(Error::Protocol(format!("STEP_OK for t = {echoed}, expected {t}")));
                }
                self.outputs = outputs;
            }
            other => return Err(Error::Protocol(format!("expected STEP_OK, got {}", other.kind()))),
        }
        self.descriptor
            .outputs
            .iter()
            .map(|p| {
                self.outputs
                    .get(&p.name)
                    .copied()
                    .ok_or_else(|| Error::Protocol(format!("STEP_OK lacks output `{}`", p.name)))
            })
            .collect()
    }

    fn terminate(&mut self) -> Result<()> {
        if self.terminated {
            return Ok(());
        }
        self.terminated = true;
        self.conn.send(&Frame::Terminate)?;
        match self.conn.recv()? {
            Some(Frame::Terminate) | None => Ok(()),
            Some(other) => Err(Error::Protocol(format!("expected TERMINATE, got {}", other.kind()))),
        }
    }
}

impl Drop for RemoteSimulator {
    fn drop(&mut self) {
        if !self.terminated {
            self.terminated = true;
            let _ = self.conn.send(&Frame::Terminate);
        }
    }
}

fn port_decls(d: &SimulatorDescriptor) -> Vec<PortDecl> {
    let decl = |p: &PortSpec, dir| PortDecl {
        name: p.name.clone(),
        dir,
        unit: p.unit.clone(),
        default: p.default,
    };
    d.inputs
        .iter()
        .map(|p| decl(p, Direction::In))
        .chain(d.outputs.iter().map(|p| decl(p, Direction::Out)))
        .collect()
}

/// Serves one master session on an accepted connection. The simulator is
/// initialized at the time of the first STEP and terminated when the
/// session ends, however it ends.
pub fn serve_connection<S: Simulator + ?Sized>(stream: TcpStream, sim: &mut S) -> Result<()> {
    let mut conn = Connection::new(stream, None)?;
    let mut terminated = false;
    let result = run_session(&mut conn, sim, &mut terminated);
    if let Err(e @ Error::Decode { .. }) = &result {
        // tell the peer why the session ends; it may already be gone
        let _ = conn.send(&Frame::Error { message: e.to_string() });
    }
    if !terminated {
        let _ = sim.terminate();
    }
    result
}

fn run_session<S: Simulator + ?Sized>(
    conn: &mut Connection,
    sim: &mut S,
    terminated: &mut bool,
) -> Result<()> {
    match conn.recv()? {
        Some(Frame::Hello { version, .. }) if version == PROTOCOL_VERSION => {}
        Some(Frame::Hello { version, .. }) => {
            let message = format!("protocol version mismatch: client {version}, server {PROTOCOL_VERSION}");
            // the client still needs our version to report the mismatch
            conn.send(&Frame::Hello {
                version: PROTOCOL_VERSION,
                id: sim.descriptor().id.clone(),
            })?;
            return Err(Error::Remote(message));
        }
        Some(other) => {
            conn.send(&Frame::Error {
                message: format!("expected HELLO, got {}", other.kind()),
            })?;
            return Err(Error::Protocol(format!("expected HELLO, got {}", other.kind())));
        }
        None => return Ok(()),
    }
    conn.send(&Frame::Hello {
        version: PROTOCOL_VERSION,
        id: sim.descriptor().id.clone(),
    })?;

    match conn.recv()? {
        Some(Frame::Init { .. }) => {}
        Some(Frame::Terminate) | None => return Ok(()),
        Some(other) => {
            conn.send(&Frame::Error {
                message: format!("expected INIT, got {}", other.kind()),
            })?;
            return Err(Error::Protocol(format!("expected INIT, got {}", other.kind())));
        }
    }
    conn.send(&Frame::Init {
        ports: port_decls(sim.descriptor()),
        params: BTreeMap::new(),
    })?;

    let mut initialized = false;
    loop {
        match conn.recv()? {
            Some(Frame::Step { t, dt, inputs }) => {
                if !initialized {
                    if let Err(e) = sim.initialize(t) {
                        conn.send(&Frame::Error { message: e.to_string() })?;
                        continue;
                    }
                    initialized = true;
                }
                match step_by_name(sim, t, dt, &inputs) {
                    Ok(outputs) => conn.send(&Frame::StepOk { t, outputs })?,
                    Err(e) => conn.send(&Frame::Error { message: e.to_string() })?,
                }
            }
            Some(Frame::Terminate) => {
                *terminated = true;
                sim.terminate()?;
                conn.send(&Frame::Terminate)?;
                return Ok(());
            }
            Some(other) => conn.send(&Frame::Error {
                message: format!("unexpected {} frame", other.kind()),
            })?,
            None => return Ok(()),
        }
    }
}

fn step_by_name<S: Simulator + ?Sized>(
    sim: &mut S,
    t: f64,
    dt: f64,
    inputs: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>> {
    let d = sim.descriptor();
    let values = d
        .inputs
        .iter()
        .map(|p| {
            inputs
                .get(&p.name)
                .copied()
                .ok_or_else(|| Error::Protocol(format!("STEP lacks input `{}`", p.name)))
        })
        .collect::<Result<Vec<_>>>()?;
    let names: Vec<String> = d.outputs.iter().map(|p| p.name.clone()).collect();
    let out = sim.step(t, dt, &values)?;
    Ok(names.into_iter().zip(out).collect())
}

/// Accepts sessions one after another, creating a fresh simulator for
/// each. Stops after `max_sessions` sessions when given. Session errors
/// are reported on stderr and do not stop the loop.
pub fn serve<F>(listener: &TcpListener, mut make: F, max_sessions: Option<usize>) -> Result<()>
where
    F: FnMut() -> Result<Box<dyn Simulator>>,
{
    let mut served = 0;
    while max_sessions.is_none_or(|m| served < m) {
        let (stream, _) = listener
            .accept()
            .map_err(|e| Error::Remote(format!("accept: {e}")))?;
        let mut sim = make()?;
        // a failed session must not take the server down
        if let Err(e) = serve_connection(stream, sim.as_mut()) {
            eprintln!("session {served} ended with an error: {e}");
        }
        served += 1;
    }
    Ok(())
}
