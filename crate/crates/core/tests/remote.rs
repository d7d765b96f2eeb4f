use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::Duration;

use dhcosim::cosim::protocol::{decode_message, encode_message, Frame};
use dhcosim::cosim::remote::{serve, serve_connection, RemoteSimulator};
use dhcosim::cosim::{master_run, Coupling, Location, MasterConfig, PortSpec, Simulator, SimulatorDescriptor};
use dhcosim::{Error, Result};

/// y = 2·x + t, failing at `fail_at`.
struct Doubler {
    d: SimulatorDescriptor,
    fail_at: Option<f64>,
}

impl Doubler {
    fn new(id: &str, fail_at: Option<f64>) -> Self {
        Doubler {
            d: SimulatorDescriptor {
                id: id.into(),
                inputs: vec![PortSpec::new("x", "-", 0.5)],
                outputs: vec![PortSpec::new("y", "-", 0.0)],
                location: Location::InProcess,
            },
            fail_at,
        }
    }
}

impl Simulator for Doubler {
    fn descriptor(&self) -> &SimulatorDescriptor {
        &self.d
    }
    fn step(&mut self, t: f64, _dt: f64, inputs: &[f64]) -> Result<Vec<f64>> {
        if self.fail_at == Some(t) {
            return Err(Error::Numeric("y".into()));
        }
        Ok(vec![2.0 * inputs[0] + t / 3.0])
    }
}

fn spawn_server(id: &'static str, fail_at: Option<f64>, sessions: usize) -> (String, thread::JoinHandle<Result<()>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let handle = thread::spawn(move || {
        serve(&listener, || Ok(Box::new(Doubler::new(id, fail_at)) as Box<dyn Simulator>), Some(sessions))
    });
    (addr, handle)
}

fn chain() -> Coupling {
    let mut c = Coupling::default();
    c.connect("A.y".parse().unwrap(), "B.x".parse().unwrap());
    c.connect("B.y".parse().unwrap(), "A.x".parse().unwrap());
    c
}

#[test]
fn loopback_matches_in_process() {
    let cfg = MasterConfig::new(0.0, 200.0, 1.0);
    let mut local: Vec<Box<dyn Simulator>> = vec![Box::new(Doubler::new("A", None)), Box::new(Doubler::new("B", None))];
    let expected = master_run(&mut local, &chain(), &cfg).unwrap();

    let (addr, server) = spawn_server("B", None, 1);
    let remote = RemoteSimulator::connect(&addr, Duration::from_secs(5)).unwrap();
    assert_eq!(remote.descriptor().id, "B");
    let mut mixed: Vec<Box<dyn Simulator>> = vec![Box::new(Doubler::new("A", None)), Box::new(remote)];
    let got = master_run(&mut mixed, &chain(), &cfg).unwrap();
    drop(mixed);
    server.join().unwrap().unwrap();
    assert!(expected.bitwise_eq(&got));
}

#[test]
fn remote_failure_names_step_and_simulator() {
    let (addr, server) = spawn_server("B", Some(3.0), 1);
    let remote = RemoteSimulator::connect(&addr, Duration::from_secs(5)).unwrap();
    let mut sims: Vec<Box<dyn Simulator>> = vec![Box::new(Doubler::new("A", None)), Box::new(remote)];
    match master_run(&mut sims, &chain(), &MasterConfig::new(0.0, 10.0, 1.0)) {
        Err(Error::Step { step, simulator, source, .. }) => {
            assert_eq!((step, simulator.as_str()), (3, "B"));
            assert!(matches!(*source, Error::Remote(_)), "{source:?}");
        }
        other => panic!("{other:?}"),
    }
    drop(sims);
    server.join().unwrap().unwrap();
}

#[test]
fn server_survives_a_failed_session() {
    let (addr, server) = spawn_server("B", None, 2);
    {
        // speak nonsense, then hang up
        let mut s = TcpStream::connect(&addr).unwrap();
        s.write_all(b"{\"type\":\"STEP\"}\n").unwrap();
        let mut line = String::new();
        BufReader::new(&s).read_line(&mut line).unwrap();
        assert!(matches!(decode_message(line.as_bytes()).unwrap(), Frame::Error { .. }));
    }
    let mut remote = RemoteSimulator::connect(&addr, Duration::from_secs(5)).unwrap();
    assert_eq!(remote.step(0.0, 1.0, &[1.0]).unwrap(), vec![2.0]);
    remote.terminate().unwrap();
    server.join().unwrap().unwrap();
}

#[test]
fn silent_peer_times_out() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let peer = thread::spawn(move || {
        let (s, _) = listener.accept().unwrap();
        thread::sleep(Duration::from_millis(800));
        drop(s);
    });
    let err = RemoteSimulator::connect(&addr, Duration::from_millis(150)).err().expect("no HELLO arrives");
    assert!(matches!(err, Error::Timeout(_)), "{err:?}");
    peer.join().unwrap();
}

#[test]
fn refused_connection_is_an_error() {
    let addr = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().to_string()
    };
    assert!(RemoteSimulator::connect(&addr, Duration::from_millis(200)).is_err());
}

#[test]
fn version_mismatch_reported_by_server() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = thread::spawn(move || {
        let (s, _) = listener.accept().unwrap();
        let mut sim = Doubler::new("B", None);
        serve_connection(s, &mut sim)
    });
    let mut s = TcpStream::connect(addr).unwrap();
    s.write_all(&encode_message(&Frame::Hello { version: 99, id: "m".into() }).unwrap()).unwrap();
    let mut line = String::new();
    BufReader::new(&s).read_line(&mut line).unwrap();
    assert!(matches!(decode_message(line.as_bytes()).unwrap(), Frame::Hello { version: 1, .. }));
    assert!(server.join().unwrap().is_err());
}
