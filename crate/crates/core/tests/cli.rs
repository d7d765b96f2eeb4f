use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").canonicalize().unwrap()
}

fn dhcosim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhcosim")).args(args).output().unwrap()
}

/// The bundled district shortened to three January days.
fn short_district(dir: &Path) -> PathBuf {
    let text = std::fs::read_to_string(data_dir().join("district.toml")).unwrap();
    let data = data_dir();
    let text = text
        .replace("[simulation]", "[simulation]\nt_end_s = 259200.0")
        .replace("\"weather.csv\"", &format!("{:?}", data.join("weather.csv")))
        .replace("\"appliances.csv\"", &format!("{:?}", data.join("appliances.csv")))
        .replace("\"network.toml\"", &format!("{:?}", data.join("network.toml")));
    let path = dir.join("short.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = short_district(dir.path());
    let out = dir.path().join("out");
    let o = dhcosim(&["run", "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["resolved.toml", "grid.csv", "report.json", "report.txt", "buildings/sfh05_001.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let csv = std::fs::read_to_string(out.join("buildings/sfh07_002.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 96);
    assert!(csv.starts_with("time_s,T_air_C"));

    // the resolved file reproduces the run
    let again = dir.path().join("again");
    let o = dhcosim(&[
        "run",
        "--scenario",
        out.join("resolved.toml").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(out.join("grid.csv")).unwrap(),
        std::fs::read(again.join("grid.csv")).unwrap()
    );
}

#[test]
fn cosim_with_a_served_building_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = short_district(dir.path());
    let s = scenario.to_str().unwrap();

    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let addr = format!("127.0.0.1:{port}");
    let mut server = Command::new(env!("CARGO_BIN_EXE_dhcosim"))
        .args(["serve", "--scenario", s, "--sim", "sfh05_002", "--listen", &addr, "--sessions", "1"])
        .spawn()
        .unwrap();

    let local = dir.path().join("local");
    assert!(dhcosim(&["run", "--scenario", s, "--out", local.to_str().unwrap()]).status.success());

    let remote = dir.path().join("remote");
    let connect = format!("sfh05_002={addr}");
    let mut o = None;
    for _ in 0..50 {
        let r = dhcosim(&["cosim", "--scenario", s, "--out", remote.to_str().unwrap(), "--connect", &connect]);
        if r.status.success() {
            o = Some(r);
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(100));
    }
    assert!(o.is_some(), "cosim never connected");
    assert!(server.wait().unwrap().success());
    for f in ["grid.csv", "buildings/sfh05_002.csv"] {
        assert_eq!(std::fs::read(local.join(f)).unwrap(), std::fs::read(remote.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn protocol_dump_prints_the_golden_frames() {
    let o = dhcosim(&["protocol-dump"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert_eq!(text.lines().last(), Some("{\"type\":\"TERMINATE\"}"));
}

#[test]
fn bad_scenario_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[simulation]\ndt_comm_s = -1.0\n").unwrap();
    let o = dhcosim(&["run", "--scenario", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.toml"));
}

#[test]
fn connect_needs_id_and_address() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = short_district(dir.path());
    let o = dhcosim(&["cosim", "--scenario", scenario.to_str().unwrap(), "--connect", "nonsense"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("id=host:port"));
}
