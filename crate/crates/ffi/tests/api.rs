use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use dhcosim_ffi::*;

fn data(name: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe {
        let n = dhc_last_error_message(ptr::null_mut(), 0);
        let mut buf = vec![0 as c_char; n];
        dhc_last_error_message(buf.as_mut_ptr(), n);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

/// A one-building scenario over two days, written next to the data files.
fn short_scenario(dir: &std::path::Path) -> CString {
    let weather = data("weather.csv");
    let text = format!(
        "[simulation]\nt_end_s = 172800.0\n[files]\nweather = {:?}\n[[buildings]]\nid = \"b\"\nfloor_area_m2 = 60.0\nsurfaces = [{{ kind = \"wall\", area_m2 = 120.0, u_value = 0.5 }}]\n",
        weather.to_str().unwrap()
    );
    let p = dir.join("s.toml");
    std::fs::write(&p, text).unwrap();
    CString::new(p.to_str().unwrap()).unwrap()
}

#[test]
fn load_run_and_read_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = short_scenario(dir.path());
    unsafe {
        let mut sc = ptr::null_mut();
        assert_eq!(dhc_scenario_load(path.as_ptr(), &mut sc), DhcStatus::Ok);
        let mut log = ptr::null_mut();
        assert_eq!(dhc_run(sc, &mut log), DhcStatus::Ok);
        assert_eq!(dhc_run_log_len(log), 192);

        let (b, port) = (CString::new("b").unwrap(), CString::new("T_air").unwrap());
        let mut n = 0usize;
        assert_eq!(
            dhc_run_log_series(log, b.as_ptr(), port.as_ptr(), ptr::null_mut(), 0, &mut n),
            DhcStatus::BufferTooSmall
        );
        assert_eq!(n, 192);
        let mut buf = vec![0.0; n];
        assert_eq!(dhc_run_log_series(log, b.as_ptr(), port.as_ptr(), buf.as_mut_ptr(), n, &mut n), DhcStatus::Ok);
        assert!(buf.iter().all(|t| (250.0..330.0).contains(t)));

        let missing = CString::new("nope").unwrap();
        assert_eq!(
            dhc_run_log_series(log, b.as_ptr(), missing.as_ptr(), buf.as_mut_ptr(), n, &mut n),
            DhcStatus::NotFound
        );
        assert!(last_error().contains("b.nope"));

        let out = CString::new(dir.path().join("out").to_str().unwrap()).unwrap();
        assert_eq!(dhc_run_log_write(log, out.as_ptr()), DhcStatus::Ok);
        assert!(dir.path().join("out/buildings/b.csv").is_file());

        dhc_run_log_free(log);
        dhc_scenario_free(sc);
    }
}

#[test]
fn step_a_building_from_outside() {
    let dir = tempfile::tempdir().unwrap();
    let path = short_scenario(dir.path());
    unsafe {
        let mut sc = ptr::null_mut();
        assert_eq!(dhc_scenario_load(path.as_ptr(), &mut sc), DhcStatus::Ok);
        let id = CString::new("b").unwrap();
        let mut sim = ptr::null_mut();
        assert_eq!(dhc_simulator_new(sc, id.as_ptr(), &mut sim), DhcStatus::Ok);
        let n_in = dhc_simulator_port_count(sim, 0);
        let n_out = dhc_simulator_port_count(sim, 1);
        assert_eq!(n_in, 3);

        let mut needed = 0;
        let mut name = [0 as c_char; 32];
        assert_eq!(dhc_simulator_port_name(sim, 0, 0, name.as_mut_ptr(), 32, &mut needed), DhcStatus::Ok);
        assert_eq!(CStr::from_ptr(name.as_ptr()).to_str().unwrap(), "T_sup");
        assert_eq!(dhc_simulator_port_name(sim, 0, 0, name.as_mut_ptr(), 3, &mut needed), DhcStatus::BufferTooSmall);
        assert_eq!(needed, 6);
        assert_eq!(dhc_simulator_port_name(sim, 1, 99, name.as_mut_ptr(), 32, &mut needed), DhcStatus::InvalidArgument);

        assert_eq!(dhc_simulator_initialize(sim, 0.0), DhcStatus::Ok);
        let inputs = [353.15, 0.0, 343.15];
        let mut outputs = vec![0.0; n_out];
        assert_eq!(
            dhc_simulator_step(sim, 0.0, 900.0, inputs.as_ptr(), 3, outputs.as_mut_ptr(), n_out),
            DhcStatus::Ok
        );
        assert!(outputs[0] > 300.0, "buffer temperature in K");
        assert_eq!(
            dhc_simulator_step(sim, 900.0, 900.0, inputs.as_ptr(), 2, outputs.as_mut_ptr(), n_out),
            DhcStatus::InvalidArgument
        );
        dhc_simulator_free(sim);

        let ghost = CString::new("ghost").unwrap();
        assert_eq!(dhc_simulator_new(sc, ghost.as_ptr(), &mut sim), DhcStatus::NotFound);
        assert!(sim.is_null());
        dhc_scenario_free(sc);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut sc = ptr::null_mut();
        assert_eq!(dhc_scenario_load(ptr::null(), &mut sc), DhcStatus::NullPointer);
        assert!(last_error().contains("path"));
        let missing = CString::new("/nonexistent/scenario.toml").unwrap();
        assert_eq!(dhc_scenario_load(missing.as_ptr(), &mut sc), DhcStatus::Io);
        assert!(sc.is_null());
        assert!(last_error().contains("/nonexistent/scenario.toml"));
        assert_eq!(dhc_run(ptr::null(), ptr::null_mut()), DhcStatus::NullPointer);
        assert_eq!(dhc_run_log_len(ptr::null()), 0);
        dhc_scenario_free(ptr::null_mut());
        dhc_run_log_free(ptr::null_mut());
        dhc_simulator_free(ptr::null_mut());
        assert!(!CStr::from_ptr(dhc_version()).to_bytes().is_empty());
    }
}
