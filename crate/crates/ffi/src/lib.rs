//! C interface to the dhcosim engine.
//!
//! Every object crosses the boundary as an opaque pointer owned by the
//! caller and released with its `_free` function. Fallible calls return a
//! [`DhcStatus`]; the message of the last failure on the calling thread is
//! available from [`dhc_last_error_message`].
//!
//! Pointer arguments must be null or valid for the documented use; the
//! callee checks for null but cannot check anything else.

// The contract of every function is stated in its first lines.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dhcosim::cosim::{RunLog, Simulator};
use dhcosim::district::{run_scenario, simulator_by_id};
use dhcosim::report::{build_report, emit_outputs};
use dhcosim::scenario::{load_scenario, Scenario};
use dhcosim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DhcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Numeric = 5,
    Protocol = 6,
    NotFound = 7,
    BufferTooSmall = 8,
    Panic = 9,
    Other = 10,
}

pub struct DhcScenario(Scenario);

pub struct DhcRunLog(RunLog);

pub struct DhcSimulator(Box<dyn Simulator>);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.into());
}

fn status_of(e: &Error) -> DhcStatus {
    match e {
        Error::InvalidParameter { .. } | Error::DegenerateNetwork { .. } => DhcStatus::InvalidArgument,
        Error::Config { .. } | Error::Topology(_) | Error::Ingestion { .. } => DhcStatus::Config,
        Error::Io { .. } => DhcStatus::Io,
        Error::Numeric(_) => DhcStatus::Numeric,
        Error::Protocol(_) | Error::Decode { .. } | Error::Remote(_) | Error::Timeout(_) => DhcStatus::Protocol,
        Error::Step { source, .. } => status_of(source),
        Error::Report(_) => DhcStatus::Other,
    }
}

fn fail(e: Error) -> DhcStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

/// Runs `f`, turning a panic into `DhcStatus::Panic` so it never unwinds into C.
fn guard(f: impl FnOnce() -> DhcStatus) -> DhcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {what}"));
            DhcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, DhcStatus> {
    if p.is_null() {
        set_error(format!("`{name}` is null"));
        return Err(DhcStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("`{name}` is not valid UTF-8"));
        DhcStatus::InvalidArgument
    })
}

macro_rules! non_null {
    ($p:expr, $name:literal) => {
        if $p.is_null() {
            set_error(concat!("`", $name, "` is null"));
            return DhcStatus::NullPointer;
        }
    };
}

macro_rules! try_arg {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Copies `s` with a trailing NUL into `buf` if it fits. Returns the
/// required size including the NUL.
unsafe fn copy_out(s: &str, buf: *mut c_char, cap: usize) -> usize {
    let needed = s.len() + 1;
    if !buf.is_null() && cap >= needed {
        ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
        *buf.add(s.len()) = 0;
    }
    needed
}

/// Copies the last error message of this thread into `buf` and returns
/// the size it needs, including the NUL. Pass a null buffer to query the
/// size. Returns 0 when no error has been recorded.
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn dhc_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if e.is_empty() {
            0
        } else {
            copy_out(&e, buf, cap)
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dhc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads and validates a scenario file.
/// `path` must be a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dhc_scenario_load(path: *const c_char, out: *mut *mut DhcScenario) -> DhcStatus {
    guard(|| {
        non_null!(out, "out");
        *out = ptr::null_mut();
        let path = try_arg!(str_arg(path, "path"));
        match load_scenario(Path::new(path)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(DhcScenario(s)));
                DhcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// `scenario` must be null or a pointer from `dhc_scenario_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dhc_scenario_free(scenario: *mut DhcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the whole scenario in-process.
/// `scenario` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dhc_run(scenario: *const DhcScenario, out: *mut *mut DhcRunLog) -> DhcStatus {
    guard(|| {
        non_null!(scenario, "scenario");
        non_null!(out, "out");
        *out = ptr::null_mut();
        match run_scenario(&(*scenario).0) {
            Ok(log) => {
                *out = Box::into_raw(Box::new(DhcRunLog(log)));
                DhcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// `log` must be null or a pointer from `dhc_run` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dhc_run_log_free(log: *mut DhcRunLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

/// Number of communication steps in the log; 0 for a null handle.
/// `log` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dhc_run_log_len(log: *const DhcRunLog) -> usize {
    if log.is_null() {
        0
    } else {
        (*log).0.len()
    }
}

/// Copies the series of `sim.port` into `buf`. `out_len` receives the
/// series length; if it exceeds `cap` nothing is copied and
/// `DHC_STATUS_BUFFER_TOO_SMALL` is returned.
/// Strings must be NUL-terminated, `buf` valid for `cap` doubles and
/// `out_len` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dhc_run_log_series(
    log: *const DhcRunLog,
    sim: *const c_char,
    port: *const c_char,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> DhcStatus {
    guard(|| {
        non_null!(log, "log");
        non_null!(out_len, "out_len");
        let sim = try_arg!(str_arg(sim, "sim"));
        let port = try_arg!(str_arg(port, "port"));
        let Some(series) = (*log).0.series(sim, port) else {
            set_error(format!("no port `{sim}.{port}` in the log"));
            return DhcStatus::NotFound;
        };
        *out_len = series.len();
        if series.len() > cap {
            set_error(format!("series has {} values, buffer holds {cap}", series.len()));
            return DhcStatus::BufferTooSmall;
        }
        if !series.is_empty() {
            non_null!(buf, "buf");
            ptr::copy_nonoverlapping(series.as_ptr(), buf, series.len());
        }
        DhcStatus::Ok
    })
}

/// Writes the per-building and grid CSV files and the report into `out_dir`.
/// `log` must be a live handle and `out_dir` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dhc_run_log_write(log: *const DhcRunLog, out_dir: *const c_char) -> DhcStatus {
    guard(|| {
        non_null!(log, "log");
        let dir = try_arg!(str_arg(out_dir, "out_dir"));
        let log = &(*log).0;
        let full_year = (log.len() as f64 * log.dt - dhcosim::units::SECONDS_PER_YEAR).abs() < 1e-6;
        match build_report(log, &[], full_year).and_then(|r| emit_outputs(log, &r, Path::new(dir))) {
            Ok(()) => DhcStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Creates one simulator of the scenario (a building or the grid) for
/// stepping from C.
/// `scenario` must be a live handle, `id` NUL-terminated and `out` valid
/// for a write.
#[no_mangle]
pub unsafe extern "C" fn dhc_simulator_new(
    scenario: *const DhcScenario,
    id: *const c_char,
    out: *mut *mut DhcSimulator,
) -> DhcStatus {
    guard(|| {
        non_null!(scenario, "scenario");
        non_null!(out, "out");
        *out = ptr::null_mut();
        let id = try_arg!(str_arg(id, "id"));
        match simulator_by_id(&(*scenario).0, id) {
            Ok(Some(sim)) => {
                *out = Box::into_raw(Box::new(DhcSimulator(sim)));
                DhcStatus::Ok
            }
            Ok(None) => {
                set_error(format!("scenario has no simulator `{id}`"));
                DhcStatus::NotFound
            }
            Err(e) => fail(e),
        }
    })
}

/// `sim` must be null or a pointer from `dhc_simulator_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dhc_simulator_free(sim: *mut DhcSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of input (`is_output == 0`) or output ports.
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dhc_simulator_port_count(sim: *const DhcSimulator, is_output: i32) -> usize {
    if sim.is_null() {
        return 0;
    }
    let d = (*sim).0.descriptor();
    if is_output != 0 {
        d.outputs.len()
    } else {
        d.inputs.len()
    }
}

/// Copies the name of port `index` into `buf`; `needed` receives the size
/// including the NUL.
/// `sim` must be a live handle, `buf` null or valid for `cap` bytes and
/// `needed` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dhc_simulator_port_name(
    sim: *const DhcSimulator,
    is_output: i32,
    index: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> DhcStatus {
    guard(|| {
        non_null!(sim, "sim");
        non_null!(needed, "needed");
        let d = (*sim).0.descriptor();
        let ports = if is_output != 0 { &d.outputs } else { &d.inputs };
        let Some(p) = ports.get(index) else {
            set_error(format!("port index {index} out of range ({} ports)", ports.len()));
            return DhcStatus::InvalidArgument;
        };
        *needed = copy_out(&p.name, buf, cap);
        if *needed > cap {
            set_error("name buffer too small");
            return DhcStatus::BufferTooSmall;
        }
        DhcStatus::Ok
    })
}

/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dhc_simulator_initialize(sim: *mut DhcSimulator, t0: f64) -> DhcStatus {
    guard(|| {
        non_null!(sim, "sim");
        match (*sim).0.initialize(t0) {
            Ok(()) => DhcStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Advances over `[t, t + dt]`. Inputs and outputs follow the port order;
/// their counts must match the port counts exactly.
/// `sim` must be a live handle, `inputs` valid for `n_inputs` doubles and
/// `outputs` valid for `n_outputs` doubles.
#[no_mangle]
pub unsafe extern "C" fn dhc_simulator_step(
    sim: *mut DhcSimulator,
    t: f64,
    dt: f64,
    inputs: *const f64,
    n_inputs: usize,
    outputs: *mut f64,
    n_outputs: usize,
) -> DhcStatus {
    guard(|| {
        non_null!(sim, "sim");
        let s = &mut (*sim).0;
        let (n_in, n_out) = (s.descriptor().inputs.len(), s.descriptor().outputs.len());
        if n_inputs != n_in || n_outputs != n_out {
            set_error(format!(
                "expected {n_in} inputs and {n_out} outputs, got {n_inputs} and {n_outputs}"
            ));
            return DhcStatus::InvalidArgument;
        }
        let values: &[f64] = if n_in == 0 {
            &[]
        } else {
            non_null!(inputs, "inputs");
            std::slice::from_raw_parts(inputs, n_in)
        };
        match s.step(t, dt, values) {
            Ok(v) => {
                if n_out > 0 {
                    non_null!(outputs, "outputs");
                    ptr::copy_nonoverlapping(v.as_ptr(), outputs, n_out);
                }
                DhcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
