//! Fixed-step co-simulation master with a uniform one-step delay on every
//! coupling edge.
//!
//! At communication point `t_k` every simulator receives the outputs its
//! producers reported for `[t_{k-1}, t_k]` (port defaults at `k = 0`) and
//! advances over `[t_k, t_k + dt]`. Because no input depends on an output
//! of the same interval, simulators within one step are independent and
//! may run in any order or concurrently.

pub mod protocol;
pub mod remote;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortSpec {
    pub name: String,
    pub unit: String,
    /// Value delivered before the first exchange. Ignored for outputs.
    #[serde(default)]
    pub default: f64,
}

impl PortSpec {
    pub fn new(name: impl Into<String>, unit: impl Into<String>, default: f64) -> Self {
        PortSpec {
            name: name.into(),
            unit: unit.into(),
            default,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    InProcess,
    Remote(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorDescriptor {
    pub id: String,
    pub inputs: Vec<PortSpec>,
    pub outputs: Vec<PortSpec>,
    pub location: Location,
}

impl SimulatorDescriptor {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains('.') || self.id.contains(char::is_whitespace) {
            return Err(Error::Protocol(format!(
                "simulator id `{}` must be non-empty without dots or whitespace",
                self.id
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in self.inputs.iter().chain(&self.outputs) {
            if !seen.insert(p.name.as_str()) {
                return Err(Error::Protocol(format!(
                    "simulator `{}`: duplicate port `{}`",
                    self.id, p.name
                )));
            }
            if !p.default.is_finite() {
                return Err(Error::Protocol(format!(
                    "simulator `{}`: port `{}` has a non-finite default",
                    self.id, p.name
                )));
            }
        }
        Ok(())
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|p| p.name == name)
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.outputs.iter().position(|p| p.name == name)
    }

    pub fn input_defaults(&self) -> Vec<f64> {
        self.inputs.iter().map(|p| p.default).collect()
    }
}

/// Uniform interface of everything the master can drive.
pub trait Simulator: Send {
    fn descriptor(&self) -> &SimulatorDescriptor;

    fn initialize(&mut self, _t0: f64) -> Result<()> {
        Ok(())
    }

    /// Advances over `[t, t + dt]`. `inputs` follow the descriptor's input
    /// order; the result must follow its output order.
    fn step(&mut self, t: f64, dt: f64, inputs: &[f64]) -> Result<Vec<f64>>;

    fn terminate(&mut self) -> Result<()> {
        Ok(())
    }
}

impl<S: Simulator + ?Sized> Simulator for Box<S> {
    fn descriptor(&self) -> &SimulatorDescriptor {
        (**self).descriptor()
    }
    fn initialize(&mut self, t0: f64) -> Result<()> {
        (**self).initialize(t0)
    }
    fn step(&mut self, t: f64, dt: f64, inputs: &[f64]) -> Result<Vec<f64>> {
        (**self).step(t, dt, inputs)
    }
    fn terminate(&mut self) -> Result<()> {
        (**self).terminate()
    }
}

/// `simulator.port`. Simulator ids never contain dots, port names may.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PortRef {
    pub sim: String,
    pub port: String,
}

impl PortRef {
    pub fn new(sim: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef {
            sim: sim.into(),
            port: port.into(),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.sim, self.port)
    }
}

impl FromStr for PortRef {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('.') {
            Some((sim, port)) if !sim.is_empty() && !port.is_empty() => Ok(PortRef::new(sim, port)),
            _ => Err(Error::Protocol(format!("`{s}` is not of the form simulator.port"))),
        }
    }
}

impl TryFrom<String> for PortRef {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PortRef> for String {
    fn from(p: PortRef) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: PortRef,
    pub to: PortRef,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    #[serde(default)]
    pub edges: Vec<Edge>,
}

impl Coupling {
    pub fn connect(&mut self, from: PortRef, to: PortRef) {
        self.edges.push(Edge { from, to });
    }
}

/// Values of all ports at one communication point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PortFrame {
    pub time: f64,
    pub values: BTreeMap<PortRef, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum InputSource {
    Default(f64),
    Output { sim: usize, port: usize },
}

/// Coupling resolved against a set of descriptors.
#[derive(Debug, Clone)]
struct Plan {
    sources: Vec<Vec<InputSource>>,
}

fn resolve(descriptors: &[&SimulatorDescriptor], coupling: &Coupling) -> Result<Plan> {
    let mut by_id = HashMap::new();
    for (i, d) in descriptors.iter().enumerate() {
        d.validate()?;
        if by_id.insert(d.id.as_str(), i).is_some() {
            return Err(Error::Protocol(format!("duplicate simulator id `{}`", d.id)));
        }
    }
    let mut sources: Vec<Vec<InputSource>> = descriptors
        .iter()
        .map(|d| d.inputs.iter().map(|p| InputSource::Default(p.default)).collect())
        .collect();
    let mut fed = vec![Vec::new(); descriptors.len()];
    for (i, d) in descriptors.iter().enumerate() {
        fed[i] = vec![false; d.inputs.len()];
    }
    for e in &coupling.edges {
        let &ps = by_id
            .get(e.from.sim.as_str())
            .ok_or_else(|| Error::Protocol(format!("edge from unknown simulator in `{}`", e.from)))?;
        let &cs = by_id
            .get(e.to.sim.as_str())
            .ok_or_else(|| Error::Protocol(format!("edge to unknown simulator in `{}`", e.to)))?;
        let pp = descriptors[ps]
            .output_index(&e.from.port)
            .ok_or_else(|| Error::Protocol(format!("`{}` is not an output port", e.from)))?;
        let cp = descriptors[cs]
            .input_index(&e.to.port)
            .ok_or_else(|| Error::Protocol(format!("`{}` is not an input port", e.to)))?;
        if fed[cs][cp] {
            return Err(Error::Protocol(format!("input `{}` has more than one producer", e.to)));
        }
        fed[cs][cp] = true;
        sources[cs][cp] = InputSource::Output { sim: ps, port: pp };
    }
    Ok(Plan { sources })
}

impl Plan {
    fn inputs_from(&self, outputs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.sources
            .iter()
            .map(|srcs| {
                srcs.iter()
                    .map(|s| match *s {
                        InputSource::Output { sim, port } => outputs[sim][port],
                        InputSource::Default(v) => v,
                    })
                    .collect()
            })
            .collect()
    }

    fn first_inputs(&self, descriptors: &[SimulatorDescriptor]) -> Vec<Vec<f64>> {
        descriptors.iter().map(|d| d.input_defaults()).collect()
    }
}

/// Input values for every simulator given the previous frame's outputs.
/// `previous = None` means the first communication point, where every input
/// takes its default. The result is ordered like `descriptors`.
pub fn exchange(
    previous: Option<&PortFrame>,
    coupling: &Coupling,
    descriptors: &[&SimulatorDescriptor],
) -> Result<Vec<Vec<f64>>> {
    let plan = resolve(descriptors, coupling)?;
    let mut result = Vec::with_capacity(descriptors.len());
    for (d, srcs) in descriptors.iter().zip(&plan.sources) {
        let mut values = Vec::with_capacity(srcs.len());
        for (p, s) in d.inputs.iter().zip(srcs) {
            let v = match (s, previous) {
                (InputSource::Default(v), _) => *v,
                (InputSource::Output { .. }, None) => p.default,
                (InputSource::Output { sim, port }, Some(frame)) => {
                    let producer = PortRef::new(&descriptors[*sim].id, &descriptors[*sim].outputs[*port].name);
                    *frame.values.get(&producer).ok_or_else(|| {
                        Error::Protocol(format!("frame at t = {} lacks `{producer}`", frame.time))
                    })?
                }
            };
            values.push(v);
        }
        result.push(values);
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub port: PortRef,
    pub direction: Direction,
}

/// Column-oriented record of a run. Row `k` holds the inputs delivered at
/// `times[k]` and the outputs produced over `[times[k], times[k] + dt]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub dt: f64,
    columns: Vec<Column>,
    index: BTreeMap<PortRef, usize>,
    times: Vec<f64>,
    data: Vec<f64>,
}

impl RunLog {
    pub fn new(dt: f64, columns: Vec<Column>) -> Self {
        let index = columns
            .iter()
            .enumerate()
            .map(|(i, c)| (c.port.clone(), i))
            .collect();
        RunLog {
            dt,
            columns,
            index,
            times: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn push_row(&mut self, time: f64, row: &[f64]) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.times.push(time);
        self.data.extend_from_slice(row);
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column_index(&self, port: &PortRef) -> Option<usize> {
        self.index.get(port).copied()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.columns.len();
        &self.data[k * w..(k + 1) * w]
    }

    /// Time series of one port, or `None` if it was not logged.
    pub fn series(&self, sim: &str, port: &str) -> Option<Vec<f64>> {
        let c = self.column_index(&PortRef::new(sim, port))?;
        let w = self.columns.len();
        Some(self.data.iter().skip(c).step_by(w.max(1)).copied().collect())
    }

    pub fn frame(&self, k: usize) -> PortFrame {
        PortFrame {
            time: self.times[k],
            values: self
                .columns
                .iter()
                .zip(self.row(k))
                .map(|(c, v)| (c.port.clone(), *v))
                .collect(),
        }
    }

    /// Largest absolute difference between two logs with identical shape,
    /// `None` if the shapes differ.
    pub fn max_abs_diff(&self, other: &RunLog) -> Option<f64> {
        if self.columns != other.columns || self.times != other.times {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
                .fold(0.0, f64::max),
        )
    }

    /// Bitwise equality of every logged value.
    pub fn bitwise_eq(&self, other: &RunLog) -> bool {
        self.columns == other.columns
            && self.times.len() == other.times.len()
            && self.times.iter().zip(&other.times).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.data.len() == other.data.len()
            && self.data.iter().zip(&other.data).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    /// Step simulators in the given permutation of their indices.
    Order(Vec<usize>),
    /// One worker thread per simulator, synchronized at every exchange.
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterConfig {
    pub t0: f64,
    pub t_end: f64,
    pub dt_comm: f64,
    pub execution: Execution,
}

impl MasterConfig {
    pub fn new(t0: f64, t_end: f64, dt_comm: f64) -> Self {
        MasterConfig {
            t0,
            t_end,
            dt_comm,
            execution: Execution::Sequential,
        }
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.dt_comm > 0.0 && self.dt_comm.is_finite()) {
            return Err(Error::invalid("dt_comm", "must be > 0"));
        }
        if !(self.t_end > self.t0) {
            return Err(Error::invalid("t_end", "must exceed t0"));
        }
        let n = (self.t_end - self.t0) / self.dt_comm;
        let rounded = n.round();
        if (n - rounded).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::invalid(
                "dt_comm",
                "the horizon must be a whole number of communication steps",
            ));
        }
        Ok(rounded as usize)
    }
}

fn step_error(step: usize, time: f64, simulator: &str, source: Error) -> Error {
    Error::Step {
        step,
        time,
        simulator: simulator.to_string(),
        source: Box::new(source),
    }
}

/// Runs the co-simulation to completion. Every simulator is terminated
/// before returning, on success and on abort.
pub fn master_run(
    sims: &mut [Box<dyn Simulator>],
    coupling: &Coupling,
    config: &MasterConfig,
) -> Result<RunLog> {
    let n_steps = config.steps()?;
    let descriptors: Vec<SimulatorDescriptor> = sims.iter().map(|s| s.descriptor().clone()).collect();
    let refs: Vec<&SimulatorDescriptor> = descriptors.iter().collect();
    let plan = match resolve(&refs, coupling) {
        Ok(p) => p,
        Err(e) => {
            terminate_all(sims);
            return Err(e);
        }
    };

    let mut columns = Vec::new();
    for d in &descriptors {
        for p in &d.inputs {
            columns.push(Column {
                port: PortRef::new(&d.id, &p.name),
                direction: Direction::In,
            });
        }
        for p in &d.outputs {
            columns.push(Column {
                port: PortRef::new(&d.id, &p.name),
                direction: Direction::Out,
            });
        }
    }
    let mut log = RunLog::new(config.dt_comm, columns);

    let order: Vec<usize> = match &config.execution {
        Execution::Order(o) => {
            let mut sorted = o.clone();
            sorted.sort_unstable();
            if sorted != (0..sims.len()).collect::<Vec<_>>() {
                terminate_all(sims);
                return Err(Error::invalid("execution", "order must be a permutation of the simulators"));
            }
            o.clone()
        }
        _ => (0..sims.len()).collect(),
    };

    for (i, sim) in sims.iter_mut().enumerate() {
        if let Err(e) = sim.initialize(config.t0) {
            let e = step_error(0, config.t0, &descriptors[i].id, e);
            terminate_all(sims);
            return Err(e);
        }
    }

    let result = if config.execution == Execution::Parallel {
        run_parallel(sims, &descriptors, &plan, config, n_steps, &mut log)
    } else {
        run_ordered(sims, &descriptors, &plan, config, n_steps, &order, &mut log)
    };

    match result {
        Ok(()) => {
            let mut first_err = None;
            for (i, sim) in sims.iter_mut().enumerate() {
                if let Err(e) = sim.terminate() {
                    first_err.get_or_insert(step_error(n_steps, config.t_end, &descriptors[i].id, e));
                }
            }
            match first_err {
                Some(e) => Err(e),
                None => Ok(log),
            }
        }
        Err(e) => {
            terminate_all(sims);
            Err(e)
        }
    }
}

fn terminate_all(sims: &mut [Box<dyn Simulator>]) {
    for sim in sims.iter_mut() {
        let _ = sim.terminate();
    }
}

fn check_outputs(d: &SimulatorDescriptor, out: &[f64]) -> Result<()> {
    if out.len() != d.outputs.len() {
        return Err(Error::Protocol(format!(
            "expected {} outputs, got {}",
            d.outputs.len(),
            out.len()
        )));
    }
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(d.outputs[i].name.clone()));
    }
    Ok(())
}

fn record(log: &mut RunLog, t: f64, inputs: &[Vec<f64>], outputs: &[Vec<f64>], row: &mut Vec<f64>) {
    row.clear();
    for (i, o) in inputs.iter().zip(outputs) {
        row.extend_from_slice(i);
        row.extend_from_slice(o);
    }
    log.push_row(t, row);
}

fn time_at(config: &MasterConfig, k: usize) -> f64 {
    config.t0 + k as f64 * config.dt_comm
}

fn run_ordered(
    sims: &mut [Box<dyn Simulator>],
    descriptors: &[SimulatorDescriptor],
    plan: &Plan,
    config: &MasterConfig,
    n_steps: usize,
    order: &[usize],
    log: &mut RunLog,
) -> Result<()> {
    let mut outputs: Option<Vec<Vec<f64>>> = None;
    let mut row = Vec::new();
    for k in 0..n_steps {
        let t = time_at(config, k);
        let inputs = match &outputs {
                Some(o) => plan.inputs_from(o),
                None => plan.first_inputs(descriptors),
            };
        let mut next = vec![Vec::new(); sims.len()];
        for &i in order {
            let out = sims[i]
                .step(t, config.dt_comm, &inputs[i])
                .and_then(|o| check_outputs(&descriptors[i], &o).map(|_| o))
                .map_err(|e| step_error(k, t, &descriptors[i].id, e))?;
            next[i] = out;
        }
        record(log, t, &inputs, &next, &mut row);
        outputs = Some(next);
    }
    Ok(())
}

fn run_parallel(
    sims: &mut [Box<dyn Simulator>],
    descriptors: &[SimulatorDescriptor],
    plan: &Plan,
    config: &MasterConfig,
    n_steps: usize,
    log: &mut RunLog,
) -> Result<()> {
    std::thread::scope(|scope| {
        let mut requests = Vec::new();
        let mut replies = Vec::new();
        for sim in sims.iter_mut() {
            let (req_tx, req_rx) = mpsc::channel::<(f64, Vec<f64>)>();
            let (rep_tx, rep_rx) = mpsc::channel::<Result<Vec<f64>>>();
            let dt = config.dt_comm;
            scope.spawn(move || {
                for (t, inputs) in req_rx {
                    if rep_tx.send(sim.step(t, dt, &inputs)).is_err() {
                        break;
                    }
                }
            });
            requests.push(req_tx);
            replies.push(rep_rx);
        }

        let mut outputs: Option<Vec<Vec<f64>>> = None;
        let mut row = Vec::new();
        for k in 0..n_steps {
            let t = time_at(config, k);
            let inputs = match &outputs {
                Some(o) => plan.inputs_from(o),
                None => plan.first_inputs(descriptors),
            };
            for (tx, inp) in requests.iter().zip(&inputs) {
                tx.send((t, inp.clone()))
                    .map_err(|_| Error::Protocol("worker thread exited".into()))?;
            }
            let mut next = Vec::with_capacity(replies.len());
            let mut failure = None;
            for (i, rx) in replies.iter().enumerate() {
                let res = rx
                    .recv()
                    .map_err(|_| Error::Protocol("worker thread exited".into()))
                    .and_then(|r| r)
                    .and_then(|o| check_outputs(&descriptors[i], &o).map(|_| o));
                match res {
                    Ok(o) => next.push(o),
                    Err(e) => {
                        failure.get_or_insert(step_error(k, t, &descriptors[i].id, e));
                        next.push(Vec::new());
                    }
                }
            }
            if let Some(e) = failure {
                return Err(e);
            }
            record(log, t, &inputs, &next, &mut row);
            outputs = Some(next);
        }
        Ok(())
        // Dropping the request senders ends the workers before the scope joins.
    })
}
