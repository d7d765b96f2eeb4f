//! Newline-delimited JSON frames exchanged with remote simulators.
//!
//! Encoding is canonical: one JSON object per line, no whitespace, object
//! keys in byte order, numbers in shortest round-trip form. Decoding ignores
//! fields it does not know.

use std::collections::BTreeMap;

use serde_json::{Map, Number, Value};

use super::Direction;
use crate::error::{Error, Result};

pub const PROTOCOL_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct PortDecl {
    pub name: String,
    pub dir: Direction,
    pub unit: String,
    pub default: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Hello {
        version: u64,
        id: String,
    },
    Init {
        ports: Vec<PortDecl>,
        params: BTreeMap<String, f64>,
    },
    Step {
        t: f64,
        dt: f64,
        inputs: BTreeMap<String, f64>,
    },
    StepOk {
        t: f64,
        outputs: BTreeMap<String, f64>,
    },
    Error {
        message: String,
    },
    Terminate,
}

impl Frame {
    pub fn kind(&self) -> &'static str {
        match self {
            Frame::Hello { .. } => "HELLO",
            Frame::Init { .. } => "INIT",
            Frame::Step { .. } => "STEP",
            Frame::StepOk { .. } => "STEP_OK",
            Frame::Error { .. } => "ERROR",
            Frame::Terminate => "TERMINATE",
        }
    }
}

fn number(field: &str, v: f64) -> Result<Value> {
    Number::from_f64(v)
        .map(Value::Number)
        .ok_or_else(|| Error::Protocol(format!("cannot encode non-finite `{field}` = {v}")))
}

fn number_map(field: &str, m: &BTreeMap<String, f64>) -> Result<Value> {
    let mut out = Map::new();
    for (k, &v) in m {
        out.insert(k.clone(), number(&format!("{field}.{k}"), v)?);
    }
    Ok(Value::Object(out))
}

/// Canonical bytes of one frame, including the trailing newline.
pub fn encode_message(frame: &Frame) -> Result<Vec<u8>> {
    let mut obj = Map::new();
    obj.insert("type".into(), Value::String(frame.kind().into()));
    match frame {
        Frame::Hello { version, id } => {
            obj.insert("version".into(), Value::Number((*version).into()));
            obj.insert("id".into(), Value::String(id.clone()));
        }
        Frame::Init { ports, params } => {
            let mut list = Vec::with_capacity(ports.len());
            for p in ports {
                let mut o = Map::new();
                o.insert("name".into(), Value::String(p.name.clone()));
                let dir = match p.dir {
                    Direction::In => "in",
                    Direction::Out => "out",
                };
                o.insert("dir".into(), Value::String(dir.into()));
                o.insert("unit".into(), Value::String(p.unit.clone()));
                o.insert("default".into(), number(&p.name, p.default)?);
                list.push(Value::Object(o));
            }
            obj.insert("ports".into(), Value::Array(list));
            obj.insert("params".into(), number_map("params", params)?);
        }
        Frame::Step { t, dt, inputs } => {
            obj.insert("t".into(), number("t", *t)?);
            obj.insert("dt".into(), number("dt", *dt)?);
            obj.insert("inputs".into(), number_map("inputs", inputs)?);
        }
        Frame::StepOk { t, outputs } => {
            obj.insert("t".into(), number("t", *t)?);
            obj.insert("outputs".into(), number_map("outputs", outputs)?);
        }
        Frame::Error { message } => {
            obj.insert("message".into(), Value::String(message.clone()));
        }
        Frame::Terminate => {}
    }
    let mut bytes = serde_json::to_vec(&Value::Object(obj))
        .map_err(|e| Error::Protocol(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn semantic(message: impl Into<String>) -> Error {
    Error::Decode {
        offset: 0,
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| semantic(format!("missing field `{name}`")))
}

fn as_f64(obj: &Map<String, Value>, name: &str) -> Result<f64> {
    field(obj, name)?
        .as_f64()
        .ok_or_else(|| semantic(format!("field `{name}` must be a number")))
}

fn as_str<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a str> {
    field(obj, name)?
        .as_str()
        .ok_or_else(|| semantic(format!("field `{name}` must be a string")))
}

fn as_number_map(obj: &Map<String, Value>, name: &str) -> Result<BTreeMap<String, f64>> {
    let inner = field(obj, name)?
        .as_object()
        .ok_or_else(|| semantic(format!("field `{name}` must be an object")))?;
    inner
        .iter()
        .map(|(k, v)| {
            v.as_f64()
                .map(|x| (k.clone(), x))
                .ok_or_else(|| semantic(format!("`{name}.{k}` must be a number")))
        })
        .collect()
}

/// Byte offset of a serde_json error within a single-line input.
fn offset_of(bytes: &[u8], e: &serde_json::Error) -> usize {
    // premature end: the error sits just past the last byte
    if e.is_eof() {
        return bytes.len();
    }
    let (line, column) = (e.line(), e.column());
    let mut start = 0;
    for _ in 1..line {
        match bytes[start..].iter().position(|&b| b == b'\n') {
            Some(p) => start += p + 1,
            None => break,
        }
    }
    (start + column.saturating_sub(1)).min(bytes.len())
}

/// Decodes one frame. A single trailing newline is accepted; anything
/// after it is an error.
pub fn decode_message(bytes: &[u8]) -> Result<Frame> {
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    if let Some(p) = body.iter().position(|&b| b == b'\n') {
        return Err(Error::Decode {
            offset: p,
            message: "more than one frame".into(),
        });
    }
    let value: Value = serde_json::from_slice(body).map_err(|e| Error::Decode {
        offset: offset_of(body, &e),
        message: e.to_string(),
    })?;
    let obj = value
        .as_object()
        .ok_or_else(|| semantic("frame must be a JSON object"))?;
    let kind = as_str(obj, "type")?;
    let frame = match kind {
        "HELLO" => Frame::Hello {
            version: field(obj, "version")?
                .as_u64()
                .ok_or_else(|| semantic("field `version` must be a non-negative integer"))?,
            id: as_str(obj, "id")?.to_string(),
        },
        "INIT" => {
            let list = field(obj, "ports")?
                .as_array()
                .ok_or_else(|| semantic("field `ports` must be an array"))?;
            let mut ports = Vec::with_capacity(list.len());
            for p in list {
                let o = p
                    .as_object()
                    .ok_or_else(|| semantic("port declarations must be objects"))?;
                let dir = match as_str(o, "dir")? {
                    "in" => Direction::In,
                    "out" => Direction::Out,
                    other => return Err(semantic(format!("unknown port direction `{other}`"))),
                };
                ports.push(PortDecl {
                    name: as_str(o, "name")?.to_string(),
                    dir,
                    unit: as_str(o, "unit")?.to_string(),
                    default: as_f64(o, "default")?,
                });
            }
            Frame::Init {
                ports,
                params: as_number_map(obj, "params")?,
            }
        }
        "STEP" => Frame::Step {
            t: as_f64(obj, "t")?,
            dt: as_f64(obj, "dt")?,
            inputs: as_number_map(obj, "inputs")?,
        },
        "STEP_OK" => Frame::StepOk {
            t: as_f64(obj, "t")?,
            outputs: as_number_map(obj, "outputs")?,
        },
        "ERROR" => Frame::Error {
            message: as_str(obj, "message")?.to_string(),
        },
        "TERMINATE" => Frame::Terminate,
        other => return Err(semantic(format!("unknown frame type `{other}`"))),
    };
    Ok(frame)
}

/// The frames whose bytes are frozen in the protocol documentation.
pub fn golden_frames() -> Vec<Frame> {
    vec![
        Frame::Hello {
            version: PROTOCOL_VERSION,
            id: "B1".into(),
        },
        Frame::Init {
            ports: vec![
                PortDecl {
                    name: "T_sup".into(),
                    dir: Direction::In,
                    unit: "K".into(),
                    default: 353.15,
                },
                PortDecl {
                    name: "Q_demand".into(),
                    dir: Direction::Out,
                    unit: "W".into(),
                    default: 0.0,
                },
            ],
            params: BTreeMap::new(),
        },
        Frame::Step {
            t: 900.0,
            dt: 900.0,
            inputs: BTreeMap::from([("T_sup".to_string(), 353.15)]),
        },
        Frame::StepOk {
            t: 900.0,
            outputs: BTreeMap::from([
                ("Q_demand".to_string(), 2790.6666666666665),
                ("T_buffer".to_string(), 351.15),
            ]),
        },
        Frame::Error {
            message: "step failed".into(),
        },
        Frame::Terminate,
    ]
}
