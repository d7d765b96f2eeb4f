//! Network topology file (TOML).
//!
//! ```toml
//! [[nodes]]
//! id = "plant"
//! kind = "source"        # source | junction | substation
//! x = 0.0
//! y = 0.0
//! depth_m = 1.0
//!
//! [[nodes]]
//! id = "S1"
//! kind = "substation"
//! building = "B1"
//!
//! [[pipes]]
//! id = "P1"
//! from = "plant"
//! to = "S1"
//! length_m = 120.0
//! u_prime_W_per_mK = 0.25
//! diameter_m = 0.05
//! roughness_m = 4.5e-5   # optional
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dhnet::{NetworkTopology, Node, NodeKind, Pipe};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKindEntry {
    Source,
    Junction,
    Substation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: String,
    pub kind: NodeKindEntry,
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
    #[serde(default = "default_depth")]
    pub depth_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub building: Option<String>,
}

fn default_depth() -> f64 {
    1.0
}

fn default_roughness() -> f64 {
    4.5e-5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct PipeEntry {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length_m: f64,
    pub u_prime_W_per_mK: f64,
    pub diameter_m: f64,
    #[serde(default = "default_roughness")]
    pub roughness_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    pub nodes: Vec<NodeEntry>,
    pub pipes: Vec<PipeEntry>,
}

impl TopologyFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            Error::config(format!("{origin}: {}", e.path()), e.inner().message().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TopologyFile::parse(&text, &path.display().to_string())
    }

    pub fn into_topology(self) -> Result<NetworkTopology> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.into_iter().enumerate() {
            let kind = match (n.kind, n.building) {
                (NodeKindEntry::Substation, Some(building)) => NodeKind::Substation { building },
                (NodeKindEntry::Substation, None) => {
                    return Err(Error::config(format!("nodes[{i}].building"), "substation needs a building"))
                }
                (_, Some(_)) => {
                    return Err(Error::config(
                        format!("nodes[{i}].building"),
                        "only substations bind to a building",
                    ))
                }
                (NodeKindEntry::Source, None) => NodeKind::Source,
                (NodeKindEntry::Junction, None) => NodeKind::Junction,
            };
            nodes.push(Node {
                id: n.id,
                kind,
                x: n.x,
                y: n.y,
                depth: n.depth_m,
            });
        }
        let pipes = self
            .pipes
            .into_iter()
            .map(|p| Pipe {
                id: p.id,
                from: p.from,
                to: p.to,
                length: p.length_m,
                u_prime: p.u_prime_W_per_mK,
                diameter: p.diameter_m,
                roughness: p.roughness_m,
            })
            .collect();
        NetworkTopology::new(nodes, pipes)
    }
}

pub fn load_topology(path: &Path) -> Result<NetworkTopology> {
    TopologyFile::load(path)?.into_topology()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_small_tree() {
        let text = r#"
[[nodes]]
id = "plant"
kind = "source"

[[nodes]]
id = "S1"
kind = "substation"
building = "B1"

[[pipes]]
id = "P1"
from = "plant"
to = "S1"
length_m = 50.0
u_prime_W_per_mK = 0.3
diameter_m = 0.04
"#;
        let topo = TopologyFile::parse(text, "t").unwrap().into_topology().unwrap();
        assert_eq!(topo.substations().len(), 1);
        assert_eq!(topo.substation_building(0), "B1");
    }

    #[test]
    fn unknown_key_named() {
        let text = "[[nodes]]\nid = \"a\"\nkind = \"source\"\ncolour = 1\n[[pipes]]\n";
        match TopologyFile::parse(text, "t") {
            Err(Error::Config { message, .. }) => assert!(message.contains("colour"), "{message}"),
            other => panic!("{other:?}"),
        }
    }
}
