//! Radial (tree) network with twin supply/return pipes. Each pipe entry
//! stands for a supply pipe and a return pipe of identical geometry.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::pipe::{pipe_outlet, pipe_pressure_drop};
use super::source::SourceSpec;
use crate::error::{Error, Result};
use crate::units::CP_WATER;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    Source,
    Junction,
    Substation { building: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    #[serde(flatten)]
    pub kind: NodeKind,
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
    /// Burial depth, m.
    #[serde(default = "default_depth")]
    pub depth: f64,
}

fn default_depth() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipe {
    pub id: String,
    pub from: String,
    pub to: String,
    /// m
    pub length: f64,
    /// Heat loss coefficient per metre, W/(m·K).
    pub u_prime: f64,
    /// m
    pub diameter: f64,
    /// m
    #[serde(default = "default_roughness")]
    pub roughness: f64,
}

fn default_roughness() -> f64 {
    4.5e-5
}

/// Validated tree rooted at the single source.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    nodes: Vec<Node>,
    pipes: Vec<Pipe>,
    root: usize,
    /// Pipe feeding each node from its parent (`None` for the root).
    parent_pipe: Vec<Option<usize>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<(usize, usize)>>,
    /// Nodes in breadth-first order from the root.
    order: Vec<usize>,
    substations: Vec<usize>,
}

impl NetworkTopology {
    pub fn new(nodes: Vec<Node>, pipes: Vec<Pipe>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(Error::Topology(format!("duplicate node id `{}`", n.id)));
            }
        }
        let sources: Vec<usize> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == NodeKind::Source)
            .map(|(i, _)| i)
            .collect();
        let root = match sources.as_slice() {
            [r] => *r,
            [] => return Err(Error::Topology("no source node".into())),
            _ => return Err(Error::Topology("more than one source node".into())),
        };

        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut pipe_ids = BTreeMap::new();
        for (k, p) in pipes.iter().enumerate() {
            if pipe_ids.insert(p.id.clone(), k).is_some() {
                return Err(Error::Topology(format!("duplicate pipe id `{}`", p.id)));
            }
            for (name, v) in [("length", p.length), ("diameter", p.diameter)] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Topology(format!("pipe `{}`: {name} must be > 0", p.id)));
                }
            }
            if !(p.u_prime >= 0.0 && p.u_prime.is_finite()) {
                return Err(Error::Topology(format!("pipe `{}`: u_prime must be >= 0", p.id)));
            }
            let lookup = |id: &str| {
                index.get(id).copied().ok_or_else(|| {
                    Error::Topology(format!("pipe `{}` references unknown node `{id}`", p.id))
                })
            };
            let (a, b) = (lookup(&p.from)?, lookup(&p.to)?);
            if a == b {
                return Err(Error::Topology(format!("pipe `{}` is a self-loop", p.id)));
            }
            adjacency[a].push((b, k));
            adjacency[b].push((a, k));
        }
        if pipes.len() + 1 != nodes.len() {
            return Err(Error::Topology(format!(
                "a tree over {} nodes needs {} pipes, found {}",
                nodes.len(),
                nodes.len().saturating_sub(1),
                pipes.len()
            )));
        }

        let mut parent = vec![None; nodes.len()];
        let mut parent_pipe = vec![None; nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        let mut visited = vec![false; nodes.len()];
        let mut order = Vec::with_capacity(nodes.len());
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(v, k) in &adjacency[u] {
                if Some(k) == parent_pipe[u] {
                    continue;
                }
                if visited[v] {
                    return Err(Error::Topology(format!("cycle through pipe `{}`", pipes[k].id)));
                }
                visited[v] = true;
                parent[v] = Some(u);
                parent_pipe[v] = Some(k);
                children[u].push((v, k));
                queue.push_back(v);
            }
        }
        if let Some(i) = visited.iter().position(|v| !v) {
            return Err(Error::Topology(format!("node `{}` is disconnected", nodes[i].id)));
        }

        let mut substations = Vec::new();
        for &i in &order {
            if let NodeKind::Substation { .. } = nodes[i].kind {
                if !children[i].is_empty() {
                    return Err(Error::Topology(format!(
                        "substation `{}` must be a leaf",
                        nodes[i].id
                    )));
                }
                substations.push(i);
            }
        }
        substations.sort_unstable();

        Ok(NetworkTopology {
            nodes,
            pipes,
            root,
            parent_pipe,
            parent,
            children,
            order,
            substations,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn pipes(&self) -> &[Pipe] {
        &self.pipes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Substation node indices in declaration order.
    pub fn substations(&self) -> &[usize] {
        &self.substations
    }

    pub fn substation_building(&self, k: usize) -> &str {
        match &self.nodes[self.substations[k]].kind {
            NodeKind::Substation { building } => building,
            _ => unreachable!("substation index points at a non-substation node"),
        }
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn parent_pipe(&self, node: usize) -> Option<usize> {
        self.parent_pipe[node]
    }

    pub fn children(&self, node: usize) -> &[(usize, usize)] {
        &self.children[node]
    }

    pub fn bfs_order(&self) -> &[usize] {
        &self.order
    }

    pub fn total_length(&self) -> f64 {
        self.pipes.iter().map(|p| p.length).sum()
    }
}

/// Primary-side operating point of one substation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstationFlow {
    pub m_flow: f64,
    pub t_ret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    pub t_supply: f64,
    pub t_ground: f64,
    /// Mixed return temperature arriving at the plant, K.
    pub t_return: f64,
    pub m_plant: f64,
    pub pipe_flow: Vec<f64>,
    pub node_supply_t: Vec<f64>,
    pub node_return_t: Vec<f64>,
    pub supply_loss: Vec<f64>,
    pub return_loss: Vec<f64>,
    /// Supply plus return pressure drop on the way to each substation, Pa.
    pub path_dp: Vec<f64>,
    /// Substation index with the largest path pressure drop.
    pub critical: Option<usize>,
    pub q_substations: f64,
    pub q_pipe_loss: f64,
    /// Heat delivered by the plant, `ṁ·c_p·(T_supply − T_return)`.
    pub q_plant: f64,
}

impl NetworkSolution {
    pub fn substation_supply_t(&self, topo: &NetworkTopology, k: usize) -> f64 {
        self.node_supply_t[topo.substations()[k]]
    }

    pub fn max_path_dp(&self) -> f64 {
        self.critical.map(|k| self.path_dp[k]).unwrap_or(0.0)
    }
}

/// Steady solve at fixed substation flows: branch flows by mass balance,
/// supply temperatures root to leaf, flow-weighted return mixing leaf to
/// root, pressure drop along every path.
pub fn network_solve(
    topo: &NetworkTopology,
    flows: &[SubstationFlow],
    t_ground: f64,
    source: &SourceSpec,
    t: f64,
    t_out: f64,
) -> Result<NetworkSolution> {
    if flows.len() != topo.substations.len() {
        return Err(Error::Topology(format!(
            "expected {} substation flows, got {}",
            topo.substations.len(),
            flows.len()
        )));
    }
    let n = topo.nodes.len();
    let mut node_flow = vec![0.0; n];
    let mut leaf_return = vec![t_ground; n];
    for (k, &node) in topo.substations.iter().enumerate() {
        let f = flows[k];
        if !(f.m_flow >= 0.0 && f.m_flow.is_finite() && f.t_ret.is_finite()) {
            return Err(Error::Numeric(format!("flow of substation `{}`", topo.nodes[node].id)));
        }
        node_flow[node] = f.m_flow;
        leaf_return[node] = f.t_ret;
    }

    // Subtree flows, leaves first.
    let mut pipe_flow = vec![0.0; topo.pipes.len()];
    for &u in topo.order.iter().rev() {
        let through: f64 = node_flow[u];
        if let Some(k) = topo.parent_pipe[u] {
            pipe_flow[k] = through;
            let p = topo.parent[u].expect("non-root node has a parent");
            node_flow[p] += through;
        }
    }
    let m_plant = node_flow[topo.root];

    let t_supply = source.supply_temperature(t, t_out);
    let mut node_supply_t = vec![t_ground; n];
    let mut supply_loss = vec![0.0; topo.pipes.len()];
    let mut pipe_dp = vec![0.0; topo.pipes.len()];
    let mut node_dp = vec![0.0; n];
    node_supply_t[topo.root] = t_supply;
    for &u in &topo.order {
        for &(v, k) in &topo.children[u] {
            let p = &topo.pipes[k];
            let m = pipe_flow[k];
            let t_in = node_supply_t[u];
            let t_out_pipe = pipe_outlet(t_in, m, t_ground, p.u_prime, p.length);
            node_supply_t[v] = t_out_pipe;
            supply_loss[k] = m * CP_WATER * (t_in - t_out_pipe);
            pipe_dp[k] = 2.0 * pipe_pressure_drop(m, p.diameter, p.length, p.roughness)?;
            node_dp[v] = node_dp[u] + pipe_dp[k];
        }
    }

    // Return side: mix child streams at each node, leaves first.
    let mut node_return_t = vec![t_ground; n];
    let mut return_loss = vec![0.0; topo.pipes.len()];
    for &u in topo.order.iter().rev() {
        if topo.children[u].is_empty() {
            node_return_t[u] = leaf_return[u];
            continue;
        }
        let mut m_sum = 0.0;
        let mut mt_sum = 0.0;
        for &(v, k) in &topo.children[u] {
            let p = &topo.pipes[k];
            let m = pipe_flow[k];
            let t_in = node_return_t[v];
            let t_out_pipe = pipe_outlet(t_in, m, t_ground, p.u_prime, p.length);
            return_loss[k] = m * CP_WATER * (t_in - t_out_pipe);
            m_sum += m;
            mt_sum += m * t_out_pipe;
        }
        node_return_t[u] = if m_sum > 0.0 { mt_sum / m_sum } else { t_ground };
    }
    let t_return = node_return_t[topo.root];

    let path_dp: Vec<f64> = topo.substations.iter().map(|&i| node_dp[i]).collect();
    let critical = path_dp
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (k, &dp)| match best {
            Some((_, b)) if b >= dp => best,
            _ => Some((k, dp)),
        })
        .map(|(k, _)| k);

    let q_substations = topo
        .substations
        .iter()
        .zip(flows)
        .map(|(&i, f)| f.m_flow * CP_WATER * (node_supply_t[i] - f.t_ret))
        .sum();
    let q_pipe_loss = supply_loss.iter().chain(&return_loss).sum();
    let q_plant = m_plant * CP_WATER * (t_supply - t_return);

    Ok(NetworkSolution {
        t_supply,
        t_ground,
        t_return,
        m_plant,
        pipe_flow,
        node_supply_t,
        node_return_t,
        supply_loss,
        return_loss,
        path_dp,
        critical,
        q_substations,
        q_pipe_loss,
        q_plant,
    })
}
