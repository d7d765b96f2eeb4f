//! The heat grid as a co-simulation participant.

use std::sync::Arc;

use super::network::{network_solve, NetworkSolution, NetworkTopology, SubstationFlow};
use super::source::{source_step, SourceSpec};
use super::substation::{substation_step, SubstationSpec, SubstationState};
use super::GroundSpec;
use crate::cosim::{Location, PortSpec, Simulator, SimulatorDescriptor};
use crate::error::Result;
use crate::hiu::{PORT_M_FLOW, PORT_Q_DEMAND, PORT_T_BUFFER, PORT_T_RET_REQUEST, PORT_T_SUP};
use crate::scenario::weather::WeatherSeries;

pub const GRID_OUTPUTS: [(&str, &str); 9] = [
    ("T_supply", "K"),
    ("T_return", "K"),
    ("m_flow", "kg/s"),
    ("Q_plant", "W"),
    ("Q_pipe_loss", "W"),
    ("Q_substations", "W"),
    ("head", "Pa"),
    ("head_saturated", "1"),
    ("T_ground", "K"),
];

/// Per-building ports on the grid side, prefixed with the building id.
pub const SUBSTATION_OUTPUTS: [(&str, &str); 4] = [
    (PORT_T_SUP, "K"),
    (PORT_M_FLOW, "kg/s"),
    (PORT_T_RET_REQUEST, "K"),
    ("mode", "1"),
];

#[derive(Debug, Clone)]
pub struct GridParams {
    pub id: String,
    pub topology: NetworkTopology,
    pub source: SourceSpec,
    pub ground: GroundSpec,
    pub substation: SubstationSpec,
    /// Outdoor temperature for a compensated supply curve.
    pub weather: Option<Arc<WeatherSeries>>,
}

pub struct GridSimulator {
    params: GridParams,
    descriptor: SimulatorDescriptor,
    states: Vec<SubstationState>,
    /// Local supply temperatures of the previous step, K.
    local_supply: Option<Vec<f64>>,
    last: Option<NetworkSolution>,
}

impl GridSimulator {
    pub fn new(params: GridParams) -> Result<Self> {
        params.source.validate()?;
        params.substation.validate()?;
        let topo = &params.topology;
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for k in 0..topo.substations().len() {
            let b = topo.substation_building(k);
            inputs.push(PortSpec::new(format!("{b}.{PORT_Q_DEMAND}"), "W", 0.0));
            inputs.push(PortSpec::new(
                format!("{b}.{PORT_T_BUFFER}"),
                "K",
                crate::equipment::BufferTank::default().set_point,
            ));
            for (name, unit) in SUBSTATION_OUTPUTS {
                outputs.push(PortSpec::new(format!("{b}.{name}"), unit, 0.0));
            }
        }
        for (name, unit) in GRID_OUTPUTS {
            outputs.push(PortSpec::new(name, unit, 0.0));
        }
        let descriptor = SimulatorDescriptor {
            id: params.id.clone(),
            inputs,
            outputs,
            location: Location::InProcess,
        };
        descriptor.validate()?;
        let states = topo
            .substations()
            .iter()
            .map(|_| SubstationState::new(&params.substation))
            .collect();
        Ok(GridSimulator {
            params,
            descriptor,
            states,
            local_supply: None,
            last: None,
        })
    }

    pub fn last_solution(&self) -> Option<&NetworkSolution> {
        self.last.as_ref()
    }

    fn outdoor(&self, t: f64) -> f64 {
        self.params
            .weather
            .as_ref()
            .map(|w| w.temperature_at(t))
            .unwrap_or(crate::units::c_to_k(10.0))
    }
}

impl Simulator for GridSimulator {
    fn descriptor(&self) -> &SimulatorDescriptor {
        &self.descriptor
    }

    fn initialize(&mut self, _t0: f64) -> Result<()> {
        self.states = self
            .params
            .topology
            .substations()
            .iter()
            .map(|_| SubstationState::new(&self.params.substation))
            .collect();
        self.local_supply = None;
        self.last = None;
        Ok(())
    }

    fn step(&mut self, t: f64, dt: f64, inputs: &[f64]) -> Result<Vec<f64>> {
        let topo = &self.params.topology;
        let n = topo.substations().len();
        let t_out = self.outdoor(t);
        let t_ground = self.params.ground.at(t);
        let t_supply = self.params.source.supply_temperature(t, t_out);
        let previous = self
            .local_supply
            .clone()
            .unwrap_or_else(|| vec![t_supply; n]);

        let mut ctrl = Vec::with_capacity(n);
        for k in 0..n {
            let q_demand = inputs[2 * k];
            let out = substation_step(
                q_demand,
                previous[k],
                &mut self.states[k],
                &self.params.substation,
                dt,
            );
            ctrl.push((out, previous[k] - out.t_ret_request));
        }

        // Supply temperatures depend on the flows only; the returns are then
        // placed the controller's temperature drop below the fresh supply.
        let flows: Vec<SubstationFlow> = ctrl
            .iter()
            .map(|(o, _)| SubstationFlow {
                m_flow: o.m_flow,
                t_ret: t_supply,
            })
            .collect();
        let probe = network_solve(topo, &flows, t_ground, &self.params.source, t, t_out)?;
        let flows: Vec<SubstationFlow> = ctrl
            .iter()
            .enumerate()
            .map(|(k, (o, drop))| SubstationFlow {
                m_flow: o.m_flow,
                t_ret: probe.substation_supply_t(topo, k) - drop,
            })
            .collect();
        let sol = network_solve(topo, &flows, t_ground, &self.params.source, t, t_out)?;
        let src = source_step(&sol, &self.params.source);

        let mut out = Vec::with_capacity(self.descriptor.outputs.len());
        let mut local = Vec::with_capacity(n);
        for (k, (o, _)) in ctrl.iter().enumerate() {
            let t_local = sol.substation_supply_t(topo, k);
            local.push(t_local);
            out.extend([t_local, o.m_flow, flows[k].t_ret, o.mode as i32 as f64]);
        }
        out.extend([
            src.t_supply,
            sol.t_return,
            sol.m_plant,
            src.q_plant,
            sol.q_pipe_loss,
            sol.q_substations,
            src.head,
            if src.saturated { 1.0 } else { 0.0 },
            t_ground,
        ]);
        self.local_supply = Some(local);
        self.last = Some(sol);
        Ok(out)
    }
}
