//! Assembles the simulators and couplings of a scenario.

use crate::building::BuildingSimulator;
use crate::cosim::{master_run, Coupling, MasterConfig, PortRef, RunLog, Simulator};
use crate::dhnet::{GridParams, GridSimulator};
use crate::error::Result;
use crate::hiu::{PORT_M_FLOW, PORT_Q_DEMAND, PORT_T_BUFFER, PORT_T_RET_REQUEST, PORT_T_SUP};
use crate::scenario::Scenario;

pub fn building_simulator(scenario: &Scenario, id: &str) -> Result<Option<BuildingSimulator>> {
    scenario
        .building(id)
        .map(|b| BuildingSimulator::new(b.clone(), scenario.climate.clone()))
        .transpose()
}

pub fn grid_simulator(scenario: &Scenario) -> Result<Option<GridSimulator>> {
    scenario
        .grid
        .as_ref()
        .map(|g| {
            GridSimulator::new(GridParams {
                id: g.id.clone(),
                topology: g.topology.clone(),
                source: g.source,
                ground: g.ground,
                substation: g.substation,
                weather: Some(scenario.climate.weather.clone()),
            })
        })
        .transpose()
}

/// Simulator with the given id, buildings and grid alike.
pub fn simulator_by_id(scenario: &Scenario, id: &str) -> Result<Option<Box<dyn Simulator>>> {
    if let Some(b) = building_simulator(scenario, id)? {
        return Ok(Some(Box::new(b)));
    }
    match scenario.grid.as_ref() {
        Some(g) if g.id == id => Ok(grid_simulator(scenario)?.map(|g| Box::new(g) as Box<dyn Simulator>)),
        _ => Ok(None),
    }
}

/// All simulators of the scenario: buildings in file order, then the grid.
pub fn simulators(scenario: &Scenario) -> Result<Vec<Box<dyn Simulator>>> {
    let mut sims: Vec<Box<dyn Simulator>> = Vec::new();
    for b in &scenario.buildings {
        sims.push(Box::new(BuildingSimulator::new(b.clone(), scenario.climate.clone())?));
    }
    if let Some(g) = grid_simulator(scenario)? {
        sims.push(Box::new(g));
    }
    Ok(sims)
}

/// Building ↔ grid edges for every substation.
pub fn default_coupling(scenario: &Scenario) -> Coupling {
    let mut c = Coupling::default();
    if let Some(g) = &scenario.grid {
        for k in 0..g.topology.substations().len() {
            let b = g.topology.substation_building(k);
            for port in [PORT_Q_DEMAND, PORT_T_BUFFER] {
                c.connect(PortRef::new(b, port), PortRef::new(&g.id, format!("{b}.{port}")));
            }
            for port in [PORT_T_SUP, PORT_M_FLOW, PORT_T_RET_REQUEST] {
                c.connect(PortRef::new(&g.id, format!("{b}.{port}")), PortRef::new(b, port));
            }
        }
    }
    c
}

pub fn master_config(scenario: &Scenario) -> MasterConfig {
    MasterConfig {
        t0: scenario.t0,
        t_end: scenario.t_end,
        dt_comm: scenario.dt_comm,
        execution: scenario.execution.clone(),
    }
}

/// Runs the whole scenario in-process.
pub fn run_scenario(scenario: &Scenario) -> Result<RunLog> {
    let mut sims = simulators(scenario)?;
    master_run(&mut sims, &default_coupling(scenario), &master_config(scenario))
}
