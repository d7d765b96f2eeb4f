//! Grid-side substation: converts a building's heat demand into a primary
//! mass flow and a requested return temperature.
//!
//! Mode 1 sizes the flow for a fixed 15 K primary temperature drop. When the
//! local supply temperature falls below the level the building needs, mode 2
//! takes over and a PID raises the flow until the supply arrives warm
//! enough; the drop is then whatever the demand implies at that flow.

use serde::{Deserialize, Serialize};

use super::pid::{PidController, PidGains};
use crate::error::{Error, Result};
use crate::units::{c_to_k, CP_WATER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubstationMode {
    /// Demand-driven flow with a fixed temperature drop.
    Demand = 1,
    /// PID flow control on the local supply temperature.
    SupplyTemperature = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubstationSpec {
    /// Fixed primary temperature drop in mode 1, K.
    pub delta_t1: f64,
    /// Local supply temperature the building needs, K. Below it mode 2
    /// engages. It has to clear the tank set point plus the exchanger
    /// approach, otherwise the tank cannot be recharged.
    pub supply_level: f64,
    /// kg/s
    pub m_max: f64,
    pub pid: PidGains,
}

impl Default for SubstationSpec {
    fn default() -> Self {
        SubstationSpec {
            delta_t1: 15.0,
            supply_level: c_to_k(90.0),
            m_max: 1.0,
            // The local supply temperature reacts to flow with a gain of
            // several hundred K per kg/s at low flow, and the controller
            // sees it one step late; these gains keep the loop gain per
            // step below one.
            pid: PidGains {
                kp: 2e-4,
                ki: 4e-7,
                kd: 0.0,
            },
        }
    }
}

impl SubstationSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta_t1", self.delta_t1),
            ("supply_level", self.supply_level),
            ("m_max", self.m_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if self.pid.kp < 0.0 || self.pid.ki < 0.0 || self.pid.kd < 0.0 {
            return Err(Error::invalid("pid", "gains must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstationState {
    pub mode: SubstationMode,
    pub pid: PidController,
}

impl SubstationState {
    pub fn new(spec: &SubstationSpec) -> Self {
        SubstationState {
            mode: SubstationMode::Demand,
            pid: PidController::new(spec.pid, 0.0, spec.m_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstationOutput {
    pub m_flow: f64,
    pub t_ret_request: f64,
    pub mode: SubstationMode,
}

/// Mode-1 flow for a demand, kg/s.
pub fn demand_flow(q_demand: f64, delta_t1: f64) -> f64 {
    q_demand / (CP_WATER * delta_t1)
}

pub fn substation_step(
    q_demand: f64,
    t_sup_local: f64,
    state: &mut SubstationState,
    spec: &SubstationSpec,
    dt: f64,
) -> SubstationOutput {
    let q_demand = q_demand.max(0.0);
    let m_demand = demand_flow(q_demand, spec.delta_t1).min(spec.m_max);

    if state.mode == SubstationMode::Demand && t_sup_local < spec.supply_level {
        state.mode = SubstationMode::SupplyTemperature;
        state.pid.reset_to(m_demand);
    }

    if state.mode == SubstationMode::SupplyTemperature {
        let m_pid = state.pid.update(spec.supply_level, t_sup_local, dt);
        if m_pid <= m_demand && t_sup_local >= spec.supply_level {
            state.mode = SubstationMode::Demand;
        } else {
            let m_flow = m_pid.max(m_demand);
            let delta_t2 = if m_flow > 0.0 {
                q_demand / (CP_WATER * m_flow)
            } else {
                0.0
            };
            return SubstationOutput {
                m_flow,
                t_ret_request: t_sup_local - delta_t2,
                mode: SubstationMode::SupplyTemperature,
            };
        }
    }

    let delta_t = if m_demand > 0.0 {
        q_demand / (CP_WATER * m_demand)
    } else {
        spec.delta_t1
    };
    SubstationOutput {
        m_flow: m_demand,
        t_ret_request: t_sup_local - delta_t,
        mode: SubstationMode::Demand,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec() -> SubstationSpec {
        SubstationSpec {
            m_max: 5.0,
            ..Default::default()
        }
    }

    #[test]
    fn mode_one_examples() {
        let spec = spec();
        let mut state = SubstationState::new(&spec);
        let out = substation_step(10_000.0, c_to_k(95.0), &mut state, &spec, 900.0);
        assert_eq!(out.mode, SubstationMode::Demand);
        assert_relative_eq!(out.m_flow, 0.159_261_028_826_246_2, max_relative = 1e-12);
        assert_relative_eq!(out.t_ret_request, c_to_k(80.0), epsilon = 1e-9);

        let out = substation_step(0.0, c_to_k(95.0), &mut state, &spec, 900.0);
        assert_eq!(out.m_flow, 0.0);
    }

    #[test]
    fn mode_two_delta_t() {
        let spec = spec();
        let mut state = SubstationState::new(&spec);
        let out = substation_step(10_000.0, c_to_k(70.0), &mut state, &spec, 900.0);
        assert_eq!(out.mode, SubstationMode::SupplyTemperature);
        // drop implied by the flow the controller settled on
        assert_relative_eq!(
            out.t_ret_request,
            c_to_k(70.0) - 10_000.0 / (4186.0 * out.m_flow),
            epsilon = 1e-9
        );
        assert_relative_eq!(10_000.0 / (4186.0 * 0.2), 11.945, epsilon = 1e-3);
    }

    #[test]
    fn mode_one_flow_capped() {
        let spec = SubstationSpec {
            m_max: 0.1,
            ..Default::default()
        };
        let mut state = SubstationState::new(&spec);
        let out = substation_step(20_000.0, c_to_k(95.0), &mut state, &spec, 900.0);
        assert_eq!(out.m_flow, 0.1);
        assert_relative_eq!(0.1 * 4186.0 * (c_to_k(95.0) - out.t_ret_request), 20_000.0, max_relative = 1e-12);
    }

    #[test]
    fn returns_to_mode_one_when_supply_recovers() {
        let spec = spec();
        let mut state = SubstationState::new(&spec);
        substation_step(5000.0, c_to_k(60.0), &mut state, &spec, 900.0);
        assert_eq!(state.mode, SubstationMode::SupplyTemperature);
        let mut mode = state.mode;
        for _ in 0..200 {
            mode = substation_step(5000.0, c_to_k(95.0), &mut state, &spec, 900.0).mode;
        }
        assert_eq!(mode, SubstationMode::Demand);
    }
}
