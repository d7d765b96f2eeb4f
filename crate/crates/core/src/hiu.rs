//! Indirect heat interface unit: grid water heats the buffer tank through a
//! heat exchanger, and a proportional recharge law turns the tank state into
//! the heat demand the building reports to the grid.

use serde::{Deserialize, Serialize};

use crate::equipment::{buffer_tank_step, BufferTank};
use crate::error::{Error, Result};
use crate::units::CP_WATER;

pub const PORT_T_SUP: &str = "T_sup";
pub const PORT_M_FLOW: &str = "m_flow";
pub const PORT_T_RET_REQUEST: &str = "T_ret_request";
pub const PORT_T_BUFFER: &str = "T_buffer";
pub const PORT_Q_DEMAND: &str = "Q_demand";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HxSpec {
    /// Minimum difference between the primary outlet and the tank, K.
    pub approach: f64,
}

impl Default for HxSpec {
    fn default() -> Self {
        HxSpec { approach: 5.0 }
    }
}

impl HxSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.approach > 0.0 && self.approach.is_finite()) {
            return Err(Error::invalid("approach", "must be > 0"));
        }
        Ok(())
    }
}

/// Proportional recharge law: `q = discharge + k_p·(T_set − T)·m·c_p/τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandLaw {
    pub k_p: f64,
    /// s
    pub tau: f64,
}

impl Default for DemandLaw {
    fn default() -> Self {
        DemandLaw { k_p: 1.0, tau: 900.0 }
    }
}

/// Grid-side values delivered to the building.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiuInputs {
    pub t_sup: f64,
    pub m_flow: f64,
    pub t_ret_request: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiuOutputs {
    pub t_buffer: f64,
    pub q_demand: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HxResult {
    pub q_hx: f64,
    pub t_ret: f64,
}

/// Heat moved from the primary stream into the tank. Heat never flows from
/// the tank back to the grid.
pub fn hx_transfer(
    t_sup: f64,
    m_flow: f64,
    t_ret_request: f64,
    tank: &BufferTank,
    hx: &HxSpec,
) -> HxResult {
    if m_flow <= 0.0 || t_sup <= tank.t_buffer {
        return HxResult {
            q_hx: 0.0,
            t_ret: t_sup,
        };
    }
    let t_ret = (tank.t_buffer + hx.approach).max(t_ret_request).min(t_sup);
    HxResult {
        q_hx: m_flow * CP_WATER * (t_sup - t_ret),
        t_ret,
    }
}

pub fn buffer_demand(tank: &BufferTank, recent_discharge: f64, law: &DemandLaw) -> f64 {
    let recharge = law.k_p * (tank.set_point - tank.t_buffer) * tank.heat_capacity() / law.tau;
    (recent_discharge + recharge).max(0.0)
}

/// Applies one exchanger transfer and one tank update. `draw` is the
/// radiator plus hot-water power taken from the tank.
pub fn hiu_step(
    inputs: &HiuInputs,
    tank: &BufferTank,
    hx: &HxSpec,
    draw: f64,
    t_room: f64,
    dt: f64,
) -> (BufferTank, HxResult) {
    let transfer = hx_transfer(inputs.t_sup, inputs.m_flow, inputs.t_ret_request, tank, hx);
    (
        buffer_tank_step(tank, transfer.q_hx, draw, t_room, dt),
        transfer,
    )
}

/// Stateful unit used by the building simulator: tracks the tank and the
/// mean draw of the last exchange interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Hiu {
    pub tank: BufferTank,
    pub hx: HxSpec,
    pub law: DemandLaw,
    recent_discharge: f64,
    draw_energy: f64,
    hx_energy: f64,
    elapsed: f64,
}

impl Hiu {
    pub fn new(tank: BufferTank, hx: HxSpec, law: DemandLaw) -> Self {
        Hiu {
            tank,
            hx,
            law,
            recent_discharge: 0.0,
            draw_energy: 0.0,
            hx_energy: 0.0,
            elapsed: 0.0,
        }
    }

    pub fn step(&mut self, inputs: &HiuInputs, draw: f64, t_room: f64, dt: f64) -> HxResult {
        let (tank, transfer) = hiu_step(inputs, &self.tank, &self.hx, draw, t_room, dt);
        self.tank = tank;
        self.draw_energy += draw * dt;
        self.hx_energy += transfer.q_hx * dt;
        self.elapsed += dt;
        transfer
    }

    /// Closes an exchange interval. Returns the mean exchanger power over
    /// the interval and latches the mean draw for the next demand.
    pub fn finish_interval(&mut self) -> f64 {
        let mean_hx = if self.elapsed > 0.0 {
            self.recent_discharge = self.draw_energy / self.elapsed;
            self.hx_energy / self.elapsed
        } else {
            0.0
        };
        self.draw_energy = 0.0;
        self.hx_energy = 0.0;
        self.elapsed = 0.0;
        mean_hx
    }

    pub fn recent_discharge(&self) -> f64 {
        self.recent_discharge
    }

    pub fn outputs(&self) -> HiuOutputs {
        HiuOutputs {
            t_buffer: self.tank.t_buffer,
            q_demand: buffer_demand(&self.tank, self.recent_discharge, &self.law),
        }
    }
}
