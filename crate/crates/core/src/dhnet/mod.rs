//! District-heating network: static pipes on a radial tree, an ideal plant
//! and one two-state substation per connected building.

pub mod grid;
pub mod network;
pub mod pid;
pub mod pipe;
pub mod source;
pub mod substation;

pub use grid::{GridParams, GridSimulator};
pub use network::{network_solve, NetworkSolution, NetworkTopology, Node, NodeKind, Pipe, SubstationFlow};
pub use pid::{PidController, PidGains};
pub use pipe::{pipe_outlet, pipe_pressure_drop};
pub use source::{source_step, SourceOutput, SourceSpec, SupplySchedule};
pub use substation::{substation_step, SubstationMode, SubstationOutput, SubstationSpec, SubstationState};

use serde::{Deserialize, Serialize};

use crate::units::SECONDS_PER_DAY;

/// Undisturbed ground temperature at pipe depth, K.
pub fn ground_temperature(t: f64, mean: f64, amplitude: f64, phase_day: f64) -> f64 {
    let day = t / SECONDS_PER_DAY;
    mean + amplitude * (2.0 * std::f64::consts::PI * (day - phase_day) / 365.0).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSpec {
    /// K
    pub mean: f64,
    /// K
    pub amplitude: f64,
    pub phase_day: f64,
}

impl Default for GroundSpec {
    fn default() -> Self {
        GroundSpec {
            mean: crate::units::c_to_k(10.0),
            amplitude: 5.0,
            phase_day: 210.0,
        }
    }
}

impl GroundSpec {
    pub fn at(&self, t: f64) -> f64 {
        ground_temperature(t, self.mean, self.amplitude, self.phase_day)
    }
}
