//! Ideal plant: prescribes the supply temperature and sets the pump head so
//! the hydraulically most remote substation sees its set differential
//! pressure.

use serde::{Deserialize, Serialize};

use super::network::NetworkSolution;
use crate::error::{Error, Result};
use crate::units::c_to_k;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupplySchedule {
    Constant {
        /// K
        t_supply: f64,
    },
    /// Linear heating curve between two outdoor temperatures, flat outside.
    Compensated {
        t_out_design: f64,
        t_supply_design: f64,
        t_out_base: f64,
        t_supply_base: f64,
    },
}

impl SupplySchedule {
    pub fn at(&self, t_out: f64) -> f64 {
        match *self {
            SupplySchedule::Constant { t_supply } => t_supply,
            SupplySchedule::Compensated {
                t_out_design,
                t_supply_design,
                t_out_base,
                t_supply_base,
            } => {
                let x = ((t_out - t_out_design) / (t_out_base - t_out_design)).clamp(0.0, 1.0);
                t_supply_design + x * (t_supply_base - t_supply_design)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub supply: SupplySchedule,
    /// Pa
    pub dp_set_critical: f64,
    /// Pa
    pub max_head: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec {
            supply: SupplySchedule::Constant {
                t_supply: c_to_k(105.0),
            },
            dp_set_critical: 50_000.0,
            max_head: 600_000.0,
        }
    }
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.dp_set_critical > 0.0 && self.dp_set_critical.is_finite()) {
            return Err(Error::invalid("dp_set_critical", "must be > 0"));
        }
        if !(self.max_head >= self.dp_set_critical && self.max_head.is_finite()) {
            return Err(Error::invalid("max_head", "must be >= dp_set_critical"));
        }
        if let SupplySchedule::Compensated {
            t_out_design,
            t_out_base,
            ..
        } = self.supply
        {
            if t_out_base <= t_out_design {
                return Err(Error::invalid("supply", "t_out_base must exceed t_out_design"));
            }
        }
        Ok(())
    }

    /// Supply temperature at time `t` for outdoor temperature `t_out`.
    pub fn supply_temperature(&self, _t: f64, t_out: f64) -> f64 {
        self.supply.at(t_out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceOutput {
    pub t_supply: f64,
    pub head: f64,
    pub q_plant: f64,
    /// The head needed exceeded `max_head`.
    pub saturated: bool,
}

pub fn source_step(solution: &NetworkSolution, source: &SourceSpec) -> SourceOutput {
    let wanted = solution.max_path_dp() + source.dp_set_critical;
    SourceOutput {
        t_supply: solution.t_supply,
        head: wanted.min(source.max_head),
        q_plant: solution.q_plant,
        saturated: wanted > source.max_head,
    }
}
