//! In-building devices: appliances, radiator, ideal air conditioner, buffer
//! tank and the domestic hot water stub.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{c_to_k, CP_WATER};

/// Heat-to-electricity ratios of the household appliance categories.
pub const DEFAULT_APPLIANCE_RATIOS: [(&str, f64); 15] = [
    ("light", 0.95),
    ("stove", 0.99),
    ("coffee_machine", 0.1),
    ("toaster", 0.98),
    ("electric_kettle", 0.9),
    ("entertainment", 0.5),
    ("hood", 0.01),
    ("oven", 0.98),
    ("dryer", 0.95),
    ("fridge", 1.0),
    ("dishwasher", 0.05),
    ("microwave", 0.3),
    ("washing_machine", 0.01),
    ("hair_dryer", 0.9),
    ("vehicle", 0.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ApplianceRatios(BTreeMap<String, f64>);

impl Default for ApplianceRatios {
    fn default() -> Self {
        ApplianceRatios(
            DEFAULT_APPLIANCE_RATIOS
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        )
    }
}

impl ApplianceRatios {
    pub fn new(ratios: BTreeMap<String, f64>) -> Result<Self> {
        for (k, v) in &ratios {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::config(
                    format!("appliance_ratios.{k}"),
                    format!("ratio must be within [0, 1], got {v}"),
                ));
            }
        }
        Ok(ApplianceRatios(ratios))
    }

    pub fn get(&self, category: &str) -> Option<f64> {
        self.0.get(category).copied()
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.0.clone()
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

/// Heat released by appliances for the given electrical powers, W.
pub fn appliance_heat<'a, I>(p_el_by_category: I, ratios: &ApplianceRatios) -> Result<f64>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    p_el_by_category
        .into_iter()
        .try_fold(0.0, |acc, (category, p)| {
            let ratio = ratios.get(category).ok_or_else(|| {
                Error::config(
                    format!("appliances.{category}"),
                    "unknown appliance category",
                )
            })?;
            if p < 0.0 {
                return Err(Error::invalid(category, "electrical power must be >= 0"));
            }
            Ok(acc + ratio * p)
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiatorSpec {
    /// kg/s
    pub max_mass_flow: f64,
    /// W/K
    pub ua_emit: f64,
    /// K
    pub proportional_band: f64,
}

impl Default for RadiatorSpec {
    fn default() -> Self {
        RadiatorSpec {
            max_mass_flow: 0.1,
            ua_emit: 400.0,
            proportional_band: 1.0,
        }
    }
}

impl RadiatorSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("max_mass_flow", self.max_mass_flow),
            ("ua_emit", self.ua_emit),
            ("proportional_band", self.proportional_band),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadiatorOutput {
    pub q_emit: f64,
    pub m_flow: f64,
}

/// Proportional flow control with an effectiveness emission model. The
/// caller removes `q_emit` from the tank.
pub fn radiator_step(
    t_air: f64,
    t_set: f64,
    heating_season: bool,
    tank: &BufferTank,
    spec: &RadiatorSpec,
) -> RadiatorOutput {
    if !heating_season || tank.t_buffer < tank.band.0 {
        return RadiatorOutput::default();
    }
    let opening = ((t_set - t_air) / spec.proportional_band).clamp(0.0, 1.0);
    let m_flow = spec.max_mass_flow * opening;
    RadiatorOutput {
        q_emit: emitted_power(m_flow, tank.t_buffer, t_air, spec.ua_emit),
        m_flow,
    }
}

/// `ε·ṁ·c_p·(T_supply − T_air)` with `ε = 1 − exp(−UA/(ṁ·c_p))`.
pub fn emitted_power(m_flow: f64, t_supply: f64, t_air: f64, ua: f64) -> f64 {
    if m_flow <= 0.0 || t_supply <= t_air {
        return 0.0;
    }
    let capacity_rate = m_flow * CP_WATER;
    let effectiveness = 1.0 - (-ua / capacity_rate).exp();
    effectiveness * capacity_rate * (t_supply - t_air)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcSpec {
    /// Maximum heating power, W.
    pub heating_capacity: f64,
    /// Maximum cooling power (positive number), W.
    pub cooling_capacity: f64,
    /// Half-width of the idle band around the set point, K.
    pub deadband: f64,
}

impl Default for AcSpec {
    fn default() -> Self {
        AcSpec {
            heating_capacity: 20_000.0,
            cooling_capacity: 20_000.0,
            deadband: 0.5,
        }
    }
}

/// Ideal sensible air conditioner. `t_air` is the air temperature the zone
/// would reach without the device and `required` the power that would put
/// it exactly on `t_set`; the result is `required` clipped to capacity, or
/// zero inside the deadband.
pub fn ac_power(t_air: f64, t_set: f64, required: f64, spec: &AcSpec, enabled: bool) -> f64 {
    if !enabled || (t_air - t_set).abs() <= spec.deadband {
        return 0.0;
    }
    required.clamp(-spec.cooling_capacity, spec.heating_capacity)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BufferTank {
    /// kg
    pub water_mass: f64,
    /// K
    pub t_buffer: f64,
    /// K
    pub set_point: f64,
    /// Allowed operating band, K.
    pub band: (f64, f64),
    /// W/K
    pub ua_loss: f64,
}

impl Default for BufferTank {
    fn default() -> Self {
        BufferTank {
            water_mass: 300.0,
            t_buffer: c_to_k(80.0),
            set_point: c_to_k(80.0),
            band: (c_to_k(75.0), c_to_k(85.0)),
            ua_loss: 2.0,
        }
    }
}

impl BufferTank {
    pub fn validate(&self) -> Result<()> {
        if !(self.water_mass > 0.0 && self.water_mass.is_finite()) {
            return Err(Error::invalid("water_mass", "must be > 0"));
        }
        if !(self.band.0 <= self.set_point && self.set_point <= self.band.1) {
            return Err(Error::invalid("set_point", "must lie within the tank band"));
        }
        if !(self.ua_loss >= 0.0) {
            return Err(Error::invalid("ua_loss", "must be >= 0"));
        }
        Ok(())
    }

    /// J/K
    pub fn heat_capacity(&self) -> f64 {
        self.water_mass * CP_WATER
    }

    pub fn standby_loss(&self, t_room: f64) -> f64 {
        self.ua_loss * (self.t_buffer - t_room)
    }
}

/// Explicit energy balance of the well-mixed tank over `dt`.
pub fn buffer_tank_step(tank: &BufferTank, q_in: f64, q_out: f64, t_room: f64, dt: f64) -> BufferTank {
    let net = q_in - q_out - tank.standby_loss(t_room);
    BufferTank {
        t_buffer: tank.t_buffer + net * dt / tank.heat_capacity(),
        ..*tank
    }
}

/// Domestic hot water draw from the buffer, W. Zero when the module is off.
pub fn dhw_draw(enabled: bool, profile_value: f64) -> f64 {
    if enabled {
        profile_value.max(0.0)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn appliance_examples() {
        let r = ApplianceRatios::default();
        assert_eq!(appliance_heat([("dishwasher", 1000.0)], &r).unwrap(), 50.0);
        assert_eq!(appliance_heat([("vehicle", 3000.0)], &r).unwrap(), 0.0);
        assert_eq!(appliance_heat([("fridge", 100.0)], &r).unwrap(), 100.0);
        assert!(matches!(
            appliance_heat([("sauna", 1.0)], &r),
            Err(Error::Config { .. })
        ));
        assert_eq!(r.categories().count(), 15);
    }

    #[test]
    fn ratios_outside_unit_interval_are_rejected() {
        let mut m = BTreeMap::new();
        m.insert("light".to_string(), 1.2);
        assert!(ApplianceRatios::new(m).is_err());
    }

    #[test]
    fn radiator_idle_when_warm() {
        let tank = BufferTank::default();
        let out = radiator_step(c_to_k(22.0), c_to_k(20.0), true, &tank, &RadiatorSpec::default());
        assert_eq!(out, RadiatorOutput::default());
        assert_eq!(emitted_power(0.0, c_to_k(80.0), c_to_k(18.0), 500.0), 0.0);
    }

    #[test]
    fn radiator_full_opening() {
        let tank = BufferTank::default();
        let spec = RadiatorSpec {
            max_mass_flow: 0.05,
            ua_emit: 300.0,
            proportional_band: 2.0,
        };
        let out = radiator_step(c_to_k(18.0), c_to_k(20.0), true, &tank, &spec);
        assert_relative_eq!(out.m_flow, 0.05, epsilon = 1e-12);
        // ε = 1 − exp(−300/209.3) = 0.761 491…, q = ε·209.3·62
        let eps = 1.0 - (-300.0_f64 / 209.3).exp();
        assert_relative_eq!(eps, 0.761_491_2, epsilon = 1e-6);
        assert_relative_eq!(out.q_emit, eps * 209.3 * 62.0, max_relative = 1e-12);
        assert!(out.q_emit <= 0.05 * 4186.0 * 62.0);
        assert!((out.q_emit - 9881.57).abs() < 0.01);
    }

    #[test]
    fn radiator_off_outside_season_or_cold_tank() {
        let spec = RadiatorSpec::default();
        let tank = BufferTank::default();
        assert_eq!(radiator_step(c_to_k(15.0), c_to_k(20.0), false, &tank, &spec).q_emit, 0.0);
        let cold = BufferTank {
            t_buffer: c_to_k(60.0),
            ..tank
        };
        assert_eq!(radiator_step(c_to_k(15.0), c_to_k(20.0), true, &cold, &spec).q_emit, 0.0);
    }

    #[test]
    fn ac_examples() {
        let spec = AcSpec {
            heating_capacity: 2000.0,
            cooling_capacity: 2000.0,
            deadband: 0.5,
        };
        assert_eq!(ac_power(c_to_k(10.0), c_to_k(20.0), 5000.0, &spec, false), 0.0);
        assert_eq!(ac_power(c_to_k(20.0), c_to_k(20.0), 0.0, &spec, true), 0.0);
        assert_eq!(ac_power(c_to_k(26.0), c_to_k(20.0), -8000.0, &spec, true), -2000.0);
        assert_eq!(ac_power(c_to_k(19.0), c_to_k(20.0), 700.0, &spec, true), 700.0);
    }

    #[test]
    fn tank_examples() {
        let tank = BufferTank {
            ua_loss: 0.0,
            ..Default::default()
        };
        assert_eq!(buffer_tank_step(&tank, 0.0, 0.0, c_to_k(20.0), 60.0), tank);
        let next = buffer_tank_step(&tank, 5000.0, 0.0, c_to_k(20.0), 60.0);
        assert_relative_eq!(next.t_buffer - tank.t_buffer, 0.238_891_6, epsilon = 1e-6);
    }

    #[test]
    fn tank_decay_matches_closed_form() {
        // RC decay toward room temperature: T(t) = T_room + ΔT0·exp(−UA·t/(m·c_p))
        let mut tank = BufferTank::default();
        let t_room = c_to_k(20.0);
        let dt = 60.0;
        let steps = 24 * 60;
        for _ in 0..steps {
            tank = buffer_tank_step(&tank, 0.0, 0.0, t_room, dt);
        }
        let tau = 300.0 * 4186.0 / 2.0;
        let exact = t_room + 60.0 * (-(steps as f64) * dt / tau).exp();
        let rel = ((tank.t_buffer - t_room) - (exact - t_room)).abs() / (exact - t_room);
        assert!(rel < 1e-3, "relative deviation {rel}");
    }

    #[test]
    fn dhw_examples() {
        assert_eq!(dhw_draw(false, 2000.0), 0.0);
        assert_eq!(dhw_draw(true, 0.0), 0.0);
        assert_eq!(dhw_draw(true, 2000.0), 2000.0);
    }
}
