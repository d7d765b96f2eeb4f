//! One building as a co-simulation participant: 5R1C envelope, radiator,
//! ventilation, ideal air conditioner, appliances and the heat interface
//! unit, integrated with fixed internal sub-steps.

use std::sync::Arc;

use crate::cosim::{Location, PortSpec, Simulator, SimulatorDescriptor};
use crate::envelope::{
    air_temperature_after, derive_conductances, power_for_air_temperature, split_gains, step_thermal, Boundary, BuildingParams,
    ConductanceSet, ThermalState, MAX_SUBSTEP, TEMPERATURE_BAND,
};
use crate::equipment::{ac_power, dhw_draw, radiator_step, AcSpec, BufferTank, RadiatorSpec};
use crate::error::{Error, Result};
use crate::hiu::{
    DemandLaw, Hiu, HiuInputs, HxSpec, PORT_M_FLOW, PORT_Q_DEMAND, PORT_T_BUFFER, PORT_T_RET_REQUEST, PORT_T_SUP,
};
use crate::scenario::calendar::{heating_season, HeatingCalendar};
use crate::scenario::profile::HeatSeries;
use crate::scenario::weather::WeatherSeries;
use crate::units::c_to_k;

/// Monitoring outputs after the two HIU outputs. Powers are means over the
/// exchange step; losses are positive when heat leaves the building.
pub const MONITOR_OUTPUTS: [(&str, &str); 10] = [
    ("T_air", "K"),
    ("T_out", "K"),
    ("Q_radiator", "W"),
    ("Q_ac", "W"),
    ("Q_ven", "W"),
    ("Q_tr", "W"),
    ("Q_hx", "W"),
    ("Q_internal", "W"),
    ("Q_solar", "W"),
    ("T_mas", "K"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct BuildingSpec {
    pub id: String,
    pub params: BuildingParams,
    pub radiator: RadiatorSpec,
    pub ac: AcSpec,
    pub tank: BufferTank,
    pub hx: HxSpec,
    pub demand: DemandLaw,
}

/// Boundary data shared by all buildings of a scenario.
#[derive(Debug, Clone)]
pub struct Climate {
    pub weather: Arc<WeatherSeries>,
    pub appliance_heat: Arc<HeatSeries>,
    pub calendar: HeatingCalendar,
    /// Indoor set point, K.
    pub set_point: f64,
    /// Internal integration step, s.
    pub substep: f64,
}

pub struct BuildingSimulator {
    spec: BuildingSpec,
    climate: Climate,
    conductances: ConductanceSet,
    descriptor: SimulatorDescriptor,
    state: ThermalState,
    hiu: Hiu,
}

impl BuildingSimulator {
    pub fn new(spec: BuildingSpec, climate: Climate) -> Result<Self> {
        let conductances = derive_conductances(&spec.params)?;
        spec.radiator.validate()?;
        spec.tank.validate()?;
        spec.hx.validate()?;
        if !(climate.substep > 0.0 && climate.substep <= MAX_SUBSTEP) {
            return Err(Error::invalid(
                "substep",
                format!("must be within (0, {MAX_SUBSTEP}] s, got {}", climate.substep),
            ));
        }
        let mut outputs = vec![PortSpec::new(PORT_T_BUFFER, "K", 0.0), PortSpec::new(PORT_Q_DEMAND, "W", 0.0)];
        outputs.extend(MONITOR_OUTPUTS.iter().map(|(n, u)| PortSpec::new(*n, *u, 0.0)));
        let descriptor = SimulatorDescriptor {
            id: spec.id.clone(),
            inputs: vec![
                PortSpec::new(PORT_T_SUP, "K", spec.tank.set_point),
                PortSpec::new(PORT_M_FLOW, "kg/s", 0.0),
                PortSpec::new(PORT_T_RET_REQUEST, "K", spec.tank.set_point),
            ],
            outputs,
            location: Location::InProcess,
        };
        descriptor.validate()?;
        let state = ThermalState::uniform(climate.set_point, spec.params.heat_capacity);
        let hiu = Hiu::new(spec.tank, spec.hx, spec.demand);
        Ok(BuildingSimulator {
            spec,
            climate,
            conductances,
            descriptor,
            state,
            hiu,
        })
    }

    pub fn conductances(&self) -> &ConductanceSet {
        &self.conductances
    }

    pub fn state(&self) -> &ThermalState {
        &self.state
    }

    pub fn tank(&self) -> &BufferTank {
        &self.hiu.tank
    }

    fn check_band(&self, t: f64) -> Result<()> {
        let (lo, hi) = TEMPERATURE_BAND;
        for (name, v) in [("T_air", self.state.t_air), ("T_mas", self.state.t_mas), ("T_buffer", self.hiu.tank.t_buffer)] {
            if !(lo..=hi).contains(&v) {
                return Err(Error::Numeric(format!("{name} = {v} K left the physical band at t = {t} s")));
            }
        }
        Ok(())
    }
}

impl Simulator for BuildingSimulator {
    fn descriptor(&self) -> &SimulatorDescriptor {
        &self.descriptor
    }

    fn initialize(&mut self, _t0: f64) -> Result<()> {
        self.state = ThermalState::uniform(self.climate.set_point, self.spec.params.heat_capacity);
        self.hiu = Hiu::new(self.spec.tank, self.spec.hx, self.spec.demand);
        Ok(())
    }

    fn step(&mut self, t: f64, dt: f64, inputs: &[f64]) -> Result<Vec<f64>> {
        let grid = HiuInputs {
            t_sup: inputs[0],
            m_flow: inputs[1].max(0.0),
            t_ret_request: inputs[2],
        };
        let flags = self.spec.params.flags;
        let set = self.climate.set_point;
        let c = self.conductances;
        let n = (dt / self.climate.substep).ceil().max(1.0) as usize;
        let h = dt / n as f64;

        let mut sums = [0.0; MONITOR_OUTPUTS.len()];
        for i in 0..n {
            let ts = t + (i as f64 + 0.5) * h;
            let t_ext = self.climate.weather.temperature_at(ts);
            let phi_int = if flags.appliances {
                self.climate.appliance_heat.at(ts)
            } else {
                0.0
            };
            let phi_sol = self.spec.params.solar_gain(self.climate.weather.ghi_at(ts));
            let injections = split_gains(phi_int, phi_sol, &c);

            let mut boundary = Boundary {
                t_ext,
                t_sup_air: t_ext,
                injections,
                q_space: 0.0,
            };
            let q_rad = if flags.radiator && heating_season(ts, &self.climate.calendar) {
                consistent_radiator_power(&self.state, &c, &boundary, h, set, &self.hiu.tank, &self.spec.radiator)
            } else {
                0.0
            };
            boundary.q_space = q_rad;
            let q_ac = if flags.air_conditioner {
                let free = power_for_air_temperature(&self.state, &c, &boundary, h, set);
                let required = free - q_rad;
                // air temperature the zone would reach with the radiator alone
                let t_free = air_temperature_after(&self.state, &c, &boundary, h);
                ac_power(t_free, set, required, &self.spec.ac, true)
            } else {
                0.0
            };
            boundary.q_space = q_rad + q_ac;
            let (next, flows) = step_thermal(&self.state, &c, &boundary, h)?;
            self.state = next;

            let draw = q_rad + dhw_draw(flags.dhw, 0.0);
            let hx = self.hiu.step(&grid, draw, self.state.t_air, h);

            let sample = [
                flows.t_air_mean,
                t_ext,
                q_rad,
                q_ac,
                -flows.ventilation,
                -flows.transmission(),
                hx.q_hx,
                phi_int,
                phi_sol,
                self.state.t_mas,
            ];
            for (s, v) in sums.iter_mut().zip(sample) {
                *s += v * h;
            }
        }
        self.hiu.finish_interval();
        self.check_band(t + dt)?;

        let hiu = self.hiu.outputs();
        let mut out = Vec::with_capacity(2 + sums.len());
        out.push(hiu.t_buffer);
        out.push(hiu.q_demand);
        out.extend(sums.iter().map(|s| s / dt));
        Ok(out)
    }
}

/// Radiator power evaluated at the air temperature it produces. The air
/// node has no capacity, so evaluating the valve at the previous air
/// temperature makes a stiff proportional loop chatter between fully open
/// and closed. The end-of-step air temperature is affine in the power and
/// the emitted power falls with air temperature, so the fixed point is
/// unique and bisection finds it.
fn consistent_radiator_power(
    state: &ThermalState,
    c: &ConductanceSet,
    boundary: &Boundary,
    h: f64,
    set: f64,
    tank: &BufferTank,
    spec: &RadiatorSpec,
) -> f64 {
    const PROBE: f64 = 1000.0;
    let free = Boundary {
        q_space: 0.0,
        ..*boundary
    };
    let t_free = air_temperature_after(state, c, &free, h);
    let slope = (air_temperature_after(state, c, &Boundary { q_space: PROBE, ..free }, h) - t_free) / PROBE;
    let emit = |t_air: f64| radiator_step(t_air, set, true, tank, spec).q_emit;
    if t_free >= set || emit(t_free) == 0.0 {
        return 0.0;
    }
    // residual t_free + slope·q(T) − T: non-negative at t_free, negative at set
    let (mut lo, mut hi) = (t_free, set);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if t_free + slope * emit(mid) - mid >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    emit(0.5 * (lo + hi))
}

/// Default climate for tests and tools: constant weather, no appliances.
pub fn constant_climate(t_out_c: f64, ghi: f64) -> Climate {
    Climate {
        weather: Arc::new(WeatherSeries::constant(t_out_c, ghi, 900.0)),
        appliance_heat: Arc::new(HeatSeries::zero()),
        calendar: HeatingCalendar::default(),
        set_point: c_to_k(20.0),
        substep: MAX_SUBSTEP,
    }
}
