//! Scenario configuration (TOML). Temperatures are °C in the file and
//! Kelvin everywhere else. Unknown keys are errors; every error names the
//! path of the offending key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::calendar::HeatingCalendar;
use super::profile::{ApplianceProfile, HeatSeries};
use super::topology::load_topology;
use super::weather::{WeatherSeries, DEFAULT_TARGET_MEAN};
use crate::building::{BuildingSpec, Climate};
use crate::cosim::Execution;
use crate::dhnet::{GroundSpec, NetworkTopology, PidGains, SourceSpec, SubstationSpec, SupplySchedule};
use crate::envelope::{BuildingParams, ConstructionClass, EquipmentFlags, SurfaceKind, SurfaceSpec};
use crate::equipment::{AcSpec, ApplianceRatios, BufferTank, RadiatorSpec};
use crate::error::{Error, Result};
use crate::hiu::{DemandLaw, HxSpec};
use crate::units::{c_to_k, SECONDS_PER_YEAR};

/// Module presence flag, written as the integer 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flag(pub bool);

impl Serialize for Flag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.0 as u8)
    }
}

impl<'de> Deserialize<'de> for Flag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Flag;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("the integer 0 or 1")
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Flag, E> {
                match v {
                    0 => Ok(Flag(false)),
                    1 => Ok(Flag(true)),
                    _ => Err(E::custom(format!("flag must be 0 or 1, got {v}"))),
                }
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Flag, E> {
                self.visit_i64(i64::try_from(v).unwrap_or(i64::MAX))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagsSection {
    #[serde(default = "on")]
    pub radiator: Flag,
    #[serde(default = "on")]
    pub ventilation: Flag,
    #[serde(default = "on")]
    pub air_conditioner: Flag,
    #[serde(default = "on")]
    pub appliances: Flag,
    #[serde(default = "off")]
    pub dhw: Flag,
    #[serde(default = "off")]
    pub pv: Flag,
    #[serde(default = "off")]
    pub battery: Flag,
    #[serde(default = "off")]
    pub heat_pump: Flag,
}

fn on() -> Flag {
    Flag(true)
}

fn off() -> Flag {
    Flag(false)
}

impl Default for FlagsSection {
    fn default() -> Self {
        FlagsSection::from(EquipmentFlags::default())
    }
}

impl From<EquipmentFlags> for FlagsSection {
    fn from(f: EquipmentFlags) -> Self {
        FlagsSection {
            radiator: Flag(f.radiator),
            ventilation: Flag(f.ventilation),
            air_conditioner: Flag(f.air_conditioner),
            appliances: Flag(f.appliances),
            dhw: Flag(f.dhw),
            pv: Flag(f.pv),
            battery: Flag(f.battery),
            heat_pump: Flag(f.heat_pump),
        }
    }
}

impl From<FlagsSection> for EquipmentFlags {
    fn from(f: FlagsSection) -> Self {
        EquipmentFlags {
            radiator: f.radiator.0,
            ventilation: f.ventilation.0,
            air_conditioner: f.air_conditioner.0,
            appliances: f.appliances.0,
            dhw: f.dhw.0,
            pv: f.pv.0,
            battery: f.battery.0,
            heat_pump: f.heat_pump.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    #[default]
    Sequential,
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default)]
    pub t0_s: f64,
    #[serde(default = "default_t_end")]
    pub t_end_s: f64,
    #[serde(default = "default_dt_comm")]
    pub dt_comm_s: f64,
    #[serde(default = "default_substep")]
    pub substep_s: f64,
    #[serde(default = "default_set_point")]
    pub set_point_c: f64,
    #[serde(default = "on")]
    pub adjust_weather: Flag,
    #[serde(default = "default_weather_mean")]
    pub weather_mean_c: f64,
    #[serde(default)]
    pub heating_season: HeatingCalendar,
    #[serde(default)]
    pub execution: ExecutionMode,
}

fn default_t_end() -> f64 {
    SECONDS_PER_YEAR
}
fn default_dt_comm() -> f64 {
    900.0
}
fn default_substep() -> f64 {
    60.0
}
fn default_set_point() -> f64 {
    20.0
}
fn default_weather_mean() -> f64 {
    DEFAULT_TARGET_MEAN
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            t0_s: 0.0,
            t_end_s: default_t_end(),
            dt_comm_s: default_dt_comm(),
            substep_s: default_substep(),
            set_point_c: default_set_point(),
            adjust_weather: on(),
            weather_mean_c: default_weather_mean(),
            heating_season: HeatingCalendar::default(),
            execution: ExecutionMode::Sequential,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilesSection {
    pub weather: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub appliances: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub kind: SurfaceKind,
    pub area_m2: f64,
    pub u_value: f64,
    #[serde(default)]
    pub solar_aperture: f64,
    #[serde(default = "default_irradiance_factor")]
    pub irradiance_factor: f64,
}

fn default_irradiance_factor() -> f64 {
    0.6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiatorSection {
    #[serde(default = "default_radiator_flow")]
    pub max_mass_flow_kg_s: f64,
    #[serde(default = "default_radiator_ua")]
    pub ua_emit_w_k: f64,
    #[serde(default = "default_radiator_band")]
    pub proportional_band_k: f64,
}

fn default_radiator_flow() -> f64 {
    RadiatorSpec::default().max_mass_flow
}
fn default_radiator_ua() -> f64 {
    RadiatorSpec::default().ua_emit
}
fn default_radiator_band() -> f64 {
    RadiatorSpec::default().proportional_band
}

impl Default for RadiatorSection {
    fn default() -> Self {
        RadiatorSection {
            max_mass_flow_kg_s: default_radiator_flow(),
            ua_emit_w_k: default_radiator_ua(),
            proportional_band_k: default_radiator_band(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcSection {
    #[serde(default = "default_ac_heating")]
    pub heating_capacity_w: f64,
    #[serde(default = "default_ac_cooling")]
    pub cooling_capacity_w: f64,
    #[serde(default = "default_ac_deadband")]
    pub deadband_k: f64,
}

fn default_ac_heating() -> f64 {
    AcSpec::default().heating_capacity
}
fn default_ac_cooling() -> f64 {
    AcSpec::default().cooling_capacity
}
fn default_ac_deadband() -> f64 {
    AcSpec::default().deadband
}

impl Default for AcSection {
    fn default() -> Self {
        AcSection {
            heating_capacity_w: default_ac_heating(),
            cooling_capacity_w: default_ac_cooling(),
            deadband_k: default_ac_deadband(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TankSection {
    #[serde(default = "default_tank_mass")]
    pub water_mass_kg: f64,
    #[serde(default = "default_tank_set")]
    pub set_point_c: f64,
    #[serde(default = "default_tank_initial")]
    pub initial_c: f64,
    #[serde(default = "default_band_low")]
    pub band_low_c: f64,
    #[serde(default = "default_band_high")]
    pub band_high_c: f64,
    #[serde(default = "default_tank_ua")]
    pub ua_loss_w_k: f64,
    #[serde(default = "default_approach")]
    pub hx_approach_k: f64,
    #[serde(default = "default_kp")]
    pub demand_k_p: f64,
    #[serde(default = "default_tau")]
    pub demand_tau_s: f64,
}

fn default_tank_mass() -> f64 {
    BufferTank::default().water_mass
}
fn default_tank_set() -> f64 {
    80.0
}
fn default_tank_initial() -> f64 {
    80.0
}
fn default_band_low() -> f64 {
    75.0
}
fn default_band_high() -> f64 {
    85.0
}
fn default_tank_ua() -> f64 {
    BufferTank::default().ua_loss
}
fn default_approach() -> f64 {
    HxSpec::default().approach
}
fn default_kp() -> f64 {
    DemandLaw::default().k_p
}
fn default_tau() -> f64 {
    DemandLaw::default().tau
}

impl Default for TankSection {
    fn default() -> Self {
        TankSection {
            water_mass_kg: default_tank_mass(),
            set_point_c: default_tank_set(),
            initial_c: default_tank_initial(),
            band_low_c: default_band_low(),
            band_high_c: default_band_high(),
            ua_loss_w_k: default_tank_ua(),
            hx_approach_k: default_approach(),
            demand_k_p: default_kp(),
            demand_tau_s: default_tau(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingSection {
    pub id: String,
    #[serde(default)]
    pub label: String,
    /// Floor area of one storey.
    pub floor_area_m2: f64,
    #[serde(default = "default_storeys")]
    pub storeys: u32,
    #[serde(default = "default_construction")]
    pub construction: ConstructionClass,
    /// Defaults to the construction class value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_ms: Option<f64>,
    /// Defaults to the construction class value times the total floor area.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat_capacity_j_k: Option<f64>,
    #[serde(default = "default_f_red")]
    pub f_red: f64,
    #[serde(default = "default_delta_u")]
    pub delta_u_tbr: f64,
    #[serde(default = "default_n_air")]
    pub n_air_rate_per_h: f64,
    #[serde(default = "default_ceiling")]
    pub ceiling_height_m: f64,
    #[serde(default)]
    pub flags: FlagsSection,
    pub surfaces: Vec<SurfaceSection>,
    #[serde(default)]
    pub radiator: RadiatorSection,
    #[serde(default)]
    pub air_conditioner: AcSection,
    #[serde(default)]
    pub tank: TankSection,
}

fn default_storeys() -> u32 {
    1
}
fn default_construction() -> ConstructionClass {
    ConstructionClass::Medium
}
fn default_f_red() -> f64 {
    1.0
}
fn default_delta_u() -> f64 {
    0.1
}
fn default_n_air() -> f64 {
    0.6
}
fn default_ceiling() -> f64 {
    2.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupplySection {
    Constant {
        t_supply_c: f64,
    },
    Compensated {
        t_out_design_c: f64,
        t_supply_design_c: f64,
        t_out_base_c: f64,
        t_supply_base_c: f64,
    },
}

impl Default for SupplySection {
    fn default() -> Self {
        SupplySection::Constant { t_supply_c: 105.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_grid_id")]
    pub id: String,
    #[serde(default)]
    pub supply: SupplySection,
    #[serde(default = "default_dp_set")]
    pub dp_set_critical_pa: f64,
    #[serde(default = "default_max_head")]
    pub max_head_pa: f64,
    #[serde(default = "default_ground_mean")]
    pub ground_mean_c: f64,
    #[serde(default = "default_ground_amplitude")]
    pub ground_amplitude_k: f64,
    #[serde(default = "default_ground_phase")]
    pub ground_phase_day: f64,
    #[serde(default = "default_delta_t1")]
    pub delta_t1_k: f64,
    #[serde(default = "default_supply_level")]
    pub supply_level_c: f64,
    #[serde(default = "default_m_max")]
    pub m_max_kg_s: f64,
    #[serde(default = "default_pid_kp")]
    pub pid_kp: f64,
    #[serde(default = "default_pid_ki")]
    pub pid_ki: f64,
    #[serde(default)]
    pub pid_kd: f64,
}

fn default_grid_id() -> String {
    "grid".into()
}
fn default_dp_set() -> f64 {
    SourceSpec::default().dp_set_critical
}
fn default_max_head() -> f64 {
    SourceSpec::default().max_head
}
fn default_ground_mean() -> f64 {
    10.0
}
fn default_ground_amplitude() -> f64 {
    GroundSpec::default().amplitude
}
fn default_ground_phase() -> f64 {
    GroundSpec::default().phase_day
}
fn default_delta_t1() -> f64 {
    SubstationSpec::default().delta_t1
}
fn default_supply_level() -> f64 {
    90.0
}
fn default_m_max() -> f64 {
    SubstationSpec::default().m_max
}
fn default_pid_kp() -> f64 {
    SubstationSpec::default().pid.kp
}
fn default_pid_ki() -> f64 {
    SubstationSpec::default().pid.ki
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub simulation: SimulationSection,
    pub files: FilesSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub appliance_ratios: Option<BTreeMap<String, f64>>,
    pub buildings: Vec<BuildingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.inner().message().to_string())
        })
    }

    /// Fills every defaulted value and makes file paths absolute, so the
    /// result reloads to itself.
    pub fn resolved(&self, base_dir: &Path) -> ScenarioFile {
        let abs = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base_dir.join(p) };
        let mut out = self.clone();
        out.files.weather = abs(&self.files.weather);
        out.files.appliances = self.files.appliances.as_ref().map(abs);
        out.files.topology = self.files.topology.as_ref().map(abs);
        out.appliance_ratios = Some(
            self.appliance_ratios
                .clone()
                .unwrap_or_else(|| ApplianceRatios::default().to_map()),
        );
        if out.files.topology.is_some() && out.grid.is_none() {
            out.grid = Some(GridSection::parse_default());
        }
        for b in &mut out.buildings {
            b.f_ms.get_or_insert(b.construction.mass_area_factor());
            b.heat_capacity_j_k
                .get_or_insert(b.construction.heat_capacity_per_area() * b.floor_area_m2 * b.storeys as f64);
        }
        out
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("", e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub id: String,
    pub topology: NetworkTopology,
    pub source: SourceSpec,
    pub ground: GroundSpec,
    pub substation: SubstationSpec,
}

/// A validated, ready-to-run scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub resolved: ScenarioFile,
    pub t0: f64,
    pub t_end: f64,
    pub dt_comm: f64,
    pub execution: Execution,
    pub climate: Climate,
    pub buildings: Vec<BuildingSpec>,
    pub grid: Option<GridConfig>,
}

fn building_spec(b: &BuildingSection, i: usize) -> Result<BuildingSpec> {
    let at = |field: &str| format!("buildings[{i}].{field}");
    if b.id.is_empty() || b.id.contains('.') || b.id.contains(char::is_whitespace) {
        return Err(Error::config(at("id"), "ids must be non-empty without dots or whitespace"));
    }
    let params = BuildingParams {
        surfaces: b
            .surfaces
            .iter()
            .map(|s| SurfaceSpec {
                kind: s.kind,
                area: s.area_m2,
                u_value: s.u_value,
                solar_aperture: s.solar_aperture,
                irradiance_factor: s.irradiance_factor,
            })
            .collect(),
        floor_area: b.floor_area_m2,
        storeys: b.storeys,
        f_ms: b.f_ms.unwrap_or(b.construction.mass_area_factor()),
        f_red: b.f_red,
        delta_u_tbr: b.delta_u_tbr,
        n_air_rate: b.n_air_rate_per_h,
        ceiling_height: b.ceiling_height_m,
        heat_capacity: b
            .heat_capacity_j_k
            .unwrap_or(b.construction.heat_capacity_per_area() * b.floor_area_m2 * b.storeys as f64),
        flags: b.flags.into(),
    };
    let wrap = |e: Error| match e {
        Error::InvalidParameter { name, reason } => Error::config(at(&name), reason),
        other => Error::config(at("surfaces"), other.to_string()),
    };
    params.validate().map_err(wrap)?;
    crate::envelope::derive_conductances(&params).map_err(wrap)?;

    let radiator = RadiatorSpec {
        max_mass_flow: b.radiator.max_mass_flow_kg_s,
        ua_emit: b.radiator.ua_emit_w_k,
        proportional_band: b.radiator.proportional_band_k,
    };
    radiator.validate().map_err(|e| Error::config(at("radiator"), e.to_string()))?;
    let ac = AcSpec {
        heating_capacity: b.air_conditioner.heating_capacity_w,
        cooling_capacity: b.air_conditioner.cooling_capacity_w,
        deadband: b.air_conditioner.deadband_k,
    };
    if ac.heating_capacity < 0.0 || ac.cooling_capacity < 0.0 || ac.deadband < 0.0 {
        return Err(Error::config(at("air_conditioner"), "capacities and deadband must be >= 0"));
    }
    let t = &b.tank;
    let tank = BufferTank {
        water_mass: t.water_mass_kg,
        t_buffer: c_to_k(t.initial_c),
        set_point: c_to_k(t.set_point_c),
        band: (c_to_k(t.band_low_c), c_to_k(t.band_high_c)),
        ua_loss: t.ua_loss_w_k,
    };
    tank.validate().map_err(|e| Error::config(at("tank"), e.to_string()))?;
    let hx = HxSpec {
        approach: t.hx_approach_k,
    };
    hx.validate().map_err(|e| Error::config(at("tank.hx_approach_k"), e.to_string()))?;
    if !(t.demand_tau_s > 0.0 && t.demand_k_p >= 0.0) {
        return Err(Error::config(at("tank"), "demand_tau_s must be > 0 and demand_k_p >= 0"));
    }
    Ok(BuildingSpec {
        id: b.id.clone(),
        params,
        radiator,
        ac,
        tank,
        hx,
        demand: DemandLaw {
            k_p: t.demand_k_p,
            tau: t.demand_tau_s,
        },
    })
}

fn grid_config(g: &GridSection, topology: NetworkTopology) -> Result<GridConfig> {
    let supply = match g.supply {
        SupplySection::Constant { t_supply_c } => SupplySchedule::Constant {
            t_supply: c_to_k(t_supply_c),
        },
        SupplySection::Compensated {
            t_out_design_c,
            t_supply_design_c,
            t_out_base_c,
            t_supply_base_c,
        } => SupplySchedule::Compensated {
            t_out_design: c_to_k(t_out_design_c),
            t_supply_design: c_to_k(t_supply_design_c),
            t_out_base: c_to_k(t_out_base_c),
            t_supply_base: c_to_k(t_supply_base_c),
        },
    };
    let source = SourceSpec {
        supply,
        dp_set_critical: g.dp_set_critical_pa,
        max_head: g.max_head_pa,
    };
    source.validate().map_err(|e| Error::config("grid", e.to_string()))?;
    let substation = SubstationSpec {
        delta_t1: g.delta_t1_k,
        supply_level: c_to_k(g.supply_level_c),
        m_max: g.m_max_kg_s,
        pid: PidGains {
            kp: g.pid_kp,
            ki: g.pid_ki,
            kd: g.pid_kd,
        },
    };
    substation.validate().map_err(|e| Error::config("grid", e.to_string()))?;
    Ok(GridConfig {
        id: g.id.clone(),
        topology,
        source,
        ground: GroundSpec {
            mean: c_to_k(g.ground_mean_c),
            amplitude: g.ground_amplitude_k,
            phase_day: g.ground_phase_day,
        },
        substation,
    })
}

impl Scenario {
    /// Validates a parsed file and loads the data it references. Relative
    /// paths are taken from `base_dir`.
    pub fn from_file(file: &ScenarioFile, base_dir: &Path) -> Result<Scenario> {
        let resolved = file.resolved(base_dir);
        let sim = &resolved.simulation;
        let execution = match sim.execution {
            ExecutionMode::Sequential => Execution::Sequential,
            ExecutionMode::Parallel => Execution::Parallel,
        };
        let steps = crate::cosim::MasterConfig::new(sim.t0_s, sim.t_end_s, sim.dt_comm_s);
        steps
            .steps()
            .map_err(|e| Error::config("simulation", e.to_string()))?;
        if !(sim.substep_s > 0.0 && sim.substep_s <= crate::envelope::MAX_SUBSTEP) {
            return Err(Error::config("simulation.substep_s", "must be within (0, 60]"));
        }

        let mut weather = WeatherSeries::load(&resolved.files.weather)?;
        if sim.adjust_weather.0 {
            weather.adjust_mean(sim.weather_mean_c);
        }
        if !weather.covers(sim.t0_s, sim.t_end_s) {
            return Err(Error::config("files.weather", "series does not cover the simulated horizon"));
        }

        let ratio_map = resolved.appliance_ratios.clone().unwrap_or_default();
        let ratios = ApplianceRatios::new(ratio_map)?;
        let appliance_heat = match &resolved.files.appliances {
            Some(p) => ApplianceProfile::load(p)?.heat(&ratios)?,
            None => HeatSeries::zero(),
        };

        let mut buildings = Vec::with_capacity(resolved.buildings.len());
        let mut ids = std::collections::BTreeSet::new();
        for (i, b) in resolved.buildings.iter().enumerate() {
            if !ids.insert(b.id.clone()) {
                return Err(Error::config(format!("buildings[{i}].id"), format!("duplicate id `{}`", b.id)));
            }
            buildings.push(building_spec(b, i)?);
        }

        let grid = match (&resolved.files.topology, &resolved.grid) {
            (Some(path), grid) => {
                let topology = load_topology(path)?;
                let mut bound = std::collections::BTreeSet::new();
                for k in 0..topology.substations().len() {
                    let b = topology.substation_building(k);
                    if !ids.contains(b) {
                        return Err(Error::config(
                            "files.topology",
                            format!("substation binds to unknown building `{b}`"),
                        ));
                    }
                    if !bound.insert(b.to_string()) {
                        return Err(Error::config(
                            "files.topology",
                            format!("building `{b}` is bound to more than one substation"),
                        ));
                    }
                }
                let section = grid.clone().unwrap_or_else(GridSection::parse_default);
                if ids.contains(&section.id) {
                    return Err(Error::config("grid.id", "grid id collides with a building id"));
                }
                Some(grid_config(&section, topology)?)
            }
            (None, Some(_)) => return Err(Error::config("grid", "a grid section needs files.topology")),
            (None, None) => None,
        };

        let climate = Climate {
            weather: Arc::new(weather),
            appliance_heat: Arc::new(appliance_heat),
            calendar: sim.heating_season,
            set_point: c_to_k(sim.set_point_c),
            substep: sim.substep_s,
        };
        Ok(Scenario {
            t0: sim.t0_s,
            t_end: sim.t_end_s,
            dt_comm: sim.dt_comm_s,
            execution,
            climate,
            buildings,
            grid,
            resolved,
        })
    }

    pub fn building(&self, id: &str) -> Option<&BuildingSpec> {
        self.buildings.iter().find(|b| b.id == id)
    }
}

impl GridSection {
    fn parse_default() -> GridSection {
        toml::from_str("").expect("every grid key has a default")
    }
}

/// Reads, validates and resolves a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = ScenarioFile::parse(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Scenario::from_file(&file, &base)
}
