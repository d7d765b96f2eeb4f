//! Single-zone 5R1C resistance–capacitance envelope.
//!
//! Three interior nodes (air, internal surface, thermal mass) are linked to
//! the outdoor air and the ventilation supply air by five conductances:
//!
//! ```text
//!   T_sup ──H_ve── T_air ──H_the── T_sur ──H_mas── T_mas ──H_tra── T_ext
//!                                    │                │
//!                                  H_win            C_m
//!                                    │
//!                                  T_ext
//! ```
//!
//! Only the mass node stores heat. The air and surface temperatures are
//! eliminated algebraically each sub-step and the mass temperature advances
//! with a backward-Euler update, so every step is unconditionally stable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{C_AIR, J_PER_KWH, RHO_AIR, SECONDS_PER_HOUR};

/// Air-to-surface heat transfer coefficient, W/(m²K).
pub const H_AIR_SURFACE: f64 = 3.45;
/// Surface-to-mass heat transfer coefficient, W/(m²K).
pub const H_SURFACE_MASS: f64 = 9.1;
/// Upper bound on the internal integration step, s.
pub const MAX_SUBSTEP: f64 = 60.0;
/// Plausible temperature band for any node during a run, K.
pub const TEMPERATURE_BAND: (f64, f64) = (200.0, 400.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Roof,
    Wall,
    Floor,
    Window,
}

impl SurfaceKind {
    /// Temperature adjustment factor b_tr: ground-facing floors see half the
    /// indoor/outdoor difference.
    pub fn adjustment(self) -> f64 {
        match self {
            SurfaceKind::Floor => 0.5,
            _ => 1.0,
        }
    }

    pub fn is_opaque(self) -> bool {
        self != SurfaceKind::Window
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    /// m²
    pub area: f64,
    /// W/(m²K)
    pub u_value: f64,
    /// Effective g-value times shading factor. Windows only.
    #[serde(default)]
    pub solar_aperture: f64,
    /// Ratio of irradiance on the surface plane to global horizontal.
    #[serde(default = "default_irradiance_factor")]
    pub irradiance_factor: f64,
}

fn default_irradiance_factor() -> f64 {
    0.6
}

impl SurfaceSpec {
    pub fn new(kind: SurfaceKind, area: f64, u_value: f64) -> Self {
        SurfaceSpec {
            kind,
            area,
            u_value,
            solar_aperture: 0.0,
            irradiance_factor: default_irradiance_factor(),
        }
    }

    pub fn with_aperture(mut self, aperture: f64) -> Self {
        self.solar_aperture = aperture;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(Error::invalid("area", format!("must be > 0, got {}", self.area)));
        }
        if !(self.u_value > 0.0 && self.u_value.is_finite()) {
            return Err(Error::invalid(
                "u_value",
                format!("must be > 0, got {}", self.u_value),
            ));
        }
        if !(0.0..=1.0).contains(&self.solar_aperture) {
            return Err(Error::invalid(
                "solar_aperture",
                format!("must be within [0, 1], got {}", self.solar_aperture),
            ));
        }
        if !(self.irradiance_factor >= 0.0 && self.irradiance_factor.is_finite()) {
            return Err(Error::invalid("irradiance_factor", "must be >= 0"));
        }
        Ok(())
    }
}

/// Construction class with the standard per-floor-area effective heat
/// capacities and mass-area factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionClass {
    VeryLight,
    Light,
    Medium,
    Heavy,
    VeryHeavy,
}

impl ConstructionClass {
    /// J/(m²K) of floor area.
    pub fn heat_capacity_per_area(self) -> f64 {
        match self {
            ConstructionClass::VeryLight => 80_000.0,
            ConstructionClass::Light => 110_000.0,
            ConstructionClass::Medium => 165_000.0,
            ConstructionClass::Heavy => 260_000.0,
            ConstructionClass::VeryHeavy => 370_000.0,
        }
    }

    /// Mass-area factor f_ms.
    pub fn mass_area_factor(self) -> f64 {
        match self {
            ConstructionClass::Heavy => 3.0,
            ConstructionClass::VeryHeavy => 3.5,
            _ => 2.5,
        }
    }
}

/// Presence flags for the optional building modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquipmentFlags {
    pub radiator: bool,
    pub ventilation: bool,
    pub air_conditioner: bool,
    pub appliances: bool,
    pub dhw: bool,
    pub pv: bool,
    pub battery: bool,
    pub heat_pump: bool,
}

impl Default for EquipmentFlags {
    fn default() -> Self {
        EquipmentFlags {
            radiator: true,
            ventilation: true,
            air_conditioner: true,
            appliances: true,
            dhw: false,
            pv: false,
            battery: false,
            heat_pump: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingParams {
    pub surfaces: Vec<SurfaceSpec>,
    /// Floor area of one storey, m².
    pub floor_area: f64,
    pub storeys: u32,
    pub f_ms: f64,
    /// Temperature reduction factor.
    pub f_red: f64,
    /// Thermal bridging surcharge, W/(m²K).
    pub delta_u_tbr: f64,
    /// Air change rate before reduction, 1/h.
    pub n_air_rate: f64,
    /// m
    pub ceiling_height: f64,
    /// Effective heat capacity of the mass node, J/K.
    pub heat_capacity: f64,
    pub flags: EquipmentFlags,
}

impl BuildingParams {
    pub fn validate(&self) -> Result<()> {
        if self.surfaces.is_empty() {
            return Err(Error::invalid("surfaces", "at least one surface is required"));
        }
        for s in &self.surfaces {
            s.validate()?;
        }
        let positive = [
            ("floor_area", self.floor_area),
            ("f_ms", self.f_ms),
            ("ceiling_height", self.ceiling_height),
            ("heat_capacity", self.heat_capacity),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.f_red > 0.0 && self.f_red <= 1.0) {
            return Err(Error::invalid(
                "f_red",
                format!("must be within (0, 1], got {}", self.f_red),
            ));
        }
        if self.storeys < 1 {
            return Err(Error::invalid("storeys", "must be >= 1"));
        }
        if !(self.n_air_rate >= 0.0 && self.n_air_rate.is_finite()) {
            return Err(Error::invalid("n_air_rate", "must be >= 0"));
        }
        if !(self.delta_u_tbr >= 0.0 && self.delta_u_tbr.is_finite()) {
            return Err(Error::invalid("delta_u_tbr", "must be >= 0"));
        }
        Ok(())
    }

    pub fn area_of(&self, kind: SurfaceKind) -> f64 {
        self.surfaces
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.area)
            .sum()
    }

    /// Conditioned air volume, m³.
    pub fn volume(&self) -> f64 {
        self.floor_area * self.ceiling_height * self.storeys as f64
    }

    /// Ventilation air mass flow after the temperature reduction, kg/s.
    pub fn air_mass_flow(&self) -> f64 {
        if !self.flags.ventilation {
            return 0.0;
        }
        self.n_air_rate * self.f_red * self.volume() * RHO_AIR / SECONDS_PER_HOUR
    }

    /// Transmission heat transfer coefficient Σ A·U_eq,red, W/K.
    pub fn transmission_coefficient(&self) -> Result<f64> {
        self.surfaces.iter().try_fold(0.0, |acc, s| {
            Ok(acc + s.area * effective_u(s, self.f_red, self.delta_u_tbr)?)
        })
    }

    /// Solar gain for a given global horizontal irradiance, W.
    pub fn solar_gain(&self, ghi: f64) -> f64 {
        self.surfaces
            .iter()
            .filter(|s| s.kind == SurfaceKind::Window)
            .map(|s| s.solar_aperture * s.area * s.irradiance_factor * ghi.max(0.0))
            .sum()
    }
}

/// Equivalent reduced U-value `(b·U + ΔU_tbr)·F_red`.
pub fn effective_u(surface: &SurfaceSpec, f_red: f64, delta_u_tbr: f64) -> Result<f64> {
    surface.validate()?;
    if !(f_red > 0.0 && f_red <= 1.0) {
        return Err(Error::invalid("f_red", format!("must be within (0, 1], got {f_red}")));
    }
    Ok((surface.kind.adjustment() * surface.u_value + delta_u_tbr) * f_red)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConductanceSet {
    pub h_win: f64,
    pub h_op: f64,
    pub h_tra: f64,
    pub h_mas: f64,
    pub h_the: f64,
    pub h_ve: f64,
    pub a_tot: f64,
    pub a_mas: f64,
}

impl ConductanceSet {
    /// Steady-state conductance from the air node to the exterior with the
    /// surface and mass nodes eliminated, W/K.
    pub fn air_to_exterior(&self) -> f64 {
        let envelope = self.h_win + 1.0 / (1.0 / self.h_tra + 1.0 / self.h_mas);
        self.h_ve + 1.0 / (1.0 / self.h_the + 1.0 / envelope)
    }
}

pub fn derive_conductances(params: &BuildingParams) -> Result<ConductanceSet> {
    params.validate()?;
    let mut h_win = 0.0;
    let mut h_op = 0.0;
    for s in &params.surfaces {
        let h = s.area * effective_u(s, params.f_red, params.delta_u_tbr)?;
        if s.kind.is_opaque() {
            h_op += h;
        } else {
            h_win += h;
        }
    }
    let h_mas = H_SURFACE_MASS * params.f_ms * params.floor_area;
    if h_op >= h_mas {
        return Err(Error::DegenerateNetwork { h_op, h_mas });
    }
    let h_tra = 1.0 / (1.0 / h_op - 1.0 / h_mas);

    let n = params.storeys as f64;
    let a_tot = params.area_of(SurfaceKind::Roof)
        + params.area_of(SurfaceKind::Wall)
        + (2.0 * n - 1.0) * params.area_of(SurfaceKind::Floor)
        + params.area_of(SurfaceKind::Window);
    let h_the = H_AIR_SURFACE * a_tot;
    let h_ve = params.air_mass_flow() * C_AIR;

    Ok(ConductanceSet {
        h_win,
        h_op,
        h_tra,
        h_mas,
        h_the,
        h_ve,
        a_tot,
        a_mas: params.f_ms * params.floor_area,
    })
}

/// Heat injected at the air, surface and mass nodes, W.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeInjections {
    pub phi_ia: f64,
    pub phi_st: f64,
    pub phi_m: f64,
}

impl NodeInjections {
    pub fn total(&self) -> f64 {
        self.phi_ia + self.phi_st + self.phi_m
    }
}

/// Half of the internal gains go to the air node; the rest, with all solar
/// gains, is shared between mass and surface by the mass-area ratio.
pub fn split_gains(phi_internal: f64, phi_solar: f64, c: &ConductanceSet) -> NodeInjections {
    let phi_ia = 0.5 * phi_internal;
    let radiant = 0.5 * phi_internal + phi_solar;
    let mass_share = (c.a_mas / c.a_tot).clamp(0.0, 1.0);
    let phi_m = mass_share * radiant;
    NodeInjections {
        phi_ia,
        phi_st: radiant - phi_m,
        phi_m,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    pub t_air: f64,
    pub t_sur: f64,
    pub t_mas: f64,
    pub c_m: f64,
}

impl ThermalState {
    pub fn uniform(t: f64, c_m: f64) -> Self {
        ThermalState {
            t_air: t,
            t_sur: t,
            t_mas: t,
            c_m,
        }
    }

    pub fn in_band(&self) -> bool {
        let (lo, hi) = TEMPERATURE_BAND;
        [self.t_air, self.t_sur, self.t_mas]
            .iter()
            .all(|t| (lo..=hi).contains(t))
    }
}

/// Time-averaged heat flows over one call to [`step_thermal`], W. Signs
/// follow the direction into the zone; [`accumulate_losses`] flips them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowRecord {
    /// Ventilation flow h_ve·(T_sup − T_air).
    pub ventilation: f64,
    /// h_win·(T_ext − T_sur).
    pub window: f64,
    /// h_tra·(T_ext − T_mas).
    pub opaque: f64,
    /// Net power into the mass node.
    pub mass_net: f64,
    /// Mean air temperature, K.
    pub t_air_mean: f64,
}

impl FlowRecord {
    pub fn transmission(&self) -> f64 {
        self.window + self.opaque
    }
}

/// Boundary conditions held constant over one envelope step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub t_ext: f64,
    pub t_sup_air: f64,
    pub injections: NodeInjections,
    /// Space heating (+) or cooling (−) delivered to the air node, W.
    pub q_space: f64,
}

/// One backward-Euler sub-step. Returns the new state; the algebraic nodes
/// are consistent with the new mass temperature.
fn implicit_substep(
    state: &ThermalState,
    c: &ConductanceSet,
    b: &Boundary,
    dt: f64,
) -> ThermalState {
    let inj = &b.injections;
    let a = c.h_ve + c.h_the;
    let r1 = c.h_ve * b.t_sup_air + inj.phi_ia + b.q_space;
    let r2 = c.h_win * b.t_ext + inj.phi_st;
    let e = c.h_win + c.h_mas + c.h_the * c.h_ve / a;
    let alpha = (r2 + c.h_the * r1 / a) / e;
    let beta = c.h_mas / e;

    let lhs = state.c_m / dt + c.h_mas * (1.0 - beta) + c.h_tra;
    let rhs = state.c_m * state.t_mas / dt + c.h_mas * alpha + c.h_tra * b.t_ext + inj.phi_m;
    let t_mas = rhs / lhs;
    let t_sur = alpha + beta * t_mas;
    let t_air = (r1 + c.h_the * t_sur) / a;
    ThermalState {
        t_air,
        t_sur,
        t_mas,
        c_m: state.c_m,
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(name.to_string()))
    }
}

/// Advances the envelope by `dt` seconds, sub-stepping at most
/// [`MAX_SUBSTEP`] s at a time.
pub fn step_thermal(
    state: &ThermalState,
    c: &ConductanceSet,
    boundary: &Boundary,
    dt: f64,
) -> Result<(ThermalState, FlowRecord)> {
    check_finite("t_ext", boundary.t_ext)?;
    check_finite("t_sup_air", boundary.t_sup_air)?;
    check_finite("q_space", boundary.q_space)?;
    check_finite("phi", boundary.injections.total())?;
    check_finite("t_mas", state.t_mas)?;
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("must be >= 0, got {dt}")));
    }
    if dt == 0.0 {
        return Ok((*state, instantaneous_flows(state, c, boundary)));
    }

    let n = (dt / MAX_SUBSTEP).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut s = *state;
    let mut acc = FlowRecord::default();
    for _ in 0..n {
        s = implicit_substep(&s, c, boundary, h);
        let f = instantaneous_flows(&s, c, boundary);
        acc.ventilation += f.ventilation * h;
        acc.window += f.window * h;
        acc.opaque += f.opaque * h;
        acc.mass_net += f.mass_net * h;
        acc.t_air_mean += s.t_air * h;
    }
    check_finite("t_mas", s.t_mas)?;
    let mean = FlowRecord {
        ventilation: acc.ventilation / dt,
        window: acc.window / dt,
        opaque: acc.opaque / dt,
        mass_net: acc.mass_net / dt,
        t_air_mean: acc.t_air_mean / dt,
    };
    Ok((s, mean))
}

fn instantaneous_flows(s: &ThermalState, c: &ConductanceSet, b: &Boundary) -> FlowRecord {
    FlowRecord {
        ventilation: c.h_ve * (b.t_sup_air - s.t_air),
        window: c.h_win * (b.t_ext - s.t_sur),
        opaque: c.h_tra * (b.t_ext - s.t_mas),
        mass_net: c.h_mas * (s.t_sur - s.t_mas)
            + c.h_tra * (b.t_ext - s.t_mas)
            + b.injections.phi_m,
        t_air_mean: s.t_air,
    }
}

/// Air temperature at the end of a single implicit step of length `dt`
/// with the given space-conditioning power. Linear in `q_space`.
pub fn air_temperature_after(
    state: &ThermalState,
    c: &ConductanceSet,
    boundary: &Boundary,
    dt: f64,
) -> f64 {
    implicit_substep(state, c, boundary, dt).t_air
}

/// Space-conditioning power that brings the air node exactly to `t_target`
/// at the end of one implicit step of length `dt`.
pub fn power_for_air_temperature(
    state: &ThermalState,
    c: &ConductanceSet,
    boundary: &Boundary,
    dt: f64,
    t_target: f64,
) -> f64 {
    const PROBE: f64 = 1000.0;
    let free = Boundary {
        q_space: 0.0,
        ..*boundary
    };
    let probe = Boundary {
        q_space: PROBE,
        ..*boundary
    };
    let t0 = air_temperature_after(state, c, &free, dt);
    let t1 = air_temperature_after(state, c, &probe, dt);
    (t_target - t0) * PROBE / (t1 - t0)
}

/// Ventilation and transmission heat losses in kWh, positive when heat
/// leaves the building. Each record is the mean flow over one interval of
/// `dt` seconds.
pub fn accumulate_losses(flows: &[FlowRecord], dt: f64) -> (f64, f64) {
    let (ven, tr) = flows.iter().fold((0.0, 0.0), |(v, t), f| {
        (v - f.ventilation * dt, t - f.transmission() * dt)
    });
    (ven / J_PER_KWH, tr / J_PER_KWH)
}
