//! Physical constants and unit conversions. All internal computation is SI
//! (kelvin, seconds, watts); Celsius only appears at file and report edges.

/// Specific heat of water, J/(kg·K).
pub const CP_WATER: f64 = 4186.0;
/// Specific heat of air, J/(kg·K).
pub const C_AIR: f64 = 1012.0;
/// Density of air, kg/m³.
pub const RHO_AIR: f64 = 1.2;
/// Density of water, kg/m³.
pub const RHO_WATER: f64 = 1000.0;

pub const ZERO_CELSIUS: f64 = 273.15;
pub const J_PER_KWH: f64 = 3.6e6;
pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const DAYS_PER_YEAR: u32 = 365;
pub const SECONDS_PER_YEAR: f64 = 365.0 * SECONDS_PER_DAY;

#[inline]
pub fn c_to_k(celsius: f64) -> f64 {
    celsius + ZERO_CELSIUS
}

#[inline]
pub fn k_to_c(kelvin: f64) -> f64 {
    kelvin - ZERO_CELSIUS
}

#[inline]
pub fn j_to_kwh(joules: f64) -> f64 {
    joules / J_PER_KWH
}
