//! Static pipe: exponential decay toward ground temperature, no thermal
//! inertia, and a fixed-friction Darcy–Weisbach pressure drop.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::units::{CP_WATER, RHO_WATER};

/// Darcy friction factor used for every pipe.
pub const FRICTION_FACTOR: f64 = 0.03;

/// Outlet temperature of a pipe carrying `m_flow` at inlet `t_in`.
pub fn pipe_outlet(t_in: f64, m_flow: f64, t_ground: f64, u_prime: f64, length: f64) -> f64 {
    if m_flow <= 0.0 {
        return t_ground;
    }
    t_ground + (t_in - t_ground) * (-u_prime * length / (m_flow * CP_WATER)).exp()
}

/// Pressure drop along one pipe, Pa. `roughness` is kept for reporting; the
/// friction factor is fixed.
pub fn pipe_pressure_drop(m_flow: f64, diameter: f64, length: f64, roughness: f64) -> Result<f64> {
    if !(diameter > 0.0 && diameter.is_finite()) {
        return Err(Error::invalid("diameter", format!("must be > 0, got {diameter}")));
    }
    if roughness < 0.0 {
        return Err(Error::invalid("roughness", "must be >= 0"));
    }
    let area = PI * diameter * diameter / 4.0;
    let velocity = m_flow.max(0.0) / (RHO_WATER * area);
    Ok(FRICTION_FACTOR * length / diameter * RHO_WATER * velocity * velocity / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::c_to_k;
    use approx::assert_relative_eq;

    #[test]
    fn outlet_limits() {
        let t = pipe_outlet(c_to_k(80.0), 1e9, c_to_k(10.0), 0.4, 100.0);
        assert_relative_eq!(t, c_to_k(80.0), epsilon = 1e-6);
        assert_eq!(pipe_outlet(c_to_k(80.0), 0.0, c_to_k(10.0), 0.4, 100.0), c_to_k(10.0));
    }

    #[test]
    fn outlet_example() {
        let t = pipe_outlet(c_to_k(80.0), 0.2, c_to_k(10.0), 0.4, 100.0);
        assert!((t - c_to_k(76.73)).abs() < 0.005);
    }

    #[test]
    fn pressure_drop_examples() {
        assert_eq!(pipe_pressure_drop(0.0, 0.025, 100.0, 4.5e-5).unwrap(), 0.0);
        let dp = pipe_pressure_drop(0.2, 0.025, 100.0, 4.5e-5).unwrap();
        assert_relative_eq!(dp, 9959.0, max_relative = 1e-3);
        let dp2 = pipe_pressure_drop(0.4, 0.025, 100.0, 4.5e-5).unwrap();
        assert_relative_eq!(dp2, 4.0 * dp, max_relative = 1e-12);
        assert!(pipe_pressure_drop(0.2, 0.0, 100.0, 0.0).is_err());
    }
}
