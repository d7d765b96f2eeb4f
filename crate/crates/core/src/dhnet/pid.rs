use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    /// Integral gain per second of accumulated error.
    pub ki: f64,
    pub kd: f64,
}

/// Discrete PID with output clamping and conditional-integration
/// anti-windup. The integral contribution is itself clamped to the output
/// range.
#[derive(Debug, Clone, PartialEq)]
pub struct PidController {
    pub gains: PidGains,
    pub out_min: f64,
    pub out_max: f64,
    integral: f64,
    prev_error: Option<f64>,
}

impl PidController {
    pub fn new(gains: PidGains, out_min: f64, out_max: f64) -> Self {
        PidController {
            gains,
            out_min,
            out_max,
            integral: 0.0,
            prev_error: None,
        }
    }

    /// Integral contribution `ki·∫e dt`.
    pub fn integral_term(&self) -> f64 {
        self.gains.ki * self.integral
    }

    /// Bumpless transfer: the next update with zero error returns `output`.
    pub fn reset_to(&mut self, output: f64) {
        let output = output.clamp(self.out_min, self.out_max);
        self.integral = if self.gains.ki > 0.0 {
            output / self.gains.ki
        } else {
            0.0
        };
        self.prev_error = None;
    }

    pub fn update(&mut self, setpoint: f64, measured: f64, dt: f64) -> f64 {
        let error = setpoint - measured;
        let derivative = match self.prev_error {
            Some(prev) if dt > 0.0 => (error - prev) / dt,
            _ => 0.0,
        };
        self.prev_error = Some(error);

        let p = self.gains.kp * error;
        let d = self.gains.kd * derivative;
        let candidate = self.integral + error * dt;
        let unclamped = p + self.gains.ki * candidate + d;
        // Integrate only when that does not push further into saturation.
        let winding_up = (unclamped > self.out_max && error > 0.0)
            || (unclamped < self.out_min && error < 0.0);
        if !winding_up {
            self.integral = candidate;
        }
        if self.gains.ki > 0.0 {
            let lo = self.out_min / self.gains.ki;
            let hi = self.out_max / self.gains.ki;
            self.integral = self.integral.clamp(lo, hi);
        }
        (p + self.gains.ki * self.integral + d).clamp(self.out_min, self.out_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pid() -> PidController {
        PidController::new(
            PidGains {
                kp: 0.01,
                ki: 1e-5,
                kd: 0.0,
            },
            0.0,
            1.0,
        )
    }

    #[test]
    fn output_and_integral_stay_clamped() {
        let mut c = pid();
        for _ in 0..10_000 {
            let out = c.update(100.0, 0.0, 900.0);
            assert!((0.0..=1.0).contains(&out));
            assert!(c.integral_term() <= 1.0 + 1e-12);
        }
        // recovers promptly once the error flips
        let out = c.update(0.0, 100.0, 900.0);
        assert!(out < 1.0);
    }

    #[test]
    fn bumpless_reset() {
        let mut c = pid();
        c.reset_to(0.3);
        let out = c.update(50.0, 50.0, 900.0);
        assert!((out - 0.3).abs() < 1e-12);
    }
}
