//! Appliance electrical load profile: a timestamp column followed by one
//! power column (W) per appliance category. Values are held constant until
//! the next sample.

use std::path::Path;

use super::weather::read_uniform_table;
use crate::equipment::{appliance_heat, ApplianceRatios};
use crate::error::{Error, Result};
use crate::units::{J_PER_KWH, SECONDS_PER_YEAR};

#[derive(Debug, Clone, PartialEq)]
pub struct ApplianceProfile {
    pub offset: f64,
    pub interval: f64,
    pub categories: Vec<String>,
    /// One row per sample, columns in `categories` order, W.
    pub rows: Vec<Vec<f64>>,
}

impl ApplianceProfile {
    pub fn load(path: &Path) -> Result<Self> {
        let (header, offset, interval, rows) = read_uniform_table(path, 1, 900.0)?;
        let categories: Vec<String> = header.iter().skip(1).cloned().collect();
        if categories.is_empty() {
            return Err(Error::Ingestion {
                path: path.into(),
                row: 1,
                message: "no appliance columns".into(),
            });
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != categories.len() || r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Ingestion {
                    path: path.into(),
                    row: i + 2,
                    message: format!("expected {} non-negative powers", categories.len()),
                });
            }
        }
        Ok(ApplianceProfile {
            offset,
            interval,
            categories,
            rows,
        })
    }

    /// Heat released per sample, W. Fails on categories without a ratio.
    pub fn heat(&self, ratios: &ApplianceRatios) -> Result<HeatSeries> {
        let values = self
            .rows
            .iter()
            .map(|r| appliance_heat(self.categories.iter().map(String::as_str).zip(r.iter().copied()), ratios))
            .collect::<Result<Vec<f64>>>()?;
        Ok(HeatSeries {
            offset: self.offset,
            interval: self.interval,
            values,
        })
    }

    /// Electrical energy of each category over the profile, kWh.
    pub fn energy_by_category(&self) -> Vec<(String, f64)> {
        self.categories
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let e: f64 = self.rows.iter().map(|r| r[j]).sum::<f64>() * self.interval / J_PER_KWH;
                (c.clone(), e)
            })
            .collect()
    }
}

/// Sample-and-hold heat gain series, W.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatSeries {
    pub offset: f64,
    pub interval: f64,
    pub values: Vec<f64>,
}

impl HeatSeries {
    pub fn zero() -> Self {
        HeatSeries {
            offset: 0.0,
            interval: SECONDS_PER_YEAR,
            values: vec![0.0],
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        let n = self.values.len();
        let full_year = (n as f64 * self.interval - SECONDS_PER_YEAR).abs() < 1e-6;
        let x = ((t - self.offset) / self.interval).floor();
        let i = if full_year {
            x.rem_euclid(n as f64) as usize
        } else {
            x.clamp(0.0, (n - 1) as f64) as usize
        };
        self.values[i.min(n - 1)]
    }

    pub fn total_kwh(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.interval / J_PER_KWH
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn heat_from_profile() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"timestamp,dishwasher,fridge,vehicle\n2019-01-01T00:00:00,1000,100,3000\n2019-01-01T00:15:00,0,100,0\n")
            .unwrap();
        let p = ApplianceProfile::load(f.path()).unwrap();
        let h = p.heat(&ApplianceRatios::default()).unwrap();
        assert!((h.values[0] - 150.0).abs() < 1e-9);
        assert!((h.values[1] - 100.0).abs() < 1e-9);
        assert_eq!(h.at(100.0), h.values[0]);
        assert_eq!(h.at(950.0), h.values[1]);
    }

    #[test]
    fn unknown_category_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"timestamp,teleporter\n2019-01-01T00:00:00,10\n").unwrap();
        let p = ApplianceProfile::load(f.path()).unwrap();
        assert!(matches!(p.heat(&ApplianceRatios::default()), Err(Error::Config { .. })));
    }
}
