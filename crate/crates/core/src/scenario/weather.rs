//! Weather CSV ingestion. Columns by position: ISO-8601 timestamp, outdoor
//! temperature in °C, global horizontal irradiance in W/m². Further columns
//! (humidity, wind, ...) are accepted and ignored.

use std::path::Path;

use chrono::{Datelike, NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};
use crate::units::{c_to_k, k_to_c, SECONDS_PER_YEAR};

/// Annual mean the weather profile is shifted to by default, °C.
pub const DEFAULT_TARGET_MEAN: f64 = 10.512;

/// Uniformly sampled weather. Time `t` counts seconds from 1 January
/// 00:00 of the year of the first sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    /// Time of the first sample, s.
    pub offset: f64,
    /// Sampling interval, s.
    pub interval: f64,
    /// K
    pub temperature: Vec<f64>,
    /// W/m²
    pub ghi: Vec<f64>,
}

pub(crate) fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    s.parse::<NaiveDateTime>()
        .ok()
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S").ok())
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M").ok())
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M").ok())
}

pub(crate) fn seconds_into_year(ts: &NaiveDateTime) -> f64 {
    let start = NaiveDate::from_ymd_opt(ts.year(), 1, 1)
        .expect("1 January exists")
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists");
    (*ts - start).num_milliseconds() as f64 / 1000.0
}

/// Header, first-sample offset, interval, numeric rows.
pub(crate) type Table = (Vec<String>, f64, f64, Vec<Vec<f64>>);

/// Reads a timestamped numeric table, checking that timestamps are strictly
/// increasing with a uniform interval that divides `divides`.
pub(crate) fn read_uniform_table(
    path: &Path,
    min_columns: usize,
    divides: f64,
) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Ingestion {
            path: path.into(),
            row: 0,
            message: e.to_string(),
        })?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Ingestion {
            path: path.into(),
            row: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();

    let mut rows = Vec::new();
    let mut first: Option<NaiveDateTime> = None;
    let mut prev: Option<NaiveDateTime> = None;
    let mut interval = None;
    let mut offset = 0.0;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let bad = |message: String| Error::Ingestion {
            path: path.into(),
            row: line,
            message,
        };
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() < min_columns {
            return Err(bad(format!("expected at least {min_columns} columns, found {}", record.len())));
        }
        let ts = parse_timestamp(&record[0]).ok_or_else(|| bad(format!("bad timestamp `{}`", &record[0])))?;
        let mut values = Vec::with_capacity(record.len() - 1);
        for j in 1..min_columns {
            let v: f64 = record[j]
                .parse()
                .map_err(|_| bad(format!("column {} is not a number: `{}`", j + 1, &record[j])))?;
            if !v.is_finite() {
                return Err(bad(format!("column {} is not finite", j + 1)));
            }
            values.push(v);
        }
        for j in min_columns..record.len().min(header.len()) {
            values.push(record[j].parse().unwrap_or(f64::NAN));
        }
        match (first, prev) {
            (None, _) => {
                first = Some(ts);
                offset = seconds_into_year(&ts);
            }
            (Some(_), Some(p)) => {
                let step = (ts - p).num_milliseconds() as f64 / 1000.0;
                if step <= 0.0 {
                    return Err(bad("timestamps must increase strictly".into()));
                }
                match interval {
                    None => {
                        if divides % step != 0.0 {
                            return Err(bad(format!("interval {step} s does not divide {divides} s")));
                        }
                        interval = Some(step);
                    }
                    Some(iv) if iv != step => {
                        return Err(bad(format!("irregular interval: {step} s after {iv} s")));
                    }
                    Some(_) => {}
                }
            }
            (Some(_), None) => unreachable!(),
        }
        prev = Some(ts);
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::Ingestion {
            path: path.into(),
            row: 2,
            message: "no samples".into(),
        });
    }
    Ok((header, offset, interval.unwrap_or(divides), rows))
}

impl WeatherSeries {
    pub fn new(offset: f64, interval: f64, temperature_c: &[f64], ghi: Vec<f64>) -> Result<Self> {
        if temperature_c.is_empty() || temperature_c.len() != ghi.len() {
            return Err(Error::invalid("weather", "temperature and irradiance need equal, non-zero length"));
        }
        if !(interval > 0.0) {
            return Err(Error::invalid("interval", "must be > 0"));
        }
        Ok(WeatherSeries {
            offset,
            interval,
            temperature: temperature_c.iter().map(|&c| c_to_k(c)).collect(),
            ghi,
        })
    }

    /// Constant weather, mostly for tests.
    pub fn constant(t_out_c: f64, ghi: f64, interval: f64) -> Self {
        let n = (SECONDS_PER_YEAR / interval).round() as usize;
        WeatherSeries {
            offset: 0.0,
            interval,
            temperature: vec![c_to_k(t_out_c); n],
            ghi: vec![ghi; n],
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (_, offset, interval, rows) = read_uniform_table(path, 3, 900.0)?;
        let (t, g): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r[0], r[1])).unzip();
        WeatherSeries::new(offset, interval, &t, g)
    }

    pub fn len(&self) -> usize {
        self.temperature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temperature.is_empty()
    }

    /// Covered span `[offset, offset + len·interval)`.
    pub fn span(&self) -> (f64, f64) {
        (self.offset, self.offset + self.len() as f64 * self.interval)
    }

    fn is_full_year(&self) -> bool {
        (self.len() as f64 * self.interval - SECONDS_PER_YEAR).abs() < 1e-6
    }

    /// Arithmetic mean of the temperature samples, °C.
    pub fn mean_temperature(&self) -> f64 {
        k_to_c(self.temperature.iter().sum::<f64>() / self.len() as f64)
    }

    /// Shifts every temperature sample so the sample mean equals `target`.
    pub fn adjust_mean(&mut self, target_c: f64) {
        let n = self.len() as f64;
        let offset = target_c - self.mean_temperature();
        for t in &mut self.temperature {
            *t += offset;
        }
        // One correction pass absorbs the rounding of the first shift.
        let residual = c_to_k(target_c) - self.temperature.iter().sum::<f64>() / n;
        for t in &mut self.temperature {
            *t += residual;
        }
    }

    /// Linear interpolation between samples. A full-year series wraps
    /// around from the last sample to the first; otherwise values are held
    /// outside the covered span.
    fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        let n = values.len();
        let x = (t - self.offset) / self.interval;
        if self.is_full_year() {
            let x = x.rem_euclid(n as f64);
            let i = (x.floor() as usize).min(n - 1);
            let f = x - i as f64;
            let j = (i + 1) % n;
            values[i] + f * (values[j] - values[i])
        } else {
            if x <= 0.0 {
                return values[0];
            }
            let i = x.floor() as usize;
            if i + 1 >= n {
                return values[n - 1];
            }
            let f = x - i as f64;
            values[i] + f * (values[i + 1] - values[i])
        }
    }

    /// Outdoor temperature, K.
    pub fn temperature_at(&self, t: f64) -> f64 {
        self.interpolate(&self.temperature, t)
    }

    /// Global horizontal irradiance, W/m².
    pub fn ghi_at(&self, t: f64) -> f64 {
        self.interpolate(&self.ghi, t).max(0.0)
    }

    pub fn covers(&self, t0: f64, t_end: f64) -> bool {
        if self.is_full_year() {
            return true;
        }
        let (a, b) = self.span();
        a <= t0 && t_end <= b
    }
}

/// Loads a weather file and shifts its temperatures so the annual mean
/// equals `target_mean_c` exactly.
pub fn load_weather_adjusted(path: &Path, target_mean_c: f64) -> Result<WeatherSeries> {
    let mut w = WeatherSeries::load(path)?;
    w.adjust_mean(target_mean_c);
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn offset_to_target() {
        let f = write_csv(
            "timestamp,temp_c,ghi_w_m2,rh\n\
             2019-01-01T00:00:00,9.0,0,80\n\
             2019-01-01T00:15:00,10.0,0,80\n\
             2019-01-01T00:30:00,9.5,100,80\n",
        );
        let raw = WeatherSeries::load(f.path()).unwrap();
        assert!((raw.mean_temperature() - 9.5).abs() < 1e-12);
        let w = load_weather_adjusted(f.path(), DEFAULT_TARGET_MEAN).unwrap();
        assert!((w.mean_temperature() - 10.512).abs() <= 1e-9);
        assert!((w.temperature[0] - raw.temperature[0] - 1.012).abs() < 1e-9);
        assert_eq!(w.ghi, raw.ghi);
    }

    #[test]
    fn already_on_target() {
        let f = write_csv("t,temp,ghi\n2019-01-01T00:00:00,10.512,0\n2019-01-01T00:15:00,10.512,0\n");
        let w = load_weather_adjusted(f.path(), 10.512).unwrap();
        assert!(w.temperature.iter().all(|&t| (t - c_to_k(10.512)).abs() < 1e-12));
    }

    #[test]
    fn empty_and_irregular_rejected() {
        let f = write_csv("t,temp,ghi\n");
        assert!(matches!(WeatherSeries::load(f.path()), Err(Error::Ingestion { .. })));
        let f = write_csv(
            "t,temp,ghi\n2019-01-01T00:00:00,1,0\n2019-01-01T00:15:00,1,0\n2019-01-01T00:35:00,1,0\n",
        );
        match WeatherSeries::load(f.path()) {
            Err(Error::Ingestion { row, .. }) => assert_eq!(row, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interpolation_wraps_on_full_year() {
        let mut w = WeatherSeries::constant(0.0, 0.0, 3600.0);
        let n = w.len();
        w.temperature[n - 1] = c_to_k(10.0);
        assert!((w.temperature_at(SECONDS_PER_YEAR - 1800.0) - c_to_k(5.0)).abs() < 1e-9);
        assert!((w.temperature_at(SECONDS_PER_YEAR - 5400.0) - c_to_k(5.0)).abs() < 1e-9);
    }
}
