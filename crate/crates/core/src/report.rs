//! Annual indicators, reference comparison and result files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cosim::{Direction, RunLog};
use crate::error::{Error, Result};
use crate::units::{k_to_c, J_PER_KWH, SECONDS_PER_YEAR};

/// Annual energy balance of one building. Energies in kWh, temperatures
/// in °C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualIndicators {
    pub building: String,
    pub mean_t_air: f64,
    pub q_ht_ven: f64,
    pub q_ht_tr: f64,
    pub q_ht_total: f64,
    pub q_radiators: f64,
    /// Net air conditioner energy, heating positive.
    pub q_ac: f64,
    /// Heat received from the grid.
    pub q_hx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridIndicators {
    pub grid: String,
    pub q_plant: f64,
    pub q_pipe_loss: f64,
    pub q_substations: f64,
    pub mean_t_supply: f64,
    pub mean_t_return: f64,
}

/// Fails unless the log holds exactly one contiguous year.
pub fn check_full_year(log: &RunLog) -> Result<()> {
    check_contiguous(log)?;
    let covered = log.len() as f64 * log.dt;
    if (covered - SECONDS_PER_YEAR).abs() > 1e-6 {
        return Err(Error::Report(format!(
            "annual indicators need a full year, the log covers {covered} s"
        )));
    }
    Ok(())
}

fn check_contiguous(log: &RunLog) -> Result<()> {
    let times = log.times();
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - log.dt).abs() > 1e-6 {
            return Err(Error::Report(format!(
                "gap in log between rows {k} and {} (t = {} s, {} s)",
                k + 1,
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

fn series(log: &RunLog, sim: &str, port: &str) -> Result<Vec<f64>> {
    log.series(sim, port)
        .ok_or_else(|| Error::Report(format!("log has no column `{sim}.{port}`")))
}

fn energy_kwh(values: &[f64], dt: f64) -> f64 {
    values.iter().sum::<f64>() * dt / J_PER_KWH
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Indicators of one building over the whole log, without the full-year
/// requirement.
pub fn building_indicators(log: &RunLog, building: &str) -> Result<AnnualIndicators> {
    check_contiguous(log)?;
    let dt = log.dt;
    let ven = energy_kwh(&series(log, building, "Q_ven")?, dt);
    let tr = energy_kwh(&series(log, building, "Q_tr")?, dt);
    Ok(AnnualIndicators {
        building: building.to_string(),
        mean_t_air: k_to_c(mean(&series(log, building, "T_air")?)),
        q_ht_ven: ven,
        q_ht_tr: tr,
        q_ht_total: ven + tr,
        q_radiators: energy_kwh(&series(log, building, "Q_radiator")?, dt),
        q_ac: energy_kwh(&series(log, building, "Q_ac")?, dt),
        q_hx: energy_kwh(&series(log, building, "Q_hx")?, dt),
    })
}

pub fn annual_indicators(log: &RunLog, building: &str) -> Result<AnnualIndicators> {
    check_full_year(log)?;
    building_indicators(log, building)
}

pub fn grid_indicators(log: &RunLog, grid: &str) -> Result<GridIndicators> {
    check_contiguous(log)?;
    let dt = log.dt;
    Ok(GridIndicators {
        grid: grid.to_string(),
        q_plant: energy_kwh(&series(log, grid, "Q_plant")?, dt),
        q_pipe_loss: energy_kwh(&series(log, grid, "Q_pipe_loss")?, dt),
        q_substations: energy_kwh(&series(log, grid, "Q_substations")?, dt),
        mean_t_supply: k_to_c(mean(&series(log, grid, "T_supply")?)),
        mean_t_return: k_to_c(mean(&series(log, grid, "T_return")?)),
    })
}

/// Simulators in the log that expose the building monitor ports.
pub fn building_ids(log: &RunLog) -> Vec<String> {
    sims_with_output(log, "T_air")
}

pub fn grid_ids(log: &RunLog) -> Vec<String> {
    sims_with_output(log, "Q_plant")
}

fn sims_with_output(log: &RunLog, port: &str) -> Vec<String> {
    let mut ids: Vec<String> = log
        .columns()
        .iter()
        .filter(|c| c.direction == Direction::Out && c.port.port == port)
        .map(|c| c.port.sim.clone())
        .collect();
    ids.dedup();
    ids
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub building: String,
    pub source: String,
    /// Indicator name → reference value, same units as [`AnnualIndicators`].
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
struct ReferenceRow {
    building: String,
    indicator: String,
    value: f64,
    #[serde(default)]
    source: String,
}

const INDICATORS: [&str; 7] = ["mean_t_air", "q_ht_ven", "q_ht_tr", "q_ht_total", "q_radiators", "q_ac", "q_hx"];

impl AnnualIndicators {
    pub fn get(&self, indicator: &str) -> Option<f64> {
        Some(match indicator {
            "mean_t_air" => self.mean_t_air,
            "q_ht_ven" => self.q_ht_ven,
            "q_ht_tr" => self.q_ht_tr,
            "q_ht_total" => self.q_ht_total,
            "q_radiators" => self.q_radiators,
            "q_ac" => self.q_ac,
            "q_hx" => self.q_hx,
            _ => return None,
        })
    }
}

/// Reads `building,indicator,value,source` rows, grouped per building.
pub fn load_references(path: &Path) -> Result<Vec<ReferenceRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Ingestion {
            path: path.into(),
            row: 0,
            message: e.to_string(),
        })?;
    let mut records: Vec<ReferenceRecord> = Vec::new();
    for (i, row) in reader.deserialize::<ReferenceRow>().enumerate() {
        let row = row.map_err(|e| Error::Ingestion {
            path: path.into(),
            row: i + 2,
            message: e.to_string(),
        })?;
        if !INDICATORS.contains(&row.indicator.as_str()) {
            return Err(Error::Ingestion {
                path: path.into(),
                row: i + 2,
                message: format!("unknown indicator `{}`", row.indicator),
            });
        }
        match records.iter_mut().find(|r| r.building == row.building) {
            Some(r) => {
                r.values.insert(row.indicator, row.value);
            }
            None => records.push(ReferenceRecord {
                building: row.building,
                source: row.source,
                values: BTreeMap::from([(row.indicator, row.value)]),
            }),
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub building: String,
    pub indicator: String,
    pub simulated: f64,
    pub reference: f64,
    /// `100·(sim − ref)/ref`; absent when the reference is zero.
    pub error_pct: Option<f64>,
    pub flagged: bool,
}

pub fn relative_error_pct(simulated: f64, reference: f64) -> Option<f64> {
    if reference == 0.0 || !reference.is_finite() {
        None
    } else {
        Some(100.0 * (simulated - reference) / reference)
    }
}

pub fn compare_reference(ind: &AnnualIndicators, reference: &ReferenceRecord) -> Vec<ErrorRow> {
    reference
        .values
        .iter()
        .filter_map(|(name, &r)| {
            let s = ind.get(name)?;
            let e = relative_error_pct(s, r);
            Some(ErrorRow {
                building: ind.building.clone(),
                indicator: name.clone(),
                simulated: s,
                reference: r,
                error_pct: e,
                flagged: e.is_none(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub buildings: Vec<AnnualIndicators>,
    pub grid: Option<GridIndicators>,
    pub errors: Vec<ErrorRow>,
    pub sources: BTreeMap<String, String>,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_table(log: &RunLog, columns: &[(&str, String, bool)]) -> Result<Vec<u8>> {
    // (header, sim.port, kelvin → °C)
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["time_s".to_string()];
    header.extend(columns.iter().map(|(h, _, _)| h.to_string()));
    w.write_record(&header).map_err(|e| Error::Report(e.to_string()))?;
    let idx: Vec<Option<usize>> = columns
        .iter()
        .map(|(_, port, _)| port.parse().ok().and_then(|p| log.column_index(&p)))
        .collect();
    for k in 0..log.len() {
        let row = log.row(k);
        let mut rec = vec![log.times()[k].to_string()];
        for ((_, _, celsius), i) in columns.iter().zip(&idx) {
            rec.push(match i {
                Some(i) if *celsius => k_to_c(row[*i]).to_string(),
                Some(i) => row[*i].to_string(),
                None => String::new(),
            });
        }
        w.write_record(&rec).map_err(|e| Error::Report(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Report(e.to_string()))
}

pub fn building_csv(log: &RunLog, id: &str) -> Result<Vec<u8>> {
    let p = |port: &str| format!("{id}.{port}");
    csv_table(
        log,
        &[
            ("T_air_C", p("T_air"), true),
            ("T_out_C", p("T_out"), true),
            ("T_buffer_C", p("T_buffer"), true),
            ("Q_radiator_W", p("Q_radiator"), false),
            ("Q_ac_W", p("Q_ac"), false),
            ("Q_demand_W", p("Q_demand"), false),
            ("Q_hx_W", p("Q_hx"), false),
            ("Q_ven_W", p("Q_ven"), false),
            ("Q_tr_W", p("Q_tr"), false),
            ("T_sup_C", p("T_sup"), true),
            ("m_flow_kg_s", p("m_flow"), false),
        ],
    )
}

pub fn grid_csv(log: &RunLog, id: &str) -> Result<Vec<u8>> {
    let p = |port: &str| format!("{id}.{port}");
    csv_table(
        log,
        &[
            ("T_supply_C", p("T_supply"), true),
            ("T_return_C", p("T_return"), true),
            ("m_flow_kg_s", p("m_flow"), false),
            ("Q_plant_W", p("Q_plant"), false),
            ("Q_pipe_loss_W", p("Q_pipe_loss"), false),
            ("Q_substations_W", p("Q_substations"), false),
            ("head_Pa", p("head"), false),
            ("T_ground_C", p("T_ground"), true),
        ],
    )
}

pub fn validation_text(report: &ValidationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Annual indicators");
    let _ = writeln!(
        s,
        "{:<16} {:>10} {:>12} {:>12} {:>12} {:>12}",
        "building", "T_air [C]", "Q_ven [kWh]", "Q_tr [kWh]", "Q_ht [kWh]", "Q_rad [kWh]"
    );
    for b in &report.buildings {
        let _ = writeln!(
            s,
            "{:<16} {:>10.3} {:>12.1} {:>12.1} {:>12.1} {:>12.1}",
            b.building, b.mean_t_air, b.q_ht_ven, b.q_ht_tr, b.q_ht_total, b.q_radiators
        );
    }
    if let Some(g) = &report.grid {
        let _ = writeln!(
            s,
            "\nGrid {}: Q_plant {:.1} kWh, pipe losses {:.1} kWh, substations {:.1} kWh",
            g.grid, g.q_plant, g.q_pipe_loss, g.q_substations
        );
    }
    if !report.errors.is_empty() {
        let _ = writeln!(s, "\nComparison with reference");
        let _ = writeln!(
            s,
            "{:<16} {:<12} {:>12} {:>12} {:>9}",
            "building", "indicator", "simulated", "reference", "error %"
        );
        for e in &report.errors {
            let pct = match e.error_pct {
                Some(p) => format!("{p:.2}"),
                None => "zero ref".into(),
            };
            let _ = writeln!(
                s,
                "{:<16} {:<12} {:>12.1} {:>12.1} {:>9}",
                e.building, e.indicator, e.simulated, e.reference, pct
            );
        }
        for (b, src) in &report.sources {
            let _ = writeln!(s, "reference for {b}: {src}");
        }
    }
    s
}

/// Writes per-building and grid time series plus the indicator report.
pub fn emit_outputs(log: &RunLog, report: &ValidationReport, out_dir: &Path) -> Result<()> {
    for id in building_ids(log) {
        write_file(&out_dir.join("buildings").join(format!("{id}.csv")), &building_csv(log, &id)?)?;
    }
    for id in grid_ids(log) {
        let name = if grid_ids(log).len() == 1 {
            "grid.csv".to_string()
        } else {
            format!("{id}.csv")
        };
        write_file(&out_dir.join(name), &grid_csv(log, &id)?)?;
    }
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Report(e.to_string()))?;
    write_file(&out_dir.join("report.json"), json.as_bytes())?;
    write_file(&out_dir.join("report.txt"), validation_text(report).as_bytes())?;
    Ok(())
}

/// Indicators for every building and grid in the log, compared with the
/// references that name a logged building.
pub fn build_report(log: &RunLog, references: &[ReferenceRecord], full_year: bool) -> Result<ValidationReport> {
    if full_year {
        check_full_year(log)?;
    }
    let mut buildings = Vec::new();
    let mut errors = Vec::new();
    let mut sources = BTreeMap::new();
    for id in building_ids(log) {
        let ind = building_indicators(log, &id)?;
        if let Some(r) = references.iter().find(|r| r.building == id) {
            errors.extend(compare_reference(&ind, r));
            sources.insert(id.clone(), r.source.clone());
        }
        buildings.push(ind);
    }
    let grid = match grid_ids(log).first() {
        Some(g) => Some(grid_indicators(log, g)?),
        None => None,
    };
    Ok(ValidationReport {
        buildings,
        grid,
        errors,
        sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_examples() {
        assert!((relative_error_pct(93.5, 100.0).unwrap() + 6.5).abs() < 1e-12);
        assert!((relative_error_pct(96.5, 100.0).unwrap() + 3.5).abs() < 1e-12);
        assert_eq!(relative_error_pct(42.0, 42.0), Some(0.0));
        assert_eq!(relative_error_pct(1.0, 0.0), None);
    }
}
