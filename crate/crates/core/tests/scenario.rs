use std::path::PathBuf;

use dhcosim::scenario::{Scenario, ScenarioFile};
use dhcosim::Error;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

const ONE_BUILDING: &str = r#"
[simulation]
t_end_s = 86400.0

[files]
weather = "weather.csv"

[[buildings]]
id = "b1"
floor_area_m2 = 60.0
surfaces = [
  { kind = "wall", area_m2 = 120.0, u_value = 0.5 },
  { kind = "window", area_m2 = 20.0, u_value = 1.3 },
]
"#;

fn load(text: &str) -> dhcosim::Result<Scenario> {
    let file = ScenarioFile::parse(text)?;
    Scenario::from_file(&file, &data_dir())
}

fn config_path(e: Error) -> String {
    match e {
        Error::Config { path, .. } => path,
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn minimal_file_takes_defaults() {
    let s = load(ONE_BUILDING).unwrap();
    assert_eq!(s.buildings.len(), 1);
    assert_eq!(s.dt_comm, 900.0);
    assert!(s.grid.is_none());
    let b = &s.buildings[0];
    assert_eq!(b.params.f_red, 1.0);
    assert!(b.params.flags.radiator && b.params.flags.ventilation);
}

#[test]
fn resolved_file_reloads_to_the_same_scenario() {
    let s = load(ONE_BUILDING).unwrap();
    let text = s.resolved.to_toml().unwrap();
    let again = Scenario::from_file(&ScenarioFile::parse(&text).unwrap(), &data_dir()).unwrap();
    assert_eq!(again.buildings, s.buildings);
    assert_eq!(again.resolved, s.resolved);
}

#[test]
fn unknown_key_is_named() {
    let text = ONE_BUILDING.replace("floor_area_m2 = 60.0", "floor_area_m2 = 60.0\nfloor_aera = 3");
    let path = config_path(ScenarioFile::parse(&text).unwrap_err());
    assert!(path.starts_with("buildings"), "{path}");
}

#[test]
fn duplicate_building_id_rejected() {
    let second = ONE_BUILDING.split("[[buildings]]").nth(1).unwrap();
    let text = format!("{ONE_BUILDING}\n[[buildings]]{second}");
    assert_eq!(config_path(load(&text).unwrap_err()), "buildings[1].id");
}

#[test]
fn substep_above_sixty_seconds_rejected() {
    let text = ONE_BUILDING.replace("t_end_s = 86400.0", "t_end_s = 86400.0\nsubstep_s = 120.0");
    assert_eq!(config_path(load(&text).unwrap_err()), "simulation.substep_s");
}

#[test]
fn flags_must_be_zero_or_one() {
    let text = ONE_BUILDING.replace(
        "floor_area_m2 = 60.0",
        "floor_area_m2 = 60.0\nflags = { radiator = 2 }",
    );
    assert!(ScenarioFile::parse(&text).is_err());
}

#[test]
fn reduction_factor_outside_unit_interval_rejected() {
    let text = ONE_BUILDING.replace("floor_area_m2 = 60.0", "floor_area_m2 = 60.0\nf_red = 1.2");
    assert_eq!(config_path(load(&text).unwrap_err()), "buildings[0].f_red");
}

#[test]
fn grid_without_topology_rejected() {
    let text = format!("{ONE_BUILDING}\n[grid]\nid = \"g\"\n");
    assert_eq!(config_path(load(&text).unwrap_err()), "grid");
}

#[test]
fn substation_bound_to_missing_building_rejected() {
    // the bundled network names four buildings, this scenario has one
    let text = ONE_BUILDING.replace("weather = \"weather.csv\"", "weather = \"weather.csv\"\ntopology = \"network.toml\"");
    assert_eq!(config_path(load(&text).unwrap_err()), "files.topology");
}

#[test]
fn horizon_beyond_short_weather_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("timestamp,temperature_c,ghi_w_m2\n");
    for q in 0..192 {
        let (h, m) = (q / 4, 15 * (q % 4));
        csv.push_str(&format!("2019-01-{:02}T{:02}:{m:02}:00,5.0,0.0\n", 1 + h / 24, h % 24));
    }
    std::fs::write(dir.path().join("short.csv"), csv).unwrap();
    let inside = ONE_BUILDING.replace("weather.csv", "short.csv").replace("86400.0", "90000.0");
    let file = ScenarioFile::parse(&inside).unwrap();
    Scenario::from_file(&file, dir.path()).unwrap();
    let beyond = ONE_BUILDING.replace("weather.csv", "short.csv").replace("86400.0", "259200.0");
    let file = ScenarioFile::parse(&beyond).unwrap();
    assert_eq!(config_path(Scenario::from_file(&file, dir.path()).unwrap_err()), "files.weather");
}

#[test]
fn full_year_weather_repeats() {
    // a typical-year series is periodic, so longer horizons are allowed
    let text = ONE_BUILDING.replace("t_end_s = 86400.0", "t_end_s = 63072000.0");
    assert!(load(&text).is_ok());
}

#[test]
fn bundled_scenarios_load() {
    for name in ["validation.toml", "district.toml"] {
        let text = std::fs::read_to_string(data_dir().join(name)).unwrap();
        let s = load(&text).unwrap();
        assert_eq!(s.buildings.len(), 4, "{name}");
    }
}
