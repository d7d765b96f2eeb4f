//! Scenario configuration and input data.

pub mod calendar;
pub mod config;
pub mod profile;
pub mod topology;
pub mod weather;

pub use calendar::{heating_season, HeatingCalendar, MonthDay};
pub use config::{load_scenario, Flag, GridConfig, Scenario, ScenarioFile};
pub use profile::{ApplianceProfile, HeatSeries};
pub use topology::{load_topology, TopologyFile};
pub use weather::{load_weather_adjusted, WeatherSeries, DEFAULT_TARGET_MEAN};
