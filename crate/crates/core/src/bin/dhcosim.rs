use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dhcosim::cosim::protocol::{encode_message, golden_frames};
use dhcosim::cosim::remote::{serve, RemoteSimulator, DEFAULT_STEP_TIMEOUT};
use dhcosim::cosim::{master_run, Coupling, RunLog, Simulator};
use dhcosim::district::{default_coupling, master_config, run_scenario, simulator_by_id, simulators};
use dhcosim::report::{build_report, emit_outputs, load_references, validation_text};
use dhcosim::scenario::{load_scenario, Scenario};

#[derive(Parser)]
#[command(name = "dhcosim", version, about = "Building and district heating co-simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Accepted for interface stability; every run is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate all buildings (and the grid, if configured) in-process.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run as master with some simulators attached over TCP.
    Cosim {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// `id=host:port`; may be repeated.
        #[arg(long = "connect", value_name = "ID=ADDR")]
        connect: Vec<String>,
        /// Coupling file replacing the scenario's default building-grid edges.
        #[arg(long)]
        coupling: Option<PathBuf>,
        /// Seconds to wait for each remote step.
        #[arg(long, default_value_t = DEFAULT_STEP_TIMEOUT.as_secs())]
        timeout: u64,
    },
    /// Expose one simulator of the scenario on a TCP endpoint.
    Serve {
        #[command(flatten)]
        common: Common,
        /// Building or grid id.
        #[arg(long)]
        sim: String,
        #[arg(long, default_value = "127.0.0.1:7000")]
        listen: String,
        /// Exit after this many sessions.
        #[arg(long)]
        sessions: Option<usize>,
    },
    /// Run and compare the annual indicators with reference values.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the canonical bytes of the golden wire frames.
    ProtocolDump,
}

fn load(common: &Common) -> Result<Scenario> {
    load_scenario(&common.scenario).with_context(|| format!("loading {}", common.scenario.display()))
}

fn write_resolved(scenario: &Scenario, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join("resolved.toml");
    std::fs::write(&path, scenario.resolved.to_toml()?).with_context(|| format!("writing {}", path.display()))
}

fn finish(log: &RunLog, out: &Path, started: Instant, full_year: bool) -> Result<()> {
    let report = build_report(log, &[], full_year)?;
    emit_outputs(log, &report, out)?;
    print!("{}", validation_text(&report));
    eprintln!(
        "{} steps in {:.1} s, results in {}",
        log.len(),
        started.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}

fn covers_year(s: &Scenario) -> bool {
    (s.t_end - s.t0 - dhcosim::units::SECONDS_PER_YEAR).abs() < 1e-6
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { common, out } => {
            let scenario = load(&common)?;
            write_resolved(&scenario, &out)?;
            let started = Instant::now();
            let log = run_scenario(&scenario)?;
            finish(&log, &out, started, covers_year(&scenario))
        }
        Command::Cosim {
            common,
            out,
            connect,
            coupling,
            timeout,
        } => {
            let scenario = load(&common)?;
            write_resolved(&scenario, &out)?;
            let mut sims = simulators(&scenario)?;
            for spec in &connect {
                let Some((id, addr)) = spec.split_once('=') else {
                    bail!("--connect expects id=host:port, got `{spec}`");
                };
                let remote = RemoteSimulator::connect(addr, Duration::from_secs(timeout))
                    .with_context(|| format!("connecting to `{id}` at {addr}"))?;
                if remote.descriptor().id != id {
                    bail!("endpoint {addr} serves `{}`, expected `{id}`", remote.descriptor().id);
                }
                match sims.iter().position(|s| s.descriptor().id == id) {
                    Some(i) => sims[i] = Box::new(remote),
                    None => sims.push(Box::new(remote)),
                }
            }
            let coupling = match coupling {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    toml::from_str::<Coupling>(&text).with_context(|| format!("parsing {}", path.display()))?
                }
                None => default_coupling(&scenario),
            };
            let started = Instant::now();
            let log = master_run(&mut sims, &coupling, &master_config(&scenario))?;
            finish(&log, &out, started, covers_year(&scenario))
        }
        Command::Serve {
            common,
            sim,
            listen,
            sessions,
        } => {
            let scenario = load(&common)?;
            if simulator_by_id(&scenario, &sim)?.is_none() {
                bail!("scenario has no simulator `{sim}`");
            }
            let listener = TcpListener::bind(&listen).with_context(|| format!("binding {listen}"))?;
            eprintln!("serving `{sim}` on {}", listener.local_addr()?);
            serve(
                &listener,
                || Ok(simulator_by_id(&scenario, &sim)?.expect("checked above")),
                sessions,
            )?;
            Ok(())
        }
        Command::Validate { common, reference, out } => {
            let scenario = load(&common)?;
            write_resolved(&scenario, &out)?;
            let references = load_references(&reference)?;
            let started = Instant::now();
            let log = run_scenario(&scenario)?;
            let report = build_report(&log, &references, true)?;
            emit_outputs(&log, &report, &out)?;
            print!("{}", validation_text(&report));
            eprintln!("{:.1} s, results in {}", started.elapsed().as_secs_f64(), out.display());
            Ok(())
        }
        Command::ProtocolDump => {
            let mut stdout = std::io::stdout().lock();
            for f in golden_frames() {
                std::io::Write::write_all(&mut stdout, &encode_message(&f)?)?;
            }
            Ok(())
        }
    }
}
