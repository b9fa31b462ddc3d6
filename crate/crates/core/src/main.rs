use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ebitsim::linkbudget::BeamWaistMode;
use ebitsim::scenarios::{run_scenario, OgsSpec, OutputFormat, Scenario, ScenarioKind};
use ebitsim::Error;

/// Entanglement distribution rates for satellite links and constellations.
#[derive(Parser)]
#[command(name = "ebitsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Downlink diffraction and atmospheric transmittance versus ground distance.
    Fig3(Overrides),
    /// Brute-force search for the best single-satellite orbit between two OGSs.
    SingleSat(Overrides),
    /// Relay-chain rate versus ground distance for several altitudes.
    Chain(Overrides),
    /// Time-swept rate through a polar Walker constellation.
    Constellation(Overrides),
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Scenario JSON file; flags below override its values.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    wavelength_nm: Option<f64>,
    /// Entangled-pair source rate in GHz.
    #[arg(long)]
    source_ghz: Option<f64>,
    #[arg(long)]
    sat_aperture_m: Option<f64>,
    #[arg(long)]
    ogs_aperture_m: Option<f64>,
    /// Replaces the altitude, or altitude list, of the selected run.
    #[arg(long)]
    altitude_km: Option<f64>,
    #[arg(long)]
    planes: Option<usize>,
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long)]
    step_s: Option<f64>,
    #[arg(long)]
    window_h: Option<f64>,
    /// First ground station: a city name or `lat,lon`.
    #[arg(long)]
    ogs1: Option<String>,
    /// Second ground station: a city name or `lat,lon`.
    #[arg(long)]
    ogs2: Option<String>,
    /// Size each ISL beam waist for its own length.
    #[arg(long)]
    optimal_waist: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl Overrides {
    fn resolve(&self, kind: ScenarioKind) -> Result<Scenario, Error> {
        let mut s = match &self.scenario {
            Some(path) => Scenario::load(path)?,
            None => Scenario::new(kind),
        };
        if s.kind != kind {
            return Err(Error::Scenario {
                field: "kind".into(),
                message: format!("file describes `{}` but `{}` was requested", s.kind.as_str(), kind.as_str()),
            });
        }
        if let Some(nm) = self.wavelength_nm {
            s.link.wavelength_m = nm / 1e9;
        }
        if let Some(ghz) = self.source_ghz {
            s.link.source_rate_hz = ghz * 1e9;
        }
        if let Some(r) = self.sat_aperture_m {
            s.link.sat_aperture_m = r;
        }
        if let Some(r) = self.ogs_aperture_m {
            s.link.ogs_aperture_m = r;
        }
        if self.optimal_waist {
            s.link.beam_waist_mode = BeamWaistMode::PerLinkOptimal;
        }
        if let Some(h) = self.altitude_km {
            s.fig3.altitude_km = h;
            s.chain.altitudes_km = vec![h];
            s.grid.altitudes_km = vec![h];
            s.constellation.altitude_km = h;
        }
        if let Some(n) = self.planes {
            s.constellation.planes = n;
        }
        if let Some(m) = self.slots {
            s.constellation.slots = m;
        }
        if let Some(step) = self.step_s {
            s.time.step_s = step;
        }
        if let Some(h) = self.window_h {
            s.time.window_s = h * 3600.0;
        }
        match (&self.ogs1, &self.ogs2) {
            (None, None) => {}
            (a, b) => {
                let current = s.ogs_pair.clone();
                let pick = |flag: &Option<String>, i: usize| match (flag, &current) {
                    (Some(text), _) => Ok(OgsSpec::parse(text)),
                    (None, Some(pair)) => Ok(pair[i].clone()),
                    (None, None) => Err(Error::Scenario {
                        field: "ogs_pair".into(),
                        message: "both --ogs1 and --ogs2 are needed".into(),
                    }),
                };
                s.ogs_pair = Some([pick(a, 0)?, pick(b, 1)?]);
            }
        }
        if let Some(dir) = &self.out {
            s.output.dir = dir.clone();
        }
        if let Some(f) = self.format {
            s.output.format = f;
        }
        Ok(s)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::Scenario { .. } | Error::InvalidInput(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, overrides) = match &cli.command {
        Command::Fig3(o) => (ScenarioKind::Fig3, o),
        Command::SingleSat(o) => (ScenarioKind::SingleSat, o),
        Command::Chain(o) => (ScenarioKind::ChainSweep, o),
        Command::Constellation(o) => (ScenarioKind::Constellation, o),
    };
    let result = overrides.resolve(kind).and_then(|s| run_scenario(&s));
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if let Some(max) = report.summary.get("max_rate_hz").and_then(|v| v.as_f64()) {
                println!("max_rate_hz {max}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
