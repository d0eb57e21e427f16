use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nonrecip::config::{BathConfig, Mode, RunConfig, SweepConfig, SweepVariable};
use nonrecip::error::{Error, Result};
use nonrecip::ferro::MaterialFile;
use nonrecip::runner;
use nonrecip::two_qubit::TwoQubitParams;

/// Relaxation dynamics of qubit arrays coupled through a non-reciprocal bath.
#[derive(Parser)]
#[command(name = "nonrecip", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and validate the coupling matrices.
    Couplings(Common),
    /// Evolve the fully excited array and record emission rates.
    Evolve(Common),
    /// Reduced two-qubit model in the collective basis.
    TwoQubit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        gs: Option<f64>,
        #[arg(long)]
        ja: Option<f64>,
    },
    /// Collective decay modes and mode-space couplings.
    Modes(Common),
    /// Evolve one point per value of k0 or N.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_variable)]
        variable: Option<SweepVariable>,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    /// Ferromagnet wavevector offset (1/nm).
    #[arg(long)]
    k0: Option<f64>,
    /// Number of qubits for the ferromagnet bath.
    #[arg(long = "n")]
    n: Option<usize>,
}

fn parse_variable(s: &str) -> std::result::Result<SweepVariable, String> {
    match s {
        "k0" => Ok(SweepVariable::K0),
        "N" | "n" => Ok(SweepVariable::N),
        _ => Err(format!("unknown sweep variable {s:?}, expected k0 or N")),
    }
}

fn load(common: &Common, mode: Mode) -> Result<RunConfig> {
    let mut c = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    match c.mode {
        Some(m) if m != mode => {
            return Err(Error::config(
                "mode",
                format!("config says {} but the {} subcommand was used", m.name(), mode.name()),
            ))
        }
        _ => c.mode = Some(mode),
    }
    if c.bath.is_none() && mode != Mode::TwoQubit {
        c.bath = Some(BathConfig::Ferromagnet(MaterialFile::default()));
    }
    if common.k0.is_some() || common.n.is_some() {
        let mut m = c.material()?;
        if let Some(k0) = common.k0 {
            m.k0 = k0;
        }
        if let Some(n) = common.n {
            m.n = n;
        }
        c.bath = Some(BathConfig::Ferromagnet(m));
        c.array = None;
    }
    if let Some(out) = &common.out {
        c.output = out.clone();
    }
    if let Some(w) = common.workers {
        c.workers = Some(w);
    }
    if let Some(t) = common.t_end {
        c.integrator.t_end = t;
    }
    if let Some(r) = common.rtol {
        c.integrator.rtol = r;
    }
    Ok(c)
}

fn execute(cli: Cli) -> Result<runner::RunOutput> {
    let config = match cli.command {
        Command::Couplings(c) => load(&c, Mode::Couplings)?,
        Command::Evolve(c) => load(&c, Mode::Evolve)?,
        Command::Modes(c) => load(&c, Mode::Modes)?,
        Command::TwoQubit { common, gs, ja } => {
            let mut c = load(&common, Mode::TwoQubit)?;
            let mut p = c.two_qubit.unwrap_or(TwoQubitParams::new(1.0, 0.3, 0.3));
            if let Some(gs) = gs {
                p.gs = gs;
            }
            if let Some(ja) = ja {
                p.ja = ja;
            }
            c.two_qubit = Some(p);
            c
        }
        Command::Sweep {
            common,
            variable,
            values,
        } => {
            let mut c = load(&common, Mode::Sweep)?;
            let mut s = c.sweep.take().unwrap_or(SweepConfig {
                variable: SweepVariable::K0,
                values: vec![0.0003, 0.003, 0.03, 0.1, 0.15, 0.2, 0.25, 0.3],
            });
            if let Some(v) = variable {
                s.variable = v;
            }
            if let Some(v) = values {
                s.values = v;
            }
            c.sweep = Some(s);
            c
        }
    };
    config.validate()?;
    runner::run(&config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            if let Some(s) = &out.sweep {
                println!(
                    "max asymmetry at {}; burst vanishes at {}",
                    s.max_asymmetry_at,
                    s.burst_vanishes_at.map_or("-".to_string(), |v| v.to_string())
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
