//! Executes a [`RunConfig`] and writes its artifacts.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BathConfig, Mode, RunConfig, SweepVariable};
use crate::coupling::{validate, CouplingMatrices, ValidationReport};
use crate::error::{Error, Result};
use crate::ferro::{characteristic_scales, CharacteristicScales};
use crate::lindblad::{
    evolve_fully_excited, fmt_num, nonreciprocity_metrics, total_emission_slope, DensityMatrix, Evolution,
};
use crate::modes::ModeReport;
use crate::two_qubit::solve_two_qubit;

const GAMMA0_CAVEAT: &str = "rates and times are in units of the local decay rate gamma0; \
the absolute gamma0 reported under scales comes from a closed-form prefactor whose unit \
convention is ambiguous and should be treated as an order-of-magnitude label";

/// Files written by one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmissionSummary {
    pub peak_r_tot: f64,
    pub peak_r_tot_time: f64,
    pub peak_abs_delta_1n: f64,
    pub peak_delta_time: f64,
    /// `dR_tot/dτ` at `τ = 0`.
    pub initial_slope: f64,
    /// `R_tot` rises initially and its maximum exceeds the independent
    /// emitters' initial rate `N`.
    pub burst: bool,
}

impl EmissionSummary {
    pub fn from_evolution(ev: &Evolution, initial_slope: f64) -> Result<Self> {
        let t = &ev.trajectory;
        let (peak, at) = t.peak_total_rate();
        let nr = nonreciprocity_metrics(t)?;
        let burst = initial_slope > 0.0 && peak > t.n as f64;
        Ok(Self {
            peak_r_tot: peak,
            peak_r_tot_time: at,
            peak_abs_delta_1n: nr.peak_abs_delta_1n,
            peak_delta_time: nr.peak_time,
            initial_slope,
            burst,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub n: usize,
    pub k0: f64,
    pub lambda1_nm: f64,
    #[serde(flatten)]
    pub emission: EmissionSummary,
    pub excitation_closure: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
    /// Sweep value with the largest peak `|δ_{1,N}|`.
    pub max_asymmetry_at: f64,
    /// First value (in sweep order) at which the burst flag turns off after
    /// having been on.
    pub burst_vanishes_at: Option<f64>,
    /// Whether peak `R_tot` never increases with `k₀` (k₀ sweeps only; rows
    /// are compared in ascending `k₀`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_r_tot_nonincreasing: Option<bool>,
}

#[derive(Serialize)]
struct Metadata<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    mode: &'static str,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    scales: Option<CharacteristicScales>,
    #[serde(skip_serializing_if = "Option::is_none")]
    caveat: Option<&'static str>,
    results: T,
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<PathBuf> {
    let f = fs::File::create(path)?;
    let mut w = BufWriter::new(f);
    body(&mut w)?;
    w.flush()?;
    Ok(path.to_path_buf())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// Config with every default and override folded in, so that it reproduces
/// the run when fed back.
fn resolved(config: &RunConfig, mode: Mode) -> Result<RunConfig> {
    let mut c = config.clone();
    c.mode = Some(mode);
    if let Some(BathConfig::Ferromagnet(_)) = &c.bath {
        c.bath = Some(BathConfig::Ferromagnet(config.material()?));
        c.array = None;
    }
    Ok(c)
}

fn scales_of(config: &RunConfig) -> Result<Option<CharacteristicScales>> {
    match &config.bath {
        Some(BathConfig::Ferromagnet(_)) => {
            let (p, arr) = config.material()?.resolve()?;
            Ok(Some(characteristic_scales(&p, arr.omega_qi_ghz() * 1e9)?))
        }
        _ => Ok(None),
    }
}

fn metadata<'a, T: Serialize>(config: &'a RunConfig, mode: Mode, results: T) -> Result<Metadata<'a, T>> {
    let scales = scales_of(config)?;
    Ok(Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        mode: mode.name(),
        config,
        caveat: scales.map(|_| GAMMA0_CAVEAT),
        scales,
        results,
    })
}

fn gnuplot_rates(csv: &str, n: usize, title: &str) -> String {
    let mut s = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'gamma0 t'\n\
         set ylabel 'R / gamma0'\nset title '{title}'\nplot "
    );
    let cols: Vec<String> = (0..n)
        .map(|a| format!("'{csv}' using 1:{} with lines", a + 2))
        .chain(std::iter::once("exp(-x) with lines dt 2 title 'isolated'".to_string()))
        .collect();
    s.push_str(&cols.join(", \\\n     "));
    s.push('\n');
    s
}

/// Runs the configured mode. `config.mode` must be set.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let mode = config.mode()?;
    fs::create_dir_all(&config.output)?;
    match mode {
        Mode::Couplings => run_couplings(config),
        Mode::Evolve => run_evolve(config),
        Mode::TwoQubit => run_two_qubit(config),
        Mode::Modes => run_modes(config),
        Mode::Sweep => {
            let (summary, files) = sweep(config)?;
            Ok(RunOutput {
                files,
                sweep: Some(summary),
            })
        }
    }
}

fn run_couplings(config: &RunConfig) -> Result<RunOutput> {
    let m = config.couplings()?;
    let out = &config.output;
    let resolved = resolved(config, Mode::Couplings)?;
    let report: ValidationReport = validate(&m);
    if !report.passed {
        log::warn!("coupling matrices fail validation: {:?}", report.failures);
    }
    let files = vec![
        write_file(&out.join("couplings.json"), |w| {
            writeln!(w, "{}", m.to_json())?;
            Ok(())
        })?,
        write_json(&out.join("metadata.json"), &metadata(&resolved, Mode::Couplings, report)?)?,
    ];
    Ok(RunOutput { files, sweep: None })
}

#[derive(Serialize)]
struct EvolveResults<'a> {
    diagnostics: &'a crate::lindblad::EvolutionDiagnostics,
    emission: EmissionSummary,
}

/// Evolves `m` from `|e…e⟩` and writes CSV, metadata and plot script into `dir`.
fn evolve_into(
    config: &RunConfig,
    m: &CouplingMatrices,
    dir: &Path,
) -> Result<(EmissionSummary, Evolution, Vec<PathBuf>)> {
    fs::create_dir_all(dir)?;
    let ev = evolve_fully_excited(m, &config.integrator.options())?;
    let slope = total_emission_slope(&DensityMatrix::fully_excited(m.n())?, m)?;
    let summary = EmissionSummary::from_evolution(&ev, slope)?;
    let mut resolved = resolved(config, Mode::Evolve)?;
    resolved.sweep = None;
    resolved.output = dir.to_path_buf();
    let results = EvolveResults {
        diagnostics: &ev.diagnostics,
        emission: summary,
    };
    let files = vec![
        write_file(&dir.join("trajectory.csv"), |w| ev.trajectory.write_csv(w))?,
        write_json(&dir.join("metadata.json"), &metadata(&resolved, Mode::Evolve, results)?)?,
        write_file(&dir.join("trajectory.gp"), |w| {
            w.write_all(gnuplot_rates("trajectory.csv", m.n(), "per-qubit emission").as_bytes())?;
            Ok(())
        })?,
    ];
    Ok((summary, ev, files))
}

fn run_evolve(config: &RunConfig) -> Result<RunOutput> {
    let m = config.couplings()?;
    let (_, ev, files) = evolve_into(config, &m, &config.output)?;
    log::info!(
        "evolve: N={} steps={} wall={:.2}s",
        m.n(),
        ev.diagnostics.integrator.accepted_steps,
        ev.diagnostics.wall_seconds
    );
    Ok(RunOutput { files, sweep: None })
}

fn run_two_qubit(config: &RunConfig) -> Result<RunOutput> {
    let p = config
        .two_qubit
        .ok_or_else(|| Error::config("two_qubit", "required for mode two-qubit"))?;
    let t = solve_two_qubit(&p, &config.integrator.options())?;
    let out = &config.output;
    let mut resolved = resolved(config, Mode::TwoQubit)?;
    resolved.bath = None;
    resolved.array = None;
    let files = vec![
        write_file(&out.join("two_qubit.csv"), |w| t.write_csv(w))?,
        write_json(&out.join("metadata.json"), &metadata(&resolved, Mode::TwoQubit, t.stats)?)?,
        write_file(&out.join("two_qubit.gp"), |w| {
            w.write_all(gnuplot_rates("two_qubit.csv", 2, "two-qubit emission").as_bytes())?;
            Ok(())
        })?,
    ];
    Ok(RunOutput { files, sweep: None })
}

fn run_modes(config: &RunConfig) -> Result<RunOutput> {
    let m = config.couplings()?;
    let report = ModeReport::new(&m)?;
    if report.psd_warning {
        log::warn!("decoherence matrix has a negative mode rate {:.3e}", report.rates[0]);
    }
    let out = &config.output;
    let resolved = resolved(config, Mode::Modes)?;
    let files = vec![
        write_json(&out.join("modes.json"), &report)?,
        write_json(&out.join("metadata.json"), &metadata(&resolved, Mode::Modes, ())?)?,
    ];
    Ok(RunOutput { files, sweep: None })
}

fn point_config(config: &RunConfig, variable: SweepVariable, value: f64) -> Result<RunConfig> {
    let mut material = config.material()?;
    match variable {
        SweepVariable::K0 => material.k0 = value,
        SweepVariable::N => material.n = value as usize,
    }
    let mut c = config.clone();
    c.bath = Some(BathConfig::Ferromagnet(material));
    c.array = None;
    c.sweep = None;
    c.mode = Some(Mode::Evolve);
    Ok(c)
}

fn point_dir(root: &Path, index: usize, variable: SweepVariable, value: f64) -> PathBuf {
    let name = match variable {
        SweepVariable::K0 => format!("point_{index:03}_k0_{value}"),
        SweepVariable::N => format!("point_{index:03}_N_{value}"),
    };
    root.join(name)
}

/// Runs one evolution per sweep value (concurrently, bounded by
/// `config.workers`) and writes the per-point artifacts plus a summary.
pub fn sweep(config: &RunConfig) -> Result<(SweepSummary, Vec<PathBuf>)> {
    config.validate()?;
    let sw = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep", "required for mode sweep"))?;
    let workers = config
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    fs::create_dir_all(&config.output)?;

    let points: Vec<Result<(SweepRow, Vec<PathBuf>)>> = pool.install(|| {
        sw.values
            .par_iter()
            .enumerate()
            .map(|(i, &value)| {
                let pc = point_config(config, sw.variable, value)?;
                let m = pc.couplings()?;
                let (p, arr) = pc.material()?.resolve()?;
                let scales = characteristic_scales(&p, arr.omega_qi_ghz() * 1e9)?;
                let dir = point_dir(&config.output, i, sw.variable, value);
                let (emission, ev, files) = evolve_into(&pc, &m, &dir)?;
                log::info!(
                    "sweep point {} = {value}: peak |delta_1N| = {:.6}, burst = {}, {:.1}s",
                    match sw.variable {
                        SweepVariable::K0 => "k0",
                        SweepVariable::N => "N",
                    },
                    emission.peak_abs_delta_1n,
                    emission.burst,
                    ev.diagnostics.wall_seconds
                );
                Ok((
                    SweepRow {
                        value,
                        n: m.n(),
                        k0: scales.k0,
                        lambda1_nm: scales.lambda1_nm,
                        emission,
                        excitation_closure: ev.diagnostics.excitation_closure,
                        wall_seconds: ev.diagnostics.wall_seconds,
                    },
                    files,
                ))
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(points.len());
    let mut files = Vec::new();
    for p in points {
        let (row, f) = p?;
        rows.push(row);
        files.extend(f);
    }
    let summary = summarize(sw.variable, rows);
    files.push(write_json(&config.output.join("summary.json"), &summary)?);
    files.push(write_file(&config.output.join("summary.csv"), |w| write_summary_csv(w, &summary))?);
    files.push(write_file(&config.output.join("summary.gp"), |w| {
        let logx = if sw.variable == SweepVariable::K0 { "set logscale x\n" } else { "" };
        write!(
            w,
            "set datafile separator ','\nset key autotitle columnhead\n{logx}set xlabel '{}'\n\
             set ylabel 'peak |delta_1N|'\nplot 'summary.csv' using 1:6 with linespoints\n",
            match sw.variable {
                SweepVariable::K0 => "k0",
                SweepVariable::N => "N",
            }
        )?;
        Ok(())
    })?);
    Ok((summary, files))
}

/// Builds the summary from rows in sweep order.
pub fn summarize(variable: SweepVariable, rows: Vec<SweepRow>) -> SweepSummary {
    let max_asymmetry_at = rows
        .iter()
        .fold(None::<&SweepRow>, |best, r| match best {
            Some(b) if b.emission.peak_abs_delta_1n >= r.emission.peak_abs_delta_1n => Some(b),
            _ => Some(r),
        })
        .map_or(f64::NAN, |r| r.value);
    let burst_vanishes_at = rows
        .windows(2)
        .find(|w| w[0].emission.burst && !w[1].emission.burst)
        .map(|w| w[1].value);
    let peak_r_tot_nonincreasing = (variable == SweepVariable::K0).then(|| {
        let mut by_k0: Vec<(f64, f64)> = rows.iter().map(|r| (r.value, r.emission.peak_r_tot)).collect();
        by_k0.sort_by(|a, b| a.0.total_cmp(&b.0));
        by_k0.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12))
    });
    SweepSummary {
        variable,
        rows,
        max_asymmetry_at,
        burst_vanishes_at,
        peak_r_tot_nonincreasing,
    }
}

fn write_summary_csv<W: Write>(mut w: W, s: &SweepSummary) -> Result<()> {
    writeln!(
        w,
        "value,N,k0,lambda1_nm,peak_R_tot,peak_abs_delta_1N,peak_delta_time,initial_slope,burst,excitation_closure"
    )?;
    for r in &s.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_num(r.value),
            r.n,
            fmt_num(r.k0),
            fmt_num(r.lambda1_nm),
            fmt_num(r.emission.peak_r_tot),
            fmt_num(r.emission.peak_abs_delta_1n),
            fmt_num(r.emission.peak_delta_time),
            fmt_num(r.emission.initial_slope),
            u8::from(r.emission.burst),
            fmt_num(r.excitation_closure)
        )?;
    }
    Ok(())
}

/// `k₀` sweep; the configured sweep variable must be `k0`.
pub fn sweep_k0(config: &RunConfig) -> Result<SweepSummary> {
    match &config.sweep {
        Some(s) if s.variable == SweepVariable::K0 => Ok(sweep(config)?.0),
        _ => Err(Error::config("sweep.variable", "expected k0")),
    }
}

/// Array-size sweep; the configured sweep variable must be `N`.
pub fn sweep_n(config: &RunConfig) -> Result<SweepSummary> {
    match &config.sweep {
        Some(s) if s.variable == SweepVariable::N => Ok(sweep(config)?.0),
        _ => Err(Error::config("sweep.variable", "expected N")),
    }
}
