//! `hmg` command line: simulate, predict, bode, design.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 configuration or
//! parameter error, 3 numerical divergence.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::{info, warn};

use crate::config::{HybridConfig, HybridConfigFile};
use crate::error::Error;
use crate::gecm::{bode_export, bode_transfer, default_bode_grid, write_bode_csv, write_predictions_csv, BodeTarget, Predictions};
use crate::report::fmt_sig;
use crate::sim::{measure_lenient, run, Scenario};

#[derive(Debug, Parser)]
#[command(name = "hmg", version, about = "Hybrid AC/DC/storage microgrid simulator and analyzer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time-domain run: writes trace.csv, metrics.txt and metrics.json.
    Simulate {
        /// Experiment file; the built-in reference when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Global inertia, initial rates, steady shares.
    Predict {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the predictions as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bode data of a transfer function as CSV.
    Bode {
        #[arg(long)]
        config: Option<PathBuf>,
        /// One of N_ac0, N_ac1, N_dc0, N_dc1, N_ds0, N_ds1, T_ac, T_dc, T_ds, f_closed.
        #[arg(long)]
        target: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Designed droops, concatenator cutoffs and the cutoff bound.
    Design {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Failure of a command, mapped to an exit status.
#[derive(Debug)]
pub enum CliError {
    Model(Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(Error::NumericalDivergence { .. }) => 3,
            CliError::Model(_) => 2,
            CliError::Io(..) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

fn io_err(p: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(p.to_path_buf(), e)
}

fn load(path: Option<&Path>) -> Result<HybridConfigFile, CliError> {
    Ok(match path {
        Some(p) => HybridConfigFile::load(p)?,
        None => HybridConfigFile::reference(),
    })
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(io_err(path))?;
    fs::write(path, buf).map_err(io_err(path))
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status. Normal output goes to `stdout`, diagnostics to the log.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    let stdout = PathBuf::from("<stdout>");
    match cmd {
        Command::Simulate { config, out: dir } => {
            let (cfg, sc) = load(config.as_deref())?.resolve(true)?;
            let report = simulate(&cfg, &sc, dir)?;
            out.write_all(report.as_bytes()).map_err(io_err(&stdout))
        }
        Command::Predict { config, out: path } => {
            let (cfg, sc) = load(config.as_deref())?.resolve(true)?;
            let p = predictions_for(&cfg, &sc);
            for (n, v, u) in p.rows() {
                writeln!(out, "{n}: {} {u}", fmt_sig(v)).map_err(io_err(&stdout))?;
            }
            if let Some(path) = path {
                write_file(path, |b| write_predictions_csv(b, &p))?;
            }
            Ok(())
        }
        Command::Bode { config, target, out: path } => {
            let target: BodeTarget = target.parse()?;
            let (cfg, sc) = load(config.as_deref())?.resolve(true)?;
            let f = bode_transfer(&cfg, target, first_step_loads(&sc), sc.toggles)?;
            let pts = bode_export(&f, &default_bode_grid())?;
            write_file(path, |b| write_bode_csv(b, &pts))?;
            info!("wrote {} points to {}", pts.len(), path.display());
            Ok(())
        }
        Command::Design { config } => {
            let (cfg, _) = load(config.as_deref())?.resolve(false)?;
            let text = design_report(&cfg)?;
            out.write_all(text.as_bytes()).map_err(io_err(&stdout))
        }
    }
}

/// Load change of the first event instant, watts per subgrid.
pub fn first_step_loads(sc: &Scenario) -> [f64; 3] {
    let mut loads = [0.0; 3];
    if let Some(t0) = sc.events.first().map(|e| e.time) {
        for e in sc.events.iter().filter(|e| (e.time - t0).abs() < 0.5 * sc.step) {
            loads[e.subgrid.index()] += e.load_delta;
        }
    }
    loads
}

/// Rates for the first load step, shares for the final total load.
pub fn predictions_for(cfg: &HybridConfig, sc: &Scenario) -> Predictions {
    let step: f64 = first_step_loads(sc).iter().sum();
    let total: f64 = sc.final_loads().iter().sum();
    Predictions::new(cfg, step, total)
}

/// Runs the scenario, writes the artifacts into `dir` and returns the
/// metrics text.
pub fn simulate(cfg: &HybridConfig, sc: &Scenario, dir: &Path) -> Result<String, CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let trace = run(sc, cfg)?;
    let event = sc.events.first().map_or(0.0, |e| e.time);
    let mut m = measure_lenient(&trace, event);
    if m.is_err() {
        // an event on the last sample leaves nothing to difference against
        m = measure_lenient(&trace, 0.0);
    }
    let m = m?;
    if !m.settled {
        warn!("trace has not settled within the horizon; steady values are provisional");
    }
    write_file(&dir.join("trace.csv"), |b| trace.write_csv(b))?;
    let text = m.to_text();
    write_file(&dir.join("metrics.txt"), |b| b.write_all(text.as_bytes()))?;
    write_file(&dir.join("metrics.json"), |b| b.write_all(m.to_json().as_bytes()))?;
    info!("wrote {} samples to {}", trace.len(), dir.display());
    Ok(text)
}

/// Designed droops, concatenator cutoffs and the cutoff check.
pub fn design_report(cfg: &HybridConfig) -> Result<String, Error> {
    let c = cfg.concatenators()?;
    let bound = cfg.omega_0_bound();
    let ok = cfg.omega_0 >= bound;
    let pi = std::f64::consts::PI;
    let mut s = String::new();
    let mut line = |k: &str, v: f64, u: &str| s.push_str(&format!("{k}: {} {u}\n", fmt_sig(v)));
    line("R_ac", cfg.ac.droop(), "1");
    line("R_dc", cfg.dc.droop(), "1");
    line("y_L", cfg.ds.droop(), "1");
    line("omega_ac", c.omega_ac, "rad/s");
    line("omega_dc", c.omega_dc, "rad/s");
    line("omega_ds", c.omega_ds, "rad/s");
    line("omega_0", cfg.omega_0, "rad/s");
    line("omega_0_min", bound, "rad/s");
    line("omega_0_min_over_pi", bound / pi, "1");
    s.push_str(&format!("omega_0_ok: {ok}\n"));
    if !ok {
        s.push_str(&format!(
            "warning: omega_0 below the single-precision bound by a factor {}\n",
            fmt_sig(bound / cfg.omega_0)
        ));
    }
    Ok(s)
}
