//! Command-line interface.
//!
//! Subcommands: `sim` (frequency sweep of a netlist), `power-sweep`
//! (extinction versus source power for one switch), `fit` (calibrate the
//! model to a dataset), and `validate` (parse and wiring checks only).
//! Exit codes: 0 success, 1 usage error, 2 input/validation error.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::calibration::{builtin_paper_dataset, fit, ParameterVector};
use crate::device::{circuit_power_sweep, simulate_circuit, SwitchModelSet};
use crate::io;
use crate::netlist::NetlistAst;
use crate::optical::build_network;

/// Frequency sweep request: `points` samples from `f_start_ghz` to
/// `f_stop_ghz`, spaced linearly or logarithmically, at a fixed source
/// power. A single-point sweep samples `f_start_ghz`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub f_start_ghz: f64,
    pub f_stop_ghz: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub source_power_mw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Linear,
    Log,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.f_start_ghz > 0.0) {
            return Err(format!("sweep start must be > 0 GHz, got {}", self.f_start_ghz));
        }
        if self.f_stop_ghz < self.f_start_ghz {
            return Err(format!(
                "sweep stop {} GHz is below start {} GHz",
                self.f_stop_ghz, self.f_start_ghz
            ));
        }
        if self.points < 1 {
            return Err("sweep needs at least one point".to_string());
        }
        if self.points > 1 && self.f_stop_ghz == self.f_start_ghz {
            return Err("multi-point sweep needs f_stop > f_start".to_string());
        }
        if self.source_power_mw < 0.0 {
            return Err(format!(
                "source power must be >= 0 mW, got {}",
                self.source_power_mw
            ));
        }
        Ok(())
    }

    pub fn frequencies_hz(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.f_start_ghz * 1e9];
        }
        let n = self.points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                let f_ghz = match self.spacing {
                    Spacing::Linear => {
                        self.f_start_ghz + t * (self.f_stop_ghz - self.f_start_ghz)
                    }
                    Spacing::Log => {
                        10f64.powf(
                            self.f_start_ghz.log10()
                                + t * (self.f_stop_ghz.log10() - self.f_start_ghz.log10()),
                        )
                    }
                };
                f_ghz * 1e9
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    S2p,
}

#[derive(Parser)]
#[command(
    name = "morims",
    about = "Simulate and calibrate optically gated photoconductive microwave switches",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every switch in a netlist over a frequency sweep
    Sim {
        /// Netlist file
        netlist: PathBuf,
        /// Frequency grid as start:stop:points, in GHz
        #[arg(long, value_name = "F0:F1:N")]
        sweep: String,
        /// Grid spacing
        #[arg(long, value_enum, default_value = "linear")]
        spacing: Spacing,
        /// Optical source power in mW (overrides the netlist value)
        #[arg(long, value_name = "MW")]
        power: f64,
        /// Output file
        #[arg(long)]
        out: PathBuf,
        /// Output format: sweep CSV or on-state Touchstone
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Parameter file overriding the model defaults
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Extinction ratio of one switch versus source power
    PowerSweep {
        /// Netlist file
        netlist: PathBuf,
        /// Switch id within the netlist
        #[arg(long)]
        switch: String,
        /// Source power grid as start:stop:points, in mW
        #[arg(long, value_name = "P0:P1:N")]
        powers: String,
        /// Comma-separated frequencies in GHz
        #[arg(long, value_name = "GHZ,GHZ,...")]
        freqs: String,
        /// Output CSV file
        #[arg(long)]
        out: PathBuf,
        /// Parameter file overriding the model defaults
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Calibrate model parameters against a measurement dataset
    Fit {
        /// Dataset CSV; defaults to the built-in measured reference points
        #[arg(long)]
        data: Option<PathBuf>,
        /// Where to write the fitted parameter file
        #[arg(long)]
        out_params: PathBuf,
        /// Objective evaluation budget
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Seed for restart perturbations
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Parse a netlist and check its wiring without simulating
    Validate {
        /// Netlist file
        netlist: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) => write!(f, "{m}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn input(msg: impl fmt::Display) -> CliError {
    CliError::Input(msg.to_string())
}

/// Parses `start:stop:points`.
fn parse_grid_spec(text: &str, what: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("--{what} expects start:stop:points, got `{text}`")));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("--{what}: malformed number `{}`", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("--{what}: malformed number `{}`", parts[1])))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|_| usage(format!("--{what}: malformed point count `{}`", parts[2])))?;
    Ok((start, stop, points))
}

fn parse_freq_list(text: &str) -> Result<Vec<f64>, CliError> {
    let mut freqs = Vec::new();
    for tok in text.split(',') {
        let f: f64 = tok
            .trim()
            .parse()
            .map_err(|_| usage(format!("--freqs: malformed frequency `{tok}`")))?;
        if f <= 0.0 {
            return Err(usage(format!("--freqs: frequencies must be > 0 GHz, got {f}")));
        }
        freqs.push(f * 1e9);
    }
    if freqs.is_empty() {
        return Err(usage("--freqs: list is empty"));
    }
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();
    Ok(freqs)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_netlist(path: &Path) -> Result<NetlistAst, CliError> {
    let text = read_file(path)?;
    NetlistAst::parse(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_params(path: Option<&Path>) -> Result<ParameterVector, CliError> {
    let base = ParameterVector::default();
    match path {
        None => Ok(base),
        Some(p) => {
            let text = read_file(p)?;
            io::parse_parameter_file(&text, &base, &p.display().to_string()).map_err(input)
        }
    }
}

fn model_set_for(params: &ParameterVector) -> Result<SwitchModelSet, CliError> {
    let models = params.model_set();
    models
        .tapered_material
        .validate()
        .and_then(|_| models.through_material.validate())
        .and_then(|_| models.parasitics.validate())
        .map_err(input)?;
    Ok(models)
}

fn write_out(path: &Path, contents: &str) -> Result<(), CliError> {
    io::write_atomic(path, contents).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// Runs the CLI on the given arguments (the first item is the program
/// name) and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sim {
            netlist,
            sweep,
            spacing,
            power,
            out,
            format,
            params,
        } => {
            let ast = load_netlist(&netlist)?;
            let (f0, f1, points) = parse_grid_spec(&sweep, "sweep")?;
            let spec = SweepSpec {
                f_start_ghz: f0,
                f_stop_ghz: f1,
                points,
                spacing,
                source_power_mw: power,
            };
            spec.validate().map_err(usage)?;
            let models = model_set_for(&load_params(params.as_deref())?)?;
            let freqs = spec.frequencies_hz();
            match format {
                OutputFormat::Csv => {
                    let results = simulate_circuit(&ast, &models, &freqs, power).map_err(input)?;
                    write_out(&out, &io::sim_results_csv(&results, power))?;
                }
                OutputFormat::S2p => write_s2p_files(&ast, &models, &freqs, power, &out)?,
            }
            Ok(())
        }
        Command::PowerSweep {
            netlist,
            switch,
            powers,
            freqs,
            out,
            params,
        } => {
            let ast = load_netlist(&netlist)?;
            let (p0, p1, n) = parse_grid_spec(&powers, "powers")?;
            if p0 < 0.0 || p1 < p0 || n < 1 {
                return Err(usage(format!(
                    "--powers: need 0 <= start <= stop and points >= 1, got `{powers}`"
                )));
            }
            let grid: Vec<f64> = if n == 1 {
                vec![p0]
            } else {
                (0..n)
                    .map(|i| p0 + (p1 - p0) * i as f64 / (n - 1) as f64)
                    .collect()
            };
            let freqs_hz = parse_freq_list(&freqs)?;
            let models = model_set_for(&load_params(params.as_deref())?)?;
            let rows =
                circuit_power_sweep(&ast, &models, &switch, &grid, &freqs_hz).map_err(input)?;
            write_out(&out, &io::power_sweep_csv(&switch, &rows))
        }
        Command::Fit {
            data,
            out_params,
            budget,
            seed,
        } => {
            let dataset = match data {
                None => builtin_paper_dataset(),
                Some(path) => {
                    let text = read_file(&path)?;
                    io::parse_dataset_csv(&text, &path.display().to_string()).map_err(input)?
                }
            };
            let result =
                fit(&dataset, &ParameterVector::default(), budget, seed).map_err(input)?;
            write_out(&out_params, &io::write_parameter_file(&result.best))?;
            println!(
                "fit: rms = {:.6} dB over {} points, {} evaluations, converged = {}",
                result.rms_error,
                dataset.points.len(),
                result.evaluations,
                result.converged
            );
            for name in &result.diagnostics.insensitive {
                println!("fit: parameter {name} is not constrained by this dataset");
            }
            Ok(())
        }
        Command::Validate { netlist } => {
            let ast = load_netlist(&netlist)?;
            let graph = build_network(&ast).map_err(input)?;
            println!(
                "ok: {} elements, {} switches",
                graph.elements().len(),
                graph.taps().count()
            );
            Ok(())
        }
    }
}

/// Writes the on-state S-parameters of each switch as a 2-port Touchstone
/// file. A single-switch netlist writes exactly `out`; with several
/// switches each file gets the switch id before the extension.
fn write_s2p_files(
    ast: &NetlistAst,
    models: &SwitchModelSet,
    freqs_hz: &[f64],
    source_power_mw: f64,
    out: &Path,
) -> Result<(), CliError> {
    let graph = build_network(ast)
        .map_err(input)?
        .with_source_power(source_power_mw);
    let solution = graph.propagate();
    let taps: Vec<_> = graph.taps().collect();
    if taps.is_empty() {
        return Err(input("netlist has no switches to report"));
    }
    for (id, device_type, coupling) in &taps {
        let sw = models.instance(*id, *device_type, *coupling);
        let absorbed = solution.absorbed[*id];
        let mut points = Vec::with_capacity(freqs_hz.len());
        for &f in freqs_hz {
            points.push(sw.s_params(absorbed, f).map_err(input)?);
        }
        let text = io::write_touchstone(&points, models.z0).map_err(input)?;
        let path = if taps.len() == 1 {
            out.to_path_buf()
        } else {
            sibling_with_id(out, id)
        };
        write_out(&path, &text)?;
    }
    Ok(())
}

fn sibling_with_id(out: &Path, id: &str) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    let ext = out.extension().map(|e| e.to_string_lossy().to_string());
    let name = match ext {
        Some(ext) => format!("{stem}.{id}.{ext}"),
        None => format!("{stem}.{id}"),
    };
    out.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_spec_grids() {
        let spec = SweepSpec {
            f_start_ghz: 1.0,
            f_stop_ghz: 40.0,
            points: 4,
            spacing: Spacing::Linear,
            source_power_mw: 2.0,
        };
        spec.validate().unwrap();
        assert_eq!(spec.frequencies_hz(), vec![1e9, 14e9, 27e9, 40e9]);

        let logspec = SweepSpec {
            spacing: Spacing::Log,
            points: 3,
            f_stop_ghz: 100.0,
            ..spec.clone()
        };
        let f = logspec.frequencies_hz();
        assert!((f[1] - 10e9).abs() < 1.0);

        let single = SweepSpec {
            points: 1,
            ..spec.clone()
        };
        assert_eq!(single.frequencies_hz(), vec![1e9]);

        assert!(SweepSpec {
            f_start_ghz: 0.0,
            ..spec.clone()
        }
        .validate()
        .is_err());
        assert!(SweepSpec {
            f_stop_ghz: 0.5,
            ..spec
        }
        .validate()
        .is_err());
    }

    #[test]
    fn grid_spec_parsing() {
        assert_eq!(parse_grid_spec("0.1:40:400", "sweep").unwrap(), (0.1, 40.0, 400));
        assert!(parse_grid_spec("1:40", "sweep").is_err());
        assert!(parse_grid_spec("a:40:4", "sweep").is_err());
    }

    #[test]
    fn freq_list_parsing_sorts_and_validates() {
        assert_eq!(parse_freq_list("20,5,40").unwrap(), vec![5e9, 20e9, 40e9]);
        assert!(parse_freq_list("5,-1").is_err());
        assert!(parse_freq_list("five").is_err());
    }
}
