//! Command-line front end. [`run`] takes the arguments and standard input
//! and returns what the process would print, so it is testable in-process.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::convex::{t_operator, tv_norm, DyadicMeasure};
use crate::dfjp::{gauge_n, triple_norm};
use crate::error::{LabError, Result};
use crate::experiments::{self, ExperimentConfig};
use crate::rational::{self, Rational};
use crate::tree::{Antichain, TreeVector};
use crate::treespace::eu_norm;
use crate::tsirelson::{tsirelson_norm_with_certificate, NatVector, NormCertificate};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "dentlab",
    version,
    about = "Exact norms, gauges and slice experiments on the dyadic tree"
)]
pub struct Cli {
    /// Tree depth for gauges and experiments.
    #[arg(long, global = true, default_value_t = 5)]
    pub depth: usize,
    /// Number of gauge levels summed by triple-norm.
    #[arg(long, global = true, default_value_t = 8)]
    pub levels: u32,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 1729)]
    pub seed: u64,
    /// Output format; experiments default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tsirelson norm of a sequence: {"entries":[{"index":3,"value":"1/2"}]}.
    NormT { input: Option<PathBuf> },
    /// Tree norm of a tree vector: {"entries":[{"node":"01","value":"1"}]}.
    NormEu { input: Option<PathBuf> },
    /// Gauge of 2ⁿW + 2⁻ⁿB at a tree vector.
    Gauge {
        #[arg(long)]
        n: u32,
        input: Option<PathBuf>,
    },
    /// Square-summed gauges over levels 1..=levels.
    TripleNorm { input: Option<PathBuf> },
    /// Image of a dyadic measure: {"depth":2,"leaves":[{"node":"01","value":"1"}]}.
    TOp { input: Option<PathBuf> },
    /// Seeded experiment run.
    Experiments {
        name: String,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Slices per convex combination (convex-slices only).
        #[arg(long, default_value_t = 3)]
        slices: usize,
    },
}

/// Everything a run produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn read_input(path: &Option<PathBuf>, stdin: &str) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(fs::read_to_string(p)?),
        _ => Ok(stdin.to_string()),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| LabError::parse(what, e.to_string()))
}

#[derive(Serialize)]
struct NormOutput<'a> {
    value: String,
    decimal: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<&'a Antichain>,
    certificate: &'a NormCertificate,
}

impl<'a> NormOutput<'a> {
    fn new(
        value: &Rational,
        witness: Option<&'a Antichain>,
        certificate: &'a NormCertificate,
    ) -> Self {
        NormOutput {
            value: rational::format_rational(value),
            decimal: rational::decimal(value),
            witness,
            certificate,
        }
    }
}

#[derive(Serialize)]
struct ImageOutput {
    image: TreeVector,
    norm: String,
    tv_norm: String,
    bounded: bool,
}

fn value_csv(v: &Rational) -> String {
    format!(
        "value,decimal\n{},{}\n",
        rational::format_rational(v),
        rational::decimal(v)
    )
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn run_command(cli: &Cli, stdin: &str, stderr: &mut String) -> Result<(String, i32)> {
    let format = cli.format;
    let json = format != Some(Format::Csv);
    if cli.tol.is_nan() || cli.tol <= 0.0 {
        return Err(LabError::InvalidInput("--tol must be positive".into()));
    }
    let out = match &cli.command {
        Command::NormT { input } => {
            let x: NatVector = parse_json("input", &read_input(input, stdin)?)?;
            let (value, certificate) = tsirelson_norm_with_certificate(&x)?;
            if json {
                pretty(&NormOutput::new(&value, None, &certificate))?
            } else {
                value_csv(&value)
            }
        }
        Command::NormEu { input } => {
            let x: TreeVector = parse_json("input", &read_input(input, stdin)?)?;
            let r = eu_norm(&x)?;
            if json {
                pretty(&NormOutput::new(&r.value, Some(&r.witness), &r.certificate))?
            } else {
                value_csv(&r.value)
            }
        }
        Command::Gauge { n, input } => {
            let y: TreeVector = parse_json("input", &read_input(input, stdin)?)?;
            let r = gauge_n(&y, *n, cli.depth, cli.tol)?;
            if json {
                pretty(&r)?
            } else {
                format!(
                    "n,value,lower,upper,residual\n{},{},{},{},{}\n",
                    r.n, r.value, r.lower, r.upper, r.residual
                )
            }
        }
        Command::TripleNorm { input } => {
            let y: TreeVector = parse_json("input", &read_input(input, stdin)?)?;
            let r = triple_norm(&y, cli.levels, cli.depth, cli.tol)?;
            if json {
                pretty(&r)?
            } else {
                let mut s = String::from("n,value,lower,upper\n");
                for g in &r.gauges {
                    s += &format!("{},{},{},{}\n", g.n, g.value, g.lower, g.upper);
                }
                s += &format!("total,{},,\n", r.value);
                s
            }
        }
        Command::TOp { input } => {
            let mu: DyadicMeasure = parse_json("input", &read_input(input, stdin)?)?;
            let image = t_operator(&mu);
            let norm = eu_norm(&image)?.value;
            let tv = tv_norm(&mu);
            if json {
                pretty(&ImageOutput {
                    bounded: norm <= tv,
                    norm: rational::format_rational(&norm),
                    tv_norm: rational::format_rational(&tv),
                    image,
                })?
            } else {
                let mut s = String::from("node,value,decimal\n");
                for (n, v) in image.iter() {
                    s += &format!(
                        "{n},{},{}\n",
                        rational::format_rational(v),
                        rational::decimal(v)
                    );
                }
                s
            }
        }
        Command::Experiments {
            name,
            instances,
            slices,
        } => {
            let cfg = ExperimentConfig {
                depth: cli.depth,
                instances: *instances,
                seed: cli.seed,
                levels: cli.levels,
                tol: cli.tol,
                slices: *slices,
            };
            let report = experiments::run(name, &cfg)?;
            *stderr += &report.summary();
            *stderr += "\n";
            let body = if format == Some(Format::Json) {
                pretty(&report)?
            } else {
                report.to_csv()?
            };
            if let Some(v) = &report.violation {
                let dump = pretty(v)?;
                if let Some(out) = &cli.out {
                    let mut path = out.clone().into_os_string();
                    path.push(".violation.json");
                    fs::write(path, &dump)?;
                }
                *stderr += "violating instance:\n";
                *stderr += &dump;
                return Ok((body, 4));
            }
            body
        }
    };
    Ok((out, 0))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &str) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let mut stderr = String::new();
    match run_command(&cli, stdin, &mut stderr) {
        Ok((body, code)) => match &cli.out {
            Some(path) => match fs::write(path, &body) {
                Ok(()) => Outcome {
                    code,
                    stdout: String::new(),
                    stderr,
                },
                Err(e) => {
                    let e = LabError::from(e);
                    Outcome {
                        code: e.exit_code(),
                        stdout: String::new(),
                        stderr: stderr + &format!("error: {e}\n"),
                    }
                }
            },
            None => Outcome {
                code,
                stdout: body,
                stderr,
            },
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: stderr + &format!("error: {e}\n"),
        },
    }
}

/// Whether a command reads standard input.
pub fn wants_stdin<I, T>(args: I) -> bool
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => match cli.command {
            Command::NormT { input }
            | Command::NormEu { input }
            | Command::Gauge { input, .. }
            | Command::TripleNorm { input }
            | Command::TOp { input } => input.is_none_or(|p| p.as_os_str() == "-"),
            Command::Experiments { .. } => false,
        },
        Err(_) => false,
    }
}
