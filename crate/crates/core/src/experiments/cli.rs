//! Command-line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use super::{load_config_with, run_and_write, write_table, ConfigOverrides, Experiment, Profile, ResultRow};
use crate::encoding::{make_encoding, validate_encoding, EncodingFamilySpec};
use crate::error::Error;

#[derive(Parser, Debug)]
#[command(name = "paritygate", version, about = "Multi-target parity-qubit gate simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid points.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Truth tables of every encoding family under the exact gate.
    VerifyGate(Common),
    /// Figure sweeps.
    Run {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        common: Common,
    },
    /// Encoding checks.
    Encodings {
        #[command(subcommand)]
        action: EncodingsAction,
    },
    /// Dispersive-regime ratios and gate timing.
    RegimeReport(Common),
}

#[derive(Subcommand, Debug)]
pub enum EncodingsAction {
    /// Validates the configured encodings, or the catalogue.
    Check(Common),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Figure {
    Fig6,
    Fig7,
    Fig8,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ProfileArg {
    Smoke,
    Reproduce,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Smoke => Profile::Smoke,
            ProfileArg::Reproduce => Profile::Reproduce,
        }
    }
}

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_CONVERGENCE: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// Exit status for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        Error::IntegrationAccuracy(_) => EXIT_CONVERGENCE,
        _ => EXIT_CONFIG,
    }
}

pub fn run(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::VerifyGate(c) => sweep(Experiment::TruthTable, c),
        Command::Run { figure, common } => {
            let e = match figure {
                Figure::Fig6 => Experiment::Fig6,
                Figure::Fig7 => Experiment::Fig7,
                Figure::Fig8 => Experiment::Fig8,
            };
            sweep(e, common)
        }
        Command::RegimeReport(c) => sweep(Experiment::RegimeReport, c),
        Command::Encodings {
            action: EncodingsAction::Check(c),
        } => check_encodings(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn overrides(e: Option<Experiment>, c: &Common) -> ConfigOverrides {
    ConfigOverrides {
        experiment: e,
        profile: c.profile.map(Profile::from),
        output_path: c.out.clone(),
        jobs: c.jobs,
    }
}

fn sweep(experiment: Experiment, c: Common) -> crate::Result<u8> {
    let (params, dec, mut spec) = load_config_with(&c.config, &overrides(Some(experiment), &c))?;
    if spec.output_path.is_none() {
        spec.output_path = Some(PathBuf::from(format!("{experiment}.csv")));
    }
    let rows = run_and_write(&spec, &params, &dec)?;
    summarize(&rows);
    if let Some(p) = &spec.output_path {
        println!("wrote {} rows to {}", rows.len(), p.display());
    }
    Ok(if rows.iter().all(ResultRow::is_ok) { 0 } else { EXIT_CONVERGENCE })
}

fn summarize(rows: &[ResultRow]) {
    for r in rows {
        let coords: Vec<String> = r.coords.iter().map(|(k, v)| format!("{k}={}", v.render())).collect();
        println!(
            "{:<40} fidelity {:.6}  max {:.6}  converged {}  {}",
            coords.join(" "),
            r.fidelity,
            r.fidelity_at_max,
            r.converged,
            r.status
        );
    }
}

fn check_encodings(c: Common) -> crate::Result<u8> {
    let (_, _, spec) = load_config_with(&c.config, &overrides(None, &c))?;
    let families = if spec.encodings.is_empty() {
        EncodingFamilySpec::catalogue()
    } else {
        spec.encodings.clone()
    };
    let header: Vec<String> = [
        "family",
        "dim",
        "parity_residual_e",
        "parity_residual_o",
        "overlap",
        "norm_e",
        "norm_o",
        "tail_e",
        "tail_o",
        "passed",
        "status",
    ]
    .map(String::from)
    .to_vec();
    let mut records = Vec::new();
    let mut all_ok = true;
    for fam in &families {
        let f = super::format_float;
        let rec = match make_encoding(fam, spec.truth_dim) {
            Ok(enc) => {
                let r = validate_encoding(&enc);
                all_ok &= r.passed;
                vec![
                    r.family,
                    spec.truth_dim.to_string(),
                    f(r.parity_residual_e),
                    f(r.parity_residual_o),
                    f(r.overlap),
                    f(r.norm_e),
                    f(r.norm_o),
                    f(r.tail_e),
                    f(r.tail_o),
                    r.passed.to_string(),
                    "ok".into(),
                ]
            }
            Err(e) => {
                all_ok = false;
                let mut v = vec![fam.label().to_string(), spec.truth_dim.to_string()];
                v.extend(std::iter::repeat_n("NaN".to_string(), 7));
                v.push("false".into());
                v.push(format!("error: {e}"));
                v
            }
        };
        println!("{}", rec.join(","));
        records.push(rec);
    }
    let path = c.out.unwrap_or_else(|| PathBuf::from("encodings.csv"));
    write_table(&path, &header, records.into_iter())?;
    Ok(if all_ok { 0 } else { EXIT_CONFIG })
}
