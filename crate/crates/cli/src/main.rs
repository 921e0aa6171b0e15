mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Debug, Parser)]
#[command(
    name = "pontryagin",
    version,
    about = "Passive systems with Pontryagin state spaces"
)]
pub struct Cli {
    /// Metric tolerance; the PSD and rank tolerances scale with it (1/10 and 1/100).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Interior sample count; boundary sampling uses four times as many points.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Seed for all sample point sets.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for constructed systems, CSV data and a copy of the report.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Right,
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Obs,
    Cont,
    Simple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimilarityMode {
    Unitary,
    Weak,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metric class, Krylov subspaces and index preservation of a system.
    Classify { path: PathBuf },
    /// Kreĭn–Langer factorization of the transfer function, and of the
    /// system itself when it is conservative, co-isometric or isometric.
    FactorKl {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "right")]
        mode: Mode,
    },
    /// Cascade of two systems (first acts first) with an obstruction test.
    Product {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum, default_value = "obs")]
        check: Check,
    },
    /// Negative squares of the kernel against the disc pole count.
    Negsq { path: PathBuf },
    /// Conservative embedding of a passive system via its Julia operator.
    JuliaEmbed { path: PathBuf },
    /// Defect functions and boundary behavior.
    Defect { path: PathBuf },
    /// Stability class of a passive, index-preserving system.
    Stability { path: PathBuf },
    /// Minimal realization from a file of Taylor coefficients.
    Realize { path: PathBuf },
    /// Unitary or weak similarity of two systems.
    Similar {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum, default_value = "unitary")]
        kind: SimilarityMode,
    },
    /// Non-observable cascade of co-isometric observable factor realizations
    /// built from S = (a, 1/b)/√2.
    ExampleCounter {
        /// Zero of the Blaschke factor b, as `re` or `re,im`.
        #[arg(long, default_value = "0.5", value_parser = parse_complex, allow_hyphen_values = true)]
        alpha: Complex64,
        /// Scalar inner function a: `z`, `z^k` or `1`.
        #[arg(long, default_value = "z", value_parser = parse_monomial)]
        a: usize,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err("expected `re` or `re,im`".into()),
    }
}

fn parse_monomial(s: &str) -> Result<usize, String> {
    match s.trim() {
        "1" => Ok(0),
        "z" => Ok(1),
        t => t
            .strip_prefix("z^")
            .and_then(|k| k.parse().ok())
            .ok_or_else(|| format!("expected `z`, `z^k` or `1`, got `{t}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = commands::run(&cli);
    let text = report.to_json();
    let _ = writeln!(std::io::stdout(), "{text}");
    if let Some(dir) = &cli.out {
        if let Err(e) = std::fs::write(dir.join("report.json"), text + "\n") {
            eprintln!("could not write report: {e}");
        }
    }
    if let Some(e) = &report.error {
        eprintln!("error ({}): {}", e.kind, e.message);
    }
    ExitCode::from(report.exit_code() as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(
            parse_complex("-0.3, 0.2").unwrap(),
            Complex64::new(-0.3, 0.2)
        );
        assert!(parse_complex("a,b,c").is_err());
    }

    #[test]
    fn monomial_arguments() {
        assert_eq!(parse_monomial("z").unwrap(), 1);
        assert_eq!(parse_monomial("z^3").unwrap(), 3);
        assert_eq!(parse_monomial("1").unwrap(), 0);
        assert!(parse_monomial("exp(z)").is_err());
    }
}
