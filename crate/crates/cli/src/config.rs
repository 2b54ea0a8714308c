//! Flag, config-file and default layering.
//!
//! Every subcommand flag is taken as text and parsed here, so a bad value is reported
//! the same way whether it came from the command line or from the file.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::record::{Record, Value};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "aap", version, about = "Asymmetric avalanche process: exact cumulants, simulation and scaling functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// json or csv.
    #[arg(long, global = true)]
    pub format: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact J and Delta from the finite sums.
    Exact(ExactArgs),
    /// Brute-force generator: Perron root derivatives on small rings.
    Oracle(OracleArgs),
    /// Monte Carlo estimates of J and Delta.
    Simulate(SimulateArgs),
    /// F, G or J on a grid of beta.
    Scaling(ScalingArgs),
    /// First-return area moments of the drifted Ornstein-Uhlenbeck process.
    Ou(OuArgs),
    /// Runs the acceptance checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long = "N")]
    pub n: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long = "R")]
    pub r: Option<String>,
    #[arg(long = "L")]
    pub l: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// exact (rational arithmetic) or float.
    #[arg(long)]
    pub backend: Option<String>,
    /// Relative tolerance of the float diffusion series.
    #[arg(long)]
    pub tol: Option<String>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Finite-difference step in gamma.
    #[arg(long)]
    pub h: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "t-max")]
    pub t_max: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub batches: Option<String>,
    /// Independent replicas run in parallel.
    #[arg(long)]
    pub replicas: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// F, G or J.
    #[arg(long)]
    pub curve: Option<String>,
    #[arg(long = "beta-min", allow_hyphen_values = true)]
    pub beta_min: Option<String>,
    #[arg(long = "beta-max", allow_hyphen_values = true)]
    pub beta_max: Option<String>,
    /// Number of grid points.
    #[arg(long)]
    pub steps: Option<String>,
}

#[derive(Debug, Args)]
pub struct OuArgs {
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    /// Also run the Monte Carlo check.
    #[arg(long)]
    pub mc: bool,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long = "n-paths")]
    pub n_paths: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(value_enum, default_value = "quick")]
    pub level: LevelArg,
    /// Comma-separated check ids to run (default: all of the level).
    #[arg(long)]
    pub only: Option<String>,
    /// Test hook: replace mu_2 in the table used by the stationarity check.
    #[arg(long = "break-mu2", hide = true)]
    pub break_mu2: Option<f64>,
}

/// Keys accepted in a config file.
const KNOWN_KEYS: &[&str] = &[
    "N", "p", "q", "R", "L", "backend", "tol", "h", "t-max", "seed", "batches", "replicas", "curve", "beta-min", "beta-max", "steps", "alpha", "beta",
    "mc", "dt", "n-paths", "format", "output",
];

pub fn read_config_file(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<HashMap<String, String>, CliError> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::config("config", format!("line {} is not key = value", i + 1)))?;
        let k = k.trim();
        if !KNOWN_KEYS.contains(&k) {
            return Err(CliError::config(k, "unknown key in config file"));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Resolves each key from flag, then file, then default, and records the result.
#[derive(Debug, Default)]
pub struct Resolver {
    file: HashMap<String, String>,
    pub resolved: Record,
}

impl Resolver {
    pub fn new(file: HashMap<String, String>) -> Self {
        Resolver { file, resolved: Record::new() }
    }

    /// The raw text for `key`, if either layer sets it.
    pub fn text(&self, key: &str, flag: Option<&String>) -> Option<String> {
        flag.cloned().or_else(|| self.file.get(key).cloned())
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<&String>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Clone + Into<Value>,
    {
        let v = match self.text(key, flag) {
            Some(s) => parse_as::<T>(key, &s)?,
            None => default,
        };
        self.resolved.push(key, v.clone());
        Ok(v)
    }

    pub fn get_opt<T>(&mut self, key: &str, flag: Option<&String>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Clone + Into<Value>,
    {
        let v = match self.text(key, flag) {
            Some(s) => Some(parse_as::<T>(key, &s)?),
            None => None,
        };
        self.resolved.push(key, v.clone());
        Ok(v)
    }

    pub fn record(&mut self, key: &str, v: impl Into<Value>) {
        self.resolved.push(key, v);
    }
}

pub fn parse_as<T: FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse::<T>().map_err(|_| CliError::config(key, format!("cannot parse {s:?} as {}", short_type::<T>())))
}

fn short_type<T>() -> &'static str {
    let name = std::any::type_name::<T>();
    match name {
        "f64" => "a number",
        "usize" | "u64" => "a non-negative integer",
        "bool" => "true or false",
        _ => "a value",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parsing() {
        let m = parse_config_text("# comment\nN = 8\n  q=-0.5 # trailing\n\n").unwrap();
        assert_eq!(m["N"], "8");
        assert_eq!(m["q"], "-0.5");
        assert!(matches!(parse_config_text("nope = 1"), Err(CliError::Config { field, .. }) if field == "nope"));
        assert!(matches!(parse_config_text("N 8"), Err(CliError::Config { field, .. }) if field == "config"));
    }

    #[test]
    fn precedence_flag_file_default() {
        let mut r = Resolver::new(parse_config_text("N = 8\np = 3").unwrap());
        assert_eq!(r.get("N", Some(&"4".to_string()), 16usize).unwrap(), 4);
        assert_eq!(r.get("p", None, 1usize).unwrap(), 3);
        assert_eq!(r.get("seed", None, 7u64).unwrap(), 7);
        assert_eq!(r.resolved.get("N"), Some(&Value::Int(4)));
        let err = r.get::<f64>("q", Some(&"abc".to_string()), -0.5).unwrap_err();
        assert!(err.to_string().contains("`q`"), "{err}");
    }
}
