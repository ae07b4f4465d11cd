//! `qdiv`: divergences, variational values, martingale sequences,
//! strong-converse exponents, measured divergences and GICAR moments from
//! JSON inputs, written as CSV or JSON tables.
//!
//! Exit status is 0 on success, 2 when inputs fail validation and 3 when a
//! computation fails numerically.

mod commands;
mod table;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qdiv::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use commands::*;
use table::Table;

#[derive(Debug, Parser)]
#[command(name = "qdiv", version, about = "Quantum Rényi divergence laboratory")]
struct Cli {
    /// Write the table here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// JSON object of flag defaults; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sandwiched and standard Rényi quantities over an α grid
    Div(DivArgs),
    /// Closed-form and numerically optimized variational values
    Variational(VariationalArgs),
    /// D*_α of the restrictions along a subalgebra chain
    Martingale(MartingaleArgs),
    /// Finite-n strong-converse exponents and the Hoeffding anti-divergence
    Sce(SceArgs),
    /// Hoeffding anti-divergence over an r grid
    Hoeffding(HoeffdingArgs),
    /// Generalized κ-cutoff rates
    Cutoff(CutoffArgs),
    /// Measured and test-measured Rényi divergences
    Measured(MeasuredArgs),
    /// GICAR level-n moments against their classical limit
    Gicar(GicarArgs),
}

/// Overlays the flags given on the command line onto the config defaults.
/// Absent options, unset switches and empty lists do not override.
fn merge<T: Serialize + DeserializeOwned>(cli: &T, config: &Map<String, Value>) -> Result<T> {
    let mut merged = config.clone();
    if let Value::Object(given) = serde_json::to_value(cli).map_err(|e| Error::Parse(e.to_string()))? {
        for (k, v) in given {
            let unset = match &v {
                Value::Null | Value::Bool(false) => true,
                Value::Array(a) => a.is_empty(),
                _ => false,
            };
            if !unset {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Error::Parse(format!("config: {e}")))
}

fn read_config(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))? {
        Value::Object(map) => Ok(map),
        _ => Err(Error::Parse(format!("{}: expected a JSON object", path.display()))),
    }
}

fn run_command(command: &Command, config: &Map<String, Value>) -> Result<Table> {
    match command {
        Command::Div(a) => div(&merge(a, config)?),
        Command::Variational(a) => variational(&merge(a, config)?),
        Command::Martingale(a) => martingale(&merge(a, config)?),
        Command::Sce(a) => sce(&merge(a, config)?),
        Command::Hoeffding(a) => hoeffding(&merge(a, config)?),
        Command::Cutoff(a) => cutoff(&merge(a, config)?),
        Command::Measured(a) => measured(&merge(a, config)?),
        Command::Gicar(a) => gicar(&merge(a, config)?),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("QDIV_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("QDIV_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

fn emit(table: &Table, format: Format, out: Option<&Path>) -> std::io::Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        Format::Csv => table.write_csv(&mut sink).map_err(std::io::Error::other)?,
        Format::Json => table.write_json(&mut sink)?,
    }
    sink.flush()
}

fn exit_code(e: &Error) -> ExitCode {
    ExitCode::from(if e.is_numerical() { 3 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let table = configure_threads()
        .and_then(|()| read_config(cli.config.as_deref()))
        .and_then(|config| run_command(&cli.command, &config));
    let table = match table {
        Ok(t) => t,
        Err(e) => {
            eprintln!("qdiv: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = emit(&table, cli.format, cli.out.as_deref()) {
        eprintln!("qdiv: writing output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let config: Map<String, Value> =
            serde_json::from_str(r#"{"alpha": [2, 3], "pair": "commuting", "seed": 7}"#).unwrap();
        let cli = VariationalArgs { seed: Some(1), ..Default::default() };
        let merged = merge(&cli, &config).unwrap();
        assert_eq!(merged.alpha, vec![2.0, 3.0]);
        assert_eq!(merged.seed, Some(1));
        assert_eq!(merged.pair.pair, Some(Fixture::Commuting));

        let cli = VariationalArgs { alpha: vec![0.5], ..Default::default() };
        assert_eq!(merge(&cli, &config).unwrap().alpha, vec![0.5]);

        let bad: Map<String, Value> = serde_json::from_str(r#"{"alpha": "two"}"#).unwrap();
        assert!(matches!(merge(&VariationalArgs::default(), &bad), Err(Error::Parse(_))));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
