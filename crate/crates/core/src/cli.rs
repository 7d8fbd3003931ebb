//! Command implementations behind the `mosim` binary.
//!
//! Exit-code contract (mapped from [`Error`] by [`exit_code`]): 1 for
//! config/schema errors, 2 for numerical or I/O failures, 3 when no exact
//! method applies to a `survival` request. Diagnostics go to standard error;
//! data goes to the requested file or standard output.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::{load_config, SimulationConfig};
use crate::driver::{simulate_paths, survival, transition_matrix, SimulationOutput};
use crate::stepwise::{run_case_study, CaseStudySettings};
use crate::types::IndicatorState;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub paths: Option<u64>,
    pub seed: Option<u64>,
    pub format: OutputFormat,
    pub workers: Option<usize>,
    pub indicators: bool,
    pub output: Option<PathBuf>,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            paths: None,
            seed: None,
            format: OutputFormat::Csv,
            workers: None,
            indicators: false,
            output: None,
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) | Error::DimensionMismatch(_) => 1,
        Error::Numerical(_) | Error::Io(_) => 2,
        Error::NoExactMethod(_) => 3,
    }
}

/// Worker count: explicit option, else `MO_SIM_WORKERS`, else rayon default.
fn resolve_workers(explicit: Option<usize>) -> Option<usize> {
    explicit.or_else(|| {
        std::env::var("MO_SIM_WORKERS").ok().and_then(|s| s.parse().ok())
    })
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match resolve_workers(workers) {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(f),
        _ => f(),
    }
}

fn write_output(path: Option<&Path>, data: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, data)?,
        None => {
            let stdout = std::io::stdout();
            stdout.lock().write_all(data.as_bytes())?;
        }
    }
    Ok(())
}

fn format_tau(tau: f64) -> String {
    if tau.is_infinite() {
        "inf".to_string()
    } else {
        tau.to_string()
    }
}

fn indicator_column(states: &[IndicatorState]) -> String {
    states.iter().map(|s| s.bit_string()).collect::<Vec<_>>().join(";")
}

fn records_to_csv(out: &SimulationOutput, indicators: bool) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = vec!["path_id".into()];
    header.extend((1..=out.dim).map(|k| format!("tau_{k}")));
    if indicators {
        header.push("indicators".into());
    }
    wtr.write_record(&header).map_err(csv_err)?;
    for rec in &out.records {
        let mut row: Vec<String> = vec![rec.path_id.to_string()];
        row.extend(rec.taus.iter().map(|&t| format_tau(t)));
        if indicators {
            row.push(indicator_column(rec.indicators.as_deref().unwrap_or(&[])));
        }
        wtr.write_record(&row).map_err(csv_err)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

fn records_to_jsonl(out: &SimulationOutput, indicators: bool) -> String {
    use serde_json::{json, Value};
    let mut buf = String::new();
    for rec in &out.records {
        let taus: Vec<Value> = rec
            .taus
            .iter()
            .map(|&t| {
                if t.is_infinite() {
                    Value::String("inf".into())
                } else {
                    json!(t)
                }
            })
            .collect();
        let mut obj = json!({"path_id": rec.path_id, "taus": taus});
        if indicators {
            let states: Vec<String> = rec
                .indicators
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|s| s.bit_string())
                .collect();
            obj["indicators"] = json!(states);
        }
        buf.push_str(&obj.to_string());
        buf.push('\n');
    }
    buf
}

fn csv_err(e: csv::Error) -> Error {
    Error::Numerical(format!("csv: {e}"))
}

/// `simulate`: one record per path, deterministic for a fixed seed, with
/// per-path substream index equal to the path id (output is therefore
/// independent of the worker count).
pub fn cmd_simulate(config_path: &Path, opts: &SimulateOptions) -> Result<()> {
    let config: SimulationConfig = load_config(config_path)?;
    let paths = opts.paths.unwrap_or(config.paths);
    let seed = opts.seed.unwrap_or(config.seed);
    let out = with_pool(opts.workers, || simulate_paths(&config, paths, seed, opts.indicators))?;
    let data = match opts.format {
        OutputFormat::Csv => records_to_csv(&out, opts.indicators)?,
        OutputFormat::Jsonl => records_to_jsonl(&out, opts.indicators),
    };
    write_output(opts.output.as_deref(), &data)
}

/// `survival`: exact joint survival probability, 12 significant digits.
pub fn cmd_survival(config_path: &Path, times: &[f64]) -> Result<String> {
    let config = load_config(config_path)?;
    let p = survival(&config, times)?;
    Ok(format_significant(p, 12))
}

/// `case-study`: the full comparison table; CSV to the output target,
/// human-readable table to standard error.
pub fn cmd_case_study(n: usize, seed: u64, out: Option<&Path>, workers: Option<usize>) -> Result<()> {
    let settings = CaseStudySettings { num_samples: n, seed, ..Default::default() };
    let table = with_pool(workers, || run_case_study(&settings))?;
    eprint!("{}", table.to_pretty());
    write_output(out, &table.to_csv())
}

/// `transition-matrix`: `P[t]` as CSV with bit-string state headers.
pub fn cmd_transition_matrix(config_path: &Path, t: f64, out: Option<&Path>) -> Result<()> {
    let config = load_config(config_path)?;
    let p = transition_matrix(&config, t)?;
    let d = p.dim();
    let n = 1usize << d;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["state".to_string()];
    header.extend((0..n).map(|i| IndicatorState::from_matrix_index(i, d).unwrap().bit_string()));
    wtr.write_record(&header).map_err(csv_err)?;
    for i in 0..n {
        let mut row = vec![IndicatorState::from_matrix_index(i, d).unwrap().bit_string()];
        row.extend((0..n).map(|j| p.matrix()[(i, j)].to_string()));
        wtr.write_record(&row).map_err(csv_err)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    let data = String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))?;
    write_output(out, &data)
}

/// Plain-decimal formatting with a fixed number of significant digits
/// (scientific notation outside a sane exponent range).
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-4..=12).contains(&magnitude) {
        return format!("{:.*e}", digits.saturating_sub(1), v);
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Parses the `--t "t1,t2,…"` argument.
pub fn parse_times(arg: &str) -> Result<Vec<f64>> {
    arg.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("bad time {s:?}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant((-4.0f64 / 3.0).exp(), 12), "0.263597138116");
        assert_eq!(format_significant((-2.0f64).exp(), 12), "0.135335283237");
        assert_eq!(format_significant(1.0, 12), "1.00000000000");
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(1.5e-9, 12), "1.50000000000e-9");
    }

    #[test]
    fn time_parsing() {
        assert_eq!(parse_times("1,2.5, 3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(parse_times("1,abc").is_err());
    }

    #[test]
    fn tau_formatting_uses_inf_sentinel() {
        assert_eq!(format_tau(f64::INFINITY), "inf");
        assert_eq!(format_tau(1.5), "1.5");
        // shortest round-trip representation
        assert_eq!(format_tau(0.1 + 0.2), "0.30000000000000004");
    }
}
