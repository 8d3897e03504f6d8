//! Result rows and the CSV/JSON writers.
//!
//! CSV is UTF-8, comma-separated, LF line endings, with a fixed header. All
//! numbers are printed with 17 significant digits so that identical runs
//! produce byte-identical files and every value round-trips through f64.
//! Unavailable metrics are NaN in CSV and null in JSON.

use std::io::Write;

use serde::Serialize;

pub const CSV_HEADER: &str = "log_threshold,procedure,add,add_stderr,pfa,pfa_stderr,arl,arl_stderr,n_censored,bound_add,bound_pfa,bound_arl";

/// One (threshold, procedure) result with its analytic bound columns.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub log_threshold: f64,
    pub procedure: &'static str,
    pub add: f64,
    pub add_stderr: f64,
    pub pfa: f64,
    pub pfa_stderr: f64,
    pub arl: f64,
    pub arl_stderr: f64,
    pub n_censored: u64,
    pub bound_add: f64,
    pub bound_pfa: f64,
    pub bound_arl: f64,
}

/// 17-significant-digit decimal rendering, round-trip exact for f64.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_csv<W: Write>(mut w: W, rows: &[Row]) -> std::io::Result<()> {
    w.write_all(CSV_HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    for r in rows {
        let line = [
            fmt17(r.log_threshold),
            r.procedure.to_string(),
            fmt17(r.add),
            fmt17(r.add_stderr),
            fmt17(r.pfa),
            fmt17(r.pfa_stderr),
            fmt17(r.arl),
            fmt17(r.arl_stderr),
            r.n_censored.to_string(),
            fmt17(r.bound_add),
            fmt17(r.bound_pfa),
            fmt17(r.bound_arl),
        ]
        .join(",");
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Echo of the invocation that produced a result set.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub rho0: f64,
    pub rho1: f64,
    pub rho_assumed: f64,
    pub p0: f64,
    pub procedure: &'static str,
    pub trials: u64,
    pub horizon: u64,
    pub seed: u64,
    pub log_thresholds: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct JsonDoc<'a> {
    config: &'a ConfigEcho,
    rows: &'a [Row],
}

pub fn write_json<W: Write>(mut w: W, config: &ConfigEcho, rows: &[Row]) -> std::io::Result<()> {
    let doc = JsonDoc { config, rows };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    w.write_all(b"\n")
}
