//! CSV emission (RFC 4180, UTF-8, mandatory header) with a stable numeric
//! format so identical runs produce byte-identical files.

use ris_bounds::{BoundsReport64, Scenario64};
use std::io::Write;
use std::path::Path;

pub const SCHEMA: &str = "risbound-v1";

/// Stable numeric rendering: 10 significant digits, `inf` for infinities.
pub fn num(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.10e}")
    }
}

pub fn write_bound_csv(
    path: &Path,
    scenario_name: &str,
    sc: &Scenario64,
    report: &BoundsReport64,
) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(
        f,
        "schema,scenario,seed,m1,include_los,speb_m2,soeb_rad2,peb_m,oeb_rad,singular,degraded"
    )?;
    writeln!(
        f,
        "{},{},{},{},{},{},{},{},{},{},{}",
        SCHEMA,
        scenario_name,
        sc.seed,
        sc.m1(),
        sc.include_los,
        num(report.speb),
        num(report.soeb),
        num(report.peb()),
        num(report.oeb()),
        report.singular,
        report.degraded,
    )?;
    Ok(())
}

/// One sweep result row (raw trial or aggregate).
pub struct SweepRow {
    pub variable: String,
    pub value: f64,
    /// Trial index; `None` on aggregate rows.
    pub trial: Option<u64>,
    /// Aggregation statistic; empty on raw rows.
    pub stat: String,
    pub seed: Option<u64>,
    pub speb: Option<f64>,
    pub soeb: Option<f64>,
    pub peb: Option<f64>,
    pub oeb: Option<f64>,
    pub singular: Option<bool>,
    pub degraded: Option<bool>,
    /// Failed-trial count for this value; aggregate rows only.
    pub failures: Option<usize>,
    pub error: String,
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Quote a field if it contains separators or quotes (RFC 4180).
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_sweep_csv(out: &mut dyn Write, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(
        out,
        "schema,variable,value,trial,stat,seed,speb_m2,soeb_rad2,peb_m,oeb_rad,singular,degraded,failures,error"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            SCHEMA,
            field(&r.variable),
            num(r.value),
            opt(r.trial),
            r.stat,
            opt(r.seed),
            opt_num(r.speb),
            opt_num(r.soeb),
            opt_num(r.peb),
            opt_num(r.oeb),
            opt(r.singular),
            opt(r.degraded),
            opt(r.failures),
            field(&r.error),
        )?;
    }
    Ok(())
}
