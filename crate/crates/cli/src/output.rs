//! CSV and JSON writers. Floats carry 17 significant digits so they round-trip.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use vacuumlab::limitlab::{ProfileSnapshot, SweepRecord};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_rows<W: Write>(
    w: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    out.flush()?;
    Ok(())
}

/// `runtime_s` is written as zero when `timing` is off so that outputs are byte-stable.
pub fn write_sweep_csv<W: Write>(
    w: W,
    records: &[SweepRecord],
    timing: bool,
) -> anyhow::Result<()> {
    write_rows(
        w,
        &SweepRecord::CSV_HEADER,
        records.iter().map(|r| {
            let mut v = r.csv_values().to_vec();
            if !timing {
                *v.last_mut().expect("non-empty row") = 0.0;
            }
            v
        }),
    )
}

pub fn write_profile_csv<W: Write>(w: W, s: &ProfileSnapshot) -> anyhow::Result<()> {
    write_rows(
        w,
        &ProfileSnapshot::CSV_HEADER,
        (0..s.x.len()).map(|i| {
            vec![
                s.x[i],
                s.rho_eps[i],
                s.rho_exact[i],
                s.m_eps[i],
                s.m_exact[i],
            ]
        }),
    )
}

/// Reads the epsilon, err_rho_inf and err_m_inf columns of a sweep CSV.
pub fn read_sweep_errors(path: &Path) -> anyhow::Result<Vec<(f64, f64, f64)>> {
    let mut rd =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = rd.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{} has no `{name}` column", path.display()))
    };
    let (ie, ir, im) = (col("epsilon")?, col("err_rho_inf")?, col("err_m_inf")?);
    let mut out = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let get = |i: usize| -> anyhow::Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.trim()
                .parse()
                .with_context(|| format!("row {}: `{s}` is not a number", k + 1))
        };
        out.push((get(ie)?, get(ir)?, get(im)?));
    }
    Ok(out)
}

pub fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}
