use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::OutputPaths;
use super::ensemble::{EnsembleResult, ResultRow, SweepPoint, TraceLine};
use crate::{Error, Result};

pub const SUMMARY_HEADER: [&str; 7] = [
    "sweep_param",
    "sweep_value",
    "realization",
    "seed",
    "avg_vertex_time",
    "t_max",
    "censored_count",
];
pub const PER_DEGREE_HEADER: [&str; 6] = ["sweep_value", "k", "n_k", "mean_T", "mu_k", "s_k"];
pub const LOWHIGH_HEADER: [&str; 5] = ["sweep_value", "f_L", "f_H", "T_low", "T_high"];

fn csv_writer<W: Write>(sink: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Never)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_summary<W: Write>(sink: W, sweep_param: &str, rows: &[ResultRow]) -> csv::Result<()> {
    let mut w = csv_writer(sink);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            sweep_param.to_owned(),
            r.sweep_value.to_string(),
            r.realization.to_string(),
            r.seed.to_string(),
            r.avg_vertex_time.to_string(),
            r.t_max.to_string(),
            r.censored_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_per_degree<W: Write>(sink: W, points: &[SweepPoint]) -> csv::Result<()> {
    let mut w = csv_writer(sink);
    w.write_record(PER_DEGREE_HEADER)?;
    for p in points {
        for (k, s) in &p.profile.by_degree {
            w.write_record([
                p.value.to_string(),
                k.to_string(),
                s.n_k.to_string(),
                s.mean_lifetime.to_string(),
                s.mu_k.to_string(),
                s.mean_saves.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_lowhigh<W: Write>(sink: W, points: &[SweepPoint]) -> csv::Result<()> {
    let mut w = csv_writer(sink);
    w.write_record(LOWHIGH_HEADER)?;
    for p in points {
        let s = &p.low_high;
        w.write_record([
            p.value.to_string(),
            s.f_low.to_string(),
            s.f_high.to_string(),
            opt(s.t_low),
            opt(s.t_high),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(mut sink: W, trace: &[TraceLine]) -> std::io::Result<()> {
    for line in trace {
        serde_json::to_writer(&mut sink, line)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes each output whose path is set.
pub fn write_results(result: &EnsembleResult, paths: &OutputPaths) -> Result<()> {
    if let Some(path) = &paths.summary {
        let rows: Vec<ResultRow> = result.rows().copied().collect();
        write_summary(create(path)?, result.sweep_param, &rows).map_err(|e| csv_err(path, e))?;
    }
    if let Some(path) = &paths.per_degree {
        write_per_degree(create(path)?, &result.points).map_err(|e| csv_err(path, e))?;
    }
    if let Some(path) = &paths.lowhigh {
        write_lowhigh(create(path)?, &result.points).map_err(|e| csv_err(path, e))?;
    }
    if let Some(path) = &paths.trace {
        write_trace(create(path)?, &result.trace).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
