//! Per-iteration trace records and their CSV encoding.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub level: f64,
    pub attempt: usize,
    pub iter: usize,
    pub w: f64,
    pub u: f64,
    pub v: f64,
    /// Running minimum, within the attempt, of the level-scale value at the image point.
    pub best_f: f64,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
}

/// Header `level,attempt,iter,w,u,v,best_f,x1..xp,r1..rq`.
pub fn csv_header(x_dim: usize, r_dim: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["level", "attempt", "iter", "w", "u", "v", "best_f"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((1..=x_dim).map(|i| format!("x{i}")));
    cols.extend((1..=r_dim).map(|i| format!("r{i}")));
    cols
}

/// Writes the records as CSV. Column counts come from the first record, or
/// from `dims` when there are no records.
pub fn write_csv<W: Write>(out: W, records: &[TraceRecord], dims: (usize, usize)) -> Result<()> {
    let (x_dim, r_dim) = records
        .first()
        .map(|r| (r.x.len(), r.r.len()))
        .unwrap_or(dims);
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(csv_header(x_dim, r_dim))
        .map_err(csv_err)?;
    for rec in records {
        let mut row = vec![
            rec.level.to_string(),
            rec.attempt.to_string(),
            rec.iter.to_string(),
            rec.w.to_string(),
            rec.u.to_string(),
            rec.v.to_string(),
            rec.best_f.to_string(),
        ];
        row.extend(rec.x.iter().map(f64::to_string));
        row.extend(rec.r.iter().map(f64::to_string));
        writer.write_record(&row).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}
