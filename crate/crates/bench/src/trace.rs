//! Per-run trace files.
//!
//! Columns: `t, chosen_index, x1..xd, y_obs, f_true, regret_inst, regret_cum,
//! regret_avg, beta_t, info_gain_step, info_gain_cum`. `beta_t` is empty for
//! rules without a confidence width. Floats use shortest round-trip formatting,
//! so rereading a trace recovers every value bit for bit.

use std::io::{Read, Write};

use gpucb::{Point, RunTrace};

/// One parsed trace line.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub chosen_index: usize,
    pub x: Vec<f64>,
    pub y_obs: f64,
    pub f_true: f64,
    pub regret_inst: f64,
    pub regret_cum: f64,
    pub regret_avg: f64,
    pub beta: Option<f64>,
    pub info_gain_step: f64,
    pub info_gain_cum: f64,
}

pub fn header(dim: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string(), "chosen_index".to_string()];
    cols.extend((1..=dim).map(|i| format!("x{i}")));
    cols.extend(
        [
            "y_obs",
            "f_true",
            "regret_inst",
            "regret_cum",
            "regret_avg",
            "beta_t",
            "info_gain_step",
            "info_gain_cum",
        ]
        .map(String::from),
    );
    cols
}

pub fn write_trace<W: Write>(writer: W, trace: &RunTrace, pool: &[Point]) -> csv::Result<()> {
    let dim = pool.first().map_or(0, Point::dim);
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(header(dim))?;
    for r in &trace.rounds {
        let mut rec = vec![r.t.to_string(), r.index.to_string()];
        rec.extend(pool[r.index].coords().iter().map(f64::to_string));
        rec.extend([
            r.y_obs.to_string(),
            r.f_true.to_string(),
            r.regret.to_string(),
            r.regret_cum.to_string(),
            r.regret_avg.to_string(),
            r.beta.map(|b| b.to_string()).unwrap_or_default(),
            r.info_gain_step.to_string(),
            r.info_gain_cum.to_string(),
        ]);
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a trace written by [`write_trace`].
pub fn read_trace<R: Read>(reader: R) -> Result<Vec<TraceRow>, String> {
    let mut csv = csv::Reader::from_reader(reader);
    let head = csv.headers().map_err(|e| e.to_string())?.clone();
    let width = head.len();
    if width < 10 {
        return Err(format!("trace header has {width} columns, expected at least 10"));
    }
    let dim = width - 10;
    if head.iter().collect::<Vec<_>>() != header(dim) {
        return Err("unexpected trace header".into());
    }
    let mut rows = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |c: usize| -> Result<f64, String> {
            rec[c]
                .parse()
                .map_err(|_| format!("row {}: column {} is not a number", i + 1, &head[c]))
        };
        let int = |c: usize| -> Result<u64, String> {
            rec[c]
                .parse()
                .map_err(|_| format!("row {}: column {} is not an integer", i + 1, &head[c]))
        };
        let b = 2 + dim;
        rows.push(TraceRow {
            t: int(0)?,
            chosen_index: int(1)? as usize,
            x: (2..b).map(num).collect::<Result<_, _>>()?,
            y_obs: num(b)?,
            f_true: num(b + 1)?,
            regret_inst: num(b + 2)?,
            regret_cum: num(b + 3)?,
            regret_avg: num(b + 4)?,
            beta: if rec[b + 5].is_empty() {
                None
            } else {
                Some(num(b + 5)?)
            },
            info_gain_step: num(b + 6)?,
            info_gain_cum: num(b + 7)?,
        });
    }
    Ok(rows)
}
