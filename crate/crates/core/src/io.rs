//! CSV interchange. Column orders are fixed per result type:
//!
//! | result | header |
//! |---|---|
//! | lattice field | `s,u` |
//! | solution snapshots | `t,x,u` |
//! | initial data | `x,u` |
//! | convergence report | `dx,dt,error,norm` |
//! | front track | `t,front` |
//!
//! Floats are written with 17 significant digits, exact values as `num/den`.

use std::io::{Read, Write};

use crate::analysis::{ConvergenceReport, SpeedEstimate};
use crate::error::{Error, Result};
use crate::lattice::LatticeField;
use crate::rational::Scalar;
use crate::solvers::ContinuumField;

fn float(v: f64) -> String {
    v.to_csv()
}

pub fn write_lattice_csv<T: Scalar, W: Write>(field: &LatticeField<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "u"])?;
    for (s, v) in field.indices().zip(field.values()) {
        w.write_record([s.to_string(), v.to_csv()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshots_csv<W: Write>(frames: &[ContinuumField], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "u"])?;
    for frame in frames {
        for (m, v) in frame.values.iter().enumerate() {
            w.write_record([float(frame.time), float(frame.x(m)), float(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence_csv<W: Write>(report: &ConvergenceReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dx", "dt", "error", "norm"])?;
    for row in &report.rows {
        w.write_record([float(row.dx), float(row.dt), float(row.error), report.norm.name().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_speed_csv<W: Write>(estimate: &SpeedEstimate, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "front"])?;
    for (t, x) in &estimate.positions {
        w.write_record([float(*t), float(*x)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads uniformly spaced samples from `x,u` (or `t,x,u`, keeping the latest time).
///
/// The periodic domain length is inferred as `M` times the sample spacing.
pub fn read_field_csv<R: Read>(input: R) -> Result<ContinuumField> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (xi, ui) = match (col("x"), col("u")) {
        (Some(x), Some(u)) => (x, u),
        _ => return Err(Error::Parse(format!("expected columns x,u; found {:?}", headers))),
    };
    let ti = col("t");
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let get = |i: usize| -> Result<f64> {
            let cell = record.get(i).ok_or_else(|| Error::Parse("short CSV row".into()))?;
            <f64 as Scalar>::parse(cell)
        };
        let t = match ti {
            Some(i) => get(i)?,
            None => 0.0,
        };
        rows.push((t, get(xi)?, get(ui)?));
    }
    let latest = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let rows: Vec<(f64, f64, f64)> = rows.into_iter().filter(|r| r.0 == latest).collect();
    if rows.len() < 2 {
        return Err(Error::Parse("need at least two samples".into()));
    }
    let h = rows[1].1 - rows[0].1;
    for pair in rows.windows(2) {
        let step = pair[1].1 - pair[0].1;
        if (step - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(Error::Parse(format!("samples are not uniformly spaced near x = {}", pair[0].1)));
        }
    }
    let m = rows.len();
    ContinuumField::new(rows[0].1, h * m as f64, rows.iter().map(|r| r.2).collect(), latest.max(0.0))
}
