use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::Result;
use crate::trajectory::Trajectory;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Long-form `t,x,value` rows of every `stride`-th level (the last level is
/// always written).
pub fn write_trajectory_csv(
    path: &Path,
    traj: &Trajectory<f64>,
    nodes: &[f64],
    stride: usize,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,x,value")?;
    let last = traj.n_levels() - 1;
    for (k, (t, level)) in traj.times.iter().zip(&traj.levels).enumerate() {
        if k % stride.max(1) != 0 && k != last {
            continue;
        }
        let t = fmt_f64(*t);
        for (x, v) in nodes.iter().zip(level) {
            writeln!(w, "{t},{},{}", fmt_f64(*x), fmt_f64(*v))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,mass,free_energy,dissipation_rate,min_density,sup_xi")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(r.time),
            fmt_f64(r.mass),
            fmt_f64(r.free_energy),
            fmt_f64(r.dissipation_rate),
            fmt_f64(r.min_density),
            fmt_f64(r.sup_xi)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
