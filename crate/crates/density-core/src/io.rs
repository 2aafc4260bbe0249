//! Density files: a two-column CSV `(v, f)` with a header row, and an
//! optional JSON sidecar holding the declared tail.

use std::fs::File;
use std::path::Path;

use crate::density::{GridDensity, TailModel};
use crate::error::DensityError;
use crate::grid::Grid;

pub fn write_density_csv<P: AsRef<Path>>(f: &GridDensity, path: P) -> Result<(), DensityError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["v", "f"])?;
    for (i, x) in f.values().iter().enumerate() {
        w.write_record([format!("{:.17e}", f.grid().node(i)), format!("{:.17e}", x)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a density CSV. The `v` column must form a uniform grid symmetric
/// about zero.
pub fn read_density_csv<P: AsRef<Path>>(path: P) -> Result<GridDensity, DensityError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut vs = Vec::new();
    let mut fs = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(DensityError::Parse(format!("expected 2 columns, found {}", rec.len())));
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| DensityError::Parse(format!("{s:?}: {e}")));
        vs.push(parse(&rec[0])?);
        fs.push(parse(&rec[1])?);
    }
    if vs.len() < 2 {
        return Err(DensityError::Parse("too few rows".into()));
    }
    let v_max = vs[vs.len() - 1];
    let grid = Grid::new(v_max, vs.len())?;
    let tol = 1e-9 * v_max;
    for (i, &v) in vs.iter().enumerate() {
        if (v - grid.node(i)).abs() > tol {
            return Err(DensityError::Parse(format!(
                "row {i}: v = {v} is off the uniform symmetric grid (expected {})",
                grid.node(i)
            )));
        }
    }
    GridDensity::from_values(grid, fs)
}

pub fn read_tail_json<P: AsRef<Path>>(path: P) -> Result<TailModel, DensityError> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

pub fn write_tail_json<P: AsRef<Path>>(tail: &TailModel, path: P) -> Result<(), DensityError> {
    serde_json::to_writer_pretty(File::create(path)?, tail)?;
    Ok(())
}
