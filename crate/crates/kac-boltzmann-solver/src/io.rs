//! Trajectory export: one `(v, f)` CSV per sample time plus a JSON series.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::solve::{SampleRecord, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesFile {
    pub gamma: f64,
    pub dt: f64,
    pub n_points: usize,
    pub v_max: f64,
    pub series: Vec<SampleRecord>,
}

/// Writes `f_<k>.csv` for every sample and `series.json` into `dir`.
/// Returns the CSV paths in sample order.
pub fn write_trajectory<P: AsRef<Path>>(traj: &Trajectory, dir: P) -> Result<Vec<PathBuf>, SolverError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(traj.densities.len());
    for (k, (f, rec)) in traj.densities.iter().zip(&traj.records).enumerate() {
        let p = dir.join(format!("f_{k:03}.csv"));
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(["v", &format!("f(t={})", rec.t)])?;
        for (i, y) in f.iter().enumerate() {
            w.write_record([traj.grid.node(i).to_string(), y.to_string()])?;
        }
        w.flush()?;
        paths.push(p);
    }
    let series = SeriesFile {
        gamma: traj.gamma,
        dt: traj.dt,
        n_points: traj.grid.n_points,
        v_max: traj.grid.v_max,
        series: traj.records.clone(),
    };
    fs::write(dir.join("series.json"), serde_json::to_string_pretty(&series)?)?;
    Ok(paths)
}

pub fn read_series<P: AsRef<Path>>(path: P) -> Result<SeriesFile, SolverError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
