//! CSV tables of `(m, u, logZ)` and JSON concentration reports.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use density_core::GridDensity;
use serde::{Deserialize, Serialize};

use crate::error::SphereError;
use crate::phi::ln_z_maxwellian;
use crate::profile::ConcentrationProfile;
use crate::table::{LnATable, TableOptions, TableSet};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    m: usize,
    u: f64,
    #[serde(rename = "logZ")]
    log_z: f64,
}

/// Writes every tabulated node as `(m, u, ln Z_m(f, √u))`.
pub fn write_log_z_csv<P: AsRef<Path>>(set: &TableSet, path: P) -> Result<(), SphereError> {
    let mut w = csv::Writer::from_path(path)?;
    for t in set.tables() {
        for (u, ln_a) in t.nodes() {
            w.serialize(Row { m: t.m, u, log_z: ln_z_maxwellian(t.m, u) + ln_a })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_log_z_csv`] for the same base density.
///
/// Radii `√u` must be uniformly spaced within each `m`.
pub fn read_log_z_csv<P: AsRef<Path>>(f: &GridDensity, path: P, opts: TableOptions) -> Result<TableSet, SphereError> {
    let mut rows: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for r in csv::Reader::from_reader(File::open(path)?).deserialize() {
        let r: Row = r?;
        if r.m < 2 || !(r.u >= 0.0) || r.log_z.is_nan() {
            return Err(SphereError::Parse(format!("bad row (m = {}, u = {}, logZ = {})", r.m, r.u, r.log_z)));
        }
        rows.entry(r.m).or_default().push((r.u, r.log_z - ln_z_maxwellian(r.m, r.u)));
    }
    let support = f.v_max().powi(2);
    let mut tables = Vec::new();
    for (m, pts) in rows {
        if pts.len() < 6 {
            return Err(SphereError::Parse(format!("m = {m}: need at least 6 rows, got {}", pts.len())));
        }
        let r: Vec<f64> = pts.iter().map(|p| p.0.sqrt()).collect();
        let dr = (r[r.len() - 1] - r[0]) / (r.len() - 1) as f64;
        if !(dr > 0.0) || r.windows(2).any(|w| ((w[1] - w[0]) - dr).abs() > 1e-6 * dr) {
            return Err(SphereError::Parse(format!("m = {m}: radii are not uniformly spaced")));
        }
        tables.push(LnATable {
            m,
            r0: r[0],
            dr,
            values: pts.iter().map(|p| p.1).collect(),
            support: m as f64 * support,
            edge_gap: f64::NAN,
        });
    }
    Ok(TableSet::from_tables(f, tables, opts))
}

pub fn write_profile_json<P: AsRef<Path>>(p: &ConcentrationProfile, path: P) -> Result<(), SphereError> {
    serde_json::to_writer_pretty(File::create(path)?, p)?;
    Ok(())
}

pub fn read_profile_json<P: AsRef<Path>>(path: P) -> Result<ConcentrationProfile, SphereError> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}
