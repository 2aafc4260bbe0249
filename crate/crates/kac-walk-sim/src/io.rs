//! Trajectory records as CSV rows plus JSON metadata; histograms as CSV.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::WalkError;
use crate::walk::{Histogram, TrajectoryRecord, WalkConfig};

#[derive(Serialize)]
struct Meta<'a> {
    config: &'a WalkConfig,
    stream: u64,
    events: u64,
    proposals: u64,
    weighted_fallback: bool,
    wall_clock_s: f64,
}

/// `<stem>.csv` (one row per sample time) and `<stem>.json`.
pub fn write_record<P: AsRef<Path>>(rec: &TrajectoryRecord, dir: P, stem: &str) -> Result<(), WalkError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
    w.write_record(["t", "m2", "m4", "m6", "momentum", "events"])?;
    for s in &rec.samples {
        w.write_record([s.t.to_string(), s.m2.to_string(), s.m4.to_string(), s.m6.to_string(), s.momentum.to_string(), s.events.to_string()])?;
    }
    w.flush()?;
    let meta = Meta {
        config: &rec.config,
        stream: rec.stream,
        events: rec.events,
        proposals: rec.proposals,
        weighted_fallback: rec.weighted_fallback,
        wall_clock_s: rec.wall_clock_s,
    };
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Rows `(bin_left, bin_right, mass)`; overflow bins use `±inf` edges.
pub fn write_histogram<P: AsRef<Path>>(hist: &Histogram, path: P) -> Result<(), WalkError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin_left", "bin_right", "mass"])?;
    let m = hist.masses();
    let b = hist.counts.len();
    w.write_record([f64::NEG_INFINITY.to_string(), hist.lo.to_string(), m[b].to_string()])?;
    for k in 0..b {
        let (l, r) = hist.edges(k);
        w.write_record([l.to_string(), r.to_string(), m[k].to_string()])?;
    }
    w.write_record([hist.hi.to_string(), f64::INFINITY.to_string(), m[b + 1].to_string()])?;
    w.flush()?;
    Ok(())
}

pub fn read_histogram_masses<P: AsRef<Path>>(path: P) -> Result<Vec<(f64, f64, f64)>, WalkError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}
