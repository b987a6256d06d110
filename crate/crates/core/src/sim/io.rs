use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Outcome, SimConfig, SimRecord};
use crate::error::{Error, Result};

/// JSON sidecar describing a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: SimConfig,
    pub outcome: Outcome,
    pub saturated: bool,
    pub amplitude: Option<f64>,
    pub frequency: Option<f64>,
    pub saturation_time: Option<f64>,
    pub final_time: f64,
    pub steps: usize,
}

impl RunMetadata {
    pub fn new(config: &SimConfig, record: &SimRecord) -> Self {
        Self {
            config: config.clone(),
            outcome: record.outcome,
            saturated: record.saturated,
            amplitude: record.amplitude,
            frequency: record.frequency,
            saturation_time: record.saturation_time,
            final_time: record.final_time(),
            steps: record.steps,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(File::open(path)?)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// `t,x_tip,y_tip` with a header row.
pub fn write_tip_csv(record: &SimRecord, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "x_tip", "y_tip"]).map_err(csv_err)?;
    for i in 0..record.times.len() {
        w.write_record([
            record.times[i].to_string(),
            record.tip_x[i].to_string(),
            record.tip_y[i].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_tip_csv`]: `(t, x_tip, y_tip)` columns.
pub fn read_tip_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let (mut t, mut x, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for row in r.deserialize::<(f64, f64, f64)>() {
        let (a, b, c) = row.map_err(csv_err)?;
        t.push(a);
        x.push(b);
        y.push(c);
    }
    Ok((t, x, y))
}

/// One `u,x,y,theta` file per snapshot, named `snapshot_<k>.csv`, in `dir`.
pub fn write_snapshots_csv(record: &SimRecord, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (k, snap) in record.snapshots.iter().enumerate() {
        let mut w = csv::Writer::from_path(dir.join(format!("snapshot_{k:05}.csv"))).map_err(csv_err)?;
        w.write_record(["time", "x", "y", "theta"]).map_err(csv_err)?;
        let c = &snap.config;
        for i in 0..c.x.len() {
            w.write_record([
                snap.time.to_string(),
                c.x[i].to_string(),
                c.y[i].to_string(),
                c.theta[i].to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(())
}
