//! Trajectory files: JSON (metadata and per-snapshot arrays) and long-format CSV `t,r,u`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{from_edges, Snapshot};
use crate::params::Params;
use crate::solver::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub params: Params,
    pub grid_id: String,
    pub edges: Vec<f64>,
    pub centers: Vec<f64>,
    pub extinction: Option<f64>,
    pub steps: usize,
    pub snapshots: Vec<Snapshot>,
}

impl TrajectoryFile {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        TrajectoryFile {
            params: traj.params,
            grid_id: traj.grid.id(),
            edges: traj.grid.edges.clone(),
            centers: traj.grid.centers.clone(),
            extinction: traj.extinction,
            steps: traj.steps.len(),
            snapshots: traj.snapshots.clone(),
        }
    }

    /// Rebuilds the grid from the stored edges; step diagnostics are not kept.
    pub fn into_trajectory(self) -> Result<Trajectory> {
        let grid = from_edges(&self.params, self.edges)?;
        if self.snapshots.iter().any(|s| s.values.len() != grid.len()) {
            return Err(Error::Config("snapshot length does not match the grid".into()));
        }
        let sup_history = self.snapshots.iter().map(|s| (s.t, s.sup())).collect();
        Ok(Trajectory { params: self.params, grid, snapshots: self.snapshots, extinction: self.extinction, sup_history, steps: Vec::new() })
    }
}

pub fn write_trajectory_json(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &TrajectoryFile::from_trajectory(traj))?;
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_json(path: &Path) -> Result<Trajectory> {
    let file: TrajectoryFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    file.into_trajectory()
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "r", "u"])?;
    for s in &traj.snapshots {
        for (r, u) in traj.grid.centers.iter().zip(&s.values) {
            w.write_record([s.t.to_string(), r.to_string(), u.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Snapshots from a long-format CSV, grouped by consecutive equal `t`.
pub fn read_trajectory_csv(path: &Path) -> Result<(Vec<f64>, Vec<Snapshot>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut centers = Vec::new();
    let mut snaps: Vec<Snapshot> = Vec::new();
    for rec in rdr.deserialize() {
        let (t, r, u): (f64, f64, f64) = rec?;
        match snaps.last_mut() {
            Some(s) if s.t == t => s.values.push(u),
            _ => snaps.push(Snapshot { t, values: vec![u] }),
        }
        if snaps.len() == 1 {
            centers.push(r);
        }
    }
    if snaps.iter().any(|s| s.values.len() != centers.len()) {
        return Err(Error::Config("ragged trajectory CSV".into()));
    }
    Ok((centers, snaps))
}
