//! CSV and JSON artifacts.
//!
//! Grid CSV: header `x,y,value,active`, one row per cell in storage order
//! (`x` fastest). `value` is `Omega` for ADI grids and slices and the
//! altitude for MSI grids. `active` is `1`/`0` for slices and empty
//! otherwise.
//!
//! Time-series CSV: header `t,d`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dde::{SimResult, SimSettings, Verdict};
use crate::scan::{Anomaly, Axis, GridKind, Island, Param, ScanGrid};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn write_grid_csv<W: Write>(grid: &ScanGrid, out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "value", "active"])?;
    for idx in 0..grid.values.len() {
        let (x, y) = grid.coords(idx);
        let active = match &grid.active {
            Some(a) if a[idx] => "1",
            Some(_) => "0",
            None => "",
        };
        w.write_record([
            x.to_string(),
            y.to_string(),
            grid.values[idx].to_string(),
            active.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub name: Param,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl From<&Axis> for AxisRange {
    fn from(a: &Axis) -> Self {
        Self {
            name: a.param,
            min: a.min,
            max: a.max,
            count: a.count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranges {
    pub x: AxisRange,
    pub y: AxisRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IslandEntry {
    pub id: usize,
    pub area: f64,
    pub cell_count: usize,
    /// `[tau_min, tau_max, sigma_min, sigma_max]`.
    pub bbox: [f64; 4],
    pub min_tau: f64,
    pub altitude_max: Option<f64>,
    pub full_altitude_region: Option<bool>,
}

impl From<&Island> for IslandEntry {
    fn from(i: &Island) -> Self {
        Self {
            id: i.id,
            area: i.area,
            cell_count: i.cell_count,
            bbox: [i.bbox.x_min, i.bbox.x_max, i.bbox.y_min, i.bbox.y_max],
            min_tau: i.min_tau,
            altitude_max: i.altitude_max,
            full_altitude_region: i.full_altitude_region,
        }
    }
}

/// JSON summary written next to ADI and MSI grids (and slices, without
/// islands).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub kind: GridKind,
    pub islands: Vec<IslandEntry>,
    /// `[count_x, count_y]`.
    pub resolution: [usize; 2],
    pub ranges: Ranges,
    pub fixed: Option<(Param, f64)>,
    pub system: String,
    pub params: BTreeMap<String, f64>,
    pub fixed_point: Vec<f64>,
    pub sigma_run_violations: usize,
    pub active_regions: Option<usize>,
    pub anomalies: Vec<Anomaly>,
}

impl ScanSummary {
    pub fn new(
        grid: &ScanGrid,
        islands: &[Island],
        system: &str,
        params: BTreeMap<String, f64>,
        fixed_point: Vec<f64>,
    ) -> Self {
        let violations = if grid.kind == GridKind::Slice {
            0
        } else {
            crate::scan::sigma_run_violations(grid).len()
        };
        Self {
            kind: grid.kind,
            islands: islands.iter().map(IslandEntry::from).collect(),
            resolution: [grid.nx(), grid.ny()],
            ranges: Ranges {
                x: (&grid.x).into(),
                y: (&grid.y).into(),
            },
            fixed: grid.fixed,
            system: system.to_string(),
            params,
            fixed_point,
            sigma_run_violations: violations,
            active_regions: (grid.kind == GridKind::Slice).then(|| grid.active_region_count()),
            anomalies: grid.anomalies.clone(),
        }
    }
}

pub fn write_json<W: Write, T: Serialize>(value: &T, mut out: W) -> Result<(), ReportError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_time_series_csv<W: Write>(result: &SimResult, out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "d"])?;
    for s in &result.samples {
        w.write_record([s.t.to_string(), s.d.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Result JSON of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub verdict: Verdict,
    pub growth_rate: Option<f64>,
    pub seed: Option<u64>,
    pub variational: bool,
    pub steps: usize,
    pub stopped_early: bool,
    pub final_window_max: f64,
    pub config: SimSettings,
}

impl SimReport {
    pub fn new(result: &SimResult, settings: &SimSettings, variational: bool) -> Self {
        Self {
            verdict: result.verdict,
            growth_rate: result.growth_rate,
            seed: settings.perturbation.seed(),
            variational,
            steps: result.steps,
            stopped_early: result.stopped_early,
            final_window_max: result.final_window_max,
            config: settings.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::{Axis, Param};

    #[test]
    fn grid_csv_layout() {
        let grid = ScanGrid {
            kind: GridKind::Slice,
            x: Axis::new(Param::Tau, 0.0, 1.0, 2).unwrap(),
            y: Axis::new(Param::Lambda, -1.0, 1.0, 2).unwrap(),
            fixed: Some((Param::Sigma, 1.0)),
            values: vec![1.0, -1.0, 2.0, -2.0],
            active: Some(vec![false, true, false, true]),
            anomalies: vec![],
        };
        let mut buf = Vec::new();
        write_grid_csv(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,value,active");
        assert_eq!(lines[2], "1,-1,-1,1");
        assert_eq!(lines[3], "0,1,2,0");
    }
}
