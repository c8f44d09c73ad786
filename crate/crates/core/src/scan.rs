//! Parameter sweeps: amplitude death islands, master stability islands and
//! stability slices.
//!
//! Grids are stored row-major with `y` as the slow index, so the value at
//! `(ix, iy)` lives at `iy * nx + ix`. Cells are evaluated in parallel and
//! gathered by index, which makes every output independent of the worker
//! count.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::msf::{MsfError, MsfProblem, MsfQuery};

/// Samples of `lambda` over `[-1, 1]` used before bisection.
pub const LAMBDA_SAMPLES: usize = 401;
/// Bisection stops once the bracket is narrower than this.
pub const LAMBDA_TOL: f64 = 1e-6;
/// Altitudes at least this close to 2 count as `I_lambda = [-1, 1]`.
pub const FULL_ALTITUDE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("invalid scan: {0}")]
    Invalid(String),
    #[error("evaluation failed at {x_name} = {x}, {y_name} = {y}: {source}")]
    Cell {
        x_name: Param,
        x: f64,
        y_name: Param,
        y: f64,
        #[source]
        source: MsfError,
    },
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Tau,
    Sigma,
    Lambda,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Tau => "tau",
            Param::Sigma => "sigma",
            Param::Lambda => "lambda",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tau" => Some(Param::Tau),
            "sigma" => Some(Param::Sigma),
            "lambda" => Some(Param::Lambda),
            _ => None,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evenly spaced samples `min, ..., max`.
///
/// A single sample with `min == max` is allowed so that a degenerate line
/// such as `sigma = 0` can be scanned with the same machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: Param, min: f64, max: f64, count: usize) -> Result<Self, ScanError> {
        let axis = Self {
            param,
            min,
            max,
            count,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        let bad = |msg: String| Err(ScanError::InvalidAxis(format!("{}: {msg}", self.param)));
        if !self.min.is_finite() || !self.max.is_finite() {
            return bad("bounds must be finite".into());
        }
        match self.count {
            0 => return bad("count must be at least 1".into()),
            1 if self.min != self.max => return bad("a single sample needs min == max".into()),
            n if n >= 2 && self.min >= self.max => {
                return bad(format!("min {} must be < max {}", self.min, self.max))
            }
            _ => {}
        }
        match self.param {
            Param::Tau | Param::Sigma if self.min < 0.0 => {
                bad(format!("min {} must be >= 0", self.min))
            }
            Param::Lambda if self.min < -1.0 || self.max > 1.0 => {
                bad("range must lie in [-1, 1]".into())
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            return self.min;
        }
        if i + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    /// Sample spacing; a degenerate axis counts as unit width.
    pub fn step(&self) -> f64 {
        if self.count < 2 {
            1.0
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Adi,
    Msi,
    Slice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anomaly {
    /// `I_lambda` split into several pieces; the altitude is their total.
    MultipleIntervals {
        x: f64,
        y: f64,
        intervals: Vec<(f64, f64)>,
    },
    /// Negative `Omega` somewhere in `[-1, 1]` but not at `lambda = 1`.
    ExcludesOne {
        x: f64,
        y: f64,
        intervals: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub kind: GridKind,
    pub x: Axis,
    pub y: Axis,
    /// Parameter held constant, if any.
    pub fixed: Option<(Param, f64)>,
    /// `Omega` for ADI grids and slices, altitude for MSI grids.
    pub values: Vec<f64>,
    /// Per-cell active-region flags (slices only).
    pub active: Option<Vec<bool>>,
    pub anomalies: Vec<Anomaly>,
}

impl ScanGrid {
    pub fn nx(&self) -> usize {
        self.x.count
    }

    pub fn ny(&self) -> usize {
        self.y.count
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.x.count + ix
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.index(ix, iy)]
    }

    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let (ix, iy) = (idx % self.x.count, idx / self.x.count);
        (self.x.value(ix), self.y.value(iy))
    }

    pub fn cell_area(&self) -> f64 {
        self.x.step() * self.y.step()
    }

    /// Cells that belong to islands (ADI, MSI) or to the stable set (slices).
    pub fn is_inside(&self, idx: usize) -> bool {
        match self.kind {
            GridKind::Adi | GridKind::Slice => self.values[idx] < 0.0,
            GridKind::Msi => self.values[idx] > 0.0,
        }
    }

    pub fn active_region_count(&self) -> usize {
        let Some(active) = &self.active else { return 0 };
        components(self.nx(), self.ny(), |i| active[i]).len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Island {
    pub id: usize,
    #[serde(skip)]
    pub cells: Vec<usize>,
    pub area: f64,
    pub cell_count: usize,
    pub bbox: BoundingBox,
    pub min_tau: f64,
    /// Only known for MSI grids.
    pub altitude_max: Option<f64>,
    pub full_altitude_region: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaInterval {
    pub intervals: Vec<(f64, f64)>,
    pub total_measure: f64,
    pub is_single_interval_to_one: bool,
}

impl LambdaInterval {
    pub fn contains(&self, lambda: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(a, b)| a <= lambda && lambda <= b)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanOptions {
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl ScanOptions {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers: Some(workers),
        }
    }
}

/// A column `tau = const` whose negative cells form more than one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnViolation {
    pub ix: usize,
    pub tau: f64,
    pub runs: Vec<(f64, f64)>,
}

fn run_in_pool<T: Send>(opts: &ScanOptions, f: impl FnOnce() -> T + Send) -> Result<T, ScanError> {
    match opts.workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ScanError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn eval_cells<T, F>(
    x: &Axis,
    y: &Axis,
    cells: &[usize],
    opts: &ScanOptions,
    f: F,
) -> Result<Vec<T>, ScanError>
where
    T: Send,
    F: Fn(f64, f64) -> Result<T, MsfError> + Sync,
{
    let nx = x.count;
    run_in_pool(opts, || {
        cells
            .par_iter()
            .map(|&idx| {
                let (xv, yv) = (x.value(idx % nx), y.value(idx / nx));
                f(xv, yv).map_err(|source| ScanError::Cell {
                    x_name: x.param,
                    x: xv,
                    y_name: y.param,
                    y: yv,
                    source,
                })
            })
            .collect()
    })?
}

fn expect_param(axis: &Axis, param: Param) -> Result<(), ScanError> {
    axis.validate()?;
    if axis.param != param {
        return Err(ScanError::Invalid(format!(
            "expected a {param} axis, got {}",
            axis.param
        )));
    }
    Ok(())
}

/// `Omega(tau, sigma, 1)` over a `tau` by `sigma` grid.
pub fn scan_adi(
    problem: &MsfProblem,
    tau: Axis,
    sigma: Axis,
    opts: &ScanOptions,
) -> Result<ScanGrid, ScanError> {
    expect_param(&tau, Param::Tau)?;
    expect_param(&sigma, Param::Sigma)?;
    let cells: Vec<usize> = (0..tau.count * sigma.count).collect();
    let values = eval_cells(&tau, &sigma, &cells, opts, |t, s| problem.omega(t, s, 1.0))?;
    Ok(ScanGrid {
        kind: GridKind::Adi,
        x: tau,
        y: sigma,
        fixed: Some((Param::Lambda, 1.0)),
        values,
        active: None,
        anomalies: Vec::new(),
    })
}

/// Altitude `|I_lambda(sigma, tau)|` over a `tau` by `sigma` grid.
///
/// The lambda sweep runs only where `Omega(tau, sigma, 1) < 0`; elsewhere the
/// altitude is 0 by definition, since an interval that misses `lambda = 1`
/// cannot stabilize any network.
pub fn scan_msi(
    problem: &MsfProblem,
    tau: Axis,
    sigma: Axis,
    opts: &ScanOptions,
) -> Result<ScanGrid, ScanError> {
    let adi = scan_adi(problem, tau, sigma, opts)?;
    let inside: Vec<usize> = (0..adi.values.len())
        .filter(|&i| adi.values[i] < 0.0)
        .collect();
    let intervals = eval_cells(&tau, &sigma, &inside, opts, |t, s| {
        lambda_interval(problem, t, s)
    })?;

    let mut values = vec![0.0; adi.values.len()];
    let mut anomalies = Vec::new();
    for (&idx, li) in inside.iter().zip(intervals) {
        values[idx] = li.total_measure;
        let (x, y) = adi.coords(idx);
        if li.intervals.len() > 1 {
            log::warn!(
                "tau = {x}, sigma = {y}: I_lambda has {} pieces {:?}",
                li.intervals.len(),
                li.intervals
            );
            anomalies.push(Anomaly::MultipleIntervals {
                x,
                y,
                intervals: li.intervals.clone(),
            });
        }
        if !li.contains(1.0) {
            log::warn!(
                "tau = {x}, sigma = {y}: I_lambda {:?} excludes lambda = 1",
                li.intervals
            );
            anomalies.push(Anomaly::ExcludesOne {
                x,
                y,
                intervals: li.intervals,
            });
        }
    }
    Ok(ScanGrid {
        kind: GridKind::Msi,
        x: tau,
        y: sigma,
        fixed: None,
        values,
        active: None,
        anomalies,
    })
}

/// `Omega` over `(x, lambda)` with `tau` or `sigma` held fixed.
///
/// A negative component is active when it reaches the `lambda = 1` row.
pub fn scan_slice(
    problem: &MsfProblem,
    fixed: (Param, f64),
    x: Axis,
    lambda_count: usize,
    opts: &ScanOptions,
) -> Result<ScanGrid, ScanError> {
    let (fixed_param, fixed_value) = fixed;
    let x_param = match fixed_param {
        Param::Tau => Param::Sigma,
        Param::Sigma => Param::Tau,
        Param::Lambda => {
            return Err(ScanError::Invalid(
                "a slice holds tau or sigma fixed".into(),
            ))
        }
    };
    if !fixed_value.is_finite() || fixed_value < 0.0 {
        return Err(ScanError::Invalid(format!(
            "fixed {fixed_param} must be finite and >= 0"
        )));
    }
    expect_param(&x, x_param)?;
    let y = Axis::new(Param::Lambda, -1.0, 1.0, lambda_count)?;
    let cells: Vec<usize> = (0..x.count * y.count).collect();
    let values = eval_cells(&x, &y, &cells, opts, |xv, lambda| match fixed_param {
        Param::Tau => problem.omega(fixed_value, xv, lambda),
        _ => problem.omega(xv, fixed_value, lambda),
    })?;

    let (nx, ny) = (x.count, y.count);
    let mut active = vec![false; values.len()];
    for comp in components(nx, ny, |i| values[i] < 0.0) {
        if comp.iter().any(|&i| i / nx == ny - 1) {
            for i in comp {
                active[i] = true;
            }
        }
    }
    Ok(ScanGrid {
        kind: GridKind::Slice,
        x,
        y,
        fixed: Some(fixed),
        values,
        active: Some(active),
        anomalies: Vec::new(),
    })
}

/// 4-connected components of the cells selected by `inside`, each listed in
/// flood-fill discovery order starting from its lowest index.
fn components(nx: usize, ny: usize, inside: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let mut seen = vec![false; nx * ny];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..nx * ny {
        if seen[start] || !inside(start) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Vec::new();
        while let Some(i) = stack.pop() {
            comp.push(i);
            let (ix, iy) = (i % nx, i / nx);
            let mut visit = |j: usize| {
                if !seen[j] && inside(j) {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if ix > 0 {
                visit(i - 1);
            }
            if ix + 1 < nx {
                visit(i + 1);
            }
            if iy > 0 {
                visit(i - nx);
            }
            if iy + 1 < ny {
                visit(i + nx);
            }
        }
        out.push(comp);
    }
    out
}

/// Connected islands of an ADI or MSI grid, ordered by their smallest `tau`.
pub fn extract_islands(grid: &ScanGrid) -> Result<Vec<Island>, ScanError> {
    if grid.kind == GridKind::Slice {
        return Err(ScanError::Invalid(
            "islands are defined for ADI and MSI grids only".into(),
        ));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut islands: Vec<(usize, usize, Island)> = components(nx, ny, |i| grid.is_inside(i))
        .into_iter()
        .map(|mut cells| {
            cells.sort_unstable();
            let ix_min = cells.iter().map(|&i| i % nx).min().unwrap_or(0);
            let ix_max = cells.iter().map(|&i| i % nx).max().unwrap_or(0);
            let iy_min = cells.iter().map(|&i| i / nx).min().unwrap_or(0);
            let iy_max = cells.iter().map(|&i| i / nx).max().unwrap_or(0);
            let bbox = BoundingBox {
                x_min: grid.x.value(ix_min),
                x_max: grid.x.value(ix_max),
                y_min: grid.y.value(iy_min),
                y_max: grid.y.value(iy_max),
            };
            let (altitude_max, full) = if grid.kind == GridKind::Msi {
                let top = cells
                    .iter()
                    .map(|&i| grid.values[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                (Some(top), Some(top >= 2.0 - FULL_ALTITUDE_TOL))
            } else {
                (None, None)
            };
            let island = Island {
                id: 0,
                area: cells.len() as f64 * grid.cell_area(),
                cell_count: cells.len(),
                bbox,
                min_tau: bbox.x_min,
                altitude_max,
                full_altitude_region: full,
                cells,
            };
            (ix_min, iy_min, island)
        })
        .collect();
    islands.sort_by_key(|&(ix, iy, ref isl)| (ix, iy, isl.cells[0]));
    Ok(islands
        .into_iter()
        .enumerate()
        .map(|(k, (_, _, mut isl))| {
            isl.id = k + 1;
            isl
        })
        .collect())
}

/// `I_lambda = {lambda in [-1, 1] : Omega(tau, sigma, lambda) < 0}`.
pub fn lambda_interval(
    problem: &MsfProblem,
    tau: f64,
    sigma: f64,
) -> Result<LambdaInterval, MsfError> {
    MsfQuery::new(tau, sigma, 1.0).validate()?;
    let lam = |k: usize| -1.0 + 2.0 * k as f64 / (LAMBDA_SAMPLES - 1) as f64;
    let mut negative = Vec::with_capacity(LAMBDA_SAMPLES);
    for k in 0..LAMBDA_SAMPLES {
        negative.push(problem.omega(tau, sigma, lam(k))? < 0.0);
    }

    // Bisect a sign change between lo and hi; returns the crossing estimate.
    let refine = |mut lo: f64, mut hi: f64, lo_negative: bool| -> Result<f64, MsfError> {
        while hi - lo > LAMBDA_TOL {
            let mid = 0.5 * (lo + hi);
            if (problem.omega(tau, sigma, mid)? < 0.0) == lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };

    let mut intervals = Vec::new();
    let mut k = 0;
    while k < LAMBDA_SAMPLES {
        if !negative[k] {
            k += 1;
            continue;
        }
        let start = if k == 0 {
            -1.0
        } else {
            refine(lam(k - 1), lam(k), false)?
        };
        let mut end_k = k;
        while end_k + 1 < LAMBDA_SAMPLES && negative[end_k + 1] {
            end_k += 1;
        }
        let end = if end_k == LAMBDA_SAMPLES - 1 {
            1.0
        } else {
            refine(lam(end_k), lam(end_k + 1), true)?
        };
        intervals.push((start, end));
        k = end_k + 1;
    }
    let total_measure = intervals.iter().map(|(a, b)| b - a).sum();
    let is_single_interval_to_one = intervals.len() == 1 && intervals[0].1 == 1.0;
    Ok(LambdaInterval {
        intervals,
        total_measure,
        is_single_interval_to_one,
    })
}

/// Columns of an ADI grid whose negative cells do not form one run in `sigma`.
pub fn sigma_run_violations(grid: &ScanGrid) -> Vec<ColumnViolation> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = Vec::new();
    for ix in 0..nx {
        let mut runs = Vec::new();
        let mut iy = 0;
        while iy < ny {
            if !grid.is_inside(grid.index(ix, iy)) {
                iy += 1;
                continue;
            }
            let start = iy;
            while iy + 1 < ny && grid.is_inside(grid.index(ix, iy + 1)) {
                iy += 1;
            }
            runs.push((grid.y.value(start), grid.y.value(iy)));
            iy += 1;
        }
        if runs.len() > 1 {
            out.push(ColumnViolation {
                ix,
                tau: grid.x.value(ix),
                runs,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_from(nx: usize, ny: usize, values: Vec<f64>) -> ScanGrid {
        ScanGrid {
            kind: GridKind::Adi,
            x: Axis::new(Param::Tau, 0.0, 1.0, nx).unwrap(),
            y: Axis::new(Param::Sigma, 0.0, 1.0, ny).unwrap(),
            fixed: Some((Param::Lambda, 1.0)),
            values,
            active: None,
            anomalies: Vec::new(),
        }
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::new(Param::Tau, 0.0, 1.0, 0).is_err());
        assert!(Axis::new(Param::Tau, 1.0, 0.0, 5).is_err());
        assert!(Axis::new(Param::Tau, 0.0, 1.0, 1).is_err());
        assert!(Axis::new(Param::Sigma, -1.0, 1.0, 5).is_err());
        assert!(Axis::new(Param::Lambda, -2.0, 1.0, 5).is_err());
        let a = Axis::new(Param::Sigma, 0.0, 0.0, 1).unwrap();
        assert_eq!(a.values(), vec![0.0]);
        let b = Axis::new(Param::Tau, 0.0, 20.0, 401).unwrap();
        assert_eq!(b.value(400), 20.0);
        assert!((b.step() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn all_positive_grid_has_no_islands() {
        let g = grid_from(3, 3, vec![1.0; 9]);
        assert!(extract_islands(&g).unwrap().is_empty());
    }

    #[test]
    fn single_negative_cell() {
        let mut v = vec![1.0; 9];
        v[4] = -1.0;
        let isl = extract_islands(&grid_from(3, 3, v)).unwrap();
        assert_eq!(isl.len(), 1);
        assert_eq!(isl[0].cell_count, 1);
        assert!((isl[0].area - 0.25).abs() < 1e-15);
    }

    #[test]
    fn diagonal_neighbours_are_separate_islands() {
        // Negative cells at (0,0) and (1,1) only touch at a corner.
        let v = vec![-1.0, 1.0, 1.0, -1.0];
        let isl = extract_islands(&grid_from(2, 2, v)).unwrap();
        assert_eq!(isl.len(), 2);
        assert_eq!(isl[0].id, 1);
        assert!(isl[0].min_tau <= isl[1].min_tau);
    }

    #[test]
    fn sigma_runs_detected() {
        // Column 0 is negative at rows 0 and 2 but not at row 1.
        let v = vec![-1.0, 1.0, 1.0, 1.0, -1.0, 1.0];
        let viol = sigma_run_violations(&grid_from(2, 3, v));
        assert_eq!(viol.len(), 1);
        assert_eq!(viol[0].ix, 0);
        assert_eq!(viol[0].runs.len(), 2);
    }
}
