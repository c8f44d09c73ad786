//! Coupling matrices and the network amplitude-death verdict.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::msf::{MsfError, MsfProblem};

/// Eigenvalues closer than this are evaluated once.
pub const EIGENVALUE_DEDUP_TOL: f64 = 1e-12;
/// Largest imaginary part tolerated before a spectrum counts as complex.
pub const IMAG_TOL: f64 = 1e-9;
/// Allowed excursion of eigenvalues beyond `[-1, 1]` before rejection.
pub const BOUND_TOL: f64 = 1e-9;
/// Row sums must agree to this after normalization.
pub const ROW_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("coupling matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("network must have at least one node")]
    Empty,
    #[error("entry ({0}, {1}) = {2} is negative or not finite")]
    InvalidEntry(usize, usize, f64),
    #[error("adjacency is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("node {0} has zero degree")]
    ZeroDegree(usize),
    #[error("row sums are not constant: row 0 sums to {first}, row {row} to {sum}")]
    RowSum { first: f64, row: usize, sum: f64 },
    #[error("eigenvalue {re} + {im}i is not real")]
    ComplexEigenvalue { re: f64, im: f64 },
    #[error("eigenvalue {0} lies outside [-1, 1]")]
    OutOfBounds(f64),
    #[error("coupling matrix is not diagonalizable")]
    NotDiagonalizable,
    #[error("graph input: {0}")]
    Parse(String),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("Omega failed at lambda = {lambda}: {source}")]
    Msf {
        lambda: f64,
        #[source]
        source: MsfError,
    },
}

/// A validated, row-normalized coupling matrix with its real spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    pub n: usize,
    /// Row-major entries after normalization to unit row sum.
    pub entries: Vec<f64>,
    /// Row sum of the matrix as supplied; coupling strengths are scaled by it.
    pub row_sum: f64,
    /// Descending, clamped to `[-1, 1]`.
    pub eigenvalues: Vec<f64>,
    pub diagonalizable: bool,
    /// More than one means the graph is disconnected.
    pub unit_multiplicity: usize,
}

impl CouplingMatrix {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("n >= 1")
    }

    /// Distinct eigenvalues, merged within [`EIGENVALUE_DEDUP_TOL`].
    pub fn distinct_eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &l in &self.eigenvalues {
            if out
                .last()
                .is_none_or(|&p: &f64| (p - l).abs() > EIGENVALUE_DEDUP_TOL)
            {
                out.push(l);
            }
        }
        out
    }
}

fn check_entries(a: &DMatrix<f64>) -> Result<usize, NetworkError> {
    if a.nrows() != a.ncols() {
        return Err(NetworkError::NotSquare(a.nrows(), a.ncols()));
    }
    let n = a.nrows();
    if n == 0 {
        return Err(NetworkError::Empty);
    }
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            if !v.is_finite() || v < 0.0 {
                return Err(NetworkError::InvalidEntry(i, j, v));
            }
        }
    }
    Ok(n)
}

fn finish_spectrum(mut ev: Vec<f64>) -> Result<Vec<f64>, NetworkError> {
    ev.sort_by(|a, b| b.total_cmp(a));
    for l in &mut ev {
        if l.abs() > 1.0 + BOUND_TOL {
            return Err(NetworkError::OutOfBounds(*l));
        }
        *l = l.clamp(-1.0, 1.0);
    }
    Ok(ev)
}

fn unit_multiplicity(ev: &[f64]) -> usize {
    ev.iter().filter(|&&l| (l - 1.0).abs() < 1e-9).count()
}

/// `G = D^-1 A` for a symmetric non-negative adjacency `A`.
///
/// The spectrum comes from the symmetric matrix `D^-1/2 A D^-1/2`, which is
/// similar to `G`, so it is real by construction.
pub fn build_coupling(adjacency: &DMatrix<f64>) -> Result<CouplingMatrix, NetworkError> {
    let n = check_entries(adjacency)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let (x, y) = (adjacency[(i, j)], adjacency[(j, i)]);
            if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                return Err(NetworkError::Asymmetric(i, j));
            }
        }
    }
    let degree: Vec<f64> = (0..n).map(|i| adjacency.row(i).sum()).collect();
    if let Some(i) = degree.iter().position(|&d| d <= 0.0) {
        return Err(NetworkError::ZeroDegree(i));
    }
    let g = DMatrix::from_fn(n, n, |i, j| adjacency[(i, j)] / degree[i]);
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
    let sym = DMatrix::from_fn(n, n, |i, j| {
        let a = 0.5 * (adjacency[(i, j)] + adjacency[(j, i)]);
        inv_sqrt[i] * a * inv_sqrt[j]
    });
    let eigenvalues = finish_spectrum(
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .collect(),
    )?;
    Ok(CouplingMatrix {
        n,
        entries: row_major(&g),
        row_sum: 1.0,
        unit_multiplicity: unit_multiplicity(&eigenvalues),
        eigenvalues,
        diagonalizable: true,
    })
}

/// Direct entry of a row-constant coupling matrix `G`.
///
/// The common row sum `c` is divided out, so callers must use `c * sigma`
/// as the effective coupling strength (reported in the verdict).
pub fn coupling_from_matrix(g: &DMatrix<f64>) -> Result<CouplingMatrix, NetworkError> {
    let n = check_entries(g)?;
    let sums: Vec<f64> = (0..n).map(|i| g.row(i).sum()).collect();
    let c = sums[0];
    if c <= 0.0 {
        return Err(NetworkError::ZeroDegree(0));
    }
    for (row, &sum) in sums.iter().enumerate() {
        if (sum / c - 1.0).abs() > ROW_SUM_TOL {
            return Err(NetworkError::RowSum { first: c, row, sum });
        }
    }
    let normalized = g / c;
    let dec = linalg::eigendecompose(&normalized)?;
    if !dec.is_diagonalizable() {
        return Err(NetworkError::NotDiagonalizable);
    }
    let mut ev = Vec::with_capacity(n);
    for z in &dec.eigenvalues {
        if z.im.abs() > IMAG_TOL {
            return Err(NetworkError::ComplexEigenvalue { re: z.re, im: z.im });
        }
        ev.push(z.re);
    }
    let eigenvalues = finish_spectrum(ev)?;
    Ok(CouplingMatrix {
        n,
        entries: row_major(&normalized),
        row_sum: c,
        unit_multiplicity: unit_multiplicity(&eigenvalues),
        eigenvalues,
        diagonalizable: true,
    })
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenOmega {
    pub lambda: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkVerdict {
    pub stable: bool,
    pub per_eigenvalue: Vec<EigenOmega>,
    pub worst: EigenOmega,
    pub tau: f64,
    pub sigma: f64,
    /// `sigma` times the row sum of the supplied coupling matrix.
    pub sigma_effective: f64,
    pub unit_multiplicity: usize,
}

/// Stable amplitude death iff `Omega(tau, sigma, lambda_i) < 0` for every
/// eigenvalue of `G`.
pub fn check_amplitude_death(
    g: &CouplingMatrix,
    problem: &MsfProblem,
    tau: f64,
    sigma: f64,
) -> Result<NetworkVerdict, NetworkError> {
    let sigma_effective = sigma * g.row_sum;
    let mut per_eigenvalue = Vec::new();
    for lambda in g.distinct_eigenvalues() {
        let omega = problem
            .omega(tau, sigma_effective, lambda)
            .map_err(|source| NetworkError::Msf { lambda, source })?;
        per_eigenvalue.push(EigenOmega { lambda, omega });
    }
    let worst = per_eigenvalue
        .iter()
        .fold(None::<&EigenOmega>, |best, e| match best {
            Some(b) if b.omega >= e.omega => Some(b),
            _ => Some(e),
        })
        .cloned()
        .expect("at least one eigenvalue");
    Ok(NetworkVerdict {
        stable: worst.omega < 0.0,
        per_eigenvalue,
        worst,
        tau,
        sigma,
        sigma_effective,
        unit_multiplicity: g.unit_multiplicity,
    })
}

/// Undirected ring on `n` nodes with unit weights.
pub fn ring_adjacency(n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        if i != j {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
    }
    a
}

pub fn complete_adjacency(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GraphDoc {
    Adjacency {
        adjacency: Vec<Vec<f64>>,
    },
    Edges {
        nodes: usize,
        edges: Vec<(usize, usize, f64)>,
    },
}

/// Parses a graph description into an adjacency matrix.
///
/// Accepts JSON with `"adjacency"` (row-major nested arrays) or with
/// `"nodes"` and `"edges"` (`[i, j, weight]`, 0-based, mirrored to `(j, i)`),
/// and otherwise a whitespace-separated matrix with one row per line.
pub fn parse_graph(text: &str) -> Result<DMatrix<f64>, NetworkError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| NetworkError::Parse(e.to_string()))?;
        return match doc {
            GraphDoc::Adjacency { adjacency } => rows_to_matrix(adjacency),
            GraphDoc::Edges { nodes, edges } => {
                let mut a = DMatrix::zeros(nodes, nodes);
                for (i, j, w) in edges {
                    if i >= nodes || j >= nodes {
                        return Err(NetworkError::Parse(format!(
                            "edge ({i}, {j}) out of range for {nodes} nodes"
                        )));
                    }
                    a[(i, j)] = w;
                    a[(j, i)] = w;
                }
                Ok(a)
            }
        };
    }
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| NetworkError::Parse(format!("{t:?}: {e}")))
                })
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows_to_matrix(rows)
}

fn rows_to_matrix(rows: Vec<Vec<f64>>) -> Result<DMatrix<f64>, NetworkError> {
    let n = rows.len();
    if n == 0 {
        return Err(NetworkError::Empty);
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(NetworkError::Parse(format!(
            "row {i} has {} entries, expected {n}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}
