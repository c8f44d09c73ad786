//! Oscillator families and their homogeneous fixed points.
//!
//! The built-in Rössler, Lorenz and Chen systems carry a vector field, an
//! analytic Jacobian and closed-form fixed points. A custom system is given
//! only by its linearization `DF(s)` at a user-chosen point `s`; its vector
//! field is taken to be the affine map `F(x) = DF(s) (x - s)`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown system `{0}` (expected rossler, lorenz, chen or custom)")]
    UnknownSystem(String),
    #[error("system `{system}` has no parameter `{name}`")]
    UnknownParameter { system: String, name: String },
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("fixed point index {index} out of range ({count} available)")]
    FixedPointIndex { index: usize, count: usize },
    #[error("no real fixed point: {0}")]
    NoFixedPoint(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Rossler,
    Lorenz,
    Chen,
    Custom,
}

impl SystemKind {
    pub fn parse(name: &str) -> Result<Self, ModelError> {
        match name.to_ascii_lowercase().as_str() {
            "rossler" | "rössler" => Ok(Self::Rossler),
            "lorenz" => Ok(Self::Lorenz),
            "chen" => Ok(Self::Chen),
            "custom" => Ok(Self::Custom),
            _ => Err(ModelError::UnknownSystem(name.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Rossler => "rossler",
            Self::Lorenz => "lorenz",
            Self::Chen => "chen",
            Self::Custom => "custom",
        }
    }

    /// Parameter names with their default values, in canonical order.
    pub fn default_params(self) -> &'static [(&'static str, f64)] {
        match self {
            Self::Rossler => &[("a", 0.15), ("b", 0.2), ("c", 10.0)],
            Self::Lorenz => &[("a", 10.0), ("r", 28.0), ("b", 8.0 / 3.0)],
            Self::Chen => &[("a", 35.0), ("c", 28.0), ("beta", 8.0 / 3.0)],
            Self::Custom => &[],
        }
    }

    /// The `(tau_max, sigma_max)` window in which each built-in system's
    /// islands are studied; both ranges start at 0.
    pub fn default_window(self) -> Option<(f64, f64)> {
        match self {
            Self::Rossler => Some((20.0, 20.0)),
            Self::Lorenz => Some((15.0, 600.0)),
            Self::Chen => Some((15.0, 30.0)),
            Self::Custom => None,
        }
    }

    pub fn all_builtin() -> [SystemKind; 3] {
        [Self::Rossler, Self::Lorenz, Self::Chen]
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Linearization supplied for a custom system.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub point: Vec<f64>,
    pub jacobian: DMatrix<f64>,
}

/// An oscillator family with concrete parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    kind: SystemKind,
    dim: usize,
    params: BTreeMap<String, f64>,
    linearization: Option<Linearization>,
}

impl SystemModel {
    /// Built-in system with parameter overrides applied on top of defaults.
    pub fn builtin(kind: SystemKind, overrides: &[(String, f64)]) -> Result<Self, ModelError> {
        if kind == SystemKind::Custom {
            return Err(ModelError::MissingParameter("jacobian".into()));
        }
        let mut params: BTreeMap<String, f64> = kind
            .default_params()
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        for (name, value) in overrides {
            let Some(slot) = params.get_mut(name) else {
                return Err(ModelError::UnknownParameter {
                    system: kind.name().into(),
                    name: name.clone(),
                });
            };
            if !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name: name.clone(),
                    reason: "must be finite".into(),
                });
            }
            *slot = *value;
        }
        Ok(Self {
            kind,
            dim: 3,
            params,
            linearization: None,
        })
    }

    /// Custom system defined by `DF(s)` at `point` (origin when omitted).
    pub fn custom(jacobian: DMatrix<f64>, point: Option<Vec<f64>>) -> Result<Self, ModelError> {
        let m = jacobian.nrows();
        if m == 0 || jacobian.ncols() != m {
            return Err(ModelError::InvalidParameter {
                name: "jacobian".into(),
                reason: format!(
                    "must be a non-empty square matrix, got {}x{}",
                    m,
                    jacobian.ncols()
                ),
            });
        }
        if jacobian.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "jacobian".into(),
                reason: "entries must be finite".into(),
            });
        }
        let point = point.unwrap_or_else(|| vec![0.0; m]);
        if point.len() != m {
            return Err(ModelError::InvalidParameter {
                name: "point".into(),
                reason: format!("expected {m} coordinates, got {}", point.len()),
            });
        }
        Ok(Self {
            kind: SystemKind::Custom,
            dim: m,
            params: BTreeMap::new(),
            linearization: Some(Linearization { point, jacobian }),
        })
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn linearization(&self) -> Option<&Linearization> {
        self.linearization.as_ref()
    }

    /// Writes `F(x)` into `out`.
    pub fn vector_field(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match self.kind {
            SystemKind::Rossler => {
                let (a, b, c) = (self.param("a"), self.param("b"), self.param("c"));
                out[0] = -x[1] - x[2];
                out[1] = x[0] + a * x[1];
                out[2] = b + (x[0] - c) * x[2];
            }
            SystemKind::Lorenz => {
                let (a, r, b) = (self.param("a"), self.param("r"), self.param("b"));
                out[0] = a * (x[1] - x[0]);
                out[1] = x[0] * (r - x[2]) - x[1];
                out[2] = x[0] * x[1] - b * x[2];
            }
            SystemKind::Chen => {
                let (a, c, beta) = (self.param("a"), self.param("c"), self.param("beta"));
                out[0] = a * (x[1] - x[0]);
                out[1] = (c - a - x[2]) * x[0] + c * x[1];
                out[2] = x[0] * x[1] - beta * x[2];
            }
            SystemKind::Custom => {
                let lin = self
                    .linearization
                    .as_ref()
                    .expect("custom model has a linearization");
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (0..self.dim)
                        .map(|j| lin.jacobian[(i, j)] * (x[j] - lin.point[j]))
                        .sum();
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.vector_field(x, &mut out);
        out
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        match self.kind {
            SystemKind::Rossler => {
                let (a, c) = (self.param("a"), self.param("c"));
                DMatrix::from_row_slice(3, 3, &[0.0, -1.0, -1.0, 1.0, a, 0.0, x[2], 0.0, x[0] - c])
            }
            SystemKind::Lorenz => {
                let (a, r, b) = (self.param("a"), self.param("r"), self.param("b"));
                DMatrix::from_row_slice(3, 3, &[-a, a, 0.0, r - x[2], -1.0, -x[0], x[1], x[0], -b])
            }
            SystemKind::Chen => {
                let (a, c, beta) = (self.param("a"), self.param("c"), self.param("beta"));
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[-a, a, 0.0, c - a - x[2], c, -x[0], x[1], x[0], -beta],
                )
            }
            SystemKind::Custom => self.linearization.as_ref().unwrap().jacobian.clone(),
        }
    }

    /// Index of the fixed point studied by default: the `+` branch for
    /// Lorenz and Chen, the point nearest the origin for Rössler.
    pub fn default_fixed_point_index(&self) -> usize {
        match self.kind {
            SystemKind::Rossler => 1,
            _ => 0,
        }
    }
}

/// Build a model by name. `custom` needs `jacobian` (and optionally `point`).
pub fn build_system(
    name: &str,
    params: &[(String, f64)],
    custom: Option<Linearization>,
) -> Result<SystemModel, ModelError> {
    match SystemKind::parse(name)? {
        SystemKind::Custom => {
            if !params.is_empty() {
                return Err(ModelError::UnknownParameter {
                    system: "custom".into(),
                    name: params[0].0.clone(),
                });
            }
            let lin = custom.ok_or_else(|| ModelError::MissingParameter("jacobian".into()))?;
            SystemModel::custom(lin.jacobian, Some(lin.point))
        }
        kind => SystemModel::builtin(kind, params),
    }
}

/// A homogeneous equilibrium with its linearization.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub state: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    /// Spectrum of `jacobian`, descending real part.
    pub eigenvalues: Vec<Complex64>,
}

impl FixedPoint {
    pub fn new(model: &SystemModel, state: Vec<f64>) -> Result<Self, ModelError> {
        let jacobian = model.jacobian(&state);
        let eigenvalues = linalg::eigenvalues(&jacobian)?;
        Ok(Self {
            state,
            jacobian,
            eigenvalues,
        })
    }

    pub fn max_real_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Fixed points found for a model, plus a reason when there are none.
#[derive(Debug, Clone)]
pub struct FixedPoints {
    pub points: Vec<FixedPoint>,
    pub diagnostic: Option<String>,
}

impl FixedPoints {
    pub fn select(&self, index: usize) -> Result<&FixedPoint, ModelError> {
        if self.points.is_empty() {
            return Err(ModelError::NoFixedPoint(
                self.diagnostic
                    .clone()
                    .unwrap_or_else(|| "empty set".into()),
            ));
        }
        self.points.get(index).ok_or(ModelError::FixedPointIndex {
            index,
            count: self.points.len(),
        })
    }
}

/// Closed-form real fixed points, `+` branch first.
///
/// Lorenz and Chen list the symmetric pair before the origin. For Rössler,
/// `z = (c ± sqrt(c^2 - 4ab)) / (2a)`, `x = a z`, `y = -z`.
pub fn find_fixed_points(model: &SystemModel) -> Result<FixedPoints, ModelError> {
    let mut states: Vec<Vec<f64>> = Vec::new();
    let mut diagnostic = None;
    match model.kind() {
        SystemKind::Rossler => {
            let (a, b, c) = (model.param("a"), model.param("b"), model.param("c"));
            let disc = c * c - 4.0 * a * b;
            if a == 0.0 {
                diagnostic = Some("parameter a must be nonzero for the closed form".into());
            } else if disc <= 0.0 {
                diagnostic = Some(format!(
                    "c^2 - 4ab = {disc} <= 0: the Rössler system has no pair of real fixed points"
                ));
            } else {
                for sgn in [1.0, -1.0] {
                    let z = (c + sgn * disc.sqrt()) / (2.0 * a);
                    states.push(vec![a * z, -z, z]);
                }
            }
        }
        SystemKind::Lorenz => {
            let (r, b) = (model.param("r"), model.param("b"));
            let q = b * (r - 1.0);
            if r > 1.0 && q > 0.0 {
                let x = q.sqrt();
                states.push(vec![x, x, r - 1.0]);
                states.push(vec![-x, -x, r - 1.0]);
            }
            states.push(vec![0.0, 0.0, 0.0]);
        }
        SystemKind::Chen => {
            let (a, c, beta) = (model.param("a"), model.param("c"), model.param("beta"));
            let q = beta * (2.0 * c - a);
            if q > 0.0 {
                let x = q.sqrt();
                states.push(vec![x, x, 2.0 * c - a]);
                states.push(vec![-x, -x, 2.0 * c - a]);
            }
            states.push(vec![0.0, 0.0, 0.0]);
        }
        SystemKind::Custom => {
            states.push(model.linearization().unwrap().point.clone());
        }
    }
    let points = states
        .into_iter()
        .map(|s| FixedPoint::new(model, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FixedPoints { points, diagnostic })
}

/// Jacobian spectrum at a fixed point, descending real part.
pub fn jacobian_spectrum(fp: &FixedPoint) -> Vec<Complex64> {
    fp.eigenvalues.clone()
}
