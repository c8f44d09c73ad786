//! The master stability function `Omega(tau, sigma, lambda)`.
//!
//! `Omega` is the largest real part among the characteristic roots of the
//! linear delay equation
//!
//! ```text
//! zeta'(t) = (DF - sigma H) zeta(t) + sigma lambda H zeta(t - tau)
//! ```
//!
//! When `DF` and `H` share an eigenbasis the problem splits into scalar
//! equations `mu = a + c exp(-mu tau)` with `a = mu_df - sigma mu_h` and
//! `c = sigma lambda mu_h`, whose dominant root is
//! `a + W0(c tau exp(-a tau)) / tau`. Otherwise the roots come from the
//! spectral discretization in [`spectral`].

pub mod spectral;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lambert::{lambert_w0_log, LambertError};
use crate::linalg::{self, Commutation, LinalgError, NotCommutingReason};
use crate::models::FixedPoint;

pub use spectral::{characteristic_residual, spectral_rightmost_root, SpectralOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MsfError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("the Lambert-W root formula needs tau > 0 (got {0})")]
    DelayRequired(f64),
    #[error(transparent)]
    Lambert(#[from] LambertError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Newton refinement diverged for every spectral candidate; unrefined estimates: {estimates:?}")]
    SpectralNoConvergence { estimates: Vec<Complex64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lambert,
    Spectral,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsfQuery {
    pub tau: f64,
    pub sigma: f64,
    pub lambda: f64,
}

impl MsfQuery {
    pub fn new(tau: f64, sigma: f64, lambda: f64) -> Self {
        Self { tau, sigma, lambda }
    }

    pub fn validate(&self) -> Result<(), MsfError> {
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(MsfError::InvalidQuery(format!(
                "tau must be finite and >= 0, got {}",
                self.tau
            )));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(MsfError::InvalidQuery(format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        if !(-1.0..=1.0).contains(&self.lambda) {
            return Err(MsfError::InvalidQuery(format!(
                "lambda must lie in [-1, 1], got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsfValue {
    pub omega: f64,
    pub dominant_root: Complex64,
    /// Scalar mode attaining the maximum; absent for the spectral path.
    pub mode_index: Option<usize>,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Mode {
    index: usize,
    mu_df: Complex64,
    mu_h: Complex64,
}

/// A master stability problem for one Jacobian `DF(s)` and inner coupling `H`.
#[derive(Debug, Clone)]
pub struct MsfProblem {
    df: DMatrix<f64>,
    h: DMatrix<f64>,
    mu_df: Vec<Complex64>,
    mu_h: Vec<Complex64>,
    /// Modes that need evaluating: conjugate duplicates are dropped because
    /// their roots are conjugate as well.
    modes: Vec<Mode>,
    not_commuting: Option<NotCommutingReason>,
    spectral: SpectralOptions,
}

impl MsfProblem {
    pub fn new(df: DMatrix<f64>, h: DMatrix<f64>) -> Result<Self, MsfError> {
        let commutation = linalg::try_commuting_pair(&df, &h)?;
        let (mu_df, mu_h, not_commuting) = match commutation {
            Commutation::Commuting(pair) => (pair.mu_df, pair.mu_h, None),
            Commutation::NotCommuting(reason) => (Vec::new(), Vec::new(), Some(reason)),
        };
        let mut modes: Vec<Mode> = Vec::new();
        for (index, (&a, &b)) in mu_df.iter().zip(&mu_h).enumerate() {
            let tol = 1e-12 * (1.0 + a.norm() + b.norm());
            let duplicate = modes.iter().any(|m| {
                ((m.mu_df - a.conj()).norm() <= tol && (m.mu_h - b.conj()).norm() <= tol)
                    || ((m.mu_df - a).norm() <= tol && (m.mu_h - b).norm() <= tol)
            });
            if !duplicate {
                modes.push(Mode {
                    index,
                    mu_df: a,
                    mu_h: b,
                });
            }
        }
        Ok(Self {
            df,
            h,
            mu_df,
            mu_h,
            modes,
            not_commuting,
            spectral: SpectralOptions::default(),
        })
    }

    pub fn from_fixed_point(fp: &FixedPoint, h: DMatrix<f64>) -> Result<Self, MsfError> {
        Self::new(fp.jacobian.clone(), h)
    }

    pub fn with_spectral_options(mut self, opts: SpectralOptions) -> Self {
        self.spectral = opts;
        self
    }

    pub fn jacobian(&self) -> &DMatrix<f64> {
        &self.df
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.df.nrows()
    }

    pub fn is_diagonal(&self) -> bool {
        self.not_commuting.is_none()
    }

    pub fn not_commuting_reason(&self) -> Option<NotCommutingReason> {
        self.not_commuting
    }

    /// Index-aligned `(mu_df, mu_h)` pairs when the pair commutes.
    pub fn mode_eigenvalues(&self) -> (&[Complex64], &[Complex64]) {
        (&self.mu_df, &self.mu_h)
    }

    /// `max Re` of the spectrum of `DF`; equals `Omega` at `sigma = 0`.
    pub fn uncoupled_growth(&self) -> f64 {
        if self.is_diagonal() {
            self.mu_df
                .iter()
                .map(|z| z.re)
                .fold(f64::NEG_INFINITY, f64::max)
        } else {
            linalg::eigenvalues(&self.df)
                .map(|ev| ev[0].re)
                .unwrap_or(f64::NAN)
        }
    }

    pub fn omega(&self, tau: f64, sigma: f64, lambda: f64) -> Result<f64, MsfError> {
        self.eval(MsfQuery::new(tau, sigma, lambda))
            .map(|v| v.omega)
    }

    pub fn eval(&self, q: MsfQuery) -> Result<MsfValue, MsfError> {
        q.validate()?;
        if q.tau == 0.0 {
            return self.eval_delay_free(q);
        }
        if self.is_diagonal() {
            self.eval_lambert(q)
        } else {
            self.eval_spectral(q)
        }
    }

    /// Lambert-W path; requires a commuting pair.
    pub fn eval_lambert(&self, q: MsfQuery) -> Result<MsfValue, MsfError> {
        if !self.is_diagonal() {
            return Err(MsfError::InvalidQuery(
                "DF and H do not share an eigenbasis".into(),
            ));
        }
        let mut best: Option<(Complex64, usize)> = None;
        for m in &self.modes {
            let root = scalar_root(m.mu_df, m.mu_h, q.tau, q.sigma, q.lambda)?;
            if best.is_none_or(|(r, _)| root.re > r.re) {
                best = Some((root, m.index));
            }
        }
        let (root, index) = best.expect("at least one mode");
        Ok(MsfValue {
            omega: root.re,
            dominant_root: root,
            mode_index: Some(index),
            method: Method::Lambert,
        })
    }

    pub fn eval_spectral(&self, q: MsfQuery) -> Result<MsfValue, MsfError> {
        if q.tau == 0.0 {
            return self.eval_delay_free(q);
        }
        spectral::spectral_rightmost_root_with(
            &self.df,
            &self.h,
            q.tau,
            q.sigma,
            q.lambda,
            &self.spectral,
        )
    }

    fn eval_delay_free(&self, q: MsfQuery) -> Result<MsfValue, MsfError> {
        let shift = q.sigma * (q.lambda - 1.0);
        if self.is_diagonal() {
            let mut best: Option<(Complex64, usize)> = None;
            for m in &self.modes {
                let root = m.mu_df + shift * m.mu_h;
                if best.is_none_or(|(r, _)| root.re > r.re) {
                    best = Some((root, m.index));
                }
            }
            let (root, index) = best.expect("at least one mode");
            return Ok(MsfValue {
                omega: root.re,
                dominant_root: root,
                mode_index: Some(index),
                method: Method::ClosedForm,
            });
        }
        let ev = linalg::eigenvalues(&(&self.df + &self.h * shift))?;
        Ok(MsfValue {
            omega: ev[0].re,
            dominant_root: ev[0],
            mode_index: None,
            method: Method::ClosedForm,
        })
    }
}

/// Principal-branch root of `mu = mu_df - sigma mu_h + sigma lambda mu_h exp(-mu tau)`.
pub fn scalar_root(
    mu_df: Complex64,
    mu_h: Complex64,
    tau: f64,
    sigma: f64,
    lambda: f64,
) -> Result<Complex64, MsfError> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(MsfError::DelayRequired(tau));
    }
    let a = mu_df - sigma * mu_h;
    let c = sigma * lambda * mu_h;
    if c.norm() == 0.0 {
        return Ok(a);
    }
    // W0(c tau e^{-a tau}) evaluated through its logarithm so that large
    // sigma * tau does not overflow.
    let log_z = (c * tau).ln() - a * tau;
    let w = lambert_w0_log(log_z)?.value;
    let mut mu = a + w / tau;

    // A couple of Newton steps on the characteristic equation remove the
    // cancellation error of `a + w / tau` when both terms are large.
    let mut res = scalar_residual(mu, a, c, tau);
    for _ in 0..3 {
        if res.is_nan() || res <= 0.0 {
            break;
        }
        let e = (-mu * tau).exp();
        let fp = 1.0 + c * tau * e;
        let next = mu - (mu - a - c * e) / fp;
        let next_res = scalar_residual(next, a, c, tau);
        if next_res.is_finite() && next_res < res {
            mu = next;
            res = next_res;
        } else {
            break;
        }
    }
    Ok(mu)
}

fn scalar_residual(mu: Complex64, a: Complex64, c: Complex64, tau: f64) -> f64 {
    (mu - a - c * (-mu * tau).exp()).norm()
}

/// `|mu - mu_df + sigma mu_h - sigma lambda mu_h exp(-mu tau)|`.
pub fn scalar_characteristic_residual(
    mu: Complex64,
    mu_df: Complex64,
    mu_h: Complex64,
    tau: f64,
    sigma: f64,
    lambda: f64,
) -> f64 {
    scalar_residual(mu, mu_df - sigma * mu_h, sigma * lambda * mu_h, tau)
}

/// Evaluate `Omega` for a bare query against a problem.
pub fn eval_msf(problem: &MsfProblem, q: MsfQuery) -> Result<MsfValue, MsfError> {
    problem.eval(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_coupling_leaves_jacobian_eigenvalue() {
        let r = scalar_root(c(2.0, 0.0), c(1.0, 0.0), 1.7, 0.0, 0.3).unwrap();
        assert_eq!(r, c(2.0, 0.0));
    }

    #[test]
    fn zero_lambda_drops_delayed_term() {
        let r = scalar_root(c(-1.0, 0.0), c(1.0, 0.0), 1.0, 1.0, 0.0).unwrap();
        assert_eq!(r, c(-2.0, 0.0));
    }

    #[test]
    fn rossler_like_root_residual() {
        let mu_df = c(0.0740, 0.9972);
        let r = scalar_root(mu_df, c(1.0, 0.0), 1.0, 1.0, 1.0).unwrap();
        let res = scalar_characteristic_residual(r, mu_df, c(1.0, 0.0), 1.0, 1.0, 1.0);
        assert!(res < 1e-10, "residual {res}");
    }

    #[test]
    fn large_sigma_tau_does_not_overflow() {
        let mu_df = c(0.09395562, 10.19450522);
        let r = scalar_root(mu_df, c(1.0, 0.0), 15.0, 600.0, 1.0).unwrap();
        assert!(r.re.is_finite());
        let res = scalar_characteristic_residual(r, mu_df, c(1.0, 0.0), 15.0, 600.0, 1.0);
        assert!(res < 1e-10, "residual {res}");
    }

    #[test]
    fn tau_zero_rejected_by_scalar_root() {
        assert!(matches!(
            scalar_root(c(1.0, 0.0), c(1.0, 0.0), 0.0, 1.0, 1.0),
            Err(MsfError::DelayRequired(_))
        ));
    }

    #[test]
    fn query_validation() {
        assert!(MsfQuery::new(-1.0, 1.0, 0.0).validate().is_err());
        assert!(MsfQuery::new(1.0, -1.0, 0.0).validate().is_err());
        assert!(MsfQuery::new(1.0, 1.0, 1.5).validate().is_err());
        assert!(MsfQuery::new(f64::NAN, 1.0, 0.0).validate().is_err());
        assert!(MsfQuery::new(0.0, 0.0, -1.0).validate().is_ok());
    }

    #[test]
    fn delay_free_closed_form() {
        let df = DMatrix::from_row_slice(2, 2, &[0.1, -1.0, 1.0, 0.1]);
        let p = MsfProblem::new(df, DMatrix::identity(2, 2)).unwrap();
        let v = p.eval(MsfQuery::new(0.0, 3.0, 1.0)).unwrap();
        assert_eq!(v.method, Method::ClosedForm);
        assert!((v.omega - 0.1).abs() < 1e-12);
        let v = p.eval(MsfQuery::new(0.0, 3.0, 0.0)).unwrap();
        assert!((v.omega - (0.1 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn conjugate_modes_report_smallest_index() {
        let df = DMatrix::from_row_slice(2, 2, &[0.1, -1.0, 1.0, 0.1]);
        let p = MsfProblem::new(df, DMatrix::identity(2, 2)).unwrap();
        let v = p.eval(MsfQuery::new(1.0, 0.5, 0.5)).unwrap();
        assert_eq!(v.mode_index, Some(0));
        assert_eq!(v.method, Method::Lambert);
    }
}
