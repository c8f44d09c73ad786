//! Rightmost characteristic roots for non-commuting `DF` and `H`.
//!
//! The infinitesimal generator of the delay equation is discretized by
//! Chebyshev collocation on `[-tau, 0]`. Its rightmost eigenvalues are then
//! refined by Newton's method on `det M(mu)`, where
//! `M(mu) = mu I - A0 - A1 exp(-mu tau)`, `A0 = DF - sigma H` and
//! `A1 = sigma lambda H`. The Newton step uses the identity
//! `det M / (det M)' = 1 / tr(M^-1 M')`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Method, MsfError, MsfValue};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// The node count doubles until the refined rightmost root moves by less
    /// than this.
    pub stability_tol: f64,
    pub newton_tol: f64,
    pub newton_max_steps: usize,
    /// Cap on the Newton restarts of the final sweep.
    pub max_sweep_seeds: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            initial_nodes: 20,
            max_nodes: 80,
            stability_tol: 1e-8,
            newton_tol: 1e-12,
            newton_max_steps: 50,
            max_sweep_seeds: 4096,
        }
    }
}

/// Rightmost root with default options.
pub fn spectral_rightmost_root(
    df: &DMatrix<f64>,
    h: &DMatrix<f64>,
    tau: f64,
    sigma: f64,
    lambda: f64,
) -> Result<MsfValue, MsfError> {
    spectral_rightmost_root_with(df, h, tau, sigma, lambda, &SpectralOptions::default())
}

pub fn spectral_rightmost_root_with(
    df: &DMatrix<f64>,
    h: &DMatrix<f64>,
    tau: f64,
    sigma: f64,
    lambda: f64,
    opts: &SpectralOptions,
) -> Result<MsfValue, MsfError> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(MsfError::DelayRequired(tau));
    }
    let a0 = df - h * sigma;
    let a1 = h * (sigma * lambda);

    let a0c = linalg::to_complex(&a0);
    let a1c = linalg::to_complex(&a1);

    let mut n = opts.initial_nodes.max(2);
    let mut previous: Option<Complex64> = None;
    let root = loop {
        let root = rightmost_at(&a0, &a1, &a0c, &a1c, tau, n, opts)?;
        if let Some(prev) = previous {
            if (root - prev).norm() < opts.stability_tol {
                break root;
            }
        }
        if n >= opts.max_nodes {
            log::warn!(
                "spectral root not stabilized at N = {n} (tau = {tau}, sigma = {sigma}, lambda = {lambda}); using {root}"
            );
            break root;
        }
        previous = Some(root);
        n = (2 * n).min(opts.max_nodes);
    };
    Ok(value(sweep(&a0, &a1, &a0c, &a1c, tau, root, opts)))
}

/// Newton restarts seeded along the line `Re mu = best.re`.
///
/// Roots of a delay equation come in chains spaced about `2 pi / tau` apart
/// in the imaginary direction. Once `|Im mu| tau` is large the collocation
/// grid stops resolving the chain, and its eigenvalues then steer Newton to
/// a root that is not the rightmost one. Any root with real part at least
/// `r` satisfies `|mu| <= |A0| + |A1| exp(-r tau)`, so seeding eight times
/// per spacing up to that bound covers the part of the chain that can
/// matter. Coarser seeding leaves whole roots without a seed in their basin
/// when chains from different modes interlace.
fn sweep(
    a0: &DMatrix<f64>,
    a1: &DMatrix<f64>,
    a0c: &DMatrix<Complex64>,
    a1c: &DMatrix<Complex64>,
    tau: f64,
    best: Complex64,
    opts: &SpectralOptions,
) -> Complex64 {
    let growth = (-best.re * tau).exp();
    let bound = a0.norm() + a1.norm() * growth;
    if !bound.is_finite() {
        return best;
    }
    let spacing = PI / (4.0 * tau);
    let count = ((bound / spacing).ceil() as usize + 1).min(opts.max_sweep_seeds);
    let step = bound / count.max(1) as f64;
    let mut best = best;
    // Real coefficients: roots are closed under conjugation, so the upper
    // half plane suffices.
    for k in 0..=count {
        let seed = Complex64::new(best.re, k as f64 * step);
        if let Some(root) = newton(a0c, a1c, tau, seed, opts) {
            if root.re > best.re + opts.newton_tol * root.norm().max(1.0) {
                best = if root.im < 0.0 { root.conj() } else { root };
            }
        }
    }
    best
}

fn value(root: Complex64) -> MsfValue {
    MsfValue {
        omega: root.re,
        dominant_root: root,
        mode_index: None,
        method: Method::Spectral,
    }
}

fn rightmost_at(
    a0: &DMatrix<f64>,
    a1: &DMatrix<f64>,
    a0c: &DMatrix<Complex64>,
    a1c: &DMatrix<Complex64>,
    tau: f64,
    n: usize,
    opts: &SpectralOptions,
) -> Result<Complex64, MsfError> {
    let m = a0.nrows();
    let generator = collocation_generator(a0, a1, tau, n);
    let estimates = linalg::eigenvalues(&generator)?;
    let take = estimates.len().min((2 * m).max(6));

    let mut best: Option<Complex64> = None;
    for &guess in estimates.iter().take(take) {
        if let Some(root) = newton(a0c, a1c, tau, guess, opts) {
            if best.is_none_or(|b| root.re > b.re) {
                best = Some(root);
            }
        }
    }
    best.ok_or_else(|| MsfError::SpectralNoConvergence {
        estimates: estimates.iter().take(take).copied().collect(),
    })
}

/// Chebyshev points `x_j = cos(pi j / n)` and the differentiation matrix.
pub(crate) fn chebyshev(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let x: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / n as f64).cos()).collect();
    let weight = |j: usize| {
        let c = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j.is_multiple_of(2) {
            c
        } else {
            -c
        }
    };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                let v = weight(i) / weight(j) / (x[i] - x[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        // Negative-sum diagonal keeps derivatives of constants exactly zero.
        d[(i, i)] = -row_sum;
    }
    (x, d)
}

/// Generator matrix on the nodes `theta_j = tau (x_j - 1) / 2`, so that
/// `theta_0 = 0` carries the delay equation and the remaining nodes carry
/// the shift `d/dtheta`.
fn collocation_generator(a0: &DMatrix<f64>, a1: &DMatrix<f64>, tau: f64, n: usize) -> DMatrix<f64> {
    let m = a0.nrows();
    let (_, d) = chebyshev(n);
    let size = m * (n + 1);
    let mut g = DMatrix::zeros(size, size);
    for r in 0..m {
        for c in 0..m {
            g[(r, c)] += a0[(r, c)];
            g[(r, n * m + c)] += a1[(r, c)];
        }
    }
    let scale = 2.0 / tau;
    for j in 1..=n {
        for k in 0..=n {
            let v = scale * d[(j, k)];
            if v != 0.0 {
                for r in 0..m {
                    g[(j * m + r, k * m + r)] = v;
                }
            }
        }
    }
    g
}

fn characteristic_matrices(
    a0: &DMatrix<Complex64>,
    a1: &DMatrix<Complex64>,
    tau: f64,
    mu: Complex64,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let m = a0.nrows();
    let e = (-mu * tau).exp();
    let id = DMatrix::<Complex64>::identity(m, m);
    let mat = &id * mu - a0 - a1 * e;
    let deriv = id + a1 * (e * tau);
    (mat, deriv)
}

fn newton(
    a0: &DMatrix<Complex64>,
    a1: &DMatrix<Complex64>,
    tau: f64,
    start: Complex64,
    opts: &SpectralOptions,
) -> Option<Complex64> {
    let mut mu = start;
    for _ in 0..opts.newton_max_steps {
        let (mat, deriv) = characteristic_matrices(a0, a1, tau, mu);
        let Some(sol) = mat.lu().solve(&deriv) else {
            // M(mu) is exactly singular: mu is a root.
            return Some(mu);
        };
        let trace = sol.trace();
        if trace.norm() == 0.0 || !trace.re.is_finite() || !trace.im.is_finite() {
            return None;
        }
        let step = 1.0 / trace;
        mu -= step;
        if !mu.re.is_finite() || !mu.im.is_finite() {
            return None;
        }
        if step.norm() < opts.newton_tol * mu.norm().max(1.0) {
            return Some(mu);
        }
    }
    None
}

/// Smallest singular value of `M(mu)`, relative to `max(1, |mu|)`.
pub fn characteristic_residual(
    df: &DMatrix<f64>,
    h: &DMatrix<f64>,
    tau: f64,
    sigma: f64,
    lambda: f64,
    mu: Complex64,
) -> f64 {
    let a0 = linalg::to_complex(&(df - h * sigma));
    let a1 = linalg::to_complex(&(h * (sigma * lambda)));
    let (mat, _) = characteristic_matrices(&a0, &a1, tau, mu);
    let sv = mat.singular_values();
    sv.iter().copied().fold(f64::INFINITY, f64::min) / mu.norm().max(1.0)
}
