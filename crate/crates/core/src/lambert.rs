//! Principal branch of the Lambert W function on the complex plane.
//!
//! `W0(z)` is the solution of `w * exp(w) = z` that is analytic at the origin,
//! real on `[-1/e, inf)`, and takes values continuous from above on the
//! branch cut `(-inf, -1/e)`.
//!
//! The evaluation is a Halley iteration on `w e^w - z`. Starting points come
//! from the branch-point series near `-1/e`, a Padé approximant around the
//! origin, and the logarithmic asymptote `log z - log log z` elsewhere.
//! [`lambert_w0_log`] accepts `log z` instead of `z` so that arguments far
//! beyond the `f64` range (which appear in the characteristic-root formula
//! when `sigma * tau` is large) can still be handled.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use thiserror::Error;

/// Upper bound on Halley/Newton iterations before giving up.
pub const MAX_ITERATIONS: usize = 100;

const STEP_TOL: f64 = 1e-14;
const INV_E: f64 = 1.0 / E;

/// Past this real part of `log z` the argument itself is not formed.
const LOG_DOMAIN_THRESHOLD: f64 = 600.0;

/// A converged principal-branch value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WResult {
    pub value: Complex64,
    pub iterations: usize,
    /// `|w - z e^-w|` for direct evaluation; `|w + log w - log z|` when the
    /// value came from the logarithmic form.
    pub residual: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LambertError {
    #[error("Lambert W argument is not finite: {0}")]
    NonFinite(Complex64),
    #[error("Lambert W did not converge for z = {z} after {iterations} iterations (last iterate {last}, residual {residual:e})")]
    NoConvergence {
        z: Complex64,
        last: Complex64,
        residual: f64,
        iterations: usize,
    },
}

/// Principal branch `W0(z)`.
pub fn lambert_w0(z: Complex64) -> Result<WResult, LambertError> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(LambertError::NonFinite(z));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Ok(WResult {
            value: Complex64::new(0.0, 0.0),
            iterations: 0,
            residual: 0.0,
        });
    }
    // Points on the cut take the value from the upper side.
    let z = if z.im == 0.0 && z.re < -INV_E {
        Complex64::new(z.re, 0.0)
    } else {
        z
    };

    let mut w = initial_guess(z);
    let mut residual = f64::INFINITY;

    // Halley on g(w) = w - z e^{-w}, which is (w e^w - z) scaled by e^{-w}
    // so that large |z| cannot overflow the intermediate products.
    for it in 1..=MAX_ITERATIONS {
        let ze = z * (-w).exp();
        let g = w - ze;
        residual = g.norm();
        // Rounding floor of the residual itself; near the branch point the
        // step criterion alone cannot be met because the derivative vanishes.
        if residual <= 4.0 * f64::EPSILON * ze.norm().max(w.norm()) {
            return Ok(finish(w, z, it - 1));
        }
        let wp1 = w + 1.0;
        let denom = wp1 - (w + 2.0) * g / (2.0 * wp1);
        if denom.norm() == 0.0 || !denom.re.is_finite() || !denom.im.is_finite() {
            break;
        }
        let step = g / denom;
        w -= step;
        if step.norm() < STEP_TOL * (1.0 + w.norm()) {
            return Ok(finish(w, z, it));
        }
    }
    Err(LambertError::NoConvergence {
        z,
        last: w,
        residual,
        iterations: MAX_ITERATIONS,
    })
}

/// Principal branch evaluated from `log z`.
///
/// Only the class of `log_z` modulo `2 pi i` matters. For moderate arguments
/// this defers to [`lambert_w0`]; beyond that it solves `w + log w = log z`
/// by Newton's method, which is the same equation on the principal branch
/// when `|z|` is large.
pub fn lambert_w0_log(log_z: Complex64) -> Result<WResult, LambertError> {
    if !log_z.re.is_finite() || !log_z.im.is_finite() {
        if log_z.re == f64::NEG_INFINITY {
            return lambert_w0(Complex64::new(0.0, 0.0));
        }
        return Err(LambertError::NonFinite(log_z));
    }
    let l = Complex64::new(log_z.re, wrap_angle(log_z.im));
    if l.re < LOG_DOMAIN_THRESHOLD {
        return lambert_w0(l.exp());
    }

    let ll = l.ln();
    let mut w = l - ll + ll / l;
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let g = w + w.ln() - l;
        residual = g.norm();
        let step = g / (1.0 + 1.0 / w);
        w -= step;
        if step.norm() < STEP_TOL * (1.0 + w.norm()) {
            let residual = (w + w.ln() - l).norm();
            return Ok(WResult {
                value: w,
                iterations: it,
                residual,
            });
        }
    }
    Err(LambertError::NoConvergence {
        z: l,
        last: w,
        residual,
        iterations: MAX_ITERATIONS,
    })
}

fn finish(w: Complex64, z: Complex64, iterations: usize) -> WResult {
    WResult {
        value: w,
        iterations,
        residual: (w - z * (-w).exp()).norm(),
    }
}

/// Maps an angle into `(-pi, pi]`.
fn wrap_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

fn initial_guess(z: Complex64) -> Complex64 {
    if (z + INV_E).norm() < 0.3 {
        branch_point_series(z)
    } else if z.re > -1.0 && z.re < 1.5 && z.im.abs() < 1.0 && -2.5 * z.im.abs() - 0.2 < z.re {
        pade_near_origin(z)
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        if l1.norm() > 1.5 {
            l1 - l2 + l2 / l1
        } else {
            l1 - l2
        }
    }
}

// W0 = -1 + p - p^2/3 + 11/72 p^3, p = sqrt(2(ez + 1)).
fn branch_point_series(z: Complex64) -> Complex64 {
    let p = (2.0 * (E * z + 1.0)).sqrt();
    -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)))
}

// [1/2] Padé approximant of W0(z)/z at the origin.
fn pade_near_origin(z: Complex64) -> Complex64 {
    z * (1.0 + 4.0 / 3.0 * z) / (1.0 + z * (7.0 / 3.0 + 5.0 / 6.0 * z))
}
