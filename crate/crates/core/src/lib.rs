//! Master stability analysis of amplitude death in delay-coupled networks.
//!
//! The crate evaluates the master stability function `Omega(tau, sigma,
//! lambda)` of a homogeneous fixed point, scans it over parameter grids to
//! find amplitude death islands and their lambda-stability altitudes,
//! decides stability for concrete coupling networks, and cross-checks all of
//! that by direct simulation of the delay equations.

pub mod dde;
pub mod error;
pub mod lambert;
pub mod linalg;
pub mod models;
pub mod msf;
pub mod network;
pub mod report;
pub mod scan;

pub use dde::{
    classify, simulate_network, simulate_variational, Perturbation, SimConfig, SimResult,
    SimSettings, Verdict,
};
pub use error::{Error, Result};
pub use lambert::{lambert_w0, lambert_w0_log, WResult};
pub use models::{
    build_system, find_fixed_points, FixedPoint, FixedPoints, SystemKind, SystemModel,
};
pub use msf::{eval_msf, scalar_root, Method, MsfProblem, MsfQuery, MsfValue};
pub use network::{
    build_coupling, check_amplitude_death, coupling_from_matrix, CouplingMatrix, NetworkVerdict,
};
pub use scan::{
    extract_islands, lambda_interval, scan_adi, scan_msi, scan_slice, Axis, GridKind, Island,
    LambdaInterval, Param, ScanGrid, ScanOptions,
};

/// Matrix and complex types used throughout the public API.
pub use nalgebra::DMatrix;
pub use num_complex::Complex64;
