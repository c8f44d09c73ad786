//! Run configuration shared by the command line and TOML config files.
//!
//! Every flag has a home in one section of [`RunConfig`]. A config file is
//! read into the same structure and command-line values are laid over it,
//! so the file can supply anything and the command line always wins. The
//! fully resolved configuration is written back out as the config echo.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub system: SystemSection,
    pub point: PointSection,
    pub scan: ScanSection,
    pub network: NetworkSection,
    pub simulate: SimulateSection,
    pub output: OutputSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub name: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub fixed_point: Option<usize>,
    /// `identity`, `diag:a,b,c` or `rows:a,b;c,d`.
    pub h: Option<String>,
    /// Custom systems: `DF(s)` as `a,b;c,d`.
    pub jacobian: Option<String>,
    /// Custom systems: `s` as `x,y,...`.
    pub point: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointSection {
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    /// `auto`, `lambert` or `spectral`.
    pub method: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    /// `min:max:count`.
    pub tau: Option<String>,
    pub sigma: Option<String>,
    /// Slices: `tau=value` or `sigma=value`.
    pub fixed: Option<String>,
    /// Slices: range of the free parameter.
    pub x: Option<String>,
    pub lambda_count: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub graph: Option<PathBuf>,
    pub ring: Option<usize>,
    pub complete: Option<usize>,
    /// Read the graph file as `G` itself instead of an adjacency matrix.
    pub direct: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub variational: Option<bool>,
    pub seed: Option<u64>,
    pub magnitude: Option<f64>,
    pub delay_steps: Option<usize>,
    pub step: Option<f64>,
    pub t_max: Option<f64>,
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Path prefix; outputs get `.csv`, `.json` and `.config.toml` appended.
    pub out: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub workers: Option<usize>,
}

fn pick<T>(top: Option<T>, base: Option<T>) -> Option<T> {
    top.or(base)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("--config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("--config {}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::numerical(format!("config echo: {e}")))
    }

    /// `top` wins wherever it sets a value.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let mut params = self.system.params;
        params.extend(top.system.params);
        RunConfig {
            command: pick(top.command, self.command),
            system: SystemSection {
                name: pick(top.system.name, self.system.name),
                params,
                fixed_point: pick(top.system.fixed_point, self.system.fixed_point),
                h: pick(top.system.h, self.system.h),
                jacobian: pick(top.system.jacobian, self.system.jacobian),
                point: pick(top.system.point, self.system.point),
            },
            point: PointSection {
                tau: pick(top.point.tau, self.point.tau),
                sigma: pick(top.point.sigma, self.point.sigma),
                lambda: pick(top.point.lambda, self.point.lambda),
                method: pick(top.point.method, self.point.method),
            },
            scan: ScanSection {
                tau: pick(top.scan.tau, self.scan.tau),
                sigma: pick(top.scan.sigma, self.scan.sigma),
                fixed: pick(top.scan.fixed, self.scan.fixed),
                x: pick(top.scan.x, self.scan.x),
                lambda_count: pick(top.scan.lambda_count, self.scan.lambda_count),
            },
            network: {
                // Graph sources are alternatives: a source given on the
                // command line replaces whichever one the file named.
                let top_has = top.network.graph.is_some()
                    || top.network.ring.is_some()
                    || top.network.complete.is_some();
                let src = if top_has { &top.network } else { &self.network };
                NetworkSection {
                    graph: src.graph.clone(),
                    ring: src.ring,
                    complete: src.complete,
                    direct: pick(top.network.direct, self.network.direct),
                }
            },
            simulate: SimulateSection {
                variational: pick(top.simulate.variational, self.simulate.variational),
                seed: pick(top.simulate.seed, self.simulate.seed),
                magnitude: pick(top.simulate.magnitude, self.simulate.magnitude),
                delay_steps: pick(top.simulate.delay_steps, self.simulate.delay_steps),
                step: pick(top.simulate.step, self.simulate.step),
                t_max: pick(top.simulate.t_max, self.simulate.t_max),
                record_every: pick(top.simulate.record_every, self.simulate.record_every),
            },
            output: OutputSection {
                out: pick(top.output.out, self.output.out),
            },
            run: RunSection {
                workers: pick(top.run.workers, self.run.workers),
            },
        }
    }
}
