use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use msisland_core::dde::{self, Perturbation, SimConfig, DEFAULT_PERTURBATION};
use msisland_core::models::{
    build_system, find_fixed_points, FixedPoint, Linearization, SystemModel,
};
use msisland_core::msf::{MsfProblem, MsfQuery};
use msisland_core::network::{self, CouplingMatrix};
use msisland_core::report::{self, ScanSummary, SimReport};
use msisland_core::scan::{self, Axis, Param, ScanGrid, ScanOptions};
use msisland_core::Error;
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::parse;
use crate::CliError;

const ADI_RESOLUTION: usize = 400;
const MSI_RESOLUTION: usize = 200;
const SLICE_RESOLUTION: usize = 400;

pub fn execute(mut cfg: RunConfig) -> Result<(), CliError> {
    let command = cfg
        .command
        .clone()
        .ok_or_else(|| CliError::validation("command: the config file names no command"))?;
    match command.as_str() {
        "fixed-points" => fixed_points(&mut cfg),
        "msf-eval" => msf_eval(&mut cfg),
        "scan-adi" => scan_grid(&mut cfg, false),
        "scan-msi" => scan_grid(&mut cfg, true),
        "slice" => slice(&mut cfg),
        "network-check" => network_check(&mut cfg),
        "simulate" => simulate(&mut cfg),
        other => Err(CliError::validation(format!(
            "command: unknown command {other:?}"
        ))),
    }
}

fn core<T, E: Into<Error>>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from(e.into()))
}

fn flag<T, E: std::fmt::Display>(name: &str, r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::validation(format!("{name}: {e}")))
}

fn required<T: Copy>(name: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::validation(format!("{name} is required")))
}

struct Setup {
    model: SystemModel,
    points: Vec<FixedPoint>,
    index: usize,
    h: DMatrix<f64>,
}

impl Setup {
    fn fp(&self) -> &FixedPoint {
        &self.points[self.index]
    }

    fn problem(&self) -> Result<MsfProblem, CliError> {
        core(MsfProblem::from_fixed_point(self.fp(), self.h.clone()))
    }
}

/// Builds the model, picks the fixed point and parses `H`, writing the
/// resolved choices back into the config.
fn setup(cfg: &mut RunConfig) -> Result<Setup, CliError> {
    let name = cfg
        .system
        .name
        .clone()
        .ok_or_else(|| CliError::validation("--system is required"))?;
    let custom = match &cfg.system.jacobian {
        Some(text) => {
            let jacobian = flag("--jacobian", parse::matrix(text))?;
            let point = match &cfg.system.point {
                Some(p) => flag("--point", parse::vector(p))?,
                None => vec![0.0; jacobian.nrows()],
            };
            Some(Linearization { point, jacobian })
        }
        None => None,
    };
    let params: Vec<(String, f64)> = cfg.system.params.clone().into_iter().collect();
    let model = flag("--system/--param", build_system(&name, &params, custom))?;
    let fps = flag("--system", find_fixed_points(&model))?;
    let index = cfg
        .system
        .fixed_point
        .unwrap_or_else(|| model.default_fixed_point_index());
    flag("--fixed-point", fps.select(index))?;
    let h_text = cfg.system.h.clone().unwrap_or_else(|| "identity".into());
    let h = flag("--h", parse::coupling_profile(&h_text, model.dim()))?;

    cfg.system.name = Some(model.name().to_string());
    cfg.system.params = model.params().clone();
    cfg.system.fixed_point = Some(index);
    cfg.system.h = Some(h_text);
    Ok(Setup {
        model,
        points: fps.points,
        index,
        h,
    })
}

struct Outputs {
    prefix: Option<PathBuf>,
}

impl Outputs {
    fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let prefix = cfg.output.out.as_ref().map(PathBuf::from);
        if let Some(p) = &prefix {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| {
                    CliError::validation(format!("--out: cannot create {}: {e}", dir.display()))
                })?;
            }
        }
        Ok(Self { prefix })
    }

    fn path(&self, ext: &str) -> Option<PathBuf> {
        self.prefix.as_ref().map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        })
    }

    fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
        File::create(path).map(BufWriter::new).map_err(|e| {
            CliError::validation(format!("--out: cannot write {}: {e}", path.display()))
        })
    }

    /// JSON document to `PREFIX.json`, or stdout without a prefix.
    fn json<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        match self.path(".json") {
            Some(p) => core(report::write_json(value, Self::create(&p)?)),
            None => core(report::write_json(value, std::io::stdout().lock())),
        }
    }

    fn echo(&self, cfg: &RunConfig) -> Result<(), CliError> {
        if let Some(p) = self.path(".config.toml") {
            let mut w = Self::create(&p)?;
            w.write_all(cfg.to_toml()?.as_bytes())
                .map_err(|e| CliError::numerical(format!("writing {}: {e}", p.display())))?;
        }
        Ok(())
    }

    fn grid(&self, grid: &ScanGrid) -> Result<(), CliError> {
        if let Some(p) = self.path(".csv") {
            core(report::write_grid_csv(grid, Self::create(&p)?))?;
        }
        Ok(())
    }
}

fn complex_pair(z: nalgebra::Complex<f64>) -> [f64; 2] {
    [z.re, z.im]
}

fn fixed_points(cfg: &mut RunConfig) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let out = Outputs::new(cfg)?;
    for (i, fp) in s.points.iter().enumerate() {
        let marker = if i == s.index { "*" } else { " " };
        let coords: Vec<String> = fp.state.iter().map(|x| format!("{x:.6}")).collect();
        let eigs: Vec<String> = fp
            .eigenvalues
            .iter()
            .map(|z| {
                if z.im.abs() > 0.0 {
                    format!("{:.4}{:+.4}i", z.re, z.im)
                } else {
                    format!("{:.4}", z.re)
                }
            })
            .collect();
        eprintln!(
            "{marker}[{i}] s = ({})  eigenvalues: {}",
            coords.join(", "),
            eigs.join(", ")
        );
    }
    let doc = json!({
        "system": s.model.name(),
        "params": s.model.params(),
        "selected": s.index,
        "fixed_points": s.points.iter().enumerate().map(|(i, fp)| json!({
            "index": i,
            "state": fp.state,
            "eigenvalues": fp.eigenvalues.iter().map(|&z| complex_pair(z)).collect::<Vec<_>>(),
            "max_real_eigenvalue": fp.max_real_eigenvalue(),
        })).collect::<Vec<_>>(),
    });
    out.json(&doc)?;
    out.echo(cfg)
}

fn msf_eval(cfg: &mut RunConfig) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let q = MsfQuery::new(
        required("--tau", cfg.point.tau)?,
        required("--sigma", cfg.point.sigma)?,
        cfg.point.lambda.unwrap_or(1.0),
    );
    flag("--tau/--sigma/--lambda", q.validate())?;
    cfg.point.lambda = Some(q.lambda);
    let problem = s.problem()?;
    let method = cfg.point.method.clone().unwrap_or_else(|| "auto".into());
    let v = match method.as_str() {
        "auto" => core(problem.eval(q))?,
        "lambert" => flag("--method", problem.eval_lambert(q))?,
        "spectral" => core(problem.eval_spectral(q))?,
        other => {
            return Err(CliError::validation(format!(
                "--method: unknown method {other:?}"
            )))
        }
    };
    cfg.point.method = Some(method);
    let out = Outputs::new(cfg)?;
    out.json(&json!({
        "system": s.model.name(),
        "fixed_point": s.fp().state,
        "tau": q.tau,
        "sigma": q.sigma,
        "lambda": q.lambda,
        "omega": v.omega,
        "dominant_root": complex_pair(v.dominant_root),
        "mode_index": v.mode_index,
        "method": v.method,
    }))?;
    out.echo(cfg)
}

fn scan_options(cfg: &RunConfig) -> Result<ScanOptions, CliError> {
    match cfg.run.workers {
        Some(0) => Err(CliError::validation("--workers must be at least 1")),
        Some(n) => Ok(ScanOptions::with_workers(n)),
        None => Ok(ScanOptions::default()),
    }
}

fn axis_or_default(
    flag_name: &str,
    slot: &mut Option<String>,
    param: Param,
    default_max: Option<f64>,
    count: usize,
) -> Result<Axis, CliError> {
    let axis = match slot.as_deref() {
        Some(text) => flag(flag_name, parse::range(param, text))?,
        None => {
            let max = default_max.ok_or_else(|| {
                CliError::validation(format!("{flag_name} is required for custom systems"))
            })?;
            flag(flag_name, Axis::new(param, 0.0, max, count))?
        }
    };
    *slot = Some(format!("{}:{}:{}", axis.min, axis.max, axis.count));
    Ok(axis)
}

fn scan_grid(cfg: &mut RunConfig, msi: bool) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let window = s.model.kind().default_window();
    let res = if msi { MSI_RESOLUTION } else { ADI_RESOLUTION };
    let tau = axis_or_default(
        "--tau",
        &mut cfg.scan.tau,
        Param::Tau,
        window.map(|w| w.0),
        res,
    )?;
    let sigma = axis_or_default(
        "--sigma",
        &mut cfg.scan.sigma,
        Param::Sigma,
        window.map(|w| w.1),
        res,
    )?;
    let opts = scan_options(cfg)?;
    let problem = s.problem()?;
    let grid = if msi {
        core(scan::scan_msi(&problem, tau, sigma, &opts))?
    } else {
        core(scan::scan_adi(&problem, tau, sigma, &opts))?
    };
    let islands = core(scan::extract_islands(&grid))?;
    let summary = ScanSummary::new(
        &grid,
        &islands,
        s.model.name(),
        s.model.params().clone(),
        s.fp().state.clone(),
    );
    eprintln!(
        "{} islands on a {}x{} grid ({} sigma-run violations)",
        islands.len(),
        grid.nx(),
        grid.ny(),
        summary.sigma_run_violations
    );
    let out = Outputs::new(cfg)?;
    out.grid(&grid)?;
    out.json(&summary)?;
    out.echo(cfg)
}

fn slice(cfg: &mut RunConfig) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let fixed_text =
        cfg.scan.fixed.clone().ok_or_else(|| {
            CliError::validation("--fixed is required (tau=VALUE or sigma=VALUE)")
        })?;
    let (name, value) = flag("--fixed", parse::assignment(&fixed_text))?;
    let fixed_param = match Param::parse(&name) {
        Some(p @ (Param::Tau | Param::Sigma)) => p,
        _ => {
            return Err(CliError::validation(format!(
                "--fixed: expected tau or sigma, got {name:?}"
            )))
        }
    };
    let (x_param, default_max) = match fixed_param {
        Param::Tau => (Param::Sigma, s.model.kind().default_window().map(|w| w.1)),
        _ => (Param::Tau, s.model.kind().default_window().map(|w| w.0)),
    };
    let x = axis_or_default(
        "--x",
        &mut cfg.scan.x,
        x_param,
        default_max,
        SLICE_RESOLUTION,
    )?;
    let lambda_count = cfg.scan.lambda_count.unwrap_or(SLICE_RESOLUTION);
    cfg.scan.lambda_count = Some(lambda_count);
    let opts = scan_options(cfg)?;
    let problem = s.problem()?;
    let grid = core(scan::scan_slice(
        &problem,
        (fixed_param, value),
        x,
        lambda_count,
        &opts,
    ))?;
    let summary = ScanSummary::new(
        &grid,
        &[],
        s.model.name(),
        s.model.params().clone(),
        s.fp().state.clone(),
    );
    eprintln!("{} active regions", summary.active_regions.unwrap_or(0));
    let out = Outputs::new(cfg)?;
    out.grid(&grid)?;
    out.json(&summary)?;
    out.echo(cfg)
}

fn coupling(
    cfg: &mut RunConfig,
    default_complete: Option<usize>,
) -> Result<CouplingMatrix, CliError> {
    let n = &cfg.network;
    let sources = n.graph.is_some() as u8 + n.ring.is_some() as u8 + n.complete.is_some() as u8;
    if sources > 1 {
        return Err(CliError::validation(
            "--graph/--ring/--complete: give only one graph source",
        ));
    }
    let direct = n.direct.unwrap_or(false);
    let adjacency = if let Some(path) = &n.graph {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("--graph {}: {e}", path.display())))?;
        flag("--graph", network::parse_graph(&text))?
    } else if let Some(k) = n.ring {
        if k < 2 {
            return Err(CliError::validation("--ring needs at least 2 nodes"));
        }
        network::ring_adjacency(k)
    } else if let Some(k) = n.complete.or(default_complete) {
        if k < 2 {
            return Err(CliError::validation("--complete needs at least 2 nodes"));
        }
        cfg.network.complete = Some(k);
        network::complete_adjacency(k)
    } else {
        return Err(CliError::validation(
            "--graph, --ring or --complete is required",
        ));
    };
    if direct {
        flag(
            "--graph (direct G)",
            network::coupling_from_matrix(&adjacency),
        )
    } else {
        flag("--graph", network::build_coupling(&adjacency))
    }
}

fn network_check(cfg: &mut RunConfig) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let g = coupling(cfg, None)?;
    let tau = required("--tau", cfg.point.tau)?;
    let sigma = required("--sigma", cfg.point.sigma)?;
    flag("--tau/--sigma", MsfQuery::new(tau, sigma, 1.0).validate())?;
    let problem = s.problem()?;
    let verdict = core(network::check_amplitude_death(&g, &problem, tau, sigma))?;
    eprintln!(
        "{} (worst lambda = {}, Omega = {})",
        if verdict.stable { "stable" } else { "unstable" },
        verdict.worst.lambda,
        verdict.worst.omega
    );
    let out = Outputs::new(cfg)?;
    out.json(&json!({
        "system": s.model.name(),
        "fixed_point": s.fp().state,
        "stable": verdict.stable,
        "tau": verdict.tau,
        "sigma": verdict.sigma,
        "sigma_effective": verdict.sigma_effective,
        "row_sum": g.row_sum,
        "eigenvalues": g.eigenvalues,
        "unit_multiplicity": verdict.unit_multiplicity,
        "per_eigenvalue": verdict.per_eigenvalue,
        "worst": verdict.worst,
    }))?;
    out.echo(cfg)
}

fn simulate(cfg: &mut RunConfig) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let g = coupling(cfg, Some(2))?;
    let tau = required("--tau", cfg.point.tau)?;
    let sigma = required("--sigma", cfg.point.sigma)?;
    let seed = cfg.simulate.seed.unwrap_or(0);
    let magnitude = cfg.simulate.magnitude.unwrap_or(DEFAULT_PERTURBATION);
    let variational = cfg.simulate.variational.unwrap_or(false);

    let mut sim = flag(
        "--tau/--sigma",
        SimConfig::new(
            s.model.clone(),
            s.fp().clone(),
            g,
            s.h.clone(),
            tau,
            sigma,
            seed,
        ),
    )?;
    sim = flag(
        "--magnitude",
        sim.with_perturbation(Perturbation::Random { magnitude, seed }),
    )?;
    if cfg.simulate.delay_steps.is_some() && cfg.simulate.step.is_some() {
        return Err(CliError::validation("--delay-steps/--step: give only one"));
    }
    if let Some(k) = cfg.simulate.delay_steps {
        sim = flag("--delay-steps", sim.with_delay_steps(k))?;
    }
    if let Some(h) = cfg.simulate.step {
        sim = flag("--step", sim.with_step(h))?;
    }
    if let Some(t) = cfg.simulate.t_max {
        sim = flag("--t-max", sim.with_t_max(t))?;
    }
    if let Some(every) = cfg.simulate.record_every {
        if every == 0 {
            return Err(CliError::validation("--record-every must be at least 1"));
        }
        sim = sim.with_record_every(every);
    }

    let result = if variational {
        core(dde::simulate_variational(&sim))?
    } else {
        core(dde::simulate_network(&sim))?
    };
    // Echo the resolved numerical settings so the run is reproducible.
    cfg.simulate.seed = Some(seed);
    cfg.simulate.magnitude = Some(magnitude);
    cfg.simulate.variational = Some(variational);
    if cfg.simulate.step.is_none() {
        cfg.simulate.delay_steps = Some(sim.settings.delay_steps).filter(|&k| k > 0);
    }
    cfg.simulate.t_max = Some(sim.settings.t_max);

    eprintln!(
        "{:?}{}",
        result.verdict,
        result
            .growth_rate
            .map(|g| format!(", growth rate {g}"))
            .unwrap_or_default()
    );
    let out = Outputs::new(cfg)?;
    if let Some(p) = out.path(".csv") {
        core(report::write_time_series_csv(&result, Outputs::create(&p)?))?;
    }
    let rep = SimReport::new(&result, &sim.settings, variational);
    out.json(&json!({
        "system": s.model.name(),
        "fixed_point": s.fp().state,
        "nodes": sim.coupling.n,
        "eigenvalues": sim.coupling.eigenvalues,
        "result": rep,
    }))?;
    out.echo(cfg)
}
