//! Direct simulation of delay-coupled networks.
//!
//! Integrates
//!
//! ```text
//! x_i'(t) = F(x_i(t)) + sigma sum_j g_ij H (x_j(t - tau) - x_i(t))
//! ```
//!
//! or its linearization about the homogeneous fixed point, with classical
//! fourth-order Runge-Kutta at a fixed step `h = tau / K`. Every stage of a
//! step reads the delayed state from the same stage of the step `K` steps
//! earlier, which is exactly the method of steps applied to the chain of
//! delay intervals. No interpolation is involved.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{FixedPoint, SystemModel};
use crate::network::CouplingMatrix;

pub const DECAY_THRESHOLD: f64 = 1e-8;
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;
/// Default perturbation magnitude for random initial histories.
pub const DEFAULT_PERTURBATION: f64 = 1e-3;
pub const MIN_DELAY_STEPS: usize = 10;
/// Fraction of the run checked for decay.
const FINAL_FRACTION: f64 = 0.1;
/// Windows over the final half used by the growth-rate fit.
const GROWTH_WINDOWS: usize = 20;
/// Stored samples per run when no explicit stride is given.
const DEFAULT_SAMPLES: usize = 10_000;
/// The linear state is renormalized once its size leaves this band.
const RESCALE_HIGH: f64 = 1e100;
const RESCALE_LOW: f64 = 1e-100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("state became non-finite at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// One deviation vector per node.
    Explicit(Vec<Vec<f64>>),
    /// Components uniform in `[-magnitude, magnitude]`.
    Random { magnitude: f64, seed: u64 },
}

impl Perturbation {
    pub fn vectors(&self, nodes: usize, dim: usize) -> Result<Vec<Vec<f64>>, SimError> {
        match self {
            Perturbation::Explicit(v) => {
                if v.len() != nodes || v.iter().any(|x| x.len() != dim) {
                    return Err(SimError::InvalidConfig(format!(
                        "explicit perturbation must be {nodes} vectors of length {dim}"
                    )));
                }
                if v.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(SimError::InvalidConfig(
                        "perturbation must be finite".into(),
                    ));
                }
                Ok(v.clone())
            }
            Perturbation::Random { magnitude, seed } => {
                if !magnitude.is_finite() || *magnitude <= 0.0 {
                    return Err(SimError::InvalidConfig(
                        "perturbation magnitude must be > 0".into(),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..nodes)
                    .map(|_| {
                        (0..dim)
                            .map(|_| rng.random_range(-*magnitude..=*magnitude))
                            .collect()
                    })
                    .collect())
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Perturbation::Random { seed, .. } => Some(*seed),
            Perturbation::Explicit(_) => None,
        }
    }
}

/// Steps per delay: `tau / 100` with the step capped at `1e-3`.
pub fn default_delay_steps(tau: f64) -> usize {
    100usize.max((tau / 1e-3).ceil() as usize)
}

/// Step used when `tau = 0` (instantaneous coupling).
pub const ZERO_DELAY_STEP: f64 = 1e-3;

pub fn default_t_max(tau: f64) -> f64 {
    (50.0 * tau).max(500.0)
}

/// Numerical settings of a run, echoed in outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub tau: f64,
    pub sigma: f64,
    pub step: f64,
    /// `tau / step`; zero for instantaneous coupling.
    pub delay_steps: usize,
    pub t_max: f64,
    pub perturbation: Perturbation,
    /// Keep every `record_every`-th sample of `d(t)`.
    pub record_every: usize,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: SystemModel,
    pub fixed_point: FixedPoint,
    pub coupling: CouplingMatrix,
    pub h: DMatrix<f64>,
    pub settings: SimSettings,
}

impl SimConfig {
    /// Config with the default step, horizon and a random `1e-3`
    /// perturbation drawn from `seed`.
    pub fn new(
        model: SystemModel,
        fixed_point: FixedPoint,
        coupling: CouplingMatrix,
        h: DMatrix<f64>,
        tau: f64,
        sigma: f64,
        seed: u64,
    ) -> Result<Self, SimError> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(SimError::InvalidConfig(format!(
                "tau must be finite and >= 0, got {tau}"
            )));
        }
        let (step, delay_steps) = if tau == 0.0 {
            (ZERO_DELAY_STEP, 0)
        } else {
            let k = default_delay_steps(tau);
            (tau / k as f64, k)
        };
        let cfg = Self {
            model,
            fixed_point,
            coupling,
            h,
            settings: SimSettings {
                tau,
                sigma,
                step,
                delay_steps,
                t_max: default_t_max(tau),
                perturbation: Perturbation::Random {
                    magnitude: DEFAULT_PERTURBATION,
                    seed,
                },
                record_every: 0,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Uses `K` steps per delay interval.
    pub fn with_delay_steps(mut self, k: usize) -> Result<Self, SimError> {
        if self.settings.tau == 0.0 {
            return Err(SimError::InvalidConfig("delay steps need tau > 0".into()));
        }
        self.settings.delay_steps = k;
        self.settings.step = self.settings.tau / k as f64;
        self.validate()?;
        Ok(self)
    }

    /// Sets the step directly; it must divide `tau` exactly.
    pub fn with_step(mut self, step: f64) -> Result<Self, SimError> {
        if !step.is_finite() || step <= 0.0 {
            return Err(SimError::InvalidConfig(format!(
                "step must be > 0, got {step}"
            )));
        }
        if self.settings.tau > 0.0 {
            let k = (self.settings.tau / step).round();
            if ((self.settings.tau / step) - k).abs() > 1e-9 * k.max(1.0) {
                return Err(SimError::InvalidConfig(format!(
                    "step {step} does not divide tau = {} exactly",
                    self.settings.tau
                )));
            }
            return self.with_delay_steps(k as usize);
        }
        self.settings.step = step;
        self.validate()?;
        Ok(self)
    }

    pub fn with_t_max(mut self, t_max: f64) -> Result<Self, SimError> {
        self.settings.t_max = t_max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_perturbation(mut self, p: Perturbation) -> Result<Self, SimError> {
        p.vectors(self.coupling.n, self.model.dim())?;
        self.settings.perturbation = p;
        Ok(self)
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.settings.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let s = &self.settings;
        let m = self.model.dim();
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.fixed_point.state.len() != m || self.h.nrows() != m || self.h.ncols() != m {
            return bad(format!(
                "fixed point and H must match the system dimension {m}"
            ));
        }
        if !s.sigma.is_finite() || s.sigma < 0.0 {
            return bad(format!("sigma must be finite and >= 0, got {}", s.sigma));
        }
        if !s.step.is_finite() || s.step <= 0.0 {
            return bad(format!("step must be > 0, got {}", s.step));
        }
        if s.tau > 0.0 {
            if s.delay_steps < MIN_DELAY_STEPS {
                return bad(format!(
                    "tau / step = {} must be at least {MIN_DELAY_STEPS}",
                    s.delay_steps
                ));
            }
            if (s.delay_steps as f64 * s.step - s.tau).abs() > 1e-12 * s.tau {
                return bad("step must divide tau exactly".into());
            }
        }
        if !s.t_max.is_finite() || s.t_max < 20.0 * s.tau || s.t_max <= 0.0 {
            return bad(format!(
                "t_max = {} must be positive and at least 20 tau",
                s.t_max
            ));
        }
        Ok(())
    }

    fn total_steps(&self) -> usize {
        (self.settings.t_max / self.settings.step).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Decayed,
    Persistent,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub d: f64,
    /// `ln d`, finite even where `d` itself under- or overflows.
    pub log_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub samples: Vec<Sample>,
    pub verdict: Verdict,
    /// Variational runs only.
    pub growth_rate: Option<f64>,
    pub steps: usize,
    pub stopped_early: bool,
    pub final_window_max: f64,
}

/// `decayed` if the final window stays below `1e-8`, `diverged` if any value
/// exceeds `1e6`, `persistent` otherwise.
pub fn classify(d: &[f64]) -> Verdict {
    assert!(!d.is_empty(), "classify needs a nonempty series");
    if d.iter().any(|&x| x > DIVERGENCE_THRESHOLD || x.is_nan()) {
        return Verdict::Diverged;
    }
    let start = final_window_start(d.len());
    if d[start..].iter().all(|&x| x < DECAY_THRESHOLD) {
        Verdict::Decayed
    } else {
        Verdict::Persistent
    }
}

fn final_window_start(len: usize) -> usize {
    let w = ((len as f64 * FINAL_FRACTION).ceil() as usize).clamp(1, len);
    len - w
}

/// Slope of a least-squares line through the per-window maxima of `log_d`
/// over the second half of the series.
pub fn growth_rate(t: &[f64], log_d: &[f64]) -> Option<f64> {
    let n = t.len().min(log_d.len());
    let half = n / 2;
    if n - half < 2 * GROWTH_WINDOWS {
        return None;
    }
    let len = n - half;
    let mut xs = Vec::with_capacity(GROWTH_WINDOWS);
    let mut ys = Vec::with_capacity(GROWTH_WINDOWS);
    for w in 0..GROWTH_WINDOWS {
        let a = half + w * len / GROWTH_WINDOWS;
        let b = half + (w + 1) * len / GROWTH_WINDOWS;
        let (mut best_t, mut best) = (t[a], f64::NEG_INFINITY);
        for i in a..b {
            if log_d[i] > best {
                best = log_d[i];
                best_t = t[i];
            }
        }
        if best.is_finite() {
            xs.push(best_t);
            ys.push(best);
        }
    }
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Nonlinear,
    Variational,
}

/// Stage states of the last `K` steps, indexed by step modulo `K`.
struct History {
    k: usize,
    width: usize,
    data: Vec<f64>,
    initial: Vec<f64>,
}

impl History {
    fn new(k: usize, initial: Vec<f64>) -> Self {
        let width = initial.len();
        Self {
            k,
            width,
            data: vec![0.0; k * 4 * width],
            initial,
        }
    }

    fn slot(&self, step: usize, stage: usize) -> usize {
        ((step % self.k) * 4 + stage) * self.width
    }

    /// Stage `stage` of step `step - K`.
    fn delayed(&self, step: usize, stage: usize) -> &[f64] {
        if step < self.k {
            &self.initial
        } else {
            let s = self.slot(step, stage);
            &self.data[s..s + self.width]
        }
    }

    fn store(&mut self, step: usize, stage: usize, x: &[f64]) {
        let s = self.slot(step, stage);
        self.data[s..s + self.width].copy_from_slice(x);
    }

    fn scale(&mut self, f: f64) {
        self.data.iter_mut().for_each(|x| *x *= f);
        self.initial.iter_mut().for_each(|x| *x *= f);
    }
}

struct System<'a> {
    mode: Mode,
    model: &'a SystemModel,
    df: &'a DMatrix<f64>,
    h: &'a DMatrix<f64>,
    g: DMatrix<f64>,
    sigma: f64,
    n: usize,
    m: usize,
}

impl System<'_> {
    fn rhs(&self, x: &[f64], delayed: &[f64], out: &mut [f64], mix: &mut [f64], diff: &mut [f64]) {
        let m = self.m;
        for i in 0..self.n {
            let xi = &x[i * m..(i + 1) * m];
            let oi = &mut out[i * m..(i + 1) * m];
            match self.mode {
                Mode::Nonlinear => self.model.vector_field(xi, oi),
                Mode::Variational => {
                    for (r, o) in oi.iter_mut().enumerate() {
                        *o = (0..m).map(|c| self.df[(r, c)] * xi[c]).sum();
                    }
                }
            }
            if self.sigma == 0.0 {
                continue;
            }
            // sum_j g_ij (x_j(t - tau) - x_i(t)) with unit row sums.
            mix.iter_mut().for_each(|v| *v = 0.0);
            for j in 0..self.n {
                let gij = self.g[(i, j)];
                if gij != 0.0 {
                    for c in 0..m {
                        mix[c] += gij * delayed[j * m + c];
                    }
                }
            }
            for c in 0..m {
                diff[c] = mix[c] - xi[c];
            }
            for (r, o) in oi.iter_mut().enumerate() {
                *o += self.sigma * (0..m).map(|c| self.h[(r, c)] * diff[c]).sum::<f64>();
            }
        }
    }
}

/// Full nonlinear network started from `s + xi_i` on `[-tau, 0]`.
pub fn simulate_network(cfg: &SimConfig) -> Result<SimResult, SimError> {
    simulate(cfg, Mode::Nonlinear)
}

/// Linearized network started from `xi_i` on `[-tau, 0]`.
pub fn simulate_variational(cfg: &SimConfig) -> Result<SimResult, SimError> {
    simulate(cfg, Mode::Variational)
}

fn simulate(cfg: &SimConfig, mode: Mode) -> Result<SimResult, SimError> {
    cfg.validate()?;
    let s = &cfg.settings;
    let (n, m) = (cfg.coupling.n, cfg.model.dim());
    let width = n * m;
    let fp = &cfg.fixed_point.state;
    let xi = s.perturbation.vectors(n, m)?;

    let mut x = vec![0.0; width];
    for i in 0..n {
        for c in 0..m {
            x[i * m + c] = match mode {
                Mode::Nonlinear => fp[c] + xi[i][c],
                Mode::Variational => xi[i][c],
            };
        }
    }
    let sys = System {
        mode,
        model: &cfg.model,
        df: &cfg.fixed_point.jacobian,
        h: &cfg.h,
        g: cfg.coupling.matrix(),
        sigma: s.sigma * cfg.coupling.row_sum,
        n,
        m,
    };
    let k = s.delay_steps;
    let mut history = (k > 0).then(|| History::new(k, x.clone()));
    let dt = s.step;
    let total = cfg.total_steps();
    let record_every = if s.record_every > 0 {
        s.record_every
    } else {
        (total / DEFAULT_SAMPLES).max(1)
    };

    let deviation = |x: &[f64]| -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..n {
            for c in 0..m {
                let base = if mode == Mode::Nonlinear { fp[c] } else { 0.0 };
                d = d.max((x[i * m + c] - base).abs());
            }
        }
        d
    };

    let mut log_scale = 0.0;
    let final_start = final_window_start(total + 1);
    let mut final_max: f64 = 0.0;
    let mut diverged = false;
    let mut stopped_early = false;
    // Full-resolution log d over the second half, for the growth fit.
    let fit_start = total.div_ceil(2);
    let mut fit_t = Vec::new();
    let mut fit_log = Vec::new();
    let mut samples = Vec::new();

    let mut k1 = vec![0.0; width];
    let mut k2 = vec![0.0; width];
    let mut k3 = vec![0.0; width];
    let mut k4 = vec![0.0; width];
    let mut stage = vec![0.0; width];
    let mut mix = vec![0.0; m];
    let mut diff = vec![0.0; m];
    let mut steps_done = 0;

    let mut observe = |step: usize, x: &[f64], log_scale: f64| -> (f64, f64) {
        let raw = deviation(x);
        let log_d = raw.ln() + log_scale;
        let d = log_d.exp();
        let t = step as f64 * dt;
        if step.is_multiple_of(record_every) || step == total {
            samples.push(Sample { t, d, log_d });
        }
        if step >= fit_start {
            fit_t.push(t);
            fit_log.push(log_d);
        }
        (d, t)
    };

    let (d0, _) = observe(0, &x, log_scale);
    if step_checks(d0, 0, final_start, &mut final_max, &mut diverged) && mode == Mode::Nonlinear {
        stopped_early = true;
    }

    let mut step = 0;
    while step < total && !stopped_early {
        eval_stage(
            &sys,
            &mut history,
            step,
            0,
            &x,
            &mut k1,
            &mut mix,
            &mut diff,
        );
        for i in 0..width {
            stage[i] = x[i] + 0.5 * dt * k1[i];
        }
        eval_stage(
            &sys,
            &mut history,
            step,
            1,
            &stage,
            &mut k2,
            &mut mix,
            &mut diff,
        );
        for i in 0..width {
            stage[i] = x[i] + 0.5 * dt * k2[i];
        }
        eval_stage(
            &sys,
            &mut history,
            step,
            2,
            &stage,
            &mut k3,
            &mut mix,
            &mut diff,
        );
        for i in 0..width {
            stage[i] = x[i] + dt * k3[i];
        }
        eval_stage(
            &sys,
            &mut history,
            step,
            3,
            &stage,
            &mut k4,
            &mut mix,
            &mut diff,
        );
        for i in 0..width {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        step += 1;
        steps_done = step;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite {
                step,
                t: step as f64 * dt,
            });
        }

        if mode == Mode::Variational {
            let size = x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if size > RESCALE_HIGH || (size < RESCALE_LOW && size > 0.0) {
                let f = 1.0 / size;
                x.iter_mut().for_each(|v| *v *= f);
                if let Some(hist) = history.as_mut() {
                    hist.scale(f);
                }
                log_scale += size.ln();
            }
        }

        let (d, _) = observe(step, &x, log_scale);
        if step_checks(d, step, final_start, &mut final_max, &mut diverged)
            && mode == Mode::Nonlinear
        {
            stopped_early = true;
        }
    }

    let verdict = if diverged {
        Verdict::Diverged
    } else if final_max < DECAY_THRESHOLD {
        Verdict::Decayed
    } else {
        Verdict::Persistent
    };
    let growth = match mode {
        Mode::Variational => growth_rate(&fit_t, &fit_log),
        Mode::Nonlinear => None,
    };
    Ok(SimResult {
        samples,
        verdict,
        growth_rate: growth,
        steps: steps_done,
        stopped_early,
        final_window_max: final_max,
    })
}

/// Right-hand side at one RK stage; the stage state is then stored so that
/// the same stage of step `step + K` can read it as its delayed value.
#[allow(clippy::too_many_arguments)]
fn eval_stage(
    sys: &System<'_>,
    history: &mut Option<History>,
    step: usize,
    st: usize,
    state: &[f64],
    out: &mut [f64],
    mix: &mut [f64],
    diff: &mut [f64],
) {
    match history {
        Some(hist) => {
            sys.rhs(state, hist.delayed(step, st), out, mix, diff);
            hist.store(step, st, state);
        }
        None => sys.rhs(state, state, out, mix, diff),
    }
}

/// Updates the decay/divergence trackers; true when `d` crossed the
/// divergence threshold.
fn step_checks(
    d: f64,
    step: usize,
    final_start: usize,
    final_max: &mut f64,
    diverged: &mut bool,
) -> bool {
    if step >= final_start {
        *final_max = final_max.max(d);
    }
    if d > DIVERGENCE_THRESHOLD || d.is_nan() {
        *diverged = true;
        return true;
    }
    false
}
