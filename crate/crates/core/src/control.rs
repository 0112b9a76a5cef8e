//! Terminal-cost control of the two-segment swarm by single shooting.
//!
//! The control is piecewise constant on `n` equal intervals of `[0, T]` and
//! the cost is the leecher-side mass `x_l(T) + x_a(T) + x_b(T)`. Each
//! candidate is integrated with fixed-step RK4 so that the cost is a smooth
//! function of the interval values; the gradient comes from central
//! differences evaluated in parallel and the iteration is a spectral
//! (Barzilai-Borwein) projected gradient method.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    two_segment_rhs, Control, ControlPolicy, ControlSchedule, SwarmParams, SwarmState, TwoSegmentSystem,
};
use crate::ode::{integrate, IntegratorConfig, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcProblem {
    pub params: SwarmParams,
    pub x0: SwarmState,
    pub horizon: f64,
    pub n_intervals: usize,
}

impl OcProblem {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidConfig("horizon must be positive and finite".into()));
        }
        if self.n_intervals == 0 {
            return Err(Error::InvalidConfig("need at least one control interval".into()));
        }
        if !self.x0.is_nonnegative() {
            return Err(Error::InvalidConfig("initial populations must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn interval_len(&self) -> f64 {
        self.horizon / self.n_intervals as f64
    }
}

/// A starting control for the descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Zeros,
    Ones,
    Half,
    /// The closed-loop bang-bang rule, averaged over each interval.
    BangBang,
    Grid(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptConfig {
    pub max_iters: usize,
    /// RK4 steps per control interval.
    pub substeps: usize,
    /// Central-difference perturbation of one interval value.
    pub fd_eps: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Stop once the projected-gradient step (max-norm) is below this.
    pub tol: f64,
    pub starts: Vec<Start>,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            max_iters: 300,
            substeps: 20,
            fd_eps: 1e-6,
            armijo: 1e-4,
            tol: 1e-8,
            starts: vec![Start::Zeros, Start::Ones, Start::Half, Start::BangBang],
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if self.substeps == 0 {
            return bad("substeps must be at least 1");
        }
        if !(self.fd_eps > 0.0 && self.fd_eps < 0.5) {
            return bad("fd_eps must lie in (0, 0.5)");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo must lie in (0, 1)");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.starts.is_empty() {
            return bad("need at least one start");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcSolution {
    pub u_grid: Vec<f64>,
    pub trajectory: Trajectory,
    /// Terminal `x_l + x_a + x_b` of `trajectory`.
    pub objective: f64,
    /// Whether the projected-gradient step fell below tolerance.
    pub converged: bool,
    pub iterations: usize,
    /// Index into `OptConfig::starts` of the winning start.
    pub start: usize,
    /// Objective of every start before descent.
    pub start_objectives: Vec<f64>,
}

impl OcSolution {
    pub fn schedule(&self, horizon: f64) -> ControlSchedule {
        ControlSchedule {
            horizon,
            values: self.u_grid.clone(),
        }
    }
}

fn terminal_cost(x: &[f64]) -> f64 {
    x[0] + x[1] + x[2]
}

/// Terminal cost under any control, integrated with `cfg` over
/// `[0, horizon]`. Open-loop schedules are integrated interval by interval
/// so that no step straddles a jump.
pub fn evaluate_objective(
    params: &SwarmParams,
    x0: &SwarmState,
    control: &Control,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let mut cfg = cfg.clone();
    cfg.t_end = horizon;
    if horizon == 0.0 {
        return Ok(x0.leecher_mass());
    }
    if let Control::Schedule(s) = control {
        if cfg.record_every.is_none() {
            cfg.record_every = Some(s.interval_len());
        }
    }
    let sys = TwoSegmentSystem::new(*params, control.clone());
    let traj = integrate(&sys, &x0.to_array(), &cfg)?;
    Ok(terminal_cost(traj.final_state()))
}

fn rk4_step(p: &SwarmParams, x: &[f64; 4], u: f64, h: f64) -> [f64; 4] {
    let f = |x: &[f64; 4]| two_segment_rhs(p, &SwarmState::new(x[0], x[1], x[2], x[3]), u).to_array();
    let add = |x: &[f64; 4], k: &[f64; 4], c: f64| std::array::from_fn(|i| x[i] + c * k[i]);
    let k1 = f(x);
    let k2 = f(&add(x, &k1, 0.5 * h));
    let k3 = f(&add(x, &k2, 0.5 * h));
    let k4 = f(&add(x, &k3, h));
    // The positive orthant is invariant; only rounding can leave it.
    std::array::from_fn(|i| (x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).max(0.0))
}

/// Piecewise-constant shooting with `substeps` RK4 steps per interval.
/// Returns the terminal state, and the full record when `keep` is set.
fn shoot(prob: &OcProblem, u: &[f64], substeps: usize, keep: bool) -> ([f64; 4], Option<Trajectory>) {
    let len = prob.interval_len();
    let h = len / substeps as f64;
    let mut x = prob.x0.to_array();
    let mut record = keep.then(|| Trajectory {
        times: vec![0.0],
        states: vec![x.to_vec()],
        controls: Some(vec![u[0]]),
    });
    for (k, &uk) in u.iter().enumerate() {
        for j in 0..substeps {
            x = rk4_step(&prob.params, &x, uk, h);
            if let Some(r) = record.as_mut() {
                r.times.push(if j + 1 == substeps {
                    (k + 1) as f64 * len
                } else {
                    k as f64 * len + (j + 1) as f64 * h
                });
                r.states.push(x.to_vec());
                r.controls.as_mut().unwrap().push(uk);
            }
        }
    }
    (x, record)
}

fn objective(prob: &OcProblem, u: &[f64], substeps: usize) -> f64 {
    terminal_cost(&shoot(prob, u, substeps, false).0)
}

fn gradient(prob: &OcProblem, u: &[f64], cfg: &OptConfig) -> Vec<f64> {
    (0..u.len())
        .into_par_iter()
        .map(|k| {
            let hi = (u[k] + cfg.fd_eps).min(1.0);
            let lo = (u[k] - cfg.fd_eps).max(0.0);
            let mut v = u.to_vec();
            v[k] = hi;
            let f_hi = objective(prob, &v, cfg.substeps);
            v[k] = lo;
            let f_lo = objective(prob, &v, cfg.substeps);
            (f_hi - f_lo) / (hi - lo)
        })
        .collect()
}

fn project(u: &mut [f64]) {
    for v in u {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Closed-loop bang-bang control averaged over each interval (midpoint rule
/// on `substeps` samples per interval).
pub fn sample_bang_bang(prob: &OcProblem, substeps: usize) -> Result<Vec<f64>> {
    let n = prob.n_intervals;
    let h = prob.interval_len() / (2 * substeps) as f64;
    let cfg = IntegratorConfig::rk45(prob.horizon).with_record_every(h);
    let sys = TwoSegmentSystem::new(prob.params, ControlPolicy::bang_bang());
    let traj = integrate(&sys, &prob.x0.to_array(), &cfg)?;
    let controls = traj.controls.unwrap_or_default();
    let mut u = vec![0.0; n];
    for (k, uk) in u.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..substeps {
            let idx = (k * substeps + j) * 2 + 1;
            acc += controls.get(idx).copied().unwrap_or(0.5);
        }
        *uk = acc / substeps as f64;
    }
    Ok(u)
}

fn initial_grid(prob: &OcProblem, start: &Start, cfg: &OptConfig) -> Result<Vec<f64>> {
    let n = prob.n_intervals;
    let mut u = match start {
        Start::Zeros => vec![0.0; n],
        Start::Ones => vec![1.0; n],
        Start::Half => vec![0.5; n],
        Start::BangBang => sample_bang_bang(prob, cfg.substeps)?,
        Start::Grid(g) => {
            if g.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: g.len(),
                });
            }
            g.clone()
        }
    };
    project(&mut u);
    Ok(u)
}

struct Descent {
    u: Vec<f64>,
    f: f64,
    iterations: usize,
    converged: bool,
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Spectral projected gradient with a nonmonotone Armijo search over the
/// last few objective values.
fn descend(prob: &OcProblem, mut u: Vec<f64>, cfg: &OptConfig) -> Descent {
    const MEMORY: usize = 8;
    const ALPHA_MIN: f64 = 1e-10;
    const ALPHA_MAX: f64 = 1e10;
    let mut f = objective(prob, &u, cfg.substeps);
    let mut g = gradient(prob, &u, cfg);
    let mut history = vec![f];
    let (mut best_u, mut best_f) = (u.clone(), f);
    let mut alpha = {
        let mut p: Vec<f64> = u.iter().zip(&g).map(|(v, gk)| v - gk).collect();
        project(&mut p);
        let m = max_dist(&p, &u);
        if m > 0.0 {
            (1.0 / m).clamp(ALPHA_MIN, ALPHA_MAX)
        } else {
            1.0
        }
    };
    for it in 0..cfg.max_iters {
        let mut probe: Vec<f64> = u.iter().zip(&g).map(|(v, gk)| v - gk).collect();
        project(&mut probe);
        if max_dist(&probe, &u) < cfg.tol {
            return Descent {
                u: best_u,
                f: best_f,
                iterations: it,
                converged: true,
            };
        }
        let mut target: Vec<f64> = u.iter().zip(&g).map(|(v, gk)| v - alpha * gk).collect();
        project(&mut target);
        let d: Vec<f64> = target.iter().zip(&u).map(|(t, v)| t - v).collect();
        let slope = dot(&g, &d);
        let reference = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut lambda = 1.0;
        let (cand, fc) = loop {
            let cand: Vec<f64> = u.iter().zip(&d).map(|(v, dk)| v + lambda * dk).collect();
            let fc = objective(prob, &cand, cfg.substeps);
            if fc <= reference + cfg.armijo * lambda * slope {
                break (cand, fc);
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                debug!("line search stalled at iteration {it}");
                return Descent {
                    u: best_u,
                    f: best_f,
                    iterations: it,
                    converged: false,
                };
            }
        };
        let g_new = gradient(prob, &cand, cfg);
        let s: Vec<f64> = cand.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        alpha = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(ALPHA_MIN, ALPHA_MAX)
        } else {
            ALPHA_MAX
        };
        u = cand;
        f = fc;
        g = g_new;
        if f < best_f {
            best_f = f;
            best_u.clone_from(&u);
        }
        history.push(f);
        if history.len() > MEMORY {
            history.remove(0);
        }
    }
    Descent {
        u: best_u,
        f: best_f,
        iterations: cfg.max_iters,
        converged: false,
    }
}

/// Minimises `x_l(T) + x_a(T) + x_b(T)` over piecewise-constant controls in
/// `[0, 1]`, descending from every configured start and keeping the best.
pub fn solve_mayer(prob: &OcProblem, cfg: &OptConfig) -> Result<OcSolution> {
    prob.validate()?;
    cfg.validate()?;
    let mut best: Option<(usize, Descent)> = None;
    let mut start_objectives = Vec::with_capacity(cfg.starts.len());
    for (i, start) in cfg.starts.iter().enumerate() {
        let u0 = initial_grid(prob, start, cfg)?;
        start_objectives.push(objective(prob, &u0, cfg.substeps));
        let d = descend(prob, u0, cfg);
        debug!("start {i}: objective {} after {} iterations", d.f, d.iterations);
        if best.as_ref().is_none_or(|(_, b)| d.f < b.f) {
            best = Some((i, d));
        }
    }
    let (start, d) = best.expect("at least one start");
    let (_, trajectory) = shoot(prob, &d.u, cfg.substeps, true);
    let trajectory = trajectory.expect("trajectory requested");
    let objective = terminal_cost(trajectory.final_state());
    Ok(OcSolution {
        u_grid: d.u,
        trajectory,
        objective,
        converged: d.converged,
        iterations: d.iterations,
        start,
        start_objectives,
    })
}
