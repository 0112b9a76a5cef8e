//! Time integration of the swarm models.
//!
//! Every model is exposed through the [`Dynamics`] trait. [`integrate`]
//! produces a [`Trajectory`], [`find_steady_state`] stops at the first
//! recorded point whose right-hand side is small in the max-norm, and
//! [`phase_field`] samples the `(x_a, x_b)` plane.

mod phase;
mod stepper;

use std::io::Write;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use phase::{phase_field, Arrow, PhaseField, PhaseGrid, Slaving};
use stepper::Workspace;

/// A vector field, possibly closed-loop through a control law.
pub trait Dynamics: Sync {
    fn dim(&self) -> usize;

    fn derivative(&self, t: f64, x: &[f64], dx: &mut [f64]);

    /// The control value realized at `(t, x)`, for controlled systems.
    fn control(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Signed distance to the switching surface of an attracting
    /// discontinuous control law, `0.0` on the surface (within its tie band).
    fn switching(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Moves a state inside the tie band exactly onto the switching surface,
    /// where the equivalent control keeps it.
    fn slide(&self, _x: &mut [f64]) {}
}

impl<D: Dynamics + ?Sized> Dynamics for &D {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn derivative(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (**self).derivative(t, x, dx)
    }
    fn control(&self, t: f64, x: &[f64]) -> Option<f64> {
        (**self).control(t, x)
    }
    fn switching(&self, t: f64, x: &[f64]) -> Option<f64> {
        (**self).switching(t, x)
    }
    fn slide(&self, x: &mut [f64]) {
        (**self).slide(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classical Runge-Kutta with a fixed step.
    Rk4,
    /// Dormand-Prince 5(4) with error control.
    Rk45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RK45.
    pub step: f64,
    pub rel_tol: f64,
    /// Absolute error tolerance; also the largest negative undershoot that is
    /// silently clamped to zero.
    pub abs_tol: f64,
    pub t_end: f64,
    /// Max-norm of the right-hand side below which a state is stationary.
    pub steady_tol: f64,
    /// Upper bound on RK45 steps. Near a stable equilibrium an uncapped
    /// stepper drifts to its stability limit and the residual stalls at
    /// roughly tolerance times the stiffest rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    /// Recording interval; `None` records every accepted step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk45,
            step: 1e-3,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            t_end: 100.0,
            steady_tol: 1e-8,
            max_step: None,
            record_every: None,
            max_steps: 20_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk45(t_end: f64) -> Self {
        IntegratorConfig {
            t_end,
            ..Default::default()
        }
    }

    pub fn rk4(step: f64, t_end: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            step,
            t_end,
            ..Default::default()
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_steady_tol(mut self, steady_tol: f64) -> Self {
        self.steady_tol = steady_tol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = Some(max_step);
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_record_every(mut self, every: f64) -> Self {
        self.record_every = Some(every);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be finite and nonnegative");
        }
        if !(self.steady_tol > 0.0) {
            return bad("steady_tol must be positive");
        }
        if let Some(m) = self.max_step {
            if !(m > 0.0) {
                return bad("max_step must be positive");
            }
        }
        if let Some(r) = self.record_every {
            if !(r > 0.0 && r.is_finite()) {
                return bad("record_every must be positive");
            }
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        Ok(())
    }
}

/// Recorded solution of an initial value problem.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Realized control values, for controlled systems.
    pub controls: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// First time at which `pred` holds, interpolating linearly in time
    /// between the bracketing records of `metric`.
    pub fn first_time_below(&self, metric: impl Fn(&[f64]) -> f64, threshold: f64) -> Option<f64> {
        let mut prev: Option<(f64, f64)> = None;
        for (t, s) in self.times.iter().zip(&self.states) {
            let m = metric(s);
            if m < threshold {
                return Some(match prev {
                    Some((t0, m0)) if m0 > m => t0 + (t - t0) * (m0 - threshold) / (m0 - m),
                    _ => *t,
                });
            }
            prev = Some((*t, m));
        }
        None
    }

    fn push(&mut self, t: f64, x: &[f64], u: Option<f64>) {
        self.times.push(t);
        self.states.push(x.to_vec());
        if let (Some(c), Some(u)) = (self.controls.as_mut(), u) {
            c.push(u);
        }
    }

    /// Writes `t, <names...>[, u]` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W, names: &[&str]) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["t"];
        header.extend_from_slice(names);
        if self.controls.is_some() {
            header.push("u");
        }
        w.write_record(&header)?;
        for (i, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            let mut row = Vec::with_capacity(s.len() + 2);
            row.push(fmt_f64(*t));
            row.extend(s.iter().map(|v| fmt_f64(*v)));
            if let Some(c) = &self.controls {
                row.push(fmt_f64(c[i]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Lossless decimal rendering (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Max-norm of the vector field at `(t, x)`.
pub fn residual<D: Dynamics + ?Sized>(sys: &D, t: f64, x: &[f64]) -> f64 {
    let mut dx = vec![0.0; sys.dim()];
    sys.derivative(t, x, &mut dx);
    dx.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Integrates `sys` from `x0` over `[0, cfg.t_end]`.
pub fn integrate<D: Dynamics + ?Sized>(sys: &D, x0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_observed(sys, x0, cfg, |_, _| ControlFlow::Continue(()))
}

/// Like [`integrate`], calling `observe` on every recorded point (including
/// the initial one). Returning `Break` ends the integration early.
pub fn integrate_observed<D, F>(sys: &D, x0: &[f64], cfg: &IntegratorConfig, mut observe: F) -> Result<Trajectory>
where
    D: Dynamics + ?Sized,
    F: FnMut(f64, &[f64]) -> ControlFlow<()>,
{
    cfg.validate()?;
    let n = sys.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    clamp_state(&mut x, 0.0, cfg.abs_tol)?;

    let mut traj = Trajectory {
        controls: sys.control(0.0, &x).map(|_| Vec::new()),
        ..Default::default()
    };
    traj.push(0.0, &x, sys.control(0.0, &x));
    if observe(0.0, &x).is_break() {
        return Ok(traj);
    }

    let mut ws = Workspace::new(n);
    let mut next = vec![0.0; n];
    let mut t = 0.0;
    let mut h = cfg.step.min(cfg.max_step.unwrap_or(f64::INFINITY));
    let mut steps = 0usize;
    let mut record_at = cfg.record_every;
    let mut record_index = 1u64;
    let mut realign: Option<f64> = None;
    let mut on_surface = false;

    while t < cfg.t_end {
        let target = record_at.map_or(cfg.t_end, |r| r.min(cfg.t_end));
        let mut sliding = false;
        let remaining = target - t;
        // Land exactly on the next record/end time.
        let (mut h_try, mut lands) = if h >= remaining * (1.0 - 1e-12) {
            (remaining, true)
        } else {
            (h, false)
        };

        match cfg.method {
            Method::Rk4 => {
                on_surface = false;
                // Return to the fixed grid after a step cut short at a switch.
                if let Some(rest) = realign.take() {
                    if rest < h_try {
                        h_try = rest;
                        lands = false;
                    }
                }
                stepper::rk4(sys, t, &x, h_try, &mut ws, &mut next);
                let s0 = sys.switching(t, &x).unwrap_or(0.0);
                if s0 != 0.0 {
                    let s1 = sys.switching(t + h_try, &next).unwrap_or(s0);
                    if s1 == 0.0 || s1.signum() != s0.signum() {
                        let (h_hit, arrived) = locate_switch_fixed(sys, t, &x, h_try, s0, &mut ws, &mut next);
                        on_surface = arrived;
                        if h_hit < h_try {
                            realign = Some(h_try - h_hit);
                            h_try = h_hit;
                            lands = false;
                        }
                    }
                }
            }
            Method::Rk45 => {
                let mut err = stepper::dopri5(sys, t, &x, h_try, cfg.rel_tol, cfg.abs_tol, &mut ws, &mut next);
                let s0 = sys.switching(t, &x).unwrap_or(0.0);
                if s0 != 0.0 {
                    let s1 = sys.switching(t + h_try, &next).unwrap_or(s0);
                    if s1 == 0.0 || s1.signum() != s0.signum() {
                        let (h_hit, e) = locate_switch(sys, t, &x, h_try, s0, cfg, &mut ws, &mut next);
                        if h_hit < h_try {
                            h_try = h_hit;
                            lands = false;
                            sliding = true;
                        }
                        err = e;
                    }
                }
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !(err <= 1.0) {
                    h = h_try * factor.min(0.9);
                    let h_min = 1e-14 * t.abs().max(1.0);
                    if !(h >= h_min) {
                        return Err(Error::StepSizeUnderflow { t, step: h });
                    }
                    steps += 1;
                    if steps >= cfg.max_steps {
                        return Err(Error::StepBudgetExhausted(cfg.max_steps));
                    }
                    continue;
                }
                stepper::dopri5_accept(&mut ws);
                // A step shortened to hit a record time says nothing about
                // the achievable step size.
                if (!lands && !sliding) || factor < 1.0 {
                    h = h_try * factor;
                }
                if let Some(m) = cfg.max_step {
                    h = h.min(m);
                }
            }
        }

        t = if lands { target } else { t + h_try };
        std::mem::swap(&mut x, &mut next);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        if clamp_state(&mut x, t, cfg.abs_tol)? {
            ws.fsal_valid = false;
        }
        if on_surface || sys.switching(t, &x) == Some(0.0) {
            let before = x.clone();
            sys.slide(&mut x);
            if x != before {
                ws.fsal_valid = false;
            }
        }

        steps += 1;
        if steps >= cfg.max_steps && t < cfg.t_end {
            return Err(Error::StepBudgetExhausted(cfg.max_steps));
        }

        let record = match (cfg.record_every, lands) {
            (None, _) => true,
            (Some(r), true) => {
                record_index += 1;
                record_at = Some(r * record_index as f64);
                true
            }
            (Some(_), false) => false,
        };
        if record {
            traj.push(t, &x, sys.control(t, &x));
            if observe(t, &x).is_break() {
                break;
            }
        }
    }
    Ok(traj)
}

/// Bisects the step length until the end point falls inside the tie band of
/// the switching surface. Returns the step and its error estimate; `next`
/// holds the corresponding end state.
#[allow(clippy::too_many_arguments)]
fn locate_switch<D: Dynamics + ?Sized>(
    sys: &D,
    t: f64,
    x: &[f64],
    h: f64,
    s0: f64,
    cfg: &IntegratorConfig,
    ws: &mut Workspace,
    next: &mut [f64],
) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let err = stepper::dopri5(sys, t, x, mid, cfg.rel_tol, cfg.abs_tol, ws, next);
        match sys.switching(t + mid, next) {
            Some(0.0) => return (mid, err),
            Some(s) if s.signum() == s0.signum() => lo = mid,
            _ => hi = mid,
        }
    }
    // The band is thinner than the bisection can resolve; stop just across.
    let err = stepper::dopri5(sys, t, x, hi, cfg.rel_tol, cfg.abs_tol, ws, next);
    (hi, err)
}

/// RK4 counterpart of [`locate_switch`]; also reports whether the end state
/// should be treated as on the surface.
///
/// Once a stage lands across the surface the step is no longer monotone in
/// its length and may never end inside the band. So the bracket tracks the
/// longest step whose last stage point and end point both stay on the
/// starting side; stepping there leaves a gap of order `h^2`, and repeating
/// from the new point closes it quadratically. Near the band edge the
/// switching term fades and the gap stops shrinking; that counts as arrival.
fn locate_switch_fixed<D: Dynamics + ?Sized>(
    sys: &D,
    t: f64,
    x: &[f64],
    h: f64,
    s0: f64,
    ws: &mut Workspace,
    next: &mut [f64],
) -> (f64, bool) {
    let same = |s: Option<f64>| matches!(s, Some(s) if s != 0.0 && s.signum() == s0.signum());
    let mut from = x.to_vec();
    let mut done = 0.0;
    for _ in 0..8 {
        let (mut lo, mut hi) = (0.0, h - done);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            stepper::rk4(sys, t + done, &from, mid, ws, next);
            if same(sys.switching(t + done + mid, next)) && same(sys.switching(t + done + mid, &ws.tmp)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let step = if lo > 0.0 { lo } else { hi };
        stepper::rk4(sys, t + done, &from, step, ws, next);
        done += step;
        if sys.switching(t + done, next) == Some(0.0) || lo <= 1e-9 * h {
            return (done, true);
        }
        from.copy_from_slice(next);
    }
    (done, false)
}

/// Clamps small negative undershoots; returns whether anything changed.
fn clamp_state(x: &mut [f64], t: f64, tol: f64) -> Result<bool> {
    let mut changed = false;
    for (index, v) in x.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -tol {
                return Err(Error::NegativityViolation { t, index, value: *v });
            }
            *v = 0.0;
            changed = true;
        }
    }
    Ok(changed)
}

/// A state at which the vector field is (numerically) zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub state: Vec<f64>,
    pub time: f64,
    pub residual: f64,
}

/// Integrates until the first recorded state with RHS max-norm below
/// `cfg.steady_tol`.
///
/// Returns [`Error::NotConverged`] with the final state and residual when
/// `cfg.t_end` is reached first.
pub fn find_steady_state<D: Dynamics + ?Sized>(sys: &D, x0: &[f64], cfg: &IntegratorConfig) -> Result<SteadyState> {
    let mut found: Option<SteadyState> = None;
    let traj = integrate_observed(sys, x0, cfg, |t, x| {
        let r = residual(sys, t, x);
        if r < cfg.steady_tol {
            found = Some(SteadyState {
                state: x.to_vec(),
                time: t,
                residual: r,
            });
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    found.ok_or_else(|| {
        let state = traj.final_state().to_vec();
        let t = traj.final_time();
        Error::NotConverged {
            t,
            residual: residual(sys, t, &state),
            state,
        }
    })
}
