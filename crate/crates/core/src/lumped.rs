//! One rare segment against a lumped class holding the other `N - 1`.
//!
//! `x_r` counts peers holding only the rare segment, `x_N1` peers holding
//! everything but it. A rarity policy sees the pair `(x_r, x_N1)` where the
//! two-segment model sees `(x_a, x_b)`, and `u` is the probability that a
//! seeder serves the rare segment.
//!
//! The two-class variant splits every population by uplink (`hi`/`lo`);
//! choking removes the swaps in which a high-uplink peer would give the
//! rare segment to a low-uplink peer.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::littles_sojourn;
use crate::model::{require_nonnegative, require_positive, Control, ParamWarning, SwarmState};
use crate::newton::{damped_newton, NewtonConfig};
use crate::ode::{find_steady_state, residual, Dynamics, IntegratorConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LumpedParams {
    pub beta_r: f64,
    pub beta_n1: f64,
    pub lambda_l: f64,
    pub lambda_s: f64,
    pub delta: f64,
}

impl LumpedParams {
    pub fn new(beta_r: f64, beta_n1: f64, lambda_l: f64, lambda_s: f64, delta: f64) -> Result<Self> {
        let p = LumpedParams {
            beta_r,
            beta_n1,
            lambda_l,
            lambda_s,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks positivity; warns when the rare segment trades more easily
    /// than the lumped one.
    pub fn validate(&self) -> Result<Vec<ParamWarning>> {
        require_positive("beta_r", self.beta_r)?;
        require_positive("beta_n1", self.beta_n1)?;
        require_positive("lambda_l", self.lambda_l)?;
        require_positive("lambda_s", self.lambda_s)?;
        require_positive("delta", self.delta)?;
        Ok(rate_warning(self.beta_r, self.beta_n1))
    }
}

fn rate_warning(beta_r: f64, beta_n1: f64) -> Vec<ParamWarning> {
    if beta_r > beta_n1 {
        vec![ParamWarning::RareRateAboveLumped { beta_r, beta_n1 }]
    } else {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LumpedState {
    pub x_l: f64,
    pub x_r: f64,
    pub x_n1: f64,
    pub x_s: f64,
}

impl LumpedState {
    pub const DIM: usize = 4;

    pub fn new(x_l: f64, x_r: f64, x_n1: f64, x_s: f64) -> Self {
        LumpedState { x_l, x_r, x_n1, x_s }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x_l, self.x_r, self.x_n1, self.x_s]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        LumpedState::new(x[0], x[1], x[2], x[3])
    }

    /// Peers still downloading: `x_l + x_r + x_N1`.
    pub fn leecher_mass(&self) -> f64 {
        self.x_l + self.x_r + self.x_n1
    }

    fn add(&self, o: &LumpedState) -> LumpedState {
        LumpedState::new(self.x_l + o.x_l, self.x_r + o.x_r, self.x_n1 + o.x_n1, self.x_s + o.x_s)
    }
}

/// Single-class right-hand side.
pub fn lumped_rhs(p: &LumpedParams, s: &LumpedState, u: f64) -> LumpedState {
    let LumpedState { x_l, x_r, x_n1, x_s } = *s;
    let (br, bn) = (p.beta_r, p.beta_n1);
    let seed_mix = u * br + (1.0 - u) * bn;
    LumpedState {
        x_l: p.lambda_l - (br * x_r + bn * x_n1 + seed_mix * x_s) * x_l,
        x_r: br * (u * x_s + x_r) * x_l - (bn * x_s + br * x_n1) * x_r,
        x_n1: bn * ((1.0 - u) * x_s + x_n1) * x_l - br * (x_s + x_r) * x_n1,
        x_s: p.lambda_s + bn * x_s * x_r + br * (2.0 * x_r + x_s) * x_n1 - p.delta * x_s,
    }
}

/// Stationary point at `u = 1/2` when both segment classes trade at the
/// same rate `b`. For `b = 1`, `x_l` reduces to
/// `x_N1 lambda_l delta / (lambda_l delta - x_N1 (lambda_s + lambda_l))`.
pub fn lumped_symmetric_equilibrium(p: &LumpedParams) -> Result<LumpedState> {
    if p.beta_r != p.beta_n1 {
        return Err(Error::AsymmetricRates {
            beta_r: p.beta_r,
            beta_n1: p.beta_n1,
        });
    }
    let b = p.beta_r;
    let total = p.lambda_l + p.lambda_s;
    // Positive root of 2 b delta x^2 + 2 b (lambda_l + lambda_s) x - lambda_l delta,
    // written without cancellation.
    let disc = (b * total).powi(2) + 2.0 * b * p.delta * p.delta * p.lambda_l;
    let x = p.lambda_l * p.delta / (b * total + disc.sqrt());
    let x_s = total / p.delta;
    let x_l = p.lambda_l / (b * (2.0 * x + x_s));
    Ok(LumpedState::new(x_l, x, x, x_s))
}

/// Little's-law delay from arrival to seeding: `(x_l + x_r + x_N1) / lambda_l`.
pub fn lumped_sojourn(s: &LumpedState, lambda_l: f64) -> f64 {
    littles_sojourn(&SwarmState::new(s.x_l, s.x_r, s.x_n1, s.x_s), lambda_l)
}

/// Arrival and departure rates of one uplink class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassRates {
    pub lambda_l: f64,
    pub lambda_s: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoClassParams {
    pub beta_r: f64,
    pub beta_n1: f64,
    pub hi: ClassRates,
    pub lo: ClassRates,
}

impl TwoClassParams {
    /// Arrivals may be zero in one class (an empty class), not in both.
    pub fn validate(&self) -> Result<Vec<ParamWarning>> {
        require_positive("beta_r", self.beta_r)?;
        require_positive("beta_n1", self.beta_n1)?;
        for c in [&self.hi, &self.lo] {
            require_nonnegative("lambda_l", c.lambda_l)?;
            require_nonnegative("lambda_s", c.lambda_s)?;
            require_positive("delta", c.delta)?;
        }
        require_positive("lambda_l", self.hi.lambda_l + self.lo.lambda_l)?;
        Ok(rate_warning(self.beta_r, self.beta_n1))
    }

    /// Single-class parameters of one class taken alone.
    pub fn class(&self, c: UplinkClass) -> LumpedParams {
        let r = match c {
            UplinkClass::Hi => self.hi,
            UplinkClass::Lo => self.lo,
        };
        LumpedParams {
            beta_r: self.beta_r,
            beta_n1: self.beta_n1,
            lambda_l: r.lambda_l,
            lambda_s: r.lambda_s,
            delta: r.delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UplinkClass {
    Hi,
    Lo,
}

/// Vector layout: `(l_lo, l_hi, r_lo, r_hi, N1_lo, N1_hi, s_lo, s_hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoClassState {
    pub hi: LumpedState,
    pub lo: LumpedState,
}

impl TwoClassState {
    pub const DIM: usize = 8;

    pub fn to_array(&self) -> [f64; 8] {
        let (h, l) = (&self.hi, &self.lo);
        [l.x_l, h.x_l, l.x_r, h.x_r, l.x_n1, h.x_n1, l.x_s, h.x_s]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        TwoClassState {
            lo: LumpedState::new(x[0], x[2], x[4], x[6]),
            hi: LumpedState::new(x[1], x[3], x[5], x[7]),
        }
    }

    pub fn aggregate(&self) -> LumpedState {
        self.hi.add(&self.lo)
    }
}

/// Whether the two-class equations keep the choking restrictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChokingMode {
    /// Class-restricted populations exactly where the model has them.
    #[default]
    Choked,
    /// Every class-restricted population replaced by its aggregate; the
    /// classes then sum to the single-class model. A sensitivity baseline.
    Symmetrized,
}

/// Two-class right-hand side.
pub fn two_class_rhs(p: &TwoClassParams, s: &TwoClassState, u: f64, mode: ChokingMode) -> TwoClassState {
    let agg = s.aggregate();
    let (br, bn) = (p.beta_r, p.beta_n1);
    let (hi, lo) = (&s.hi, &s.lo);
    let pick = |restricted: f64, total: f64| match mode {
        ChokingMode::Choked => restricted,
        ChokingMode::Symmetrized => total,
    };
    let contact = br * agg.x_r + bn * agg.x_n1 + (u * br + (1.0 - u) * bn) * agg.x_s;
    let rare_gain = br * (u * agg.x_s + agg.x_r);
    let lumped_gain = bn * ((1.0 - u) * agg.x_s + agg.x_n1);

    let lo_dot = LumpedState {
        x_l: p.lo.lambda_l - contact * lo.x_l,
        x_r: rare_gain * lo.x_l - (bn * agg.x_s + br * agg.x_n1) * lo.x_r,
        x_n1: lumped_gain * lo.x_l - br * (agg.x_s + pick(lo.x_r, agg.x_r)) * lo.x_n1,
        x_s: p.lo.lambda_s + (bn * agg.x_s + br * agg.x_n1) * lo.x_r + br * (agg.x_s + pick(lo.x_r, agg.x_r)) * lo.x_n1
            - p.lo.delta * lo.x_s,
    };
    let hi_dot = LumpedState {
        x_l: p.hi.lambda_l - contact * hi.x_l,
        x_r: rare_gain * hi.x_l - (bn * agg.x_s + br * pick(hi.x_n1, agg.x_n1)) * hi.x_r,
        x_n1: lumped_gain * hi.x_l - br * (agg.x_s + agg.x_r) * hi.x_n1,
        x_s: p.hi.lambda_s
            + (bn * agg.x_s + br * pick(hi.x_n1, agg.x_n1)) * hi.x_r
            + br * (agg.x_s + agg.x_r) * hi.x_n1
            - p.hi.delta * hi.x_s,
    };
    TwoClassState { hi: hi_dot, lo: lo_dot }
}

/// Single-class lumped swarm in state order `(x_l, x_r, x_N1, x_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedSystem {
    pub params: LumpedParams,
    pub control: Control,
}

impl LumpedSystem {
    pub fn new(params: LumpedParams, control: impl Into<Control>) -> Self {
        LumpedSystem {
            params,
            control: control.into(),
        }
    }
}

impl Dynamics for LumpedSystem {
    fn dim(&self) -> usize {
        LumpedState::DIM
    }

    fn derivative(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        let s = LumpedState::from_slice(x);
        let u = self.control.value(t, s.x_r, s.x_n1);
        dx.copy_from_slice(&lumped_rhs(&self.params, &s, u).to_array());
    }

    fn control(&self, t: f64, x: &[f64]) -> Option<f64> {
        Some(self.control.value(t, x[1], x[2]))
    }
}

/// Two-class swarm in the layout of [`TwoClassState`]. Rarity policies see
/// the aggregate pair `(x_r, x_N1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoClassSystem {
    pub params: TwoClassParams,
    pub control: Control,
    pub mode: ChokingMode,
}

impl TwoClassSystem {
    pub fn new(params: TwoClassParams, control: impl Into<Control>, mode: ChokingMode) -> Self {
        TwoClassSystem {
            params,
            control: control.into(),
            mode,
        }
    }

    fn rarity(x: &[f64]) -> (f64, f64) {
        (x[2] + x[3], x[4] + x[5])
    }
}

impl Dynamics for TwoClassSystem {
    fn dim(&self) -> usize {
        TwoClassState::DIM
    }

    fn derivative(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        let (r, n1) = Self::rarity(x);
        let u = self.control.value(t, r, n1);
        let s = TwoClassState::from_slice(x);
        dx.copy_from_slice(&two_class_rhs(&self.params, &s, u, self.mode).to_array());
    }

    fn control(&self, t: f64, x: &[f64]) -> Option<f64> {
        let (r, n1) = Self::rarity(x);
        Some(self.control.value(t, r, n1))
    }
}

/// Which lumped model a sweep runs on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LumpedModel {
    Single(LumpedParams),
    TwoClass {
        params: TwoClassParams,
        #[serde(default)]
        mode: ChokingMode,
    },
}

impl LumpedModel {
    pub fn validate(&self) -> Result<Vec<ParamWarning>> {
        match self {
            LumpedModel::Single(p) => p.validate(),
            LumpedModel::TwoClass { params, .. } => params.validate(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LumpedModel::Single(_) => LumpedState::DIM,
            LumpedModel::TwoClass { .. } => TwoClassState::DIM,
        }
    }

    pub fn system(&self, control: impl Into<Control>) -> Box<dyn Dynamics> {
        match *self {
            LumpedModel::Single(p) => Box::new(LumpedSystem::new(p, control)),
            LumpedModel::TwoClass { params, mode } => Box::new(TwoClassSystem::new(params, control, mode)),
        }
    }

    /// Aggregate sojourn plus `(hi, lo)` class sojourns for two-class states.
    /// A class without arrivals has no sojourn.
    pub fn sojourns(&self, x: &[f64]) -> (f64, Option<f64>, Option<f64>) {
        match self {
            LumpedModel::Single(p) => (lumped_sojourn(&LumpedState::from_slice(x), p.lambda_l), None, None),
            LumpedModel::TwoClass { params, .. } => {
                let s = TwoClassState::from_slice(x);
                let class = |c: &LumpedState, lam: f64| (lam > 0.0).then(|| lumped_sojourn(c, lam));
                (
                    lumped_sojourn(&s.aggregate(), params.hi.lambda_l + params.lo.lambda_l),
                    class(&s.hi, params.hi.lambda_l),
                    class(&s.lo, params.lo.lambda_l),
                )
            }
        }
    }
}

/// Settings for [`steady_sojourn`] and [`sweep_delay_vs_u`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub integrator: IntegratorConfig,
    pub newton: NewtonConfig,
    /// Initial populations; empty means the empty swarm.
    pub initial: Vec<f64>,
    /// Largest residual max-norm accepted as stationary.
    pub accept_residual: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            integrator: IntegratorConfig::rk45(2000.0).with_steady_tol(1e-9).with_max_step(1.0),
            newton: NewtonConfig::default(),
            initial: Vec::new(),
            accept_residual: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// The constant `u`, or `None` for a closed-loop control.
    pub u: Option<f64>,
    pub sojourn: f64,
    pub sojourn_hi: Option<f64>,
    pub sojourn_lo: Option<f64>,
    pub converged: bool,
    pub residual: f64,
    pub state: Vec<f64>,
}

/// Stationary sojourn under `control`: integrate towards a steady state,
/// then polish with damped Newton. Failure to reach the residual threshold
/// is reported through `converged`, not as an error.
pub fn steady_sojourn(model: &LumpedModel, control: impl Into<Control>, cfg: &SweepConfig) -> Result<SweepPoint> {
    let control = control.into();
    let u = match &control {
        Control::Policy(crate::ControlPolicy::Constant { u }) => Some(*u),
        _ => None,
    };
    let sys = model.system(control);
    let x0 = if cfg.initial.is_empty() {
        vec![0.0; model.dim()]
    } else {
        cfg.initial.clone()
    };
    let start = match find_steady_state(&*sys, &x0, &cfg.integrator) {
        Ok(ss) => ss.state,
        Err(Error::NotConverged { state, .. }) => state,
        Err(e) => return Err(e),
    };
    let polished = damped_newton(&*sys, &start, &cfg.newton);
    let r_start = residual(&*sys, 0.0, &start);
    let (state, res) = if polished.residual <= r_start {
        (polished.x, polished.residual)
    } else {
        (start, r_start)
    };
    let (sojourn, sojourn_hi, sojourn_lo) = model.sojourns(&state);
    Ok(SweepPoint {
        u,
        sojourn,
        sojourn_hi,
        sojourn_lo,
        converged: res <= cfg.accept_residual,
        residual: res,
        state,
    })
}

/// Stationary sojourn for every constant `u` in `u_grid`, in parallel.
pub fn sweep_delay_vs_u(model: &LumpedModel, u_grid: &[f64], cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    model.validate()?;
    if u_grid.is_empty() {
        return Err(Error::InvalidConfig("u grid is empty".into()));
    }
    if let Some(bad) = u_grid.iter().find(|u| !(0.0..=1.0).contains(*u)) {
        return Err(Error::InvalidParameter {
            name: "u",
            reason: format!("must lie in [0, 1], got {bad}"),
        });
    }
    if !cfg.initial.is_empty() && cfg.initial.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: cfg.initial.len(),
        });
    }
    u_grid
        .par_iter()
        .map(|&u| steady_sojourn(model, Control::fixed(u), cfg))
        .collect()
}

/// `n + 1` evenly spaced values covering `[0, 1]`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n.max(1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{two_segment_rhs, SwarmParams};

    pub(crate) fn lumped_base() -> LumpedParams {
        LumpedParams::new(1.0, 1.0, 1.0, 0.01, 0.1).unwrap()
    }

    #[test]
    fn empty_swarm_only_arrivals() {
        let d = lumped_rhs(&lumped_base(), &LumpedState::default(), 0.3);
        assert_eq!(d.to_array(), [1.0, 0.0, 0.0, 0.01]);
    }

    #[test]
    fn equal_rates_match_two_segment() {
        let p = SwarmParams::new(1.0, 1.0, 1.0, 2.0, 0.5, 0.7).unwrap();
        let lp = LumpedParams::new(1.0, 1.0, 2.0, 0.5, 0.7).unwrap();
        let s = [0.3, 1.1, 0.4, 2.5];
        let a = lumped_rhs(&lp, &LumpedState::from_slice(&s), 0.5).to_array();
        let b = two_segment_rhs(&p, &SwarmState::new(s[0], s[1], s[2], s[3]), 0.5).to_array();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn lumped_closed_form() {
        let e = lumped_symmetric_equilibrium(&lumped_base()).unwrap();
        assert!((e.x_r - 0.0492647).abs() < 1e-7);
        assert_eq!(e.x_r, e.x_n1);
        assert!((e.x_s - 10.1).abs() < 1e-12);
        assert!((e.x_l - 0.0980534).abs() < 1e-7);
        assert!((lumped_sojourn(&e, 1.0) - 0.196583).abs() < 1e-6);
        let d = lumped_rhs(&lumped_base(), &e, 0.5);
        assert!(d.to_array().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn unit_rate_form_of_leecher_population() {
        let p = lumped_base();
        let e = lumped_symmetric_equilibrium(&p).unwrap();
        let total = p.lambda_l + p.lambda_s;
        let printed = e.x_n1 * p.lambda_l * p.delta / (p.lambda_l * p.delta - e.x_n1 * total);
        assert!((printed - e.x_l).abs() < 1e-12);
    }

    #[test]
    fn vanishing_seeder_arrivals() {
        let p = LumpedParams::new(1.0, 1.0, 1.0, 1e-300, 1.0).unwrap();
        let e = lumped_symmetric_equilibrium(&p).unwrap();
        assert!((e.x_r - (3.0f64.sqrt() - 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn asymmetric_rates_rejected() {
        let p = LumpedParams::new(0.5, 1.0, 1.0, 0.01, 0.1).unwrap();
        assert!(matches!(
            lumped_symmetric_equilibrium(&p),
            Err(Error::AsymmetricRates { .. })
        ));
        assert_eq!(p.validate().unwrap(), vec![]);
        let q = LumpedParams::new(2.0, 1.0, 1.0, 0.01, 0.1).unwrap();
        assert_eq!(q.validate().unwrap().len(), 1);
    }

    fn two_class_fast() -> TwoClassParams {
        TwoClassParams {
            beta_r: 1.0,
            beta_n1: 1.0,
            hi: ClassRates {
                lambda_l: 1.0,
                lambda_s: 0.01,
                delta: 0.9,
            },
            lo: ClassRates {
                lambda_l: 10.0,
                lambda_s: 0.1,
                delta: 9.0,
            },
        }
    }

    #[test]
    fn two_class_layout_round_trips() {
        let x: Vec<f64> = (1..=8).map(f64::from).collect();
        let s = TwoClassState::from_slice(&x);
        assert_eq!(s.lo.x_l, 1.0);
        assert_eq!(s.hi.x_s, 8.0);
        assert_eq!(s.to_array().to_vec(), x);
    }

    #[test]
    fn two_class_empty_swarm() {
        let d = two_class_rhs(&two_class_fast(), &TwoClassState::default(), 0.5, ChokingMode::Choked);
        assert_eq!(d.to_array(), [10.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.1, 0.01]);
    }

    #[test]
    fn symmetrized_classes_sum_to_single_class() {
        let p = two_class_fast();
        let s = TwoClassState::from_slice(&[0.3, 0.1, 0.7, 0.2, 0.4, 0.05, 1.5, 0.6]);
        let d = two_class_rhs(&p, &s, 0.3, ChokingMode::Symmetrized);
        let single = LumpedParams {
            beta_r: 1.0,
            beta_n1: 1.0,
            lambda_l: 11.0,
            lambda_s: 0.11,
            delta: 1.0,
        };
        let agg = s.aggregate();
        let e = lumped_rhs(&single, &agg, 0.3);
        let sum = d.aggregate();
        for (a, b) in [(sum.x_l, e.x_l), (sum.x_r, e.x_r), (sum.x_n1, e.x_n1)] {
            assert!((a - b).abs() < 1e-14);
        }
        // Seeder departures are class-specific.
        let dep = p.hi.delta * s.hi.x_s + p.lo.delta * s.lo.x_s;
        assert!((sum.x_s + dep - (e.x_s + agg.x_s)).abs() < 1e-14);
    }

    #[test]
    fn sweep_reproduces_closed_form_at_half() {
        let m = LumpedModel::Single(lumped_base());
        let pts = sweep_delay_vs_u(&m, &[0.5], &SweepConfig::default()).unwrap();
        let e = lumped_symmetric_equilibrium(&lumped_base()).unwrap();
        assert!(pts[0].converged);
        assert!((pts[0].sojourn - lumped_sojourn(&e, 1.0)).abs() < 1e-8);
        assert_eq!(pts[0].u, Some(0.5));
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let m = LumpedModel::Single(lumped_base());
        assert!(sweep_delay_vs_u(&m, &[], &SweepConfig::default()).is_err());
        assert!(sweep_delay_vs_u(&m, &[1.5], &SweepConfig::default()).is_err());
    }

    #[test]
    fn unit_grid_endpoints() {
        let g = unit_grid(10);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[10], 1.0);
    }
}
