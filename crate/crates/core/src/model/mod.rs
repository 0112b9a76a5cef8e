//! Parameters, states and right-hand sides of the swarm models.

mod policy;
mod system;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use policy::{control_value, ControlPolicy};
pub use system::{Control, ControlSchedule, OneSegmentSystem, TwoSegmentSystem};

/// Rate constants shared by the one- and two-segment models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmParams {
    /// Whole-file client/server rate (one-segment model only).
    pub beta0: f64,
    /// Segment client/server rate.
    pub beta: f64,
    /// Swap rate between complementary segment holders.
    pub gamma: f64,
    pub lambda_l: f64,
    pub lambda_s: f64,
    pub delta: f64,
}

/// Soft constraint violations. These never stop a computation.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamWarning {
    /// `gamma >= beta > beta0` does not hold.
    RateOrdering { beta0: f64, beta: f64, gamma: f64 },
    /// Permanent seeders do not outlive ex-leecher seeders.
    SeederLifetimes { delta_l: f64, delta_s: f64 },
    /// `beta_r <= beta_n1` does not hold in the lumped model.
    RareRateAboveLumped { beta_r: f64, beta_n1: f64 },
    /// Outside the `lambda_l >= delta >= lambda_s` regime of the bounds.
    DiscriminantRegime { eta: f64, xi: f64 },
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::RateOrdering { beta0, beta, gamma } => write!(
                f,
                "expected gamma >= beta > beta0, got gamma={gamma}, beta={beta}, beta0={beta0}"
            ),
            ParamWarning::SeederLifetimes { delta_l, delta_s } => write!(
                f,
                "expected delta_s < delta_l, got delta_s={delta_s}, delta_l={delta_l}"
            ),
            ParamWarning::RareRateAboveLumped { beta_r, beta_n1 } => {
                write!(f, "expected beta_r <= beta_n1, got beta_r={beta_r}, beta_n1={beta_n1}")
            }
            ParamWarning::DiscriminantRegime { eta, xi } => {
                write!(f, "eta={eta}, xi={xi}: bounds are only meaningful for eta, xi >= 1")
            }
        }
    }
}

pub(crate) fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

pub(crate) fn require_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be nonnegative and finite, got {v}"),
        })
    }
}

impl SwarmParams {
    pub fn new(beta0: f64, beta: f64, gamma: f64, lambda_l: f64, lambda_s: f64, delta: f64) -> Result<Self> {
        let p = SwarmParams {
            beta0,
            beta,
            gamma,
            lambda_l,
            lambda_s,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks positivity and returns any soft ordering warnings.
    pub fn validate(&self) -> Result<Vec<ParamWarning>> {
        require_positive("beta0", self.beta0)?;
        require_positive("beta", self.beta)?;
        require_positive("gamma", self.gamma)?;
        require_positive("lambda_l", self.lambda_l)?;
        require_positive("lambda_s", self.lambda_s)?;
        require_positive("delta", self.delta)?;
        let mut warnings = Vec::new();
        if !(self.gamma >= self.beta && self.beta > self.beta0) {
            warnings.push(ParamWarning::RateOrdering {
                beta0: self.beta0,
                beta: self.beta,
                gamma: self.gamma,
            });
        }
        Ok(warnings)
    }

    /// Total exogenous arrival rate `lambda_l + lambda_s`.
    pub fn total_arrivals(&self) -> f64 {
        self.lambda_l + self.lambda_s
    }
}

/// Populations of the two-segment swarm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    /// Leechers holding no segment.
    pub x_l: f64,
    /// Holders of segment `a` only.
    pub x_a: f64,
    /// Holders of segment `b` only.
    pub x_b: f64,
    /// Seeders.
    pub x_s: f64,
}

impl SwarmState {
    pub const DIM: usize = 4;

    pub fn new(x_l: f64, x_a: f64, x_b: f64, x_s: f64) -> Self {
        SwarmState { x_l, x_a, x_b, x_s }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x_l, self.x_a, self.x_b, self.x_s]
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        match *x {
            [x_l, x_a, x_b, x_s] => Ok(SwarmState { x_l, x_a, x_b, x_s }),
            _ => Err(Error::DimensionMismatch {
                expected: 4,
                found: x.len(),
            }),
        }
    }

    /// Swaps the roles of the two segments.
    pub fn mirrored(self) -> Self {
        SwarmState {
            x_a: self.x_b,
            x_b: self.x_a,
            ..self
        }
    }

    /// Leecher-side mass `x_l + x_a + x_b`.
    pub fn leecher_mass(&self) -> f64 {
        self.x_l + self.x_a + self.x_b
    }

    pub fn is_nonnegative(&self) -> bool {
        self.to_array().iter().all(|v| *v >= 0.0)
    }
}

/// Arrival and departure rates of the two kinds of seeders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeederLifetimeParams {
    pub lambda_l: f64,
    pub lambda_s: f64,
    /// Departure rate of seeders that arrived as leechers.
    pub delta_l: f64,
    /// Departure rate of permanent seeders.
    pub delta_s: f64,
}

impl SeederLifetimeParams {
    pub fn validate(&self) -> Result<Vec<ParamWarning>> {
        require_positive("lambda_l", self.lambda_l)?;
        require_positive("lambda_s", self.lambda_s)?;
        require_positive("delta_l", self.delta_l)?;
        require_positive("delta_s", self.delta_s)?;
        let mut warnings = Vec::new();
        if !(self.delta_s < self.delta_l) {
            warnings.push(ParamWarning::SeederLifetimes {
                delta_l: self.delta_l,
                delta_s: self.delta_s,
            });
        }
        Ok(warnings)
    }
}

/// Departure rate of a typical seeder.
///
/// The mean lifetime `1/delta` averages `1/delta_l` and `1/delta_s` with
/// weights proportional to the Little's-law populations
/// `lambda_l/delta_l` and `lambda_s/delta_s`.
pub fn effective_death_rate(q: &SeederLifetimeParams) -> f64 {
    let w_l = q.lambda_l / q.delta_l;
    let w_s = q.lambda_s / q.delta_s;
    let mean_life = (w_l / q.delta_l + w_s / q.delta_s) / (w_l + w_s);
    1.0 / mean_life
}

/// Single-segment (whole file) dynamics: returns `(dx_l, dx_s)`.
pub fn one_segment_rhs(p: &SwarmParams, x_l: f64, x_s: f64) -> (f64, f64) {
    let transfer = p.beta0 * x_l * x_s;
    (p.lambda_l - transfer, transfer - p.delta * x_s + p.lambda_s)
}

/// Globally attracting equilibrium of the single-segment model.
pub fn one_segment_equilibrium(p: &SwarmParams) -> (f64, f64) {
    let arrivals = p.total_arrivals();
    (p.delta * p.lambda_l / (p.beta0 * arrivals), arrivals / p.delta)
}

/// Two-segment dynamics under seeder control `u`.
pub fn two_segment_rhs(p: &SwarmParams, s: &SwarmState, u: f64) -> SwarmState {
    let SwarmState { x_l, x_a, x_b, x_s } = *s;
    let (beta, gamma) = (p.beta, p.gamma);
    SwarmState {
        x_l: p.lambda_l - beta * x_l * (x_a + x_b + x_s),
        x_a: -x_a * (beta * x_s + gamma * x_b) + beta * x_l * (x_a + u * x_s),
        x_b: -x_b * (beta * x_s + gamma * x_a) + beta * x_l * (x_b + (1.0 - u) * x_s),
        x_s: p.lambda_s + beta * (x_a + x_b) * x_s + 2.0 * gamma * x_a * x_b - p.delta * x_s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn base_rates() -> SwarmParams {
        SwarmParams::new(1.0, 2.0, 3.0, 4.0, 1.0, 2.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn two_segment_hand_substitution() {
        let d = two_segment_rhs(&base_rates(), &SwarmState::new(1.0, 1.0, 1.0, 1.0), 0.5);
        assert_eq!(d.to_array(), [-2.0, -2.0, -2.0, 9.0]);
    }

    #[test]
    fn two_segment_empty_swarm() {
        let p = base_rates();
        for u in [0.0, 0.3, 1.0] {
            let d = two_segment_rhs(&p, &SwarmState::default(), u);
            assert_eq!(d.to_array(), [p.lambda_l, 0.0, 0.0, p.lambda_s]);
        }
    }

    #[test]
    fn two_segment_vanishes_at_half_control_point() {
        let s = SwarmState::new(12.0 / 19.0, 1.0 / 3.0, 1.0 / 3.0, 2.5);
        let d = two_segment_rhs(&base_rates(), &s, 0.5);
        assert!(d.to_array().iter().all(|v| v.abs() < 1e-12), "{d:?}");
    }

    #[test]
    fn one_segment_values() {
        let p = SwarmParams::new(1.0, 2.0, 3.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(one_segment_rhs(&p, 0.0, 0.0), (2.0, 1.0));
        assert_eq!(one_segment_rhs(&p, 1.0, 1.0), (1.0, 1.0));
        let (xl, xs) = one_segment_equilibrium(&p);
        assert!(close(xl, 2.0 / 3.0, 1e-15) && close(xs, 3.0, 1e-15));
        let (dl, ds) = one_segment_rhs(&p, xl, xs);
        assert!(dl.abs() < 1e-12 && ds.abs() < 1e-12);
    }

    #[test]
    fn one_segment_seeders_affine_in_arrivals() {
        let p = SwarmParams::new(1.0, 2.0, 3.0, 2.0, 1.0, 1.0).unwrap();
        for c in [0.5, 2.0, 7.0] {
            let q = SwarmParams {
                lambda_s: c * p.lambda_s,
                ..p
            };
            let (_, xs) = one_segment_equilibrium(&q);
            assert!(close(xs, (q.lambda_l + q.lambda_s) / q.delta, 1e-14));
        }
    }

    #[test]
    fn death_rate_weighting() {
        let same = SeederLifetimeParams {
            lambda_l: 3.0,
            lambda_s: 0.2,
            delta_l: 1.5,
            delta_s: 1.5,
        };
        assert!(close(effective_death_rate(&same), 1.5, 1e-14));

        let q = SeederLifetimeParams {
            lambda_l: 1.0,
            lambda_s: 1.0,
            delta_l: 2.0,
            delta_s: 0.5,
        };
        assert!(close(effective_death_rate(&q), 1.0 / 1.7, 1e-14));

        let vanishing = SeederLifetimeParams { lambda_s: 1e-12, ..q };
        assert!(close(effective_death_rate(&vanishing), 2.0, 1e-9));
    }

    #[test]
    fn ordering_is_a_warning() {
        let p = SwarmParams::new(1.0, 2.0, 1.5, 4.0, 1.0, 2.0).unwrap();
        assert_eq!(p.validate().unwrap().len(), 1);
        assert!(base_rates().validate().unwrap().is_empty());
        assert!(SwarmParams::new(1.0, 2.0, 3.0, 0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn lifetime_warning() {
        let q = SeederLifetimeParams {
            lambda_l: 1.0,
            lambda_s: 1.0,
            delta_l: 0.5,
            delta_s: 2.0,
        };
        assert_eq!(q.validate().unwrap().len(), 1);
    }

    #[test]
    fn state_slice_roundtrip() {
        let s = SwarmState::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(SwarmState::from_slice(&s.to_array()).unwrap(), s);
        assert!(SwarmState::from_slice(&[1.0, 2.0]).is_err());
    }
}
