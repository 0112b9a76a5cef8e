use serde::{Deserialize, Serialize};

use super::{one_segment_rhs, two_segment_rhs, ControlPolicy, SwarmParams, SwarmState};
use crate::ode::Dynamics;

/// Piecewise-constant open-loop control on `n` equal intervals of `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub horizon: f64,
    pub values: Vec<f64>,
}

impl ControlSchedule {
    pub fn interval_len(&self) -> f64 {
        self.horizon / self.values.len() as f64
    }

    /// Value on the interval containing `t`; `t` past the horizon keeps the
    /// last value.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.5;
        }
        let k = ((t / self.interval_len()).floor().max(0.0) as usize).min(n - 1);
        self.values[k]
    }
}

/// How `u` is chosen while integrating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    /// Closed-loop rule evaluated on the rarity pair of the current state.
    Policy(ControlPolicy),
    /// Open-loop function of time.
    Schedule(ControlSchedule),
}

impl Control {
    pub fn fixed(u: f64) -> Self {
        Control::Policy(ControlPolicy::constant(u))
    }

    /// `u` given time and the rarity pair `(x_a, x_b)`.
    pub fn value(&self, t: f64, x_a: f64, x_b: f64) -> f64 {
        match self {
            Control::Policy(p) => p.value(x_a, x_b),
            Control::Schedule(s) => s.at(t).clamp(0.0, 1.0),
        }
    }
}

impl From<ControlPolicy> for Control {
    fn from(p: ControlPolicy) -> Self {
        Control::Policy(p)
    }
}

/// Two-segment swarm in state order `(x_l, x_a, x_b, x_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSegmentSystem {
    pub params: SwarmParams,
    pub control: Control,
}

impl TwoSegmentSystem {
    pub fn new(params: SwarmParams, control: impl Into<Control>) -> Self {
        TwoSegmentSystem {
            params,
            control: control.into(),
        }
    }
}

impl Dynamics for TwoSegmentSystem {
    fn dim(&self) -> usize {
        SwarmState::DIM
    }

    fn derivative(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        let s = SwarmState::new(x[0], x[1], x[2], x[3]);
        let u = self.control.value(t, s.x_a, s.x_b);
        dx.copy_from_slice(&two_segment_rhs(&self.params, &s, u).to_array());
    }

    fn control(&self, t: f64, x: &[f64]) -> Option<f64> {
        Some(self.control.value(t, x[1], x[2]))
    }

    fn switching(&self, _t: f64, x: &[f64]) -> Option<f64> {
        match &self.control {
            Control::Policy(p) => p.switching(x[1], x[2]),
            Control::Schedule(_) => None,
        }
    }

    // The right-hand side is symmetric under a <-> b with u = 1/2, so a
    // state with x_a == x_b stays on the diagonal.
    fn slide(&self, x: &mut [f64]) {
        let m = 0.5 * (x[1] + x[2]);
        x[1] = m;
        x[2] = m;
    }
}

/// Whole-file swarm in state order `(x_l, x_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneSegmentSystem {
    pub params: SwarmParams,
}

impl Dynamics for OneSegmentSystem {
    fn dim(&self) -> usize {
        2
    }

    fn derivative(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        let (dl, ds) = one_segment_rhs(&self.params, x[0], x[1]);
        dx[0] = dl;
        dx[1] = ds;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_lookup() {
        let s = ControlSchedule {
            horizon: 2.0,
            values: vec![1.0, 0.5, 0.0, 0.25],
        };
        assert_eq!(s.at(0.0), 1.0);
        assert_eq!(s.at(0.49), 1.0);
        assert_eq!(s.at(0.5), 0.5);
        assert_eq!(s.at(1.99), 0.25);
        assert_eq!(s.at(5.0), 0.25);
    }
}
