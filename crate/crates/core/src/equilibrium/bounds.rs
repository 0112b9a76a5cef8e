//! Seeder-arrival interval on which the off-diagonal quartic has no real
//! roots.
//!
//! With `eta = lambda_l / delta` and `xi = delta / lambda_s` held fixed, the
//! quartic discriminant equals a positive factor times a quadratic in
//! `lambda_s`. That quadratic opens downward, so it is positive exactly
//! between its roots `lambda_0 < lambda_1`.

use serde::{Deserialize, Serialize};

use crate::model::{require_positive, ParamWarning, SwarmParams};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantParams {
    pub beta: f64,
    pub gamma: f64,
    /// `lambda_l / delta`.
    pub eta: f64,
    /// `delta / lambda_s`.
    pub xi: f64,
}

impl DiscriminantParams {
    pub fn from_swarm(p: &SwarmParams) -> Self {
        DiscriminantParams {
            beta: p.beta,
            gamma: p.gamma,
            eta: p.lambda_l / p.delta,
            xi: p.delta / p.lambda_s,
        }
    }

    /// Concrete rates for a given seeder arrival rate.
    pub fn swarm_params(&self, lambda_s: f64, beta0: f64) -> SwarmParams {
        let delta = self.xi * lambda_s;
        SwarmParams {
            beta0,
            beta: self.beta,
            gamma: self.gamma,
            lambda_l: self.eta * delta,
            lambda_s,
            delta,
        }
    }

    pub fn in_regime(&self) -> bool {
        self.eta >= 1.0 && self.xi >= 1.0
    }

    pub fn validate(&self) -> Result<Vec<ParamWarning>> {
        require_positive("beta", self.beta)?;
        require_positive("gamma", self.gamma)?;
        require_positive("eta", self.eta)?;
        require_positive("xi", self.xi)?;
        Ok(if self.in_regime() {
            Vec::new()
        } else {
            vec![ParamWarning::DiscriminantRegime {
                eta: self.eta,
                xi: self.xi,
            }]
        })
    }

    fn prefactor(&self) -> f64 {
        let s = self.eta * self.xi + 1.0;
        s * s / (4.0 * self.gamma * self.xi.powi(3) * self.eta)
    }

    fn radicand(&self) -> f64 {
        let (b, g) = (self.beta, self.gamma);
        68.0 * b * b * g * g + 20.0 * b * g.powi(3) + g.powi(4) + 64.0 * g * b.powi(3)
    }
}

/// `(lambda_0, lambda_1)`, the roots of [`discriminant_quadratic`].
pub fn discriminant_lambda_bounds(d: &DiscriminantParams) -> (f64, f64) {
    let (b, g) = (d.beta, d.gamma);
    let centre = 10.0 * b * g + g * g;
    let spread = d.radicand().sqrt();
    let k = d.prefactor();
    (k * (centre - spread), k * (centre + spread))
}

/// The `lambda_s`-dependent factor of the quartic discriminant; same sign
/// as the discriminant itself.
pub fn discriminant_quadratic(d: &DiscriminantParams, lambda_s: f64) -> f64 {
    let (b, g, eta, xi) = (d.beta, d.gamma, d.eta, d.xi);
    let s = eta * xi + 1.0;
    -2.0 * g * eta * eta * xi.powi(6) * lambda_s * lambda_s
        + eta * xi.powi(3) * s * s * (10.0 * b * g + g * g) * lambda_s
        + 4.0 * b * b * s.powi(4) * (2.0 * b - g)
}

/// Midpoint of `(lambda_0, lambda_1)`.
pub fn lambda_s_midpoint(d: &DiscriminantParams) -> f64 {
    let s = d.eta * d.xi + 1.0;
    s * s * (d.gamma + 10.0 * d.beta) / (4.0 * d.xi.powi(3) * d.eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_bounds() {
        let d = DiscriminantParams {
            beta: 2.0,
            gamma: 3.0,
            eta: 1.1,
            xi: 1.1,
        };
        let (l0, l1) = discriminant_lambda_bounds(&d);
        assert!((l0 + 0.759).abs() < 1e-3, "{l0}");
        assert!((l1 - 39.121).abs() < 1e-3, "{l1}");
        assert!(discriminant_quadratic(&d, l0).abs() < 1e-9 * 1e4);
        assert!(discriminant_quadratic(&d, l1).abs() < 1e-9 * 1e4);
        assert!(d.validate().unwrap().is_empty());
    }

    #[test]
    fn midpoint_is_centre() {
        let d = DiscriminantParams {
            beta: 0.7,
            gamma: 2.3,
            eta: 3.0,
            xi: 1.4,
        };
        let (l0, l1) = discriminant_lambda_bounds(&d);
        assert!((lambda_s_midpoint(&d) - 0.5 * (l0 + l1)).abs() < 1e-12 * l1.abs());
    }

    #[test]
    fn round_trip_through_rates() {
        let d = DiscriminantParams {
            beta: 2.0,
            gamma: 3.0,
            eta: 1.1,
            xi: 1.1,
        };
        let p = d.swarm_params(40.0, 1.0);
        assert!((p.delta - 44.0).abs() < 1e-12 && (p.lambda_l - 48.4).abs() < 1e-12);
        let back = DiscriminantParams::from_swarm(&p);
        assert!((back.eta - 1.1).abs() < 1e-12 && (back.xi - 1.1).abs() < 1e-12);
    }

    #[test]
    fn out_of_regime_warns() {
        let d = DiscriminantParams {
            beta: 2.0,
            gamma: 3.0,
            eta: 0.5,
            xi: 2.0,
        };
        assert_eq!(d.validate().unwrap().len(), 1);
    }
}
