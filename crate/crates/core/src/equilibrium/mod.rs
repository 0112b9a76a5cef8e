//! Stationary points of the two-segment model.
//!
//! Constant `u = 1/2`, continuous rarest-first and bang-bang rarest-first all
//! share the symmetric point `x_a = x_b`. Under continuous rarest-first the
//! condition `dx_a = dx_b` factors into a quadratic (the symmetric point) and
//! a quartic in `x_b`; positive quartic roots give asymmetric stationary
//! points in mirrored pairs.

mod bounds;
pub mod poly;
mod quartic;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::model::{ControlPolicy, SwarmParams, SwarmState, TwoSegmentSystem};
use crate::newton::{damped_newton, jacobian, NewtonConfig};
use crate::ode::{residual, Dynamics};
use crate::{Error, Result};

pub use bounds::{discriminant_lambda_bounds, discriminant_quadratic, lambda_s_midpoint, DiscriminantParams};
pub use quartic::{quartic_coeffs, quartic_invariants, solve_quartic, QuarticInvariants, RootClass};

/// Residual max-norm required of every reported stationary point.
pub const VERIFY_TOL: f64 = 1e-8;

/// Stationary point under constant `u = 1/2`.
pub fn half_control_equilibrium(p: &SwarmParams) -> SwarmState {
    let arrivals = p.total_arrivals();
    let kappa = p.beta * arrivals / (p.gamma * p.delta);
    let c = 2.0 * p.lambda_l / p.gamma;
    // Positive root of s^2 + 2 kappa s - c, written without cancellation.
    let sigma = c / (kappa + (kappa * kappa + c).sqrt());
    let x_s = arrivals / p.delta;
    SwarmState {
        x_l: p.lambda_l / p.beta / (sigma + x_s),
        x_a: sigma / 2.0,
        x_b: sigma / 2.0,
        x_s,
    }
}

/// Stationary point under constant `u = 1` (segment `b` dies out).
pub fn u1_equilibrium(p: &SwarmParams) -> SwarmState {
    let arrivals = p.total_arrivals();
    let x_a = p.lambda_l * p.delta / (arrivals * p.beta);
    // dx_s = 0 with x_b = 0 gives x_s = lambda_s / (delta - beta x_a).
    let x_s = arrivals / p.delta;
    SwarmState {
        x_l: p.lambda_l / (p.beta * (x_a + x_s)),
        x_a,
        x_b: 0.0,
        x_s,
    }
}

/// `(x_l, x_s)` that zero `dx_l` and `dx_s` for given segment populations.
pub fn xl_xs_from_xab(p: &SwarmParams, x_a: f64, x_b: f64) -> Result<(f64, f64)> {
    let den = p.beta * (x_a + x_b) - p.delta;
    if den.abs() <= 1e-12 * p.delta.max(p.beta * (x_a + x_b)) {
        return Err(Error::SingularDenominator);
    }
    let x_s = -(p.lambda_s + 2.0 * p.gamma * x_a * x_b) / den;
    let x_l = p.lambda_l / p.beta / (x_a + x_b + x_s);
    Ok((x_l, x_s))
}

/// `x_a` that zeros `dx_a + dx_b` under continuous rarest-first, given `x_b`.
pub fn xa_from_xb(p: &SwarmParams, x_b: f64) -> f64 {
    let arrivals = p.total_arrivals();
    -(x_b * p.beta * arrivals - p.lambda_l * p.delta) / (2.0 * p.gamma * p.delta * x_b + p.beta * arrivals)
}

/// Coefficients (ascending) of `2 g d x^2 + 2 b (ll + ls) x - ll d`.
pub fn quad_coeffs(p: &SwarmParams) -> [f64; 3] {
    [
        -p.lambda_l * p.delta,
        2.0 * p.beta * p.total_arrivals(),
        2.0 * p.gamma * p.delta,
    ]
}

/// The unique positive root of [`quad_coeffs`].
pub fn quad_positive_root(p: &SwarmParams) -> f64 {
    let bs = p.beta * p.total_arrivals();
    let ld = p.lambda_l * p.delta;
    ld / (bs + (bs * bs + 2.0 * p.gamma * p.delta * ld).sqrt())
}

/// Product of the quadratic and quartic factors, times -2: the numerator of
/// `dx_a - dx_b` along the curve `x_a = xa_from_xb(x_b)`.
pub fn rarest_difference_numerator(p: &SwarmParams, x_b: f64) -> f64 {
    -2.0 * poly::eval(&quad_coeffs(p), x_b) * poly::eval(&quartic_coeffs(p), x_b)
}

/// Little's-law leecher-to-seeder delay `(x_l + x_a + x_b) / lambda_l`.
pub fn littles_sojourn(s: &SwarmState, lambda_l: f64) -> f64 {
    s.leecher_mass() / lambda_l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityKind {
    Attracting,
    Unstable,
    Marginal,
}

/// Linearization at a stationary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    /// `[re, im]` pairs sorted by decreasing real part.
    pub eigenvalues: Vec<[f64; 2]>,
    pub unstable_directions: usize,
    pub kind: StabilityKind,
}

/// Classifies `x` by the eigenvalues of a finite-difference Jacobian.
pub fn stability<D: Dynamics + ?Sized>(sys: &D, x: &[f64]) -> Stability {
    let jac: DMatrix<f64> = jacobian(sys, x, 1e-6);
    let scale = jac.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut eigenvalues: Vec<[f64; 2]> = jac.complex_eigenvalues().iter().map(|z| [z.re, z.im]).collect();
    eigenvalues.sort_by(|a, b| b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])));
    let tol = 1e-7 * scale;
    let unstable_directions = eigenvalues.iter().filter(|z| z[0] > tol).count();
    let kind = if unstable_directions > 0 {
        StabilityKind::Unstable
    } else if eigenvalues.iter().all(|z| z[0] < -tol) {
        StabilityKind::Attracting
    } else {
        StabilityKind::Marginal
    };
    Stability {
        eigenvalues,
        unstable_directions,
        kind,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub state: SwarmState,
    /// RHS max-norm at `state` under the analysed controller.
    pub residual: f64,
    pub sojourn: f64,
    pub stability: Stability,
}

/// Stationary points under continuous rarest-first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub on_diagonal: EquilibriumPoint,
    /// Mirrored pairs `(x_a, x_b)` / `(x_b, x_a)`, sorted by `x_a`.
    pub off_diagonal: Vec<EquilibriumPoint>,
    pub invariants: QuarticInvariants,
    pub classification: RootClass,
    /// All real roots of the off-diagonal quartic, including extraneous ones.
    pub quartic_roots: Vec<f64>,
}

/// Symmetric stationary point in the closed form that also holds for the
/// continuous rarest-first controller.
pub fn continuous_diagonal_equilibrium(p: &SwarmParams) -> SwarmState {
    let arrivals = p.total_arrivals();
    let root = (p.beta * p.beta * arrivals * arrivals + 2.0 * p.lambda_l * p.gamma * p.delta * p.delta).sqrt();
    let x_ab = quad_positive_root(p);
    SwarmState {
        x_l: p.lambda_l * p.gamma * p.delta / (p.beta * (arrivals * (p.gamma - p.beta) + root)),
        x_a: x_ab,
        x_b: x_ab,
        x_s: arrivals / p.delta,
    }
}

fn point(sys: &TwoSegmentSystem, state: SwarmState) -> EquilibriumPoint {
    let x = state.to_array();
    EquilibriumPoint {
        residual: residual(sys, 0.0, &x),
        sojourn: littles_sojourn(&state, sys.params.lambda_l),
        stability: stability(sys, &x),
        state,
    }
}

/// All stationary points under continuous rarest-first.
///
/// Candidates from the quartic are mapped through `xa_from_xb` and
/// `xl_xs_from_xab`; any with a nonpositive component is extraneous. The
/// survivors are Newton-polished on the full system and kept only if the
/// residual is below [`VERIFY_TOL`].
pub fn continuous_control_equilibria(p: &SwarmParams) -> Result<EquilibriumSet> {
    let sys = TwoSegmentSystem::new(*p, ControlPolicy::ContinuousRarest);
    let coeffs = quartic_coeffs(p);
    let invariants = quartic_invariants(&coeffs)?;
    let quartic_roots = solve_quartic(&coeffs)?;

    let newton = NewtonConfig {
        tol: 1e-13,
        ..Default::default()
    };
    let mut off_diagonal: Vec<EquilibriumPoint> = Vec::new();
    for &x_b in quartic_roots.iter().filter(|r| **r > 0.0) {
        let x_a = xa_from_xb(p, x_b);
        if !(x_a > 0.0) {
            continue;
        }
        let Ok((x_l, x_s)) = xl_xs_from_xab(p, x_a, x_b) else {
            continue;
        };
        if !(x_l > 0.0 && x_s > 0.0) {
            continue;
        }
        let guess = [x_l, x_a, x_b, x_s];
        let polished = damped_newton(&sys, &guess, &newton);
        let x = if polished.residual < residual(&sys, 0.0, &guess) {
            polished.x
        } else {
            guess.to_vec()
        };
        let state = SwarmState::from_slice(&x)?;
        let candidate = point(&sys, state);
        let distinct = (state.x_a - state.x_b).abs() > 1e-9 * (state.x_a + state.x_b);
        if candidate.residual < VERIFY_TOL && state.is_nonnegative() && distinct {
            off_diagonal.push(candidate);
        } else {
            log::debug!("discarding quartic root {x_b}: {candidate:?}");
        }
    }
    off_diagonal.sort_by(|a, b| a.state.x_a.total_cmp(&b.state.x_a));

    Ok(EquilibriumSet {
        on_diagonal: point(&sys, continuous_diagonal_equilibrium(p)),
        off_diagonal,
        classification: invariants.classify(),
        invariants,
        quartic_roots,
    })
}
