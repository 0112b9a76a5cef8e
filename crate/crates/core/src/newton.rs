//! Damped Newton iteration on a vector field with a finite-difference
//! Jacobian. Used to polish stationary points found by integration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ode::Dynamics;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    /// Stop once the residual max-norm drops below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Relative central-difference step.
    pub fd_step: f64,
    /// Project iterates onto the nonnegative orthant.
    pub nonnegative: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-12,
            max_iters: 50,
            fd_step: 1e-7,
            nonnegative: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Central-difference Jacobian of `sys` at `x` (time frozen at 0).
pub fn jacobian<D: Dynamics + ?Sized>(sys: &D, x: &[f64], rel_step: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        let h = rel_step * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        sys.derivative(0.0, &xp, &mut fp);
        xp[j] = x[j] - h;
        sys.derivative(0.0, &xp, &mut fm);
        xp[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Solves `sys(x) = 0` starting from `x0`.
pub fn damped_newton<D: Dynamics + ?Sized>(sys: &D, x0: &[f64], cfg: &NewtonConfig) -> NewtonOutcome {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f = vec![0.0; n];
    sys.derivative(0.0, &x, &mut f);
    let mut res = max_norm(&f);
    let mut iterations = 0;
    let mut trial = vec![0.0; n];
    let mut ft = vec![0.0; n];

    while res >= cfg.tol && iterations < cfg.max_iters {
        iterations += 1;
        let jac = jacobian(sys, &x, cfg.fd_step);
        let rhs = DVector::from_iterator(n, f.iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            for i in 0..n {
                trial[i] = x[i] + alpha * step[i];
                if cfg.nonnegative && trial[i] < 0.0 {
                    trial[i] = 0.0;
                }
            }
            sys.derivative(0.0, &trial, &mut ft);
            let rt = max_norm(&ft);
            if rt < res {
                x.copy_from_slice(&trial);
                f.copy_from_slice(&ft);
                res = rt;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    NewtonOutcome {
        converged: res < cfg.tol,
        x,
        residual: res,
        iterations,
    }
}
