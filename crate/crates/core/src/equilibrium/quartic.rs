//! The off-diagonal quartic and its algebraic invariants.

use serde::{Deserialize, Serialize};

use super::poly;
use crate::model::SwarmParams;
use crate::{Error, Result};

/// Coefficients `a0..a4` (ascending) of the quartic in `x_b` whose positive
/// roots give off-diagonal stationary points under continuous rarest-first.
pub fn quartic_coeffs(p: &SwarmParams) -> [f64; 5] {
    let (b, g, d) = (p.beta, p.gamma, p.delta);
    let (ll, ls) = (p.lambda_l, p.lambda_s);
    let a0 =
        ll.powi(4) * b * b + ls.powi(3) * b * b * ll + 3.0 * ls * b * b * ll.powi(3) + 3.0 * ls * ls * b * b * ll * ll;
    let a1 = 3.0 * ls * ls * ll * d * g * b - ll * ll * g * d.powi(3)
        + 6.0 * ls * ll * ll * d * g * b
        + 3.0 * d * g * b * ll.powi(3);
    let a2 = 3.0 * b * b * ls * ll * ll * g
        + 3.0 * b * b * ls * ls * ll * g
        + g * d * d * ll * b * ls
        + 2.0 * g * g * ll * d * d * ls
        + 2.0 * g * g * ll * ll * d * d
        + g * b * d * d * ll * ll
        + b * b * g * ls.powi(3)
        + b * b * g * ll.powi(3);
    let a3 = 4.0 * ls * ll * d * g * g * b + 2.0 * ls * ls * d * g * g * b + 2.0 * ll * ll * d * g * g * b
        - 2.0 * g * g * d.powi(3) * ll;
    let a4 = 2.0 * g * g * d * d * ll * b + 2.0 * g * g * d * d * b * ls;
    [a0, a1, a2, a3, a4]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootClass {
    NoRealRoots,
    RealRootsExist,
}

/// Invariants of `c0 + 4 c1 x + 6 c2 x^2 + 4 c3 x^3 + c4 x^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticInvariants {
    /// Binomially normalized coefficients `c0..c4`.
    pub c: [f64; 5],
    pub g: f64,
    pub h: f64,
    pub i: f64,
    pub j: f64,
    /// `I^3 - 27 J^2`.
    pub delta: f64,
}

// Relative size under which an invariant is treated as exactly zero.
const ZERO_TOL: f64 = 1e-10;

impl QuarticInvariants {
    fn delta_is_zero(&self) -> bool {
        self.delta.abs() <= ZERO_TOL * (self.i.abs().powi(3) + 27.0 * self.j * self.j)
    }

    /// `12 H^2 - c4^2 I`; its sign separates four real roots from none when
    /// `H < 0` and the discriminant is positive.
    pub fn quartic_d(&self) -> f64 {
        12.0 * self.h * self.h - self.c[4] * self.c[4] * self.i
    }

    pub fn classify(&self) -> RootClass {
        let [_, c1, c2, c3, c4] = self.c;
        let d = self.quartic_d();
        let no_real = if self.delta_is_zero() {
            let g_scale = (c4 * c4 * c1).abs() + (3.0 * c4 * c3 * c2).abs() + (2.0 * c3.powi(3)).abs();
            let d_scale = 12.0 * self.h * self.h + (c4 * c4 * self.i).abs();
            self.g.abs() <= ZERO_TOL * g_scale && d.abs() <= ZERO_TOL * d_scale && self.h > 0.0
        } else if self.delta > 0.0 {
            self.h >= 0.0 || d < 0.0
        } else {
            false
        };
        if no_real {
            RootClass::NoRealRoots
        } else {
            RootClass::RealRootsExist
        }
    }
}

/// Maps ascending coefficients `a0..a4` to the invariant form.
pub fn quartic_invariants(a: &[f64; 5]) -> Result<QuarticInvariants> {
    if a[4] == 0.0 {
        return Err(Error::DegenerateQuartic);
    }
    let c = [a[0], a[1] / 4.0, a[2] / 6.0, a[3] / 4.0, a[4]];
    let [c0, c1, c2, c3, c4] = c;
    let g = c4 * c4 * c1 - 3.0 * c4 * c3 * c2 + 2.0 * c3.powi(3);
    let h = c4 * c2 - c3 * c3;
    let i = c4 * c0 - 4.0 * c3 * c1 + 3.0 * c2 * c2;
    // det [[c4, c3, c2], [c3, c2, c1], [c2, c1, c0]]
    let j = c4 * (c2 * c0 - c1 * c1) - c3 * (c3 * c0 - c1 * c2) + c2 * (c3 * c1 - c2 * c2);
    let delta = i.powi(3) - 27.0 * j * j;
    Ok(QuarticInvariants { c, g, h, i, j, delta })
}

/// Sorted real roots of `a0 + a1 x + ... + a4 x^4`, each Newton-polished.
pub fn solve_quartic(a: &[f64; 5]) -> Result<Vec<f64>> {
    let inv = quartic_invariants(a)?;
    let roots: Vec<f64> = poly::real_roots(a).into_iter().map(|r| poly::polish(a, r)).collect();
    let numeric = if roots.is_empty() {
        RootClass::NoRealRoots
    } else {
        RootClass::RealRootsExist
    };
    if numeric != inv.classify() {
        log::warn!(
            "quartic {a:?}: invariant test says {:?} but isolation found {roots:?}",
            inv.classify()
        );
    }
    Ok(roots)
}
