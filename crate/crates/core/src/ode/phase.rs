//! Arrows of the two-segment vector field on the `(x_a, x_b)` plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{integrate, IntegratorConfig, Trajectory};
use crate::equilibrium::{continuous_diagonal_equilibrium, xl_xs_from_xab};
use crate::model::{two_segment_rhs, SwarmState, TwoSegmentSystem};
use crate::{Error, Result};

/// Rectangle `[xa_min, xa_max] x [xb_min, xb_max]` sampled on an
/// `nx x ny` lattice (endpoints included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    pub xa_min: f64,
    pub xa_max: f64,
    pub xb_min: f64,
    pub xb_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl PhaseGrid {
    pub fn square(max: f64, n: usize) -> Self {
        PhaseGrid {
            xa_min: 0.0,
            xa_max: max,
            xb_min: 0.0,
            xb_max: max,
            nx: n,
            ny: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        let finite = [self.xa_min, self.xa_max, self.xb_min, self.xb_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.xa_min < 0.0 || self.xb_min < 0.0 {
            return bad("grid bounds must be finite and nonnegative");
        }
        if !(self.xa_max > self.xa_min && self.xb_max > self.xb_min) {
            return bad("grid must have positive area");
        }
        if self.nx < 2 || self.ny < 2 {
            return bad("grid needs at least 2 points per axis");
        }
        Ok(())
    }

    fn coord(min: f64, max: f64, n: usize, i: usize) -> f64 {
        min + (max - min) * i as f64 / (n - 1) as f64
    }

    /// Lattice points in row-major order (`x_b` outer, `x_a` inner).
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            let x_b = Self::coord(self.xb_min, self.xb_max, self.ny, j);
            for i in 0..self.nx {
                out.push((Self::coord(self.xa_min, self.xa_max, self.nx, i), x_b));
            }
        }
        out
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.xa_min, self.xb_min),
            (self.xa_max, self.xb_min),
            (self.xa_min, self.xb_max),
            (self.xa_max, self.xb_max),
        ]
    }
}

/// Where the leecher and seeder populations sit while the arrows are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Slaving {
    /// The `(x_l, x_s)` of the diagonal equilibrium under rarest-first.
    #[default]
    Diagonal,
    Fixed {
        x_l: f64,
        x_s: f64,
    },
    /// The `(x_l, x_s)` that zero their own derivatives at each point.
    /// Points where no positive pair exists are skipped.
    QuasiSteady,
}

impl Slaving {
    fn resolve(&self, sys: &TwoSegmentSystem, x_a: f64, x_b: f64) -> Option<(f64, f64)> {
        match *self {
            Slaving::Diagonal => {
                let e = continuous_diagonal_equilibrium(&sys.params);
                Some((e.x_l, e.x_s))
            }
            Slaving::Fixed { x_l, x_s } => Some((x_l, x_s)),
            Slaving::QuasiSteady => match xl_xs_from_xab(&sys.params, x_a, x_b) {
                Ok((l, s)) if l >= 0.0 && s >= 0.0 => Some((l, s)),
                _ => None,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrow {
    pub x_a: f64,
    pub x_b: f64,
    pub dx_a: f64,
    pub dx_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseField {
    pub arrows: Vec<Arrow>,
    /// Full four-dimensional trajectories started at the grid corners.
    pub trajectories: Vec<Trajectory>,
}

/// Samples `(dx_a/dt, dx_b/dt)` over `grid` and, when `bundle` is given,
/// integrates the full system from each grid corner (in parallel).
pub fn phase_field(
    sys: &TwoSegmentSystem,
    grid: &PhaseGrid,
    slaving: &Slaving,
    bundle: Option<&IntegratorConfig>,
) -> Result<PhaseField> {
    grid.validate()?;
    if let Slaving::Fixed { x_l, x_s } = *slaving {
        if !(x_l >= 0.0 && x_s >= 0.0) {
            return Err(Error::InvalidConfig("slaved populations must be nonnegative".into()));
        }
    }
    let arrows = grid
        .points()
        .into_iter()
        .filter_map(|(x_a, x_b)| {
            let (x_l, x_s) = slaving.resolve(sys, x_a, x_b)?;
            let s = SwarmState::new(x_l, x_a, x_b, x_s);
            let u = sys.control.value(0.0, x_a, x_b);
            let d = two_segment_rhs(&sys.params, &s, u);
            Some(Arrow {
                x_a,
                x_b,
                dx_a: d.x_a,
                dx_b: d.x_b,
            })
        })
        .collect();

    let trajectories = match bundle {
        None => Vec::new(),
        Some(cfg) => grid
            .corners()
            .par_iter()
            .map(|&(x_a, x_b)| {
                let (x_l, x_s) = slaving
                    .resolve(sys, x_a, x_b)
                    .or_else(|| Slaving::Diagonal.resolve(sys, x_a, x_b))
                    .unwrap_or((0.0, 0.0));
                integrate(sys, &[x_l, x_a, x_b, x_s], cfg)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(PhaseField { arrows, trajectories })
}
