//! Fluid (epidemic) model of a two-segment file-sharing swarm.
//!
//! The crate is organised in layers:
//!
//! * [`model`]: parameters, states, dissemination policies and the
//!   right-hand sides of the one- and two-segment systems.
//! * [`ode`]: RK4 / Dormand-Prince integration, steady-state detection and
//!   phase-field sampling.
//! * [`equilibrium`]: closed-form and quartic-based stationary points,
//!   discriminant bounds and Little's-law sojourn times.
//! * [`control`]: direct single-shooting solver for the terminal-cost
//!   problem `min x_l(T) + x_a(T) + x_b(T)`.
//! * [`lumped`]: the rare-segment / lumped-segment reading of the model,
//!   including the two uplink classes with choking.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod equilibrium;
mod error;
pub mod lumped;
pub mod model;
pub mod newton;
pub mod ode;

pub use error::{Error, Result};
pub use model::{ControlPolicy, ParamWarning, SeederLifetimeParams, SwarmParams, SwarmState};
pub use ode::{IntegratorConfig, Method, Trajectory};
