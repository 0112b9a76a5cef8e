//! Scenario files: one TOML document per experiment.
//!
//! ```toml
//! schema_version = 1
//! name = "bang_bang"
//! initial = [1.0, 0.2, 1.0, 0.5]
//!
//! [model]
//! kind = "two-segment"
//! beta0 = 1.0
//! beta = 2.0
//! gamma = 3.0
//! lambda_l = 4.0
//! lambda_s = 1.0
//! delta = 2.0
//!
//! [controller]
//! kind = "bang_bang"
//!
//! [integrator]
//! t_end = 60.0
//! ```
//!
//! Optional `[optimize]`, `[sweep]` and `[phase_field]` tables configure the
//! commands of the same name.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use swarmdyn::control::{OcProblem, OptConfig};
use swarmdyn::lumped::{ChokingMode, LumpedModel, LumpedParams, SweepConfig, TwoClassParams};
use swarmdyn::ode::{PhaseGrid, Slaving};
use swarmdyn::{ControlPolicy, IntegratorConfig, ParamWarning, SwarmParams, SwarmState};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    /// Prefix of every output file; defaults to the scenario file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Initial populations in the model's state order; all zeros if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    pub model: ModelSpec,
    /// Defaults to `u = 1/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControlPolicy>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_field: Option<PhaseFieldSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    OneSegment(SwarmParams),
    TwoSegment(SwarmParams),
    Lumped(LumpedParams),
    TwoClass {
        #[serde(default)]
        mode: ChokingMode,
        params: TwoClassParams,
    },
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::OneSegment(_) => 2,
            ModelSpec::TwoSegment(_) | ModelSpec::Lumped(_) => 4,
            ModelSpec::TwoClass { .. } => 8,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::OneSegment(_) => "one-segment",
            ModelSpec::TwoSegment(_) => "two-segment",
            ModelSpec::Lumped(_) => "lumped",
            ModelSpec::TwoClass { .. } => "two-class",
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            ModelSpec::OneSegment(_) => &["x_l", "x_s"],
            ModelSpec::TwoSegment(_) => &["x_l", "x_a", "x_b", "x_s"],
            ModelSpec::Lumped(_) => &["x_l", "x_r", "x_n1", "x_s"],
            ModelSpec::TwoClass { .. } => &[
                "x_l_lo", "x_l_hi", "x_r_lo", "x_r_hi", "x_n1_lo", "x_n1_hi", "x_s_lo", "x_s_hi",
            ],
        }
    }

    /// The lumped-choking view of the model, if it has one.
    pub fn lumped(&self) -> Option<LumpedModel> {
        match *self {
            ModelSpec::Lumped(p) => Some(LumpedModel::Single(p)),
            ModelSpec::TwoClass { mode, params } => Some(LumpedModel::TwoClass { params, mode }),
            _ => None,
        }
    }

    fn validate(&self) -> swarmdyn::Result<Vec<ParamWarning>> {
        match self {
            ModelSpec::OneSegment(p) | ModelSpec::TwoSegment(p) => p.validate(),
            ModelSpec::Lumped(p) => p.validate(),
            ModelSpec::TwoClass { params, .. } => params.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    pub horizon: f64,
    pub n_intervals: usize,
    #[serde(default)]
    pub solver: OptConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SweepSpec {
    /// Steady-state sojourn against a constant control.
    U {
        /// Evenly spaced grid over `[0, 1]` with this many points.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<usize>,
        /// Explicit grid; takes precedence over `points`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
        /// Append the closed-loop continuous rarest-first steady state as a
        /// row without `u`.
        #[serde(default)]
        rarest_reference: bool,
        #[serde(default)]
        solver: SweepConfig,
    },
    /// Equilibrium structure as the seeder arrival rate moves with
    /// `lambda_l / delta` and `delta / lambda_s` held at the model's values.
    LambdaS { from: f64, to: f64, points: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseFieldSpec {
    pub grid: PhaseGrid,
    #[serde(default)]
    pub slaving: Slaving,
    /// Also integrate from each grid corner.
    #[serde(default = "yes")]
    pub trajectories: bool,
}

fn yes() -> bool {
    true
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut s = Scenario::parse(&text).map_err(|message| CliError::ConfigParse {
            path: path.to_path_buf(),
            message,
        })?;
        if s.name.is_none() {
            s.name = path.file_stem().map(|n| n.to_string_lossy().into_owned());
        }
        Ok(s)
    }

    /// Parses and validates a scenario document.
    pub fn parse(text: &str) -> Result<Scenario, String> {
        let s: Scenario = toml::from_str(text).map_err(|e| e.to_string())?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario is always representable as TOML")
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("scenario")
    }

    pub fn controller(&self) -> ControlPolicy {
        self.controller.clone().unwrap_or(ControlPolicy::HALF)
    }

    pub fn initial_state(&self) -> Vec<f64> {
        self.initial.clone().unwrap_or_else(|| vec![0.0; self.model.dim()])
    }

    /// Two-segment rates, or a usage error naming `command`.
    pub fn swarm_params(&self, command: &str) -> Result<SwarmParams, CliError> {
        match self.model {
            ModelSpec::TwoSegment(p) => Ok(p),
            _ => Err(CliError::Usage(format!(
                "`{command}` needs a two-segment model, scenario has {}",
                self.model.kind()
            ))),
        }
    }

    pub fn oc_problem(&self) -> Result<OcProblem, CliError> {
        let params = self.swarm_params("optimize")?;
        let spec = self
            .optimize
            .as_ref()
            .ok_or_else(|| CliError::Usage("scenario has no [optimize] table".into()))?;
        let x0 = SwarmState::from_slice(&self.initial_state()).map_err(CliError::compute("initial state"))?;
        Ok(OcProblem {
            params,
            x0,
            horizon: spec.horizon,
            n_intervals: spec.n_intervals,
        })
    }

    fn validate(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let text = |e: swarmdyn::Error| e.to_string();
        for w in self.model.validate().map_err(text)? {
            log::warn!("{w:?}");
        }
        self.controller().validate().map_err(text)?;
        self.integrator.validate().map_err(text)?;
        if let Some(x) = &self.initial {
            if x.len() != self.model.dim() {
                return Err(format!(
                    "initial has {} values, the {} model has {}",
                    x.len(),
                    self.model.kind(),
                    self.model.dim()
                ));
            }
            if let Some(v) = x.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                return Err(format!("initial populations must be finite and nonnegative, got {v}"));
            }
        }
        if let Some(o) = &self.optimize {
            o.solver.validate().map_err(text)?;
            if let ModelSpec::TwoSegment(params) = self.model {
                let x0 = SwarmState::from_slice(&self.initial_state()).map_err(text)?;
                OcProblem {
                    params,
                    x0,
                    horizon: o.horizon,
                    n_intervals: o.n_intervals,
                }
                .validate()
                .map_err(text)?;
            }
        }
        if let Some(SweepSpec::LambdaS { from, to, .. }) = &self.sweep {
            if !(*from > 0.0 && *to > 0.0 && from.is_finite() && to.is_finite()) {
                return Err("lambda_s sweep bounds must be positive".into());
            }
        }
        Ok(())
    }
}
