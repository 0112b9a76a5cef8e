use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use swarmdyn::control::{evaluate_objective, solve_mayer, OcSolution};
use swarmdyn::equilibrium::{
    continuous_control_equilibria, discriminant_lambda_bounds, discriminant_quadratic, half_control_equilibrium,
    lambda_s_midpoint, littles_sojourn, u1_equilibrium, DiscriminantParams, EquilibriumSet,
};
use swarmdyn::lumped::{
    lumped_sojourn, lumped_symmetric_equilibrium, steady_sojourn, sweep_delay_vs_u, unit_grid, LumpedModel,
    SweepConfig, SweepPoint,
};
use swarmdyn::model::{one_segment_equilibrium, Control, OneSegmentSystem, TwoSegmentSystem};
use swarmdyn::ode::{integrate, phase_field, residual, Dynamics, PhaseField};
use swarmdyn::{ControlPolicy, SwarmParams, SwarmState, Trajectory};

use crate::output::{num, opt_num, write_csv, write_json, Format};
use crate::scenario::{ModelSpec, Scenario, SweepSpec};
use crate::CliError;

/// A loaded scenario plus where and how to write results.
#[derive(Debug, Clone)]
pub struct Run {
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    pub format: Format,
}

impl Run {
    pub fn new(scenario: Scenario, out_dir: Option<PathBuf>, format: Format) -> Run {
        let out_dir = out_dir.unwrap_or_else(|| scenario.output.dir.clone());
        Run {
            scenario,
            out_dir,
            format,
        }
    }

    fn path(&self, what: &str, ext: &str) -> PathBuf {
        self.out_dir.join(format!("{}_{what}.{ext}", self.scenario.name()))
    }

    fn system(&self) -> Box<dyn Dynamics> {
        let policy = self.scenario.controller();
        match &self.scenario.model {
            ModelSpec::OneSegment(p) => Box::new(OneSegmentSystem { params: *p }),
            ModelSpec::TwoSegment(p) => Box::new(TwoSegmentSystem::new(*p, policy)),
            m => m.lumped().expect("lumped-family model").system(policy),
        }
    }

    fn write_trajectory(&self, what: &str, traj: &Trajectory) -> Result<PathBuf, CliError> {
        let columns = self.scenario.model.columns();
        match self.format {
            Format::Csv => {
                let path = self.path(what, "csv");
                crate::output::write_atomic(&path, |w| traj.write_csv(w, columns).map_err(std::io::Error::from))
            }
            Format::Json => write_json(
                &self.path(what, "json"),
                &json!({ "columns": columns, "trajectory": traj }),
            ),
        }
    }
}

/// Integrates the scenario's model under its controller.
pub fn simulate(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let sys = run.system();
    let traj = integrate(sys.as_ref(), &run.scenario.initial_state(), &run.scenario.integrator)
        .map_err(CliError::compute("simulate"))?;
    Ok(vec![run.write_trajectory("trajectory", &traj)?])
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumRow {
    pub label: String,
    pub state: Vec<f64>,
    pub sojourn: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub model: &'static str,
    pub columns: &'static [&'static str],
    pub points: Vec<EquilibriumRow>,
    /// Quartic invariants, root classification and discriminant bounds
    /// (two-segment only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<serde_json::Value>,
}

fn row(label: &str, state: Vec<f64>, sojourn: f64, residual: f64) -> EquilibriumRow {
    EquilibriumRow {
        label: label.into(),
        state,
        sojourn,
        residual,
        stability: None,
    }
}

fn two_segment_report(p: &SwarmParams) -> Result<(Vec<EquilibriumRow>, serde_json::Value), CliError> {
    let mut rows = Vec::new();
    let fixed = |label: &str, s: SwarmState, u: f64| {
        let sys = TwoSegmentSystem::new(*p, ControlPolicy::constant(u));
        row(
            label,
            s.to_array().to_vec(),
            littles_sojourn(&s, p.lambda_l),
            residual(&sys, 0.0, &s.to_array()),
        )
    };
    rows.push(fixed("half-control", half_control_equilibrium(p), 0.5));
    rows.push(fixed("u-one", u1_equilibrium(p), 1.0));

    let set: EquilibriumSet = continuous_control_equilibria(p).map_err(CliError::compute("equilibria"))?;
    let tagged = std::iter::once(("continuous-diagonal", &set.on_diagonal))
        .chain(set.off_diagonal.iter().map(|pt| ("continuous-off-diagonal", pt)));
    for (label, pt) in tagged {
        let mut r = row(label, pt.state.to_array().to_vec(), pt.sojourn, pt.residual);
        r.stability = Some(format!("{:?}", pt.stability.kind).to_lowercase());
        rows.push(r);
    }

    let d = DiscriminantParams::from_swarm(p);
    let (lambda_0, lambda_1) = discriminant_lambda_bounds(&d);
    let analysis = json!({
        "invariants": set.invariants,
        "classification": set.classification,
        "quartic_roots": set.quartic_roots,
        "off_diagonal_count": set.off_diagonal.len(),
        "stability": {
            "continuous_diagonal": set.on_diagonal.stability,
            "continuous_off_diagonal": set.off_diagonal.iter().map(|pt| &pt.stability).collect::<Vec<_>>(),
        },
        "bounds": {
            "eta": d.eta,
            "xi": d.xi,
            "in_regime": d.in_regime(),
            "lambda_0": lambda_0,
            "lambda_1": lambda_1,
            "midpoint": lambda_s_midpoint(&d),
            "lambda_s": p.lambda_s,
            "discriminant_sign": discriminant_quadratic(&d, p.lambda_s).signum(),
        },
    });
    Ok((rows, analysis))
}

fn lumped_report(run: &Run, model: &LumpedModel) -> Result<Vec<EquilibriumRow>, CliError> {
    let mut rows = Vec::new();
    if let LumpedModel::Single(p) = model {
        if let Ok(e) = lumped_symmetric_equilibrium(p) {
            let sys = model.system(ControlPolicy::HALF);
            let x = e.to_array();
            rows.push(row(
                "symmetric",
                x.to_vec(),
                lumped_sojourn(&e, p.lambda_l),
                residual(sys.as_ref(), 0.0, &x),
            ));
        }
    }
    let cfg = SweepConfig {
        initial: run.scenario.initial.clone().unwrap_or_default(),
        ..SweepConfig::default()
    };
    let pt = steady_sojourn(model, run.scenario.controller(), &cfg).map_err(CliError::compute("steady state"))?;
    if !pt.converged {
        log::warn!("controller steady state not converged (residual {:e})", pt.residual);
    }
    rows.push(row("controller", pt.state, pt.sojourn, pt.residual));
    if let (Some(hi), Some(lo)) = (pt.sojourn_hi, pt.sojourn_lo) {
        let last = rows.last().cloned().expect("row just pushed");
        rows.push(EquilibriumRow {
            label: "controller-hi".into(),
            sojourn: hi,
            ..last.clone()
        });
        rows.push(EquilibriumRow {
            label: "controller-lo".into(),
            sojourn: lo,
            ..last
        });
    }
    Ok(rows)
}

pub fn equilibrium_report(run: &Run) -> Result<EquilibriumReport, CliError> {
    let model = &run.scenario.model;
    let (points, analysis) = match model {
        ModelSpec::OneSegment(p) => {
            let (x_l, x_s) = one_segment_equilibrium(p);
            let sys = OneSegmentSystem { params: *p };
            (
                vec![row(
                    "one-segment",
                    vec![x_l, x_s],
                    x_l / p.lambda_l,
                    residual(&sys, 0.0, &[x_l, x_s]),
                )],
                None,
            )
        }
        ModelSpec::TwoSegment(p) => {
            let (rows, a) = two_segment_report(p)?;
            (rows, Some(a))
        }
        m => (lumped_report(run, &m.lumped().expect("lumped-family model"))?, None),
    };
    Ok(EquilibriumReport {
        model: model.kind(),
        columns: model.columns(),
        points,
        analysis,
    })
}

/// Stationary points and, for the two-segment model, the off-diagonal
/// analysis.
pub fn equilibria(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let report = equilibrium_report(run)?;
    let path = match run.format {
        Format::Json => write_json(&run.path("equilibria", "json"), &report)?,
        Format::Csv => {
            let mut header = vec!["label"];
            header.extend_from_slice(report.columns);
            header.extend(["sojourn", "residual", "stability"]);
            let rows: Vec<Vec<String>> = report
                .points
                .iter()
                .map(|r| {
                    let mut v = vec![r.label.clone()];
                    v.extend(r.state.iter().map(|x| num(*x)));
                    v.extend([num(r.sojourn), num(r.residual), r.stability.clone().unwrap_or_default()]);
                    v
                })
                .collect();
            write_csv(&run.path("equilibria", "csv"), &header, &rows)?
        }
    };
    Ok(vec![path])
}

/// One row of a seeder-arrival sweep.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaRow {
    pub lambda_s: f64,
    pub lambda_l: f64,
    pub delta: f64,
    /// Sign carrier of the quartic discriminant.
    pub discriminant: f64,
    pub classification: String,
    pub off_diagonal: usize,
    pub sojourn_diagonal: f64,
    pub sojourn_off_diagonal: Option<f64>,
}

pub fn lambda_s_sweep(p: &SwarmParams, from: f64, to: f64, points: usize) -> Result<Vec<LambdaRow>, CliError> {
    if points == 0 {
        return Err(CliError::Usage("sweep grid is empty".into()));
    }
    let d = DiscriminantParams::from_swarm(p);
    let step = if points > 1 {
        (to - from) / (points - 1) as f64
    } else {
        0.0
    };
    use rayon::prelude::*;
    (0..points)
        .into_par_iter()
        .map(|i| {
            let lambda_s = if i + 1 == points { to } else { from + step * i as f64 };
            let q = d.swarm_params(lambda_s, p.beta0);
            let set = continuous_control_equilibria(&q).map_err(CliError::compute(format!("lambda_s = {lambda_s}")))?;
            Ok(LambdaRow {
                lambda_s,
                lambda_l: q.lambda_l,
                delta: q.delta,
                discriminant: discriminant_quadratic(&d, lambda_s),
                classification: serde_json::to_value(set.classification)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default(),
                off_diagonal: set.off_diagonal.len(),
                sojourn_diagonal: set.on_diagonal.sojourn,
                sojourn_off_diagonal: set.off_diagonal.first().map(|pt| pt.sojourn),
            })
        })
        .collect()
}

fn u_grid(points: Option<usize>, values: &Option<Vec<f64>>) -> Result<Vec<f64>, CliError> {
    let grid = match (values, points) {
        (Some(v), _) => v.clone(),
        (None, Some(0)) => Vec::new(),
        (None, Some(1)) => vec![0.5],
        (None, Some(n)) => unit_grid(n - 1),
        (None, None) => unit_grid(10),
    };
    if grid.is_empty() {
        return Err(CliError::Usage("sweep grid is empty".into()));
    }
    Ok(grid)
}

pub fn u_sweep(run: &Run) -> Result<Vec<SweepPoint>, CliError> {
    let Some(SweepSpec::U {
        points,
        values,
        rarest_reference,
        solver,
    }) = &run.scenario.sweep
    else {
        return Err(CliError::Usage("scenario has no u sweep".into()));
    };
    let model = run
        .scenario
        .model
        .lumped()
        .ok_or_else(|| CliError::Usage("a u sweep needs a lumped or two-class model".into()))?;
    let grid = u_grid(*points, values)?;
    let mut cfg = solver.clone();
    if cfg.initial.is_empty() {
        cfg.initial = run.scenario.initial.clone().unwrap_or_default();
    }
    let mut curve = sweep_delay_vs_u(&model, &grid, &cfg).map_err(CliError::compute("sweep"))?;
    if *rarest_reference {
        let pt = steady_sojourn(&model, ControlPolicy::ContinuousRarest, &cfg).map_err(CliError::compute("sweep"))?;
        curve.push(pt);
    }
    Ok(curve)
}

/// Delay-vs-u curves for the lumped models; equilibrium structure against
/// the seeder arrival rate for the two-segment model.
pub fn sweep(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let spec = run
        .scenario
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario has no [sweep] table".into()))?;
    let path = match spec {
        SweepSpec::U { .. } => {
            let curve = u_sweep(run)?;
            for p in curve.iter().filter(|p| !p.converged) {
                log::warn!("u = {:?} not converged (residual {:e})", p.u, p.residual);
            }
            match run.format {
                Format::Json => write_json(&run.path("sweep", "json"), &curve)?,
                Format::Csv => {
                    let mut header = vec!["u", "sojourn", "sojourn_hi", "sojourn_lo", "converged", "residual"];
                    header.extend_from_slice(run.scenario.model.columns());
                    let rows: Vec<Vec<String>> = curve
                        .iter()
                        .map(|p| {
                            let mut v = vec![
                                opt_num(p.u),
                                num(p.sojourn),
                                opt_num(p.sojourn_hi),
                                opt_num(p.sojourn_lo),
                                p.converged.to_string(),
                                num(p.residual),
                            ];
                            v.extend(p.state.iter().map(|x| num(*x)));
                            v
                        })
                        .collect();
                    write_csv(&run.path("sweep", "csv"), &header, &rows)?
                }
            }
        }
        SweepSpec::LambdaS { from, to, points } => {
            let p = run.scenario.swarm_params("sweep (lambda-s)")?;
            let table = lambda_s_sweep(&p, *from, *to, *points)?;
            match run.format {
                Format::Json => write_json(&run.path("lambda_s_sweep", "json"), &table)?,
                Format::Csv => {
                    let header = [
                        "lambda_s",
                        "lambda_l",
                        "delta",
                        "discriminant",
                        "classification",
                        "off_diagonal",
                        "sojourn_diagonal",
                        "sojourn_off_diagonal",
                    ];
                    let rows: Vec<Vec<String>> = table
                        .iter()
                        .map(|r| {
                            vec![
                                num(r.lambda_s),
                                num(r.lambda_l),
                                num(r.delta),
                                num(r.discriminant),
                                r.classification.clone(),
                                r.off_diagonal.to_string(),
                                num(r.sojourn_diagonal),
                                opt_num(r.sojourn_off_diagonal),
                            ]
                        })
                        .collect();
                    write_csv(&run.path("lambda_s_sweep", "csv"), &header, &rows)?
                }
            }
        }
    };
    Ok(vec![path])
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeSummary {
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub start: usize,
    pub start_objectives: Vec<f64>,
    pub baselines: Baselines,
}

#[derive(Debug, Clone, Serialize)]
pub struct Baselines {
    pub half: f64,
    pub continuous_rarest: f64,
    pub bang_bang: f64,
}

pub fn optimize_solution(run: &Run) -> Result<(OcSolution, OptimizeSummary), CliError> {
    let prob = run.scenario.oc_problem()?;
    let cfg = &run.scenario.optimize.as_ref().expect("checked by oc_problem").solver;
    let sol = solve_mayer(&prob, cfg).map_err(CliError::compute("optimize"))?;
    if !sol.converged {
        log::warn!(
            "optimizer stopped after {} iterations without converging",
            sol.iterations
        );
    }
    let baseline = |policy: ControlPolicy| {
        evaluate_objective(
            &prob.params,
            &prob.x0,
            &Control::Policy(policy),
            prob.horizon,
            &run.scenario.integrator,
        )
        .map_err(CliError::compute("baseline"))
    };
    let summary = OptimizeSummary {
        objective: sol.objective,
        converged: sol.converged,
        iterations: sol.iterations,
        start: sol.start,
        start_objectives: sol.start_objectives.clone(),
        baselines: Baselines {
            half: baseline(ControlPolicy::HALF)?,
            continuous_rarest: baseline(ControlPolicy::ContinuousRarest)?,
            bang_bang: baseline(ControlPolicy::bang_bang())?,
        },
    };
    Ok((sol, summary))
}

/// Open-loop optimal control of the terminal leecher mass.
pub fn optimize(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let (sol, summary) = optimize_solution(run)?;
    let mut written = Vec::new();
    match run.format {
        Format::Csv => {
            let h = run.scenario.optimize.as_ref().expect("present").horizon / sol.u_grid.len() as f64;
            let rows: Vec<Vec<String>> = sol
                .u_grid
                .iter()
                .enumerate()
                .map(|(k, u)| vec![num(k as f64 * h), num((k + 1) as f64 * h), num(*u)])
                .collect();
            written.push(write_csv(
                &run.path("control", "csv"),
                &["t_start", "t_end", "u"],
                &rows,
            )?);
            written.push(run.write_trajectory("optimal_trajectory", &sol.trajectory)?);
        }
        Format::Json => written.push(write_json(&run.path("solution", "json"), &sol)?),
    }
    written.push(write_json(&run.path("summary", "json"), &summary)?);
    Ok(written)
}

pub fn field(run: &Run) -> Result<PhaseField, CliError> {
    let p = run.scenario.swarm_params("phase-field")?;
    let spec = run
        .scenario
        .phase_field
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario has no [phase_field] table".into()))?;
    spec.grid
        .validate()
        .map_err(|e| CliError::Usage(format!("phase grid: {e}")))?;
    let sys = TwoSegmentSystem::new(p, run.scenario.controller());
    let bundle = spec.trajectories.then_some(&run.scenario.integrator);
    phase_field(&sys, &spec.grid, &spec.slaving, bundle).map_err(CliError::compute("phase field"))
}

/// Arrows on the `(x_a, x_b)` grid plus trajectories from its corners.
pub fn phase(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let f = field(run)?;
    let mut written = Vec::new();
    match run.format {
        Format::Json => written.push(write_json(&run.path("phase_field", "json"), &f)?),
        Format::Csv => {
            let rows: Vec<Vec<String>> = f
                .arrows
                .iter()
                .map(|a| vec![num(a.x_a), num(a.x_b), num(a.dx_a), num(a.dx_b)])
                .collect();
            written.push(write_csv(
                &run.path("arrows", "csv"),
                &["x_a", "x_b", "dx_a", "dx_b"],
                &rows,
            )?);
            if !f.trajectories.is_empty() {
                let mut header = vec!["corner", "t"];
                header.extend_from_slice(run.scenario.model.columns());
                let rows: Vec<Vec<String>> = f
                    .trajectories
                    .iter()
                    .enumerate()
                    .flat_map(|(k, tr)| {
                        tr.times.iter().zip(&tr.states).map(move |(t, s)| {
                            let mut v = vec![k.to_string(), num(*t)];
                            v.extend(s.iter().map(|x| num(*x)));
                            v
                        })
                    })
                    .collect();
                written.push(write_csv(&run.path("trajectories", "csv"), &header, &rows)?);
            }
        }
    }
    Ok(written)
}

/// Reads a scenario from disk; the `--scenario` entry point.
pub fn load(path: &Path, out_dir: Option<PathBuf>, format: Format) -> Result<Run, CliError> {
    Ok(Run::new(Scenario::load(path)?, out_dir, format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_grid_choices() {
        assert_eq!(u_grid(None, &None).unwrap().len(), 11);
        assert_eq!(u_grid(Some(1), &None).unwrap(), [0.5]);
        assert_eq!(u_grid(Some(3), &None).unwrap(), [0.0, 0.5, 1.0]);
        assert_eq!(u_grid(Some(3), &Some(vec![0.2])).unwrap(), [0.2]);
        assert!(matches!(u_grid(Some(0), &None), Err(CliError::Usage(_))));
    }
}
