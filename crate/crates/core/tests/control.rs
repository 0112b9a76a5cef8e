use std::sync::OnceLock;

use swarmdyn::control::{evaluate_objective, solve_mayer, OcProblem, OcSolution, OptConfig, Start};
use swarmdyn::model::{Control, ControlSchedule};
use swarmdyn::{ControlPolicy, IntegratorConfig, SwarmParams, SwarmState};

fn base_rates() -> SwarmParams {
    SwarmParams::new(1.0, 2.0, 3.0, 4.0, 1.0, 2.0).unwrap()
}

fn problem(n: usize) -> OcProblem {
    OcProblem {
        params: base_rates(),
        x0: SwarmState::new(1.0, 0.2, 1.0, 0.5),
        horizon: 2.0,
        n_intervals: n,
    }
}

fn optimum() -> &'static OcSolution {
    static SOL: OnceLock<OcSolution> = OnceLock::new();
    SOL.get_or_init(|| solve_mayer(&problem(40), &OptConfig::default()).unwrap())
}

fn tight() -> IntegratorConfig {
    IntegratorConfig::rk45(2.0)
        .with_tolerances(1e-12, 1e-14)
        .with_max_step(0.01)
}

fn closed_loop(policy: ControlPolicy) -> f64 {
    let p = problem(40);
    evaluate_objective(&p.params, &p.x0, &Control::Policy(policy), p.horizon, &tight()).unwrap()
}

#[test]
fn closed_loop_objectives_match_reference_integration() {
    // Reference values from an independent high-order integration.
    assert!((closed_loop(ControlPolicy::constant(0.5)) - 1.2909866325).abs() < 1e-8);
    assert!((closed_loop(ControlPolicy::ContinuousRarest) - 1.2923916312).abs() < 1e-8);
    assert!((closed_loop(ControlPolicy::bang_bang()) - 1.2926400600).abs() < 1e-6);
}

#[test]
fn optimum_beats_every_baseline() {
    let sol = optimum();
    assert!((sol.objective - 1.2573668).abs() < 1e-6, "{}", sol.objective);
    for policy in [
        ControlPolicy::constant(0.5),
        ControlPolicy::ContinuousRarest,
        ControlPolicy::bang_bang(),
    ] {
        assert!(sol.objective <= closed_loop(policy) + 1e-6);
    }
    for start in &sol.start_objectives {
        assert!(sol.objective <= start + 1e-12);
    }
    let open_loop = Control::Schedule(sol.schedule(2.0));
    let p = problem(40);
    let check = evaluate_objective(&p.params, &p.x0, &open_loop, 2.0, &tight()).unwrap();
    assert!((check - sol.objective).abs() < 1e-8, "{check} vs {}", sol.objective);
}

#[test]
fn optimum_balances_segments_and_is_nearly_bang_bang() {
    let sol = optimum();
    let end = sol.trajectory.final_state();
    assert!((end[1] - end[2]).abs() < 0.05, "{end:?}");
    assert_eq!(sol.objective, end[0] + end[1] + end[2]);
    let near = sol
        .u_grid
        .iter()
        .filter(|u| [0.0, 0.5, 1.0].iter().any(|c| (*u - c).abs() <= 0.1))
        .count();
    assert!(near * 10 >= sol.u_grid.len() * 9, "{:?}", sol.u_grid);
    assert!(sol.u_grid.iter().all(|u| (0.0..=1.0).contains(u)));
}

#[test]
fn long_horizon_objective_is_equilibrium_mass() {
    let p = base_rates();
    let x0 = SwarmState::new(1.0, 0.2, 1.0, 0.5);
    let mass = 12.0 / 19.0 + 2.0 / 3.0;
    for policy in [
        ControlPolicy::constant(0.5),
        ControlPolicy::ContinuousRarest,
        ControlPolicy::bang_bang(),
    ] {
        let v = evaluate_objective(&p, &x0, &Control::Policy(policy), 60.0, &IntegratorConfig::rk45(60.0)).unwrap();
        assert!((v - mass).abs() < 1e-3, "{v}");
    }
}

#[test]
fn objective_is_nearly_linear_in_each_interval() {
    let prob = problem(40);
    let cfg = IntegratorConfig::rk4(prob.interval_len() / 20.0, 2.0);
    let eval = |u: &[f64]| {
        let s = Control::Schedule(ControlSchedule {
            horizon: 2.0,
            values: u.to_vec(),
        });
        evaluate_objective(&prob.params, &prob.x0, &s, 2.0, &cfg).unwrap()
    };
    let eps = 1e-3;
    let base = vec![0.5; 40];
    let f0 = eval(&base);
    for i in 0..40 {
        let mut up = base.clone();
        up[i] += eps;
        let mut down = base.clone();
        down[i] -= eps;
        let (fp, fm) = (eval(&up), eval(&down));
        let first = (fp - fm).abs();
        let second = (fp - 2.0 * f0 + fm).abs();
        assert!(second * 10.0 <= first, "interval {i}: {first:e} {second:e}");
    }
}

#[test]
fn refining_the_grid_does_not_hurt() {
    let coarse = solve_mayer(&problem(20), &OptConfig::default()).unwrap();
    let fine = optimum();
    assert!(
        fine.objective <= coarse.objective + 1e-8,
        "{} vs {}",
        fine.objective,
        coarse.objective
    );
}

#[test]
fn symmetric_equilibrium_is_left_alone() {
    let prob = OcProblem {
        x0: SwarmState::new(12.0 / 19.0, 1.0 / 3.0, 1.0 / 3.0, 2.5),
        ..problem(10)
    };
    let cfg = OptConfig {
        starts: vec![Start::Half],
        ..OptConfig::default()
    };
    let sol = solve_mayer(&prob, &cfg).unwrap();
    assert!((sol.start_objectives[0] - sol.objective).abs() < 1e-6);
    assert!((sol.objective - (12.0 / 19.0 + 2.0 / 3.0)).abs() < 1e-9);
}
