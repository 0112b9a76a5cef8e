use proptest::prelude::*;

use swarmdyn::equilibrium::half_control_equilibrium;
use swarmdyn::lumped::{
    lumped_rhs, lumped_sojourn, lumped_symmetric_equilibrium, steady_sojourn, sweep_delay_vs_u, two_class_rhs,
    unit_grid, ChokingMode, ClassRates, LumpedModel, LumpedParams, LumpedState, SweepConfig, TwoClassParams,
    TwoClassState,
};
use swarmdyn::{ControlPolicy, SwarmParams};

fn lumped_base() -> LumpedParams {
    LumpedParams::new(1.0, 1.0, 1.0, 0.01, 0.1).unwrap()
}

fn two_class(delta_lo: f64, delta_hi: f64) -> TwoClassParams {
    TwoClassParams {
        beta_r: 1.0,
        beta_n1: 1.0,
        hi: ClassRates {
            lambda_l: 1.0,
            lambda_s: 0.01,
            delta: delta_hi,
        },
        lo: ClassRates {
            lambda_l: 10.0,
            lambda_s: 0.1,
            delta: delta_lo,
        },
    }
}

#[test]
fn reduces_to_two_segment_steady_state() {
    for (b, ll, ls, d) in [(1.0, 1.0, 0.01, 0.1), (2.0, 4.0, 1.0, 2.0), (0.5, 3.0, 0.7, 1.2)] {
        let lp = LumpedParams::new(b, b, ll, ls, d).unwrap();
        let sp = SwarmParams::new(1.0, b, b, ll, ls, d).unwrap();
        let l = lumped_symmetric_equilibrium(&lp).unwrap();
        let s = half_control_equilibrium(&sp);
        for (x, y) in [(l.x_l, s.x_l), (l.x_r, s.x_a), (l.x_n1, s.x_b), (l.x_s, s.x_s)] {
            assert!((x - y).abs() < 1e-8, "{l:?} vs {s:?}");
        }
        let swept = steady_sojourn(
            &LumpedModel::Single(lp),
            ControlPolicy::constant(0.5),
            &SweepConfig::default(),
        )
        .unwrap();
        assert!(swept.converged);
        for (x, y) in swept.state.iter().zip(l.to_array()) {
            assert!((x - y).abs() < 1e-8, "{:?} vs {l:?}", swept.state);
        }
    }
}

#[test]
fn vanishing_seeder_arrivals_limit() {
    let p = LumpedParams::new(1.0, 1.0, 1.0, 1e-300, 1.0).unwrap();
    let e = lumped_symmetric_equilibrium(&p).unwrap();
    assert!((e.x_r - (3.0f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
}

#[test]
fn continuous_rarest_matches_half_control_sojourn() {
    let model = LumpedModel::Single(lumped_base());
    let cfg = SweepConfig {
        initial: vec![0.5, 0.01, 0.2, 1.0],
        ..SweepConfig::default()
    };
    let rarest = steady_sojourn(&model, ControlPolicy::ContinuousRarest, &cfg).unwrap();
    let half = steady_sojourn(&model, ControlPolicy::constant(0.5), &cfg).unwrap();
    assert!(rarest.converged && half.converged);
    assert!((rarest.sojourn / half.sojourn - 1.0).abs() < 0.02);
    let e = lumped_symmetric_equilibrium(&lumped_base()).unwrap();
    assert!((half.sojourn - lumped_sojourn(&e, 1.0)).abs() < 1e-10);
}

#[test]
fn lumped_curve_is_positive_and_symmetric_in_u() {
    let curve = sweep_delay_vs_u(
        &LumpedModel::Single(lumped_base()),
        &unit_grid(10),
        &SweepConfig::default(),
    )
    .unwrap();
    assert_eq!(curve.len(), 11);
    for p in &curve {
        assert!(p.converged && p.sojourn.is_finite() && p.sojourn > 0.0, "{p:?}");
    }
    // With equal rates the rare and lumped classes are interchangeable.
    for i in 0..curve.len() {
        let (a, b) = (&curve[i], &curve[curve.len() - 1 - i]);
        assert!((a.sojourn - b.sojourn).abs() < 1e-9, "{} vs {}", a.sojourn, b.sojourn);
    }
}

// First-run values of the aggregate and hi-class sojourns on u = 0, 0.1, ..., 1.
const FAST_SEEDERS: [(f64, f64); 11] = [
    (0.585494055626, 0.585494055626),
    (0.566256655303, 0.572855073852),
    (0.545587583137, 0.560283165389),
    (0.522896323625, 0.547932564516),
    (0.496889821010, 0.536284718934),
    (0.467118769909, 0.530961587630),
    (0.495776603883, 0.546977947800),
    (0.521969238228, 0.558108850840),
    (0.544939560542, 0.567881085277),
    (0.565924513864, 0.576932580669),
    (0.585494055626, 0.585494055626),
];

const SLOW_SEEDERS: [(f64, f64); 11] = [
    (0.097710372412, 0.097710372412),
    (0.097501263604, 0.097587847989),
    (0.097338468738, 0.097492599418),
    (0.097222076723, 0.097424625926),
    (0.097152158921, 0.097383916859),
    (0.097128769030, 0.097370451664),
    (0.097151942995, 0.097384199886),
    (0.097221698949, 0.097425121179),
    (0.097338037178, 0.097493165337),
    (0.097500940126, 0.097588272340),
    (0.097710372412, 0.097710372412),
];

fn two_class_curve(delta_lo: f64, delta_hi: f64) -> Vec<(f64, f64)> {
    let model = LumpedModel::TwoClass {
        params: two_class(delta_lo, delta_hi),
        mode: ChokingMode::Choked,
    };
    sweep_delay_vs_u(&model, &unit_grid(10), &SweepConfig::default())
        .unwrap()
        .into_iter()
        .map(|p| {
            assert!(p.converged, "{p:?}");
            (p.sojourn, p.sojourn_hi.unwrap())
        })
        .collect()
}

#[test]
fn two_class_curves_match_snapshots() {
    for (curve, snap) in [
        (two_class_curve(9.0, 0.9), FAST_SEEDERS),
        (two_class_curve(1.0, 0.1), SLOW_SEEDERS),
    ] {
        for ((a, h), (sa, sh)) in curve.iter().zip(snap) {
            assert!((a - sa).abs() < 1e-9 && (h - sh).abs() < 1e-9, "{curve:?}");
        }
    }
}

#[test]
fn two_class_curves_differ_in_shape() {
    let depth = |c: &[(f64, f64)]| {
        let lo = c.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|p| p.1).fold(0.0, f64::max);
        lo / hi
    };
    let (five, six) = (two_class_curve(9.0, 0.9), two_class_curve(1.0, 0.1));
    // Fast-departing seeders make the balanced policy far more valuable.
    assert!(depth(&five) < 0.92);
    assert!(depth(&six) > 0.99);
}

#[test]
fn choked_class_stays_unchanged_by_other_class_when_empty() {
    let p = TwoClassParams {
        hi: ClassRates {
            lambda_l: 0.0,
            lambda_s: 0.0,
            delta: 0.9,
        },
        ..two_class(9.0, 0.9)
    };
    let s = TwoClassState {
        hi: LumpedState::default(),
        lo: LumpedState::new(0.4, 0.2, 0.3, 1.1),
    };
    let single = LumpedParams {
        lambda_l: 10.0,
        lambda_s: 0.1,
        delta: 9.0,
        beta_r: 1.0,
        beta_n1: 1.0,
    };
    for mode in [ChokingMode::Choked, ChokingMode::Symmetrized] {
        let d = two_class_rhs(&p, &s, 0.3, mode);
        assert_eq!(d.hi.to_array(), [0.0; 4]);
        let e = lumped_rhs(&single, &s.lo, 0.3);
        for (a, b) in d.lo.to_array().iter().zip(e.to_array()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}

fn pop() -> impl Strategy<Value = f64> {
    0.0..10.0f64
}

proptest! {
    #[test]
    fn equal_rates_match_two_segment_rhs(
        l in pop(), r in pop(), n in pop(), s in pop(), b in 0.1..3.0f64,
    ) {
        let lp = LumpedParams::new(b, b, 2.0, 0.5, 1.5).unwrap();
        let sp = SwarmParams::new(1.0, b, b, 2.0, 0.5, 1.5).unwrap();
        let d = lumped_rhs(&lp, &LumpedState::new(l, r, n, s), 0.5);
        let e = swarmdyn::model::two_segment_rhs(&sp, &swarmdyn::SwarmState::new(l, r, n, s), 0.5);
        for (x, y) in d.to_array().iter().zip(e.to_array()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn leecher_counts_add_up(
        x in prop::array::uniform8(pop()), u in 0.0..=1.0f64, br in 0.1..2.0f64, bn in 0.1..2.0f64,
    ) {
        let p = TwoClassParams { beta_r: br, beta_n1: bn, ..two_class(9.0, 0.9) };
        let s = TwoClassState::from_slice(&x);
        let agg = s.aggregate();
        let single = LumpedParams { beta_r: br, beta_n1: bn, lambda_l: 11.0, lambda_s: 0.11, delta: 1.0 };
        let expect = lumped_rhs(&single, &agg, u).x_l;
        for mode in [ChokingMode::Choked, ChokingMode::Symmetrized] {
            let d = two_class_rhs(&p, &s, u, mode);
            prop_assert!((d.hi.x_l + d.lo.x_l - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn unchoking_only_adds_transactions(
        x in prop::array::uniform8(pop()), u in 0.0..=1.0f64, br in 0.1..2.0f64, bn in 0.1..2.0f64,
    ) {
        let p = TwoClassParams { beta_r: br, beta_n1: bn, ..two_class(9.0, 0.9) };
        let s = TwoClassState::from_slice(&x);
        let agg = s.aggregate();
        let c = two_class_rhs(&p, &s, u, ChokingMode::Choked);
        let y = two_class_rhs(&p, &s, u, ChokingMode::Symmetrized);
        // A hi-class rare holder also swaps with lo-class lumped holders, and
        // a lo-class lumped holder with hi-class rare holders.
        let extra_hi = br * (agg.x_n1 - s.hi.x_n1) * s.hi.x_r;
        let extra_lo = br * (agg.x_r - s.lo.x_r) * s.lo.x_n1;
        let tol = 1e-12 * (1.0 + extra_hi + extra_lo);
        prop_assert!(extra_hi >= 0.0 && extra_lo >= 0.0);
        prop_assert!((c.hi.x_r - y.hi.x_r - extra_hi).abs() <= tol);
        prop_assert!((y.hi.x_s - c.hi.x_s - extra_hi).abs() <= tol);
        prop_assert!((c.lo.x_n1 - y.lo.x_n1 - extra_lo).abs() <= tol);
        prop_assert!((y.lo.x_s - c.lo.x_s - extra_lo).abs() <= tol);
        for (a, b) in [(c.hi.x_l, y.hi.x_l), (c.hi.x_n1, y.hi.x_n1), (c.lo.x_l, y.lo.x_l), (c.lo.x_r, y.lo.x_r)] {
            prop_assert_eq!(a, b);
        }
    }
}
