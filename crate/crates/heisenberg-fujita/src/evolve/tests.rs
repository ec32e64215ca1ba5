use super::*;
use crate::field::{sample, GridGeometry};
use crate::hgroup::{koranyi_norm, GPoint};
use proptest::prelude::*;

fn small_geom() -> GridGeometry {
    GridGeometry::new(3.0, 9.0, 12, 16, true).unwrap()
}

fn bump(a: f64, r: f64, g: &GridGeometry) -> GridField {
    sample(
        |p| {
            let s = koranyi_norm(p) / r;
            if s < 1.0 {
                a * (1.0 - s * s).powi(2)
            } else {
                0.0
            }
        },
        g,
    )
    .unwrap()
}

fn short(gamma: f64, p: f64, horizon: f64) -> EvolveConfig {
    EvolveConfig { gamma, p, t_horizon: horizon, ..Default::default() }
}

fn march(u0: &GridField, cfg: &EvolveConfig, sg: &HeatSemigroup, dt: f64, steps: usize) -> EvolutionState {
    let mut st = EvolutionState::new(u0.clone(), cfg).unwrap();
    for k in 1..=steps {
        st = volterra_step(st, k as f64 * dt, cfg, sg).unwrap();
    }
    st
}

fn max_diff(a: &GridField, b: &GridField) -> f64 {
    a.zip_with(b, |x, y| x - y).unwrap().sup_abs()
}

#[test]
fn time_grids_reject_bad_nodes() {
    assert!(TimeGrid::from_nodes(vec![0.0, 1.0], TimeScheme::Uniform).is_err());
    assert!(TimeGrid::from_nodes(vec![0.5, 0.5], TimeScheme::Uniform).is_err());
    let g = TimeGrid::geometric(0.01, 1.2, 0.1, 1.0).unwrap();
    assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    assert!((g.nodes().last().unwrap() - 1.0).abs() < 1e-12);
    assert!(g.steps().iter().all(|&d| d <= 0.1 + 1e-12));
}

#[test]
fn zero_data_stays_zero() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let cfg = short(0.0, 2.0, 0.5);
    let st = extend_maximal(&GridField::zeros(g), &cfg, &sg).unwrap();
    assert_eq!(st.verdict, Verdict::HorizonReached);
    assert!(st.u.is_zero());
    assert!(st.history.iter().all(|h| h.1 == 0.0));
    let st = march(&GridField::zeros(g), &short(-0.5, 1.5, 1.0), &sg, 0.1, 3);
    assert!(st.u.is_zero());
}

#[test]
fn linear_problem_is_the_semigroup() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let u0 = bump(1.0, 2.0, &g);
    let cfg = EvolveConfig { source_enabled: false, ..short(0.0, 2.0, 1.0) };
    let st = march(&u0, &cfg, &sg, 0.1, 4);
    let direct = (0..4).try_fold(u0.clone(), |u, _| sg.apply(&u, 0.1)).unwrap();
    assert!(max_diff(&st.u, &direct) < 1e-14);
}

#[test]
fn stepping_rejects_backward_times_and_finished_states() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let cfg = short(0.0, 2.0, 1.0);
    let st = EvolutionState::new(bump(1.0, 2.0, &g), &cfg).unwrap();
    assert!(matches!(volterra_step(st.clone(), 0.0, &cfg, &sg), Err(Error::Argument(_))));
    let mut done = st;
    done.verdict = Verdict::HorizonReached;
    assert!(volterra_step(done, 0.1, &cfg, &sg).is_err());
    assert!(EvolutionState::new(bump(-1.0, 2.0, &g), &cfg).is_err());
}

#[test]
fn one_small_step_matches_first_order_expansion() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let u0 = bump(1.0, 2.0, &g);
    let cfg = short(0.0, 2.0, 1.0);
    let d = 1e-3;
    let st = march(&u0, &cfg, &sg, d, 1);
    let mut expect = sg.apply(&u0, d).unwrap();
    expect.add_scaled(d, &cfg.source(&u0).unwrap()).unwrap();
    assert!(max_diff(&st.u, &expect) < d * d * 10.0);
}

#[test]
fn step_halving_error_shrinks_at_first_order() {
    // Constant data: the interior propagator is the identity and the march is Euler for u' = u².
    let g = GridGeometry::new(6.0, 36.0, 13, 13, true).unwrap();
    let sg = HeatSemigroup::new(g).unwrap();
    let u0 = GridField::from_values(g, vec![1.0; g.len()]).unwrap();
    let cfg = short(0.0, 2.0, 1.0);
    let center = g.index(6, 6, 6);
    let t = 0.4_f64;
    let exact = 1.0 / (1.0 - t);
    let levels = [0.05, 0.025, 0.0125];
    let at_center: Vec<f64> =
        levels.iter().map(|&d| march(&u0, &cfg, &sg, d, (t / d).round() as usize).u.values()[center]).collect();
    for (&d, &got) in levels.iter().zip(&at_center) {
        let euler = (0..(t / d).round() as usize).fold(1.0, |u: f64, _| u + d * u * u);
        assert!((got - euler).abs() < 1e-4 * euler, "d = {d}: {got} vs {euler}");
    }
    let ratio = (at_center[0] - at_center[1]) / (at_center[1] - at_center[2]);
    assert!(ratio > 1.7 && ratio < 2.2, "ratio {ratio}");
    assert!((at_center[2] - exact).abs() < 0.05 * exact);
}

#[test]
fn picard_on_zero_data_converges_at_once() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let out = picard_local(&GridField::zeros(g), 0.0, &[0.05, 0.05], &short(0.0, 2.0, 1.0), &sg).unwrap();
    assert!(out.converged);
    assert_eq!(out.iterations, 1);
    assert!(out.path.iter().all(|u| u.is_zero()));
}

#[test]
fn picard_small_data_converges_within_window_length_plus_one() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let u0 = bump(1e-3, 2.0, &g);
    let steps = [0.025; 4];
    let out = picard_local(&u0, 0.0, &steps, &short(0.0, 2.0, 1.0), &sg).unwrap();
    assert!(out.converged);
    assert!(out.iterations <= steps.len() + 1 && out.iterations <= 20);
}

#[test]
fn picard_fixed_point_is_the_explicit_march() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let u0 = bump(3.0, 2.0, &g);
    for gamma in [0.0, -0.5] {
        let cfg = short(gamma, 2.0, 1.0);
        let out = picard_local(&u0, 0.0, &[0.1; 4], &cfg, &sg).unwrap();
        assert!(out.converged);
        let st = march(&u0, &cfg, &sg, 0.1, 4);
        assert!(max_diff(out.last(), &st.u) <= 1e-9 * st.u.sup_abs());
    }
}

#[test]
fn picard_huge_data_fails() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let u0 = bump(1e6, 2.0, &g);
    let out = picard_local(&u0, 0.0, &[0.025; 4], &short(0.0, 2.0, 1.0), &sg).unwrap();
    assert!(!out.converged);
    assert!(out.failure.is_some());
}

#[test]
fn extend_maximal_small_data_reaches_horizon() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let st = extend_maximal(&bump(0.1, 2.0, &g), &short(0.0, 2.0, 1.0), &sg).unwrap();
    assert_eq!(st.verdict, Verdict::HorizonReached);
    assert!((st.t - 1.0).abs() < 1e-12);
    assert!(st.history.windows(2).all(|w| w[1].0 > w[0].0));
    assert!(st.max_norm() < 1.0);
}

#[test]
fn extend_maximal_large_data_blows_up() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let st = extend_maximal(&bump(50.0, 2.0, &g), &short(0.0, 2.0, 2.0), &sg).unwrap();
    assert_eq!(st.verdict, Verdict::BlowupDetected);
    assert!(st.t < 2.0);
    assert!(st.history.windows(2).all(|w| w[1].0 > w[0].0));
}

#[test]
fn extend_maximal_terminates_under_a_degenerate_window_floor() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let cfg = EvolveConfig { min_window: 0.05, ..short(0.0, 3.0, 2.0) };
    let st = extend_maximal(&bump(1e4, 2.0, &g), &cfg, &sg).unwrap();
    assert!(matches!(st.verdict, Verdict::BlowupDetected | Verdict::ContractionFailed));
}

#[test]
fn henon_budget_rejects_subcritical_and_zero_data() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let w0 = sample(|p| (1.0 + koranyi_norm(p)).powi(-4), &g).unwrap();
    let cfg = short(0.0, 1.4, 1.0);
    assert!(matches!(henon_lambda_budget(&w0, 1.4, 0.0, &cfg, &sg), Err(Error::BudgetInfeasible(_))));
    assert!(matches!(henon_lambda_budget(&GridField::zeros(g), 2.0, 0.0, &cfg, &sg), Err(Error::Argument(_))));
    assert!(henon_lambda_budget(&w0, 2.0, -0.5, &cfg, &sg).is_err());
}

#[test]
fn hardy_budget_rejects_low_exponent() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let w0 =
        sample(|p: &GPoint| ((1.0 + p.x[0] * p.x[0]) * (1.0 + p.y[0] * p.y[0]) * (1.0 + p.tau * p.tau)).powf(-0.5), &g)
            .unwrap();
    let cfg = short(-0.5, 1.2, 1.0);
    assert!(matches!(hardy_lambda_budget(&w0, 1.2, -0.5, 1.2, &cfg, &sg), Err(Error::BudgetInfeasible(_))));
    // 1/q < 1 + γ/Q fails for q = 1.1
    assert!(hardy_lambda_budget(&w0, 2.5, -0.5, 1.1, &cfg, &sg).is_err());
}

#[test]
fn henon_construction_certifies_on_a_small_box() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let w0 = sample(|p| (1.0 + koranyi_norm(p)).powi(-4), &g).unwrap();
    let cfg = short(0.0, 2.0, 2.0);
    let params = henon_lambda_budget(&w0, 2.0, 0.0, &cfg, &sg).unwrap();
    params.check(2.0, 0.0, 4, w0.sup_abs()).unwrap();
    assert!((params.lambda_scale - (1.0 + params.capital_lambda).powi(-2)).abs() < 1e-12);
    let out = monotone_global(&w0.scale(params.lambda_scale), &params, &cfg, &sg).unwrap();
    assert!(out.certified, "{:?}", out.first_violation);
    assert_eq!(out.depth, cfg.monotone_depth);
    assert!(out.distances.windows(2).all(|w| w[1] < 0.5 * w[0]));
}

#[test]
fn oversized_data_breaks_the_barrier() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let w0 = sample(|p| (1.0 + koranyi_norm(p)).powi(-4), &g).unwrap();
    let cfg = short(0.0, 2.0, 2.0);
    let mut params = henon_lambda_budget(&w0, 2.0, 0.0, &cfg, &sg).unwrap();
    params.lambda_scale *= 40.0;
    assert!(params.check(2.0, 0.0, 4, w0.sup_abs()).is_err());
    let out = monotone_global(&w0.scale(params.lambda_scale), &params, &cfg, &sg).unwrap();
    assert!(!out.certified);
    assert_eq!(out.first_violation.unwrap().kind, ViolationKind::BarrierExceeded);
}

#[test]
fn monotone_iteration_on_zero_data_is_certified() {
    let g = small_geom();
    let sg = HeatSemigroup::new(g).unwrap();
    let w0 = sample(|p| (1.0 + koranyi_norm(p)).powi(-4), &g).unwrap();
    let cfg = short(0.0, 2.0, 1.0);
    let params = henon_lambda_budget(&w0, 2.0, 0.0, &cfg, &sg).unwrap();
    let out = monotone_global(&GridField::zeros(g), &params, &cfg, &sg).unwrap();
    assert!(out.certified);
    assert!(out.final_path.iter().all(|u| u.is_zero()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn duhamel_map_preserves_order_and_sign(
        a in 0.0f64..3.0,
        extra in 0.0f64..2.0,
        r in 1.0f64..2.5,
        gamma in prop::sample::select(vec![-0.5, 0.0, 1.0]),
    ) {
        let g = GridGeometry::new(3.0, 9.0, 8, 10, true).unwrap();
        let sg = HeatSemigroup::new(g).unwrap();
        let cfg = short(gamma, 2.0, 1.0);
        let lo = bump(a, r, &g);
        let hi = bump(a + extra, r, &g);
        let ul = march(&lo, &cfg, &sg, 0.05, 3).u;
        let uh = march(&hi, &cfg, &sg, 0.05, 3).u;
        prop_assert!(ul.min() >= 0.0);
        prop_assert!(ul.values().iter().zip(uh.values()).all(|(x, y)| *x <= *y));
    }
}
