use geocap_core::capacity::{radial_probe, solve_level, SolverSettings};
use geocap_core::expansion::branch_for;
use geocap_core::metric::sphere_cross_line_tensor;
use geocap_core::{
    deficit_coefficient, euclidean_relative_capacity, symmetric_capacity, szego_upper_bound, unified_deficit,
    variational_capacity, CapacityQuery, MetricModel, Resolution, Warp,
};
use proptest::prelude::*;

fn symmetric_models() -> Vec<MetricModel> {
    vec![
        MetricModel::space_form(3, 1.0).unwrap(),
        MetricModel::space_form(3, -1.0).unwrap(),
        MetricModel::space_form(3, 0.0).unwrap(),
        MetricModel::space_form(4, 2.0).unwrap(),
        MetricModel::space_form(6, -0.5).unwrap(),
        MetricModel::warped_product(3, Warp::Quintic { coefficient: 0.1 }).unwrap(),
    ]
}

fn cap(model: &MetricModel, r: f64, lambda: f64) -> f64 {
    symmetric_capacity(&CapacityQuery::new(model, r, lambda).unwrap()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn capacity_decreases_in_ratio(which in 0usize..6, r in 0.005f64..0.12) {
        let model = &symmetric_models()[which];
        let values: Vec<f64> = [1.5, 2.0, 4.0, 8.0].iter().map(|&l| cap(model, r, l)).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] < w[0], "{model}: {values:?}");
        }
    }

    #[test]
    fn capacity_increases_in_radius(which in 0usize..6, lambda in 1.1f64..4.0) {
        let model = &symmetric_models()[which];
        let values: Vec<f64> = (0..6).map(|k| cap(model, 0.2 * 0.5f64.powi(k), lambda)).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] < w[0], "{model}: {values:?}");
        }
    }

    #[test]
    fn flat_capacity_scales(n in 3usize..8, r in 1e-3f64..10.0, lambda in 1.05f64..20.0) {
        let model = MetricModel::euclidean(n).unwrap();
        let scaled = cap(&model, r, lambda);
        let unit = cap(&model, 1.0, lambda);
        let expected = r.powi(n as i32 - 2) * unit;
        prop_assert!(((scaled - expected) / expected).abs() < 1e-10);
        let closed = euclidean_relative_capacity(n, r, lambda * r).unwrap();
        prop_assert!(((scaled - closed) / closed).abs() < 1e-10);
    }

    #[test]
    fn branch_and_unified_forms_agree(n in 3usize..9, lambda in 1.01f64..30.0, r in 1e-4f64..0.5, s in -20.0f64..20.0) {
        let kappa = deficit_coefficient(n, lambda, s).unwrap();
        let unified = unified_deficit(n, lambda, r, s).unwrap();
        let branch = kappa * r * r;
        prop_assert!((branch - unified).abs() <= 1e-12 * branch.abs().max(1e-300), "{:?}: {branch} vs {unified}", branch_for(n));
    }

    #[test]
    fn coefficient_is_linear_in_curvature(n in 3usize..9, lambda in 1.01f64..30.0, a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let ka = deficit_coefficient(n, lambda, a).unwrap();
        let kb = deficit_coefficient(n, lambda, b).unwrap();
        let kab = deficit_coefficient(n, lambda, a + b).unwrap();
        let unit = deficit_coefficient(n, lambda, 1.0).unwrap();
        prop_assert!((kab - ka - kb).abs() <= 1e-12 * (ka.abs() + kb.abs()).max(unit.abs()));
        prop_assert!(unit > 0.0);
    }
}

#[test]
fn level_set_bound_equals_symmetric_capacity() {
    for model in symmetric_models() {
        let q = CapacityQuery::new(&model, 0.1, 2.0).unwrap();
        let a = szego_upper_bound(&q).unwrap().value;
        let b = symmetric_capacity(&q).unwrap().value;
        assert!(((a - b) / b).abs() <= 1e-10);
    }
}

#[test]
fn sphere_capacity_matches_closed_form() {
    let model = MetricModel::space_form(3, 1.0).unwrap();
    for (r, lambda) in [(0.2f64, 2.0f64), (0.05, 3.0), (0.3, 1.5)] {
        let exact = r.sin() * (lambda * r).sin() / ((lambda - 1.0) * r).sin();
        let res = symmetric_capacity(&CapacityQuery::new(&model, r, lambda).unwrap()).unwrap();
        assert!(((res.value - exact) / exact).abs() < 1e-12);
        assert!(res.error_estimate <= 1e-10 * res.value);
    }
}

#[test]
fn variational_agrees_with_symmetric_within_estimate() {
    let model = MetricModel::space_form(3, 1.0).unwrap();
    let q = CapacityQuery::new(&model, 0.3, 2.0).unwrap();
    let exact = symmetric_capacity(&q).unwrap().value;
    let sol = variational_capacity(&q, Resolution::level(3)).unwrap();
    assert!((sol.result.value - exact).abs() <= sol.result.error_estimate);
    assert!(sol.result.value >= exact);
}

#[test]
fn variational_below_level_set_bound_on_asymmetric_model() {
    let model = MetricModel::curvature_polynomial(sphere_cross_line_tensor(), None).unwrap();
    for r in [0.3, 0.1] {
        let q = CapacityQuery::new(&model, r, 2.0).unwrap();
        let sol = variational_capacity(&q, Resolution::level(3)).unwrap();
        let bound = szego_upper_bound(&q).unwrap();
        assert!(bound.value >= sol.result.value - sol.result.error_estimate, "r={r}");
    }
}

#[test]
fn euclidean_refinement_decreases_monotonically() {
    let model = MetricModel::euclidean(3).unwrap();
    let q = CapacityQuery::new(&model, 1.0, 2.0).unwrap();
    let values: Vec<f64> = (1..=3)
        .map(|l| solve_level(&q, Resolution::level(l), SolverSettings::default(), None).unwrap().capacity)
        .collect();
    for w in values.windows(2) {
        assert!(w[1] < w[0], "{values:?}");
    }
    assert!(values.iter().all(|v| *v > 2.0));
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[test]
fn probe_deviations_decay_at_expected_rates() {
    let model = MetricModel::space_form(3, 1.0).unwrap();
    let radii = [0.2, 0.1, 0.05, 0.025];
    let probes: Vec<_> = radii
        .iter()
        .map(|&r| radial_probe(&CapacityQuery::new(&model, r, 2.0).unwrap(), 128).unwrap())
        .collect();
    let sup: Vec<f64> = probes.iter().map(|p| p.sup_deviation).collect();
    let grad: Vec<f64> = probes.iter().map(|p| p.gradient_deviation).collect();
    let s = slope(&radii, &sup);
    let g = slope(&radii, &grad);
    assert!((1.8..=2.2).contains(&s), "value slope {s}");
    assert!((0.8..=1.2).contains(&g), "gradient slope {g}");
}
