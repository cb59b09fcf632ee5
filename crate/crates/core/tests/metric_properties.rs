use geocap_core::metric::{scalar_flat_tensor, sphere_cross_line_tensor};
use geocap_core::{CurvatureTensor, MetricModel, Warp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn models() -> Vec<MetricModel> {
    let mut out = Vec::new();
    for n in 3..=5 {
        for k in [-1.0, 0.0, 1.0, 2.5] {
            out.push(MetricModel::space_form(n, k).unwrap());
        }
    }
    for warp in [
        Warp::Sin { curvature: 0.7 },
        Warp::Sinh { curvature: -1.3 },
        Warp::Linear,
        Warp::Quintic { coefficient: 0.4 },
    ] {
        out.push(MetricModel::warped_product(3, warp).unwrap());
        out.push(MetricModel::warped_product(4, warp).unwrap());
    }
    for t in [
        sphere_cross_line_tensor(),
        scalar_flat_tensor(),
        CurvatureTensor::constant_curvature(3, -0.8).unwrap(),
        CurvatureTensor::constant_curvature(4, 1.0).unwrap(),
        CurvatureTensor::from_generators(3, &[(0, 1, 0, 1, 0.6), (0, 2, 0, 2, 1.1), (1, 2, 1, 2, -0.3), (0, 1, 0, 2, 0.2)]).unwrap(),
    ] {
        out.push(MetricModel::curvature_polynomial(t, None).unwrap());
    }
    out
}

fn metric(model: &MetricModel, y: &[f64]) -> Vec<f64> {
    model.metric_at(y).unwrap().as_slice().to_vec()
}

fn axis(n: usize, i: usize, h: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = h;
    v
}

fn add(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

#[test]
fn identity_and_vanishing_first_derivatives_at_base_point() {
    let h = 1e-4;
    for model in models() {
        let n = model.dim();
        let g0 = metric(&model, &vec![0.0; n]);
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(g0[i * n + j], expected, "{model}");
            }
        }
        for k in 0..n {
            let plus = metric(&model, &axis(n, k, h));
            let minus = metric(&model, &axis(n, k, -h));
            for (p, m) in plus.iter().zip(&minus) {
                let d = (p - m) / (2.0 * h);
                assert!(d.abs() < 1e-6, "{model}: derivative {d}");
            }
        }
    }
}

/// `S = Σ_ij (∂_i ∂_j g_ij − ∂_j ∂_j g_ii)` where `g = δ` and `∂g = 0`.
fn finite_difference_scalar(model: &MetricModel, h: f64) -> f64 {
    let n = model.dim();
    let zero = vec![0.0; n];
    let g0 = metric(model, &zero);
    let second = |a: usize, b: usize| -> Vec<f64> {
        if a == b {
            let p = metric(model, &axis(n, a, h));
            let m = metric(model, &axis(n, a, -h));
            (0..n * n).map(|k| (p[k] - 2.0 * g0[k] + m[k]) / (h * h)).collect()
        } else {
            let ea = axis(n, a, h);
            let eb = axis(n, b, 1.0);
            let pp = metric(model, &add(&ea, &eb, h));
            let pm = metric(model, &add(&ea, &eb, -h));
            let mp = metric(model, &add(&axis(n, a, -h), &eb, h));
            let mm = metric(model, &add(&axis(n, a, -h), &eb, -h));
            (0..n * n).map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h)).collect()
        }
    };
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dij = second(i, j);
            let djj = second(j, j);
            s += dij[i * n + j] - djj[i * n + i];
        }
    }
    s
}

#[test]
fn scalar_curvature_matches_finite_differences() {
    for model in models() {
        let exact = model.scalar_curvature();
        let fd = finite_difference_scalar(&model, 1e-3);
        let scale = exact.abs().max(1.0);
        assert!((fd - exact).abs() <= 1e-4 * scale, "{model}: fd {fd} exact {exact}");
    }
}

#[test]
fn gauss_lemma_holds_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let tensors = [
        sphere_cross_line_tensor(),
        scalar_flat_tensor(),
        CurvatureTensor::from_generators(3, &[(0, 1, 0, 1, 0.6), (0, 2, 0, 2, 1.1), (0, 1, 0, 2, 0.2)]).unwrap(),
    ];
    for t in tensors {
        let model = MetricModel::curvature_polynomial(t, None).unwrap();
        let radius = model.validity_radius().min(1.0);
        for _ in 0..10_000 {
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0) * radius / 3f64.sqrt()).collect();
            let g = model.metric_at(&y).unwrap();
            for i in 0..3 {
                let gy: f64 = (0..3).map(|j| g[(i, j)] * y[j]).sum();
                assert!((gy - y[i]).abs() <= 1e-14, "{model} at {y:?}");
            }
        }
    }
}

#[test]
fn scalar_curvature_examples() {
    assert_eq!(MetricModel::space_form(3, 1.0).unwrap().scalar_curvature(), 6.0);
    assert_eq!(MetricModel::space_form(4, 0.0).unwrap().scalar_curvature(), 0.0);
    let sxr = MetricModel::curvature_polynomial(sphere_cross_line_tensor(), None).unwrap();
    assert_eq!(sxr.scalar_curvature(), 2.0);
}

#[test]
fn validation_rejects_wrong_sign_image() {
    let bad = CurvatureTensor::from_components(3, &[(0, 1, 0, 1, 1.0), (1, 0, 0, 1, 1.0)]).unwrap();
    assert!(MetricModel::curvature_polynomial(bad, None).is_err());
    let flat = MetricModel::curvature_polynomial(CurvatureTensor::zero(3).unwrap(), None).unwrap();
    assert_eq!(flat.validate().worst_violation, 0.0);
}

#[test]
fn sphere_cross_line_is_flat_along_the_line() {
    let m = MetricModel::curvature_polynomial(sphere_cross_line_tensor(), None).unwrap();
    let limit = m.validity_radius();
    for t in [-limit, -0.3, 0.0, 0.25, limit] {
        let g = m.metric_at(&[0.0, 0.0, t]).unwrap();
        assert_eq!(g, nalgebra::DMatrix::identity(3, 3));
    }
}
