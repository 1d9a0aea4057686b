use nalgebra::DMatrix;
use subfinsler_core::energy::{
    critical_exponent, dilation_drift, energy, energy_fd, integrate, lq_norm, sobolev_quotient, tail_estimate, Bump,
    Dilated, QuadratureScheme, QuadratureSpec, Zero,
};
use subfinsler_core::jets::Scaled;
use subfinsler_core::{dilate, Error, GaugePair, GrushinParams, NormSpec, OperatorContext, Point, Scalar, ScalarField};

struct Linear(Vec<f64>);

impl ScalarField for Linear {
    fn dimension(&self) -> usize {
        self.0.len()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = x[0].lift(0.0);
        for (v, a) in x.iter().zip(&self.0) {
            acc = acc + v.clone() * *a;
        }
        acc
    }
}

fn euclid_ctx(m: usize, k: usize, p: f64) -> OperatorContext {
    OperatorContext::from(GaugePair::euclidean(GrushinParams::new(m, k, 1.0, p).unwrap()).unwrap())
}

fn gl(widths: Vec<f64>, n: usize) -> QuadratureSpec {
    QuadratureSpec::new(widths, n, QuadratureScheme::GaussLegendre).unwrap()
}

#[test]
fn gauss_rule_integrates_polynomials_exactly() {
    let q = gl(vec![1.0, 2.0], 8).with_panel_growth(1.5).unwrap();
    // ∫∫ x⁶ y² over [-1,1]×[-2,2] = (2/7)(16/3)
    let v = integrate(&q, |x| Some(x[0].powi(6) * x[1].powi(2))).unwrap();
    assert!((v.value - 2.0 / 7.0 * 16.0 / 3.0).abs() < 1e-13);
    assert_eq!(v.points, 64);
    assert_eq!(v.excluded, 0);
}

#[test]
fn midpoint_rule_converges_at_second_order() {
    let exact = 2.0 / 5.0;
    let coarse = QuadratureSpec::new(vec![1.0], 16, QuadratureScheme::Midpoint).unwrap();
    let a = integrate(&coarse, |x| Some(x[0].powi(4))).unwrap().value - exact;
    let b = integrate(&coarse.refined(), |x| Some(x[0].powi(4))).unwrap().value - exact;
    let ratio = a / b;
    assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn energy_of_linear_functions() {
    let ctx = euclid_ctx(2, 1, 2.0);
    let q = gl(vec![1.0, 1.0, 1.0], 8);
    let e = energy(&ctx, &Linear(vec![1.0, 0.0, 0.0]), &q).unwrap();
    assert!((e.value - 4.0).abs() < 1e-13);

    // W(σ) = |z|²/4, so E = (1/2)·(1/4)·∫|z|² = (1/8)·2·(2/3)·2·2.
    let e = energy(&ctx, &Linear(vec![0.0, 0.0, 1.0]), &q).unwrap();
    assert!((e.value - 2.0 / 3.0).abs() < 1e-13);

    let ctx3 = euclid_ctx(2, 1, 3.0);
    let e = energy(&ctx3, &Linear(vec![0.0, 2.0, 0.0]), &q).unwrap();
    assert!((e.value - 8.0 * 8.0 / 3.0).abs() < 1e-12);

    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
    let g = GaugePair::new(
        NormSpec::ellipsoid(a).unwrap(),
        NormSpec::euclidean(1).unwrap(),
        GrushinParams::yamabe(2, 1).unwrap(),
    )
    .unwrap();
    let dir = vec![0.4, -1.5];
    let phi = g.phi().eval(&dir).unwrap();
    let e = energy(&OperatorContext::from(g), &Linear(vec![0.4, -1.5, 0.0]), &q).unwrap();
    assert!((e.value - 0.5 * phi * phi * 8.0).abs() < 1e-12);
}

#[test]
fn zero_function_has_zero_energy() {
    let ctx = euclid_ctx(3, 1, 2.0);
    let q = QuadratureSpec::gauge_box(ctx.gauge().params(), 1.0, 8, QuadratureScheme::GaussLegendre).unwrap();
    assert_eq!(energy(&ctx, &Zero(4), &q).unwrap().value, 0.0);
}

#[test]
fn budget_and_dimension_limits() {
    let q = gl(vec![1.0; 4], 64).with_budget(1000);
    assert!(matches!(
        integrate(&q, |_| Some(1.0)),
        Err(Error::BudgetExceeded { .. })
    ));
    assert!(QuadratureSpec::new(vec![1.0; 6], 8, QuadratureScheme::Midpoint).is_err());
    assert!(QuadratureSpec::new(vec![1.0; 2], 4, QuadratureScheme::Midpoint).is_err());
    let ctx = euclid_ctx(2, 1, 2.0);
    assert!(energy(&ctx, &Zero(4), &gl(vec![1.0; 3], 8)).is_err());
}

#[test]
fn dilated_box_scales_like_homogeneous_dimension() {
    let params = GrushinParams::new(2, 2, 1.5, 2.0).unwrap();
    let q = QuadratureSpec::gauge_box(&params, 1.3, 8, QuadratureScheme::GaussLegendre).unwrap();
    for t in [0.5, 2.0] {
        let big = q.dilated(&params, t).unwrap();
        let ratio = integrate(&big, |_| Some(1.0)).unwrap().value / integrate(&q, |_| Some(1.0)).unwrap().value;
        let expected = t.powf(params.homogeneous_dimension());
        assert!((ratio - expected).abs() <= 1e-12 * expected);
    }
}

#[test]
fn measure_scaling_of_a_dilated_bump() {
    // ∫ u(δ_{1/t} x) dx = t^Q ∫ u on a fixed, graded box
    let params = GrushinParams::yamabe(2, 1).unwrap();
    let bump = Bump {
        radii: vec![1.0; 3],
        height: 1.0,
    };
    let q = QuadratureSpec::gauge_box(&params, 2.05, 96, QuadratureScheme::GaussLegendre)
        .unwrap()
        .with_gauge_growth(&params, 1.2)
        .unwrap();
    let base = integrate(&q, |x| subfinsler_core::jets::eval(&bump, x).ok()).unwrap().value;
    for t in [0.5, 2.0] {
        let f = Dilated {
            inner: &bump,
            params: &params,
            t: 1.0 / t,
        };
        let v = integrate(&q, |x| subfinsler_core::jets::eval(&f, x).ok()).unwrap().value;
        let expected = t.powf(params.homogeneous_dimension()) * base;
        assert!((v - expected).abs() <= 1e-3 * expected, "t={t}: {v} vs {expected}");
    }
}

#[test]
fn bump_energy_refines_and_matches_difference_oracle() {
    let ctx = euclid_ctx(2, 1, 2.0);
    let bump = Bump {
        radii: vec![1.0; 3],
        height: 1.0,
    };
    let q = QuadratureSpec::gauge_box(ctx.gauge().params(), 1.2, 32, QuadratureScheme::GaussLegendre).unwrap();
    let a = energy(&ctx, &bump, &q).unwrap().value;
    let b = energy(&ctx, &bump, &q.refined()).unwrap().value;
    let f = energy_fd(&ctx, &bump, &q, 1e-5).unwrap().value;
    assert!(a > 0.0);
    assert!((a / b - 1.0).abs() <= 1e-3);
    assert!((f / a - 1.0).abs() <= 1e-3);
}

#[test]
fn lq_norm_of_bump_is_bounded_by_volume() {
    let params = GrushinParams::yamabe(3, 1).unwrap();
    let q_exp = critical_exponent(&params).unwrap();
    assert!((q_exp - 10.0 / 3.0).abs() < 1e-15);
    let bump = Bump {
        radii: vec![1.0; 4],
        height: 1.0,
    };
    let q = QuadratureSpec::gauge_box(&params, 1.0, 16, QuadratureScheme::GaussLegendre).unwrap();
    let n = lq_norm(&bump, q_exp, &q).unwrap().value;
    assert!(n > 0.0 && n <= q.volume().powf(1.0 / q_exp));
    let p_eq_q = GrushinParams::new(3, 1, 1.0, 5.0).unwrap();
    assert!(critical_exponent(&p_eq_q).is_err());
}

#[test]
fn quotient_is_scale_and_dilation_invariant() {
    let ctx = euclid_ctx(2, 1, 2.0);
    let params = *ctx.gauge().params();
    let bump = Bump {
        radii: vec![1.0; 3],
        height: 1.0,
    };
    let q = QuadratureSpec::gauge_box(&params, 1.2, 16, QuadratureScheme::GaussLegendre).unwrap();
    let a = sobolev_quotient(&ctx, &bump, &q).unwrap();
    let b = sobolev_quotient(
        &ctx,
        &Scaled {
            factor: 7.0,
            inner: &bump,
        },
        &q,
    )
    .unwrap();
    assert!((a.quotient / b.quotient - 1.0).abs() <= 1e-12);
    for t in [0.5, 2.0] {
        let d = dilation_drift(&ctx, &bump, &q, t).unwrap();
        assert!(d.mapped_drift() <= 1e-12, "t={t}: {d:?}");
    }
}

#[test]
fn yamabe_quotient_on_truncated_box() {
    let ctx = euclid_ctx(3, 1, 2.0);
    let params = *ctx.gauge().params();
    let spec = subfinsler_core::solutions::YamabeSolutionSpec::with_context(ctx.clone(), 1.0, vec![0.0]).unwrap();
    let u = spec.solution_field();
    let q = QuadratureSpec::gauge_box(&params, 20.0, 16, QuadratureScheme::GaussLegendre)
        .unwrap()
        .with_gauge_growth(&params, 3.0)
        .unwrap();
    let s = sobolev_quotient(&ctx, &u, &q).unwrap();
    assert!(s.quotient.is_finite() && s.quotient > 0.0);
    for t in [0.5, 2.0] {
        let d = dilation_drift(&ctx, u, &q, t).unwrap();
        assert!(d.mapped_drift() <= 1e-12, "t={t}: {d:?}");
    }
}

#[test]
fn tail_estimate_recovers_power_decay() {
    // I(L) = C − D L^{−s}: the tail beyond L is D L^{−s}
    let (c, d, s) = (3.0, 0.7, 2.0);
    let full = c - d * 20f64.powf(-s);
    let half = c - d * 10f64.powf(-s);
    let tail = tail_estimate(full, half, s);
    assert!((tail - d * 20f64.powf(-s)).abs() < 1e-14);
}

#[test]
fn dilated_field_evaluates_at_image_point() {
    let params = GrushinParams::new(2, 1, 2.0, 2.0).unwrap();
    let u = Linear(vec![1.0, 2.0, 3.0]);
    let f = Dilated {
        inner: &u,
        params: &params,
        t: 2.0,
    };
    let pt = Point::new(vec![0.5, -1.0], vec![0.25]);
    let image = dilate(&params, 2.0, &pt).unwrap().to_flat();
    let a = subfinsler_core::jets::eval(&f, &pt.to_flat()).unwrap();
    let b = subfinsler_core::jets::eval(&u, &image).unwrap();
    assert_eq!(a, b);
}
