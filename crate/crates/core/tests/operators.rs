use nalgebra::DMatrix;
use proptest::prelude::*;
use subfinsler_core::energy::{Dilated, Gaussian};
use subfinsler_core::gauge::euclidean_gauge;
use subfinsler_core::jets::{LinearCombination, Log, Power};
use subfinsler_core::norms::NormSquaredField;
use subfinsler_core::operators::{
    chain_rule_residuals, finsler_laplacian, grushin_gradient_square, grushin_operator, grushin_operator_fd,
    grushin_operator_p, radial_laplacian_check,
};
use subfinsler_core::sampling::{sample_points, seeded_rng, SamplePolicy};
use subfinsler_core::{
    dilate, DualSolverConfig, GaugePair, GrushinParams, NormSpec, OperatorContext, Point, Scalar, ScalarField,
};

fn ellipsoid(n: usize) -> NormSpec {
    NormSpec::ellipsoid(DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 + i as f64 } else { 0.3 })).unwrap()
}

fn pairs(params: GrushinParams) -> Vec<GaugePair> {
    let (m, k) = (params.m, params.k);
    vec![
        GaugePair::euclidean(params).unwrap(),
        GaugePair::new(NormSpec::p_norm(m, 4.0).unwrap(), NormSpec::euclidean(k).unwrap(), params).unwrap(),
        GaugePair::new(ellipsoid(m), NormSpec::p_norm(k, 4.0).unwrap(), params).unwrap(),
    ]
}

/// `|z|²` on `ℝ^m × ℝ^k`.
struct HorizontalSquare(usize, usize);

impl ScalarField for HorizontalSquare {
    fn dimension(&self) -> usize {
        self.0 + self.1
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = x[0].square();
        for v in &x[1..self.0] {
            acc = acc + v.square();
        }
        acc
    }
}

/// `σ_1²`.
struct VerticalSquare(usize, usize);

impl ScalarField for VerticalSquare {
    fn dimension(&self) -> usize {
        self.0 + self.1
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        x[self.0].square()
    }
}

/// `⟨a, z⟩`.
struct Linear(Vec<f64>, usize);

impl ScalarField for Linear {
    fn dimension(&self) -> usize {
        self.0.len() + self.1
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = x[0].lift(0.0);
        for (v, a) in x.iter().zip(&self.0) {
            acc = acc + v.clone() * *a;
        }
        acc
    }
}

fn smooth_field(n: usize) -> Gaussian {
    Gaussian {
        widths: (0..n).map(|i| 1.3 + 0.2 * i as f64).collect(),
        height: 2.0,
    }
}

/// Gaussian bump centred off the origin, so no block gradient vanishes at
/// the sample points.
struct Shifted(Gaussian, Vec<f64>);

impl ScalarField for Shifted {
    fn dimension(&self) -> usize {
        self.1.len()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let y: Vec<S> = x.iter().zip(&self.1).map(|(v, c)| v.clone() - *c).collect();
        self.0.eval(&y)
    }
}

fn shifted(n: usize) -> Shifted {
    Shifted(smooth_field(n), (0..n).map(|i| 0.37 * (i as f64 + 1.0)).collect())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

#[test]
fn gauge_closed_values() {
    let g = GaugePair::euclidean(GrushinParams::yamabe(2, 1).unwrap()).unwrap();
    let on_z = Point::new(vec![0.6, 0.8], vec![0.0]);
    let on_sigma = Point::new(vec![0.0, 0.0], vec![1.0]);
    assert!((g.theta(&on_z).unwrap() - 1.0).abs() < 1e-15);
    assert!((g.theta_dual(&on_z).unwrap() - 1.0).abs() < 1e-15);
    assert!((g.theta(&on_sigma).unwrap() - 2.0).abs() < 1e-15);
    assert!((g.theta_dual(&on_sigma).unwrap() - 2.0).abs() < 1e-15);
    assert!((euclidean_gauge(1.0, &on_sigma) - 2.0).abs() < 1e-15);
}

#[test]
fn euclidean_gauge_specialization() {
    let mut rng = seeded_rng(5);
    for alpha in [1.0, 2.0, 0.5] {
        let params = GrushinParams::new(2, 2, alpha, 2.0).unwrap();
        let g = GaugePair::euclidean(params).unwrap();
        let pts = sample_points(&g, &[0.0, 0.0], 50, &SamplePolicy::default(), &mut rng).unwrap();
        for pt in &pts.points {
            let r = euclidean_gauge(alpha, pt);
            assert!((g.theta_dual(pt).unwrap() - r).abs() <= 1e-13 * r);
            assert!((g.theta(pt).unwrap() - r).abs() <= 1e-13 * r);
        }
    }
}

#[test]
fn gauge_dual_matches_variational_oracle() {
    let mut rng = seeded_rng(9);
    let cfg = DualSolverConfig::default();
    for alpha in [1.0, 2.0] {
        for g in pairs(GrushinParams::new(2, 2, alpha, 2.0).unwrap()) {
            let pts = sample_points(&g, &[0.0, 0.0], 50, &SamplePolicy::default(), &mut rng).unwrap();
            for pt in &pts.points {
                let closed = g.theta_dual(pt).unwrap();
                let oracle = g.theta_dual_oracle(pt, &cfg).unwrap();
                assert!((closed - oracle).abs() <= 1e-6 * closed, "{}: {closed} vs {oracle}", g.label());
            }
        }
    }
}

#[test]
fn laplacian_of_square_norm() {
    let e = NormSpec::euclidean(3).unwrap();
    let lap = finsler_laplacian(&e, &NormSquaredField(&e), &[0.3, -1.0, 2.0]).unwrap();
    assert!((lap - 6.0).abs() < 1e-13);
}

#[test]
fn radial_formula_examples() {
    let e3 = NormSpec::euclidean(3).unwrap();
    let (l, r) = radial_laplacian_check(&e3, &Power(2.0), &[0.2, 0.5, -0.7]).unwrap();
    assert!((l - 6.0).abs() < 1e-13 && (r - 6.0).abs() < 1e-13);

    let e2 = NormSpec::euclidean(2).unwrap();
    let (l, r) = radial_laplacian_check(&e2, &Log, &[0.4, -1.1]).unwrap();
    assert!(l.abs() < 1e-13 && r.abs() < 1e-13);

    let l4 = NormSpec::p_norm(3, 4.0).unwrap();
    let (l, r) = radial_laplacian_check(&l4, &Power(4.0), &[0.4, -1.1, 0.8]).unwrap();
    assert!((l - r).abs() <= 1e-8 * (1.0 + r.abs()));
}

#[test]
fn radial_formula_on_all_norms() {
    let mut rng = seeded_rng(13);
    let xs = subfinsler_core::sampling::sample_vectors(3, 40, 1e-3, &mut rng);
    for norm in [NormSpec::euclidean(3).unwrap(), NormSpec::p_norm(3, 4.0).unwrap(), ellipsoid(3)] {
        for x in &xs {
            for (l, r) in [
                radial_laplacian_check(&norm, &Power(2.0), x).unwrap(),
                radial_laplacian_check(&norm, &Power(3.0), x).unwrap(),
                radial_laplacian_check(&norm, &Power(-1.0), x).unwrap(),
                radial_laplacian_check(&norm, &Log, x).unwrap(),
            ] {
                assert!(rel(l, r) <= 1e-8, "{}: {l} vs {r}", norm.label());
            }
        }
    }
}

#[test]
fn grushin_operator_on_quadratics() {
    let (m, k) = (3, 2);
    let ctx = OperatorContext::from(GaugePair::euclidean(GrushinParams::yamabe(m, k).unwrap()).unwrap());
    let pt = Point::new(vec![0.3, -0.5, 1.2], vec![0.7, -0.1]);
    let z2: f64 = pt.z.iter().map(|v| v * v).sum();
    let l = grushin_operator(&ctx, &HorizontalSquare(m, k), &pt).unwrap();
    assert!((l - 2.0 * m as f64).abs() < 1e-13);
    let l = grushin_operator(&ctx, &VerticalSquare(m, k), &pt).unwrap();
    assert!((l - 0.5 * z2).abs() < 1e-13);
}

#[test]
fn gradient_square_of_linear_function_is_constant() {
    let params = GrushinParams::yamabe(2, 1).unwrap();
    for g in pairs(params) {
        let ctx = OperatorContext::from(g.clone());
        let a = vec![0.4, -1.5];
        let expected = g.phi().eval(&a).unwrap().powi(2);
        for pt in [
            Point::new(vec![0.1, 0.2], vec![3.0]),
            Point::new(vec![-2.0, 0.7], vec![-0.4]),
        ] {
            let w = grushin_gradient_square(&ctx, &Linear(a.clone(), 1), &pt).unwrap();
            assert!((w - expected).abs() <= 1e-14 * expected);
        }
    }
}

#[test]
fn euclidean_operator_is_linear() {
    let (m, k) = (2, 2);
    let ctx = OperatorContext::from(GaugePair::euclidean(GrushinParams::new(m, k, 1.5, 2.0).unwrap()).unwrap());
    let f = smooth_field(m + k);
    let g = HorizontalSquare(m, k);
    let combo = LinearCombination {
        a: 2.5,
        f: &f,
        b: -0.75,
        g: &g,
    };
    let pt = Point::new(vec![0.4, -0.9], vec![0.2, 0.6]);
    let lhs = grushin_operator(&ctx, &combo, &pt).unwrap();
    let rhs = 2.5 * grushin_operator(&ctx, &f, &pt).unwrap() - 0.75 * grushin_operator(&ctx, &g, &pt).unwrap();
    assert!(rel(lhs, rhs) < 1e-13);
}

#[test]
fn p_operator_reduces_at_two() {
    let params = GrushinParams::yamabe(2, 2).unwrap();
    let f = shifted(4);
    for g in pairs(params) {
        let ctx = OperatorContext::from(g);
        let pt = Point::new(vec![0.4, -0.9], vec![0.2, 0.6]);
        let a = grushin_operator(&ctx, &f, &pt).unwrap();
        let b = grushin_operator_p(&ctx, &f, &pt).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn chain_rules_for_powers() {
    let params = GrushinParams::yamabe(3, 1).unwrap();
    let f = shifted(4);
    let mut rng = seeded_rng(21);
    for g in pairs(params) {
        let ctx = OperatorContext::from(g.clone());
        let pts = sample_points(&g, &[0.0], 50, &SamplePolicy::default(), &mut rng).unwrap();
        for pt in &pts.points {
            for outer in [Power(3.0), Power(-3.0)] {
                let (w, l) = chain_rule_residuals(&ctx, &f, &outer, pt).unwrap();
                assert!(w.rel() <= 1e-10 && l.rel() <= 1e-10, "{}: {w:?} {l:?}", g.label());
            }
        }
    }
}

#[test]
fn jet_operator_matches_difference_oracle() {
    let mut rng = seeded_rng(4);
    for p in [2.0, 3.0] {
        let params = GrushinParams::new(2, 1, 1.0, p).unwrap();
        let f = shifted(3);
        for g in pairs(params) {
            let ctx = OperatorContext::from(g.clone());
            let policy = SamplePolicy {
                hyperplane_margin: 0.05,
                ..Default::default()
            };
            let pts = sample_points(&g, &[0.0], 20, &policy, &mut rng).unwrap();
            for pt in &pts.points {
                let a = grushin_operator_p(&ctx, &f, pt).unwrap();
                let b = grushin_operator_fd(&ctx, &f, pt, None).unwrap();
                assert!(rel(b, a) <= 1e-5, "{} p={p}: {a} vs {b}", g.label());
            }
        }
    }
}

proptest! {
    #[test]
    fn dual_gauge_is_homogeneous(
        z in prop::collection::vec(-2.0..2.0f64, 2),
        s in prop::collection::vec(-2.0..2.0f64, 2),
        t in 0.1..10.0f64,
        alpha in 0.5..3.0f64,
    ) {
        prop_assume!(z.iter().chain(&s).all(|v| v.abs() > 1e-3));
        let params = GrushinParams::new(2, 2, alpha, 2.0).unwrap();
        let pt = Point::new(z, s);
        let moved = dilate(&params, t, &pt).unwrap();
        for g in pairs(params) {
            let a = g.theta_dual(&moved).unwrap();
            let b = t * g.theta_dual(&pt).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b);
            let a = g.theta(&moved).unwrap();
            let b = t * g.theta(&pt).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn operator_commutes_with_dilations(
        z in prop::collection::vec(-1.5..1.5f64, 2),
        s in prop::collection::vec(-1.5..1.5f64, 1),
        t in 0.5..2.0f64,
        p in prop::sample::select(vec![2.0, 3.0]),
    ) {
        prop_assume!(z.iter().chain(&s).all(|v| v.abs() > 1e-2));
        let params = GrushinParams::new(2, 1, 1.0, p).unwrap();
        let f = shifted(3);
        let pt = Point::new(z, s);
        let moved = dilate(&params, t, &pt).unwrap();
        for g in pairs(params) {
            let ctx = OperatorContext::from(g);
            let composed = Dilated { inner: &f, params: &params, t };
            let lhs = grushin_operator_p(&ctx, &composed, &pt).unwrap();
            let rhs = t.powf(p) * grushin_operator_p(&ctx, &f, &moved).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()));
        }
    }
}
