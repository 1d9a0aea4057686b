//! The verification suites behind each subcommand.

use serde_json::{json, Map, Value};
use subfinsler_core::energy::{
    self, dilation_drift, energy as energy_of, energy_fd, integrate, lq_norm, sobolev_quotient, tail_estimate,
    Bump, Dilated, QuadratureScheme, QuadratureSpec, Zero,
};
use subfinsler_core::gauge::euclidean_gauge;
use subfinsler_core::jets::{fd_jet2, jet2_eval, Log, Power, Profile, Scaled};
use subfinsler_core::norms::{NormField, NormSquaredField};
use subfinsler_core::operators::{grushin_operator, grushin_operator_p, radial_laplacian_check};
use subfinsler_core::sampling::{random_vector, sample_points, sample_vectors, SamplePolicy, SampleRng};
use subfinsler_core::solutions::{
    intertwining_constant_general, ode_residual, verify_chain_rules, verify_fundamental, verify_intertwining,
    verify_lemma_yam2, verify_lemma_yam3, verify_magic, verify_profile_chain, verify_yamabe, yamabe_residual,
    BigK, FundamentalSolutionSpec, YamabeSolutionSpec,
};
use subfinsler_core::{
    DualSolverConfig, GaugePair, GrushinParams, NormSpec, OperatorContext, Point, Residual, ResidualReport,
    ScalarField, ThetaDualField,
};

use crate::config::{EnergyFunction, RunConfig, SchemeName, Sigma0Config, Tolerances, WulffCurve};
use crate::CliError;

/// Reports of one command plus free-form scalar results.
#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub reports: Vec<ResidualReport>,
    pub extras: Map<String, Value>,
}

impl SuiteOutput {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(ResidualReport::passed)
    }

    fn extend(&mut self, other: SuiteOutput) {
        self.reports.extend(other.reports);
        self.extras.extend(other.extras);
    }
}

/// Coordinate margin used for finite-difference comparisons near ℓᵖ
/// hyperplanes.
const FD_COORDINATE_MARGIN: f64 = 0.05;

pub fn resolve_sigma0(cfg: &RunConfig, rng: &mut SampleRng) -> Result<Vec<f64>, CliError> {
    let k = cfg.params.k;
    match &cfg.sigma0 {
        Sigma0Config::Named(s) if s == "zero" => Ok(vec![0.0; k]),
        Sigma0Config::Named(_) => Ok(random_vector(k, rng)),
        Sigma0Config::Vector(v) if v.len() == k => Ok(v.clone()),
        Sigma0Config::Vector(v) => Err(CliError::Config(format!(
            "sigma0 has length {}, expected k = {k}",
            v.len()
        ))),
    }
}

fn single(suite: &str, tolerance: f64, records: Vec<Residual>) -> ResidualReport {
    let mut r = ResidualReport::new(suite, tolerance);
    r.records = records;
    r
}

/// Primal/dual identities of one norm.
pub fn norm_identity_reports(
    norm: &NormSpec,
    label: &str,
    samples: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<Vec<ResidualReport>, CliError> {
    let mut finabla = Vec::new();
    let mut bp = Vec::new();
    let mut euler = Vec::new();
    for x in samples {
        let p = norm.identity_residuals(x)?;
        finabla.push(Residual::new(x.clone(), p.primal_at_dual_gradient, 1.0));
        finabla.push(Residual::new(x.clone(), p.dual_at_primal_gradient, 1.0));
        bp.push(Residual::new(x.clone(), p.bp_primal, 0.0));
        bp.push(Residual::new(x.clone(), p.bp_dual, 0.0));
        euler.push(Residual::new(x.clone(), p.euler_primal, 0.0));
        euler.push(Residual::new(x.clone(), p.euler_dual, 0.0));
    }
    let dual = norm.dual();
    let pairs = &samples[..samples.len().min(50)];
    let mut cs = Vec::new();
    for x in pairs {
        let mx = norm.eval(x)?;
        for y in pairs {
            let slack = mx * dual.eval(y)? - x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().abs();
            let mut point = x.clone();
            point.extend_from_slice(y);
            cs.push(Residual::new(point, slack.min(0.0), 0.0));
        }
    }
    Ok(vec![
        single(&format!("finabla_{label}"), tol.norm_identities, finabla),
        single(&format!("bp_{label}"), tol.norm_identities, bp),
        single(&format!("euler_{label}"), tol.euler, euler),
        single(&format!("cauchy_schwarz_{label}"), tol.cauchy_schwarz, cs),
    ])
}

fn radial_records<P: Profile + Clone>(
    norm: &NormSpec,
    profile: &P,
    samples: &[Vec<f64>],
    out: &mut Vec<Residual>,
) -> Result<(), CliError> {
    for x in samples {
        let (lhs, rhs) = radial_laplacian_check(norm, profile, x)?;
        out.push(Residual::new(x.clone(), lhs, rhs));
    }
    Ok(())
}

/// `Δ_M(F∘M⁰) = F'' + (n−1)/ψ F'` for four profiles.
pub fn radial_report(
    norm: &NormSpec,
    label: &str,
    samples: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<ResidualReport, CliError> {
    let mut records = Vec::new();
    radial_records(norm, &Power(2.0), samples, &mut records)?;
    radial_records(norm, &Power(3.0), samples, &mut records)?;
    radial_records(norm, &Power(-1.0), samples, &mut records)?;
    radial_records(norm, &Log, samples, &mut records)?;
    Ok(single(&format!("radial_{label}"), tol.radial, records))
}

/// Closed-form `Θ⁰` against the variational oracle, and the Euclidean pair
/// against the explicit gauge.
pub fn gauge_reports(gauge: &GaugePair, samples: &[Point], tol: &Tolerances) -> Result<Vec<ResidualReport>, CliError> {
    let cfg = DualSolverConfig::default();
    let mut duality = Vec::new();
    for pt in samples {
        let closed = gauge.theta_dual(pt)?;
        let oracle = gauge.theta_dual_oracle(pt, &cfg)?;
        duality.push(Residual::with_scale(pt.to_flat(), oracle, closed, closed.abs()));
    }
    let params = *gauge.params();
    let euclid = GaugePair::euclidean(params)?;
    let mut special = Vec::new();
    for pt in samples {
        let r = euclidean_gauge(params.alpha, pt);
        special.push(Residual::with_scale(pt.to_flat(), euclid.theta_dual(pt)?, r, r.abs()));
        special.push(Residual::with_scale(pt.to_flat(), euclid.theta(pt)?, r, r.abs()));
    }
    Ok(vec![
        single("gauge_duality", tol.gauge_duality, duality),
        single("gauge_euclidean", tol.gauge_specialization, special),
    ])
}

fn jet_fd_record<F: ScalarField>(f: &F, x: &[f64]) -> Result<Residual, CliError> {
    let a = jet2_eval(f, x)?;
    let b = fd_jet2(f, x, None)?;
    Ok(Residual::new(x.to_vec(), a.max_order_rel_diff(&b), 0.0))
}

/// Forward jets against central differences on the norm-based fields.
pub fn jets_fd_report(
    gauge: &GaugePair,
    epsilon: f64,
    sigma0: &[f64],
    rng: &mut SampleRng,
    count: usize,
    tol: &Tolerances,
) -> Result<ResidualReport, CliError> {
    let params = gauge.params();
    let mut records = Vec::new();
    for x in sample_vectors(params.m, count, FD_COORDINATE_MARGIN, rng) {
        records.push(jet_fd_record(&NormField(gauge.phi()), &x)?);
        records.push(jet_fd_record(&NormField(gauge.phi_dual()), &x)?);
        records.push(jet_fd_record(&NormSquaredField(gauge.phi()), &x)?);
    }
    for x in sample_vectors(params.k, count, FD_COORDINATE_MARGIN, rng) {
        records.push(jet_fd_record(&NormField(gauge.psi()), &x)?);
        records.push(jet_fd_record(&NormSquaredField(gauge.psi_dual()), &x)?);
    }
    let policy = SamplePolicy {
        hyperplane_margin: FD_COORDINATE_MARGIN,
        z_min: FD_COORDINATE_MARGIN,
        sigma_min: FD_COORDINATE_MARGIN,
        ..Default::default()
    };
    let pts = sample_points(gauge, sigma0, count, &policy, rng)?;
    let k = BigK {
        gauge,
        epsilon,
        sigma0,
    };
    let theta = ThetaDualField(gauge);
    for pt in &pts.points {
        let x = pt.to_flat();
        records.push(jet_fd_record(&k, &x)?);
        let shifted: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| if i < params.m { *v } else { v + sigma0[i - params.m] })
            .collect();
        records.push(jet_fd_record(&theta, &shifted)?);
    }
    let mut r = single("jets_fd", tol.jets_fd, records);
    r.excluded_count = pts.excluded;
    Ok(r)
}

/// Both chain rules for `F∘K` with `F(t) = t³` and `F(t) = t^{−(m+2k−2)}`.
pub fn chain_rule_reports(
    ctx: &OperatorContext,
    epsilon: f64,
    sigma0: &[f64],
    samples: &[Point],
    tol: &Tolerances,
) -> Result<Vec<ResidualReport>, CliError> {
    let params = ctx.gauge().params();
    let k = BigK {
        gauge: ctx.gauge(),
        epsilon,
        sigma0,
    };
    let e = -(params.m as f64 + 2.0 * params.k as f64 - 2.0);
    let mut out = Vec::new();
    out.extend(verify_chain_rules(ctx, &k, &Power(3.0), samples, tol.chain_rule, "cube")?);
    out.extend(verify_chain_rules(ctx, &k, &Power(e), samples, tol.chain_rule, "decay")?);
    Ok(out)
}

pub fn check_identities(cfg: &RunConfig, rng: &mut SampleRng) -> Result<SuiteOutput, CliError> {
    let tol = &cfg.tolerances;
    let gauge = cfg.gauge()?;
    let params = *gauge.params();
    let sigma0 = resolve_sigma0(cfg, rng)?;
    let n = cfg.sample_count;
    let mut out = SuiteOutput::default();

    let zs = sample_vectors(params.m, n, 1e-3, rng);
    let ss = sample_vectors(params.k, n, 1e-3, rng);
    out.reports.extend(norm_identity_reports(gauge.phi(), "phi", &zs, tol)?);
    out.reports.extend(norm_identity_reports(gauge.psi(), "psi", &ss, tol)?);
    out.reports.push(radial_report(gauge.phi(), "phi", &zs, tol)?);
    out.reports.push(radial_report(gauge.psi(), "psi", &ss, tol)?);

    let samples = sample_points(&gauge, &sigma0, n, &SamplePolicy::default(), rng)?;
    let ctx = OperatorContext::from(gauge.clone());
    let mut chain = chain_rule_reports(&ctx, cfg.epsilon, &sigma0, &samples.points, tol)?;
    chain.iter_mut().for_each(|r| r.excluded_count = samples.excluded);
    out.reports.extend(chain);

    let centred = sample_points(&gauge, &vec![0.0; params.k], n, &SamplePolicy::default(), rng)?;
    out.reports.extend(gauge_reports(&gauge, &centred.points, tol)?);
    out.reports.push(jets_fd_report(&gauge, cfg.epsilon, &sigma0, rng, n.min(100), tol)?);
    out.extras.insert("sigma0".into(), json!(sigma0));
    Ok(out)
}

fn yamabe_spec(cfg: &RunConfig, sigma0: Vec<f64>) -> Result<YamabeSolutionSpec, CliError> {
    let gauge = cfg.gauge()?;
    let p = gauge.params();
    if p.alpha != 1.0 || p.p != 2.0 {
        return Err(CliError::Config(format!(
            "verify-yamabe needs alpha = 1 and p = 2, got alpha = {}, p = {}",
            p.alpha, p.p
        )));
    }
    if p.m as f64 + 2.0 * (p.k as f64 - 1.0) <= 0.0 {
        return Err(CliError::Config("verify-yamabe needs m + 2(k−1) > 0".into()));
    }
    Ok(YamabeSolutionSpec::new(gauge, cfg.epsilon, sigma0)?)
}

/// Main residual, lemma chain, intertwining, scaling and translation suites.
pub fn yamabe_reports(
    spec: &YamabeSolutionSpec,
    samples: &[Point],
    tol: &Tolerances,
) -> Result<SuiteOutput, CliError> {
    let lemma = tol.lemma_for(spec.gauge());
    let mut out = SuiteOutput::default();
    out.reports.push(verify_yamabe(spec, samples, tol.yamabe, false)?);
    out.reports.push(verify_yamabe(spec, samples, tol.yamabe_fd, true)?);
    out.reports.push(verify_lemma_yam3(spec, samples, lemma)?);
    out.reports.extend(verify_lemma_yam2(spec, samples, lemma)?);
    let magic = verify_magic(spec, samples, lemma)?;
    out.reports.push(magic.report.clone());
    out.reports.push(single(
        "magic_constant",
        tol.magic_recovery,
        vec![Residual::with_scale(
            vec![],
            magic.recovered,
            magic.expected,
            magic.expected.abs(),
        )],
    ));
    out.reports.push(verify_intertwining(spec, samples, lemma)?);
    let lambda = spec.intertwining_constant();
    out.reports.push(single(
        "intertwining_constant",
        tol.scaling,
        vec![Residual::with_scale(
            vec![],
            intertwining_constant_general(spec),
            lambda,
            lambda.abs(),
        )],
    ));
    out.reports.extend(verify_profile_chain(
        spec.context(),
        spec.epsilon(),
        spec.sigma0(),
        samples,
        lemma,
    )?);

    let q = spec.gauge().params().homogeneous_dimension();
    let mut ode = Vec::new();
    let rho = spec.rho_field(1.0);
    for pt in samples {
        let r = subfinsler_core::jets::eval(&rho, &pt.to_flat())?;
        ode.push(ode_residual(q, r));
    }
    out.reports.push(single("ode", tol.ode, ode));

    let k = spec.k_field();
    let mut scaling = Vec::new();
    for pt in samples {
        let base = grushin_operator(spec.context(), &k, pt)?;
        for factor in [2.0, 10.0] {
            let s = grushin_operator(spec.context(), &Scaled { factor, inner: k }, pt)?;
            scaling.push(Residual::new(pt.to_flat(), s, factor * base));
        }
    }
    out.reports.push(single("operator_scaling", tol.scaling, scaling));

    let centred = YamabeSolutionSpec::with_context(
        spec.context().clone(),
        spec.epsilon(),
        vec![0.0; spec.sigma0().len()],
    )?;
    let mut translation = Vec::new();
    for pt in samples {
        let a = yamabe_residual(spec, pt)?;
        let moved = Point::new(
            pt.z.clone(),
            pt.sigma.iter().zip(spec.sigma0()).map(|(s, o)| s + o).collect(),
        );
        let b = yamabe_residual(&centred, &moved)?;
        translation.push(Residual::new(pt.to_flat(), a.lhs - a.rhs, b.lhs - b.rhs));
    }
    out.reports.push(single("translation", tol.translation, translation));

    out.extras.insert("magic_constant_recovered".into(), json!(magic.recovered));
    out.extras.insert("magic_constant_expected".into(), json!(magic.expected));
    out.extras.insert("intertwining_constant".into(), json!(lambda));
    out.extras.insert("critical_exponent".into(), json!(spec.critical_exponent()));
    out.extras.insert("prefactor".into(), json!(spec.prefactor()));
    Ok(out)
}

pub fn verify_yamabe_cmd(cfg: &RunConfig, rng: &mut SampleRng) -> Result<SuiteOutput, CliError> {
    let sigma0 = resolve_sigma0(cfg, rng)?;
    let spec = yamabe_spec(cfg, sigma0.clone())?;
    let samples = sample_points(spec.gauge(), &sigma0, cfg.sample_count, &SamplePolicy::default(), rng)?;
    let mut out = yamabe_reports(&spec, &samples.points, &cfg.tolerances)?;
    out.reports.iter_mut().for_each(|r| r.excluded_count = samples.excluded);
    out.extras.insert("sigma0".into(), json!(sigma0));
    out.extras.insert("epsilon".into(), json!(cfg.epsilon));
    Ok(out)
}

/// Annihilation of the fundamental solution by `𝓛_p` for one `(α, p)`.
pub fn fundamental_reports(
    gauge: &GaugePair,
    samples: &[Point],
    tol: &Tolerances,
) -> Result<SuiteOutput, CliError> {
    let spec = FundamentalSolutionSpec::new(gauge.clone());
    let mut out = SuiteOutput::default();
    out.reports.push(verify_fundamental(&spec, samples, tol.fundamental)?);
    let p = gauge.params();
    let key = format!("alpha{}_p{}", p.alpha, p.p);
    out.extras.insert(
        format!("{key}_branch"),
        json!(if spec.is_logarithmic() { "log" } else { "power" }),
    );
    out.extras.insert(format!("{key}_exponent"), json!(spec.exponent()));
    Ok(out)
}

/// `𝓛_p` with `p = 2` against `𝓛` on the `p = 2` fundamental solution.
pub fn p2_reduction_report(gauge: &GaugePair, samples: &[Point], tol: &Tolerances) -> Result<ResidualReport, CliError> {
    let p = gauge.params();
    let g2 = gauge.with_params(GrushinParams::new(p.m, p.k, p.alpha, 2.0)?)?;
    let spec = FundamentalSolutionSpec::new(g2);
    let field = spec.field();
    let mut records = Vec::new();
    for pt in samples {
        let a = grushin_operator_p(spec.context(), &field, pt)?;
        let b = grushin_operator(spec.context(), &field, pt)?;
        records.push(Residual::new(pt.to_flat(), a, b));
    }
    Ok(single(&format!("p2_reduction_alpha{}", p.alpha), tol.p2_reduction, records))
}

pub fn verify_fundamental_cmd(cfg: &RunConfig, rng: &mut SampleRng) -> Result<SuiteOutput, CliError> {
    let tol = &cfg.tolerances;
    let mut out = SuiteOutput::default();
    let mut seen_alpha: Vec<f64> = Vec::new();
    let policy = SamplePolicy::default().with_theta_range(0.5, 2.0);
    for case in &cfg.fundamental {
        let params = case.params(cfg.params.m, cfg.params.k)?;
        let gauge = cfg.gauge_with(params)?;
        let samples = sample_points(&gauge, &vec![0.0; params.k], cfg.sample_count, &policy, rng)?;
        let mut o = fundamental_reports(&gauge, &samples.points, tol)?;
        if !seen_alpha.contains(&params.alpha) {
            seen_alpha.push(params.alpha);
            o.reports.push(p2_reduction_report(&gauge, &samples.points, tol)?);
        }
        o.reports.iter_mut().for_each(|r| r.excluded_count = samples.excluded);
        out.extend(o);
    }
    Ok(out)
}

/// Closed polyline on `{Φ⁰ = 1}`, `{Ψ⁰ = 1}` or `{Θ⁰ = 1}` (with `m = k = 1`).
pub fn wulff_cmd(cfg: &RunConfig) -> Result<SuiteOutput, CliError> {
    let gauge = cfg.gauge()?;
    let p = gauge.params();
    let n = cfg.wulff.points;
    if n < 3 {
        return Err(CliError::Config(format!("wulff needs at least 3 points, got {n}")));
    }
    let mut records = Vec::with_capacity(n + 1);
    let curve = cfg.wulff.curve;
    let (dim_ok, what) = match curve {
        WulffCurve::Phi => (p.m == 2, format!("phi layer has dimension m = {}", p.m)),
        WulffCurve::Psi => (p.k == 2, format!("psi layer has dimension k = {}", p.k)),
        WulffCurve::Gauge => (p.m == 1 && p.k == 1, format!("gauge slice needs m = k = 1, got m = {}, k = {}", p.m, p.k)),
    };
    if !dim_ok {
        return Err(CliError::Config(format!("wulff curves are 2-D only: {what}")));
    }
    for j in 0..n {
        let a = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let d = [a.cos(), a.sin()];
        let (x, level) = match curve {
            WulffCurve::Phi | WulffCurve::Psi => {
                let dual = if curve == WulffCurve::Phi { gauge.phi_dual() } else { gauge.psi_dual() };
                let r = dual.eval(&d)?;
                let x = vec![d[0] / r, d[1] / r];
                let level = dual.eval(&x)?;
                (x, level)
            }
            WulffCurve::Gauge => {
                let pt = Point::new(vec![d[0]], vec![d[1]]);
                let t = gauge.theta_dual(&pt)?;
                let x = subfinsler_core::dilate(p, 1.0 / t, &pt)?;
                let level = gauge.theta_dual(&x)?;
                (x.to_flat(), level)
            }
        };
        records.push(Residual::new(x, level, 1.0));
    }
    records.push(records[0].clone());
    let suite = match curve {
        WulffCurve::Phi => "wulff_phi",
        WulffCurve::Psi => "wulff_psi",
        WulffCurve::Gauge => "wulff_gauge",
    };
    let mut out = SuiteOutput::default();
    out.reports.push(single(suite, cfg.tolerances.wulff, records));
    out.extras.insert("distinct_points".into(), json!(n));
    Ok(out)
}

fn scheme(s: SchemeName) -> QuadratureScheme {
    match s {
        SchemeName::Midpoint => QuadratureScheme::Midpoint,
        SchemeName::GaussLegendre => QuadratureScheme::GaussLegendre,
    }
}

fn ratio_record(lhs: f64, rhs: f64) -> Residual {
    Residual::with_scale(vec![], lhs, rhs, rhs.abs().max(f64::MIN_POSITIVE))
}

/// Refinement, dilation drift and homogeneity of the quotient, plus the
/// measure scaling of the box.
fn quotient_suites<U: ScalarField + Copy>(
    ctx: &OperatorContext,
    u: U,
    quad: &QuadratureSpec,
    dilations: &[f64],
    tol: &Tolerances,
    gate_fixed_box: bool,
    out: &mut SuiteOutput,
) -> Result<(), CliError> {
    let base = sobolev_quotient(ctx, &u, quad)?;
    let fine = sobolev_quotient(ctx, &u, &quad.refined())?;
    out.reports.push(single(
        "lq_refinement",
        tol.lq_refinement,
        vec![ratio_record(base.lq_norm, fine.lq_norm)],
    ));
    out.reports.push(single(
        "quotient_refinement",
        tol.quotient_refinement,
        vec![ratio_record(base.quotient, fine.quotient)],
    ));
    // On the fixed box a compactly supported function is cut off or under
    // resolved after dilation, so its drift there is only reported.
    let mut drift = Vec::new();
    let mut fixed_only = Vec::new();
    for &t in dilations {
        let d = dilation_drift(ctx, u, quad, t)?;
        drift.push(Residual::with_scale(vec![t], d.mapped, d.base, d.base.abs()));
        if gate_fixed_box {
            drift.push(Residual::with_scale(vec![t], d.fixed, d.base, d.base.abs()));
        } else {
            fixed_only.push(json!({ "t": t, "quotient": d.fixed, "drift": d.fixed_drift() }));
        }
    }
    if !fixed_only.is_empty() {
        out.extras.insert("quotient_dilation_fixed_box".into(), json!(fixed_only));
    }
    out.reports.push(single("quotient_dilation", tol.quotient_dilation, drift));
    let scaled = sobolev_quotient(ctx, &Scaled { factor: 3.0, inner: u }, quad)?;
    out.reports.push(single(
        "quotient_homogeneity",
        tol.homogeneity,
        vec![ratio_record(scaled.quotient, base.quotient)],
    ));
    out.extras.insert("quotient".into(), json!(base.quotient));
    out.extras.insert("quotient_refined".into(), json!(fine.quotient));
    out.extras.insert("lq_norm".into(), json!(base.lq_norm));
    out.extras.insert("lq_norm_refined".into(), json!(fine.lq_norm));
    out.extras.insert("energy".into(), json!(base.energy));
    out.extras.insert("energy_refined".into(), json!(fine.energy));
    out.extras.insert("critical_q".into(), json!(base.exponent));
    out.extras.insert("excluded_nodes".into(), json!(base.excluded as u64));
    Ok(())
}

fn measure_scaling_report(params: &GrushinParams, quad: &QuadratureSpec, dilations: &[f64], tol: &Tolerances) -> Result<ResidualReport, CliError> {
    let bump = Bump {
        radii: quad.half_widths().iter().map(|h| 0.8 * h).collect(),
        height: 1.0,
    };
    let base = integrate(quad, |x| subfinsler_core::jets::eval(&bump, x).ok())?.value;
    let mut records = Vec::new();
    for &t in dilations {
        let q = params.homogeneous_dimension();
        let big = quad.dilated(params, t)?;
        let vol = integrate(&big, |_| Some(1.0))?.value / integrate(quad, |_| Some(1.0))?.value;
        records.push(Residual::with_scale(vec![t], vol, t.powf(q), t.powf(q)));
        let shrink = Dilated {
            inner: &bump,
            params,
            t: 1.0 / t,
        };
        let v = integrate(&big, |x| subfinsler_core::jets::eval(&shrink, x).ok())?.value;
        records.push(Residual::with_scale(vec![t], v / base, t.powf(q), t.powf(q)));
    }
    Ok(single("measure_scaling", tol.measure_scaling, records))
}

pub fn energy_cmd(cfg: &RunConfig) -> Result<SuiteOutput, CliError> {
    let tol = &cfg.tolerances;
    let e = &cfg.energy;
    let params = cfg.grushin_params()?;
    if params.dimension() > energy::MAX_QUADRATURE_DIMENSION {
        return Err(CliError::Config(format!(
            "energy supports m + k <= {}, got {}",
            energy::MAX_QUADRATURE_DIMENSION,
            params.dimension()
        )));
    }
    let gauge = cfg.gauge()?;
    let ctx = OperatorContext::from(gauge.clone());
    let (default_width, default_growth) = match e.function {
        EnergyFunction::Yamabe => (20.0, 3.0),
        EnergyFunction::Bump | EnergyFunction::Zero => (1.2, 1.0),
    };
    let quad = QuadratureSpec::gauge_box(&params, e.half_width.unwrap_or(default_width), e.points_per_axis, scheme(e.scheme))?
        .with_gauge_growth(&params, e.panel_growth.unwrap_or(default_growth))?
        .with_budget(e.budget as u128);
    let mut out = SuiteOutput::default();
    out.reports.push(measure_scaling_report(&params, &quad, &e.dilations, tol)?);
    match e.function {
        EnergyFunction::Zero => {
            let v = energy_of(&ctx, &Zero(params.dimension()), &quad)?;
            out.reports.push(single("energy_zero", tol.energy_oracle, vec![Residual::new(vec![], v.value, 0.0)]));
            out.extras.insert("energy".into(), json!(v.value));
        }
        EnergyFunction::Bump => {
            let bump = Bump {
                radii: vec![1.0; params.dimension()],
                height: 1.0,
            };
            let a = energy_of(&ctx, &bump, &quad)?;
            let b = energy_of(&ctx, &bump, &quad.refined())?;
            let f = energy_fd(&ctx, &bump, &quad, 1e-5)?;
            out.reports.push(single("energy_refinement", tol.energy_refinement, vec![ratio_record(a.value, b.value)]));
            out.reports.push(single("energy_fd_oracle", tol.energy_oracle, vec![ratio_record(f.value, a.value)]));
            out.extras.insert("energy_fd".into(), json!(f.value));
            if params.p < params.homogeneous_dimension() {
                quotient_suites(&ctx, &bump, &quad, &e.dilations, tol, false, &mut out)?;
            }
        }
        EnergyFunction::Yamabe => {
            let sigma0 = match &cfg.sigma0 {
                Sigma0Config::Vector(v) => v.clone(),
                _ => vec![0.0; params.k],
            };
            let spec = yamabe_spec(cfg, sigma0)?;
            let u = spec.solution_field();
            quotient_suites(spec.context(), u, &quad, &e.dilations, tol, true, &mut out)?;
            let half = QuadratureSpec::gauge_box(&params, 0.5 * e.half_width.unwrap_or(default_width), e.points_per_axis, scheme(e.scheme))?
                .with_gauge_growth(&params, e.panel_growth.unwrap_or(default_growth))?
                .with_budget(e.budget as u128);
            let q = out.extras["critical_q"].as_f64().unwrap_or(f64::NAN);
            let full_i = lq_norm(&u, q, &quad)?.value.powf(q);
            let half_i = lq_norm(&u, q, &half)?.value.powf(q);
            // |u|^q decays like Θ⁰^{−2Q}, so the tail rate over the volume is Q.
            let tail = tail_estimate(full_i, half_i, params.homogeneous_dimension());
            out.extras.insert("lq_tail_estimate".into(), json!(tail / full_i));
        }
    }
    out.extras.insert("points_per_axis".into(), json!(quad.nodes_per_axis()));
    out.extras.insert("half_widths".into(), json!(quad.half_widths()));
    Ok(out)
}
