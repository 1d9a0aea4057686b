//! Explicit solutions and the pointwise identity suites behind them.
//!
//! For `α = 1`, `c = m + 2(k−1)` and
//!
//! ```text
//! K(z, σ) = (ε² + Φ⁰(z)²)² + 16 Ψ⁰(σ + σ₀)²,     ρ = K^{1/4},
//! u(z, σ) = (m c ε² / K)^{c/4}
//! ```
//!
//! `u` solves `𝓛u = −u^{(m+2k+2)/(m+2k−2)}`. The suites check each step of
//! the derivation separately: `W(K) = 16Φ⁰²K`, the block Laplacians of `K`,
//! `4𝓛K = (m+2k+2)W(K)/K + 16mε²`, and `𝓛ρ^{−c} = −mcε² ρ^{−c−4}`.
//!
//! The fundamental solutions are `Θ⁰^{−(Q−p)/(p−1)}` for `p ≠ Q` and
//! `log Θ⁰` for `p = Q`, up to a constant factor.

use crate::error::{Error, Result};
use crate::gauge::{GaugePair, Point};
use crate::jets::{jet2_eval, Power, Profile, Scalar, ScalarField};
use crate::operators::{
    chain_rule_residuals, gradient_square_from_gradient, grushin_operator, grushin_operator_fd,
    grushin_operator_from_jet, grushin_operator_p_from_jet, layer_laplacians_from_jet,
    OperatorContext,
};
use crate::report::{Residual, ResidualReport};

/// Tolerance used to pick the logarithmic branch of the fundamental solution.
pub const LOG_BRANCH_TOLERANCE: f64 = 1e-12;

/// Normalisation of the Yamabe-type solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YamabeScaling {
    /// `u = (m c ε²/K)^{c/4}`, solving `𝓛u = −u^{crit}`.
    #[default]
    Unit,
    /// `u = (c ε²/K)^{c/4}`, solving `𝓛u = −m u^{crit}`.
    Reduced,
}

/// `K(z, σ) = (ε² + Φ⁰(z)²)² + 16 Ψ⁰(σ+σ₀)²` as a field on `ℝ^{m+k}`.
///
/// Any `α` is accepted; only the `α = 1` case is a Yamabe profile.
#[derive(Debug, Clone, Copy)]
pub struct BigK<'a> {
    pub gauge: &'a GaugePair,
    pub epsilon: f64,
    pub sigma0: &'a [f64],
}

impl BigK<'_> {
    fn shifted(&self, x: &[f64]) -> Vec<f64> {
        let m = self.gauge.params().m;
        x[m..].iter().zip(self.sigma0).map(|(a, b)| a + b).collect()
    }
}

impl ScalarField for BigK<'_> {
    fn dimension(&self) -> usize {
        self.gauge.params().dimension()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let m = self.gauge.params().m;
        let (z, s) = x.split_at(m);
        let s: Vec<S> = s.iter().zip(self.sigma0).map(|(a, b)| a.clone() + *b).collect();
        let inner = self.gauge.phi_dual().apply_squared(z) + self.epsilon * self.epsilon;
        inner.square() + self.gauge.psi_dual().apply_squared(&s) * 16.0
    }

    fn is_singular(&self, x: &[f64]) -> bool {
        let m = self.gauge.params().m;
        self.gauge.phi_dual().is_singular_squared(&x[..m])
            || self.gauge.psi_dual().is_singular_squared(&self.shifted(x))
    }
}

/// `K^{e/(2(α+1))}`, i.e. `ρ^e` with `ρ = K^{1/(2(α+1))}`.
#[derive(Debug, Clone, Copy)]
pub struct RhoPower<'a> {
    pub k: BigK<'a>,
    pub exponent: f64,
}

impl ScalarField for RhoPower<'_> {
    fn dimension(&self) -> usize {
        self.k.dimension()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let a = self.k.gauge.params().alpha;
        self.k.eval(x).powf(self.exponent / (2.0 * (a + 1.0)))
    }
    fn is_singular(&self, x: &[f64]) -> bool {
        self.k.is_singular(x)
    }
}

/// `(prefactor / K)^{c/4}`.
#[derive(Debug, Clone, Copy)]
pub struct YamabeField<'a> {
    pub k: BigK<'a>,
    pub prefactor: f64,
    pub exponent: f64,
}

impl ScalarField for YamabeField<'_> {
    fn dimension(&self) -> usize {
        self.k.dimension()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.k.eval(x).recip().powf(self.exponent) * self.prefactor.powf(self.exponent)
    }
    fn is_singular(&self, x: &[f64]) -> bool {
        self.k.is_singular(x)
    }
}

/// Parameters of the Yamabe-type solution.
#[derive(Debug, Clone, PartialEq)]
pub struct YamabeSolutionSpec {
    ctx: OperatorContext,
    epsilon: f64,
    sigma0: Vec<f64>,
    scaling: YamabeScaling,
}

impl YamabeSolutionSpec {
    pub fn new(gauge: GaugePair, epsilon: f64, sigma0: Vec<f64>) -> Result<Self> {
        Self::with_context(OperatorContext::from(gauge), epsilon, sigma0)
    }

    pub fn with_context(ctx: OperatorContext, epsilon: f64, sigma0: Vec<f64>) -> Result<Self> {
        let params = *ctx.gauge().params();
        if params.alpha != 1.0 || params.p != 2.0 {
            return Err(Error::InvalidParameter(format!(
                "Yamabe solutions need alpha = 1 and p = 2, got alpha = {}, p = {}",
                params.alpha, params.p
            )));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
        }
        if sigma0.len() != params.k {
            return Err(Error::DimensionMismatch {
                expected: params.k,
                got: sigma0.len(),
            });
        }
        Ok(YamabeSolutionSpec {
            ctx,
            epsilon,
            sigma0,
            scaling: YamabeScaling::Unit,
        })
    }

    pub fn with_scaling(mut self, scaling: YamabeScaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn context(&self) -> &OperatorContext {
        &self.ctx
    }

    pub fn gauge(&self) -> &GaugePair {
        self.ctx.gauge()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sigma0(&self) -> &[f64] {
        &self.sigma0
    }

    pub fn scaling(&self) -> YamabeScaling {
        self.scaling
    }

    /// `c = m + 2(k−1)`.
    pub fn decay(&self) -> f64 {
        let p = self.gauge().params();
        p.m as f64 + 2.0 * (p.k as f64 - 1.0)
    }

    /// `(m+2k+2)/(m+2k−2)`.
    pub fn critical_exponent(&self) -> f64 {
        let c = self.decay();
        (c + 4.0) / c
    }

    /// The constant `a` in `u = (a/K)^{c/4}`.
    pub fn prefactor(&self) -> f64 {
        let base = self.decay() * self.epsilon * self.epsilon;
        match self.scaling {
            YamabeScaling::Unit => self.gauge().params().m as f64 * base,
            YamabeScaling::Reduced => base,
        }
    }

    /// The constant `b` in `𝓛u = −b u^{crit}`.
    pub fn equation_coefficient(&self) -> f64 {
        match self.scaling {
            YamabeScaling::Unit => 1.0,
            YamabeScaling::Reduced => self.gauge().params().m as f64,
        }
    }

    /// `A = 16 m ε²`.
    pub fn magic_constant(&self) -> f64 {
        16.0 * self.gauge().params().m as f64 * self.epsilon * self.epsilon
    }

    /// `λ = m c ε²`.
    pub fn intertwining_constant(&self) -> f64 {
        self.gauge().params().m as f64 * self.decay() * self.epsilon * self.epsilon
    }

    pub fn k_field(&self) -> BigK<'_> {
        BigK {
            gauge: self.gauge(),
            epsilon: self.epsilon,
            sigma0: &self.sigma0,
        }
    }

    pub fn rho_field(&self, exponent: f64) -> RhoPower<'_> {
        RhoPower {
            k: self.k_field(),
            exponent,
        }
    }

    pub fn solution_field(&self) -> YamabeField<'_> {
        YamabeField {
            k: self.k_field(),
            prefactor: self.prefactor(),
            exponent: self.decay() / 4.0,
        }
    }
}

fn flat(spec_gauge: &GaugePair, pt: &Point) -> Result<Vec<f64>> {
    let p = spec_gauge.params();
    if pt.z.len() != p.m || pt.sigma.len() != p.k {
        return Err(Error::DimensionMismatch {
            expected: p.dimension(),
            got: pt.z.len() + pt.sigma.len(),
        });
    }
    Ok(pt.to_flat())
}

fn value_at<F: ScalarField>(gauge: &GaugePair, f: &F, pt: &Point) -> Result<f64> {
    crate::jets::eval(f, &flat(gauge, pt)?)
}

/// `K(pt)`.
pub fn big_k(spec: &YamabeSolutionSpec, pt: &Point) -> Result<f64> {
    value_at(spec.gauge(), &spec.k_field(), pt)
}

/// `ρ(pt) = K(pt)^{1/4}`.
pub fn rho(spec: &YamabeSolutionSpec, pt: &Point) -> Result<f64> {
    value_at(spec.gauge(), &spec.rho_field(1.0), pt)
}

/// The Yamabe-type solution at `pt`.
pub fn yamabe_solution(spec: &YamabeSolutionSpec, pt: &Point) -> Result<f64> {
    value_at(spec.gauge(), &spec.solution_field(), pt)
}

/// `K` with `ε = 0`, which equals `Θ⁰⁴` when `α = 1`.
pub fn big_k_degenerate(gauge: &GaugePair, pt: &Point) -> Result<f64> {
    let zero = vec![0.0; gauge.params().k];
    let k = BigK {
        gauge,
        epsilon: 0.0,
        sigma0: &zero,
    };
    value_at(gauge, &k, pt)
}

/// `𝓛u` against `−b u^{crit}`.
pub fn yamabe_residual(spec: &YamabeSolutionSpec, pt: &Point) -> Result<Residual> {
    let u = spec.solution_field();
    let x = flat(spec.gauge(), pt)?;
    let jet = jet2_eval(&u, &x)?;
    let lhs = grushin_operator_from_jet(spec.context(), &pt.z, &jet)?;
    let rhs = -spec.equation_coefficient() * jet.value().powf(spec.critical_exponent());
    Ok(Residual::new(x, lhs, rhs))
}

/// As [`yamabe_residual`], with `𝓛u` from nested finite differences.
pub fn yamabe_residual_fd(spec: &YamabeSolutionSpec, pt: &Point) -> Result<Residual> {
    let u = spec.solution_field();
    let x = flat(spec.gauge(), pt)?;
    let lhs = grushin_operator_fd(spec.context(), &u, pt, Some(fd_outer_step(spec, &x)))?;
    let value = crate::jets::eval(&u, &x)?;
    let rhs = -spec.equation_coefficient() * value.powf(spec.critical_exponent());
    Ok(Residual::new(x, lhs, rhs))
}

/// Default outer step of the difference oracle, shrunk to a tenth of the
/// distance to the coordinate hyperplanes where a non-smooth dual layer makes
/// `u` lose regularity.
fn fd_outer_step(spec: &YamabeSolutionSpec, x: &[f64]) -> f64 {
    let gauge = spec.gauge();
    let m = gauge.params().m;
    let (z, s) = x.split_at(m);
    let shifted: Vec<f64> = s.iter().zip(spec.sigma0()).map(|(a, b)| a + b).collect();
    let distance = gauge
        .phi()
        .dual()
        .singular_margin_squared(z)
        .min(gauge.psi().dual().singular_margin_squared(&shifted));
    let scale = 1.0 + x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    (1e-3 * scale).min(0.1 * distance)
}

/// Runs [`yamabe_residual`] (or its finite-difference variant) over samples.
pub fn verify_yamabe(
    spec: &YamabeSolutionSpec,
    samples: &[Point],
    tolerance: f64,
    finite_differences: bool,
) -> Result<ResidualReport> {
    let suite = if finite_differences { "yamabe_fd" } else { "yamabe" };
    let mut report = ResidualReport::new(suite, tolerance);
    for pt in samples {
        report.push(if finite_differences {
            yamabe_residual_fd(spec, pt)?
        } else {
            yamabe_residual(spec, pt)?
        });
    }
    Ok(report)
}

struct KData {
    x: Vec<f64>,
    k: f64,
    w: f64,
    lap_z: f64,
    lap_s: f64,
    op: f64,
    phi0_sq: f64,
}

fn k_data(ctx: &OperatorContext, k: &BigK<'_>, pt: &Point) -> Result<KData> {
    let x = flat(ctx.gauge(), pt)?;
    let jet = jet2_eval(k, &x)?;
    let w = gradient_square_from_gradient(ctx, &pt.z, jet.gradient());
    let (lap_z, lap_s) = layer_laplacians_from_jet(ctx, &jet)?;
    let op = grushin_operator_from_jet(ctx, &pt.z, &jet)?;
    let phi0_sq = ctx.gauge().phi_dual().apply_squared(&pt.z);
    Ok(KData {
        x,
        k: jet.value(),
        w,
        lap_z,
        lap_s,
        op,
        phi0_sq,
    })
}

/// `W(K)` against `16 Φ⁰(z)² K`.
pub fn verify_lemma_yam3(
    spec: &YamabeSolutionSpec,
    samples: &[Point],
    tolerance: f64,
) -> Result<ResidualReport> {
    let mut report = ResidualReport::new("lemma_gradient_square", tolerance);
    let field = spec.k_field();
    for pt in samples {
        let d = k_data(spec.context(), &field, pt)?;
        report.push(Residual::new(d.x, d.w, 16.0 * d.phi0_sq * d.k));
    }
    Ok(report)
}

/// `Δ_Φ K = (4m+8)Φ⁰² + 4mε²`, `Δ_Ψ K = 32k` and
/// `𝓛K = 4(m+2k+2)Φ⁰² + 4mε²`, as three reports.
pub fn verify_lemma_yam2(
    spec: &YamabeSolutionSpec,
    samples: &[Point],
    tolerance: f64,
) -> Result<[ResidualReport; 3]> {
    let p = spec.gauge().params();
    let (m, k) = (p.m as f64, p.k as f64);
    let e2 = spec.epsilon * spec.epsilon;
    let mut lz = ResidualReport::new("lemma_horizontal_laplacian", tolerance);
    let mut ls = ResidualReport::new("lemma_vertical_laplacian", tolerance);
    let mut op = ResidualReport::new("lemma_operator", tolerance);
    let field = spec.k_field();
    for pt in samples {
        let d = k_data(spec.context(), &field, pt)?;
        lz.push(Residual::new(d.x.clone(), d.lap_z, (4.0 * m + 8.0) * d.phi0_sq + 4.0 * m * e2));
        ls.push(Residual::new(d.x.clone(), d.lap_s, 32.0 * k));
        op.push(Residual::new(
            d.x,
            d.op,
            4.0 * (m + 2.0 * k + 2.0) * d.phi0_sq + 4.0 * m * e2,
        ));
    }
    Ok([lz, ls, op])
}

/// Result of [`verify_magic`].
#[derive(Debug, Clone, PartialEq)]
pub struct MagicReport {
    pub report: ResidualReport,
    /// Least-squares estimate of `A` over the samples.
    pub recovered: f64,
    pub expected: f64,
}

impl MagicReport {
    pub fn recovered_rel_error(&self) -> f64 {
        (self.recovered - self.expected).abs() / self.expected.abs()
    }
}

/// `4𝓛K − (m+2k+2)W(K)/K` against `A = 16mε²`, relative to `A + |4𝓛K|`.
pub fn verify_magic(
    spec: &YamabeSolutionSpec,
    samples: &[Point],
    tolerance: f64,
) -> Result<MagicReport> {
    let p = spec.gauge().params();
    let q = p.homogeneous_dimension();
    let a = spec.magic_constant();
    let mut report = ResidualReport::new("magic", tolerance);
    let field = spec.k_field();
    let mut sum = 0.0;
    for pt in samples {
        let d = k_data(spec.context(), &field, pt)?;
        let lhs = 4.0 * d.op - (q + 2.0) * d.w / d.k;
        sum += lhs;
        report.push(Residual::with_scale(d.x, lhs, a, a + (4.0 * d.op).abs()));
    }
    let recovered = if samples.is_empty() {
        f64::NAN
    } else {
        sum / samples.len() as f64
    };
    Ok(MagicReport {
        report,
        recovered,
        expected: a,
    })
}

/// `λ = A(Q−2)/(4(α+1)²)` from the general formula, with `α = 1`.
pub fn intertwining_constant_general(spec: &YamabeSolutionSpec) -> f64 {
    let p = spec.gauge().params();
    spec.magic_constant() * (p.homogeneous_dimension() - 2.0) / p.coupling()
}

/// `𝓛(ρ^{−c})` against `−λ ρ^{−c−4}`, `λ = m c ε²`.
pub fn verify_intertwining(
    spec: &YamabeSolutionSpec,
    samples: &[Point],
    tolerance: f64,
) -> Result<ResidualReport> {
    let c = spec.decay();
    let lambda = spec.intertwining_constant();
    let u = spec.rho_field(-c);
    let r = spec.rho_field(1.0);
    let mut report = ResidualReport::new("intertwining", tolerance);
    for pt in samples {
        let x = flat(spec.gauge(), pt)?;
        let lhs = grushin_operator(spec.context(), &u, pt)?;
        let rho = crate::jets::eval(&r, &x)?;
        report.push(Residual::new(x, lhs, -lambda * rho.powf(-c - 4.0)));
    }
    Ok(report)
}

/// `F''(t) + (Q−1)/t F'(t)` for `F(t) = t^{−(Q−2)}`, relative to `|F''(t)|`.
pub fn ode_residual(q: f64, t: f64) -> Residual {
    let (_, d1, d2) = Power(-(q - 2.0)).derivatives(t);
    Residual::with_scale(vec![t], d2 + (q - 1.0) / t * d1, 0.0, d2.abs().max(f64::MIN_POSITIVE))
}

/// The three identities behind the intertwining equation for any `α`, with
/// `ρ = K^{1/(2(α+1))}`, `F(t) = t^{−(Q−2)}` and `c = 4(α+1)²`:
///
/// ```text
/// W(ρ)  = W(K) / (c ρ^{4α+2})
/// 𝓛ρ    = 𝓛K / (2(α+1) ρ^{2α+1}) − (2α+1) W(K) / (c ρ^{4α+3})
/// 𝓛F(ρ) = [2(α+1) F'(ρ)/ρ · K 𝓛K + (F''(ρ) − (2α+1)F'(ρ)/ρ) W(K)] / (c ρ^{4α+2})
/// ```
pub fn verify_profile_chain(
    ctx: &OperatorContext,
    epsilon: f64,
    sigma0: &[f64],
    samples: &[Point],
    tolerance: f64,
) -> Result<[ResidualReport; 3]> {
    let p = *ctx.gauge().params();
    let a = p.alpha;
    let c = p.coupling();
    let q = p.homogeneous_dimension();
    let k = BigK {
        gauge: ctx.gauge(),
        epsilon,
        sigma0,
    };
    let rho_f = RhoPower { k, exponent: 1.0 };
    let f_rho = RhoPower {
        k,
        exponent: -(q - 2.0),
    };
    let profile = Power(-(q - 2.0));
    let mut grad = ResidualReport::new("profile_gradient", tolerance);
    let mut lap = ResidualReport::new("profile_operator", tolerance);
    let mut comp = ResidualReport::new("profile_composition", tolerance);
    for pt in samples {
        let d = k_data(ctx, &k, pt)?;
        let rj = jet2_eval(&rho_f, &d.x)?;
        let r = rj.value();
        let w_rho = gradient_square_from_gradient(ctx, &pt.z, rj.gradient());
        grad.push(Residual::new(d.x.clone(), w_rho, d.w / (c * r.powf(4.0 * a + 2.0))));
        let l_rho = grushin_operator_from_jet(ctx, &pt.z, &rj)?;
        let rhs = d.op / (2.0 * (a + 1.0) * r.powf(2.0 * a + 1.0))
            - (2.0 * a + 1.0) * d.w / (c * r.powf(4.0 * a + 3.0));
        lap.push(Residual::new(d.x.clone(), l_rho, rhs));
        let l_f = grushin_operator(ctx, &f_rho, pt)?;
        let (_, f1, f2) = profile.derivatives(r);
        let rhs = (2.0 * (a + 1.0) * f1 / r * d.k * d.op + (f2 - (2.0 * a + 1.0) * f1 / r) * d.w)
            / (c * r.powf(4.0 * a + 2.0));
        comp.push(Residual::new(d.x, l_f, rhs));
    }
    Ok([grad, lap, comp])
}

/// Both chain rules for `F∘u`, as two reports.
pub fn verify_chain_rules<U: ScalarField, P: Profile + Clone>(
    ctx: &OperatorContext,
    u: &U,
    outer: &P,
    samples: &[Point],
    tolerance: f64,
    label: &str,
) -> Result<[ResidualReport; 2]> {
    let mut grad = ResidualReport::new(format!("chain_gradient_{label}"), tolerance);
    let mut op = ResidualReport::new(format!("chain_operator_{label}"), tolerance);
    for pt in samples {
        let (g, o) = chain_rule_residuals(ctx, u, outer, pt)?;
        grad.push(g);
        op.push(o);
    }
    Ok([grad, op])
}

/// Parameters of the fundamental solution with pole at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSolutionSpec {
    ctx: OperatorContext,
    normalization: f64,
}

/// `normalization · Θ⁰^e` or `normalization · log Θ⁰`.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalField<'a> {
    gauge: &'a GaugePair,
    normalization: f64,
    exponent: Option<f64>,
}

impl ScalarField for FundamentalField<'_> {
    fn dimension(&self) -> usize {
        self.gauge.params().dimension()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let (z, s) = x.split_at(self.gauge.params().m);
        let t = self.gauge.theta_dual_apply(z, s);
        match self.exponent {
            Some(e) => t.powf(e) * self.normalization,
            None => t.ln() * self.normalization,
        }
    }
    fn is_singular(&self, x: &[f64]) -> bool {
        let m = self.gauge.params().m;
        x.iter().all(|&v| v == 0.0)
            || self.gauge.phi_dual().is_singular_squared(&x[..m])
            || self.gauge.psi_dual().is_singular_squared(&x[m..])
    }
}

impl FundamentalSolutionSpec {
    pub fn new(gauge: GaugePair) -> Self {
        FundamentalSolutionSpec {
            ctx: OperatorContext::from(gauge),
            normalization: 1.0,
        }
    }

    pub fn with_context(ctx: OperatorContext) -> Self {
        FundamentalSolutionSpec {
            ctx,
            normalization: 1.0,
        }
    }

    pub fn with_normalization(mut self, normalization: f64) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn context(&self) -> &OperatorContext {
        &self.ctx
    }

    pub fn gauge(&self) -> &GaugePair {
        self.ctx.gauge()
    }

    pub fn is_logarithmic(&self) -> bool {
        let p = self.gauge().params();
        (p.p - p.homogeneous_dimension()).abs() < LOG_BRANCH_TOLERANCE
    }

    /// `−(Q−p)/(p−1)`, or `None` on the logarithmic branch.
    pub fn exponent(&self) -> Option<f64> {
        if self.is_logarithmic() {
            return None;
        }
        let p = self.gauge().params();
        Some(-(p.homogeneous_dimension() - p.p) / (p.p - 1.0))
    }

    pub fn field(&self) -> FundamentalField<'_> {
        FundamentalField {
            gauge: self.gauge(),
            normalization: self.normalization,
            exponent: self.exponent(),
        }
    }
}

/// The fundamental solution at `pt`.
pub fn fundamental_solution(spec: &FundamentalSolutionSpec, pt: &Point) -> Result<f64> {
    if pt.is_origin() {
        return Err(Error::PolePoint);
    }
    value_at(spec.gauge(), &spec.field(), pt)
}

/// `𝓛_p` of the fundamental solution against 0, relative to
/// `W^{(p−1)/2}/Θ⁰`.
pub fn fundamental_residual(spec: &FundamentalSolutionSpec, pt: &Point) -> Result<Residual> {
    if pt.is_origin() {
        return Err(Error::PolePoint);
    }
    let x = flat(spec.gauge(), pt)?;
    let jet = jet2_eval(&spec.field(), &x)?;
    let lhs = grushin_operator_p_from_jet(spec.context(), &pt.z, &jet)?;
    let w = gradient_square_from_gradient(spec.context(), &pt.z, jet.gradient());
    let theta = spec.gauge().theta_dual(pt)?;
    let p = spec.gauge().params().p;
    Ok(Residual::with_scale(x, lhs, 0.0, w.powf((p - 1.0) / 2.0) / theta))
}

pub fn verify_fundamental(
    spec: &FundamentalSolutionSpec,
    samples: &[Point],
    tolerance: f64,
) -> Result<ResidualReport> {
    let p = spec.gauge().params();
    let mut report = ResidualReport::new(
        format!("fundamental_alpha{}_p{}", p.alpha, p.p),
        tolerance,
    );
    for pt in samples {
        report.push(fundamental_residual(spec, pt)?);
    }
    Ok(report)
}
