//! Tensor-grid quadrature of the energy `(1/p)∫W(u)^{p/2}`, of `L^q` norms,
//! and of the Sobolev quotient `‖u‖_q / (p·E(u))^{1/p}` with
//! `1/p − 1/q = 1/Q`.
//!
//! Integrals are taken over a box `∏[−h_i, h_i]`. Boxes built by
//! [`QuadratureSpec::gauge_box`] have `z` half-width `L` and `σ` half-width
//! `L^{α+1}`, so `δ_t` maps them onto each other and the grid of the dilated
//! box is the image of the original grid.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::gauge::GrushinParams;
use crate::jets::{jet1_eval, Scalar, ScalarField};
use crate::operators::{gradient_square_from_gradient, OperatorContext};

/// Largest `m + k` accepted by the quadrature routines.
pub const MAX_QUADRATURE_DIMENSION: usize = 5;
pub const DEFAULT_POINT_BUDGET: u128 = 10_000_000;
/// Nodes per Gauss-Legendre panel.
pub const GAUSS_PANEL_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    Midpoint,
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    half_widths: Vec<f64>,
    points_per_axis: usize,
    scheme: QuadratureScheme,
    /// Per-axis ratio between consecutive cell widths moving away from 0.
    panel_growth: Vec<f64>,
    budget: u128,
}

impl QuadratureSpec {
    pub fn new(half_widths: Vec<f64>, points_per_axis: usize, scheme: QuadratureScheme) -> Result<Self> {
        if half_widths.is_empty() || half_widths.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "half widths must be positive, got {half_widths:?}"
            )));
        }
        if half_widths.len() > MAX_QUADRATURE_DIMENSION {
            return Err(Error::InvalidParameter(format!(
                "quadrature supports at most {MAX_QUADRATURE_DIMENSION} dimensions, got {}",
                half_widths.len()
            )));
        }
        if points_per_axis < 8 {
            return Err(Error::InvalidParameter(format!(
                "need at least 8 points per axis, got {points_per_axis}"
            )));
        }
        Ok(QuadratureSpec {
            panel_growth: vec![1.0; half_widths.len()],
            half_widths,
            points_per_axis,
            scheme,
            budget: DEFAULT_POINT_BUDGET,
        })
    }

    /// `z` half-width `L`, `σ` half-width `L^{α+1}`.
    pub fn gauge_box(
        params: &GrushinParams,
        half_width: f64,
        points_per_axis: usize,
        scheme: QuadratureScheme,
    ) -> Result<Self> {
        let hs = half_width.powf(params.alpha + 1.0);
        let mut widths = vec![half_width; params.m];
        widths.extend(std::iter::repeat_n(hs, params.k));
        Self::new(widths, points_per_axis, scheme)
    }

    /// The same growth on every axis.
    pub fn with_panel_growth(self, growth: f64) -> Result<Self> {
        let n = self.dimension();
        self.with_axis_growth(vec![growth; n])
    }

    /// Growth `g` on the `z` axes and `g^{α+1}` on the `σ` axes, matching the
    /// anisotropy of [`gauge_box`](Self::gauge_box).
    pub fn with_gauge_growth(self, params: &GrushinParams, growth: f64) -> Result<Self> {
        let mut g = vec![growth; params.m];
        g.extend(std::iter::repeat_n(growth.powf(params.alpha + 1.0), params.k));
        self.with_axis_growth(g)
    }

    pub fn with_axis_growth(mut self, growth: Vec<f64>) -> Result<Self> {
        if growth.len() != self.dimension() || growth.iter().any(|g| !(*g >= 1.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid panel growth {growth:?}")));
        }
        self.panel_growth = growth;
        Ok(self)
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }

    pub fn dimension(&self) -> usize {
        self.half_widths.len()
    }

    /// Twice as many points per axis, with every old cell split in two.
    pub fn refined(&self) -> Self {
        let mut q = self.clone();
        q.points_per_axis *= 2;
        q.panel_growth.iter_mut().for_each(|g| *g = g.sqrt());
        q
    }

    /// The image box under `δ_t`.
    pub fn dilated(&self, params: &GrushinParams, t: f64) -> Result<Self> {
        if self.dimension() != params.dimension() || !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cannot dilate a {}-dimensional box by {t}",
                self.dimension()
            )));
        }
        let ts = t.powf(params.alpha + 1.0);
        let mut q = self.clone();
        for (i, h) in q.half_widths.iter_mut().enumerate() {
            *h *= if i < params.m { t } else { ts };
        }
        Ok(q)
    }

    pub fn volume(&self) -> f64 {
        self.half_widths.iter().map(|h| 2.0 * h).product()
    }

    /// Cells (or panels) on each half-axis.
    fn cells_per_half(&self) -> usize {
        match self.scheme {
            QuadratureScheme::Midpoint => self.points_per_axis.div_ceil(2),
            QuadratureScheme::GaussLegendre => self.points_per_axis.div_ceil(2 * GAUSS_PANEL_ORDER),
        }
    }

    /// Nodes actually used per axis.
    pub fn nodes_per_axis(&self) -> usize {
        match self.scheme {
            QuadratureScheme::Midpoint => 2 * self.cells_per_half(),
            QuadratureScheme::GaussLegendre => 2 * self.cells_per_half() * GAUSS_PANEL_ORDER,
        }
    }

    pub fn total_points(&self) -> u128 {
        (self.nodes_per_axis() as u128).pow(self.dimension() as u32)
    }

    /// Cell boundaries on `[0, h]`.
    fn breaks(&self, h: f64, g: f64) -> Vec<f64> {
        let n = self.cells_per_half();
        let widths: Vec<f64> = (0..n).map(|i| g.powi(i as i32)).collect();
        let total: f64 = widths.iter().sum();
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for w in &widths {
            acc += w;
            out.push(h * acc / total);
        }
        out[n] = h;
        out
    }

    /// Nodes and weights of the one-dimensional rule on axis `axis`.
    pub fn axis_rule(&self, axis: usize) -> Vec<(f64, f64)> {
        let b = self.breaks(self.half_widths[axis], self.panel_growth[axis]);
        let mut half = Vec::new();
        match self.scheme {
            QuadratureScheme::Midpoint => {
                for w in b.windows(2) {
                    half.push((0.5 * (w[0] + w[1]), w[1] - w[0]));
                }
            }
            QuadratureScheme::GaussLegendre => {
                let rule = GaussLegendre::new(
                    NonZeroUsize::new(GAUSS_PANEL_ORDER).expect("panel order is positive"),
                );
                for w in b.windows(2) {
                    let (c, r) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
                    for &(x, wt) in rule.as_node_weight_pairs() {
                        half.push((c + r * x, r * wt));
                    }
                }
            }
        }
        let mut nodes: Vec<(f64, f64)> = half.iter().rev().map(|&(x, w)| (-x, w)).collect();
        nodes.extend(half);
        nodes
    }
}

/// An integral together with the number of nodes skipped as singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub points: u128,
    pub excluded: u128,
}

/// `∫ f` over the box; nodes where `f` returns `None` contribute 0.
pub fn integrate<F: FnMut(&[f64]) -> Option<f64>>(quad: &QuadratureSpec, mut f: F) -> Result<Quadrature> {
    let total = quad.total_points();
    if total > quad.budget {
        return Err(Error::BudgetExceeded {
            points: total,
            budget: quad.budget,
        });
    }
    let rules: Vec<Vec<(f64, f64)>> = (0..quad.dimension()).map(|a| quad.axis_rule(a)).collect();
    let dim = rules.len();
    let mut idx = vec![0usize; dim];
    let mut x: Vec<f64> = rules.iter().map(|r| r[0].0).collect();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut excluded = 0u128;
    loop {
        let w: f64 = (0..dim).map(|d| rules[d][idx[d]].1).product();
        match f(&x) {
            Some(v) if v.is_finite() => {
                // Kahan summation keeps large grids stable.
                let y = w * v - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            _ => excluded += 1,
        }
        let mut d = 0;
        loop {
            if d == dim {
                return Ok(Quadrature {
                    value: sum,
                    points: total,
                    excluded,
                });
            }
            idx[d] += 1;
            if idx[d] < rules[d].len() {
                x[d] = rules[d][idx[d]].0;
                break;
            }
            idx[d] = 0;
            x[d] = rules[d][0].0;
            d += 1;
        }
    }
}

fn check_field<U: ScalarField>(quad: &QuadratureSpec, u: &U) -> Result<()> {
    if u.dimension() != quad.dimension() {
        return Err(Error::DimensionMismatch {
            expected: quad.dimension(),
            got: u.dimension(),
        });
    }
    Ok(())
}

/// `(1/p)∫W(u)^{p/2}` with `p` from the context.
pub fn energy<U: ScalarField>(ctx: &OperatorContext, u: &U, quad: &QuadratureSpec) -> Result<Quadrature> {
    check_field(quad, u)?;
    let params = ctx.gauge().params();
    let (m, p) = (params.m, params.p);
    let mut q = integrate(quad, |x| {
        let j = jet1_eval(u, x).ok()?;
        let w = gradient_square_from_gradient(ctx, &x[..m], j.gradient());
        Some(if p == 2.0 { w } else { w.powf(p / 2.0) })
    })?;
    q.value /= p;
    Ok(q)
}

/// As [`energy`], with gradients from central differences of step `h`.
pub fn energy_fd<U: ScalarField>(
    ctx: &OperatorContext,
    u: &U,
    quad: &QuadratureSpec,
    h: f64,
) -> Result<Quadrature> {
    check_field(quad, u)?;
    let params = ctx.gauge().params();
    let (m, p) = (params.m, params.p);
    let mut buf = vec![0.0; quad.dimension()];
    let mut q = integrate(quad, |x| {
        buf.copy_from_slice(x);
        let mut g = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            buf[i] = x[i] + h;
            let fp = crate::jets::eval(u, &buf).ok()?;
            buf[i] = x[i] - h;
            let fm = crate::jets::eval(u, &buf).ok()?;
            buf[i] = x[i];
            g.push((fp - fm) / (2.0 * h));
        }
        let w = gradient_square_from_gradient(ctx, &x[..m], &g);
        Some(w.powf(p / 2.0))
    })?;
    q.value /= p;
    Ok(q)
}

/// `(∫|u|^q)^{1/q}`.
pub fn lq_norm<U: ScalarField>(u: &U, q_exp: f64, quad: &QuadratureSpec) -> Result<Quadrature> {
    check_field(quad, u)?;
    if !(q_exp >= 1.0) {
        return Err(Error::InvalidParameter(format!("q must be >= 1, got {q_exp}")));
    }
    let mut q = integrate(quad, |x| crate::jets::eval(u, x).ok().map(|v| v.abs().powf(q_exp)))?;
    q.value = q.value.powf(1.0 / q_exp);
    Ok(q)
}

/// `q = pQ/(Q−p)`.
pub fn critical_exponent(params: &GrushinParams) -> Result<f64> {
    let (p, q) = (params.p, params.homogeneous_dimension());
    if !(p < q) {
        return Err(Error::InvalidParameter(format!(
            "the Sobolev exponent needs p < Q, got p = {p}, Q = {q}"
        )));
    }
    Ok(p * q / (q - p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevQuotient {
    pub quotient: f64,
    pub lq_norm: f64,
    pub energy: f64,
    pub exponent: f64,
    pub excluded: u128,
}

/// `‖u‖_q / (p·E(u))^{1/p}` at the critical `q`.
pub fn sobolev_quotient<U: ScalarField>(
    ctx: &OperatorContext,
    u: &U,
    quad: &QuadratureSpec,
) -> Result<SobolevQuotient> {
    let params = ctx.gauge().params();
    let q = critical_exponent(params)?;
    let n = lq_norm(u, q, quad)?;
    let e = energy(ctx, u, quad)?;
    let p = params.p;
    Ok(SobolevQuotient {
        quotient: n.value / (p * e.value).powf(1.0 / p),
        lq_norm: n.value,
        energy: e.value,
        exponent: q,
        excluded: n.excluded + e.excluded,
    })
}

/// Relative change of the Sobolev quotient under `u ↦ u∘δ_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationDrift {
    pub t: f64,
    pub base: f64,
    /// Quotient of `u∘δ_t` on `δ_{1/t}` of the box.
    pub mapped: f64,
    /// Quotient of `u∘δ_t` on the original box.
    pub fixed: f64,
}

impl DilationDrift {
    pub fn mapped_drift(&self) -> f64 {
        (self.mapped / self.base - 1.0).abs()
    }

    pub fn fixed_drift(&self) -> f64 {
        (self.fixed / self.base - 1.0).abs()
    }
}

pub fn dilation_drift<U: ScalarField + Copy>(
    ctx: &OperatorContext,
    u: U,
    quad: &QuadratureSpec,
    t: f64,
) -> Result<DilationDrift> {
    let params = ctx.gauge().params();
    let base = sobolev_quotient(ctx, &u, quad)?.quotient;
    let d = Dilated {
        inner: u,
        params,
        t,
    };
    let mapped = sobolev_quotient(ctx, &d, &quad.dilated(params, 1.0 / t)?)?.quotient;
    let fixed = sobolev_quotient(ctx, &d, quad)?.quotient;
    Ok(DilationDrift {
        t,
        base,
        mapped,
        fixed,
    })
}

/// Tail of an integral beyond the box, assuming the integrand decays like
/// `Θ⁰^{−(Q+s)}` with `s > 0`: `(I(L) − I(L/2)) / (2^s − 1)`.
pub fn tail_estimate(full: f64, half: f64, s: f64) -> f64 {
    (full - half).abs() / (2f64.powf(s) - 1.0)
}

/// `x ↦ u(δ_t x)`.
#[derive(Debug, Clone, Copy)]
pub struct Dilated<'a, U> {
    pub inner: U,
    pub params: &'a GrushinParams,
    pub t: f64,
}

impl<U: ScalarField> Dilated<'_, U> {
    fn map(&self, x: &[f64]) -> Vec<f64> {
        let ts = self.t.powf(self.params.alpha + 1.0);
        x.iter()
            .enumerate()
            .map(|(i, v)| v * if i < self.params.m { self.t } else { ts })
            .collect()
    }
}

impl<U: ScalarField> ScalarField for Dilated<'_, U> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let ts = self.t.powf(self.params.alpha + 1.0);
        let y: Vec<S> = x
            .iter()
            .enumerate()
            .map(|(i, v)| v.clone() * if i < self.params.m { self.t } else { ts })
            .collect();
        self.inner.eval(&y)
    }
    fn is_singular(&self, x: &[f64]) -> bool {
        self.inner.is_singular(&self.map(x))
    }
}

/// `height · exp(1 − 1/(1 − r²))` for `r² = Σ (x_i/radius_i)² < 1`, else 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub radii: Vec<f64>,
    pub height: f64,
}

impl ScalarField for Bump {
    fn dimension(&self) -> usize {
        self.radii.len()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut r2 = x[0].lift(0.0);
        for (v, r) in x.iter().zip(&self.radii) {
            r2 = r2 + (v.clone() / *r).square();
        }
        if r2.value() >= 1.0 {
            return r2.lift(0.0);
        }
        let d = (r2 * -1.0 + 1.0).recip();
        (d * -1.0 + 1.0).exp() * self.height
    }
}

/// `height · exp(−Σ (x_i/width_i)²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub widths: Vec<f64>,
    pub height: f64,
}

impl ScalarField for Gaussian {
    fn dimension(&self) -> usize {
        self.widths.len()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut r2 = x[0].lift(0.0);
        for (v, w) in x.iter().zip(&self.widths) {
            r2 = r2 + (v.clone() / *w).square();
        }
        (r2 * -1.0).exp() * self.height
    }
}

/// `0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero(pub usize);

impl ScalarField for Zero {
    fn dimension(&self) -> usize {
        self.0
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        x[0].lift(0.0)
    }
}
