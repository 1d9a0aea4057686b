//! Pointwise evaluation of the Finsler Laplacian and of the sub-Finsler
//! Baouendi-Grushin operators.
//!
//! All operators are evaluated in strong form from a second-order jet of the
//! argument. For a Minkowski norm `M` the flux `M(∇u)∇M(∇u)` equals
//! `∇(M²/2)(∇u)`, so
//!
//! ```text
//! Δ_M u = Σ_ij [∂_iM ∂_jM + M ∂²_ij M](∇u) ∂²_ij u.
//! ```
//!
//! With `w(z) = Φ⁰(z)^{2α}/4` and `W(u) = Φ(∇_z u)² + w(z)Ψ(∇_σ u)²`,
//!
//! ```text
//! 𝓛u   = Δ_Φ u + w(z) Δ_Ψ u
//! 𝓛_p u = div_z(W^{(p-2)/2} Φ(∇_z u)∇Φ(∇_z u)) + div_σ(W^{(p-2)/2} w(z) Ψ(∇_σ u)∇Ψ(∇_σ u)).
//! ```
//!
//! Euclidean layers short-circuit to the trace of the Hessian block and stay
//! defined where the block gradient vanishes; other norms report
//! [`Error::DegenerateGradient`] there.

use crate::error::{Error, Result};
use crate::gauge::{GaugePair, Point};
use crate::jets::{jet2_eval, Composed, Jet2, Profile, Scalar, ScalarField};
use crate::norms::{NormField, NormSpec};
use crate::report::Residual;

pub const DEFAULT_SINGULAR_MARGIN: f64 = 1e-6;

/// Block gradients smaller than this fraction of the full gradient are
/// treated as zero by the operators of an [`OperatorContext`].
pub const DEFAULT_RELATIVE_MARGIN: f64 = 1e-10;

/// Norm pair and parameters, plus the relative threshold below which block
/// gradients count as degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorContext {
    gauge: GaugePair,
    singular_margin: f64,
}

impl OperatorContext {
    pub fn new(gauge: GaugePair, singular_margin: f64) -> Result<Self> {
        if !(singular_margin > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "singular margin must be positive, got {singular_margin}"
            )));
        }
        Ok(OperatorContext {
            gauge,
            singular_margin,
        })
    }

    pub fn gauge(&self) -> &GaugePair {
        &self.gauge
    }

    pub fn singular_margin(&self) -> f64 {
        self.singular_margin
    }

    /// `w(z) = Φ⁰(z)^{2α} / 4`.
    pub fn weight(&self, z: &[f64]) -> f64 {
        weight_apply(&self.gauge, z)
    }

    fn weight_jet(&self, z: &[f64]) -> Result<Jet2> {
        jet2_eval(&WeightField(&self.gauge), z)
    }
}

impl From<GaugePair> for OperatorContext {
    fn from(gauge: GaugePair) -> Self {
        OperatorContext {
            gauge,
            singular_margin: DEFAULT_RELATIVE_MARGIN,
        }
    }
}

pub(crate) fn weight_apply<S: Scalar>(gauge: &GaugePair, z: &[S]) -> S {
    let alpha = gauge.params().alpha;
    let d2 = gauge.phi_dual().apply_squared(z);
    let pow = if alpha == 1.0 { d2 } else { d2.powf(alpha) };
    pow * 0.25
}

struct WeightField<'a>(&'a GaugePair);

impl ScalarField for WeightField<'_> {
    fn dimension(&self) -> usize {
        self.0.params().m
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> S {
        weight_apply(self.0, z)
    }
}

/// `∇(M²/2)(g)` and its Jacobian `D²(M²/2)(g)` (row-major). Non-Euclidean
/// norms need `|g| ≥ margin`.
pub fn finsler_flux(norm: &NormSpec, g: &[f64], margin: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = g.len();
    if norm.is_euclidean() {
        let mut jac = vec![0.0; n * n];
        (0..n).for_each(|i| jac[i * n + i] = 1.0);
        return Ok((g.to_vec(), jac));
    }
    let size = euclidean_size(g);
    if !(size > 0.0) || size < margin {
        return Err(Error::DegenerateGradient { norm: size, margin });
    }
    // The flux is 1-homogeneous and the Jacobian 0-homogeneous, so the norm
    // jet is taken on the unit sphere.
    let unit: Vec<f64> = g.iter().map(|v| v / size).collect();
    let j = norm.jet(&unit)?;
    let m = j.value();
    let dm = j.gradient();
    let flux = dm.iter().map(|d| size * m * d).collect();
    let mut jac = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            jac[a * n + b] = dm[a] * dm[b] + m * j.hessian(a, b);
        }
    }
    Ok((flux, jac))
}

fn euclidean_size(g: &[f64]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Fluxes of both layers; a block gradient is degenerate when it is below the
/// margin relative to the full gradient.
#[allow(clippy::type_complexity)]
fn layer_fluxes(ctx: &OperatorContext, gradient: &[f64]) -> Result<((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>))> {
    let m = ctx.gauge.params().m;
    let (gz, gs) = gradient.split_at(m);
    let threshold = ctx.singular_margin * euclidean_size(gradient);
    Ok((
        finsler_flux(ctx.gauge.phi(), gz, threshold)?,
        finsler_flux(ctx.gauge.psi(), gs, threshold)?,
    ))
}

/// `Σ_ij jac_ij H[off+i, off+j]` for a diagonal block of the full Hessian.
fn block_trace(jac: &[f64], hessian: &Jet2, offset: usize, n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += jac[i * n + j] * hessian.hessian(offset + i, offset + j);
        }
    }
    acc
}

/// `Δ_M u` from a jet of `u`.
pub fn finsler_laplacian_from_jet(norm: &NormSpec, jet: &Jet2, margin: f64) -> Result<f64> {
    if jet.dimension() != norm.dimension() {
        return Err(Error::DimensionMismatch {
            expected: norm.dimension(),
            got: jet.dimension(),
        });
    }
    let (_, jac) = finsler_flux(norm, jet.gradient(), margin)?;
    Ok(block_trace(&jac, jet, 0, norm.dimension()))
}

/// `Δ_M u (x) = div(M(∇u)∇M(∇u))(x)`.
pub fn finsler_laplacian<U: ScalarField>(norm: &NormSpec, u: &U, x: &[f64]) -> Result<f64> {
    let jet = jet2_eval(u, x)?;
    finsler_laplacian_from_jet(norm, &jet, DEFAULT_SINGULAR_MARGIN)
}

/// Both sides of the radial formula `Δ_M(k∘M⁰) = k''(ψ) + (n−1)/ψ · k'(ψ)`,
/// `ψ = M⁰(x)`.
pub fn radial_laplacian_check<P: Profile + Clone>(
    norm: &NormSpec,
    profile: &P,
    x: &[f64],
) -> Result<(f64, f64)> {
    let dual = norm.dual();
    let v = Composed {
        outer: profile.clone(),
        inner: NormField(&dual),
    };
    let lhs = finsler_laplacian(norm, &v, x)?;
    let psi = dual.eval(x)?;
    let (_, d1, d2) = profile.derivatives(psi);
    let rhs = d2 + (norm.dimension() as f64 - 1.0) / psi * d1;
    Ok((lhs, rhs))
}

fn check_point(ctx: &OperatorContext, pt: &Point) -> Result<Vec<f64>> {
    let params = ctx.gauge.params();
    if pt.z.len() != params.m || pt.sigma.len() != params.k {
        return Err(Error::DimensionMismatch {
            expected: params.dimension(),
            got: pt.z.len() + pt.sigma.len(),
        });
    }
    Ok(pt.to_flat())
}

/// `W(u)` from the gradient of `u` at a point with horizontal part `z`.
pub fn gradient_square_from_gradient(ctx: &OperatorContext, z: &[f64], gradient: &[f64]) -> f64 {
    let m = ctx.gauge.params().m;
    let (gz, gs) = gradient.split_at(m);
    ctx.gauge.phi().apply_squared(gz) + ctx.weight(z) * ctx.gauge.psi().apply_squared(gs)
}

/// `W(u)(pt) = Φ(∇_z u)² + Φ⁰(z)^{2α}/4 · Ψ(∇_σ u)²`.
pub fn grushin_gradient_square<U: ScalarField>(
    ctx: &OperatorContext,
    u: &U,
    pt: &Point,
) -> Result<f64> {
    let x = check_point(ctx, pt)?;
    let jet = jet2_eval(u, &x)?;
    Ok(gradient_square_from_gradient(ctx, &pt.z, jet.gradient()))
}

/// `𝓛u` from a jet of `u` at a point with horizontal part `z`.
pub fn grushin_operator_from_jet(ctx: &OperatorContext, z: &[f64], jet: &Jet2) -> Result<f64> {
    let params = ctx.gauge.params();
    let (m, k) = (params.m, params.k);
    let ((_, jz), (_, js)) = layer_fluxes(ctx, jet.gradient())?;
    let lap_z = block_trace(&jz, jet, 0, m);
    let lap_s = block_trace(&js, jet, m, k);
    Ok(lap_z + ctx.weight(z) * lap_s)
}

/// `𝓛_{Φ,Ψ,α} u (pt) = Δ_Φ u + Φ⁰(z)^{2α}/4 · Δ_Ψ u`.
pub fn grushin_operator<U: ScalarField>(ctx: &OperatorContext, u: &U, pt: &Point) -> Result<f64> {
    let x = check_point(ctx, pt)?;
    let jet = jet2_eval(u, &x)?;
    grushin_operator_from_jet(ctx, &pt.z, &jet)
}

/// `(Δ_Φ u, Δ_Ψ u)` on the two diagonal blocks of a jet of `u`.
pub fn layer_laplacians_from_jet(ctx: &OperatorContext, jet: &Jet2) -> Result<(f64, f64)> {
    let params = ctx.gauge.params();
    let (m, k) = (params.m, params.k);
    let ((_, jz), (_, js)) = layer_fluxes(ctx, jet.gradient())?;
    Ok((block_trace(&jz, jet, 0, m), block_trace(&js, jet, m, k)))
}

/// Both chain rules for `F∘u` at a point:
/// `W(F∘u) = F'(u)² W(u)` and `𝓛(F∘u) = F'(u)𝓛u + F''(u)W(u)`.
pub fn chain_rule_residuals<U: ScalarField, P: Profile + Clone>(
    ctx: &OperatorContext,
    u: &U,
    outer: &P,
    pt: &Point,
) -> Result<(Residual, Residual)> {
    let x = check_point(ctx, pt)?;
    let inner = jet2_eval(u, &x)?;
    let composed = jet2_eval(
        &Composed {
            outer: outer.clone(),
            inner: u,
        },
        &x,
    )?;
    let (_, d1, d2) = outer.derivatives(inner.value());
    let w_inner = gradient_square_from_gradient(ctx, &pt.z, inner.gradient());
    let w_outer = gradient_square_from_gradient(ctx, &pt.z, composed.gradient());
    let l_inner = grushin_operator_from_jet(ctx, &pt.z, &inner)?;
    let l_outer = grushin_operator_from_jet(ctx, &pt.z, &composed)?;
    Ok((
        Residual::new(x.clone(), w_outer, d1 * d1 * w_inner),
        Residual::new(x, l_outer, d1 * l_inner + d2 * w_inner),
    ))
}

/// Euler-Lagrange operator of `(1/p)∫W(u)^{p/2}` from a jet of `u`.
pub fn grushin_operator_p_from_jet(ctx: &OperatorContext, z: &[f64], jet: &Jet2) -> Result<f64> {
    let params = ctx.gauge.params();
    let (m, k) = (params.m, params.k);
    let n = m + k;
    let exponent = 0.5 * (params.p - 2.0);
    if exponent == 0.0 {
        return grushin_operator_from_jet(ctx, z, jet);
    }

    let (gz, gs) = jet.gradient().split_at(m);
    let ((fz, jz), (fs, js)) = layer_fluxes(ctx, jet.gradient())?;
    let lap_z = block_trace(&jz, jet, 0, m);
    let lap_s = block_trace(&js, jet, m, k);

    let weight = ctx.weight_jet(z)?;
    let w = weight.value();
    let psi_sq = ctx.gauge.psi().apply_squared(gs);
    let energy_density = ctx.gauge.phi().apply_squared(gz) + w * psi_sq;
    let threshold = ctx.singular_margin * jet.gradient().iter().map(|v| v * v).sum::<f64>();
    if !(energy_density > 0.0) || energy_density < threshold {
        return Err(Error::DegenerateGradient {
            norm: energy_density,
            margin: threshold,
        });
    }

    // ∂_j W = 2⟨fz, H[z, j]⟩ + 2w⟨fs, H[σ, j]⟩ + ∂_j w · Ψ(∇_σ u)²
    let mut grad_density = vec![0.0; n];
    for (j, gd) in grad_density.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, f) in fz.iter().enumerate() {
            acc += 2.0 * f * jet.hessian(i, j);
        }
        for (i, f) in fs.iter().enumerate() {
            acc += 2.0 * w * f * jet.hessian(m + i, j);
        }
        if j < m {
            acc += weight.gradient()[j] * psi_sq;
        }
        *gd = acc;
    }

    let b = energy_density.powf(exponent);
    let db = exponent * energy_density.powf(exponent - 1.0);
    let mut value = b * (lap_z + w * lap_s);
    for i in 0..m {
        value += db * grad_density[i] * fz[i];
    }
    for i in 0..k {
        value += w * db * grad_density[m + i] * fs[i];
    }
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::SingularPoint(format!("{z:?}")))
    }
}

/// `𝓛_p u (pt)`; reduces to [`grushin_operator`] when `p = 2`.
pub fn grushin_operator_p<U: ScalarField>(ctx: &OperatorContext, u: &U, pt: &Point) -> Result<f64> {
    let x = check_point(ctx, pt)?;
    let jet = jet2_eval(u, &x)?;
    grushin_operator_p_from_jet(ctx, &pt.z, &jet)
}

/// `𝓛_p u (pt)` by central differences only: the gradient of `u`, the norm
/// gradients and the divergence of the flux are all differenced, so no jet
/// arithmetic is involved. `outer_step` defaults to `1e-3·(1 + |x|_∞)`.
pub fn grushin_operator_fd<U: ScalarField>(
    ctx: &OperatorContext,
    u: &U,
    pt: &Point,
    outer_step: Option<f64>,
) -> Result<f64> {
    let x = check_point(ctx, pt)?;
    let n = x.len();
    let scale = 1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let h = outer_step.unwrap_or(1e-3 * scale);
    let mut div = 0.0;
    let mut probe = x.clone();
    for j in 0..n {
        let mut component = |offset: f64| -> Result<f64> {
            probe.copy_from_slice(&x);
            probe[j] += offset;
            Ok(fd_flux(ctx, u, &probe)?[j])
        };
        let d = (-component(2.0 * h)? + 8.0 * component(h)? - 8.0 * component(-h)?
            + component(-2.0 * h)?)
            / (12.0 * h);
        div += d;
    }
    if div.is_finite() {
        Ok(div)
    } else {
        Err(Error::SingularPoint(format!("{x:?}")))
    }
}

fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let fp = f(&probe);
            probe[i] = x[i] - h;
            let fm = f(&probe);
            probe[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn fd_flux<U: ScalarField>(ctx: &OperatorContext, u: &U, x: &[f64]) -> Result<Vec<f64>> {
    if u.is_singular(x) {
        return Err(Error::SingularPoint(format!("{x:?}")));
    }
    let params = ctx.gauge.params();
    let m = params.m;
    let cube_root_eps = 6e-6;
    let scale = 1.0 + x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let grad = fd_gradient(|y| u.eval(y), x, cube_root_eps * scale);
    let (gz, gs) = grad.split_at(m);

    let half_square_gradient = |norm: &NormSpec, g: &[f64]| -> Vec<f64> {
        if norm.is_euclidean() {
            return g.to_vec();
        }
        let s = g.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        fd_gradient(|y| 0.5 * norm.apply_squared(y), g, cube_root_eps * s)
    };
    let fz = half_square_gradient(ctx.gauge.phi(), gz);
    let fs = half_square_gradient(ctx.gauge.psi(), gs);
    let w = ctx.weight(&x[..m]);
    let b = if params.p == 2.0 {
        1.0
    } else {
        let density = ctx.gauge.phi().apply_squared(gz) + w * ctx.gauge.psi().apply_squared(gs);
        density.powf(0.5 * (params.p - 2.0))
    };
    let flux: Vec<f64> = fz
        .iter()
        .map(|v| b * v)
        .chain(fs.iter().map(|v| b * w * v))
        .collect();
    if flux.iter().all(|v| v.is_finite()) {
        Ok(flux)
    } else {
        Err(Error::SingularPoint(format!("{x:?}")))
    }
}
