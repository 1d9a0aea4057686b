//! The anisotropic gauge on ℝᵐ × ℝᵏ, its dual, and the dilations that make
//! both of them homogeneous of degree one.
//!
//! With `c = 4(α+1)²`,
//!
//! ```text
//! Θ(z, σ)  = (Φ(z)^{2(α+1)}  + c Ψ(σ)² )^{1/(2(α+1))}
//! Θ⁰(z, σ) = (Φ⁰(z)^{2(α+1)} + c Ψ⁰(σ)²)^{1/(2(α+1))}
//! δ_t(z, σ) = (t z, t^{α+1} σ),   d(δ_t x) = t^Q dx,   Q = m + (α+1)k.
//! ```
//!
//! `Θ⁰` is also characterised variationally,
//! `Θ⁰(z,σ)^{α+1} = sup_{Θ(ξ,τ)=1} |⟨z,ξ⟩|^{α+1} + c⟨σ,τ⟩`;
//! [`GaugePair::theta_dual_oracle`] evaluates that supremum numerically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Scalar, ScalarField};
use crate::norms::NormSpec;
use crate::optimize::{dot_const, maximize_on_orbit, DualSolverConfig};

/// `(m, k, α, p)` together with the homogeneous dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrushinParams {
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
    pub p: f64,
}

impl GrushinParams {
    pub fn new(m: usize, k: usize, alpha: f64, p: f64) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "layer dimensions must be positive, got m={m}, k={k}"
            )));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("p must lie in (1, ∞), got {p}")));
        }
        Ok(GrushinParams { m, k, alpha, p })
    }

    /// `α = 1`, `p = 2`.
    pub fn yamabe(m: usize, k: usize) -> Result<Self> {
        Self::new(m, k, 1.0, 2.0)
    }

    /// `Q = m + (α+1)k`.
    pub fn homogeneous_dimension(&self) -> f64 {
        self.m as f64 + (self.alpha + 1.0) * self.k as f64
    }

    pub fn dimension(&self) -> usize {
        self.m + self.k
    }

    /// `4(α+1)²`.
    pub fn coupling(&self) -> f64 {
        4.0 * (self.alpha + 1.0).powi(2)
    }
}

/// A point `(z, σ) ∈ ℝᵐ × ℝᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub z: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl Point {
    pub fn new(z: Vec<f64>, sigma: Vec<f64>) -> Self {
        Point { z, sigma }
    }

    /// Splits a flat coordinate vector after the first `m` entries.
    pub fn from_flat(x: &[f64], m: usize) -> Self {
        Point {
            z: x[..m].to_vec(),
            sigma: x[m..].to_vec(),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.z.clone();
        v.extend_from_slice(&self.sigma);
        v
    }

    pub fn is_origin(&self) -> bool {
        self.z.iter().chain(&self.sigma).all(|&v| v == 0.0)
    }
}

/// `δ_t(z, σ) = (t z, t^{α+1} σ)`.
pub fn dilate(params: &GrushinParams, t: f64, pt: &Point) -> Result<Point> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("dilation factor must be > 0, got {t}")));
    }
    let ts = t.powf(params.alpha + 1.0);
    Ok(Point {
        z: pt.z.iter().map(|v| v * t).collect(),
        sigma: pt.sigma.iter().map(|v| v * ts).collect(),
    })
}

/// Jacobian determinant of `δ_t`, i.e. `t^Q`.
pub fn dilation_jacobian(params: &GrushinParams, t: f64) -> f64 {
    t.powf(params.homogeneous_dimension())
}

/// The gauge `R_α(z, σ) = (|z|^{2(α+1)} + 4(α+1)²|σ|²)^{1/(2(α+1))}`, written
/// out directly for the Euclidean layers.
pub fn euclidean_gauge(alpha: f64, pt: &Point) -> f64 {
    let z2: f64 = pt.z.iter().map(|v| v * v).sum();
    let s2: f64 = pt.sigma.iter().map(|v| v * v).sum();
    (z2.powf(alpha + 1.0) + 4.0 * (alpha + 1.0).powi(2) * s2).powf(1.0 / (2.0 * (alpha + 1.0)))
}

/// The layer norms `(Φ, Ψ)` with their closed-form duals and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePair {
    phi: NormSpec,
    psi: NormSpec,
    phi_dual: NormSpec,
    psi_dual: NormSpec,
    params: GrushinParams,
}

impl GaugePair {
    pub fn new(phi: NormSpec, psi: NormSpec, params: GrushinParams) -> Result<Self> {
        if phi.dimension() != params.m {
            return Err(Error::DimensionMismatch {
                expected: params.m,
                got: phi.dimension(),
            });
        }
        if psi.dimension() != params.k {
            return Err(Error::DimensionMismatch {
                expected: params.k,
                got: psi.dimension(),
            });
        }
        let phi_dual = phi.dual();
        let psi_dual = psi.dual();
        Ok(GaugePair {
            phi,
            psi,
            phi_dual,
            psi_dual,
            params,
        })
    }

    pub fn euclidean(params: GrushinParams) -> Result<Self> {
        Self::new(
            NormSpec::euclidean(params.m)?,
            NormSpec::euclidean(params.k)?,
            params,
        )
    }

    pub fn phi(&self) -> &NormSpec {
        &self.phi
    }
    pub fn psi(&self) -> &NormSpec {
        &self.psi
    }
    pub fn phi_dual(&self) -> &NormSpec {
        &self.phi_dual
    }
    pub fn psi_dual(&self) -> &NormSpec {
        &self.psi_dual
    }
    pub fn params(&self) -> &GrushinParams {
        &self.params
    }

    /// Same layer norms with different `(α, p)`.
    pub fn with_params(&self, params: GrushinParams) -> Result<Self> {
        Self::new(self.phi.clone(), self.psi.clone(), params)
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.phi.label(), self.psi.label())
    }

    fn check(&self, pt: &Point) -> Result<()> {
        if pt.z.len() != self.params.m {
            return Err(Error::DimensionMismatch {
                expected: self.params.m,
                got: pt.z.len(),
            });
        }
        if pt.sigma.len() != self.params.k {
            return Err(Error::DimensionMismatch {
                expected: self.params.k,
                got: pt.sigma.len(),
            });
        }
        Ok(())
    }

    /// `Θ` on generic scalars, with `z` and `σ` given separately.
    pub fn theta_apply<S: Scalar>(&self, z: &[S], sigma: &[S]) -> S {
        gauge_from_squares(
            self.phi.apply_squared(z),
            self.psi.apply_squared(sigma),
            &self.params,
        )
    }

    /// `Θ⁰` on generic scalars.
    pub fn theta_dual_apply<S: Scalar>(&self, z: &[S], sigma: &[S]) -> S {
        gauge_from_squares(
            self.phi_dual.apply_squared(z),
            self.psi_dual.apply_squared(sigma),
            &self.params,
        )
    }

    /// `Θ(z, σ)`.
    pub fn theta(&self, pt: &Point) -> Result<f64> {
        self.check(pt)?;
        Ok(self.theta_apply(&pt.z, &pt.sigma))
    }

    /// `Θ⁰(z, σ)` from the closed-form layer duals.
    pub fn theta_dual(&self, pt: &Point) -> Result<f64> {
        self.check(pt)?;
        Ok(self.theta_dual_apply(&pt.z, &pt.sigma))
    }

    /// `Θ⁰(z, σ)` as the supremum of `|⟨z,ξ⟩|^{α+1} + c⟨σ,τ⟩` over the unit
    /// sphere of `Θ`, maximised numerically from several starting points
    /// covering both signs of `τ`.
    pub fn theta_dual_oracle(&self, pt: &Point, cfg: &DualSolverConfig) -> Result<f64> {
        self.check(pt)?;
        if pt.is_origin() {
            return Err(Error::SingularPoint("gauge oracle at the origin".into()));
        }
        let objective = GaugeSupportQuotient { gauge: self, pt };
        let a1 = self.params.alpha + 1.0;
        let normalize = |x: &[f64]| {
            let (xi, tau) = x.split_at(self.params.m);
            let t = self.theta_apply(xi, tau);
            let ts = t.powf(a1);
            xi.iter()
                .map(|v| v / t)
                .chain(tau.iter().map(|v| v / ts))
                .collect::<Vec<_>>()
        };
        let generator = |x: &[f64]| {
            let (xi, tau) = x.split_at(self.params.m);
            xi.iter()
                .copied()
                .chain(tau.iter().map(|v| a1 * v))
                .collect::<Vec<_>>()
        };

        let z_dir: Vec<f64> = if pt.z.iter().all(|&v| v == 0.0) {
            let mut e = vec![0.0; self.params.m];
            e[0] = 1e-3;
            e
        } else {
            pt.z.clone()
        };
        let mut best: Option<f64> = None;
        let mut last_err = None;
        for sign in [1.0, -1.0] {
            for weight in [1.0, 0.1] {
                let start: Vec<f64> = z_dir
                    .iter()
                    .copied()
                    .chain(pt.sigma.iter().map(|v| sign * weight * v))
                    .collect();
                match maximize_on_orbit(&objective, &start, normalize, generator, cfg) {
                    Ok(max) => best = Some(best.map_or(max.value, |b| b.max(max.value))),
                    Err(e) => last_err = Some(e),
                }
            }
        }
        match best {
            Some(v) if v > 0.0 => Ok(v.powf(1.0 / a1)),
            Some(v) => Err(Error::InvalidParameter(format!(
                "gauge supremum is not positive ({v})"
            ))),
            None => Err(last_err.expect("at least one start attempted")),
        }
    }
}

fn gauge_from_squares<S: Scalar>(layer1_sq: S, layer2_sq: S, params: &GrushinParams) -> S {
    let a1 = params.alpha + 1.0;
    let first = if a1 == 2.0 {
        layer1_sq.square()
    } else {
        layer1_sq.powf(a1)
    };
    (first + layer2_sq * params.coupling()).powf(1.0 / (2.0 * a1))
}

/// `(ξ, τ) ↦ (|⟨z,ξ⟩|^{α+1} + c⟨σ,τ⟩) / Θ(ξ,τ)^{α+1}`, invariant under `δ_t`.
struct GaugeSupportQuotient<'a> {
    gauge: &'a GaugePair,
    pt: &'a Point,
}

impl ScalarField for GaugeSupportQuotient<'_> {
    fn dimension(&self) -> usize {
        self.gauge.params.dimension()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let params = &self.gauge.params;
        let a1 = params.alpha + 1.0;
        let (xi, tau) = x.split_at(params.m);
        let pairing = dot_const(&self.pt.z, xi).abs_powf(a1)
            + dot_const(&self.pt.sigma, tau) * params.coupling();
        let first = self.gauge.phi.apply_squared(xi).powf(a1);
        let denom = (first + self.gauge.psi.apply_squared(tau) * params.coupling()).sqrt();
        pairing / denom
    }

    fn is_singular(&self, x: &[f64]) -> bool {
        let (xi, tau) = x.split_at(self.gauge.params.m);
        x.iter().all(|&v| v == 0.0)
            || self.gauge.phi.is_singular_squared(xi) && xi.iter().any(|&v| v != 0.0)
            || self.gauge.psi.is_singular_squared(tau) && tau.iter().any(|&v| v != 0.0)
    }
}

/// `(z, σ) ↦ Θ⁰(z, σ)` on flat coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ThetaDualField<'a>(pub &'a GaugePair);

impl ScalarField for ThetaDualField<'_> {
    fn dimension(&self) -> usize {
        self.0.params.dimension()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let (z, s) = x.split_at(self.0.params.m);
        self.0.theta_dual_apply(z, s)
    }
    fn is_singular(&self, x: &[f64]) -> bool {
        let (z, s) = x.split_at(self.0.params.m);
        x.iter().all(|&v| v == 0.0)
            || self.0.phi_dual.is_singular_squared(z)
            || self.0.psi_dual.is_singular_squared(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(m: usize, k: usize, alpha: f64) -> GaugePair {
        GaugePair::euclidean(GrushinParams::new(m, k, alpha, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn theta_unit_values() {
        let g = euclid(2, 1, 1.0);
        let a = Point::new(vec![0.6, 0.8], vec![0.0]);
        assert!((g.theta(&a).unwrap() - 1.0).abs() < 1e-15);
        let b = Point::new(vec![0.0, 0.0], vec![1.0]);
        assert!((g.theta(&b).unwrap() - 2.0).abs() < 1e-15);
        assert!((g.theta_dual(&b).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(g.theta(&Point::new(vec![0.0; 2], vec![0.0])).unwrap(), 0.0);
    }

    #[test]
    fn homogeneous_dimension_and_jacobian() {
        let p = GrushinParams::yamabe(2, 1).unwrap();
        assert_eq!(p.homogeneous_dimension(), 4.0);
        assert_eq!(dilation_jacobian(&p, 2.0), 16.0);
    }

    #[test]
    fn dilation_group_law() {
        let p = GrushinParams::yamabe(2, 1).unwrap();
        let x = Point::new(vec![0.3, -1.7], vec![2.5]);
        assert_eq!(dilate(&p, 1.0, &x).unwrap(), x);
        let a = dilate(&p, 2.0, &dilate(&p, 3.0, &x).unwrap()).unwrap();
        let b = dilate(&p, 6.0, &x).unwrap();
        assert_eq!(a, b);
        assert!(dilate(&p, 0.0, &x).is_err());
    }

    #[test]
    fn theta_is_dilation_homogeneous() {
        let g = euclid(2, 2, 1.0);
        let x = Point::new(vec![0.4, -0.2], vec![1.1, 0.3]);
        let t = 3.0;
        let lhs = g.theta(&dilate(g.params(), t, &x).unwrap()).unwrap();
        assert!((lhs - t * g.theta(&x).unwrap()).abs() <= 1e-13 * lhs);
    }

    #[test]
    fn euclidean_specialisation_is_the_gauge_r() {
        for alpha in [0.5, 1.0, 2.0] {
            let g = euclid(3, 2, alpha);
            let x = Point::new(vec![0.2, -0.9, 1.4], vec![0.7, -0.1]);
            let r = euclidean_gauge(alpha, &x);
            assert!((g.theta_dual(&x).unwrap() - r).abs() <= 1e-13 * r);
            assert!((g.theta(&x).unwrap() - r).abs() <= 1e-13 * r);
        }
    }

    #[test]
    fn oracle_on_horizontal_unit_sphere() {
        let g = euclid(2, 1, 1.0);
        let x = Point::new(vec![0.6, -0.8], vec![0.0]);
        let v = g.theta_dual_oracle(&x, &DualSolverConfig::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn oracle_matches_closed_form_anisotropic() {
        let phi = NormSpec::p_norm(2, 4.0).unwrap();
        let psi = NormSpec::euclidean(1).unwrap();
        let g = GaugePair::new(phi, psi, GrushinParams::yamabe(2, 1).unwrap()).unwrap();
        let x = Point::new(vec![0.7, 0.4], vec![-0.35]);
        let v = g.theta_dual_oracle(&x, &DualSolverConfig::default()).unwrap();
        let c = g.theta_dual(&x).unwrap();
        assert!((v - c).abs() <= 1e-9 * c, "{v} vs {c}");
    }

    #[test]
    fn rejects_mismatched_layers() {
        let p = GrushinParams::yamabe(2, 1).unwrap();
        let r = GaugePair::new(
            NormSpec::euclidean(3).unwrap(),
            NormSpec::euclidean(1).unwrap(),
            p,
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
        assert!(GrushinParams::new(0, 1, 1.0, 2.0).is_err());
        assert!(GrushinParams::new(1, 1, 0.0, 2.0).is_err());
        assert!(GrushinParams::new(1, 1, 1.0, 1.0).is_err());
    }
}
