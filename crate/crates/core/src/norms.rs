//! Minkowski norms: evaluation, analytic derivatives, closed-form duals and a
//! numeric Legendre transform used as an independent oracle.
//!
//! A Minkowski norm `M` on ℝⁿ is absolutely homogeneous of degree one, with
//! `M²` strictly convex and twice continuously differentiable away from the
//! origin. Three families are built in: the Euclidean norm, the ℓᵖ norms and
//! ellipsoidal norms `√(xᵀAx)` with `A` symmetric positive-definite.
//!
//! The dual norm is `M⁰(x) = sup { ⟨x, ξ⟩ : M(ξ) = 1 }`. The closed forms are
//! ℓᵖ → ℓ^{p/(p-1)} and `A → A⁻¹`; [`NormSpec::dual_numeric`] computes the
//! supremum directly.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::{jet2_eval, Jet2, Scalar, ScalarField};
use crate::optimize::{dot_const, maximize_on_orbit, DualSolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum NormFamily {
    Euclidean,
    /// `(Σ |xᵢ|ᵖ)^{1/p}` with `p > 1`.
    PNorm { exponent: f64 },
    /// `√(xᵀAx)`.
    Ellipsoid { matrix: DMatrix<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSpec {
    family: NormFamily,
    dimension: usize,
}

impl NormSpec {
    pub fn euclidean(dimension: usize) -> Result<Self> {
        check_dimension(dimension)?;
        Ok(NormSpec {
            family: NormFamily::Euclidean,
            dimension,
        })
    }

    pub fn p_norm(dimension: usize, exponent: f64) -> Result<Self> {
        check_dimension(dimension)?;
        if !(exponent > 1.0) || !exponent.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "p-norm exponent must be finite and > 1, got {exponent}"
            )));
        }
        Ok(NormSpec {
            family: NormFamily::PNorm { exponent },
            dimension,
        })
    }

    /// Validates that `matrix` is square, symmetric and positive-definite.
    pub fn ellipsoid(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        check_dimension(n)?;
        if matrix.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "ellipsoid matrix must be square, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        let scale = matrix.abs().max().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in (i + 1)..n {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(
                        "ellipsoid matrix is not symmetric".into(),
                    ));
                }
            }
        }
        if matrix.iter().any(|a| !a.is_finite()) || matrix.clone().cholesky().is_none() {
            return Err(Error::InvalidParameter(
                "ellipsoid matrix is not positive-definite".into(),
            ));
        }
        Ok(NormSpec {
            family: NormFamily::Ellipsoid { matrix },
            dimension: n,
        })
    }

    pub fn family(&self) -> &NormFamily {
        &self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.family, NormFamily::Euclidean)
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match &self.family {
            NormFamily::Euclidean => "euclidean".into(),
            NormFamily::PNorm { exponent } => format!("pnorm({exponent})"),
            NormFamily::Ellipsoid { .. } => "ellipsoid".into(),
        }
    }

    /// `M(x)`, generic over the number type. No dimension check.
    pub fn apply<S: Scalar>(&self, x: &[S]) -> S {
        match &self.family {
            NormFamily::Euclidean => sum_of_squares(x).sqrt(),
            NormFamily::PNorm { exponent } => power_sum(x, *exponent).powf(1.0 / exponent),
            NormFamily::Ellipsoid { matrix } => quadratic_form(matrix, x).sqrt(),
        }
    }

    /// `M(x)²`, smooth at the origin for the Euclidean and ellipsoidal families.
    pub fn apply_squared<S: Scalar>(&self, x: &[S]) -> S {
        match &self.family {
            NormFamily::Euclidean => sum_of_squares(x),
            NormFamily::PNorm { exponent } => power_sum(x, *exponent).powf(2.0 / exponent),
            NormFamily::Ellipsoid { matrix } => quadratic_form(matrix, x),
        }
    }

    /// Points where `M` or its first two derivatives fail to exist: the origin,
    /// plus the coordinate hyperplanes for ℓᵖ with `p < 2`.
    pub fn is_singular(&self, x: &[f64]) -> bool {
        if x.iter().all(|&v| v == 0.0) {
            return true;
        }
        match self.family {
            NormFamily::PNorm { exponent } if exponent < 2.0 => x.contains(&0.0),
            _ => false,
        }
    }

    /// Points where `M²` is not twice differentiable.
    pub fn is_singular_squared(&self, x: &[f64]) -> bool {
        match self.family {
            NormFamily::PNorm { exponent } => {
                x.iter().all(|&v| v == 0.0) || (exponent < 2.0 && x.contains(&0.0))
            }
            _ => false,
        }
    }

    /// Distance-like margin from the singular set of `M²`, in the sense of the
    /// smallest coordinate magnitude for ℓᵖ with `p < 2` and `|x|` otherwise.
    pub fn singular_margin_squared(&self, x: &[f64]) -> f64 {
        match self.family {
            NormFamily::PNorm { exponent } if exponent < 2.0 => {
                x.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
            }
            NormFamily::PNorm { .. } => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            _ => f64::INFINITY,
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `M(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.apply(x))
    }

    /// Value, gradient and Hessian of `M` at `x ≠ 0`.
    pub fn jet(&self, x: &[f64]) -> Result<Jet2> {
        self.check(x)?;
        jet2_eval(&NormField(self), x)
    }

    /// Value, gradient and Hessian of `M²` at `x`.
    pub fn jet_squared(&self, x: &[f64]) -> Result<Jet2> {
        self.check(x)?;
        jet2_eval(&NormSquaredField(self), x)
    }

    /// The closed-form dual norm.
    pub fn dual(&self) -> NormSpec {
        let family = match &self.family {
            NormFamily::Euclidean => NormFamily::Euclidean,
            NormFamily::PNorm { exponent } => NormFamily::PNorm {
                exponent: exponent / (exponent - 1.0),
            },
            NormFamily::Ellipsoid { matrix } => {
                let inv = matrix
                    .clone()
                    .cholesky()
                    .expect("validated positive-definite at construction")
                    .inverse();
                let sym = (&inv + inv.transpose()) * 0.5;
                NormFamily::Ellipsoid { matrix: sym }
            }
        };
        NormSpec {
            family,
            dimension: self.dimension,
        }
    }

    /// `M⁰(x)` computed directly as `sup ⟨x, η⟩ / M(η)`.
    pub fn dual_numeric(&self, x: &[f64], cfg: &DualSolverConfig) -> Result<DualMaximizer> {
        self.check(x)?;
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::SingularPoint("dual norm maximiser at the origin".into()));
        }
        let objective = SupportQuotient { norm: self, x };
        let unit = |v: &[f64]| {
            let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.iter().map(|a| a / r).collect::<Vec<_>>()
        };
        let max = maximize_on_orbit(&objective, x, unit, |v| v.to_vec(), cfg)?;
        let m = self.apply(max.argmax.as_slice());
        let maximizer = max.argmax.iter().map(|a| a / m).collect();
        Ok(DualMaximizer {
            value: max.value,
            maximizer,
            iterations: max.iterations,
        })
    }

    /// Constants `(a, b)` with `a|x| ≤ M(x) ≤ b|x|`.
    pub fn equivalence_constants(&self) -> (f64, f64) {
        let n = self.dimension as f64;
        match &self.family {
            NormFamily::Euclidean => (1.0, 1.0),
            NormFamily::PNorm { exponent } => {
                let c = n.powf(1.0 / exponent - 0.5);
                if *exponent >= 2.0 {
                    (c, 1.0)
                } else {
                    (1.0, c)
                }
            }
            NormFamily::Ellipsoid { matrix } => {
                let eig = matrix.clone().symmetric_eigenvalues();
                (eig.min().sqrt(), eig.max().sqrt())
            }
        }
    }

    /// Empirical range of `½⟨∇(M²)(ξ), ξ⟩ / |ξ|²` over the samples.
    ///
    /// By Euler's relation the numerator equals `M(ξ)²`, so the range lies in
    /// `[a², b²]` for the equivalence constants `(a, b)`.
    pub fn ellipticity_bounds(&self, samples: &[Vec<f64>]) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for xi in samples {
            let j = self.jet_squared(xi)?;
            let pairing: f64 = j.gradient().iter().zip(xi).map(|(g, v)| g * v).sum();
            let r2: f64 = xi.iter().map(|v| v * v).sum();
            let q = 0.5 * pairing / r2;
            lo = lo.min(q);
            hi = hi.max(q);
        }
        Ok((lo, hi))
    }

    /// Smallest eigenvalue of `D²(M²)` over the samples; positive values
    /// spot-check strict convexity.
    pub fn min_convexity_eigenvalue(&self, samples: &[Vec<f64>]) -> Result<f64> {
        let mut lo = f64::INFINITY;
        for xi in samples {
            let j = self.jet_squared(xi)?;
            lo = lo.min(j.hessian_matrix().symmetric_eigenvalues().min());
        }
        Ok(lo)
    }

    /// Deviations of the basic primal/dual identities at a single point.
    pub fn identity_residuals(&self, x: &[f64]) -> Result<NormIdentityPoint> {
        let dual = self.dual();
        let primal_jet = self.jet(x)?;
        let dual_jet = dual.jet(x)?;
        let grad_dual = dual_jet.gradient();
        let grad_primal = primal_jet.gradient();

        let inf = |v: &[f64]| v.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        let scale = 1.0 + inf(x);

        let at_grad_dual = self.jet(grad_dual)?;
        let at_grad_primal = dual.jet(grad_primal)?;
        let bp_primal: Vec<f64> = at_grad_dual
            .gradient()
            .iter()
            .zip(x)
            .map(|(g, xi)| dual_jet.value() * g - xi)
            .collect();
        let bp_dual: Vec<f64> = at_grad_primal
            .gradient()
            .iter()
            .zip(x)
            .map(|(g, xi)| primal_jet.value() * g - xi)
            .collect();

        let euler = |j: &Jet2| {
            let pairing: f64 = j.gradient().iter().zip(x).map(|(g, v)| g * v).sum();
            (pairing - j.value()).abs() / j.value()
        };

        Ok(NormIdentityPoint {
            primal_at_dual_gradient: at_grad_dual.value(),
            dual_at_primal_gradient: at_grad_primal.value(),
            bp_primal: inf(&bp_primal) / scale,
            bp_dual: inf(&bp_dual) / scale,
            euler_primal: euler(&primal_jet),
            euler_dual: euler(&dual_jet),
            cauchy_schwarz_equality_slack: primal_jet.value() * at_grad_primal.value()
                - x.iter().zip(grad_primal).map(|(a, b)| a * b).sum::<f64>().abs(),
        })
    }

    /// Maximum deviations of the primal/dual identities over `samples`, plus
    /// the Cauchy-Schwarz slack over all ordered pairs.
    pub fn check_identities(&self, samples: &[Vec<f64>]) -> Result<NormIdentityReport> {
        let dual = self.dual();
        let mut report = NormIdentityReport {
            count: samples.len(),
            ..NormIdentityReport::default()
        };
        for x in samples {
            let p = self.identity_residuals(x)?;
            report.finabla_primal = report
                .finabla_primal
                .max((p.primal_at_dual_gradient - 1.0).abs());
            report.finabla_dual = report
                .finabla_dual
                .max((p.dual_at_primal_gradient - 1.0).abs());
            report.bp_primal = report.bp_primal.max(p.bp_primal);
            report.bp_dual = report.bp_dual.max(p.bp_dual);
            report.euler = report.euler.max(p.euler_primal).max(p.euler_dual);
            report.cauchy_schwarz_slack = report
                .cauchy_schwarz_slack
                .min(p.cauchy_schwarz_equality_slack);
        }
        for x in samples {
            let mx = self.eval(x)?;
            for y in samples {
                let slack = mx * dual.eval(y)? - x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().abs();
                report.cauchy_schwarz_slack = report.cauchy_schwarz_slack.min(slack);
            }
        }
        Ok(report)
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("norm dimension must be positive".into()))
    } else {
        Ok(())
    }
}

fn sum_of_squares<S: Scalar>(x: &[S]) -> S {
    let mut acc = x[0].square();
    for xi in &x[1..] {
        acc = acc + xi.square();
    }
    acc
}

fn power_sum<S: Scalar>(x: &[S], p: f64) -> S {
    let mut acc = x[0].abs_powf(p);
    for xi in &x[1..] {
        acc = acc + xi.abs_powf(p);
    }
    acc
}

fn quadratic_form<S: Scalar>(a: &DMatrix<f64>, x: &[S]) -> S {
    let n = x.len();
    let mut acc = x[0].square() * a[(0, 0)];
    for i in 0..n {
        for j in i..n {
            if i == 0 && j == 0 {
                continue;
            }
            let term = if i == j {
                x[i].square() * a[(i, i)]
            } else {
                x[i].clone() * x[j].clone() * (2.0 * a[(i, j)])
            };
            acc = acc + term;
        }
    }
    acc
}

/// Result of the numeric Legendre transform.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMaximizer {
    pub value: f64,
    /// Maximiser on the unit sphere of `M`.
    pub maximizer: Vec<f64>,
    pub iterations: usize,
}

/// Deviations of the primal/dual identities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormIdentityPoint {
    /// `M(∇M⁰(x))`, expected 1.
    pub primal_at_dual_gradient: f64,
    /// `M⁰(∇M(x))`, expected 1.
    pub dual_at_primal_gradient: f64,
    /// `|M⁰(x)∇M(∇M⁰(x)) − x|_∞ / (1 + |x|_∞)`.
    pub bp_primal: f64,
    /// `|M(x)∇M⁰(∇M(x)) − x|_∞ / (1 + |x|_∞)`.
    pub bp_dual: f64,
    /// `|⟨∇M(x), x⟩ − M(x)| / M(x)`.
    pub euler_primal: f64,
    pub euler_dual: f64,
    /// `M(x)M⁰(∇M(x)) − |⟨x, ∇M(x)⟩|`, an equality case of Cauchy-Schwarz.
    pub cauchy_schwarz_equality_slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormIdentityReport {
    pub count: usize,
    pub finabla_primal: f64,
    pub finabla_dual: f64,
    pub bp_primal: f64,
    pub bp_dual: f64,
    pub euler: f64,
    /// Minimum of `M(x)M⁰(y) − |⟨x, y⟩|`; never below rounding level.
    pub cauchy_schwarz_slack: f64,
}

impl Default for NormIdentityReport {
    fn default() -> Self {
        NormIdentityReport {
            count: 0,
            finabla_primal: 0.0,
            finabla_dual: 0.0,
            bp_primal: 0.0,
            bp_dual: 0.0,
            euler: 0.0,
            cauchy_schwarz_slack: f64::INFINITY,
        }
    }
}

impl NormIdentityReport {
    pub fn max_deviation(&self) -> f64 {
        self.finabla_primal
            .max(self.finabla_dual)
            .max(self.bp_primal)
            .max(self.bp_dual)
    }
}

/// `x ↦ M(x)` as a scalar field.
#[derive(Debug, Clone, Copy)]
pub struct NormField<'a>(pub &'a NormSpec);

impl ScalarField for NormField<'_> {
    fn dimension(&self) -> usize {
        self.0.dimension
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.0.apply(x)
    }
    fn is_singular(&self, x: &[f64]) -> bool {
        self.0.is_singular(x)
    }
}

/// `x ↦ M(x)²` as a scalar field.
#[derive(Debug, Clone, Copy)]
pub struct NormSquaredField<'a>(pub &'a NormSpec);

impl ScalarField for NormSquaredField<'_> {
    fn dimension(&self) -> usize {
        self.0.dimension
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.0.apply_squared(x)
    }
    fn is_singular(&self, x: &[f64]) -> bool {
        self.0.is_singular_squared(x)
    }
}

/// `η ↦ ⟨x, η⟩ / M(η)`, invariant under positive scaling of `η`.
struct SupportQuotient<'a> {
    norm: &'a NormSpec,
    x: &'a [f64],
}

impl ScalarField for SupportQuotient<'_> {
    fn dimension(&self) -> usize {
        self.x.len()
    }
    fn eval<S: Scalar>(&self, eta: &[S]) -> S {
        dot_const(self.x, eta) / self.norm.apply(eta)
    }
    fn is_singular(&self, eta: &[f64]) -> bool {
        self.norm.is_singular(eta)
    }
}
