//! Second-order forward-mode differentiation.
//!
//! Scalar fields are written once, generically over [`Scalar`], and evaluated
//! either on plain `f64` (values only), on [`Jet1`] (value and gradient) or on
//! [`Jet2`] (value, gradient and dense Hessian). Every primitive is pushed
//! through [`Scalar::chain`], which takes the value and the first two
//! derivatives of the univariate primitive at the current point.
//!
//! A central finite-difference oracle ([`fd_jet2`]) is provided for
//! cross-checking.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Number type a [`ScalarField`] can be evaluated on.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;

    /// A constant carrying the same derivative layout as `self`.
    fn lift(&self, c: f64) -> Self;

    /// Composes a univariate function with `self`, given `f`, `f'` and `f''`
    /// at `self.value()`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn powf(&self, e: f64) -> Self {
        let v = self.value();
        if e == 0.0 {
            return self.lift(1.0);
        }
        if e == 1.0 {
            return self.clone();
        }
        let f1 = e * v.powf(e - 1.0);
        let f2 = if e == 2.0 { 2.0 } else { e * (e - 1.0) * v.powf(e - 2.0) };
        self.chain(v.powf(e), f1, f2)
    }

    fn powi(&self, n: i32) -> Self {
        match n {
            0 => self.lift(1.0),
            1 => self.clone(),
            2 => self.square(),
            _ => {
                let v = self.value();
                let nf = n as f64;
                self.chain(v.powi(n), nf * v.powi(n - 1), nf * (nf - 1.0) * v.powi(n - 2))
            }
        }
    }

    /// `|x|^e`. Differentiable at zero for `e >= 2`, singular there otherwise.
    fn abs_powf(&self, e: f64) -> Self {
        let v = self.value();
        if v == 0.0 {
            let f1 = if e > 1.0 { 0.0 } else { f64::NAN };
            let f2 = if e == 2.0 {
                2.0
            } else if e > 2.0 {
                0.0
            } else {
                f64::NAN
            };
            return self.chain(0.0, f1, f2);
        }
        let a = v.abs();
        self.chain(
            a.powf(e),
            e * v.signum() * a.powf(e - 1.0),
            e * (e - 1.0) * a.powf(e - 2.0),
        )
    }

    fn sqrt(&self) -> Self {
        let s = self.value().sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    fn ln(&self) -> Self {
        let v = self.value();
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.chain(e, e, e)
    }

    /// Absolute value; not differentiable at zero.
    fn abs(&self) -> Self {
        let v = self.value();
        if v == 0.0 {
            self.chain(0.0, f64::NAN, f64::NAN)
        } else {
            self.chain(v.abs(), v.signum(), 0.0)
        }
    }

    fn recip(&self) -> Self {
        let v = self.value();
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

impl Scalar for f64 {
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn lift(&self, c: f64) -> Self {
        c
    }
    #[inline]
    fn chain(&self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    #[inline]
    fn square(&self) -> Self {
        self * self
    }
    #[inline]
    fn powf(&self, e: f64) -> Self {
        f64::powf(*self, e)
    }
    #[inline]
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    #[inline]
    fn abs_powf(&self, e: f64) -> Self {
        f64::abs(*self).powf(e)
    }
    #[inline]
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    #[inline]
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    #[inline]
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    #[inline]
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    #[inline]
    fn recip(&self) -> Self {
        1.0 / *self
    }
}

/// Value, gradient and Hessian of a scalar field at a point.
///
/// The Hessian is stored densely in row-major order and is kept exactly
/// symmetric: every operation computes the upper triangle and mirrors it.
#[derive(Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    gradient: Vec<f64>,
    hessian: Vec<f64>,
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dimension();
        let rows: Vec<&[f64]> = (0..n).map(|i| &self.hessian[i * n..(i + 1) * n]).collect();
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("gradient", &self.gradient)
            .field("hessian", &rows)
            .finish()
    }
}

impl Jet2 {
    pub fn constant(value: f64, dimension: usize) -> Self {
        Jet2 {
            value,
            gradient: vec![0.0; dimension],
            hessian: vec![0.0; dimension * dimension],
        }
    }

    /// The coordinate function `x_index` seeded at `value`.
    pub fn variable(value: f64, index: usize, dimension: usize) -> Self {
        let mut j = Self::constant(value, dimension);
        j.gradient[index] = 1.0;
        j
    }

    /// Seeds one variable per coordinate of `x`.
    pub fn seed(x: &[f64]) -> Vec<Jet2> {
        x.iter()
            .enumerate()
            .map(|(i, &xi)| Jet2::variable(xi, i, x.len()))
            .collect()
    }

    /// Builds a jet from raw parts, symmetrising the Hessian.
    pub fn from_parts(value: f64, gradient: Vec<f64>, hessian: Vec<f64>) -> Result<Self> {
        let n = gradient.len();
        if hessian.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: hessian.len(),
            });
        }
        let mut hessian = hessian;
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (hessian[i * n + j] + hessian[j * n + i]);
                hessian[i * n + j] = s;
                hessian[j * n + i] = s;
            }
        }
        Ok(Jet2 {
            value,
            gradient,
            hessian,
        })
    }

    pub fn dimension(&self) -> usize {
        self.gradient.len()
    }

    pub fn gradient(&self) -> &[f64] {
        &self.gradient
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hessian[i * self.dimension() + j]
    }

    /// Row-major `n × n` Hessian.
    pub fn hessian_flat(&self) -> &[f64] {
        &self.hessian
    }

    pub fn hessian_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dimension();
        nalgebra::DMatrix::from_row_slice(n, n, &self.hessian)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.is_finite())
            && self.hessian.iter().all(|h| h.is_finite())
    }

    /// Largest componentwise deviation, each entry measured relative to
    /// `max(1, |other entry|)`.
    pub fn max_rel_diff(&self, other: &Jet2) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        let mut worst = rel(self.value, other.value);
        for (a, b) in self.gradient.iter().zip(&other.gradient) {
            worst = worst.max(rel(*a, *b));
        }
        for (a, b) in self.hessian.iter().zip(&other.hessian) {
            worst = worst.max(rel(*a, *b));
        }
        worst
    }

    /// Largest difference in value, gradient and Hessian, each relative to
    /// `max(1, ‖·‖_∞)` of the same order of `other`.
    pub fn max_order_rel_diff(&self, other: &Jet2) -> f64 {
        let inf = |v: &[f64]| v.iter().fold(1.0_f64, |m, a| m.max(a.abs()));
        let worst = |a: &[f64], b: &[f64]| {
            let s = inf(b);
            a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs() / s))
        };
        worst(&[self.value], &[other.value])
            .max(worst(&self.gradient, &other.gradient))
            .max(worst(&self.hessian, &other.hessian))
    }

    fn check_dims(&self, other: &Jet2) {
        assert_eq!(
            self.gradient.len(),
            other.gradient.len(),
            "jets of different dimension combined"
        );
    }
}

impl Scalar for Jet2 {
    #[inline]
    fn value(&self) -> f64 {
        self.value
    }

    fn lift(&self, c: f64) -> Self {
        Jet2::constant(c, self.dimension())
    }

    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dimension();
        let gradient: Vec<f64> = self.gradient.iter().map(|g| f1 * g).collect();
        let mut hessian = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let h = f1 * self.hessian[i * n + j] + f2 * self.gradient[i] * self.gradient[j];
                hessian[i * n + j] = h;
                hessian[j * n + i] = h;
            }
        }
        Jet2 {
            value: f0,
            gradient,
            hessian,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: Jet2) -> Jet2 {
        self.check_dims(&rhs);
        self.value += rhs.value;
        for (a, b) in self.gradient.iter_mut().zip(&rhs.gradient) {
            *a += b;
        }
        for (a, b) in self.hessian.iter_mut().zip(&rhs.hessian) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: Jet2) -> Jet2 {
        self.check_dims(&rhs);
        self.value -= rhs.value;
        for (a, b) in self.gradient.iter_mut().zip(&rhs.gradient) {
            *a -= b;
        }
        for (a, b) in self.hessian.iter_mut().zip(&rhs.hessian) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        self.check_dims(&rhs);
        let n = self.dimension();
        let (a, b) = (self.value, rhs.value);
        let gradient: Vec<f64> = self
            .gradient
            .iter()
            .zip(&rhs.gradient)
            .map(|(ga, gb)| a * gb + b * ga)
            .collect();
        let mut hessian = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let h = a * rhs.hessian[i * n + j]
                    + b * self.hessian[i * n + j]
                    + (self.gradient[i] * rhs.gradient[j] + self.gradient[j] * rhs.gradient[i]);
                hessian[i * n + j] = h;
                hessian[j * n + i] = h;
            }
        }
        Jet2 {
            value: a * b,
            gradient,
            hessian,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self * -1.0
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: f64) -> Jet2 {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: f64) -> Jet2 {
        self.value -= rhs;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(mut self, rhs: f64) -> Jet2 {
        self.value *= rhs;
        self.gradient.iter_mut().for_each(|g| *g *= rhs);
        self.hessian.iter_mut().for_each(|h| *h *= rhs);
        self
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: f64) -> Jet2 {
        self * (1.0 / rhs)
    }
}

/// Largest dimension supported by [`Jet1`].
pub const JET1_MAX_DIM: usize = 16;

/// Value and gradient, stored inline so that first-order sweeps do not
/// allocate.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet1 {
    value: f64,
    gradient: [f64; JET1_MAX_DIM],
    dimension: usize,
}

impl fmt::Debug for Jet1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet1")
            .field("value", &self.value)
            .field("gradient", &self.gradient())
            .finish()
    }
}

impl Jet1 {
    pub fn constant(value: f64, dimension: usize) -> Self {
        assert!(dimension <= JET1_MAX_DIM, "Jet1 supports at most {JET1_MAX_DIM} variables");
        Jet1 {
            value,
            gradient: [0.0; JET1_MAX_DIM],
            dimension,
        }
    }

    pub fn variable(value: f64, index: usize, dimension: usize) -> Self {
        let mut j = Self::constant(value, dimension);
        j.gradient[index] = 1.0;
        j
    }

    pub fn seed(x: &[f64]) -> Vec<Jet1> {
        x.iter()
            .enumerate()
            .map(|(i, &xi)| Jet1::variable(xi, i, x.len()))
            .collect()
    }

    pub fn gradient(&self) -> &[f64] {
        &self.gradient[..self.dimension]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.gradient().iter().all(|g| g.is_finite())
    }
}

impl Scalar for Jet1 {
    #[inline]
    fn value(&self) -> f64 {
        self.value
    }
    #[inline]
    fn lift(&self, c: f64) -> Self {
        Jet1::constant(c, self.dimension)
    }
    #[inline]
    fn chain(&self, f0: f64, f1: f64, _f2: f64) -> Self {
        let mut out = *self;
        out.value = f0;
        out.gradient[..self.dimension].iter_mut().for_each(|g| *g *= f1);
        out
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    #[inline]
    fn add(mut self, rhs: Jet1) -> Jet1 {
        self.value += rhs.value;
        for i in 0..self.dimension {
            self.gradient[i] += rhs.gradient[i];
        }
        self
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    #[inline]
    fn sub(mut self, rhs: Jet1) -> Jet1 {
        self.value -= rhs.value;
        for i in 0..self.dimension {
            self.gradient[i] -= rhs.gradient[i];
        }
        self
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    #[inline]
    fn mul(mut self, rhs: Jet1) -> Jet1 {
        let (a, b) = (self.value, rhs.value);
        for i in 0..self.dimension {
            self.gradient[i] = a * rhs.gradient[i] + b * self.gradient[i];
        }
        self.value = a * b;
        self
    }
}

impl Div for Jet1 {
    type Output = Jet1;
    #[inline]
    fn div(mut self, rhs: Jet1) -> Jet1 {
        let q = self.value / rhs.value;
        for i in 0..self.dimension {
            self.gradient[i] = (self.gradient[i] - q * rhs.gradient[i]) / rhs.value;
        }
        self.value = q;
        self
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    #[inline]
    fn neg(self) -> Jet1 {
        self * -1.0
    }
}

impl Add<f64> for Jet1 {
    type Output = Jet1;
    #[inline]
    fn add(mut self, rhs: f64) -> Jet1 {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for Jet1 {
    type Output = Jet1;
    #[inline]
    fn sub(mut self, rhs: f64) -> Jet1 {
        self.value -= rhs;
        self
    }
}

impl Mul<f64> for Jet1 {
    type Output = Jet1;
    #[inline]
    fn mul(mut self, rhs: f64) -> Jet1 {
        self.value *= rhs;
        self.gradient[..self.dimension].iter_mut().for_each(|g| *g *= rhs);
        self
    }
}

impl Div<f64> for Jet1 {
    type Output = Jet1;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: f64) -> Jet1 {
        self * (1.0 / rhs)
    }
}

/// A scalar field on ℝⁿ, written generically so it can be evaluated on any
/// [`Scalar`].
///
/// Implementations must be deterministic. Points where the field or its
/// first two derivatives do not exist are reported by
/// [`is_singular`](ScalarField::is_singular); evaluation there is not
/// attempted by the drivers in this module.
pub trait ScalarField {
    fn dimension(&self) -> usize;

    fn eval<S: Scalar>(&self, x: &[S]) -> S;

    fn is_singular(&self, _x: &[f64]) -> bool {
        false
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        (**self).eval(x)
    }
    fn is_singular(&self, x: &[f64]) -> bool {
        (**self).is_singular(x)
    }
}

fn check_point<F: ScalarField>(f: &F, x: &[f64]) -> Result<()> {
    if x.len() != f.dimension() {
        return Err(Error::DimensionMismatch {
            expected: f.dimension(),
            got: x.len(),
        });
    }
    if f.is_singular(x) {
        return Err(Error::SingularPoint(format!("{x:?}")));
    }
    Ok(())
}

/// Plain evaluation with dimension and singular-set checks.
pub fn eval<F: ScalarField>(f: &F, x: &[f64]) -> Result<f64> {
    check_point(f, x)?;
    let v = f.eval(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::SingularPoint(format!("{x:?}")))
    }
}

/// Value, gradient and Hessian of `f` at `x` by forward propagation.
pub fn jet2_eval<F: ScalarField>(f: &F, x: &[f64]) -> Result<Jet2> {
    check_point(f, x)?;
    let seeded = Jet2::seed(x);
    let jet = f.eval(&seeded);
    if jet.is_finite() {
        Ok(jet)
    } else {
        Err(Error::SingularPoint(format!("{x:?}")))
    }
}

/// Value and gradient of `f` at `x`.
pub fn jet1_eval<F: ScalarField>(f: &F, x: &[f64]) -> Result<Jet1> {
    check_point(f, x)?;
    if x.len() > JET1_MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "first-order jets support at most {JET1_MAX_DIM} variables"
        )));
    }
    let seeded = Jet1::seed(x);
    let jet = f.eval(&seeded);
    if jet.is_finite() {
        Ok(jet)
    } else {
        Err(Error::SingularPoint(format!("{x:?}")))
    }
}

/// Default finite-difference step, `1e-5 · (1 + |x|_∞)`.
pub fn default_fd_step(x: &[f64]) -> f64 {
    1e-5 * (1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Central-difference value, gradient and Hessian, both O(h²).
///
/// Only used as an oracle against [`jet2_eval`].
pub fn fd_jet2<F: ScalarField>(f: &F, x: &[f64], h: Option<f64>) -> Result<Jet2> {
    check_point(f, x)?;
    let n = x.len();
    let h = h.unwrap_or_else(|| default_fd_step(x));
    let mut probe = x.to_vec();
    let mut at = |shifts: &[(usize, f64)]| -> Result<f64> {
        probe.copy_from_slice(x);
        for &(i, s) in shifts {
            probe[i] += s;
        }
        if f.is_singular(&probe) {
            return Err(Error::SingularPoint(format!("stencil point {probe:?}")));
        }
        let v = f.eval(probe.as_slice());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::SingularPoint(format!("stencil point {probe:?}")))
        }
    };

    let f0 = at(&[])?;
    let mut gradient = vec![0.0; n];
    let mut hessian = vec![0.0; n * n];
    for i in 0..n {
        let fp = at(&[(i, h)])?;
        let fm = at(&[(i, -h)])?;
        gradient[i] = (fp - fm) / (2.0 * h);
        hessian[i * n + i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in (i + 1)..n {
            let fpp = at(&[(i, h), (j, h)])?;
            let fpm = at(&[(i, h), (j, -h)])?;
            let fmp = at(&[(i, -h), (j, h)])?;
            let fmm = at(&[(i, -h), (j, -h)])?;
            let hij = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hessian[i * n + j] = hij;
            hessian[j * n + i] = hij;
        }
    }
    Jet2::from_parts(f0, gradient, hessian)
}

/// A function of one real variable, composable with scalar fields.
pub trait Profile {
    fn apply<S: Scalar>(&self, t: S) -> S;

    fn is_singular(&self, _t: f64) -> bool {
        false
    }

    /// `(F(t), F'(t), F''(t))` by a one-dimensional jet.
    fn derivatives(&self, t: f64) -> (f64, f64, f64) {
        let j = self.apply(Jet2::variable(t, 0, 1));
        (j.value(), j.gradient()[0], j.hessian(0, 0))
    }
}

/// `t ↦ t^e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power(pub f64);

impl Profile for Power {
    fn apply<S: Scalar>(&self, t: S) -> S {
        if self.0.fract() == 0.0 && self.0.abs() < 64.0 {
            if self.0 >= 0.0 {
                t.powi(self.0 as i32)
            } else {
                t.powi((-self.0) as i32).recip()
            }
        } else {
            t.powf(self.0)
        }
    }

    fn is_singular(&self, t: f64) -> bool {
        (t <= 0.0 && self.0.fract() != 0.0) || (t == 0.0 && self.0 < 0.0)
    }
}

/// `t ↦ log t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Log;

impl Profile for Log {
    fn apply<S: Scalar>(&self, t: S) -> S {
        t.ln()
    }

    fn is_singular(&self, t: f64) -> bool {
        t <= 0.0
    }
}

/// `F ∘ u`.
#[derive(Debug, Clone)]
pub struct Composed<P, U> {
    pub outer: P,
    pub inner: U,
}

impl<P: Profile, U: ScalarField> ScalarField for Composed<P, U> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.outer.apply(self.inner.eval(x))
    }

    fn is_singular(&self, x: &[f64]) -> bool {
        self.inner.is_singular(x) || self.outer.is_singular(self.inner.eval(x))
    }
}

/// `a·f + b·g`.
#[derive(Debug, Clone)]
pub struct LinearCombination<F, G> {
    pub a: f64,
    pub f: F,
    pub b: f64,
    pub g: G,
}

impl<F: ScalarField, G: ScalarField> ScalarField for LinearCombination<F, G> {
    fn dimension(&self) -> usize {
        self.f.dimension()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.f.eval(x) * self.a + self.g.eval(x) * self.b
    }

    fn is_singular(&self, x: &[f64]) -> bool {
        self.f.is_singular(x) || self.g.is_singular(x)
    }
}

/// `λ·u`.
#[derive(Debug, Clone)]
pub struct Scaled<U> {
    pub factor: f64,
    pub inner: U,
}

impl<U: ScalarField> ScalarField for Scaled<U> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.inner.eval(x) * self.factor
    }

    fn is_singular(&self, x: &[f64]) -> bool {
        self.inner.is_singular(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Square;
    impl ScalarField for Square {
        fn dimension(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].square()
        }
    }

    struct Bilinear;
    impl ScalarField for Bilinear {
        fn dimension(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].clone() * x[1].clone()
        }
    }

    struct NormSquared3;
    impl ScalarField for NormSquared3 {
        fn dimension(&self) -> usize {
            3
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].square() + x[1].square() + x[2].square()
        }
    }

    struct Cube;
    impl ScalarField for Cube {
        fn dimension(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].powi(3)
        }
    }

    struct Constant;
    impl ScalarField for Constant {
        fn dimension(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].lift(7.25)
        }
    }

    struct AbsField;
    impl ScalarField for AbsField {
        fn dimension(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].abs()
        }
        fn is_singular(&self, x: &[f64]) -> bool {
            x[0] == 0.0
        }
    }

    #[test]
    fn square_at_three() {
        let j = jet2_eval(&Square, &[3.0]).unwrap();
        assert_eq!(j.value(), 9.0);
        assert_eq!(j.gradient(), &[6.0]);
        assert_eq!(j.hessian(0, 0), 2.0);
    }

    #[test]
    fn bilinear_product() {
        let j = jet2_eval(&Bilinear, &[2.0, 5.0]).unwrap();
        assert_eq!(j.value(), 10.0);
        assert_eq!(j.gradient(), &[5.0, 2.0]);
        assert_eq!(j.hessian_flat(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn euclidean_norm_squared() {
        let j = jet2_eval(&NormSquared3, &[1.0, 2.0, 2.0]).unwrap();
        assert_eq!(j.value(), 9.0);
        assert_eq!(j.gradient(), &[2.0, 4.0, 4.0]);
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(j.hessian(i, k), if i == k { 2.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn fd_cubic_gradient() {
        let j = fd_jet2(&Cube, &[1.0], Some(1e-4)).unwrap();
        assert!((j.gradient()[0] - 3.0).abs() < 1e-7);
    }

    #[test]
    fn fd_constant_is_flat() {
        let j = fd_jet2(&Constant, &[0.3, -1.2], None).unwrap();
        assert!(j.gradient().iter().all(|g| g.abs() <= 1e-10));
        assert!(j.hessian_flat().iter().all(|h| h.abs() <= 1e-10));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = jet2_eval(&Bilinear, &[1.0]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn abs_is_singular_at_zero() {
        assert!(matches!(jet2_eval(&AbsField, &[0.0]), Err(Error::SingularPoint(_))));
        let j = jet2_eval(&AbsField, &[-2.0]).unwrap();
        assert_eq!(j.gradient(), &[-1.0]);
    }

    #[test]
    fn fd_reports_singular_stencil() {
        assert!(matches!(
            fd_jet2(&AbsField, &[1e-5], Some(1e-5)),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn abs_pow_is_c2_at_zero_for_exponent_at_least_two() {
        let x = Jet2::variable(0.0, 0, 1);
        let j = x.abs_powf(4.0);
        assert_eq!((j.value(), j.gradient()[0], j.hessian(0, 0)), (0.0, 0.0, 0.0));
        let j = x.abs_powf(2.0);
        assert_eq!(j.hessian(0, 0), 2.0);
        assert!(!x.abs_powf(1.5).is_finite());
    }

    #[test]
    fn jet1_matches_jet2_gradient() {
        let x = [0.7, -1.3, 2.1];
        let j1 = jet1_eval(&NormSquared3, &x).unwrap();
        let j2 = jet2_eval(&NormSquared3, &x).unwrap();
        assert_eq!(j1.gradient(), j2.gradient());
        assert_eq!(j1.value(), j2.value());
    }

    #[test]
    fn profile_derivatives() {
        let (f, d1, d2) = Power(3.0).derivatives(2.0);
        assert_eq!((f, d1, d2), (8.0, 12.0, 12.0));
        let (f, d1, d2) = Log.derivatives(2.0);
        assert_eq!(f, 2f64.ln());
        assert_eq!(d1, 0.5);
        assert_eq!(d2, -0.25);
    }

    #[test]
    fn from_parts_symmetrises() {
        let j = Jet2::from_parts(1.0, vec![0.0, 0.0], vec![1.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(j.hessian(0, 1), 3.0);
        assert_eq!(j.hessian(1, 0), 3.0);
    }
}
