//! Damped Newton ascent for objectives that are invariant along a one-parameter
//! group orbit (positive scalings, anisotropic dilations).
//!
//! The iterate is kept on a normalisation slice, the Newton system is solved
//! on the complement of the orbit generator and a Levenberg-Marquardt shift
//! keeps the step an ascent direction far from the maximum.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{jet2_eval, Jet2, Scalar, ScalarField};

/// Stopping rule for the numeric dual solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualSolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DualSolverConfig {
    fn default() -> Self {
        DualSolverConfig {
            tolerance: 1e-12,
            max_iterations: 500,
        }
    }
}

impl DualSolverConfig {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "solver tolerance must be positive, got {tolerance}"
            )));
        }
        if max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "solver needs at least one iteration".into(),
            ));
        }
        Ok(DualSolverConfig {
            tolerance,
            max_iterations,
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Maximum {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub iterations: usize,
}

pub(crate) fn maximize_on_orbit<F, N, G>(
    objective: &F,
    start: &[f64],
    normalize: N,
    generator: G,
    cfg: &DualSolverConfig,
) -> Result<Maximum>
where
    F: ScalarField,
    N: Fn(&[f64]) -> Vec<f64>,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = start.len();
    let mut x = normalize(start);
    let mut jet: Jet2 = jet2_eval(objective, &x)?;
    let mut mu = 1e-6 * (1.0 + max_abs(jet.hessian_flat()));
    let mut last_gradient = f64::INFINITY;

    for iteration in 1..=cfg.max_iterations {
        let v = DVector::from_vec(generator(&x));
        let vhat = v.normalize();
        let proj = DMatrix::identity(n, n) - &vhat * vhat.transpose();
        let g = DVector::from_column_slice(jet.gradient());
        let gt = &proj * g;
        let xnorm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let scale = jet.value().abs().max(f64::MIN_POSITIVE);
        last_gradient = gt.norm() * xnorm / scale;
        if last_gradient <= cfg.tolerance {
            return Ok(Maximum {
                value: jet.value(),
                argmax: x,
                iterations: iteration,
            });
        }

        let hp = &proj * jet.hessian_matrix() * &proj;
        let kappa = 1.0 + hp.abs().max();
        let mut accepted = false;
        while mu < 1e30 {
            let system = -&hp
                + DMatrix::identity(n, n) * mu
                + &vhat * vhat.transpose() * (kappa + mu);
            let Some(chol) = system.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = &proj * chol.solve(&gt);
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
            let trial = normalize(&trial);
            match jet2_eval(objective, &trial) {
                Ok(candidate) if candidate.value() >= jet.value() - 4.0 * f64::EPSILON * scale => {
                    let change = (candidate.value() - jet.value()).abs() / scale;
                    let step_size = step.norm() / xnorm.max(f64::MIN_POSITIVE);
                    x = trial;
                    jet = candidate;
                    mu = (mu * 0.1).max(1e-14 * kappa);
                    accepted = true;
                    if change <= cfg.tolerance && step_size <= cfg.tolerance.sqrt() {
                        return Ok(Maximum {
                            value: jet.value(),
                            argmax: x,
                            iterations: iteration,
                        });
                    }
                    break;
                }
                _ => mu *= 10.0,
            }
        }
        if !accepted {
            // No ascent step exists at working precision.
            if last_gradient <= 1e-8 {
                return Ok(Maximum {
                    value: jet.value(),
                    argmax: x,
                    iterations: iteration,
                });
            }
            return Err(Error::NoConvergence {
                iterations: iteration,
                residual: last_gradient,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iterations,
        residual: last_gradient,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
}

/// `⟨a, x⟩` for a constant vector `a`.
pub(crate) fn dot_const<S: Scalar>(a: &[f64], x: &[S]) -> S {
    let mut acc = x[0].clone() * a[0];
    for (ai, xi) in a.iter().zip(x).skip(1) {
        acc = acc + xi.clone() * *ai;
    }
    acc
}
