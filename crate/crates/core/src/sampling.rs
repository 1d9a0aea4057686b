//! Seeded sampling of verification points away from degenerate sets.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gauge::{dilate, GaugePair, Point};
use crate::norms::{NormFamily, NormSpec};

/// Generator used for every sample set; recorded in report headers.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.10), seed_from_u64";

pub type SampleRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Where verification points are drawn, relative to the solution centre
/// `(0, −σ₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePolicy {
    /// Range of `Θ⁰(z, σ+σ₀)`.
    pub theta_range: (f64, f64),
    /// Minimum `|z|`.
    pub z_min: f64,
    /// Minimum `|σ+σ₀|`, enforced only when `Ψ` is not Euclidean.
    pub sigma_min: f64,
    /// Minimum coordinate magnitude in layers carrying an ℓᵖ norm.
    pub hyperplane_margin: f64,
    pub max_attempts_per_point: usize,
}

impl Default for SamplePolicy {
    fn default() -> Self {
        SamplePolicy {
            theta_range: (0.3, 3.0),
            z_min: 1e-3,
            sigma_min: 1e-3,
            hyperplane_margin: 1e-3,
            max_attempts_per_point: 1000,
        }
    }
}

impl SamplePolicy {
    pub fn with_theta_range(mut self, lo: f64, hi: f64) -> Self {
        self.theta_range = (lo, hi);
        self
    }
}

/// Accepted points plus the number of rejected candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub points: Vec<Point>,
    pub excluded: usize,
}

fn is_pnorm(n: &NormSpec) -> bool {
    matches!(n.family(), NormFamily::PNorm { .. })
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn min_abs(v: &[f64]) -> f64 {
    v.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()))
}

/// Draws `count` points with `Θ⁰(z, σ+σ₀)` uniform in the policy range.
pub fn sample_points(
    gauge: &GaugePair,
    sigma0: &[f64],
    count: usize,
    policy: &SamplePolicy,
    rng: &mut SampleRng,
) -> Result<Samples> {
    let params = gauge.params();
    if sigma0.len() != params.k {
        return Err(Error::DimensionMismatch {
            expected: params.k,
            got: sigma0.len(),
        });
    }
    let (lo, hi) = policy.theta_range;
    if !(0.0 < lo && lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "invalid sampling range [{lo}, {hi}]"
        )));
    }
    let mut points = Vec::with_capacity(count);
    let mut excluded = 0;
    let budget = count.saturating_mul(policy.max_attempts_per_point).max(1);
    let mut attempts = 0;
    while points.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::InvalidParameter(
                "sampling policy rejects almost every candidate".into(),
            ));
        }
        let z: Vec<f64> = (0..params.m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s: Vec<f64> = (0..params.k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let radius: f64 = rng.random_range(lo..=hi);
        let raw = Point::new(z, s);
        let theta = gauge.theta_dual(&raw)?;
        if !(theta > 0.0) {
            excluded += 1;
            continue;
        }
        let centred = dilate(params, radius / theta, &raw)?;
        let ok = euclid(&centred.z) >= policy.z_min
            && (gauge.psi().is_euclidean() || euclid(&centred.sigma) >= policy.sigma_min)
            && (!is_pnorm(gauge.phi()) || min_abs(&centred.z) >= policy.hyperplane_margin)
            && (!is_pnorm(gauge.psi()) || min_abs(&centred.sigma) >= policy.hyperplane_margin);
        if !ok {
            excluded += 1;
            continue;
        }
        let sigma = centred
            .sigma
            .iter()
            .zip(sigma0)
            .map(|(a, b)| a - b)
            .collect();
        points.push(Point::new(centred.z, sigma));
    }
    Ok(Samples { points, excluded })
}

/// Points of ℝⁿ with `|x|_∞ ≤ 2`, `|x| ≥ 0.1` and every coordinate at least
/// `coordinate_margin` in magnitude.
pub fn sample_vectors(
    dimension: usize,
    count: usize,
    coordinate_margin: f64,
    rng: &mut SampleRng,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..dimension).map(|_| rng.random_range(-2.0..2.0)).collect();
        if euclid(&v) >= 0.1 && min_abs(&v) >= coordinate_margin {
            out.push(v);
        }
    }
    out
}

/// A vector with entries uniform in `[-1, 1]`.
pub fn random_vector(dimension: usize, rng: &mut SampleRng) -> Vec<f64> {
    (0..dimension).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::GrushinParams;

    #[test]
    fn samples_respect_policy_and_seed() {
        let params = GrushinParams::yamabe(2, 1).unwrap();
        let gauge = GaugePair::new(
            NormSpec::p_norm(2, 4.0).unwrap(),
            NormSpec::p_norm(1, 4.0).unwrap(),
            params,
        )
        .unwrap();
        let sigma0 = [0.7];
        let policy = SamplePolicy::default();
        let a = sample_points(&gauge, &sigma0, 50, &policy, &mut seeded_rng(9)).unwrap();
        let b = sample_points(&gauge, &sigma0, 50, &policy, &mut seeded_rng(9)).unwrap();
        assert_eq!(a, b);
        for p in &a.points {
            let shifted = Point::new(p.z.clone(), vec![p.sigma[0] + 0.7]);
            let t = gauge.theta_dual(&shifted).unwrap();
            assert!((0.3 - 1e-12..=3.0 + 1e-12).contains(&t));
            assert!(min_abs(&p.z) >= 1e-3);
            assert!(shifted.sigma[0].abs() >= 1e-3);
        }
    }
}
