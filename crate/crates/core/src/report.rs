//! Pointwise residual records and their aggregates.

use serde::Serialize;

/// One comparison `lhs` vs `rhs` at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// Denominator of the relative residual.
    pub scale: f64,
}

impl Residual {
    /// Relative to `max(1, |rhs|)`.
    pub fn new(point: Vec<f64>, lhs: f64, rhs: f64) -> Self {
        let scale = rhs.abs().max(1.0);
        Residual {
            point,
            lhs,
            rhs,
            scale,
        }
    }

    pub fn with_scale(point: Vec<f64>, lhs: f64, rhs: f64, scale: f64) -> Self {
        Residual {
            point,
            lhs,
            rhs,
            scale,
        }
    }

    pub fn abs(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn rel(&self) -> f64 {
        self.abs() / self.scale
    }
}

/// Aggregate statistics of a [`ResidualReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub suite: String,
    pub tolerance: f64,
    pub count: usize,
    pub excluded_count: usize,
    pub max_rel: f64,
    pub mean_rel: f64,
    pub max_abs: f64,
    pub pass: bool,
}

/// Residuals of one verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub suite: String,
    pub tolerance: f64,
    pub records: Vec<Residual>,
    /// Candidate points rejected because they fell in a singular set.
    pub excluded_count: usize,
}

impl ResidualReport {
    pub fn new(suite: impl Into<String>, tolerance: f64) -> Self {
        ResidualReport {
            suite: suite.into(),
            tolerance,
            records: Vec::new(),
            excluded_count: 0,
        }
    }

    pub fn push(&mut self, r: Residual) {
        self.records.push(r);
    }

    pub fn max_rel(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.rel()))
    }

    pub fn mean_rel(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(Residual::rel).sum::<f64>() / self.records.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// `max_rel ≤ tolerance`, with NaN residuals counted as failures.
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.rel() <= self.tolerance)
    }

    /// Appends another report's records (same suite semantics).
    pub fn merge(&mut self, other: ResidualReport) {
        self.records.extend(other.records);
        self.excluded_count += other.excluded_count;
    }

    pub fn summary(&self) -> Summary {
        Summary {
            suite: self.suite.clone(),
            tolerance: self.tolerance,
            count: self.records.len(),
            excluded_count: self.excluded_count,
            max_rel: self.max_rel(),
            mean_rel: self.mean_rel(),
            max_abs: self.max_abs(),
            pass: self.passed(),
        }
    }
}
