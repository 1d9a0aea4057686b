//! Run configuration, read from a single JSON document.
//!
//! Every section is optional and unknown keys are rejected.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Deserialize;
use subfinsler_core::{GaugePair, GrushinParams, NormSpec};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// `"<phi>-<psi>"` with each layer one of `euclidean`, `pnorm<p>`,
    /// `ellipsoid`; a single name applies to both layers.
    pub norm_pair: String,
    pub params: ParamsConfig,
    pub epsilon: f64,
    pub sigma0: Sigma0Config,
    pub sample_count: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub output_path: Option<PathBuf>,
    pub fundamental: Vec<FundamentalCase>,
    pub wulff: WulffConfig,
    pub energy: EnergyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            norm_pair: "euclidean".into(),
            params: ParamsConfig::default(),
            epsilon: 1.0,
            sigma0: Sigma0Config::default(),
            sample_count: 200,
            seed: 42,
            tolerances: Tolerances::default(),
            output_path: None,
            fundamental: vec![
                FundamentalCase::new(1.0, PExponent::Value(2.0)),
                FundamentalCase::new(1.0, PExponent::Value(3.0)),
                FundamentalCase::new(2.0, PExponent::Value(2.0)),
                FundamentalCase::new(1.0, PExponent::Named("Q".into())),
            ],
            wulff: WulffConfig::default(),
            energy: EnergyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
    pub p: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            m: 3,
            k: 1,
            alpha: 1.0,
            p: 2.0,
        }
    }
}

/// `"zero"`, `"random"` or an explicit vector.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Sigma0Config {
    Named(String),
    Vector(Vec<f64>),
}

impl Default for Sigma0Config {
    fn default() -> Self {
        Sigma0Config::Named("zero".into())
    }
}

/// A number, or `"Q"` for the homogeneous dimension.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PExponent {
    Value(f64),
    Named(String),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FundamentalCase {
    pub alpha: f64,
    pub p: PExponent,
}

impl FundamentalCase {
    pub fn new(alpha: f64, p: PExponent) -> Self {
        FundamentalCase { alpha, p }
    }

    pub fn params(&self, m: usize, k: usize) -> Result<GrushinParams, CliError> {
        let p = match &self.p {
            PExponent::Value(v) => *v,
            PExponent::Named(s) if s == "Q" => m as f64 + (self.alpha + 1.0) * k as f64,
            PExponent::Named(s) => {
                return Err(CliError::Config(format!("unknown exponent {s:?}, expected a number or \"Q\"")))
            }
        };
        Ok(GrushinParams::new(m, k, self.alpha, p)?)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub norm_identities: f64,
    pub euler: f64,
    pub cauchy_schwarz: f64,
    pub radial: f64,
    pub chain_rule: f64,
    pub gauge_duality: f64,
    pub gauge_specialization: f64,
    pub jets_fd: f64,
    pub yamabe: f64,
    pub yamabe_fd: f64,
    /// Defaults to 1e-9 on the Euclidean pair and 1e-8 otherwise.
    pub lemma: Option<f64>,
    pub magic_recovery: f64,
    pub ode: f64,
    pub scaling: f64,
    pub translation: f64,
    pub fundamental: f64,
    pub p2_reduction: f64,
    pub wulff: f64,
    pub energy_refinement: f64,
    pub lq_refinement: f64,
    pub quotient_refinement: f64,
    pub quotient_dilation: f64,
    pub energy_oracle: f64,
    pub measure_scaling: f64,
    pub homogeneity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm_identities: 1e-9,
            euler: 1e-12,
            cauchy_schwarz: 1e-12,
            radial: 1e-8,
            chain_rule: 1e-10,
            gauge_duality: 1e-6,
            gauge_specialization: 1e-13,
            jets_fd: 1e-5,
            yamabe: 1e-7,
            yamabe_fd: 1e-4,
            lemma: None,
            magic_recovery: 1e-8,
            ode: 1e-12,
            scaling: 1e-12,
            translation: 1e-12,
            fundamental: 1e-7,
            p2_reduction: 1e-12,
            wulff: 1e-9,
            energy_refinement: 1e-3,
            lq_refinement: 5e-3,
            quotient_refinement: 1e-2,
            quotient_dilation: 1e-2,
            energy_oracle: 1e-3,
            measure_scaling: 1e-3,
            homogeneity: 1e-12,
        }
    }
}

impl Tolerances {
    fn all(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("norm_identities", self.norm_identities),
            ("euler", self.euler),
            ("cauchy_schwarz", self.cauchy_schwarz),
            ("radial", self.radial),
            ("chain_rule", self.chain_rule),
            ("gauge_duality", self.gauge_duality),
            ("gauge_specialization", self.gauge_specialization),
            ("jets_fd", self.jets_fd),
            ("yamabe", self.yamabe),
            ("yamabe_fd", self.yamabe_fd),
            ("magic_recovery", self.magic_recovery),
            ("ode", self.ode),
            ("scaling", self.scaling),
            ("translation", self.translation),
            ("fundamental", self.fundamental),
            ("p2_reduction", self.p2_reduction),
            ("wulff", self.wulff),
            ("energy_refinement", self.energy_refinement),
            ("lq_refinement", self.lq_refinement),
            ("quotient_refinement", self.quotient_refinement),
            ("quotient_dilation", self.quotient_dilation),
            ("energy_oracle", self.energy_oracle),
            ("measure_scaling", self.measure_scaling),
            ("homogeneity", self.homogeneity),
        ];
        if let Some(l) = self.lemma {
            v.push(("lemma", l));
        }
        v
    }

    pub fn lemma_for(&self, gauge: &GaugePair) -> f64 {
        self.lemma.unwrap_or(if gauge.phi().is_euclidean() && gauge.psi().is_euclidean() {
            1e-9
        } else {
            1e-8
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum WulffCurve {
    Phi,
    Psi,
    Gauge,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct WulffConfig {
    pub curve: WulffCurve,
    pub points: usize,
}

impl Default for WulffConfig {
    fn default() -> Self {
        WulffConfig {
            curve: WulffCurve::Phi,
            points: 720,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyFunction {
    Yamabe,
    Bump,
    Zero,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    Midpoint,
    GaussLegendre,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyConfig {
    pub function: EnergyFunction,
    /// `z` half-width of the box; `σ` gets its `(α+1)`-th power.
    pub half_width: Option<f64>,
    pub points_per_axis: usize,
    pub scheme: SchemeName,
    pub panel_growth: Option<f64>,
    pub dilations: Vec<f64>,
    pub budget: u64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            function: EnergyFunction::Yamabe,
            half_width: None,
            points_per_axis: 32,
            scheme: SchemeName::GaussLegendre,
            panel_growth: None,
            dilations: vec![0.5, 2.0],
            budget: 20_000_000,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.sample_count < 1 {
            return Err(CliError::Config("sample_count must be at least 1".into()));
        }
        for (name, t) in self.tolerances.all() {
            if !(t > 0.0) {
                return Err(CliError::Config(format!("tolerance {name} must be positive, got {t}")));
            }
        }
        if let Sigma0Config::Named(s) = &self.sigma0 {
            if s != "zero" && s != "random" {
                return Err(CliError::Config(format!(
                    "sigma0 must be \"zero\", \"random\" or a vector, got {s:?}"
                )));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(CliError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        self.grushin_params()?;
        norm_pair(&self.norm_pair, self.params.m, self.params.k)?;
        Ok(())
    }

    pub fn grushin_params(&self) -> Result<GrushinParams, CliError> {
        let p = self.params;
        Ok(GrushinParams::new(p.m, p.k, p.alpha, p.p)?)
    }

    pub fn gauge(&self) -> Result<GaugePair, CliError> {
        self.gauge_with(self.grushin_params()?)
    }

    pub fn gauge_with(&self, params: GrushinParams) -> Result<GaugePair, CliError> {
        let (phi, psi) = norm_pair(&self.norm_pair, params.m, params.k)?;
        Ok(GaugePair::new(phi, psi, params)?)
    }
}

/// Symmetric positive-definite matrix with `A_ii = 1 + i` and `0.3` off the
/// diagonal.
pub fn ellipsoid_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 + i as f64 } else { 0.3 })
}

pub fn named_norm(name: &str, n: usize) -> Result<NormSpec, CliError> {
    let norm = match name {
        "euclidean" => NormSpec::euclidean(n)?,
        "ellipsoid" => NormSpec::ellipsoid(ellipsoid_matrix(n))?,
        _ => match name.strip_prefix("pnorm").map(str::parse::<f64>) {
            Some(Ok(p)) => NormSpec::p_norm(n, p)?,
            _ => return Err(CliError::Config(format!("unknown norm {name:?}"))),
        },
    };
    Ok(norm)
}

/// `(Φ, Ψ)` from a pair name such as `pnorm4-euclidean`.
pub fn norm_pair(name: &str, m: usize, k: usize) -> Result<(NormSpec, NormSpec), CliError> {
    let (a, b) = name.split_once('-').unwrap_or((name, name));
    Ok((named_norm(a, m)?, named_norm(b, k)?))
}
