//! Simulation designs for studying variable selection on clustered
//! competing-risks data, and the metrics used to summarize them.

mod dgp;
mod metrics;
mod stable;
mod study;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dgp::{
    calibrate_scenario, censor_covariate_dependent, gen_covariates, gen_frailty_clustered, gen_three_center, generate,
    generate_latent, invert_cdf, three_center_base_cdf, LatentSubject,
};
pub use metrics::{ar1_correlation, median, model_error, selection_metrics, SelectionSummary};
pub use stable::sample_positive_stable;
pub use study::{
    replication_seed, run_study, write_study_csv, Estimator, Failure, Method, MetricsRow, StudyOptions, StudyResult,
};

/// Nonzero pattern used throughout the studies.
pub const DEFAULT_BETA: [f64; 8] = [0.8, 0.0, 0.0, 1.0, 0.0, 0.0, 0.6, 0.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CenterSizes {
    Fixed(usize),
    /// Uniform on the integers `lo..=hi`.
    Uniform {
        lo: usize,
        hi: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Three centers with log-normal, Gompertz and Weibull mixture CIFs.
    ThreeCenter { n: usize, p: f64 },
    /// Positive stable frailties acting on a common baseline e^{−t}.
    FrailtyClustered {
        n_centers: usize,
        sizes: CenterSizes,
        alpha1: f64,
        alpha2: f64,
        /// When set, `beta1` holds the marginal coefficients β* and data are
        /// generated with β* / α₁.
        marginal: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CensoringModel {
    /// Uniform(0, upper).
    Uniform { upper: f64 },
    /// Uniform(0, c) with c tuned to the target censoring rate.
    UniformCalibrated { target: f64 },
    /// Exponential with rate r₀·exp(0.5 Σ_{j∈coordinates} Z_j), r₀ tuned to
    /// the target censoring rate. An empty set gives independent censoring.
    CovariateDependent { coordinates: Vec<usize>, target: f64 },
    /// Resolved form of `CovariateDependent`.
    Exponential { coordinates: Vec<usize>, base_rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub name: String,
    pub kind: ScenarioKind,
    /// True cause-1 coefficients on the scale the fitted model estimates.
    pub beta1: Vec<f64>,
    pub rho: f64,
    pub censoring: CensoringModel,
    pub seed: u64,
}

impl SimScenario {
    pub fn dim(&self) -> usize {
        self.beta1.len()
    }

    /// Coefficients the fitted model targets (β₁, or β* for marginal designs).
    pub fn truth(&self) -> &[f64] {
        &self.beta1
    }

    /// Cause-1 coefficients used to generate the data.
    pub fn generating_beta(&self) -> Vec<f64> {
        match self.kind {
            ScenarioKind::FrailtyClustered { alpha1, marginal: true, .. } => self.beta1.iter().map(|b| b / alpha1).collect(),
            _ => self.beta1.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.beta1.is_empty() {
            return bad("empty coefficient vector".into());
        }
        if !(self.rho.abs() < 1.0) {
            return bad(format!("correlation {} outside (-1, 1)", self.rho));
        }
        match &self.kind {
            ScenarioKind::ThreeCenter { n, p } => {
                if *n == 0 || !(*p > 0.0 && *p < 1.0) {
                    return bad("three-center design needs n > 0 and p in (0, 1)".into());
                }
            }
            ScenarioKind::FrailtyClustered { n_centers, sizes, alpha1, alpha2, .. } => {
                if *n_centers == 0 {
                    return bad("no centers".into());
                }
                for a in [alpha1, alpha2] {
                    if !(*a > 0.0 && *a <= 1.0) {
                        return bad(format!("frailty index {a} outside (0, 1]"));
                    }
                }
                if let CenterSizes::Uniform { lo, hi } = sizes {
                    if lo > hi || *lo == 0 {
                        return bad("invalid center-size range".into());
                    }
                }
                if matches!(sizes, CenterSizes::Fixed(0)) {
                    return bad("empty centers".into());
                }
            }
        }
        match &self.censoring {
            CensoringModel::Uniform { upper } if !(*upper > 0.0) => bad("censoring bound must be positive".into()),
            CensoringModel::UniformCalibrated { target } | CensoringModel::CovariateDependent { target, .. }
                if !(*target > 0.0 && *target < 1.0) =>
            {
                bad("target censoring rate must lie in (0, 1)".into())
            }
            CensoringModel::CovariateDependent { coordinates, .. } | CensoringModel::Exponential { coordinates, .. }
                if coordinates.iter().any(|&j| j >= self.dim()) =>
            {
                bad("censoring depends on a coordinate outside the design".into())
            }
            _ => Ok(()),
        }
    }
}

/// Options for named scenarios; unset fields take the design's defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PresetOptions {
    pub n: Option<usize>,
    pub n_centers: Option<usize>,
    pub sizes: Option<CenterSizes>,
    pub alpha: Option<f64>,
    pub seed: u64,
}

/// Named designs: `table1`..`table4`, `table4-marginal` and `appendixD-a`..`appendixD-d`.
///
/// Returns the scenario and the model kinds it is meant to be fitted with.
pub fn preset(name: &str, opts: &PresetOptions) -> Result<(SimScenario, Vec<crate::data::ModelKind>)> {
    use crate::data::ModelKind;
    let beta = DEFAULT_BETA.to_vec();
    let alpha = opts.alpha.unwrap_or(0.7);
    let frailty = |k: usize, sizes: CenterSizes, marginal: bool| ScenarioKind::FrailtyClustered {
        n_centers: opts.n_centers.unwrap_or(k),
        sizes: opts.sizes.clone().unwrap_or(sizes),
        alpha1: alpha,
        alpha2: alpha,
        marginal,
    };
    let (kind, censoring, models) = match name {
        "table1" => (
            ScenarioKind::ThreeCenter { n: opts.n.unwrap_or(400), p: 0.6 },
            // A literal U(0, 9) censors only about 14% under this design.
            CensoringModel::UniformCalibrated { target: 0.275 },
            vec![ModelKind::StratifiedRegular],
        ),
        "table2" => (
            frailty(100, CenterSizes::Uniform { lo: 2, hi: 5 }, false),
            CensoringModel::UniformCalibrated { target: 0.27 },
            vec![ModelKind::StratifiedHigh],
        ),
        "table3" => (
            frailty(100, CenterSizes::Uniform { lo: 2, hi: 5 }, true),
            CensoringModel::UniformCalibrated { target: 0.29 },
            vec![ModelKind::Marginal],
        ),
        "table4" => (
            frailty(50, CenterSizes::Fixed(25), false),
            CensoringModel::UniformCalibrated { target: 0.27 },
            vec![ModelKind::StratifiedRegular, ModelKind::StratifiedHigh],
        ),
        "table4-marginal" => (
            frailty(50, CenterSizes::Fixed(25), true),
            CensoringModel::UniformCalibrated { target: 0.29 },
            vec![ModelKind::Marginal],
        ),
        "appendixD-a" | "appendixD-b" | "appendixD-c" | "appendixD-d" => {
            let coordinates = match name {
                "appendixD-a" => vec![0, 3],
                "appendixD-b" => vec![4, 7],
                "appendixD-c" => vec![0, 2],
                _ => vec![],
            };
            (
                ScenarioKind::ThreeCenter { n: opts.n.unwrap_or(200), p: 0.6 },
                CensoringModel::CovariateDependent { coordinates, target: 0.28 },
                vec![ModelKind::StratifiedRegular],
            )
        }
        other => return Err(Error::InvalidScenario(format!("unknown scenario `{other}`"))),
    };
    let scenario = SimScenario { name: name.to_string(), kind, beta1: beta, rho: 0.5, censoring, seed: opts.seed };
    scenario.validate()?;
    Ok((scenario, models))
}

pub const PRESET_NAMES: [&str; 9] =
    ["table1", "table2", "table3", "table4", "table4-marginal", "appendixD-a", "appendixD-b", "appendixD-c", "appendixD-d"];
