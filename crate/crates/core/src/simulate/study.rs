//! Monte Carlo selection studies.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ar1_correlation, calibrate_scenario, generate, selection_metrics, SimScenario};
use crate::data::{Dataset, ModelKind};
use crate::error::{Error, Result};
use crate::objective::Problem;
use crate::penalty::{alasso_weights, PenaltyFamily, PenaltySpec};
use crate::solver::{fit_path, fit_unpenalized, prepare_penalty, GridOptions, SolverKind};

/// What a study row estimates with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Mple,
    Penalized(PenaltyFamily),
    Oracle,
}

impl Estimator {
    pub fn label(self) -> &'static str {
        match self {
            Estimator::Mple => "MPLE",
            Estimator::Oracle => "Oracle",
            Estimator::Penalized(PenaltyFamily::Lasso) => "LASSO",
            Estimator::Penalized(PenaltyFamily::Alasso) => "ALASSO",
            Estimator::Penalized(PenaltyFamily::Scad) => "SCAD",
            Estimator::Penalized(PenaltyFamily::Mcp) => "MCP",
            Estimator::Penalized(PenaltyFamily::None) => "MPLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Method {
    pub model: ModelKind,
    pub penalties: Vec<PenaltyFamily>,
    pub solver: SolverKind,
}

impl Method {
    pub fn new(model: ModelKind, penalties: Vec<PenaltyFamily>) -> Self {
        Method { model, penalties, solver: SolverKind::Lqa }
    }

    fn estimators(&self) -> Vec<Estimator> {
        let mut out = vec![Estimator::Mple];
        out.extend(self.penalties.iter().filter(|p| **p != PenaltyFamily::None).map(|&p| Estimator::Penalized(p)));
        out.push(Estimator::Oracle);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario: String,
    pub model: String,
    pub penalty: String,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "IC")]
    pub ic: f64,
    #[serde(rename = "Pcorr")]
    pub pcorr: f64,
    #[serde(rename = "MMSE")]
    pub mmse: f64,
    /// MMSE over the oracle row's MMSE for the same model.
    #[serde(rename = "relMMSE")]
    pub rel_mmse: f64,
    /// Replications that produced a fit.
    pub reps: usize,
    pub seed: u64,
}

/// A replication that failed for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub rep: usize,
    pub model: String,
    pub penalty: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub rows: Vec<MetricsRow>,
    pub failures: Vec<Failure>,
    /// Scenario with its censoring constants resolved.
    pub scenario: SimScenario,
    /// Selected coefficients per row and replication (`None` for failures).
    #[serde(skip)]
    pub estimates: Vec<Vec<Option<Vec<f64>>>>,
}

impl StudyResult {
    pub fn row(&self, model: ModelKind, penalty: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.model == model.label() && r.penalty == penalty)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    pub reps: usize,
    pub grid: GridOptions,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions { reps: 100, grid: GridOptions::default(), threads: None }
    }
}

/// SplitMix64 of the master seed and replication index.
pub fn replication_seed(master: u64, rep: usize) -> u64 {
    let mut z = master ^ (rep as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

type RepOutcome = Vec<Vec<std::result::Result<Vec<f64>, String>>>;

fn fit_estimators(
    ds: &Dataset,
    method: &Method,
    truth: &[f64],
    grid: &GridOptions,
) -> Vec<std::result::Result<Vec<f64>, String>> {
    let estimators = method.estimators();
    let problem = match Problem::new(method.model, ds) {
        Ok(p) => p,
        Err(e) => return vec![Err(e.to_string()); estimators.len()],
    };
    let mple = fit_unpenalized(&problem).map_err(|e| e.to_string());
    let template = PenaltySpec::new(PenaltyFamily::Lasso, problem.dim());
    estimators
        .iter()
        .map(|est| -> std::result::Result<Vec<f64>, String> {
            match *est {
                Estimator::Mple | Estimator::Penalized(PenaltyFamily::None) => {
                    Ok(mple.as_ref().map_err(Clone::clone)?.beta.clone())
                }
                Estimator::Penalized(PenaltyFamily::Alasso) => {
                    let m = mple.as_ref().map_err(Clone::clone)?;
                    let ada = || -> Result<Vec<f64>> {
                        let mut spec = template.clone();
                        spec.family = PenaltyFamily::Alasso;
                        spec.weights = Some(alasso_weights(&m.beta, m.converged, &spec.groups)?);
                        Ok(fit_path(&problem, &spec, grid, method.solver)?.selected_fit().beta.clone())
                    };
                    ada().map_err(|e| e.to_string())
                }
                Estimator::Penalized(family) => {
                    let run = || -> Result<Vec<f64>> {
                        let (spec, _) = prepare_penalty(&problem, family, &template)?;
                        Ok(fit_path(&problem, &spec, grid, method.solver)?.selected_fit().beta.clone())
                    };
                    run().map_err(|e| e.to_string())
                }
                Estimator::Oracle => {
                    let run = || -> Result<Vec<f64>> {
                        let support: Vec<usize> = (0..truth.len()).filter(|&j| truth[j] != 0.0).collect();
                        let sub = ds.select_columns(&support)?;
                        let fit = fit_unpenalized(&Problem::new(method.model, &sub)?)?;
                        let mut beta = vec![0.0; truth.len()];
                        for (k, &j) in support.iter().enumerate() {
                            beta[j] = fit.beta[k];
                        }
                        Ok(beta)
                    };
                    run().map_err(|e| e.to_string())
                }
            }
        })
        .collect()
}

fn run_rep(scenario: &SimScenario, methods: &[Method], rep: usize, grid: &GridOptions) -> RepOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(scenario.seed, rep));
    let ds = generate(scenario, &mut rng);
    methods
        .iter()
        .map(|m| match &ds {
            Ok(ds) => fit_estimators(ds, m, scenario.truth(), grid),
            Err(e) => vec![Err(e.to_string()); m.estimators().len()],
        })
        .collect()
}

/// Runs `opts.reps` replications of each method. Rows per model are MPLE,
/// the requested penalties in order, then Oracle. Failed fits are recorded and
/// left out of the summaries.
pub fn run_study(scenario: &SimScenario, methods: &[Method], opts: &StudyOptions) -> Result<StudyResult> {
    if opts.reps == 0 {
        return Err(Error::InvalidInput("a study needs at least one replication".into()));
    }
    let resolved = calibrate_scenario(scenario)?;
    let grid = opts.grid;
    let work =
        || -> Vec<RepOutcome> { (0..opts.reps).into_par_iter().map(|rep| run_rep(&resolved, methods, rep, &grid)).collect() };
    let outcomes = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let truth = resolved.truth();
    let corr = ar1_correlation(truth.len(), resolved.rho);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut estimates = Vec::new();
    for (mi, method) in methods.iter().enumerate() {
        let estimators = method.estimators();
        let mut block = Vec::new();
        for (ei, est) in estimators.iter().enumerate() {
            let mut ok = Vec::new();
            let mut per_rep = Vec::with_capacity(opts.reps);
            for (rep, outcome) in outcomes.iter().enumerate() {
                match &outcome[mi][ei] {
                    Ok(b) => {
                        ok.push(b.clone());
                        per_rep.push(Some(b.clone()));
                    }
                    Err(msg) => {
                        failures.push(Failure {
                            rep,
                            model: method.model.label().into(),
                            penalty: est.label().into(),
                            message: msg.clone(),
                        });
                        per_rep.push(None);
                    }
                }
            }
            let s = selection_metrics(&ok, truth, &corr)?;
            block.push(MetricsRow {
                scenario: resolved.name.clone(),
                model: method.model.label().into(),
                penalty: est.label().into(),
                c: s.c,
                ic: s.ic,
                pcorr: s.pcorr,
                mmse: s.mmse,
                rel_mmse: f64::NAN,
                reps: s.reps,
                seed: resolved.seed,
            });
            estimates.push(per_rep);
        }
        let oracle = block.last().map_or(f64::NAN, |r| r.mmse);
        for r in &mut block {
            r.rel_mmse = r.mmse / oracle;
        }
        rows.extend(block);
    }
    if !failures.is_empty() {
        log::warn!("{} fits failed and were excluded", failures.len());
    }
    Ok(StudyResult { rows, failures, scenario: resolved, estimates })
}

pub fn write_study_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
