//! Repeated train/test evaluation of a penalized model.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{breslow_baseline, c_index, d_index, prediction_error};
use crate::data::{Dataset, ModelKind};
use crate::error::{Error, Result};
use crate::objective::Problem;
use crate::penalty::{PenaltyFamily, PenaltySpec};
use crate::simulate::replication_seed;
use crate::solver::{fit_path, prepare_penalty, FitResult, GridOptions, SolverKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOptions {
    pub splits: usize,
    /// Share of subjects (or centers) assigned to training. At 1.0 the whole
    /// data set is both training and test set.
    pub train_fraction: f64,
    pub seed: u64,
    pub grid: GridOptions,
    pub solver: SolverKind,
    /// Prediction-error horizon; defaults to the upper quartile of the test
    /// set's observed times.
    pub horizon: Option<f64>,
    pub threads: Option<usize>,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            splits: 100,
            train_fraction: 0.8,
            seed: 0,
            grid: GridOptions::default(),
            solver: SolverKind::Lqa,
            horizon: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    /// Standard deviation over splits (NaN for a single split).
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = if n > 1 { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { f64::NAN };
        MeanSe { mean, se, n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub split: usize,
    pub c_index: f64,
    pub d_index: f64,
    pub prediction_error: Option<f64>,
    /// Test subjects left out of PE because their center had no baseline.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub model: ModelKind,
    pub penalty: PenaltyFamily,
    pub c_index: Option<MeanSe>,
    pub d_index: Option<MeanSe>,
    /// Absent for the highly stratified model.
    pub prediction_error: Option<MeanSe>,
    pub splits: Vec<SplitMetrics>,
    pub failures: Vec<(usize, String)>,
}

/// Training and test indices. Sampling is within centers for the regular
/// stratified model, over centers for the highly stratified and marginal
/// models, and over subjects for the pooled model.
pub fn split_indices(ds: &Dataset, model: ModelKind, fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    if fraction >= 1.0 {
        let all: Vec<usize> = (0..ds.n()).collect();
        return (all.clone(), all);
    }
    let take = |m: usize| ((fraction * m as f64).round() as usize).min(m);
    let mut train = Vec::new();
    let mut test = Vec::new();
    match model {
        ModelKind::StratifiedRegular => {
            for st in ds.strata() {
                let mut idx: Vec<usize> = st.range.clone().collect();
                idx.shuffle(rng);
                let k = take(idx.len());
                train.extend_from_slice(&idx[..k]);
                test.extend_from_slice(&idx[k..]);
            }
        }
        ModelKind::StratifiedHigh | ModelKind::Marginal => {
            let mut centers: Vec<usize> = (0..ds.n_centers()).collect();
            centers.shuffle(rng);
            let k = take(centers.len());
            for (r, &c) in centers.iter().enumerate() {
                let dest = if r < k { &mut train } else { &mut test };
                dest.extend(ds.strata()[c].range.clone());
            }
        }
        ModelKind::PooledPsh => {
            let mut idx: Vec<usize> = (0..ds.n()).collect();
            idx.shuffle(rng);
            let k = take(idx.len());
            train.extend_from_slice(&idx[..k]);
            test.extend_from_slice(&idx[k..]);
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn fit_selected(train: &Dataset, model: ModelKind, penalty: PenaltyFamily, opts: &SplitOptions) -> Result<FitResult> {
    let problem = Problem::new(model, train)?;
    let template = PenaltySpec::new(PenaltyFamily::Lasso, problem.dim());
    let (spec, _) = prepare_penalty(&problem, penalty, &template)?;
    Ok(fit_path(&problem, &spec, &opts.grid, opts.solver)?.selected_fit().clone())
}

fn upper_quartile(ds: &Dataset) -> f64 {
    let mut t: Vec<f64> = ds.subjects().iter().map(|s| s.time).collect();
    t.sort_by(f64::total_cmp);
    t[((t.len() - 1) as f64 * 0.75).floor() as usize]
}

fn one_split(ds: &Dataset, model: ModelKind, penalty: PenaltyFamily, opts: &SplitOptions, split: usize) -> Result<SplitMetrics> {
    let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(opts.seed, split));
    let (tr, te) = split_indices(ds, model, opts.train_fraction, &mut rng);
    if tr.is_empty() || te.is_empty() {
        return Err(Error::InvalidInput("split left an empty training or test set".into()));
    }
    let train = ds.subset(&tr)?;
    let test = ds.subset(&te)?;
    let fit = fit_selected(&train, model, penalty, opts)?;
    let pi: Vec<f64> = test.subjects().iter().map(|s| s.covariates.iter().zip(&fit.beta).map(|(z, b)| z * b).sum()).collect();
    let c = c_index(&test, &pi, None)?;
    let d = d_index(&test, &pi)?;

    let (pe, excluded) = if model == ModelKind::StratifiedHigh {
        (None, 0)
    } else {
        let base = breslow_baseline(&fit, &train)?;
        let keep: Vec<usize> = (0..test.n()).filter(|&i| base.curve(test.subject(i).center).is_some()).collect();
        let excluded = test.n() - keep.len();
        let scored = test.subset(&keep)?;
        let kept_pi: Vec<f64> = keep.iter().map(|&i| pi[i]).collect();
        let horizon = opts.horizon.unwrap_or_else(|| upper_quartile(&scored));
        let predict = |i: usize, t: f64| base.cif(scored.subject(i).center, t, kept_pi[i]).unwrap_or(0.0);
        (Some(prediction_error(&scored, &predict, horizon)?), excluded)
    };
    Ok(SplitMetrics { split, c_index: c, d_index: d, prediction_error: pe, excluded })
}

/// Repeats split, fit and scoring; failed splits are reported, not fatal.
pub fn split_eval(ds: &Dataset, model: ModelKind, penalty: PenaltyFamily, opts: &SplitOptions) -> Result<SplitReport> {
    if opts.splits == 0 {
        return Err(Error::InvalidInput("at least one split is required".into()));
    }
    if !(opts.train_fraction > 0.0 && opts.train_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("training fraction {} outside (0, 1]", opts.train_fraction)));
    }
    let work = || -> Vec<Result<SplitMetrics>> {
        (0..opts.splits).into_par_iter().map(|k| one_split(ds, model, penalty, opts, k)).collect()
    };
    let results = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut splits = Vec::new();
    let mut failures = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(m) => splits.push(m),
            Err(e) => failures.push((k, e.to_string())),
        }
    }
    let summary = |v: Vec<f64>| if v.is_empty() { None } else { Some(MeanSe::of(&v)) };
    let c = summary(splits.iter().map(|m| m.c_index).collect());
    let d = summary(splits.iter().map(|m| m.d_index).collect());
    let pe = summary(splits.iter().filter_map(|m| m.prediction_error).collect());
    Ok(SplitReport { model, penalty, c_index: c, d_index: d, prediction_error: pe, splits, failures })
}
