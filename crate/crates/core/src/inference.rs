//! Sandwich covariance of the nonzero penalized coefficients.
//!
//! bread = (I_SS + scale·A_SS)⁻¹ on the active set S; meat = empirical
//! covariance of the score built from per-subject influence terms, summed
//! per subject for the stratified and pooled models and per center for the
//! marginal model.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::ModelKind;
use crate::error::{Error, Result};
use crate::linalg::{inverse_spd, submatrix, symmetrize};
use crate::objective::Problem;
use crate::solver::FitResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceMethod {
    StratifiedSandwich,
    MarginalClusterRobust,
}

/// Whether the meat includes the term for estimating the censoring weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeatKind {
    Simple,
    #[default]
    Corrected,
}

impl MeatKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "simple" => Some(MeatKind::Simple),
            "corrected" => Some(MeatKind::Corrected),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub active: Vec<usize>,
    /// Row-major |S|×|S| covariance.
    pub covariance: Vec<Vec<f64>>,
    pub std_errors: Vec<f64>,
    pub method: CovarianceMethod,
}

impl CovarianceReport {
    pub fn matrix(&self) -> DMatrix<f64> {
        let k = self.active.len();
        DMatrix::from_fn(k, k, |r, c| self.covariance[r][c])
    }
}

/// Dispatches on the fit's model kind.
pub fn sandwich(fit: &FitResult, problem: &Problem, meat: MeatKind) -> Result<CovarianceReport> {
    match problem.kind() {
        ModelKind::Marginal => sandwich_marginal(fit, problem, meat),
        _ => sandwich_stratified(fit, problem, meat),
    }
}

/// Per-subject meat; used for both stratified regimes and the pooled model.
pub fn sandwich_stratified(fit: &FitResult, problem: &Problem, meat: MeatKind) -> Result<CovarianceReport> {
    build(fit, problem, meat, false, CovarianceMethod::StratifiedSandwich)
}

/// Center-level (cluster-robust) meat.
pub fn sandwich_marginal(fit: &FitResult, problem: &Problem, meat: MeatKind) -> Result<CovarianceReport> {
    build(fit, problem, meat, true, CovarianceMethod::MarginalClusterRobust)
}

fn build(
    fit: &FitResult,
    problem: &Problem,
    meat: MeatKind,
    clustered: bool,
    method: CovarianceMethod,
) -> Result<CovarianceReport> {
    let act = fit.active.clone();
    if act.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    let ov = problem.evaluate(&fit.beta)?;
    let a = crate::solver::lqa_weights_for(problem, &fit.penalty, &fit.beta);
    let mut bread = submatrix(&ov.info, &act);
    for (r, &j) in act.iter().enumerate() {
        bread[(r, r)] += a[j];
    }
    let bread = inverse_spd(&bread).ok_or(Error::SingularInformation)?;

    let infl = problem.score_influence(&fit.beta, meat == MeatKind::Corrected)?;
    let k = act.len();
    let rows: Vec<Vec<f64>> = if clustered {
        let n_clusters = problem.clusters().iter().copied().max().map_or(0, |m| m + 1);
        let mut sums = vec![vec![0.0; k]; n_clusters];
        for (i, &c) in problem.clusters().iter().enumerate() {
            for (r, &j) in act.iter().enumerate() {
                sums[c][r] += infl[(i, j)];
            }
        }
        sums
    } else {
        (0..infl.nrows()).map(|i| act.iter().map(|&j| infl[(i, j)]).collect()).collect()
    };
    let mut m = DMatrix::zeros(k, k);
    for row in &rows {
        for r in 0..k {
            for c in 0..k {
                m[(r, c)] += row[r] * row[c];
            }
        }
    }
    let cov = symmetrize(&(&bread * m * &bread));
    Ok(CovarianceReport {
        std_errors: (0..k).map(|r| cov[(r, r)].max(0.0).sqrt()).collect(),
        covariance: (0..k).map(|r| (0..k).map(|c| cov[(r, c)]).collect()).collect(),
        active: act,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_dataset, Dataset, Record, Status};
    use crate::penalty::{PenaltyFamily, PenaltySpec};
    use crate::simulate::{generate, preset, PresetOptions};
    use crate::solver::{fit_lqa, fit_unpenalized};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cox_data(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let recs = (0..n)
            .map(|_| {
                let z = vec![rng.random::<f64>() - 0.5, rng.random::<f64>() * 2.0];
                let t = -rng.random::<f64>().ln() / (0.8 * z[0] + 0.3 * z[1]).exp();
                Record::new(t, 1, 1, z)
            })
            .collect();
        build_dataset(recs).unwrap()
    }

    /// Robust Cox variance I⁻¹(Σ W_i W_iᵀ)I⁻¹ with the usual score residuals.
    fn cox_robust(ds: &Dataset, beta: &[f64]) -> DMatrix<f64> {
        let s = ds.subjects();
        let d = beta.len();
        let r: Vec<f64> = s.iter().map(|x| x.covariates.iter().zip(beta).map(|(z, b)| z * b).sum::<f64>().exp()).collect();
        let at = |t: f64| {
            let mut s0 = 0.0;
            let mut s1 = vec![0.0; d];
            let mut s2 = DMatrix::<f64>::zeros(d, d);
            for (k, x) in s.iter().enumerate() {
                if x.time >= t {
                    s0 += r[k];
                    for j in 0..d {
                        s1[j] += r[k] * x.covariates[j];
                        for l in 0..d {
                            s2[(j, l)] += r[k] * x.covariates[j] * x.covariates[l];
                        }
                    }
                }
            }
            (s0, s1, s2)
        };
        let mut info = DMatrix::<f64>::zeros(d, d);
        let mut meat = DMatrix::<f64>::zeros(d, d);
        let events: Vec<usize> = (0..s.len()).filter(|&i| s[i].status == Status::Cause1).collect();
        let sums: Vec<_> = events.iter().map(|&e| at(s[e].time)).collect();
        for (s0, s1, s2) in &sums {
            for j in 0..d {
                for l in 0..d {
                    info[(j, l)] += s2[(j, l)] / s0 - s1[j] * s1[l] / (s0 * s0);
                }
            }
        }
        for (i, x) in s.iter().enumerate() {
            let mut w = vec![0.0; d];
            for (&e, (s0, s1, _)) in events.iter().zip(&sums) {
                let te = s[e].time;
                if e == i {
                    for j in 0..d {
                        w[j] += x.covariates[j] - s1[j] / s0;
                    }
                }
                if x.time >= te {
                    for j in 0..d {
                        w[j] -= r[i] / s0 * (x.covariates[j] - s1[j] / s0);
                    }
                }
            }
            for j in 0..d {
                for l in 0..d {
                    meat[(j, l)] += w[j] * w[l];
                }
            }
        }
        let inv = info.try_inverse().unwrap();
        &inv * meat * &inv
    }

    #[test]
    fn single_center_matches_cox_robust_variance() {
        let ds = cox_data(120, 1);
        let p = Problem::new(ModelKind::PooledPsh, &ds).unwrap();
        let fit = fit_unpenalized(&p).unwrap();
        let want = cox_robust(&ds, &fit.beta);
        for meat in [MeatKind::Simple, MeatKind::Corrected] {
            let got = sandwich(&fit, &p, meat).unwrap().matrix();
            assert!((&got - &want).amax() < 1e-9 * want.amax(), "{got} vs {want}");
        }
    }

    fn frailty_data(k: usize, seed: u64) -> Dataset {
        let (sc, _) = preset("table3", &PresetOptions { n_centers: Some(k), ..Default::default() }).unwrap();
        generate(&sc, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn singleton_clusters_match_per_subject_meat() {
        let ds = frailty_data(60, 2).relabel_centers(|_, _| 1).unwrap();
        let singles = ds.relabel_centers(|_, i| i as i64).unwrap();
        let pa = Problem::new(ModelKind::StratifiedRegular, &ds).unwrap();
        let pb = Problem::new(ModelKind::Marginal, &singles).unwrap();
        let fa = fit_unpenalized(&pa).unwrap();
        let fb = fit_unpenalized(&pb).unwrap();
        for meat in [MeatKind::Simple, MeatKind::Corrected] {
            let a = sandwich(&fa, &pa, meat).unwrap();
            let b = sandwich(&fb, &pb, meat).unwrap();
            assert_eq!(a.method, CovarianceMethod::StratifiedSandwich);
            assert_eq!(b.method, CovarianceMethod::MarginalClusterRobust);
            for (x, y) in a.std_errors.iter().zip(&b.std_errors) {
                assert!((x - y).abs() < 1e-8 * x, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn duplicated_centers_halve_variance() {
        let ds = frailty_data(50, 3);
        let k = ds.n_centers() as i64;
        let mut recs = ds.to_records();
        recs.extend(ds.to_records().into_iter().map(|mut r| {
            r.center += k + 10;
            r
        }));
        let doubled = build_dataset(recs).unwrap();
        let pa = Problem::new(ModelKind::Marginal, &ds).unwrap();
        let pb = Problem::new(ModelKind::Marginal, &doubled).unwrap();
        let a = sandwich(&fit_unpenalized(&pa).unwrap(), &pa, MeatKind::Corrected).unwrap();
        let b = sandwich(&fit_unpenalized(&pb).unwrap(), &pb, MeatKind::Corrected).unwrap();
        for (x, y) in a.std_errors.iter().zip(&b.std_errors) {
            assert!((y / x - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        }
    }

    #[test]
    fn row_order_does_not_matter() {
        let ds = frailty_data(40, 4);
        let mut recs = ds.to_records();
        recs.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
        let shuffled = build_dataset(recs).unwrap();
        for kind in [ModelKind::Marginal, ModelKind::StratifiedHigh] {
            let pa = Problem::new(kind, &ds).unwrap();
            let pb = Problem::new(kind, &shuffled).unwrap();
            let a = sandwich(&fit_unpenalized(&pa).unwrap(), &pa, MeatKind::Corrected).unwrap();
            let b = sandwich(&fit_unpenalized(&pb).unwrap(), &pb, MeatKind::Corrected).unwrap();
            for (x, y) in a.std_errors.iter().zip(&b.std_errors) {
                assert!((x - y).abs() < 1e-9 * x);
            }
        }
    }

    #[test]
    fn penalized_covariance_is_psd_on_active_set() {
        let ds = frailty_data(80, 6);
        let p = Problem::new(ModelKind::Marginal, &ds).unwrap();
        let spec = PenaltySpec::new(PenaltyFamily::Scad, 8).with_lambda(0.05);
        let fit = fit_lqa(&p, &spec, &[0.0; 8]).unwrap();
        let rep = sandwich(&fit, &p, MeatKind::Corrected).unwrap();
        assert_eq!(rep.active, fit.active);
        let m = rep.matrix();
        assert!((&m - m.transpose()).amax() == 0.0);
        assert!(m.symmetric_eigenvalues().iter().all(|&e| e >= -1e-12 * m.amax()));
        assert!(rep.std_errors.iter().all(|s| *s > 0.0));
    }

    #[test]
    fn empty_active_set_is_an_error() {
        let ds = frailty_data(30, 7);
        let p = Problem::new(ModelKind::Marginal, &ds).unwrap();
        let spec = PenaltySpec::new(PenaltyFamily::Lasso, 8).with_lambda(1e3);
        let fit = fit_lqa(&p, &spec, &[0.0; 8]).unwrap();
        assert!(matches!(sandwich(&fit, &p, MeatKind::Simple), Err(Error::EmptyActiveSet)));
    }
}
