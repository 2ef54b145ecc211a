//! Penalized estimation: Newton MPLE, LQA and coordinate descent solvers,
//! tuning-parameter grids and BIC selection.

mod cd;
mod lqa;
mod path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{ModelKind, Standardization};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, submatrix};
use crate::objective::{ObjectiveValue, Problem};
use crate::penalty::{group_norm, penalty_derivative, PenaltyFamily, PenaltySpec};

pub use cd::fit_cd;
pub use lqa::fit_lqa;
pub use path::{fit_path, lambda_path, prepare_penalty, select_bic, GridOptions, PathResult};

/// Perturbation in the LQA weights p'(|β|)/(|β| + ε).
pub const LQA_EPS: f64 = 1e-6;
/// Coefficients (group norms) below this are set to exactly zero.
pub const ZERO_THRESHOLD: f64 = 1e-4;
const NEWTON_TOL: f64 = 1e-8;
const NEWTON_MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Lqa,
    Cd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta: Vec<f64>,
    pub active: Vec<usize>,
    pub lambda: f64,
    pub loglik: f64,
    /// Penalized objective l(β) − scale·Σ p(‖β_g‖).
    pub objective: f64,
    pub df: f64,
    pub bic: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kind: ModelKind,
    pub penalty: PenaltySpec,
    pub objective_trace: Vec<f64>,
    pub standardization: Option<Standardization>,
}

impl FitResult {
    /// Coefficients on the original covariate scale.
    pub fn original_scale_beta(&self) -> Vec<f64> {
        match &self.standardization {
            Some(s) => s.back_map(&self.beta),
            None => self.beta.clone(),
        }
    }

    pub fn with_standardization(mut self, s: Option<Standardization>) -> Self {
        self.standardization = s;
        self
    }
}

pub(crate) fn penalized_objective(problem: &Problem, spec: &PenaltySpec, beta: &[f64]) -> Result<f64> {
    Ok(problem.loglik(beta)? - problem.penalty_scale() * spec.total(beta))
}

/// Like [`penalized_objective`] but maps overflow to −∞ so line searches can back off.
pub(crate) fn objective_or_neg_inf(problem: &Problem, spec: &PenaltySpec, beta: &[f64]) -> Result<f64> {
    match penalized_objective(problem, spec, beta) {
        Ok(q) if q.is_finite() => Ok(q),
        Ok(_) | Err(Error::NumericOverflow) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

pub fn active_set(beta: &[f64]) -> Vec<usize> {
    beta.iter().enumerate().filter(|(_, b)| **b != 0.0).map(|(j, _)| j).collect()
}

/// Diagonal LQA weights scale·p'_g(‖β_g‖)/(‖β_g‖ + ε) per coordinate.
pub(crate) fn lqa_weights(problem: &Problem, spec: &PenaltySpec, beta: &[f64]) -> Vec<f64> {
    let s = problem.penalty_scale();
    let mut a = vec![0.0; beta.len()];
    for (g, grp) in spec.groups.iter().enumerate() {
        let b = group_norm(beta, grp);
        let w = s * penalty_derivative(spec, b, g) / (b + LQA_EPS);
        for &j in grp {
            a[j] = w;
        }
    }
    a
}

/// Scaled LQA weights at `beta`, as used in the sandwich bread.
pub fn lqa_weights_for(problem: &Problem, spec: &PenaltySpec, beta: &[f64]) -> Vec<f64> {
    lqa_weights(problem, spec, beta)
}

/// tr[(I_SS + scale·A_SS)⁻¹ I_SS] on the active set S.
pub fn degrees_of_freedom(problem: &Problem, spec: &PenaltySpec, beta: &[f64], info: &DMatrix<f64>) -> f64 {
    let act = active_set(beta);
    if act.is_empty() {
        return 0.0;
    }
    let a = lqa_weights(problem, spec, beta);
    let i_ss = submatrix(info, &act);
    let mut m = i_ss.clone();
    for (r, &j) in act.iter().enumerate() {
        m[(r, r)] += a[j];
    }
    match crate::linalg::inverse_spd(&m) {
        Some(inv) => (inv * i_ss).trace(),
        None => act.len() as f64,
    }
}

/// Fills the loglik/DF/BIC fields of a fit at its final coefficients.
pub(crate) fn finish_fit(
    problem: &Problem,
    spec: &PenaltySpec,
    beta: Vec<f64>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
) -> Result<FitResult> {
    let ov = problem.evaluate(&beta)?;
    let df = degrees_of_freedom(problem, spec, &beta, &ov.info);
    let objective = ov.loglik - problem.penalty_scale() * spec.total(&beta);
    Ok(FitResult {
        active: active_set(&beta),
        lambda: spec.lambda,
        loglik: ov.loglik,
        objective,
        df,
        bic: -2.0 * ov.loglik + problem.bic_multiplier() * df,
        iterations,
        converged,
        kind: problem.kind(),
        penalty: spec.clone(),
        objective_trace: trace,
        standardization: None,
        beta,
    })
}

/// Newton step solving `info·x = rhs`, with one ridge retry.
pub(crate) fn newton_direction(info: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(x) = info.clone().cholesky().map(|c| c.solve(rhs)) {
        return Ok(x);
    }
    let d = info.nrows().max(1) as f64;
    let jitter = 1e-8 * info.trace().abs().max(1e-300) / d;
    let mut m = info.clone();
    for k in 0..info.nrows() {
        m[(k, k)] += jitter;
    }
    match m.cholesky() {
        Some(c) => Ok(c.solve(rhs)),
        None => Err(Error::SingularInformation),
    }
}

/// Maximum partial likelihood estimate by damped Newton iterations.
pub fn fit_unpenalized(problem: &Problem) -> Result<FitResult> {
    let spec = PenaltySpec::new(PenaltyFamily::None, problem.dim());
    let (beta, iters, converged, trace) = newton_mple(problem, vec![0.0; problem.dim()])?;
    finish_fit(problem, &spec, beta, iters, converged, trace)
}

pub(crate) fn newton_mple(problem: &Problem, start: Vec<f64>) -> Result<(Vec<f64>, usize, bool, Vec<f64>)> {
    let mut beta = start;
    let mut ov: ObjectiveValue = problem.evaluate(&beta)?;
    let mut trace = vec![ov.loglik];
    for it in 0..NEWTON_MAX_ITER {
        if max_abs(ov.score.as_slice()) < NEWTON_TOL {
            return Ok((beta, it, true, trace));
        }
        let step = newton_direction(&ov.info, &ov.score)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + t * s).collect();
            match problem.loglik(&cand) {
                Ok(l) if l.is_finite() && l >= ov.loglik - 1e-12 * (1.0 + ov.loglik.abs()) => {
                    accepted = Some(cand);
                    break;
                }
                Ok(_) | Err(Error::NumericOverflow) => t *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some(next) = accepted else {
            log::warn!("Newton line search stalled at iteration {it}");
            return Ok((beta, it, false, trace));
        };
        let moved = max_abs(&beta.iter().zip(&next).map(|(a, b)| a - b).collect::<Vec<_>>());
        beta = next;
        ov = problem.evaluate(&beta)?;
        trace.push(ov.loglik);
        if moved < 1e-14 {
            let ok = max_abs(ov.score.as_slice()) < NEWTON_TOL * 100.0;
            return Ok((beta, it + 1, ok, trace));
        }
    }
    let ok = max_abs(ov.score.as_slice()) < NEWTON_TOL;
    if !ok {
        log::warn!("Newton iterations did not converge");
    }
    Ok((beta, NEWTON_MAX_ITER, ok, trace))
}

/// Largest KKT violation over groups that are exactly zero.
pub(crate) fn kkt_violations(problem: &Problem, spec: &PenaltySpec, beta: &[f64], score: &DVector<f64>) -> Vec<(usize, f64)> {
    let s = problem.penalty_scale();
    let mut out = Vec::new();
    for (g, grp) in spec.groups.iter().enumerate() {
        if grp.iter().any(|&j| beta[j] != 0.0) {
            continue;
        }
        let u = grp.iter().map(|&j| score[j] * score[j]).sum::<f64>().sqrt();
        let bound = s * penalty_derivative(spec, 0.0, g);
        if u > bound * (1.0 + 1e-8) + 1e-9 * s {
            out.push((g, u));
        }
    }
    out
}

/// Stationarity residual U_S − scale·p'(‖β_g‖)·β_g/‖β_g‖ on nonzero groups.
pub(crate) fn stationarity_residual(problem: &Problem, spec: &PenaltySpec, beta: &[f64], score: &DVector<f64>) -> Vec<f64> {
    let s = problem.penalty_scale();
    let mut r = vec![0.0; beta.len()];
    for (g, grp) in spec.groups.iter().enumerate() {
        let b = group_norm(beta, grp);
        if b == 0.0 {
            continue;
        }
        let pd = penalty_derivative(spec, b, g);
        for &j in grp {
            r[j] = score[j] - s * pd * beta[j] / b;
        }
    }
    r
}
