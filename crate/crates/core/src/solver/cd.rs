//! Coordinate descent for the marginal (and pooled) model.
//!
//! The outer loop replaces the log-likelihood by its second-order expansion
//! in the linear predictors with the off-diagonal curvature dropped,
//!
//!   l(β + δ) ≈ l(β) + Σ g_i x_iᵀδ − ½ Σ h_i (x_iᵀδ)²,
//!
//! and the inner loop cycles exact univariate penalized minimizers over the
//! coordinates. A line search on the true objective guards each outer step.

use super::{finish_fit, kkt_violations, objective_or_neg_inf, FitResult, MAX_HALVINGS};
use crate::data::ModelKind;
use crate::error::{Error, Result};
use crate::objective::Problem;
use crate::penalty::{penalty_value, PenaltySpec, Piece};

const CD_TOL: f64 = 1e-7;
const OUTER_MAX_ITER: usize = 500;
const INNER_MAX_CYCLES: usize = 200;
const INNER_TOL: f64 = 1e-10;

pub fn fit_cd(problem: &Problem, spec: &PenaltySpec, beta_init: &[f64]) -> Result<FitResult> {
    spec.validate()?;
    if problem.kind().is_stratified() || !spec.is_individual() {
        return Err(Error::CoordinateDescentUnsupported);
    }
    debug_assert!(matches!(problem.kind(), ModelKind::Marginal | ModelKind::PooledPsh));
    let d = problem.dim();
    if spec.dim() != d || beta_init.len() != d {
        return Err(Error::InvalidPenalty("penalty and coefficient dimensions differ from the data".into()));
    }
    let s = problem.penalty_scale();
    let n = problem.n_used();
    let x: Vec<&[f64]> = (0..n).map(|i| problem.z_row(i)).collect();
    let pieces: Vec<Vec<Piece>> = (0..d).map(|j| spec.pieces(j)).collect();

    let mut beta = beta_init.to_vec();
    let mut q_old = objective_or_neg_inf(problem, spec, &beta)?;
    let mut trace = vec![q_old];
    let mut converged = false;
    let mut iterations = 0;

    for outer in 0..OUTER_MAX_ITER {
        iterations = outer + 1;
        let der = problem.eta_derivatives(&beta)?;
        let curv: Vec<f64> = (0..d).map(|j| x.iter().zip(&der.curv).map(|(xi, h)| h * xi[j] * xi[j]).sum()).collect();
        let mut r = vec![0.0; n];
        let mut target = beta.clone();
        for _ in 0..INNER_MAX_CYCLES {
            let mut max_change = 0.0_f64;
            for j in 0..d {
                let c = curv[j];
                if c <= 1e-12 {
                    continue;
                }
                let a: f64 = (0..n).map(|i| x[i][j] * (der.grad[i] - der.curv[i] * r[i])).sum();
                let z = target[j] + a / c;
                let b = univariate_minimizer(z, c, s, &pieces[j], |m| penalty_value(spec, m, j));
                let delta = b - target[j];
                if delta != 0.0 {
                    for i in 0..n {
                        r[i] += x[i][j] * delta;
                    }
                    target[j] = b;
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < INNER_TOL {
                break;
            }
        }

        let mut t = 1.0;
        let mut cand = target.clone();
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let q = objective_or_neg_inf(problem, spec, &cand)?;
            if q >= q_old - 1e-10 {
                q_old = q;
                accepted = true;
                break;
            }
            t *= 0.5;
            for j in 0..d {
                cand[j] = beta[j] + t * (target[j] - beta[j]);
            }
        }
        if !accepted {
            break;
        }
        let change = cand.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        beta = cand;
        trace.push(q_old);
        if change < CD_TOL {
            converged = true;
            break;
        }
    }
    if converged {
        let ov = problem.evaluate(&beta)?;
        converged = kkt_violations(problem, spec, &beta, &ov.score).is_empty();
    }
    finish_fit(problem, spec, beta, iterations, converged, trace)
}

/// Minimizes ½c(b − z)² + s·p(|b|) over b for a penalty whose derivative is
/// piecewise linear. Candidates are the clamped stationary points of every
/// piece plus the piece endpoints and zero.
pub(crate) fn univariate_minimizer(z: f64, c: f64, s: f64, pieces: &[Piece], value: impl Fn(f64) -> f64) -> f64 {
    let az = z.abs();
    let f = |m: f64| 0.5 * c * (m - az) * (m - az) + s * value(m);
    let mut best_m = 0.0;
    let mut best_f = f(0.0);
    let mut consider = |m: f64| {
        if m.is_finite() && m >= 0.0 {
            let v = f(m);
            if v < best_f {
                best_f = v;
                best_m = m;
            }
        }
    };
    for p in pieces {
        let curvature = c - s * p.slope;
        if curvature > 0.0 {
            let m = (c * az - s * p.intercept) / curvature;
            consider(m.clamp(p.lo, p.hi));
        }
        consider(p.lo);
        if p.hi.is_finite() {
            consider(p.hi);
        }
    }
    if best_m == 0.0 {
        0.0
    } else {
        best_m.copysign(z)
    }
}
