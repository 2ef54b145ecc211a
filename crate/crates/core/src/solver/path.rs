//! Tuning-parameter grids, warm-started solution paths and BIC selection.

use serde::{Deserialize, Serialize};

use super::{fit_cd, fit_lqa, fit_unpenalized, FitResult, SolverKind};
use crate::error::Result;
use crate::objective::Problem;
use crate::penalty::{alasso_weights, PenaltyFamily, PenaltySpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Number of λ values spanning three decades below λ_max.
    pub size: usize,
    /// Smallest λ as a fraction of λ_max. Values below 1e−3 extend the grid
    /// with the same spacing, so the default grid is a prefix of the longer one.
    pub min_ratio: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { size: 50, min_ratio: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub lambdas: Vec<f64>,
    pub fits: Vec<FitResult>,
    pub selected: usize,
    /// The unpenalized fit used for adaptive weights, when one was needed.
    pub mple: Option<FitResult>,
}

impl PathResult {
    pub fn selected_fit(&self) -> &FitResult {
        &self.fits[self.selected]
    }
}

/// Decreasing λ grid starting at the smallest λ whose LASSO/ALASSO solution is
/// identically zero: λ_max = max_g ‖U_g(0)‖ / (scale·√d_g·θ_g).
pub fn lambda_path(problem: &Problem, spec: &PenaltySpec, opts: &GridOptions) -> Result<Vec<f64>> {
    let zero = vec![0.0; problem.dim()];
    let u = problem.evaluate(&zero)?.score;
    let mut unit = spec.clone();
    unit.lambda = 1.0;
    let lmax = (0..spec.n_groups())
        .map(|g| {
            let norm = spec.groups[g].iter().map(|&j| u[j] * u[j]).sum::<f64>().sqrt();
            norm / (problem.penalty_scale() * unit.group_lambda(g))
        })
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let size = opts.size.max(1);
    if size == 1 {
        return Ok(vec![lmax]);
    }
    let step = (1e3_f64).ln() / (size - 1) as f64;
    let span = (1.0 / opts.min_ratio.clamp(1e-12, 1.0)).ln();
    let count = ((span / step) + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| lmax * (-(k as f64) * step).exp()).collect())
}

/// Penalty specification for a family, computing adaptive weights from the
/// MPLE when the family needs them.
pub fn prepare_penalty(
    problem: &Problem,
    family: PenaltyFamily,
    template: &PenaltySpec,
) -> Result<(PenaltySpec, Option<FitResult>)> {
    let mut spec = template.clone();
    spec.family = family;
    if family == PenaltyFamily::Alasso {
        let mple = fit_unpenalized(problem)?;
        spec.weights = Some(alasso_weights(&mple.beta, mple.converged, &spec.groups)?);
        return Ok((spec, Some(mple)));
    }
    spec.weights = None;
    Ok((spec, None))
}

/// Fits the whole path with warm starts and selects λ by BIC.
///
/// `spec` must already carry adaptive weights for ALASSO (see
/// [`prepare_penalty`]). The family `None` yields a one-point path holding
/// the MPLE.
pub fn fit_path(problem: &Problem, spec: &PenaltySpec, opts: &GridOptions, solver: SolverKind) -> Result<PathResult> {
    if spec.family == PenaltyFamily::None {
        let fit = fit_unpenalized(problem)?;
        return Ok(PathResult { lambdas: vec![0.0], fits: vec![fit], selected: 0, mple: None });
    }
    spec.validate()?;
    let lambdas = lambda_path(problem, spec, opts)?;
    let mut fits = Vec::with_capacity(lambdas.len());
    let mut warm = vec![0.0; problem.dim()];
    // Nonconvex LQA restarts every λ from the unpenalized estimate.
    let restart = match (solver, spec.family) {
        (SolverKind::Lqa, PenaltyFamily::Scad | PenaltyFamily::Mcp) => fit_unpenalized(problem).ok().map(|f| f.beta),
        _ => None,
    };
    for &lam in &lambdas {
        let s = spec.clone().with_lambda(lam);
        let fit = match solver {
            SolverKind::Lqa => fit_lqa(problem, &s, restart.as_deref().unwrap_or(&warm))?,
            SolverKind::Cd => fit_cd(problem, &s, &warm)?,
        };
        warm.clone_from(&fit.beta);
        fits.push(fit);
    }
    let selected = select_bic(&fits);
    Ok(PathResult { lambdas, fits, selected, mple: None })
}

/// Index of the smallest BIC; ties go to the larger λ (earlier index).
pub fn select_bic(fits: &[FitResult]) -> usize {
    let mut best = 0;
    let mut best_bic = f64::INFINITY;
    for (k, f) in fits.iter().enumerate() {
        let b = if f.bic.is_nan() { f64::INFINITY } else { f.bic };
        if b < best_bic {
            best_bic = b;
            best = k;
        }
    }
    best
}
