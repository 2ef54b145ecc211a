//! Selection-performance summaries over Monte Carlo replications.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// C / IC / Pcorr / MMSE of one method over a set of replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub c: f64,
    pub ic: f64,
    pub pcorr: f64,
    pub mmse: f64,
    pub reps: usize,
}

/// Σ_ij = ρ^{|i−j|}.
pub fn ar1_correlation(d: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| rho.powi((i as i32 - j as i32).abs()))
}

/// (β − β₀)ᵀ Σ (β − β₀).
pub fn model_error(beta: &[f64], truth: &[f64], corr: &DMatrix<f64>) -> f64 {
    let d = truth.len();
    let mut q = 0.0;
    for i in 0..d {
        for j in 0..d {
            q += (beta[i] - truth[i]) * corr[(i, j)] * (beta[j] - truth[j]);
        }
    }
    q
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

pub fn selection_metrics(betas: &[Vec<f64>], truth: &[f64], corr: &DMatrix<f64>) -> Result<SelectionSummary> {
    let d = truth.len();
    if corr.nrows() != d || corr.ncols() != d {
        return Err(Error::DimensionMismatch { row: 0, expected: d, found: corr.nrows() });
    }
    if let Some((row, b)) = betas.iter().enumerate().find(|(_, b)| b.len() != d) {
        return Err(Error::DimensionMismatch { row, expected: d, found: b.len() });
    }
    let reps = betas.len();
    if reps == 0 {
        return Ok(SelectionSummary { c: f64::NAN, ic: f64::NAN, pcorr: f64::NAN, mmse: f64::NAN, reps: 0 });
    }
    let mut c = 0usize;
    let mut ic = 0usize;
    let mut exact = 0usize;
    let mut errors = Vec::with_capacity(reps);
    for b in betas {
        let mut ok = true;
        for j in 0..d {
            let zero_est = b[j] == 0.0;
            let zero_true = truth[j] == 0.0;
            if zero_est && zero_true {
                c += 1;
            }
            if zero_est && !zero_true {
                ic += 1;
            }
            ok &= zero_est == zero_true;
        }
        exact += usize::from(ok);
        errors.push(model_error(b, truth, corr));
    }
    let r = reps as f64;
    Ok(SelectionSummary { c: c as f64 / r, ic: ic as f64 / r, pcorr: exact as f64 / r, mmse: median(&mut errors), reps })
}
