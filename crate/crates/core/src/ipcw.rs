//! Kaplan-Meier estimates of the censoring distribution and the inverse
//! probability of censoring weights used by the subdistribution risk sets.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Status, Subject};
use crate::error::{Error, Result};

/// Whether one censoring curve is shared by all centers or each center gets its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CensoringScope {
    Pooled,
    PerStratum,
}

/// Right-continuous step function Ĝ with Ĝ(0) = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoringSurvival {
    /// Strictly increasing times at which Ĝ drops.
    pub jump_times: Vec<f64>,
    /// Ĝ on `[jump_times[k], jump_times[k + 1])`.
    pub values: Vec<f64>,
    /// Center id for per-stratum curves, `None` for a pooled curve.
    pub center: Option<i64>,
}

impl CensoringSurvival {
    /// Ĝ(t), right-continuous.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&u| u <= t);
        if k == 0 {
            1.0
        } else {
            self.values[k - 1]
        }
    }

    /// Left limit Ĝ(t−).
    pub fn eval_left(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&u| u < t);
        if k == 0 {
            1.0
        } else {
            self.values[k - 1]
        }
    }

    /// Kaplan-Meier of the censoring process for the given (time, status)
    /// pairs. Status 0 is the event; at tied times failures stay in the
    /// censoring risk set.
    pub fn fit(obs: impl IntoIterator<Item = (f64, Status)>, center: Option<i64>) -> Self {
        let mut obs: Vec<(f64, Status)> = obs.into_iter().collect();
        obs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = obs.len();
        let mut jump_times = Vec::new();
        let mut values = Vec::new();
        let mut g = 1.0;
        let mut i = 0;
        while i < n {
            let t = obs[i].0;
            let at_risk = n - i;
            let mut j = i;
            let mut censored = 0usize;
            while j < n && obs[j].0 == t {
                if obs[j].1 == Status::Censored {
                    censored += 1;
                }
                j += 1;
            }
            if censored > 0 {
                g *= 1.0 - censored as f64 / at_risk as f64;
                jump_times.push(t);
                values.push(g);
            }
            i = j;
        }
        CensoringSurvival { jump_times, values, center }
    }

    /// Censoring jump times with their censoring counts and risk-set sizes,
    /// as used by the Kaplan-Meier martingale representation.
    pub fn risk_table(obs: &[(f64, Status)]) -> Vec<(f64, usize, usize)> {
        let mut obs = obs.to_vec();
        obs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = obs.len();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let t = obs[i].0;
            let mut j = i;
            let mut censored = 0;
            while j < n && obs[j].0 == t {
                censored += usize::from(obs[j].1 == Status::Censored);
                j += 1;
            }
            if censored > 0 {
                out.push((t, censored, n - i));
            }
            i = j;
        }
        out
    }
}

/// Censoring curves for a dataset in a given scope.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoringFit {
    pub scope: CensoringScope,
    pub curves: Vec<CensoringSurvival>,
    /// Curve index for every stratum of the dataset.
    pub stratum_curve: Vec<usize>,
}

impl CensoringFit {
    pub fn for_stratum(&self, stratum: usize) -> &CensoringSurvival {
        &self.curves[self.stratum_curve[stratum]]
    }
}

pub fn km_censoring(ds: &Dataset, scope: CensoringScope) -> Result<CensoringFit> {
    match scope {
        CensoringScope::Pooled => {
            let curve = CensoringSurvival::fit(ds.subjects().iter().map(|s| (s.time, s.status)), None);
            Ok(CensoringFit { scope, curves: vec![curve], stratum_curve: vec![0; ds.n_centers()] })
        }
        CensoringScope::PerStratum => {
            let mut curves = Vec::with_capacity(ds.n_centers());
            for st in ds.strata() {
                if st.len() < 2 {
                    return Err(Error::DegenerateStratum { center: st.center, size: st.len() });
                }
                let obs = ds.subjects()[st.range.clone()].iter().map(|s| (s.time, s.status));
                curves.push(CensoringSurvival::fit(obs, Some(st.center)));
            }
            Ok(CensoringFit { scope, stratum_curve: (0..curves.len()).collect(), curves })
        }
    }
}

/// The product ŵ(t)·Y(t) for one subject.
pub fn ipcw_weight(subject: &Subject, t: f64, g: &CensoringSurvival) -> Result<f64> {
    if subject.time >= t {
        return Ok(1.0);
    }
    match subject.status {
        Status::Censored | Status::Cause1 => Ok(0.0),
        Status::Cause2 => {
            let denom = g.eval_left(subject.time);
            if denom <= 0.0 {
                return Err(Error::ZeroDenominator { time: subject.time });
            }
            Ok(g.eval_left(t) / denom)
        }
    }
}
