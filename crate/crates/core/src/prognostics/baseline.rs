//! Breslow baseline cumulative subdistribution hazard and CIF prediction.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ModelKind};
use crate::error::{Error, Result};
use crate::objective::Problem;
use crate::solver::FitResult;

/// Step function Λ̂₀(t) of one stratum (or of the whole sample).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCurve {
    pub center: Option<i64>,
    pub times: Vec<f64>,
    /// Λ̂₀ just after each jump time.
    pub cumulative: Vec<f64>,
}

impl StepCurve {
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineCumHazard {
    pub kind: ModelKind,
    pub curves: Vec<StepCurve>,
}

impl BaselineCumHazard {
    /// Curve used for a subject from `center`; `None` when a stratified model
    /// has no baseline for that center.
    pub fn curve(&self, center: i64) -> Option<&StepCurve> {
        if self.kind.is_stratified() {
            self.curves.iter().find(|c| c.center == Some(center))
        } else {
            self.curves.first()
        }
    }

    pub fn cumulative(&self, center: i64, t: f64) -> Option<f64> {
        self.curve(center).map(|c| c.eval(t))
    }

    /// F̂₁(t | Z) = 1 − exp{−Λ̂₀(t)·e^η}.
    pub fn cif(&self, center: i64, t: f64, eta: f64) -> Option<f64> {
        self.cumulative(center, t).map(|h| cif_from(h, eta))
    }
}

pub fn cif_from(cumhaz: f64, eta: f64) -> f64 {
    -(-cumhaz * eta.exp()).exp_m1()
}

/// Breslow estimator at the fitted coefficients. `ds` must be the data the
/// fit was computed on (same covariate scale as `fit.beta`).
pub fn breslow_baseline(fit: &FitResult, ds: &Dataset) -> Result<BaselineCumHazard> {
    if fit.kind == ModelKind::StratifiedHigh {
        return Err(Error::HighStratificationUnsupported);
    }
    let problem = Problem::new(fit.kind, ds)?;
    let curves = problem
        .baseline_jumps(&fit.beta)?
        .into_iter()
        .map(|j| {
            let mut acc = 0.0;
            let cumulative = j
                .increments
                .iter()
                .map(|d| {
                    acc += d;
                    acc
                })
                .collect();
            StepCurve { center: j.center, times: j.times, cumulative }
        })
        .collect();
    Ok(BaselineCumHazard { kind: fit.kind, curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_dataset, Record};
    use crate::simulate::{generate, CensoringModel, CenterSizes, ScenarioKind, SimScenario};
    use crate::solver::fit_unpenalized;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nelson_aalen_without_censoring() {
        let times = [1.0, 2.0, 2.0, 4.0, 5.0];
        let recs: Vec<Record> = times.iter().enumerate().map(|(i, &t)| Record::new(t, 1, 1, vec![i as f64 * 0.1])).collect();
        let ds = build_dataset(recs).unwrap();
        let mut fit = fit_unpenalized(&Problem::new(ModelKind::PooledPsh, &ds).unwrap()).unwrap();
        fit.beta = vec![0.0];
        let b = breslow_baseline(&fit, &ds).unwrap();
        let na = [1.0 / 5.0, 1.0 / 5.0 + 2.0 / 4.0, 0.7 + 1.0 / 2.0, 1.2 + 1.0];
        for (t, want) in [1.0, 2.0, 4.0, 5.0].iter().zip(na) {
            assert!((b.cumulative(1, *t).unwrap() - want).abs() < 1e-12);
        }
        assert_eq!(b.cumulative(1, 0.5), Some(0.0));
    }

    #[test]
    fn cif_monotone() {
        for &eta in &[-1.0, 0.0, 2.0] {
            let mut prev = 0.0;
            for k in 0..50 {
                let f = cif_from(k as f64 * 0.1, eta);
                assert!(f >= prev && (0.0..=1.0).contains(&f));
                prev = f;
            }
        }
        assert!(cif_from(0.5, 1.0) > cif_from(0.5, 0.0));
    }

    #[test]
    fn high_stratification_refused() {
        let recs = vec![Record::new(1.0, 1, 1, vec![0.0]), Record::new(2.0, 1, 2, vec![1.0]), Record::new(3.0, 0, 2, vec![0.5])];
        let ds = build_dataset(recs).unwrap();
        let mut fit = fit_unpenalized(&Problem::new(ModelKind::PooledPsh, &ds).unwrap()).unwrap();
        fit.kind = ModelKind::StratifiedHigh;
        assert!(matches!(breslow_baseline(&fit, &ds), Err(Error::HighStratificationUnsupported)));
    }

    #[test]
    fn recovers_known_cif_without_frailty() {
        let sc = SimScenario {
            name: "nofrailty".into(),
            kind: ScenarioKind::FrailtyClustered {
                n_centers: 2000,
                sizes: CenterSizes::Fixed(1),
                alpha1: 1.0,
                alpha2: 1.0,
                marginal: false,
            },
            beta1: vec![0.8, 0.0, 1.0],
            rho: 0.5,
            censoring: CensoringModel::UniformCalibrated { target: 0.27 },
            seed: 0,
        };
        let ds = generate(&sc, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let fit = fit_unpenalized(&Problem::new(ModelKind::PooledPsh, &ds).unwrap()).unwrap();
        let b = breslow_baseline(&fit, &ds).unwrap();
        let mut sup = 0.0_f64;
        for k in 1..=30 {
            let t = k as f64 * 0.1;
            let truth = 1.0 - (-(1.0 - (-t).exp())).exp();
            sup = sup.max((b.cif(1, t, 0.0).unwrap() - truth).abs());
        }
        assert!(sup < 0.05, "{sup}");
    }
}
