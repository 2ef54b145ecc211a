//! Discrimination and prediction-error measures for cause-1 CIF predictions.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{build_dataset, Dataset, ModelKind, Record, Status};
use crate::error::{Error, Result};
use crate::ipcw::CensoringSurvival;
use crate::objective::Problem;
use crate::solver::fit_unpenalized;

/// Last observed cause-1 time, the default C-index horizon.
pub fn last_event_time(ds: &Dataset) -> Option<f64> {
    ds.subjects().iter().filter(|s| s.status == Status::Cause1).map(|s| s.time).reduce(f64::max)
}

/// Concordance over evaluable ordered pairs (i, j): i fails from cause 1 at
/// X_i ≤ τ while j is still event-free at X_i or has already failed from
/// cause 2. Concordant when PI_i > PI_j; ties in PI score 0.5.
pub fn c_index(ds: &Dataset, pi: &[f64], tau: Option<f64>) -> Result<f64> {
    if pi.len() != ds.n() {
        return Err(Error::DimensionMismatch { row: 0, expected: ds.n(), found: pi.len() });
    }
    let tau = match tau {
        Some(t) => t,
        None => last_event_time(ds).ok_or(Error::NoEvaluablePairs)?,
    };
    let subj = ds.subjects();
    let mut pairs = 0.0;
    let mut score = 0.0;
    for (i, a) in subj.iter().enumerate() {
        if a.status != Status::Cause1 || a.time > tau {
            continue;
        }
        for (j, b) in subj.iter().enumerate() {
            if i == j {
                continue;
            }
            let evaluable = b.time > a.time
                || (b.time == a.time && b.status == Status::Censored)
                || (b.status == Status::Cause2 && b.time <= a.time);
            if !evaluable {
                continue;
            }
            pairs += 1.0;
            score += if pi[i] > pi[j] {
                1.0
            } else if pi[i] == pi[j] {
                0.5
            } else {
                0.0
            };
        }
    }
    if pairs == 0.0 {
        return Err(Error::NoEvaluablePairs);
    }
    Ok(score / pairs)
}

/// Ranks 1..n with ties given their average rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Separation index: the coefficient of a single-covariate PSH fit on Blom
/// rankits of PI scaled by √(8/π), reported in absolute value.
pub fn d_index(ds: &Dataset, pi: &[f64]) -> Result<f64> {
    if pi.len() != ds.n() {
        return Err(Error::DimensionMismatch { row: 0, expected: ds.n(), found: pi.len() });
    }
    if pi.iter().all(|&p| p == pi[0]) {
        return Err(Error::DegeneratePI);
    }
    let n = pi.len() as f64;
    let kappa = (8.0 / std::f64::consts::PI).sqrt();
    let normal = Normal::standard();
    let ranks = average_ranks(pi);
    let records: Vec<Record> = ds
        .subjects()
        .iter()
        .zip(&ranks)
        .map(|(s, r)| {
            let q = normal.inverse_cdf((r - 0.375) / (n + 0.25)) / kappa;
            Record::new(s.time, s.status.code() as i64, 1, vec![q])
        })
        .collect();
    let one = build_dataset(records)?;
    let fit = fit_unpenalized(&Problem::new(ModelKind::PooledPsh, &one)?)?;
    Ok(fit.beta[0].abs())
}

/// IPCW Brier score of a cause-1 CIF predictor at time t.
///
/// Weights: 1/Ĝ(X_i−) for subjects with an event by t, 1/Ĝ(t) for those
/// still under observation, 0 for those censored before t.
pub fn brier_score(ds: &Dataset, predict: &dyn Fn(usize, f64) -> f64, t: f64, g: &CensoringSurvival) -> Result<f64> {
    let mut total = 0.0;
    let gt = g.eval(t);
    for (i, s) in ds.subjects().iter().enumerate() {
        let (w, observed) = if s.time <= t && s.status.is_event() {
            let gx = g.eval_left(s.time);
            if gx <= 0.0 {
                return Err(Error::ZeroDenominator { time: s.time });
            }
            (1.0 / gx, f64::from(s.status == Status::Cause1))
        } else if s.time > t {
            if gt <= 0.0 {
                return Err(Error::HorizonBeyondSupport { horizon: t });
            }
            (1.0 / gt, 0.0)
        } else {
            continue;
        };
        total += w * (observed - predict(i, t)).powi(2);
    }
    Ok(total / ds.n() as f64)
}

/// Brier score integrated over [0, t*] by the trapezoid rule on the grid of
/// observed event times, with Ĝ the pooled Kaplan-Meier censoring curve of `ds`.
pub fn prediction_error(ds: &Dataset, predict: &dyn Fn(usize, f64) -> f64, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!("prediction horizon {horizon} must be positive")));
    }
    let g = CensoringSurvival::fit(ds.subjects().iter().map(|s| (s.time, s.status)), None);
    if g.eval_left(horizon) <= 0.0 {
        return Err(Error::HorizonBeyondSupport { horizon });
    }
    let mut grid = vec![0.0];
    grid.extend(ds.subjects().iter().filter(|s| s.status.is_event() && s.time < horizon).map(|s| s.time));
    grid.push(horizon);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut prev = brier_score(ds, predict, grid[0], &g)?;
    let mut area = 0.0;
    for w in grid.windows(2) {
        // Ĝ(t*) may vanish at a censoring jump at exactly t*; use the left limit there.
        let cur = if w[1] == horizon && g.eval(horizon) <= 0.0 {
            brier_score(ds, predict, horizon - f64::EPSILON * horizon, &g)?
        } else {
            brier_score(ds, predict, w[1], &g)?
        };
        area += 0.5 * (prev + cur) * (w[1] - w[0]);
        prev = cur;
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ds(rows: &[(f64, i64)]) -> Dataset {
        build_dataset(rows.iter().map(|&(t, s)| Record::new(t, s, 1, vec![0.0])).collect()).unwrap()
    }

    fn sim(n: usize, beta: f64, seed: u64) -> Dataset {
        use crate::simulate::{generate, CensoringModel, CenterSizes, ScenarioKind, SimScenario};
        let sc = SimScenario {
            name: "x".into(),
            kind: ScenarioKind::FrailtyClustered {
                n_centers: n,
                sizes: CenterSizes::Fixed(1),
                alpha1: 1.0,
                alpha2: 1.0,
                marginal: false,
            },
            beta1: vec![beta],
            rho: 0.0,
            censoring: CensoringModel::UniformCalibrated { target: 0.25 },
            seed: 0,
        };
        generate(&sc, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn perfect_and_constant_predictions() {
        let d = ds(&[(1.0, 1), (2.0, 1), (3.0, 0), (4.0, 1), (5.0, 2)]);
        // Earlier failures get higher risk.
        let pi: Vec<f64> = d.subjects().iter().map(|s| -s.time).collect();
        assert_eq!(c_index(&d, &pi, None).unwrap(), 1.0);
        assert_eq!(c_index(&d, &vec![0.3; 5], None).unwrap(), 0.5);
        assert!(matches!(c_index(&ds(&[(1.0, 0), (2.0, 2)]), &[0.0, 1.0], None), Err(Error::NoEvaluablePairs)));
    }

    #[test]
    fn competing_failures_stay_comparable() {
        // Subject failing from cause 2 at t=1 is comparable with the cause-1 failure at t=2.
        let d = ds(&[(1.0, 2), (2.0, 1)]);
        assert_eq!(c_index(&d, &[0.0, 1.0], None).unwrap(), 1.0);
        assert_eq!(c_index(&d, &[1.0, 0.0], None).unwrap(), 0.0);
    }

    #[test]
    fn c_index_rank_invariant_and_null() {
        let d = sim(500, 1.0, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z: Vec<f64> = d.subjects().iter().map(|s| s.covariates[0]).collect();
        let c = c_index(&d, &z, None).unwrap();
        let t: Vec<f64> = z.iter().map(|v| (2.0 * v).exp() + 3.0).collect();
        assert_eq!(c, c_index(&d, &t, None).unwrap());
        assert!(c > 0.6);
        let mut perm = z.clone();
        perm.shuffle(&mut rng);
        assert!((c_index(&d, &perm, None).unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn d_index_properties() {
        let d = sim(1000, 1.0, 3);
        let z: Vec<f64> = d.subjects().iter().map(|s| s.covariates[0]).collect();
        let a = d_index(&d, &z).unwrap();
        let b = d_index(&d, &z.iter().map(|v| 2.0 * v + 7.0).collect::<Vec<_>>()).unwrap();
        assert_eq!(a, b);
        let flipped = d_index(&d, &z.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
        assert!((a - flipped).abs() < 1e-6);
        let noise: Vec<f64> = (0..d.n()).map(|i| ((i * 7919) % 997) as f64).collect();
        assert!(d_index(&d, &noise).unwrap() < 0.1);
        assert!(matches!(d_index(&d, &vec![1.0; d.n()]), Err(Error::DegeneratePI)));

        let mut prev = 0.0;
        for (k, beta) in [0.2, 0.5, 1.0].into_iter().enumerate() {
            let d = sim(1000, beta, 10 + k as u64);
            let z: Vec<f64> = d.subjects().iter().map(|s| s.covariates[0]).collect();
            let v = d_index(&d, &z).unwrap();
            assert!(v > prev, "{beta}: {v} <= {prev}");
            prev = v;
        }
    }

    #[test]
    fn brier_hand_values() {
        let d = ds(&[(5.0, 0), (6.0, 2), (7.0, 1)]);
        assert_eq!(prediction_error(&d, &|_, _| 0.0, 4.0).unwrap(), 0.0);
        let pe = prediction_error(&d, &|_, _| 0.5, 4.0).unwrap();
        assert!((pe - 1.0).abs() < 1e-12);
        let censored = ds(&[(1.0, 0), (2.0, 0)]);
        assert!(matches!(prediction_error(&censored, &|_, _| 0.0, 3.0), Err(Error::HorizonBeyondSupport { .. })));
    }
}
