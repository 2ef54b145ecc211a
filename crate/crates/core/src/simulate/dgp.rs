//! Data-generating processes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{sample_positive_stable, CensoringModel, CenterSizes, ScenarioKind, SimScenario};
use crate::data::{build_dataset, Dataset, Record};
use crate::error::{Error, Result};

/// Cause-2 hazard multipliers of the three centers.
const THREE_CENTER_CAUSE2_RATES: [f64; 3] = [5.0, 10.0, 2.0];
const PILOT_SEED: u64 = 0x0005_EED0_F00D;
const PILOT_SUBJECTS: usize = 20_000;
const INVERSION_BRACKET: (f64, f64) = (0.0, 50.0);

/// A subject before censoring.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSubject {
    pub center: i64,
    pub covariates: Vec<f64>,
    pub time: f64,
    pub cause: u8,
}

/// Rows of a mean-zero Gaussian vector with corr(Z_i, Z_j) = ρ^{|i−j|}, built
/// by the AR(1) recursion Z_j = ρZ_{j−1} + √(1−ρ²)ε_j.
pub fn gen_covariates<R: Rng + ?Sized>(n: usize, d: usize, rho: f64, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n).map(|_| covariate_row(d, rho, rng)).collect()
}

fn covariate_row<R: Rng + ?Sized>(d: usize, rho: f64, rng: &mut R) -> Vec<f64> {
    let s = (1.0 - rho * rho).sqrt();
    let mut z = Vec::with_capacity(d);
    let mut prev = 0.0;
    for j in 0..d {
        let e: f64 = rng.sample(StandardNormal);
        prev = if j == 0 { e } else { rho * prev + s * e };
        z.push(prev);
    }
    z
}

/// Baseline distribution of cause-1 times in center 1 (log-normal),
/// 2 (Gompertz) and 3 (Weibull).
pub fn three_center_base_cdf(center: i64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    match center {
        1 => Normal::standard().cdf((t.ln() - 1.0) / 0.25),
        2 => 1.0 - (-0.018 * t.exp() + 0.018).exp(),
        3 => 1.0 - (-t.powi(5)).exp(),
        _ => panic!("three-center design has centers 1..=3"),
    }
}

/// Solves F(t) = target for nondecreasing F by bisection on `[lo, hi]`.
pub fn invert_cdf(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    if !(f(a) <= target && target <= f(b)) {
        return Err(Error::InversionFailure { target });
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) < target {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-13 * (1.0 + b) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn three_center_subject<R: Rng + ?Sized>(p: f64, beta: &[f64], rho: f64, rng: &mut R) -> Result<LatentSubject> {
    let center = rng.random_range(1..=3_i64);
    let z = covariate_row(beta.len(), rho, rng);
    let eta = dot(beta, &z);
    let r = eta.exp();
    let f_inf = 1.0 - (1.0 - p).powf(r);
    let u: f64 = rng.sample(Open01);
    if u < f_inf {
        let target: f64 = rng.sample(Open01);
        let cif = |t: f64| (1.0 - (1.0 - p * three_center_base_cdf(center, t)).powf(r)) / f_inf;
        let time = invert_cdf(cif, target, INVERSION_BRACKET.0, INVERSION_BRACKET.1)?;
        Ok(LatentSubject { center, covariates: z, time: time.max(f64::MIN_POSITIVE), cause: 1 })
    } else {
        // β₂ = −β₁.
        let rate = THREE_CENTER_CAUSE2_RATES[(center - 1) as usize] * (-eta).exp();
        let e: f64 = rng.sample(Exp1);
        Ok(LatentSubject { center, covariates: z, time: (e / rate).max(f64::MIN_POSITIVE), cause: 2 })
    }
}

fn frailty_subject<R: Rng + ?Sized>(center: i64, v1: f64, v2: f64, beta: &[f64], rho: f64, rng: &mut R) -> LatentSubject {
    let z = covariate_row(beta.len(), rho, rng);
    let eta = dot(beta, &z);
    let scale = v1 * eta.exp();
    // F₁(t) = 1 − exp{−M₀(t)·v·e^η}, M₀(t) = 1 − e^{−t}.
    let f_inf = -(-scale).exp_m1();
    let u: f64 = rng.sample(Open01);
    if u < f_inf {
        let w: f64 = rng.sample(Open01);
        let m0 = -(-w * f_inf).ln_1p() / scale;
        let time = -(-m0).ln_1p();
        LatentSubject { center, covariates: z, time: time.max(f64::MIN_POSITIVE), cause: 1 }
    } else {
        let rate = v2 * (-eta).exp();
        let e: f64 = rng.sample(Exp1);
        LatentSubject { center, covariates: z, time: (e / rate).max(f64::MIN_POSITIVE), cause: 2 }
    }
}

fn center_size<R: Rng + ?Sized>(sizes: &CenterSizes, rng: &mut R) -> usize {
    match sizes {
        CenterSizes::Fixed(m) => *m,
        CenterSizes::Uniform { lo, hi } => rng.random_range(*lo..=*hi),
    }
}

fn censoring_time<R: Rng + ?Sized>(model: &CensoringModel, z: &[f64], rng: &mut R) -> f64 {
    match model {
        CensoringModel::Uniform { upper } => {
            let u: f64 = rng.sample(Open01);
            upper * u
        }
        CensoringModel::Exponential { coordinates, base_rate } => {
            let s: f64 = coordinates.iter().map(|&j| z[j]).sum();
            let e: f64 = rng.sample(Exp1);
            e / (base_rate * (0.5 * s).exp())
        }
        _ => unreachable!("censoring model must be calibrated first"),
    }
}

/// Generates subjects in order, drawing each subject's censoring time right
/// after its event time when `censoring` is given.
fn simulate<R: Rng + ?Sized>(
    scenario: &SimScenario,
    censoring: Option<&CensoringModel>,
    rng: &mut R,
    mut sink: impl FnMut(LatentSubject, Option<f64>),
) -> Result<()> {
    let beta = scenario.generating_beta();
    let mut emit = |s: LatentSubject, rng: &mut R| {
        let c = censoring.map(|m| censoring_time(m, &s.covariates, rng));
        sink(s, c);
    };
    match &scenario.kind {
        ScenarioKind::ThreeCenter { n, p } => {
            for _ in 0..*n {
                let s = three_center_subject(*p, &beta, scenario.rho, rng)?;
                emit(s, rng);
            }
        }
        ScenarioKind::FrailtyClustered { n_centers, sizes, alpha1, alpha2, .. } => {
            for k in 1..=*n_centers {
                let m = center_size(sizes, rng);
                let v1 = sample_positive_stable(*alpha1, rng);
                let v2 = sample_positive_stable(*alpha2, rng);
                for _ in 0..m {
                    let s = frailty_subject(k as i64, v1, v2, &beta, scenario.rho, rng);
                    emit(s, rng);
                }
            }
        }
    }
    Ok(())
}

/// Uncensored subjects of a scenario.
pub fn generate_latent<R: Rng + ?Sized>(scenario: &SimScenario, rng: &mut R) -> Result<Vec<LatentSubject>> {
    scenario.validate()?;
    let mut out = Vec::new();
    simulate(scenario, None, rng, |s, _| out.push(s))?;
    Ok(out)
}

/// Pilot sample with a fixed seed and about 20 000 subjects.
fn pilot(scenario: &SimScenario) -> Result<Vec<LatentSubject>> {
    let mut s = scenario.clone();
    match &mut s.kind {
        ScenarioKind::ThreeCenter { n, .. } => *n = PILOT_SUBJECTS,
        ScenarioKind::FrailtyClustered { n_centers, sizes, .. } => {
            let mean = match sizes {
                CenterSizes::Fixed(m) => *m as f64,
                CenterSizes::Uniform { lo, hi } => (*lo + *hi) as f64 / 2.0,
            };
            *n_centers = (PILOT_SUBJECTS as f64 / mean).ceil() as usize;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PILOT_SEED);
    generate_latent(&s, &mut rng)
}

/// Bisection on a monotone function of log x.
fn solve_monotone(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64, increasing: bool) -> f64 {
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let v = f(m.exp());
        if (v < target) == increasing {
            a = m;
        } else {
            b = m;
        }
    }
    (0.5 * (a + b)).exp()
}

fn exponential_base_rate(subjects: &[LatentSubject], coordinates: &[usize], target: f64) -> f64 {
    let lin: Vec<(f64, f64)> =
        subjects.iter().map(|s| ((0.5 * coordinates.iter().map(|&j| s.covariates[j]).sum::<f64>()).exp(), s.time)).collect();
    let n = lin.len() as f64;
    let rate = |r0: f64| lin.iter().map(|(m, t)| -(-r0 * m * t).exp_m1()).sum::<f64>() / n;
    solve_monotone(rate, target, 1e-10, 1e10, true)
}

/// Replaces calibrated censoring models by their resolved constants.
pub fn calibrate_scenario(scenario: &SimScenario) -> Result<SimScenario> {
    scenario.validate()?;
    let mut out = scenario.clone();
    match &scenario.censoring {
        CensoringModel::UniformCalibrated { target } => {
            let latent = pilot(scenario)?;
            let n = latent.len() as f64;
            // P(C < T) for C ~ U(0, c) is E[min(T, c)] / c.
            let rate = |c: f64| latent.iter().map(|s| s.time.min(c) / c).sum::<f64>() / n;
            let upper = solve_monotone(rate, *target, 1e-6, 1e6, false);
            out.censoring = CensoringModel::Uniform { upper };
        }
        CensoringModel::CovariateDependent { coordinates, target } => {
            let latent = pilot(scenario)?;
            let base_rate = exponential_base_rate(&latent, coordinates, *target);
            out.censoring = CensoringModel::Exponential { coordinates: coordinates.clone(), base_rate };
        }
        _ => {}
    }
    Ok(out)
}

/// Censoring times exponential with rate r₀·exp(0.5 Σ_{j∈set} Z_j), with r₀
/// calibrated on the given subjects to the target censoring rate.
pub fn censor_covariate_dependent<R: Rng + ?Sized>(
    subjects: &[LatentSubject],
    coordinates: &[usize],
    target: f64,
    rng: &mut R,
) -> Vec<f64> {
    let base_rate = exponential_base_rate(subjects, coordinates, target);
    let model = CensoringModel::Exponential { coordinates: coordinates.to_vec(), base_rate };
    subjects.iter().map(|s| censoring_time(&model, &s.covariates, rng)).collect()
}

/// Observed dataset of a scenario (calibrating censoring if needed).
pub fn generate<R: Rng + ?Sized>(scenario: &SimScenario, rng: &mut R) -> Result<Dataset> {
    let resolved;
    let sc = match scenario.censoring {
        CensoringModel::UniformCalibrated { .. } | CensoringModel::CovariateDependent { .. } => {
            resolved = calibrate_scenario(scenario)?;
            &resolved
        }
        _ => {
            scenario.validate()?;
            scenario
        }
    };
    let mut records = Vec::new();
    simulate(sc, Some(&sc.censoring), rng, |s, c| {
        let c = c.expect("censoring drawn");
        let (time, status) = if c < s.time { (c, 0) } else { (s.time, s.cause as i64) };
        records.push(Record::new(time.max(f64::MIN_POSITIVE), status, s.center, s.covariates));
    })?;
    build_dataset(records)
}

pub fn gen_three_center<R: Rng + ?Sized>(scenario: &SimScenario, rng: &mut R) -> Result<Dataset> {
    if !matches!(scenario.kind, ScenarioKind::ThreeCenter { .. }) {
        return Err(Error::InvalidScenario("expected a three-center design".into()));
    }
    generate(scenario, rng)
}

pub fn gen_frailty_clustered<R: Rng + ?Sized>(scenario: &SimScenario, rng: &mut R) -> Result<Dataset> {
    if !matches!(scenario.kind, ScenarioKind::FrailtyClustered { .. }) {
        return Err(Error::InvalidScenario("expected a frailty-clustered design".into()));
    }
    generate(scenario, rng)
}
