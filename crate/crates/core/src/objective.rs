//! Weighted partial likelihoods of the stratified and marginal PSH models.
//!
//! A [`Problem`] fixes the dataset, the model kind and the censoring weights.
//! Subjects are regrouped into *summation units* (one per stratum for the
//! stratified models, a single unit otherwise) and sorted by time inside each
//! unit, so risk sums at every cause-1 event time come from one backward and
//! one forward sweep:
//!
//! S^p(t) = Σ_{X ≥ t} e^η Z^⊗p + Ĝ(t−) Σ_{cause 2, X < t} e^η Z^⊗p / Ĝ(X−)

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::data::{Dataset, ModelKind, Status};
use crate::error::{Error, Result};
use crate::ipcw::{CensoringFit, CensoringScope, CensoringSurvival};
use crate::linalg::{add_outer_lower, lower_to_matrix};

/// Log-likelihood with its score and observed information (−Hessian).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue {
    pub loglik: f64,
    pub score: DVector<f64>,
    pub info: DMatrix<f64>,
}

#[derive(Debug, Clone)]
struct Event {
    time: f64,
    count: f64,
    /// Ĝ(t−) of the unit's censoring curve.
    g_left: f64,
    /// Positions of the cause-1 subjects failing at `time`.
    members: Range<usize>,
}

#[derive(Debug, Clone)]
struct Unit {
    range: Range<usize>,
    events: Vec<Event>,
    curve: usize,
    center: Option<i64>,
}

/// Subjects sharing one censoring curve, with the curve's risk table.
#[derive(Debug, Clone)]
struct CensorGroup {
    units: Vec<usize>,
    members: Vec<usize>,
    /// (time, censorings, at risk) at every censoring time.
    table: Vec<(f64, usize, usize)>,
}

/// Per-subject derivatives of the log-likelihood with respect to the linear
/// predictor: `grad[i] = ∂l/∂η_i`, `curv[i] = −∂²l/∂η_i²`.
#[derive(Debug, Clone)]
pub struct EtaDerivatives {
    pub grad: Vec<f64>,
    pub curv: Vec<f64>,
}

/// Baseline cumulative subdistribution hazard increments of one unit.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineJumps {
    pub center: Option<i64>,
    pub times: Vec<f64>,
    pub increments: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    kind: ModelKind,
    d: usize,
    time: Vec<f64>,
    status: Vec<Status>,
    z: Vec<f64>,
    /// 1/Ĝ(X−) for cause-2 subjects, 0 otherwise.
    ginv: Vec<f64>,
    orig: Vec<usize>,
    cluster: Vec<usize>,
    units: Vec<Unit>,
    groups: Vec<CensorGroup>,
    curves: Vec<CensoringSurvival>,
    penalty_scale: f64,
    bic_multiplier: f64,
    n_total: usize,
    n_centers: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Value,
    Score,
    Info,
}

/// Per-event risk sums on the shifted scale e^{η − c}.
struct UnitSums {
    shift: f64,
    s0: Vec<f64>,
    zbar: Vec<f64>,
}

impl Problem {
    /// Builds the problem with the censoring scope implied by `kind`.
    pub fn new(kind: ModelKind, ds: &Dataset) -> Result<Self> {
        let kept: Vec<usize> = match kind {
            ModelKind::StratifiedRegular => {
                let mut kept = Vec::new();
                for (k, st) in ds.strata().iter().enumerate() {
                    let events = ds.subjects()[st.range.clone()].iter().filter(|s| s.status == Status::Cause1).count();
                    if events == 0 {
                        log::warn!("center {} has no cause-1 events and is dropped from the likelihood", st.center);
                        continue;
                    }
                    if st.len() < 2 {
                        return Err(Error::DegenerateStratum { center: st.center, size: st.len() });
                    }
                    kept.push(k);
                }
                kept
            }
            _ => (0..ds.n_centers()).collect(),
        };
        let censoring = match kind {
            ModelKind::StratifiedRegular => {
                let curves: Vec<CensoringSurvival> = kept
                    .iter()
                    .map(|&k| {
                        let st = &ds.strata()[k];
                        CensoringSurvival::fit(
                            ds.subjects()[st.range.clone()].iter().map(|s| (s.time, s.status)),
                            Some(st.center),
                        )
                    })
                    .collect();
                let mut stratum_curve = vec![usize::MAX; ds.n_centers()];
                for (c, &k) in kept.iter().enumerate() {
                    stratum_curve[k] = c;
                }
                CensoringFit { scope: CensoringScope::PerStratum, curves, stratum_curve }
            }
            _ => crate::ipcw::km_censoring(ds, CensoringScope::Pooled)?,
        };
        Self::assemble(kind, ds, &kept, censoring)
    }

    /// Builds the problem with caller-supplied censoring curves.
    pub fn with_censoring(kind: ModelKind, ds: &Dataset, censoring: &CensoringFit) -> Result<Self> {
        let kept: Vec<usize> = (0..ds.n_centers())
            .filter(|&k| {
                !(kind == ModelKind::StratifiedRegular
                    && ds.subjects()[ds.strata()[k].range.clone()].iter().all(|s| s.status != Status::Cause1))
            })
            .collect();
        Self::assemble(kind, ds, &kept, censoring.clone())
    }

    fn assemble(kind: ModelKind, ds: &Dataset, kept: &[usize], censoring: CensoringFit) -> Result<Self> {
        if ds.n_cause1() == 0 {
            return Err(Error::NoEvents);
        }
        let d = ds.dim();
        // Summation units as lists of dataset indices.
        let unit_members: Vec<(Vec<usize>, usize, Option<i64>)> = if kind.is_stratified() {
            kept.iter()
                .map(|&k| {
                    let st = &ds.strata()[k];
                    (st.range.clone().collect(), censoring.stratum_curve[k], Some(st.center))
                })
                .collect()
        } else {
            let mut all: Vec<usize> = kept.iter().flat_map(|&k| ds.strata()[k].range.clone()).collect();
            let subj = ds.subjects();
            all.sort_by(|&a, &b| subj[a].time.total_cmp(&subj[b].time).then(subj[a].status.cmp(&subj[b].status)));
            vec![(all, censoring.stratum_curve[kept[0]], None)]
        };

        let mut center_index = vec![0usize; ds.n()];
        for (k, st) in ds.strata().iter().enumerate() {
            for i in st.range.clone() {
                center_index[i] = k;
            }
        }

        let mut p = Problem {
            kind,
            d,
            time: Vec::new(),
            status: Vec::new(),
            z: Vec::new(),
            ginv: Vec::new(),
            orig: Vec::new(),
            cluster: Vec::new(),
            units: Vec::new(),
            groups: Vec::new(),
            curves: censoring.curves.clone(),
            penalty_scale: kind.penalty_scale(ds),
            bic_multiplier: kind.bic_multiplier(ds),
            n_total: ds.n(),
            n_centers: ds.n_centers(),
        };

        for (members, curve, center) in unit_members {
            let g = &censoring.curves[curve];
            let start = p.time.len();
            for &i in &members {
                let s = ds.subject(i);
                p.time.push(s.time);
                p.status.push(s.status);
                p.z.extend_from_slice(&s.covariates);
                p.orig.push(i);
                p.cluster.push(center_index[i]);
                let gi = if s.status == Status::Cause2 {
                    let gx = g.eval_left(s.time);
                    if gx <= 0.0 {
                        return Err(Error::ZeroDenominator { time: s.time });
                    }
                    1.0 / gx
                } else {
                    0.0
                };
                p.ginv.push(gi);
            }
            let end = p.time.len();
            let mut events = Vec::new();
            let mut i = start;
            while i < end {
                if p.status[i] != Status::Cause1 {
                    i += 1;
                    continue;
                }
                let t = p.time[i];
                let mut j = i;
                while j < end && p.time[j] == t && p.status[j] == Status::Cause1 {
                    j += 1;
                }
                events.push(Event { time: t, count: (j - i) as f64, g_left: g.eval_left(t), members: i..j });
                i = j;
            }
            if !events.is_empty() {
                p.units.push(Unit { range: start..end, events, curve, center });
            }
        }

        // Censoring groups: the subjects that defined each curve.
        for (c, curve) in censoring.curves.iter().enumerate() {
            let units: Vec<usize> = p.units.iter().enumerate().filter(|(_, u)| u.curve == c).map(|(k, _)| k).collect();
            if units.is_empty() {
                continue;
            }
            let members: Vec<usize> = match curve.center {
                Some(center) => (0..p.time.len()).filter(|&i| ds.subject(p.orig[i]).center == center).collect(),
                None => (0..p.time.len()).collect(),
            };
            let obs: Vec<(f64, Status)> = members.iter().map(|&i| (p.time[i], p.status[i])).collect();
            p.groups.push(CensorGroup { units, members, table: CensoringSurvival::risk_table(&obs) });
        }
        Ok(p)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of subjects entering the likelihood.
    pub fn n_used(&self) -> usize {
        self.time.len()
    }

    /// Sample size n of the dataset (including dropped strata).
    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_centers(&self) -> usize {
        self.n_centers
    }

    /// Multiplier of the penalty term: n, or K for the marginal model.
    pub fn penalty_scale(&self) -> f64 {
        self.penalty_scale
    }

    pub fn bic_multiplier(&self) -> f64 {
        self.bic_multiplier
    }

    pub fn curves(&self) -> &[CensoringSurvival] {
        &self.curves
    }

    /// Dataset index of every problem position.
    pub fn original_index(&self) -> &[usize] {
        &self.orig
    }

    /// Center (stratum index) of every problem position.
    pub fn clusters(&self) -> &[usize] {
        &self.cluster
    }

    pub fn z_row(&self, i: usize) -> &[f64] {
        &self.z[i * self.d..(i + 1) * self.d]
    }

    pub fn linear_predictor(&self, beta: &[f64]) -> Vec<f64> {
        assert_eq!(beta.len(), self.d, "coefficient length");
        (0..self.time.len()).map(|i| self.z_row(i).iter().zip(beta).map(|(z, b)| z * b).sum()).collect()
    }

    fn check_eta(eta: &[f64]) -> Result<()> {
        if eta.iter().all(|e| e.is_finite()) {
            Ok(())
        } else {
            Err(Error::NumericOverflow)
        }
    }

    pub fn loglik(&self, beta: &[f64]) -> Result<f64> {
        let eta = self.linear_predictor(beta);
        Self::check_eta(&eta)?;
        let mut total = 0.0;
        for u in &self.units {
            total += self.unit_pass(u, &eta, Level::Value)?.0;
        }
        Ok(total)
    }

    pub fn evaluate(&self, beta: &[f64]) -> Result<ObjectiveValue> {
        let eta = self.linear_predictor(beta);
        Self::check_eta(&eta)?;
        let d = self.d;
        let mut loglik = 0.0;
        let mut score = vec![0.0; d];
        let mut info = vec![0.0; d * d];
        for u in &self.units {
            let (l, s, i) = self.unit_pass(u, &eta, Level::Info)?;
            loglik += l;
            score.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
            info.iter_mut().zip(&i).for_each(|(a, b)| *a += b);
        }
        if !loglik.is_finite() {
            return Err(Error::NumericOverflow);
        }
        Ok(ObjectiveValue { loglik, score: DVector::from_vec(score), info: lower_to_matrix(&info, d) })
    }

    /// Returns (loglik, score, packed lower information) for one unit.
    fn unit_pass(&self, u: &Unit, eta: &[f64], level: Level) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let d = self.d;
        let r = u.range.clone();
        let shift = eta[r.clone()].iter().fold(f64::NEG_INFINITY, |m, &e| m.max(e));
        let ew: Vec<f64> = r.clone().map(|i| (eta[i] - shift).exp()).collect();
        let ne = u.events.len();
        let w1 = level >= Level::Score;
        let w2 = level >= Level::Info;

        // Backward sweep: sums over X ≥ t_e.
        let mut b0 = vec![0.0; ne];
        let mut b1 = if w1 { vec![0.0; ne * d] } else { Vec::new() };
        let mut b2 = if w2 { vec![0.0; ne * d * d] } else { Vec::new() };
        let (mut a0, mut a1, mut a2) = (0.0, vec![0.0; d], vec![0.0; d * d]);
        let mut p = r.end;
        for (e, ev) in u.events.iter().enumerate().rev() {
            while p > r.start && self.time[p - 1] >= ev.time {
                p -= 1;
                let w = ew[p - r.start];
                a0 += w;
                if w1 {
                    let z = self.z_row(p);
                    a1.iter_mut().zip(z).for_each(|(a, zj)| *a += w * zj);
                    if w2 {
                        add_outer_lower(&mut a2, z, w);
                    }
                }
            }
            b0[e] = a0;
            if w1 {
                b1[e * d..(e + 1) * d].copy_from_slice(&a1);
            }
            if w2 {
                b2[e * d * d..(e + 1) * d * d].copy_from_slice(&a2);
            }
        }

        // Forward sweep over cause-2 subjects with X < t_e.
        let (mut f0, mut f1, mut f2) = (0.0, vec![0.0; d], vec![0.0; d * d]);
        let mut loglik = 0.0;
        let mut score = vec![0.0; if w1 { d } else { 0 }];
        let mut info = vec![0.0; if w2 { d * d } else { 0 }];
        let mut s1 = vec![0.0; d];
        let mut zbar = vec![0.0; d];
        let mut p = r.start;
        for (e, ev) in u.events.iter().enumerate() {
            while p < r.end && self.time[p] < ev.time {
                if self.status[p] == Status::Cause2 {
                    let w = ew[p - r.start] * self.ginv[p];
                    f0 += w;
                    if w1 {
                        let z = self.z_row(p);
                        f1.iter_mut().zip(z).for_each(|(a, zj)| *a += w * zj);
                        if w2 {
                            add_outer_lower(&mut f2, z, w);
                        }
                    }
                }
                p += 1;
            }
            let g = ev.g_left;
            let s0 = b0[e] + g * f0;
            if !(s0 > 0.0 && s0.is_finite()) {
                return Err(Error::NumericOverflow);
            }
            let eta_sum: f64 = ev.members.clone().map(|i| eta[i]).sum();
            loglik += eta_sum - ev.count * (s0.ln() + shift);
            if w1 {
                for j in 0..d {
                    s1[j] = b1[e * d + j] + g * f1[j];
                    zbar[j] = s1[j] / s0;
                }
                for i in ev.members.clone() {
                    score.iter_mut().zip(self.z_row(i)).for_each(|(a, z)| *a += z);
                }
                score.iter_mut().zip(&zbar).for_each(|(a, zb)| *a -= ev.count * zb);
            }
            if w2 {
                let base = e * d * d;
                for rr in 0..d {
                    for c in 0..=rr {
                        let s2 = b2[base + rr * d + c] + g * f2[rr * d + c];
                        info[rr * d + c] += ev.count * (s2 / s0 - zbar[rr] * zbar[c]);
                    }
                }
            }
        }
        Ok((loglik, score, info))
    }

    /// Per-event S⁰ (shifted) and Z̄ for one unit.
    fn unit_sums(&self, u: &Unit, eta: &[f64]) -> Result<UnitSums> {
        let d = self.d;
        let r = u.range.clone();
        let shift = eta[r.clone()].iter().fold(f64::NEG_INFINITY, |m, &e| m.max(e));
        let ne = u.events.len();
        let mut s0 = vec![0.0; ne];
        let mut s1 = vec![0.0; ne * d];
        let (mut a0, mut a1) = (0.0, vec![0.0; d]);
        let mut p = r.end;
        for (e, ev) in u.events.iter().enumerate().rev() {
            while p > r.start && self.time[p - 1] >= ev.time {
                p -= 1;
                let w = (eta[p] - shift).exp();
                a0 += w;
                a1.iter_mut().zip(self.z_row(p)).for_each(|(a, z)| *a += w * z);
            }
            s0[e] = a0;
            s1[e * d..(e + 1) * d].copy_from_slice(&a1);
        }
        let (mut f0, mut f1) = (0.0, vec![0.0; d]);
        let mut p = r.start;
        for (e, ev) in u.events.iter().enumerate() {
            while p < r.end && self.time[p] < ev.time {
                if self.status[p] == Status::Cause2 {
                    let w = (eta[p] - shift).exp() * self.ginv[p];
                    f0 += w;
                    f1.iter_mut().zip(self.z_row(p)).for_each(|(a, z)| *a += w * z);
                }
                p += 1;
            }
            s0[e] += ev.g_left * f0;
            if !(s0[e] > 0.0 && s0[e].is_finite()) {
                return Err(Error::NumericOverflow);
            }
            for j in 0..d {
                s1[e * d + j] = (s1[e * d + j] + ev.g_left * f1[j]) / s0[e];
            }
        }
        Ok(UnitSums { shift, s0, zbar: s1 })
    }

    /// Prefix sums over the events of a unit used by the per-subject terms.
    fn unit_prefix(&self, u: &Unit, sums: &UnitSums) -> Prefix {
        let d = self.d;
        let ne = u.events.len();
        let mut pf = Prefix::new(ne, d);
        for (e, ev) in u.events.iter().enumerate() {
            let s0 = sums.s0[e];
            let g = ev.g_left;
            let a = ev.count / s0;
            let b = ev.count / (s0 * s0);
            pf.p1[e + 1] = pf.p1[e] + a;
            pf.p2[e + 1] = pf.p2[e] + b;
            pf.q1[e + 1] = pf.q1[e] + g * a;
            pf.q2[e + 1] = pf.q2[e] + g * g * b;
            for j in 0..d {
                let zb = sums.zbar[e * d + j];
                pf.pv[(e + 1) * d + j] = pf.pv[e * d + j] + zb * a;
                pf.qv[(e + 1) * d + j] = pf.qv[e * d + j] + g * zb * a;
            }
        }
        pf
    }

    /// Gradient and curvature of the log-likelihood in each linear predictor.
    pub fn eta_derivatives(&self, beta: &[f64]) -> Result<EtaDerivatives> {
        let eta = self.linear_predictor(beta);
        Self::check_eta(&eta)?;
        let n = self.time.len();
        let mut grad = vec![0.0; n];
        let mut curv = vec![0.0; n];
        for u in &self.units {
            let sums = self.unit_sums(u, &eta)?;
            let pf = self.unit_prefix(u, &sums);
            let ne = u.events.len();
            let mut k = 0;
            for i in u.range.clone() {
                while k < ne && u.events[k].time <= self.time[i] {
                    k += 1;
                }
                let w = (eta[i] - sums.shift).exp();
                let gi = self.ginv[i];
                let sum1 = pf.p1[k] + gi * (pf.q1[ne] - pf.q1[k]);
                let sum2 = pf.p2[k] + gi * gi * (pf.q2[ne] - pf.q2[k]);
                let d1 = if self.status[i] == Status::Cause1 { 1.0 } else { 0.0 };
                grad[i] = d1 - w * sum1;
                curv[i] = w * sum1 - w * w * sum2;
            }
        }
        Ok(EtaDerivatives { grad, curv })
    }

    /// Per-subject score influence terms (rows in problem order).
    ///
    /// Each row is the subject's martingale residual of the weighted score;
    /// with `corrected` the Kaplan-Meier estimation of the censoring weights
    /// adds a further term per subject. Rows sum to the score when
    /// `corrected` is false.
    pub fn score_influence(&self, beta: &[f64], corrected: bool) -> Result<DMatrix<f64>> {
        let eta = self.linear_predictor(beta);
        Self::check_eta(&eta)?;
        let d = self.d;
        let n = self.time.len();
        let mut out = DMatrix::zeros(n, d);
        let mut all_sums = Vec::with_capacity(self.units.len());
        let mut all_prefix = Vec::with_capacity(self.units.len());
        for u in &self.units {
            let sums = self.unit_sums(u, &eta)?;
            let pf = self.unit_prefix(u, &sums);
            let ne = u.events.len();
            let mut k = 0;
            let mut ev_of = 0;
            for i in u.range.clone() {
                while k < ne && u.events[k].time <= self.time[i] {
                    k += 1;
                }
                let w = (eta[i] - sums.shift).exp();
                let gi = self.ginv[i];
                let sum1 = pf.p1[k] + gi * (pf.q1[ne] - pf.q1[k]);
                let z = self.z_row(i);
                if self.status[i] == Status::Cause1 {
                    while u.events[ev_of].time < self.time[i] {
                        ev_of += 1;
                    }
                    for j in 0..d {
                        out[(i, j)] += z[j] - sums.zbar[ev_of * d + j];
                    }
                }
                for j in 0..d {
                    let v = pf.pv[k * d + j] + gi * (pf.qv[ne * d + j] - pf.qv[k * d + j]);
                    out[(i, j)] -= w * (z[j] * sum1 - v);
                }
            }
            all_sums.push(sums);
            all_prefix.push(pf);
        }
        if corrected {
            for grp in &self.groups {
                self.add_censoring_correction(grp, &eta, &all_sums, &all_prefix, &mut out);
            }
        }
        Ok(out)
    }

    fn add_censoring_correction(
        &self,
        grp: &CensorGroup,
        eta: &[f64],
        sums: &[UnitSums],
        prefix: &[Prefix],
        out: &mut DMatrix<f64>,
    ) {
        let d = self.d;
        let nc = grp.table.len();
        if nc == 0 {
            return;
        }
        // q(u) at every censoring time, summed over the group's units.
        let mut q = vec![0.0; nc * d];
        for &ui in &grp.units {
            let u = &self.units[ui];
            let (s, pf) = (&sums[ui], &prefix[ui]);
            let ne = u.events.len();
            let mut a0 = 0.0;
            let mut a1 = vec![0.0; d];
            let mut p = u.range.start;
            let mut k = 0;
            for (c, &(tc, _, _)) in grp.table.iter().enumerate() {
                while p < u.range.end && self.time[p] <= tc {
                    if self.status[p] == Status::Cause2 {
                        let w = (eta[p] - s.shift).exp() * self.ginv[p];
                        a0 += w;
                        a1.iter_mut().zip(self.z_row(p)).for_each(|(a, z)| *a += w * z);
                    }
                    p += 1;
                }
                while k < ne && u.events[k].time <= tc {
                    k += 1;
                }
                let b = pf.q1[ne] - pf.q1[k];
                for j in 0..d {
                    let cj = pf.qv[ne * d + j] - pf.qv[k * d + j];
                    q[c * d + j] += b * a1[j] - a0 * cj;
                }
            }
        }
        // Compensator prefix Σ_{u ≤ X} q(u) dc(u) / R(u)².
        let mut comp = vec![0.0; (nc + 1) * d];
        for (c, &(_, dc, r)) in grp.table.iter().enumerate() {
            let f = dc as f64 / (r as f64 * r as f64);
            for j in 0..d {
                comp[(c + 1) * d + j] = comp[c * d + j] + q[c * d + j] * f;
            }
        }
        let times: Vec<f64> = grp.table.iter().map(|t| t.0).collect();
        for &i in &grp.members {
            let x = self.time[i];
            let k = times.partition_point(|&t| t <= x);
            for j in 0..d {
                out[(i, j)] -= comp[k * d + j];
            }
            if self.status[i] == Status::Censored {
                let c = k - 1;
                let r = grp.table[c].2 as f64;
                for j in 0..d {
                    out[(i, j)] += q[c * d + j] / r;
                }
            }
        }
    }

    /// Breslow increments dΛ̂ = d_e / S⁰(β, t_e) for every unit.
    pub fn baseline_jumps(&self, beta: &[f64]) -> Result<Vec<BaselineJumps>> {
        let eta = self.linear_predictor(beta);
        Self::check_eta(&eta)?;
        self.units
            .iter()
            .map(|u| {
                let sums = self.unit_sums(u, &eta)?;
                let scale = (-sums.shift).exp();
                Ok(BaselineJumps {
                    center: u.center,
                    times: u.events.iter().map(|e| e.time).collect(),
                    increments: u.events.iter().zip(&sums.s0).map(|(e, s0)| e.count / s0 * scale).collect(),
                })
            })
            .collect()
    }
}

struct Prefix {
    p1: Vec<f64>,
    p2: Vec<f64>,
    q1: Vec<f64>,
    q2: Vec<f64>,
    pv: Vec<f64>,
    qv: Vec<f64>,
}

impl Prefix {
    fn new(ne: usize, d: usize) -> Self {
        Prefix {
            p1: vec![0.0; ne + 1],
            p2: vec![0.0; ne + 1],
            q1: vec![0.0; ne + 1],
            q2: vec![0.0; ne + 1],
            pv: vec![0.0; (ne + 1) * d],
            qv: vec![0.0; (ne + 1) * d],
        }
    }
}

/// Stratified log-partial likelihood with the given censoring curves
/// (per-stratum curves give regular stratification, a pooled curve high
/// stratification).
pub fn loglik_stratified(beta: &[f64], ds: &Dataset, censoring: &CensoringFit) -> Result<ObjectiveValue> {
    let kind = match censoring.scope {
        CensoringScope::PerStratum => ModelKind::StratifiedRegular,
        CensoringScope::Pooled => ModelKind::StratifiedHigh,
    };
    Problem::with_censoring(kind, ds, censoring)?.evaluate(beta)
}

/// Marginal log-pseudo-partial likelihood with pooled risk sets.
pub fn loglik_marginal(beta: &[f64], ds: &Dataset, censoring: &CensoringFit) -> Result<ObjectiveValue> {
    Problem::with_censoring(ModelKind::Marginal, ds, censoring)?.evaluate(beta)
}
