//! Clustered competing-risks data: subjects, centers and validated datasets.

use std::collections::BTreeMap;
use std::io::Read;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed outcome of a subject. Codes are fixed: 0 censored, 1 cause of
/// interest, 2 competing cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Censored = 0,
    Cause1 = 1,
    Cause2 = 2,
}

impl Status {
    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            0 => Some(Status::Censored),
            1 => Some(Status::Cause1),
            2 => Some(Status::Cause2),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    /// Event indicator: false only for censored subjects.
    pub fn is_event(self) -> bool {
        self != Status::Censored
    }
}

/// A raw input row before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub time: f64,
    pub status: i64,
    pub center: i64,
    pub covariates: Vec<f64>,
}

impl Record {
    pub fn new(time: f64, status: i64, center: i64, covariates: Vec<f64>) -> Self {
        Record { time, status, center, covariates }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    pub time: f64,
    pub status: Status,
    pub center: i64,
    pub covariates: Vec<f64>,
}

/// Contiguous block of subjects belonging to one center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum {
    pub center: i64,
    pub range: Range<usize>,
}

impl Stratum {
    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }
}

/// Validated, immutable collection of subjects.
///
/// Subjects are ordered by center id and, within a center, stably by
/// `(time, status)`, so every stratum occupies a contiguous index range.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    subjects: Vec<Subject>,
    dim: usize,
    strata: Vec<Stratum>,
    names: Vec<String>,
}

impl Dataset {
    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn subject(&self, i: usize) -> &Subject {
        &self.subjects[i]
    }

    pub fn n(&self) -> usize {
        self.subjects.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    /// Number of distinct centers (K).
    pub fn n_centers(&self) -> usize {
        self.strata.len()
    }

    pub fn center_sizes(&self) -> Vec<usize> {
        self.strata.iter().map(Stratum::len).collect()
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.names
    }

    pub fn n_cause1(&self) -> usize {
        self.subjects.iter().filter(|s| s.status == Status::Cause1).count()
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim {
            return Err(Error::InvalidInput(format!("{} covariate names for {} columns", names.len(), self.dim)));
        }
        self.names = names;
        Ok(self)
    }

    /// Records in dataset order, e.g. to rebuild a modified copy.
    pub fn to_records(&self) -> Vec<Record> {
        self.subjects.iter().map(|s| Record::new(s.time, s.status.code() as i64, s.center, s.covariates.clone())).collect()
    }

    /// New dataset made of the given subjects (duplicates allowed).
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let records = indices
            .iter()
            .map(|&i| {
                let s = &self.subjects[i];
                Record::new(s.time, s.status.code() as i64, s.center, s.covariates.clone())
            })
            .collect();
        build_dataset(records).and_then(|ds| ds.with_names(self.names.clone()))
    }

    /// New dataset keeping only the listed covariate columns, in that order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.dim) {
            return Err(Error::InvalidInput(format!("column {bad} out of range")));
        }
        let records = self
            .subjects
            .iter()
            .map(|s| {
                let z = columns.iter().map(|&c| s.covariates[c]).collect();
                Record::new(s.time, s.status.code() as i64, s.center, z)
            })
            .collect();
        let names = columns.iter().map(|&c| self.names[c].clone()).collect();
        build_dataset(records).and_then(|ds| ds.with_names(names))
    }

    /// Copy with every subject's center replaced by `f(center, index)`.
    pub fn relabel_centers(&self, mut f: impl FnMut(i64, usize) -> i64) -> Result<Dataset> {
        let records = self
            .subjects
            .iter()
            .enumerate()
            .map(|(i, s)| Record::new(s.time, s.status.code() as i64, f(s.center, i), s.covariates.clone()))
            .collect();
        build_dataset(records).and_then(|ds| ds.with_names(self.names.clone()))
    }

    pub fn censoring_rate(&self) -> f64 {
        let c = self.subjects.iter().filter(|s| s.status == Status::Censored).count();
        c as f64 / self.n() as f64
    }
}

/// Validates raw records and builds the stratum index.
pub fn build_dataset(records: Vec<Record>) -> Result<Dataset> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = records[0].covariates.len();
    let mut subjects = Vec::with_capacity(records.len());
    for (row, r) in records.into_iter().enumerate() {
        if !(r.time.is_finite() && r.time > 0.0) {
            return Err(Error::NonPositiveTime { row, time: r.time });
        }
        if r.covariates.len() != dim {
            return Err(Error::DimensionMismatch { row, expected: dim, found: r.covariates.len() });
        }
        if let Some(column) = r.covariates.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFiniteCovariate { row, column });
        }
        let status = Status::from_code(r.status).ok_or(Error::UnknownStatusCode { row, code: r.status })?;
        subjects.push(Subject { time: r.time, status, center: r.center, covariates: r.covariates });
    }

    // Stable: equal keys keep input order.
    subjects.sort_by(|a, b| a.center.cmp(&b.center).then(a.time.total_cmp(&b.time)).then(a.status.cmp(&b.status)));

    let mut strata = Vec::new();
    let mut start = 0;
    for i in 1..=subjects.len() {
        if i == subjects.len() || subjects[i].center != subjects[start].center {
            strata.push(Stratum { center: subjects[start].center, range: start..i });
            start = i;
        }
    }
    let names = (1..=dim).map(|j| format!("z{j}")).collect();
    Ok(Dataset { subjects, dim, strata, names })
}

/// Per-column centering and scaling applied by [`standardize_covariates`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Columns with zero sample standard deviation, left unscaled.
    pub constant: Vec<bool>,
}

impl Standardization {
    /// Maps coefficients estimated on the standardized scale back to the
    /// original covariate scale. Centering does not affect the coefficients.
    pub fn back_map(&self, beta: &[f64]) -> Vec<f64> {
        beta.iter().zip(&self.scales).map(|(b, s)| b / s).collect()
    }

    pub fn forward_map(&self, beta: &[f64]) -> Vec<f64> {
        beta.iter().zip(&self.scales).map(|(b, s)| b * s).collect()
    }
}

pub fn standardize_covariates(ds: &Dataset) -> (Dataset, Standardization) {
    let n = ds.n() as f64;
    let d = ds.dim();
    let mut means = vec![0.0; d];
    for s in ds.subjects() {
        for (m, z) in means.iter_mut().zip(&s.covariates) {
            *m += z;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut ss = vec![0.0; d];
    for s in ds.subjects() {
        for j in 0..d {
            let dz = s.covariates[j] - means[j];
            ss[j] += dz * dz;
        }
    }
    let mut scales = vec![1.0; d];
    let mut constant = vec![false; d];
    for j in 0..d {
        let sd = if ds.n() > 1 { (ss[j] / (n - 1.0)).sqrt() } else { 0.0 };
        if sd > 1e-12 * (1.0 + means[j].abs()) {
            scales[j] = sd;
        } else {
            constant[j] = true;
            log::warn!("covariate {} is constant and was left unscaled", ds.names[j]);
        }
    }

    let mut out = ds.clone();
    for s in out.subjects.iter_mut() {
        for j in 0..d {
            if !constant[j] {
                s.covariates[j] = (s.covariates[j] - means[j]) / scales[j];
            }
        }
    }
    for j in 0..d {
        if constant[j] {
            means[j] = 0.0;
        }
    }
    (out, Standardization { means, scales, constant })
}

/// Which likelihood and censoring-weight regime a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Ordinary Fine-Gray model ignoring centers.
    PooledPsh,
    /// Per-center risk sets and per-center censoring curves.
    StratifiedRegular,
    /// Per-center risk sets with one pooled censoring curve.
    StratifiedHigh,
    /// Pooled risk sets, pooled censoring curve, center-level penalty scale.
    Marginal,
}

impl ModelKind {
    pub fn is_stratified(self) -> bool {
        matches!(self, ModelKind::StratifiedRegular | ModelKind::StratifiedHigh)
    }

    /// Multiplier of the penalty term: n, or K for the marginal model.
    pub fn penalty_scale(self, ds: &Dataset) -> f64 {
        match self {
            ModelKind::Marginal => ds.n_centers() as f64,
            _ => ds.n() as f64,
        }
    }

    /// log(n), or log(K) for the marginal model.
    pub fn bic_multiplier(self, ds: &Dataset) -> f64 {
        match self {
            ModelKind::Marginal => (ds.n_centers() as f64).ln(),
            _ => (ds.n() as f64).ln(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::PooledPsh => "pooled",
            ModelKind::StratifiedRegular => "stratified-regular",
            ModelKind::StratifiedHigh => "stratified-high",
            ModelKind::Marginal => "marginal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pooled" | "pooled-psh" => Some(ModelKind::PooledPsh),
            "stratified" | "stratified-regular" | "regular" => Some(ModelKind::StratifiedRegular),
            "stratified-high" | "high" => Some(ModelKind::StratifiedHigh),
            "marginal" => Some(ModelKind::Marginal),
            _ => None,
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Reads the `id,center,time,status,z1,...,zd` CSV layout.
///
/// Columns other than the four leading ones and `z1..zd` are rejected unless
/// `allow_extra` is set, in which case they are ignored.
pub fn read_csv<R: Read>(reader: R, allow_extra: bool) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let required = ["id", "center", "time", "status"];
    let pos = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 4];
    for (k, name) in required.iter().enumerate() {
        idx[k] = pos(name).ok_or_else(|| Error::InvalidInput(format!("missing column `{name}`")))?;
    }
    if idx != [0, 1, 2, 3] {
        return Err(Error::InvalidInput("header must start with id,center,time,status".into()));
    }
    let mut cov_cols = Vec::new();
    for j in 1.. {
        match pos(&format!("z{j}")) {
            Some(p) => cov_cols.push(p),
            None => break,
        }
    }
    let known = 4 + cov_cols.len();
    if headers.len() > known && !allow_extra {
        let extra: Vec<_> =
            headers.iter().enumerate().filter(|(i, _)| *i >= 4 && !cov_cols.contains(i)).map(|(_, h)| h.to_string()).collect();
        return Err(Error::InvalidInput(format!("unexpected columns {extra:?} (use --allow-extra)")));
    }

    let mut records = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let parse_f = |i: usize| -> Result<f64> {
            field(i)
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("line {line}: cannot parse `{}` as a number", field(i))))
        };
        let parse_i = |i: usize| -> Result<i64> {
            field(i)
                .parse::<i64>()
                .map_err(|_| Error::InvalidInput(format!("line {line}: cannot parse `{}` as an integer", field(i))))
        };
        let covariates = cov_cols.iter().map(|&c| parse_f(c)).collect::<Result<Vec<_>>>()?;
        records.push(Record::new(parse_f(2)?, parse_i(3)?, parse_i(1)?, covariates));
    }
    let names = (1..=cov_cols.len()).map(|j| format!("z{j}")).collect();
    build_dataset(records)?.with_names(names)
}

/// Writes a dataset in the layout read by [`read_csv`]; ids are 1-based row numbers.
pub fn write_csv<W: std::io::Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "center".into(), "time".into(), "status".into()];
    header.extend((1..=ds.dim()).map(|j| format!("z{j}")));
    w.write_record(&header)?;
    for (i, s) in ds.subjects().iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), s.center.to_string(), format!("{}", s.time), s.status.code().to_string()];
        row.extend(s.covariates.iter().map(|z| format!("{z}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Subject indices per center, keyed by center id.
pub fn strata_index(ds: &Dataset) -> BTreeMap<i64, Vec<usize>> {
    ds.strata().iter().map(|s| (s.center, s.range.clone().collect())).collect()
}
