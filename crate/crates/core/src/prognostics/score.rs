//! Prognostic-index scoring from a coefficient table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    /// (x − center) / scale.
    Linear {
        center: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// x itself, for 0/1 factors.
    Indicator,
    /// (x − knot) / scale when x < knot, else 0.
    HingeBelow {
        knot: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// (x − knot) / scale when x > knot, else 0.
    HingeAbove {
        knot: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl Transform {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Transform::Linear { center, scale } => (x - center) / scale,
            Transform::Indicator => x,
            Transform::HingeBelow { knot, scale } => {
                if x < knot {
                    (x - knot) / scale
                } else {
                    0.0
                }
            }
            Transform::HingeAbove { knot, scale } => {
                if x > knot {
                    (x - knot) / scale
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub factor: String,
    #[serde(flatten)]
    pub transform: Transform,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    #[serde(default)]
    pub name: String,
    pub terms: Vec<Term>,
    /// Values of the reference profile; factors absent here default to 0.
    #[serde(default)]
    pub reference: BTreeMap<String, f64>,
}

impl CoefficientTable {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Distinct factor names in table order.
    pub fn factors(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in &self.terms {
            if !out.contains(&t.factor.as_str()) {
                out.push(&t.factor);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrognosticScore {
    pub pi: f64,
    pub index: f64,
}

fn raw_score(table: &CoefficientTable, value: impl Fn(&str) -> Result<f64>) -> Result<f64> {
    let mut pi = 0.0;
    for t in &table.terms {
        pi += t.coefficient * t.transform.apply(value(&t.factor)?);
    }
    Ok(pi)
}

/// PI relative to the table's reference profile and index = exp(PI).
pub fn score_prognostic_index(table: &CoefficientTable, subject: &BTreeMap<String, f64>) -> Result<PrognosticScore> {
    let own = raw_score(table, |f| subject.get(f).copied().ok_or_else(|| Error::MissingFactor(f.to_string())))?;
    let base = raw_score(table, |f| Ok(table.reference.get(f).copied().unwrap_or(0.0)))?;
    let pi = own - base;
    Ok(PrognosticScore { pi, index: pi.exp() })
}

/// Coefficient table of the donor graft-failure index shipped with the crate.
pub fn kdgfi_table() -> CoefficientTable {
    CoefficientTable::from_json(include_str!("../../data/kdgfi.json")).expect("bundled table parses")
}
