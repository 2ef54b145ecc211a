//! Penalty families and their group versions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor on |β̂_j| when forming adaptive LASSO weights.
pub const ALASSO_FLOOR: f64 = 1e-8;
pub const DEFAULT_SCAD_A: f64 = 3.7;
pub const DEFAULT_MCP_GAMMA: f64 = 2.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyFamily {
    None,
    Lasso,
    Alasso,
    Scad,
    Mcp,
}

impl PenaltyFamily {
    pub fn label(self) -> &'static str {
        match self {
            PenaltyFamily::None => "none",
            PenaltyFamily::Lasso => "lasso",
            PenaltyFamily::Alasso => "alasso",
            PenaltyFamily::Scad => "scad",
            PenaltyFamily::Mcp => "mcp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "none" | "mple" => PenaltyFamily::None,
            "lasso" => PenaltyFamily::Lasso,
            "alasso" | "adaptive-lasso" => PenaltyFamily::Alasso,
            "scad" => PenaltyFamily::Scad,
            "mcp" => PenaltyFamily::Mcp,
            _ => return None,
        })
    }
}

impl std::fmt::Display for PenaltyFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One linear piece of a penalty derivative: on `[lo, hi]`,
/// p'(b) = `intercept − slope·b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub intercept: f64,
    pub slope: f64,
}

/// Penalty family, tuning parameter and group layout.
///
/// Coordinates are always organized in groups; individual selection is the
/// case of singleton groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub family: PenaltyFamily,
    pub lambda: f64,
    pub scad_a: f64,
    pub mcp_gamma: f64,
    /// Partition of the coordinates.
    pub groups: Vec<Vec<usize>>,
    /// Adaptive weights θ_g, one per group (ALASSO only).
    pub weights: Option<Vec<f64>>,
}

impl PenaltySpec {
    pub fn new(family: PenaltyFamily, dim: usize) -> Self {
        PenaltySpec {
            family,
            lambda: 0.0,
            scad_a: DEFAULT_SCAD_A,
            mcp_gamma: DEFAULT_MCP_GAMMA,
            groups: (0..dim).map(|j| vec![j]).collect(),
            weights: None,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_groups(mut self, groups: Vec<Vec<usize>>) -> Self {
        self.groups = groups;
        self
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn dim(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn is_individual(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidPenalty(m.to_string()));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be finite and nonnegative");
        }
        if self.family == PenaltyFamily::Scad && !(self.scad_a > 2.0) {
            return bad("SCAD shape must exceed 2");
        }
        if self.family == PenaltyFamily::Mcp && !(self.mcp_gamma > 1.0) {
            return bad("MCP shape must exceed 1");
        }
        let d = self.dim();
        let mut seen = vec![false; d];
        for g in &self.groups {
            if g.is_empty() {
                return bad("empty group");
            }
            for &j in g {
                if j >= d || seen[j] {
                    return bad("groups must partition the coordinates");
                }
                seen[j] = true;
            }
        }
        match (&self.weights, self.family) {
            (None, PenaltyFamily::Alasso) => return bad("adaptive LASSO needs weights"),
            (Some(w), _) if w.len() != self.groups.len() || w.iter().any(|&x| !(x > 0.0 && x.is_finite())) => {
                return bad("adaptive weights must be positive, one per group")
            }
            _ => {}
        }
        Ok(())
    }

    /// Effective tuning parameter of a group: √d_g·λ, times θ_g for ALASSO.
    pub fn group_lambda(&self, g: usize) -> f64 {
        let size = (self.groups[g].len() as f64).sqrt();
        let theta = match (self.family, &self.weights) {
            (PenaltyFamily::Alasso, Some(w)) => w[g],
            _ => 1.0,
        };
        self.lambda * size * theta
    }

    /// Piecewise-linear description of p'_g on [0, ∞).
    pub fn pieces(&self, g: usize) -> Vec<Piece> {
        let l = self.group_lambda(g);
        let inf = f64::INFINITY;
        match self.family {
            PenaltyFamily::None => vec![Piece { lo: 0.0, hi: inf, intercept: 0.0, slope: 0.0 }],
            PenaltyFamily::Lasso | PenaltyFamily::Alasso => vec![Piece { lo: 0.0, hi: inf, intercept: l, slope: 0.0 }],
            PenaltyFamily::Scad => {
                let a = self.scad_a;
                vec![
                    Piece { lo: 0.0, hi: l, intercept: l, slope: 0.0 },
                    Piece { lo: l, hi: a * l, intercept: a * l / (a - 1.0), slope: 1.0 / (a - 1.0) },
                    Piece { lo: a * l, hi: inf, intercept: 0.0, slope: 0.0 },
                ]
            }
            PenaltyFamily::Mcp => {
                let gm = self.mcp_gamma;
                vec![
                    Piece { lo: 0.0, hi: gm * l, intercept: l, slope: 1.0 / gm },
                    Piece { lo: gm * l, hi: inf, intercept: 0.0, slope: 0.0 },
                ]
            }
        }
    }

    /// Total penalty Σ_g p_g(‖β_g‖).
    pub fn total(&self, beta: &[f64]) -> f64 {
        (0..self.groups.len()).map(|g| penalty_value(self, group_norm(beta, &self.groups[g]), g)).sum()
    }
}

pub fn group_norm(beta: &[f64], group: &[usize]) -> f64 {
    if group.len() == 1 {
        return beta[group[0]].abs();
    }
    group.iter().map(|&j| beta[j] * beta[j]).sum::<f64>().sqrt()
}

/// p'_λ(b) for group `g` (a coordinate id when groups are singletons).
pub fn penalty_derivative(spec: &PenaltySpec, b: f64, g: usize) -> f64 {
    let l = spec.group_lambda(g);
    match spec.family {
        PenaltyFamily::None => 0.0,
        PenaltyFamily::Lasso | PenaltyFamily::Alasso => l,
        PenaltyFamily::Scad => {
            let a = spec.scad_a;
            if b <= l {
                l
            } else {
                (a * l - b).max(0.0) / (a - 1.0)
            }
        }
        PenaltyFamily::Mcp => (l - b / spec.mcp_gamma).max(0.0),
    }
}

/// p_λ(b) for group `g`: the antiderivative of [`penalty_derivative`] with p(0)=0.
pub fn penalty_value(spec: &PenaltySpec, b: f64, g: usize) -> f64 {
    let l = spec.group_lambda(g);
    match spec.family {
        PenaltyFamily::None => 0.0,
        PenaltyFamily::Lasso | PenaltyFamily::Alasso => l * b,
        PenaltyFamily::Scad => {
            let a = spec.scad_a;
            if b <= l {
                l * b
            } else if b <= a * l {
                (2.0 * a * l * b - b * b - l * l) / (2.0 * (a - 1.0))
            } else {
                (a + 1.0) * l * l / 2.0
            }
        }
        PenaltyFamily::Mcp => {
            let gm = spec.mcp_gamma;
            if b <= gm * l {
                l * b - b * b / (2.0 * gm)
            } else {
                gm * l * l / 2.0
            }
        }
    }
}

/// Adaptive LASSO weights θ_j = 1/max(|β̂_j|, 1e−8) from a converged
/// unpenalized fit. `groups` gives one weight per group from ‖β̂_g‖.
pub fn alasso_weights(mple: &[f64], converged: bool, groups: &[Vec<usize>]) -> Result<Vec<f64>> {
    if !converged || mple.iter().any(|b| !b.is_finite()) {
        return Err(Error::UnpenalizedFitRequired);
    }
    Ok(groups.iter().map(|g| 1.0 / group_norm(mple, g).max(ALASSO_FLOOR)).collect())
}
