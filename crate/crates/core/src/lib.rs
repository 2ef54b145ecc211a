//! Penalized variable selection for multi-center competing-risks data.
//!
//! The crate fits proportional subdistribution hazards (Fine-Gray) models that
//! account for a center effect in two ways:
//!
//! - **stratified**: every center keeps its own baseline subdistribution hazard
//!   and the partial likelihood is summed over centers. Censoring weights come
//!   from per-center Kaplan-Meier curves ("regular" stratification, a few large
//!   centers) or from one pooled curve ("high" stratification, many small
//!   centers);
//! - **marginal**: a population-average model with pooled risk sets, pooled
//!   censoring weights and a cluster-robust sandwich variance.
//!
//! Variable selection uses LASSO, adaptive LASSO, SCAD or MCP penalties (also
//! in group form), solved by local quadratic approximation or, for the
//! marginal model, coordinate descent, with the tuning parameter picked by BIC.
//!
//! Around the estimators sit the simulation designs used to study selection
//! performance ([`simulate`]) and the prognostic evaluation tools
//! ([`prognostics`]).

pub mod data;
pub mod error;
pub mod inference;
pub mod ipcw;
pub mod linalg;
pub mod objective;
pub mod penalty;
pub mod prognostics;
pub mod simulate;
pub mod solver;

pub use data::{build_dataset, standardize_covariates, Dataset, ModelKind, Record, Standardization, Status, Subject};
pub use error::{Error, Result};
pub use inference::{sandwich, sandwich_marginal, sandwich_stratified, CovarianceMethod, CovarianceReport, MeatKind};
pub use ipcw::{ipcw_weight, km_censoring, CensoringFit, CensoringScope, CensoringSurvival};
pub use objective::{loglik_marginal, loglik_stratified, ObjectiveValue, Problem};
pub use penalty::{alasso_weights, penalty_derivative, penalty_value, PenaltyFamily, PenaltySpec};
pub use solver::{
    fit_cd, fit_lqa, fit_path, fit_unpenalized, lambda_path, prepare_penalty, select_bic, FitResult, GridOptions, PathResult,
    SolverKind,
};
