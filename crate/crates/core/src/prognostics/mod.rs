//! Prognostic evaluation: Breslow baselines, CIF prediction, C-index,
//! D-index, IPCW prediction error, repeated splitting and index scoring.

mod baseline;
mod metrics;
mod score;
mod split;

pub use baseline::{breslow_baseline, cif_from, BaselineCumHazard, StepCurve};
pub use metrics::{brier_score, c_index, d_index, last_event_time, prediction_error};
pub use score::{kdgfi_table, score_prognostic_index, CoefficientTable, PrognosticScore, Term, Transform};
pub use split::{split_eval, split_indices, MeanSe, SplitMetrics, SplitOptions, SplitReport};
