use thiserror::Error;

use crate::jet::JetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("degenerate metric: |det g| = {det:e}")]
    DegenerateMetric { det: f64 },
    #[error("point lies on the fixed-point set: λ = {lambda:e}")]
    FixedPoint { lambda: f64 },
    #[error("Ernst normalization violated: E+ = {e_plus}, E- = {e_minus} (need |E±| < 1)")]
    NormalizationViolation { e_plus: f64, e_minus: f64 },
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("metric {metric} failed its {check} gate: residual {residual:e}")]
    Catalogue { metric: String, check: String, residual: f64 },
    #[error("Ernst calibration failed: {0}")]
    Calibration(String),
    #[error("surface gravity extraction at {locus} did not converge; trace {trace:?}")]
    Extraction { locus: String, trace: Vec<f64> },
    #[error("classification error: {0}")]
    Classification(String),
    #[error("meshing error: {0}")]
    Meshing(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("search space of {size:e} candidates exceeds the cap {cap:e}")]
    SearchSpace { size: f64, cap: f64 },
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("at chart point {point:?}: {source}")]
    AtPoint {
        point: [f64; 4],
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at(self, point: [f64; 4]) -> Self {
        match self {
            e @ Error::AtPoint { .. } => e,
            e => Error::AtPoint { point, source: Box::new(e) },
        }
    }
}
