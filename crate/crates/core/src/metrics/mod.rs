//! Information-theoretic quantities, speller throughput and accuracy
//! metrics, and the selection timing model.

mod info;
mod rates;
mod report;
mod timing;

use thiserror::Error;

pub use info::{bit_rate, entropy};
pub use rates::{estimate_rates, RateConfig, RateEstimate, SpellerKind};
pub use report::{ac, ec, isr, ocm, sm, MetricsReport};
pub use timing::{intensifications, selection_time, Phase, TimingConfig};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("negative or non-finite probability {0}")]
    BadProbability(f64),
    #[error("bit rate needs at least 2 selectable objects, got {0}")]
    TooFewObjects(usize),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("empty selection log")]
    EmptyLog,
    #[error("rate estimation needs a non-empty knowledge base")]
    EmptyKnowledgeBase,
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
}
