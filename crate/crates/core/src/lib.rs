//! Predictive P300-style spelling: a frequency knowledge base, a selection
//! matrix that changes shape after every selection, information-theoretic
//! metrics, and an in-silico experiment harness.

pub mod engine;
pub mod insilico;
pub mod kb;
pub mod metrics;
pub mod text;

pub use engine::{
    build_matrix, oracle_choice, Applied, Delta, EngineConfig, EngineError, Mandatory, MatrixDims, SelectionMatrix,
    SelectionRecord, SpellSession, Symbol, SymbolKind,
};
pub use kb::{IngestStats, KbError, KnowledgeBase};
pub use metrics::{
    estimate_rates, MetricsError, MetricsReport, Phase, RateConfig, RateEstimate, SpellerKind, TimingConfig,
};
pub use text::{NormalizeMode, Sentence, TextError, UserAlphabet, Word};
