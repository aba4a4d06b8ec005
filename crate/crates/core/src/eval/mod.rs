//! Threshold-based scoring of generated questions against reference
//! questions.

mod metrics;
mod similarity;
mod suite;

pub use metrics::{
    evaluate_matrix, evaluate_term, f1_score, matched_from_matrix, matched_set, valid_from_matrix,
    valid_set, EvalError, TermEvalResult, DEFAULT_TAU,
};
pub use similarity::{
    jaccard, Embedder, EmbeddingSimilarity, ExactMatch, HttpEmbedder, Similarity, SimilarityError,
    TokenJaccard, ENV_EMBED_URL,
};
pub use suite::{
    evaluate_suite, reference_generations, references, sweep, tau_grid, Aggregation, CsMode,
    EvalConfig, GenerationRecord, GroupMetrics, GtMode, MetricsReport, MissingPolicy, Scores,
    SkippedTerm, TermReport, OVERALL,
};
