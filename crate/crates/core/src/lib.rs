//! Builds semantic-pitfall validation datasets from OWL ontologies and scores
//! generated competency questions against references.
//!
//! Each pipeline stage lives in its own module and is usable on its own.

pub mod ontology;
pub mod seed;
pub mod misalignment;
pub mod cqgen;
pub mod dataset;
pub mod eval;
pub mod pipeline;
