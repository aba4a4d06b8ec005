use std::collections::HashSet;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::axiom::Relation;
use super::model::{Ontology, TermRecord};
use crate::seed;

/// How the per-term axiom set is collected.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractionFilter {
    /// Every axiom whose subject is the term.
    #[default]
    SubjectOnly,
    /// As `SubjectOnly`, minus axioms whose relation and object also appear
    /// on a direct parent or child of the term (restrictions repeated down
    /// or up the hierarchy).
    ExcludeHierarchyDuplicates,
}

/// Per-term axiom sets. Term order and axiom order follow the source file;
/// terms without axioms are kept.
pub fn extract_terms(ontology: &Ontology, filter: ExtractionFilter) -> Vec<TermRecord> {
    match filter {
        ExtractionFilter::SubjectOnly => ontology.terms.clone(),
        ExtractionFilter::ExcludeHierarchyDuplicates => ontology
            .terms
            .iter()
            .map(|term| {
                let related: HashSet<&Relation> = ontology
                    .parents(&term.term)
                    .chain(ontology.children(&term.term))
                    .filter_map(|iri| ontology.term(iri))
                    .flat_map(|t| t.axioms.iter().map(|a| &a.relation))
                    .collect();
                TermRecord {
                    axioms: term
                        .axioms
                        .iter()
                        .filter(|a| !related.contains(&a.relation))
                        .cloned()
                        .collect(),
                    ..term.clone()
                }
            })
            .collect(),
    }
}

/// Uniform sample of at most `cap` terms without replacement, returned in
/// original order.
pub fn sample_terms(terms: &[TermRecord], cap: usize, seed: u64) -> Vec<TermRecord> {
    if terms.len() <= cap {
        return terms.to_vec();
    }
    let mut rng = seed::rng_for(seed, "sample-terms");
    let mut picked = index::sample(&mut rng, terms.len(), cap).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| terms[i].clone()).collect()
}
