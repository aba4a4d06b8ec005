use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cqgen::{CaseArtifacts, CqRole};
use crate::misalignment::{term_seed, MisalignmentCase, MisalignmentType};
use crate::ontology::{serialize_axiom, Iri, PrefixMap, TermKind};
use crate::seed;

/// CQs generated for one original axiom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalCqs {
    pub axiom_index: usize,
    pub questions: Vec<String>,
}

/// One dataset record: the model input paired with its target questions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetTriple {
    pub term_iri: Iri,
    pub term_kind: TermKind,
    pub ontology_id: String,
    pub assigned_type: MisalignmentType,
    pub input_axioms_text: Vec<String>,
    pub definition: String,
    pub target_cqs: Vec<String>,
    pub cq_normal_all: Vec<NormalCqs>,
    pub pitfall_axiom_index: Option<usize>,
    pub seed: u64,
}

impl DatasetTriple {
    /// Questions of the pitfall axiom; empty for Type 4.
    pub fn cq_sp(&self) -> &[String] {
        match self.assigned_type {
            MisalignmentType::Type4Alignment => &[],
            _ => &self.target_cqs,
        }
    }

    /// All questions generated for the term's original axioms.
    pub fn cq_normal(&self) -> impl Iterator<Item = &String> {
        self.cq_normal_all.iter().flat_map(|s| s.questions.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssembleError {
    #[error("generation failed: {0}")]
    GenerationFailed(String),
    #[error("expected {expected} CQ sets, found {found}")]
    MissingCqSets { found: usize, expected: usize },
    #[error("CQ set for axiom {axiom_index} has {found} questions, expected {expected}")]
    WrongQuestionCount {
        axiom_index: usize,
        found: usize,
        expected: usize,
    },
    #[error("expected exactly one semantic-pitfall CQ set, found {0}")]
    PitfallSetCount(usize),
    #[error("empty definition")]
    EmptyDefinition,
}

/// A case left out of the dataset and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub term_iri: Iri,
    pub ontology_id: String,
    pub reason: String,
}

/// Builds the record for one case. For Type 4 the target is `n` questions
/// drawn without replacement from the pooled normal CQs; for other types it
/// is the semantic-pitfall set.
pub fn assemble_case(
    case: &MisalignmentCase,
    artifacts: &CaseArtifacts,
    prefixes: &PrefixMap,
    n: usize,
    master_seed: u64,
) -> Result<DatasetTriple, AssembleError> {
    let expected = case.term.axioms.len();
    if artifacts.cq_sets.len() != expected {
        return Err(AssembleError::MissingCqSets {
            found: artifacts.cq_sets.len(),
            expected,
        });
    }
    for set in &artifacts.cq_sets {
        if set.questions.len() != n {
            return Err(AssembleError::WrongQuestionCount {
                axiom_index: set.axiom_index,
                found: set.questions.len(),
                expected: n,
            });
        }
    }
    if artifacts.definition.trim().is_empty() {
        return Err(AssembleError::EmptyDefinition);
    }
    let pitfall: Vec<_> = artifacts
        .cq_sets
        .iter()
        .filter(|s| s.role == CqRole::SemanticPitfall)
        .collect();
    let want_pitfall = usize::from(case.assigned_type.is_pitfall());
    if pitfall.len() != want_pitfall {
        return Err(AssembleError::PitfallSetCount(pitfall.len()));
    }
    let cq_normal_all: Vec<NormalCqs> = artifacts
        .cq_sets
        .iter()
        .map(|s| NormalCqs {
            axiom_index: s.axiom_index,
            questions: s.questions.clone(),
        })
        .collect();
    let seed = term_seed(master_seed, &case.term.term);
    let target_cqs = match pitfall.first() {
        Some(set) => set.questions.clone(),
        None => {
            let pool: Vec<&String> = cq_normal_all.iter().flat_map(|s| &s.questions).collect();
            let mut picked =
                index::sample(&mut seed::rng_for(seed, "type4-targets"), pool.len(), n).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| pool[i].clone()).collect()
        }
    };
    Ok(DatasetTriple {
        term_iri: case.term.term.clone(),
        term_kind: case.term.kind,
        ontology_id: case.term.ontology_id.clone(),
        assigned_type: case.assigned_type,
        input_axioms_text: case
            .input_axioms
            .iter()
            .map(|a| serialize_axiom(a, prefixes))
            .collect(),
        definition: artifacts.definition.clone(),
        target_cqs,
        cq_normal_all,
        pitfall_axiom_index: case.pitfall_axiom_index,
        seed,
    })
}

/// Triples for all successful cases, in input order, plus exclusions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assembly {
    pub triples: Vec<DatasetTriple>,
    pub exclusions: Vec<Exclusion>,
}

/// Assembles every case. `artifacts` is `Err(reason)` for cases whose
/// generation failed.
pub fn assemble<'a, I>(items: I, n: usize, master_seed: u64) -> Assembly
where
    I: IntoIterator<
        Item = (
            &'a MisalignmentCase,
            Result<&'a CaseArtifacts, String>,
            &'a PrefixMap,
        ),
    >,
{
    let mut out = Assembly::default();
    for (case, artifacts, prefixes) in items {
        let result = artifacts
            .map_err(AssembleError::GenerationFailed)
            .and_then(|a| assemble_case(case, a, prefixes, n, master_seed));
        match result {
            Ok(t) => out.triples.push(t),
            Err(e) => {
                log::warn!("excluding {}: {e}", case.term.term);
                out.exclusions.push(Exclusion {
                    term_iri: case.term.term.clone(),
                    ontology_id: case.term.ontology_id.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    out
}
