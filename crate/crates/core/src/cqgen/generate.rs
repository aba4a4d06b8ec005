use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::backend::{BackendError, TextBackend};
use super::prompt::{build_cq_prompt, build_definition_prompt, PromptError};
use super::templates::{DefinitionExamples, TemplateRegistry};
use crate::misalignment::MisalignmentCase;
use crate::ontology::{Labels, Ontology, PrefixMap};
use crate::seed::derive_seed;

pub const DEFAULT_N: usize = 3;
pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const CQ_SEPARATOR: char = '|';

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    /// Questions per axiom.
    pub n: usize,
    /// `None` leaves the backend's own default in place.
    pub temperature: Option<f64>,
    pub backend_id: String,
    pub master_seed: u64,
    /// Extra attempts after a response with the wrong item count.
    pub max_retries: u32,
    pub max_in_flight: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            n: DEFAULT_N,
            temperature: None,
            backend_id: super::backend::MOCK_BACKEND_ID.to_owned(),
            master_seed: 0,
            max_retries: DEFAULT_MAX_RETRIES,
            max_in_flight: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CqRole {
    SemanticPitfall,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CqSet {
    /// Index into the term's original axiom list.
    pub axiom_index: usize,
    pub questions: Vec<String>,
    pub role: CqRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CqParseError {
    #[error("expected {expected} questions, found {found}")]
    ItemCountMismatch { found: usize, expected: usize },
    #[error("empty response")]
    EmptyResponse,
}

/// Splits a `|`-separated response into exactly `n` trimmed questions.
pub fn parse_cq_response(raw: &str, n: usize) -> Result<Vec<String>, CqParseError> {
    let items: Vec<String> = raw
        .split(CQ_SEPARATOR)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect();
    match items.len() {
        0 => Err(CqParseError::EmptyResponse),
        found if found != n => Err(CqParseError::ItemCountMismatch { found, expected: n }),
        _ => Ok(items),
    }
}

/// Prefixes and display names of the ontology a case came from.
#[derive(Debug, Clone, Default)]
pub struct OntologyContext {
    pub prefixes: PrefixMap,
    pub labels: Labels,
}

impl OntologyContext {
    pub fn from_ontology(ontology: &Ontology) -> Self {
        let mut labels = Labels::new();
        for t in &ontology.terms {
            if let Some(l) = &t.label {
                labels.insert(t.term.clone(), l.clone());
            }
        }
        OntologyContext {
            prefixes: ontology.prefixes.clone(),
            labels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseArtifacts {
    pub definition: String,
    pub cq_sets: Vec<CqSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerationError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("axiom {axiom_index}: {last} after {attempts} attempts")]
    Parse {
        axiom_index: usize,
        attempts: u32,
        last: CqParseError,
    },
    #[error("empty definition after {attempts} attempts")]
    EmptyDefinition { attempts: u32 },
}

impl GenerationError {
    pub fn is_unreachable(&self) -> bool {
        matches!(self, GenerationError::Backend(e) if e.is_unreachable())
    }
}

/// Everything needed to turn cases into definitions and CQ sets.
pub struct Generator<'a> {
    pub registry: &'a TemplateRegistry,
    pub examples: &'a DefinitionExamples,
    pub config: &'a GenerationConfig,
    pub backend: &'a dyn TextBackend,
}

impl Generator<'_> {
    /// Generates the definition and one CQ set per original axiom. CQs come
    /// from the unmodified axioms, so the pitfall set targets the correct
    /// form.
    pub fn case_artifacts(
        &self,
        case: &MisalignmentCase,
        ctx: &OntologyContext,
    ) -> Result<CaseArtifacts, GenerationError> {
        let attempts = self.config.max_retries + 1;
        let definition_prompt = build_definition_prompt(case, self.examples, &ctx.prefixes)?;
        let mut definition = None;
        for attempt in 0..attempts {
            let seed = derive_seed(case.rng_seed, &format!("definition/{attempt}"));
            let text = self
                .backend
                .complete(&definition_prompt, self.config.temperature, seed)?;
            let text = text.trim();
            if !text.is_empty() {
                definition = Some(text.to_owned());
                break;
            }
        }
        let definition = definition.ok_or(GenerationError::EmptyDefinition { attempts })?;

        let mut cq_sets = Vec::with_capacity(case.term.axioms.len());
        for (i, axiom) in case.term.axioms.iter().enumerate() {
            let prompt = build_cq_prompt(axiom, self.registry, self.config.n, &ctx.prefixes, &ctx.labels)?;
            let mut last = CqParseError::EmptyResponse;
            let mut questions = None;
            for attempt in 0..attempts {
                let seed = derive_seed(case.rng_seed, &format!("cq/{i}/{attempt}"));
                let raw = self.backend.complete(&prompt, self.config.temperature, seed)?;
                match parse_cq_response(&raw, self.config.n) {
                    Ok(q) => {
                        questions = Some(q);
                        break;
                    }
                    Err(e) => {
                        log::debug!("{} axiom {i}: {e}, retrying", case.term.term);
                        last = e;
                    }
                }
            }
            let questions = questions.ok_or(GenerationError::Parse {
                axiom_index: i,
                attempts,
                last,
            })?;
            let role = if case.pitfall_axiom_index == Some(i) {
                CqRole::SemanticPitfall
            } else {
                CqRole::Normal
            };
            cq_sets.push(CqSet {
                axiom_index: i,
                questions,
                role,
            });
        }
        Ok(CaseArtifacts {
            definition,
            cq_sets,
        })
    }

    /// Runs [`Self::case_artifacts`] over all cases with up to
    /// `max_in_flight` concurrent calls. Results keep input order. After the
    /// first unreachable-backend error the remaining cases fail fast.
    /// `context(i)` gives the ontology context of `cases[i]`.
    pub fn all<'c, C>(
        &self,
        cases: &[MisalignmentCase],
        context: C,
    ) -> Vec<Result<CaseArtifacts, GenerationError>>
    where
        C: Fn(usize) -> &'c OntologyContext + Sync,
    {
        let next = AtomicUsize::new(0);
        let down = AtomicBool::new(false);
        let down_reason = Mutex::new(None::<GenerationError>);
        let slots: Vec<Mutex<Option<Result<CaseArtifacts, GenerationError>>>> =
            cases.iter().map(|_| Mutex::new(None)).collect();
        let workers = self.config.max_in_flight.clamp(1, cases.len().max(1));
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(case) = cases.get(i) else { break };
                    let result = if down.load(Ordering::SeqCst) {
                        Err(down_reason.lock().unwrap().clone().expect("set with flag"))
                    } else {
                        let r = self.case_artifacts(case, context(i));
                        if let Err(e) = &r {
                            if e.is_unreachable() {
                                *down_reason.lock().unwrap() = Some(e.clone());
                                down.store(true, Ordering::SeqCst);
                            }
                        }
                        r
                    };
                    *slots[i].lock().unwrap() = Some(result);
                });
            }
        });
        slots
            .into_iter()
            .map(|m| m.into_inner().unwrap().expect("every case processed"))
            .collect()
    }
}
