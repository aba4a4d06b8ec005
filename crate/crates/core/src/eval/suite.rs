use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::metrics::{evaluate_matrix, f1_score, EvalError, TermEvalResult, DEFAULT_TAU};
use super::similarity::Similarity;
use crate::dataset::{DatasetTriple, TOOL_VERSION};
use crate::misalignment::MisalignmentType;
use crate::ontology::Iri;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Pool counts over terms, then divide.
    #[default]
    Micro,
    /// Average per-term scores.
    Macro,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GtMode {
    /// References are the pitfall questions only.
    #[default]
    SpOnly,
    /// References are the pitfall questions plus every normal question.
    SpPlusNormal,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    Skip,
    /// Score the term as if nothing had been generated.
    CountAsZero,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsMode {
    /// Mean over every generated question.
    #[default]
    PerQuestion,
    /// Mean over terms of each term's mean.
    PerTerm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub tau: f64,
    pub backend_id: String,
    pub aggregation: Aggregation,
    pub gt_mode: GtMode,
    pub missing: MissingPolicy,
    pub cs_mode: CsMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tau: DEFAULT_TAU,
            backend_id: "token-jaccard".into(),
            aggregation: Aggregation::default(),
            gt_mode: GtMode::default(),
            missing: MissingPolicy::default(),
            cs_mode: CsMode::default(),
        }
    }
}

/// One line of a generations file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub term_iri: Iri,
    pub questions: Vec<String>,
}

/// Generations equal to each record's target questions.
pub fn reference_generations(triples: &[DatasetTriple]) -> Vec<GenerationRecord> {
    triples
        .iter()
        .map(|t| GenerationRecord {
            term_iri: t.term_iri.clone(),
            questions: t.target_cqs.clone(),
        })
        .collect()
}

/// Reference questions for a record under `mode`, duplicates removed.
pub fn references(triple: &DatasetTriple, mode: GtMode) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let normal: Box<dyn Iterator<Item = &String>> = match mode {
        GtMode::SpOnly => Box::new(std::iter::empty()),
        GtMode::SpPlusNormal => Box::new(triple.cq_normal()),
    };
    for q in triple.cq_sp().iter().chain(normal) {
        if seen.insert(q.as_str()) {
            out.push(q.clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub term_iri: Iri,
    pub ontology_id: String,
    pub assigned_type: MisalignmentType,
    /// No generations were supplied and the term was scored as empty.
    pub missing_generation: bool,
    #[serde(flatten)]
    pub result: TermEvalResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedTerm {
    pub term_iri: Iri,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub terms: usize,
    pub generated: usize,
    pub references: usize,
    pub valid: usize,
    pub matched: usize,
    pub micro: Scores,
    #[serde(rename = "macro")]
    pub macro_avg: Scores,
    pub cs_per_question: f64,
    pub cs_per_term: f64,
}

impl GroupMetrics {
    fn from_terms(terms: &[&TermReport]) -> Self {
        let sum = |f: fn(&TermEvalResult) -> usize| terms.iter().map(|t| f(&t.result)).sum::<usize>();
        let generated = sum(|r| r.n_gen);
        let references = sum(|r| r.n_gt);
        let valid = sum(|r| r.valid_gen.len());
        let matched = sum(|r| r.matched_gt.len());
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let (p, r) = (ratio(valid, generated), ratio(matched, references));
        let mean = |xs: &mut dyn Iterator<Item = f64>| {
            let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
            if n == 0 {
                0.0
            } else {
                s / n as f64
            }
        };
        GroupMetrics {
            terms: terms.len(),
            generated,
            references,
            valid,
            matched,
            micro: Scores {
                precision: p,
                recall: r,
                f1: f1_score(p, r),
            },
            macro_avg: Scores {
                precision: mean(&mut terms.iter().map(|t| t.result.precision)),
                recall: mean(&mut terms.iter().map(|t| t.result.recall)),
                f1: mean(&mut terms.iter().map(|t| t.result.f1)),
            },
            cs_per_question: mean(&mut terms.iter().flat_map(|t| t.result.per_gen_max_sim.iter().copied())),
            cs_per_term: mean(
                &mut terms
                    .iter()
                    .filter(|t| t.result.n_gen > 0)
                    .map(|t| mean(&mut t.result.per_gen_max_sim.iter().copied())),
            ),
        }
    }

    pub fn scores(&self, aggregation: Aggregation) -> Scores {
        match aggregation {
            Aggregation::Micro => self.micro,
            Aggregation::Macro => self.macro_avg,
        }
    }

    pub fn cs(&self, mode: CsMode) -> f64 {
        match mode {
            CsMode::PerQuestion => self.cs_per_question,
            CsMode::PerTerm => self.cs_per_term,
        }
    }
}

pub const OVERALL: &str = "overall";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tool_version: String,
    pub config: EvalConfig,
    pub terms: Vec<TermReport>,
    pub skipped: Vec<SkippedTerm>,
    /// "type1".."type4" for types with at least one scored term, plus
    /// "overall".
    pub groups: BTreeMap<String, GroupMetrics>,
}

struct Prepared<'a> {
    triple: &'a DatasetTriple,
    matrix: Vec<Vec<f64>>,
    n_gen: usize,
    n_gt: usize,
    missing: bool,
}

fn prepare<'a>(
    triples: &'a [DatasetTriple],
    generations: &[GenerationRecord],
    config: &EvalConfig,
    sim: &dyn Similarity,
) -> Result<(Vec<Prepared<'a>>, Vec<SkippedTerm>), EvalError> {
    let by_term: BTreeMap<&Iri, &GenerationRecord> =
        generations.iter().map(|g| (&g.term_iri, g)).collect();
    let mut prepared = Vec::new();
    let mut skipped = Vec::new();
    for t in triples {
        let gt = references(t, config.gt_mode);
        if gt.is_empty() {
            skipped.push(SkippedTerm {
                term_iri: t.term_iri.clone(),
                reason: "no reference questions".into(),
            });
            continue;
        }
        let (gen, missing) = match by_term.get(&t.term_iri) {
            Some(g) => (
                g.questions
                    .iter()
                    .map(|q| q.trim().to_owned())
                    .filter(|q| !q.is_empty())
                    .collect::<Vec<_>>(),
                false,
            ),
            None if config.missing == MissingPolicy::CountAsZero => (Vec::new(), true),
            None => {
                skipped.push(SkippedTerm {
                    term_iri: t.term_iri.clone(),
                    reason: "no generations".into(),
                });
                continue;
            }
        };
        let matrix = sim.matrix(&gen, &gt)?;
        prepared.push(Prepared {
            triple: t,
            matrix,
            n_gen: gen.len(),
            n_gt: gt.len(),
            missing,
        });
    }
    Ok((prepared, skipped))
}

fn report_at(
    prepared: &[Prepared<'_>],
    skipped: &[SkippedTerm],
    config: &EvalConfig,
    tau: f64,
) -> Result<MetricsReport, EvalError> {
    let mut terms = Vec::with_capacity(prepared.len());
    for p in prepared {
        terms.push(TermReport {
            term_iri: p.triple.term_iri.clone(),
            ontology_id: p.triple.ontology_id.clone(),
            assigned_type: p.triple.assigned_type,
            missing_generation: p.missing,
            result: evaluate_matrix(&p.matrix, p.n_gen, p.n_gt, tau)?,
        });
    }
    let mut groups = BTreeMap::new();
    for ty in MisalignmentType::ALL {
        let members: Vec<&TermReport> = terms.iter().filter(|t| t.assigned_type == ty).collect();
        if !members.is_empty() {
            groups.insert(format!("type{}", ty.number()), GroupMetrics::from_terms(&members));
        }
    }
    let all: Vec<&TermReport> = terms.iter().collect();
    groups.insert(OVERALL.to_owned(), GroupMetrics::from_terms(&all));
    Ok(MetricsReport {
        tool_version: TOOL_VERSION.to_owned(),
        config: EvalConfig {
            tau,
            ..config.clone()
        },
        terms,
        skipped: skipped.to_vec(),
        groups,
    })
}

/// Scores every record that has references. Records without generations
/// are skipped or scored as empty according to `config.missing`.
pub fn evaluate_suite(
    triples: &[DatasetTriple],
    generations: &[GenerationRecord],
    config: &EvalConfig,
    sim: &dyn Similarity,
) -> Result<MetricsReport, EvalError> {
    let (prepared, skipped) = prepare(triples, generations, config, sim)?;
    report_at(&prepared, &skipped, config, config.tau)
}

/// One report per threshold; similarities are computed once.
pub fn sweep(
    triples: &[DatasetTriple],
    generations: &[GenerationRecord],
    config: &EvalConfig,
    sim: &dyn Similarity,
    taus: &[f64],
) -> Result<Vec<MetricsReport>, EvalError> {
    let (prepared, skipped) = prepare(triples, generations, config, sim)?;
    taus.iter()
        .map(|&tau| report_at(&prepared, &skipped, config, tau))
        .collect()
}

/// `start, start+step, ..` up to and including `end` (within rounding).
pub fn tau_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    if step <= 0.0 || end < start {
        return vec![start];
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

fn group_title(key: &str) -> String {
    match key.strip_prefix("type") {
        Some(n) => format!("Type {n}"),
        None => "Overall".to_owned(),
    }
}

impl MetricsReport {
    /// Text table: P, R, F1 in percent with one decimal; C.S. with four.
    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        writeln!(
            out,
            "tau = {}  aggregation = {}  references = {}  c.s. = {}  missing = {}  backend = {}",
            c.tau,
            kebab(&c.aggregation),
            kebab(&c.gt_mode),
            kebab(&c.cs_mode),
            kebab(&c.missing),
            c.backend_id
        )
        .unwrap();
        writeln!(out, "{:<8}  {:>5}  {:>6}  {:>6}  {:>6}  {:>6}", "Group", "Terms", "P", "R", "F1", "C.S.").unwrap();
        let mut keys: Vec<&String> = self.groups.keys().filter(|k| *k != OVERALL).collect();
        keys.push(self.groups.keys().find(|k| *k == OVERALL).expect("overall present"));
        for key in keys {
            let g = &self.groups[key];
            let s = g.scores(c.aggregation);
            writeln!(
                out,
                "{:<8}  {:>5}  {:>6.1}  {:>6.1}  {:>6.1}  {:>6.4}",
                group_title(key),
                g.terms,
                s.precision * 100.0,
                s.recall * 100.0,
                s.f1 * 100.0,
                g.cs(c.cs_mode)
            )
            .unwrap();
        }
        let empty = self.terms.iter().filter(|t| t.result.empty_generation).count();
        let missing = self.terms.iter().filter(|t| t.missing_generation).count();
        if empty > 0 {
            writeln!(out, "{empty} term(s) had no generated questions; their precision counts as 0").unwrap();
        }
        if missing > 0 {
            writeln!(out, "{missing} term(s) had no generations and were scored as empty").unwrap();
        }
        if !self.skipped.is_empty() {
            writeln!(out, "{} term(s) skipped", self.skipped.len()).unwrap();
        }
        out
    }
}

fn kebab<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}
