//! Type classification and misalignment injection.
//!
//! Each term is assigned one of four types. Types 1 and 2 drop one axiom from
//! either the model-facing axiom list or the definition source, Type 3 swaps
//! a single logical construct in one axiom, and Type 4 leaves both sides
//! aligned.

mod swap;

use std::collections::BTreeSet;
use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use swap::{swap_construct, SwapError};

use crate::ontology::{serialize_axiom, Axiom, Construct, ExprPath, Iri, PrefixMap, TermKind, TermRecord};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MisalignmentType {
    Type1MissingAxiom,
    Type2UndefinedAxiom,
    Type3MisusingAxiom,
    Type4Alignment,
}

impl MisalignmentType {
    pub const ALL: [MisalignmentType; 4] = [
        MisalignmentType::Type1MissingAxiom,
        MisalignmentType::Type2UndefinedAxiom,
        MisalignmentType::Type3MisusingAxiom,
        MisalignmentType::Type4Alignment,
    ];

    /// 1-based type number.
    pub fn number(self) -> u8 {
        match self {
            MisalignmentType::Type1MissingAxiom => 1,
            MisalignmentType::Type2UndefinedAxiom => 2,
            MisalignmentType::Type3MisusingAxiom => 3,
            MisalignmentType::Type4Alignment => 4,
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            MisalignmentType::Type1MissingAxiom => "Missing axiom",
            MisalignmentType::Type2UndefinedAxiom => "Undefined axiom",
            MisalignmentType::Type3MisusingAxiom => "Misusing axiom",
            MisalignmentType::Type4Alignment => "Alignment",
        }
    }

    pub fn is_pitfall(self) -> bool {
        self != MisalignmentType::Type4Alignment
    }
}

impl fmt::Display for MisalignmentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type {}", self.number())
    }
}

/// Types a term may be assigned. Type 4 is always present.
pub fn eligible_types(term: &TermRecord) -> BTreeSet<MisalignmentType> {
    let mut out = BTreeSet::new();
    if term.axioms.len() >= 2 {
        out.insert(MisalignmentType::Type1MissingAxiom);
        out.insert(MisalignmentType::Type2UndefinedAxiom);
    }
    if term.axioms.iter().any(Axiom::has_swappable) {
        out.insert(MisalignmentType::Type3MisusingAxiom);
    }
    out.insert(MisalignmentType::Type4Alignment);
    out
}

/// Relative weights for type assignment, indexed by type number − 1.
/// Ineligible types are ignored, so only ratios among eligible types matter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeWeights(pub [f64; 4]);

impl Default for TypeWeights {
    fn default() -> Self {
        TypeWeights([1.0; 4])
    }
}

impl TypeWeights {
    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|w| *w == self.0[0])
    }
}

/// Uniform draw over [`eligible_types`], fixed by `seed`.
pub fn assign_type(term: &TermRecord, seed: u64) -> MisalignmentType {
    let eligible: Vec<_> = eligible_types(term).into_iter().collect();
    let mut rng = seed::rng_for(seed, "assign-type");
    eligible[rng.gen_range(0..eligible.len())]
}

/// Weighted draw over the eligible types. Falls back to Type 4 when every
/// eligible weight is zero.
pub fn assign_type_weighted(term: &TermRecord, seed: u64, weights: &TypeWeights) -> MisalignmentType {
    if weights.is_uniform() {
        return assign_type(term, seed);
    }
    let eligible: Vec<_> = eligible_types(term).into_iter().collect();
    let w: Vec<f64> = eligible
        .iter()
        .map(|t| weights.0[usize::from(t.number() - 1)].max(0.0))
        .collect();
    match WeightedIndex::new(&w) {
        Ok(dist) => eligible[dist.sample(&mut seed::rng_for(seed, "assign-type"))],
        Err(_) => MisalignmentType::Type4Alignment,
    }
}

/// Where a Type 3 swap happened inside the pitfall axiom's class expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapDetail {
    pub path: ExprPath,
    pub before: Construct,
    pub after: Construct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisalignmentCase {
    /// The term with its complete, unmodified axiom list.
    pub term: TermRecord,
    pub assigned_type: MisalignmentType,
    /// Axioms shown to the model (A_T).
    pub input_axioms: Vec<Axiom>,
    /// Axioms the natural-language definition is generated from.
    pub definition_source_axioms: Vec<Axiom>,
    /// Index into `term.axioms` of the removed or altered axiom.
    pub pitfall_axiom_index: Option<usize>,
    pub swap_detail: Option<SwapDetail>,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InjectError {
    #[error("{term}: {assigned} is not eligible (eligible: {eligible:?})")]
    NotEligible {
        term: Iri,
        assigned: MisalignmentType,
        eligible: Vec<MisalignmentType>,
    },
    #[error("{0}: term has no axioms")]
    NoAxioms(Iri),
}

/// Applies the injection for `assigned`. All random picks derive from `seed`.
pub fn inject(
    term: &TermRecord,
    assigned: MisalignmentType,
    seed: u64,
) -> Result<MisalignmentCase, InjectError> {
    if term.axioms.is_empty() {
        return Err(InjectError::NoAxioms(term.term.clone()));
    }
    let eligible = eligible_types(term);
    if !eligible.contains(&assigned) {
        return Err(InjectError::NotEligible {
            term: term.term.clone(),
            assigned,
            eligible: eligible.into_iter().collect(),
        });
    }
    let mut rng = seed::rng_for(seed, "inject");
    let original = &term.axioms;
    let mut case = MisalignmentCase {
        term: term.clone(),
        assigned_type: assigned,
        input_axioms: original.clone(),
        definition_source_axioms: original.clone(),
        pitfall_axiom_index: None,
        swap_detail: None,
        rng_seed: seed,
    };
    match assigned {
        MisalignmentType::Type1MissingAxiom => {
            let i = rng.gen_range(0..original.len());
            case.input_axioms.remove(i);
            case.pitfall_axiom_index = Some(i);
        }
        MisalignmentType::Type2UndefinedAxiom => {
            let i = rng.gen_range(0..original.len());
            case.definition_source_axioms.remove(i);
            case.pitfall_axiom_index = Some(i);
        }
        MisalignmentType::Type3MisusingAxiom => {
            let candidates: Vec<usize> = original
                .iter()
                .enumerate()
                .filter(|(_, a)| a.has_swappable())
                .map(|(i, _)| i)
                .collect();
            let i = candidates[rng.gen_range(0..candidates.len())];
            let expr = original[i]
                .relation
                .class_expression()
                .expect("swappable axioms carry a class expression");
            let paths = expr.swappable_paths();
            let path = paths[rng.gen_range(0..paths.len())].clone();
            let swapped = swap_construct(expr, &path).expect("path taken from swappable_paths");
            let before = expr.node_at(&path).map(|n| n.construct()).expect("valid path");
            let after = swapped.node_at(&path).map(|n| n.construct()).expect("valid path");
            *case.input_axioms[i]
                .relation
                .class_expression_mut()
                .expect("same relation") = swapped;
            case.pitfall_axiom_index = Some(i);
            case.swap_detail = Some(SwapDetail {
                path,
                before,
                after,
            });
        }
        MisalignmentType::Type4Alignment => {}
    }
    Ok(case)
}

/// Seed for one term, derived from the run's master seed and the term IRI.
pub fn term_seed(master_seed: u64, term: &Iri) -> u64 {
    seed::derive_seed(master_seed, term.as_str())
}

/// Assigns a type and injects it, both seeded from [`term_seed`].
pub fn classify_and_inject(
    term: &TermRecord,
    master_seed: u64,
    weights: &TypeWeights,
) -> Result<MisalignmentCase, InjectError> {
    let seed = term_seed(master_seed, &term.term);
    let assigned = assign_type_weighted(term, seed, weights);
    inject(term, assigned, seed)
}

impl MisalignmentCase {
    /// Checks the per-type invariants relating the three axiom lists.
    pub fn check_invariants(&self) -> Result<(), String> {
        let original = &self.term.axioms;
        let n = original.len();
        if self.pitfall_axiom_index.is_some() != self.assigned_type.is_pitfall() {
            return Err("pitfall index present iff type is 1-3".into());
        }
        if let Some(i) = self.pitfall_axiom_index {
            if i >= n {
                return Err(format!("pitfall index {i} out of range for {n} axioms"));
            }
        }
        let removed = |shorter: &[Axiom]| -> bool {
            let i = self.pitfall_axiom_index.unwrap_or(usize::MAX);
            shorter.len() + 1 == n
                && shorter
                    .iter()
                    .zip(original.iter().enumerate().filter(|(j, _)| *j != i))
                    .all(|(a, (_, b))| a == b)
        };
        match self.assigned_type {
            MisalignmentType::Type1MissingAxiom => {
                if !removed(&self.input_axioms) || &self.definition_source_axioms != original {
                    return Err("type 1: input must drop the pitfall axiom, definition source complete".into());
                }
            }
            MisalignmentType::Type2UndefinedAxiom => {
                if &self.input_axioms != original || !removed(&self.definition_source_axioms) {
                    return Err("type 2: input complete, definition source drops the pitfall axiom".into());
                }
            }
            MisalignmentType::Type3MisusingAxiom => {
                if self.input_axioms.len() != n || &self.definition_source_axioms != original {
                    return Err("type 3: lengths preserved, definition source complete".into());
                }
                let differing: Vec<usize> = (0..n)
                    .filter(|&j| self.input_axioms[j] != original[j])
                    .collect();
                if differing != vec![self.pitfall_axiom_index.unwrap_or(usize::MAX)] {
                    return Err(format!("type 3: expected exactly the pitfall axiom to differ, got {differing:?}"));
                }
                let detail = self.swap_detail.as_ref().ok_or("type 3 without swap detail")?;
                let i = differing[0];
                let before = original[i].relation.class_expression().ok_or("no expression")?;
                let after = self.input_axioms[i].relation.class_expression().ok_or("no expression")?;
                if swap_construct(before, &detail.path).as_ref() != Ok(after) {
                    return Err("type 3: altered axiom is not a single swap of the original".into());
                }
            }
            MisalignmentType::Type4Alignment => {
                if &self.input_axioms != original || &self.definition_source_axioms != original {
                    return Err("type 4: no modifications allowed".into());
                }
            }
        }
        Ok(())
    }
}

/// One line of the cases manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseManifestEntry {
    pub term_iri: Iri,
    pub kind: TermKind,
    pub ontology_id: String,
    pub assigned_type: MisalignmentType,
    pub pitfall_before: Option<String>,
    pub pitfall_after: Option<String>,
    pub seed: u64,
}

impl CaseManifestEntry {
    pub fn from_case(case: &MisalignmentCase, prefixes: &PrefixMap) -> Self {
        let (before, after) = match case.pitfall_axiom_index {
            Some(i) => {
                let before = serialize_axiom(&case.term.axioms[i], prefixes);
                let after = match case.assigned_type {
                    MisalignmentType::Type3MisusingAxiom => {
                        Some(serialize_axiom(&case.input_axioms[i], prefixes))
                    }
                    _ => None,
                };
                (Some(before), after)
            }
            None => (None, None),
        };
        CaseManifestEntry {
            term_iri: case.term.term.clone(),
            kind: case.term.kind,
            ontology_id: case.term.ontology_id.clone(),
            assigned_type: case.assigned_type,
            pitfall_before: before,
            pitfall_after: after,
            seed: case.rng_seed,
        }
    }
}
