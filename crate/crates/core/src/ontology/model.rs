use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::axiom::{Axiom, TermKind};
use super::error::ParseWarning;
use super::iri::{Iri, PrefixMap};

/// An ontology term together with the axioms that have it as subject.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub term: Iri,
    pub kind: TermKind,
    /// `rdfs:label` value, when the source has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub axioms: Vec<Axiom>,
    pub ontology_id: String,
}

impl TermRecord {
    /// Human-facing name: the label, falling back to the IRI local name.
    pub fn display_name(&self) -> &str {
        self.label.as_deref().unwrap_or_else(|| self.term.local_name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyNode {
    pub parents: BTreeSet<Iri>,
    pub children: BTreeSet<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ontology {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iri: Option<Iri>,
    pub prefixes: PrefixMap,
    /// Terms in order of first appearance in the source.
    pub terms: Vec<TermRecord>,
    /// Named sub-class and sub-property edges, indexed both ways.
    pub hierarchy: BTreeMap<Iri, HierarchyNode>,
    #[serde(default)]
    pub warnings: Vec<ParseWarning>,
}

impl Ontology {
    pub fn term(&self, iri: &Iri) -> Option<&TermRecord> {
        self.terms.iter().find(|t| &t.term == iri)
    }

    pub fn parents(&self, iri: &Iri) -> impl Iterator<Item = &Iri> {
        self.hierarchy.get(iri).into_iter().flat_map(|n| n.parents.iter())
    }

    pub fn children(&self, iri: &Iri) -> impl Iterator<Item = &Iri> {
        self.hierarchy.get(iri).into_iter().flat_map(|n| n.children.iter())
    }

    pub(crate) fn add_edge(&mut self, child: &Iri, parent: &Iri) {
        self.hierarchy
            .entry(child.clone())
            .or_default()
            .parents
            .insert(parent.clone());
        self.hierarchy
            .entry(parent.clone())
            .or_default()
            .children
            .insert(child.clone());
    }

    pub fn class_count(&self) -> usize {
        self.terms.iter().filter(|t| t.kind == TermKind::Class).count()
    }

    pub fn property_count(&self) -> usize {
        self.terms.iter().filter(|t| t.kind.is_property()).count()
    }

    pub fn axiom_count(&self) -> usize {
        self.terms.iter().map(|t| t.axioms.len()).sum()
    }
}
