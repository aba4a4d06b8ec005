//! Readable Manchester-style rendering used inside prompts and by the mock
//! text backend, e.g. `eats only (plant or (is-part-of some plant))`.

use std::collections::BTreeMap;

use super::axiom::{Axiom, Relation};
use super::expr::ClassExpression;
use super::iri::Iri;

/// Display names for IRIs; unknown IRIs fall back to their local name.
#[derive(Debug, Clone, Default)]
pub struct Labels(BTreeMap<Iri, String>);

impl Labels {
    pub fn new() -> Self {
        Labels(BTreeMap::new())
    }

    pub fn insert(&mut self, iri: Iri, label: impl Into<String>) {
        self.0.insert(iri, label.into());
    }

    pub fn name<'a>(&'a self, iri: &'a Iri) -> &'a str {
        self.0.get(iri).map_or_else(|| iri.local_name(), String::as_str)
    }
}

pub fn render_expression(e: &ClassExpression, labels: &Labels) -> String {
    match e {
        ClassExpression::Named(iri) => labels.name(iri).to_owned(),
        ClassExpression::SomeValuesFrom { property, filler } => {
            format!("{} some {}", labels.name(property), operand(filler, labels))
        }
        ClassExpression::AllValuesFrom { property, filler } => {
            format!("{} only {}", labels.name(property), operand(filler, labels))
        }
        ClassExpression::IntersectionOf(ops) => ops
            .iter()
            .map(|o| operand(o, labels))
            .collect::<Vec<_>>()
            .join(" and "),
        ClassExpression::UnionOf(ops) => ops
            .iter()
            .map(|o| operand(o, labels))
            .collect::<Vec<_>>()
            .join(" or "),
        ClassExpression::ComplementOf(inner) => format!("not {}", operand(inner, labels)),
        ClassExpression::HasValue {
            property,
            individual,
        } => format!("{} value {}", labels.name(property), labels.name(individual)),
        ClassExpression::Opaque(text) => text.clone(),
    }
}

fn operand(e: &ClassExpression, labels: &Labels) -> String {
    match e {
        ClassExpression::Named(_) | ClassExpression::Opaque(_) => render_expression(e, labels),
        _ => format!("({})", render_expression(e, labels)),
    }
}

pub fn render_axiom(axiom: &Axiom, labels: &Labels) -> String {
    let subject = labels.name(&axiom.subject);
    match &axiom.relation {
        Relation::SubClassOf(e) => format!("{subject} SubClassOf {}", render_expression(e, labels)),
        Relation::EquivalentTo(e) => {
            format!("{subject} EquivalentTo {}", render_expression(e, labels))
        }
        Relation::DisjointWith(e) => {
            format!("{subject} DisjointWith {}", render_expression(e, labels))
        }
        Relation::Domain(e) => format!("{subject} Domain {}", render_expression(e, labels)),
        Relation::Range(e) => format!("{subject} Range {}", render_expression(e, labels)),
        Relation::SubPropertyOf(p) => format!("{subject} SubPropertyOf {}", labels.name(p)),
        Relation::InverseOf(p) => format!("{subject} InverseOf {}", labels.name(p)),
        Relation::Characteristic(c) => format!("{subject} is {}", c.name()),
    }
}
