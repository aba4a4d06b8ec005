use super::axiom::{Axiom, Relation, TermKind};
use super::expr::ClassExpression;
use super::iri::PrefixMap;

/// Canonical single-line functional-syntax form of `axiom`.
pub fn serialize_axiom(axiom: &Axiom, prefixes: &PrefixMap) -> String {
    let subject = prefixes.abbreviate(&axiom.subject);
    let data = axiom.subject_kind == TermKind::DataProperty;
    let flavour = if data { "Data" } else { "Object" };
    match &axiom.relation {
        Relation::SubClassOf(e) => format!("SubClassOf({subject} {})", expr(e, prefixes)),
        Relation::EquivalentTo(e) => {
            format!("EquivalentClasses({subject} {})", expr(e, prefixes))
        }
        Relation::DisjointWith(e) => format!("DisjointClasses({subject} {})", expr(e, prefixes)),
        Relation::Domain(e) => format!("{flavour}PropertyDomain({subject} {})", expr(e, prefixes)),
        Relation::Range(e) => format!("{flavour}PropertyRange({subject} {})", expr(e, prefixes)),
        Relation::SubPropertyOf(p) => {
            format!("Sub{flavour}PropertyOf({subject} {})", prefixes.abbreviate(p))
        }
        Relation::InverseOf(p) => {
            format!("InverseObjectProperties({subject} {})", prefixes.abbreviate(p))
        }
        Relation::Characteristic(c) => {
            let keyword = c
                .keyword(axiom.subject_kind)
                .unwrap_or_else(|| format!("{}ObjectProperty", c.name()));
            format!("{keyword}({subject})")
        }
    }
}

pub fn serialize_expression(e: &ClassExpression, prefixes: &PrefixMap) -> String {
    expr(e, prefixes)
}

fn expr(e: &ClassExpression, prefixes: &PrefixMap) -> String {
    match e {
        ClassExpression::Named(iri) => prefixes.abbreviate(iri),
        ClassExpression::SomeValuesFrom { property, filler } => format!(
            "ObjectSomeValuesFrom({} {})",
            prefixes.abbreviate(property),
            expr(filler, prefixes)
        ),
        ClassExpression::AllValuesFrom { property, filler } => format!(
            "ObjectAllValuesFrom({} {})",
            prefixes.abbreviate(property),
            expr(filler, prefixes)
        ),
        ClassExpression::IntersectionOf(ops) => {
            format!("ObjectIntersectionOf({})", join(ops, prefixes))
        }
        ClassExpression::UnionOf(ops) => format!("ObjectUnionOf({})", join(ops, prefixes)),
        ClassExpression::ComplementOf(inner) => {
            format!("ObjectComplementOf({})", expr(inner, prefixes))
        }
        ClassExpression::HasValue {
            property,
            individual,
        } => format!(
            "ObjectHasValue({} {})",
            prefixes.abbreviate(property),
            prefixes.abbreviate(individual)
        ),
        ClassExpression::Opaque(text) => text.clone(),
    }
}

fn join(ops: &[ClassExpression], prefixes: &PrefixMap) -> String {
    ops.iter()
        .map(|o| expr(o, prefixes))
        .collect::<Vec<_>>()
        .join(" ")
}
