use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::expr::ClassExpression;
use super::iri::Iri;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermKind {
    Class,
    ObjectProperty,
    DataProperty,
}

impl TermKind {
    pub fn is_property(self) -> bool {
        !matches!(self, TermKind::Class)
    }

    /// "class" or "property", as used in generated prompts.
    pub fn noun(self) -> &'static str {
        if self.is_property() {
            "property"
        } else {
            "class"
        }
    }
}

/// Property characteristics expressible as unary property axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Characteristic {
    Functional,
    InverseFunctional,
    Reflexive,
    Irreflexive,
    Symmetric,
    Asymmetric,
    Transitive,
}

impl Characteristic {
    pub const ALL: [Characteristic; 7] = [
        Characteristic::Functional,
        Characteristic::InverseFunctional,
        Characteristic::Reflexive,
        Characteristic::Irreflexive,
        Characteristic::Symmetric,
        Characteristic::Asymmetric,
        Characteristic::Transitive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Characteristic::Functional => "Functional",
            Characteristic::InverseFunctional => "InverseFunctional",
            Characteristic::Reflexive => "Reflexive",
            Characteristic::Irreflexive => "Irreflexive",
            Characteristic::Symmetric => "Symmetric",
            Characteristic::Asymmetric => "Asymmetric",
            Characteristic::Transitive => "Transitive",
        }
    }

    /// Functional-syntax axiom keyword for a property of the given kind.
    /// Data properties only admit `Functional`.
    pub fn keyword(self, kind: TermKind) -> Option<String> {
        match kind {
            TermKind::ObjectProperty => Some(format!("{}ObjectProperty", self.name())),
            TermKind::DataProperty if self == Characteristic::Functional => {
                Some("FunctionalDataProperty".to_owned())
            }
            _ => None,
        }
    }

    pub fn from_keyword(keyword: &str) -> Option<(Characteristic, TermKind)> {
        if keyword == "FunctionalDataProperty" {
            return Some((Characteristic::Functional, TermKind::DataProperty));
        }
        let name = keyword.strip_suffix("ObjectProperty")?;
        Characteristic::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .map(|c| (c, TermKind::ObjectProperty))
    }
}

/// What an axiom asserts about its subject. Each variant carries exactly the
/// object shape its relation admits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    SubClassOf(ClassExpression),
    EquivalentTo(ClassExpression),
    DisjointWith(ClassExpression),
    Domain(ClassExpression),
    Range(ClassExpression),
    SubPropertyOf(Iri),
    InverseOf(Iri),
    Characteristic(Characteristic),
}

/// Discriminator of [`Relation`] without its payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    SubClassOf,
    EquivalentTo,
    DisjointWith,
    Domain,
    Range,
    SubPropertyOf,
    InverseOf,
    Characteristic,
}

impl Relation {
    pub fn kind(&self) -> RelationKind {
        match self {
            Relation::SubClassOf(_) => RelationKind::SubClassOf,
            Relation::EquivalentTo(_) => RelationKind::EquivalentTo,
            Relation::DisjointWith(_) => RelationKind::DisjointWith,
            Relation::Domain(_) => RelationKind::Domain,
            Relation::Range(_) => RelationKind::Range,
            Relation::SubPropertyOf(_) => RelationKind::SubPropertyOf,
            Relation::InverseOf(_) => RelationKind::InverseOf,
            Relation::Characteristic(_) => RelationKind::Characteristic,
        }
    }

    pub fn class_expression(&self) -> Option<&ClassExpression> {
        match self {
            Relation::SubClassOf(e)
            | Relation::EquivalentTo(e)
            | Relation::DisjointWith(e)
            | Relation::Domain(e)
            | Relation::Range(e) => Some(e),
            _ => None,
        }
    }

    pub fn class_expression_mut(&mut self) -> Option<&mut ClassExpression> {
        match self {
            Relation::SubClassOf(e)
            | Relation::EquivalentTo(e)
            | Relation::DisjointWith(e)
            | Relation::Domain(e)
            | Relation::Range(e) => Some(e),
            _ => None,
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationKind::SubClassOf => "SubClassOf",
            RelationKind::EquivalentTo => "EquivalentTo",
            RelationKind::DisjointWith => "DisjointWith",
            RelationKind::Domain => "Domain",
            RelationKind::Range => "Range",
            RelationKind::SubPropertyOf => "SubPropertyOf",
            RelationKind::InverseOf => "InverseOf",
            RelationKind::Characteristic => "Characteristic",
        };
        f.write_str(s)
    }
}

/// 1-based line and column of the axiom keyword in its source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

/// A single axiom with `subject` as its subject term.
///
/// `subject_kind` selects between the object- and data-property keywords
/// when the axiom is written back out. Equality and hashing ignore `span`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Axiom {
    pub subject: Iri,
    pub subject_kind: TermKind,
    pub relation: Relation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
}

impl Axiom {
    pub fn new(subject: Iri, subject_kind: TermKind, relation: Relation) -> Self {
        Axiom {
            subject,
            subject_kind,
            relation,
            span: None,
        }
    }

    pub fn with_span(mut self, span: Span) -> Self {
        self.span = Some(span);
        self
    }

    pub fn kind(&self) -> RelationKind {
        self.relation.kind()
    }

    pub fn has_swappable(&self) -> bool {
        self.relation
            .class_expression()
            .is_some_and(ClassExpression::has_swappable)
    }
}

impl PartialEq for Axiom {
    fn eq(&self, other: &Self) -> bool {
        self.subject == other.subject
            && self.subject_kind == other.subject_kind
            && self.relation == other.relation
    }
}

impl Eq for Axiom {}

impl Hash for Axiom {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.subject.hash(state);
        self.subject_kind.hash(state);
        self.relation.hash(state);
    }
}
