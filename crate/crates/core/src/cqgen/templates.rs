use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{Axiom, ClassExpression, Relation, RelationKind};

pub const BUNDLED_TEMPLATES: &str = include_str!("../../data/templates.toml");
pub const BUNDLED_DEFINITION_EXAMPLES: &str = include_str!("../../data/definition_examples.toml");

pub const MIN_TEMPLATES: usize = 3;
pub const MAX_TEMPLATES: usize = 7;

/// Registry key: the axiom relation, refined by the top-level restriction
/// kind for `SubClassOf` and `EquivalentTo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKey {
    SubClassOf,
    SubClassOfSome,
    SubClassOfOnly,
    EquivalentTo,
    EquivalentToSome,
    EquivalentToOnly,
    DisjointWith,
    Domain,
    Range,
    SubPropertyOf,
    InverseOf,
    Characteristic,
}

impl TemplateKey {
    pub const ALL: [TemplateKey; 12] = [
        TemplateKey::SubClassOf,
        TemplateKey::SubClassOfSome,
        TemplateKey::SubClassOfOnly,
        TemplateKey::EquivalentTo,
        TemplateKey::EquivalentToSome,
        TemplateKey::EquivalentToOnly,
        TemplateKey::DisjointWith,
        TemplateKey::Domain,
        TemplateKey::Range,
        TemplateKey::SubPropertyOf,
        TemplateKey::InverseOf,
        TemplateKey::Characteristic,
    ];

    pub fn for_axiom(axiom: &Axiom) -> TemplateKey {
        let refine = |e: &ClassExpression, plain, some, only| match e {
            ClassExpression::SomeValuesFrom { .. } => some,
            ClassExpression::AllValuesFrom { .. } => only,
            _ => plain,
        };
        match &axiom.relation {
            Relation::SubClassOf(e) => refine(
                e,
                TemplateKey::SubClassOf,
                TemplateKey::SubClassOfSome,
                TemplateKey::SubClassOfOnly,
            ),
            Relation::EquivalentTo(e) => refine(
                e,
                TemplateKey::EquivalentTo,
                TemplateKey::EquivalentToSome,
                TemplateKey::EquivalentToOnly,
            ),
            Relation::DisjointWith(_) => TemplateKey::DisjointWith,
            Relation::Domain(_) => TemplateKey::Domain,
            Relation::Range(_) => TemplateKey::Range,
            Relation::SubPropertyOf(_) => TemplateKey::SubPropertyOf,
            Relation::InverseOf(_) => TemplateKey::InverseOf,
            Relation::Characteristic(_) => TemplateKey::Characteristic,
        }
    }

    pub fn relation(self) -> RelationKind {
        match self {
            TemplateKey::SubClassOf | TemplateKey::SubClassOfSome | TemplateKey::SubClassOfOnly => {
                RelationKind::SubClassOf
            }
            TemplateKey::EquivalentTo
            | TemplateKey::EquivalentToSome
            | TemplateKey::EquivalentToOnly => RelationKind::EquivalentTo,
            TemplateKey::DisjointWith => RelationKind::DisjointWith,
            TemplateKey::Domain => RelationKind::Domain,
            TemplateKey::Range => RelationKind::Range,
            TemplateKey::SubPropertyOf => RelationKind::SubPropertyOf,
            TemplateKey::InverseOf => RelationKind::InverseOf,
            TemplateKey::Characteristic => RelationKind::Characteristic,
        }
    }

    /// Placeholders bound from the axiom itself.
    pub fn bound_placeholders(self) -> &'static [char] {
        match self {
            TemplateKey::SubClassOfSome
            | TemplateKey::SubClassOfOnly
            | TemplateKey::EquivalentToSome
            | TemplateKey::EquivalentToOnly => &['A', 'B', 'C'],
            _ => &['A', 'B'],
        }
    }

    /// Placeholders standing for arbitrary individuals; they stay as
    /// variables in the instantiated question.
    pub fn variable_placeholders(self) -> &'static [char] {
        match self {
            TemplateKey::Domain
            | TemplateKey::Range
            | TemplateKey::SubPropertyOf
            | TemplateKey::InverseOf
            | TemplateKey::Characteristic => &['C', 'D'],
            _ => &[],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateKey::SubClassOf => "sub_class_of",
            TemplateKey::SubClassOfSome => "sub_class_of_some",
            TemplateKey::SubClassOfOnly => "sub_class_of_only",
            TemplateKey::EquivalentTo => "equivalent_to",
            TemplateKey::EquivalentToSome => "equivalent_to_some",
            TemplateKey::EquivalentToOnly => "equivalent_to_only",
            TemplateKey::DisjointWith => "disjoint_with",
            TemplateKey::Domain => "domain",
            TemplateKey::Range => "range",
            TemplateKey::SubPropertyOf => "sub_property_of",
            TemplateKey::InverseOf => "inverse_of",
            TemplateKey::Characteristic => "characteristic",
        }
    }
}

impl fmt::Display for TemplateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One CQ template: a question with `{A}`..`{D}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CqTemplate {
    pub key: TemplateKey,
    pub text: String,
}

impl CqTemplate {
    /// Placeholder letters used in the text, in order of first use.
    pub fn placeholders(&self) -> Vec<char> {
        let mut out = Vec::new();
        for (c, next) in placeholder_hits(&self.text) {
            let _ = next;
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    /// The template as shown to a text backend: `{A}` becomes `A`.
    pub fn display(&self) -> String {
        let mut out = self.text.clone();
        for c in ['A', 'B', 'C', 'D'] {
            out = out.replace(&format!("{{{c}}}"), &c.to_string());
        }
        out
    }
}

fn placeholder_hits(text: &str) -> impl Iterator<Item = (char, usize)> + '_ {
    text.match_indices('{').filter_map(move |(i, _)| {
        let rest = &text[i + 1..];
        let mut chars = rest.chars();
        match (chars.next(), chars.next()) {
            (Some(c @ 'A'..='D'), Some('}')) => Some((c, i + 3)),
            _ => None,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneShotExample {
    pub axiom: String,
    pub cqs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct TemplateSection {
    pattern: String,
    templates: Vec<String>,
    example: OneShotExample,
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("templates file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("reading templates: {0}")]
    Io(#[from] std::io::Error),
    #[error("{key}: {count} templates, expected {MIN_TEMPLATES} to {MAX_TEMPLATES}")]
    TemplateCount { key: TemplateKey, count: usize },
    #[error("{key}: template {text:?} uses unbindable placeholder {{{placeholder}}}")]
    UnbindablePlaceholder {
        key: TemplateKey,
        text: String,
        placeholder: char,
    },
    #[error("{key}: template {text:?} contains a bare letter {letter} that would read as a placeholder")]
    BareLetter {
        key: TemplateKey,
        text: String,
        letter: char,
    },
    #[error("{key}: template contains '|'")]
    Separator { key: TemplateKey },
}

/// Templates per key, each with its pattern line and one-shot example.
#[derive(Debug, Clone)]
pub struct TemplateRegistry {
    sections: BTreeMap<TemplateKey, TemplateSection>,
}

impl TemplateRegistry {
    pub fn bundled() -> Self {
        Self::from_toml(BUNDLED_TEMPLATES).expect("bundled templates are valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, TemplateError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Parses and validates a registry. Keys may be missing; axioms of a
    /// missing key fail prompt construction.
    pub fn from_toml(text: &str) -> Result<Self, TemplateError> {
        let sections: BTreeMap<TemplateKey, TemplateSection> = toml::from_str(text)?;
        for (&key, section) in &sections {
            let count = section.templates.len();
            if !(MIN_TEMPLATES..=MAX_TEMPLATES).contains(&count) {
                return Err(TemplateError::TemplateCount { key, count });
            }
            for text in &section.templates {
                validate_template(key, text)?;
            }
        }
        Ok(TemplateRegistry { sections })
    }

    pub fn templates(&self, key: TemplateKey) -> Vec<CqTemplate> {
        self.sections
            .get(&key)
            .map(|s| {
                s.templates
                    .iter()
                    .map(|t| CqTemplate {
                        key,
                        text: t.clone(),
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn pattern(&self, key: TemplateKey) -> Option<&str> {
        self.sections.get(&key).map(|s| s.pattern.as_str())
    }

    pub fn example(&self, key: TemplateKey) -> Option<&OneShotExample> {
        self.sections.get(&key).map(|s| &s.example)
    }

    pub fn keys(&self) -> impl Iterator<Item = TemplateKey> + '_ {
        self.sections.keys().copied()
    }
}

fn validate_template(key: TemplateKey, text: &str) -> Result<(), TemplateError> {
    if text.contains('|') {
        return Err(TemplateError::Separator { key });
    }
    let allowed: Vec<char> = key
        .bound_placeholders()
        .iter()
        .chain(key.variable_placeholders())
        .copied()
        .collect();
    for (c, _) in placeholder_hits(text) {
        if !allowed.contains(&c) {
            return Err(TemplateError::UnbindablePlaceholder {
                key,
                text: text.to_owned(),
                placeholder: c,
            });
        }
    }
    // After display(), placeholders become bare capitals; any pre-existing
    // bare A-D word would be mistaken for one.
    for word in text.split(|c: char| !c.is_alphanumeric() && c != '{' && c != '}') {
        if let [c @ ('A' | 'B' | 'C' | 'D')] = word.chars().collect::<Vec<_>>()[..] {
            return Err(TemplateError::BareLetter {
                key,
                text: text.to_owned(),
                letter: c,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinitionExample {
    pub name: String,
    pub axioms: Vec<String>,
    pub description: String,
}

/// Few-shot examples for the definition prompt, split by term kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinitionExamples {
    pub class: Vec<DefinitionExample>,
    pub property: Vec<DefinitionExample>,
}

impl DefinitionExamples {
    pub fn bundled() -> Self {
        toml::from_str(BUNDLED_DEFINITION_EXAMPLES).expect("bundled definition examples are valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, TemplateError> {
        Ok(toml::from_str(text)?)
    }

    pub fn for_noun(&self, noun: &str) -> &[DefinitionExample] {
        if noun == "property" {
            &self.property
        } else {
            &self.class
        }
    }
}
