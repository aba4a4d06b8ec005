use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// An absolute IRI naming an ontology entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Iri(String);

impl Iri {
    /// Wraps an already-absolute IRI. Returns `None` for the empty string.
    pub fn new(value: impl Into<String>) -> Option<Self> {
        let value = value.into();
        if value.is_empty() {
            None
        } else {
            Some(Iri(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The fragment after the last `#`, `/` or `:`; the whole IRI if none.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        match s.rfind(['#', '/', ':']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const XML: &str = "http://www.w3.org/XML/1998/namespace";

/// Prefix name to namespace IRI. The empty prefix is the default (`:`) namespace.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrefixMap(BTreeMap<String, String>);

impl PrefixMap {
    pub fn new() -> Self {
        PrefixMap(BTreeMap::new())
    }

    /// A map holding only the W3C reserved prefixes (`owl`, `rdf`, `rdfs`, `xsd`, `xml`).
    pub fn with_standard() -> Self {
        let mut map = PrefixMap::new();
        for (p, ns) in [("owl", OWL), ("rdf", RDF), ("rdfs", RDFS), ("xsd", XSD), ("xml", XML)] {
            map.insert(p, ns);
        }
        map
    }

    pub fn insert(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.0.insert(prefix.into(), namespace.into());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.0.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Resolves `prefix:local`. `None` when the prefix is not declared.
    pub fn expand(&self, prefixed: &str) -> Option<Iri> {
        let (prefix, local) = prefixed.split_once(':')?;
        let ns = self.get(prefix)?;
        Iri::new(format!("{ns}{local}"))
    }

    /// Shortest prefixed form of `iri`, or `<iri>` when no namespace matches
    /// with a usable local part. Longest namespace wins; ties go to the
    /// lexicographically smallest prefix so output is stable.
    pub fn abbreviate(&self, iri: &Iri) -> String {
        let s = iri.as_str();
        let mut best: Option<(&str, &str)> = None;
        for (prefix, ns) in self.iter() {
            if let Some(local) = s.strip_prefix(ns) {
                if !is_plain_local(local) {
                    continue;
                }
                match best {
                    Some((_, best_ns)) if best_ns.len() >= ns.len() => {}
                    _ => best = Some((prefix, ns)),
                }
            }
        }
        match best {
            Some((prefix, ns)) => format!("{prefix}:{}", &s[ns.len()..]),
            None => format!("<{s}>"),
        }
    }
}

/// Local parts we can write unquoted and lex back as a single name token.
fn is_plain_local(local: &str) -> bool {
    !local.is_empty()
        && local
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '%'))
        && !local.ends_with('.')
}
