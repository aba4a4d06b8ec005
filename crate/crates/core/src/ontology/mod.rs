//! OWL-subset syntax tree with a functional-syntax reader and writer.
//! Per-term axiom extraction lives here too.

mod axiom;
mod error;
mod expr;
mod extract;
mod iri;
mod lexer;
mod model;
mod parser;
mod render;
mod write;

pub use axiom::{Axiom, Characteristic, Relation, RelationKind, Span, TermKind};
pub use error::{ParseError, ParseErrorKind, ParseWarning};
pub use expr::{ClassExpression, Construct, ExprPath};
pub use extract::{extract_terms, sample_terms, ExtractionFilter};
pub use iri::{Iri, PrefixMap};
pub use model::{HierarchyNode, Ontology, TermRecord};
pub use parser::{parse_ontology, MAX_EXPRESSION_DEPTH};
pub use render::{render_axiom, render_expression, Labels};
pub use write::{serialize_axiom, serialize_expression};
