use thiserror::Error;

use super::axiom::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(span: Span, kind: ParseErrorKind) -> Self {
        ParseError {
            line: span.line,
            column: span.column,
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unterminated IRI")]
    UnterminatedIri,
    #[error("empty IRI")]
    EmptyIri,
    #[error("unterminated string literal")]
    UnterminatedString,
    #[error("unexpected end of input")]
    UnexpectedEof,
    #[error("expected {expected}, found {found}")]
    Expected { expected: String, found: String },
    #[error("undeclared prefix {0:?}")]
    UndeclaredPrefix(String),
    #[error("{0} needs at least two operands")]
    TooFewOperands(String),
    #[error("expression nesting exceeds {0} levels")]
    NestingTooDeep(usize),
}

/// A construct the parser skipped. Surfaced to callers, never fatal.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ParseWarning {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}
