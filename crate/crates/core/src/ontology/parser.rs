//! Reader for OWL 2 Functional-Style Syntax restricted to the supported subset.
//!
//! Anything outside the subset is either kept as an opaque class-expression
//! leaf (when it sits in a class-expression position) or skipped as a whole
//! axiom with a [`ParseWarning`].

use std::collections::{BTreeMap, HashMap};

use super::axiom::{Axiom, Characteristic, Relation, Span, TermKind};
use super::error::{ParseError, ParseErrorKind, ParseWarning};
use super::expr::ClassExpression;
use super::iri::{Iri, PrefixMap, RDFS};
use super::lexer::{tokenize, Token};
use super::model::{Ontology, TermRecord};

/// Deepest class-expression nesting accepted before parsing gives up.
pub const MAX_EXPRESSION_DEPTH: usize = 256;

/// Parses a functional-syntax document into an [`Ontology`].
///
/// Accepts either a full `Ontology(...)` document or a bare sequence of
/// prefix declarations and axioms. Subjects that are never declared become
/// terms with their kind inferred from the axiom keyword.
pub fn parse_ontology(text: &str, ontology_id: &str) -> Result<Ontology, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        eof: end_span(text),
        prefixes: PrefixMap::with_standard(),
        terms: TermTable::default(),
        axioms: Vec::new(),
        labels: BTreeMap::new(),
        warnings: Vec::new(),
        ontology_iri: None,
    };
    p.document()?;
    Ok(p.finish(ontology_id))
}

fn end_span(text: &str) -> Span {
    let line = text.lines().count().max(1);
    let column = text.lines().last().map_or(1, |l| l.chars().count() + 1);
    Span { line, column }
}

#[derive(Default)]
struct TermTable {
    order: Vec<Iri>,
    kinds: HashMap<Iri, (TermKind, bool)>,
}

impl TermTable {
    fn declare(&mut self, iri: &Iri, kind: TermKind) -> Option<TermKind> {
        match self.kinds.get_mut(iri) {
            None => {
                self.order.push(iri.clone());
                self.kinds.insert(iri.clone(), (kind, true));
                None
            }
            Some((k, explicit)) if !*explicit => {
                *k = kind;
                *explicit = true;
                None
            }
            Some((k, _)) if *k != kind => Some(*k),
            Some(_) => None,
        }
    }

    fn infer(&mut self, iri: &Iri, kind: TermKind) {
        if !self.kinds.contains_key(iri) {
            self.order.push(iri.clone());
            self.kinds.insert(iri.clone(), (kind, false));
        }
    }
}

struct Parser {
    tokens: Vec<(Token, Span)>,
    pos: usize,
    eof: Span,
    prefixes: PrefixMap,
    terms: TermTable,
    axioms: Vec<Axiom>,
    labels: BTreeMap<Iri, String>,
    warnings: Vec<ParseWarning>,
    ontology_iri: Option<Iri>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.pos + offset).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.tokens.get(self.pos).map_or(self.eof, |(_, s)| *s)
    }

    fn next(&mut self) -> Result<(Token, Span), ParseError> {
        let item = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| ParseError::new(self.eof, ParseErrorKind::UnexpectedEof))?;
        self.pos += 1;
        Ok(item)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        match self.tokens.get(self.pos) {
            Some((tok, span)) => ParseError::new(
                *span,
                ParseErrorKind::Expected {
                    expected: expected.to_owned(),
                    found: tok.render(),
                },
            ),
            None => ParseError::new(self.eof, ParseErrorKind::UnexpectedEof),
        }
    }

    fn expect(&mut self, want: &Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn lparen(&mut self) -> Result<(), ParseError> {
        self.expect(&Token::LParen, "'('")
    }

    fn rparen(&mut self) -> Result<(), ParseError> {
        self.expect(&Token::RParen, "')'")
    }

    /// True when the current token opens a `Keyword(` group.
    fn at_group(&self) -> bool {
        matches!(self.peek(), Some(Token::Name(_))) && self.peek_at(1) == Some(&Token::LParen)
    }

    fn at_iri(&self) -> bool {
        match self.peek() {
            Some(Token::FullIri(_)) => true,
            Some(Token::Name(n)) => {
                n.contains(':') && !n.starts_with("_:") && self.peek_at(1) != Some(&Token::LParen)
            }
            _ => false,
        }
    }

    fn iri(&mut self) -> Result<Iri, ParseError> {
        let span = self.span();
        match self.peek().cloned() {
            Some(Token::FullIri(s)) => {
                self.pos += 1;
                Ok(Iri::new(s).expect("lexer rejects empty IRIs"))
            }
            Some(Token::Name(n)) if self.at_iri() => {
                self.pos += 1;
                self.prefixes.expand(&n).ok_or_else(|| {
                    let prefix = n.split_once(':').map_or("", |(p, _)| p).to_owned();
                    ParseError::new(span, ParseErrorKind::UndeclaredPrefix(prefix))
                })
            }
            _ => Err(self.unexpected("IRI")),
        }
    }

    /// Consumes one balanced `Keyword(...)` group or single token and returns
    /// its canonical text.
    fn balanced_text(&mut self) -> Result<String, ParseError> {
        let mut out = String::new();
        let mut depth = 0usize;
        loop {
            let (tok, _) = self.next()?;
            match tok {
                Token::LParen => {
                    out.push('(');
                    depth += 1;
                    continue;
                }
                Token::RParen => {
                    if out.ends_with(' ') {
                        out.pop();
                    }
                    out.push(')');
                    depth = depth.saturating_sub(1);
                }
                other => {
                    out.push_str(&other.render());
                    if self.peek() == Some(&Token::LParen) {
                        continue;
                    }
                }
            }
            if depth == 0 {
                return Ok(out);
            }
            out.push(' ');
        }
    }

    fn skip_group(&mut self) -> Result<(), ParseError> {
        self.balanced_text().map(|_| ())
    }

    fn skip_axiom_annotations(&mut self) -> Result<(), ParseError> {
        while matches!(self.peek(), Some(Token::Name(n)) if n == "Annotation")
            && self.peek_at(1) == Some(&Token::LParen)
        {
            self.skip_group()?;
        }
        Ok(())
    }

    fn warn(&mut self, span: Span, reason: impl Into<String>) {
        self.warnings.push(ParseWarning {
            line: span.line,
            column: span.column,
            reason: reason.into(),
        });
    }

    fn document(&mut self) -> Result<(), ParseError> {
        while self.peek().is_some() {
            if matches!(self.peek(), Some(Token::Name(n)) if n == "Ontology") {
                self.ontology_body()?;
            } else {
                self.item()?;
            }
        }
        Ok(())
    }

    fn ontology_body(&mut self) -> Result<(), ParseError> {
        self.pos += 1;
        self.lparen()?;
        if self.at_iri() {
            self.ontology_iri = Some(self.iri()?);
            if self.at_iri() {
                self.iri()?;
            }
        }
        while self.peek() != Some(&Token::RParen) {
            if self.peek().is_none() {
                return Err(self.unexpected("')'"));
            }
            self.item()?;
        }
        self.rparen()
    }

    fn item(&mut self) -> Result<(), ParseError> {
        let span = self.span();
        let keyword = match self.peek() {
            Some(Token::Name(n)) if self.peek_at(1) == Some(&Token::LParen) => n.clone(),
            _ => return Err(self.unexpected("axiom or declaration")),
        };
        match keyword.as_str() {
            "Prefix" => self.prefix_declaration(),
            "Import" | "Annotation" => self.skip_group(),
            "Declaration" => self.declaration(span),
            _ => self.axiom(keyword, span),
        }
    }

    fn prefix_declaration(&mut self) -> Result<(), ParseError> {
        self.pos += 1;
        self.lparen()?;
        let name = match self.next()? {
            (Token::Name(n), _) if n.ends_with(':') => n[..n.len() - 1].to_owned(),
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("prefix name"));
            }
        };
        self.expect(&Token::Equals, "'='")?;
        let ns = match self.next()? {
            (Token::FullIri(s), _) => s,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("namespace IRI"));
            }
        };
        self.rparen()?;
        self.prefixes.insert(name, ns);
        Ok(())
    }

    fn declaration(&mut self, span: Span) -> Result<(), ParseError> {
        self.pos += 1;
        self.lparen()?;
        self.skip_axiom_annotations()?;
        let entity = match self.next()? {
            (Token::Name(n), _) => n,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("entity type"));
            }
        };
        self.lparen()?;
        let iri = self.iri()?;
        self.rparen()?;
        self.rparen()?;
        let kind = match entity.as_str() {
            "Class" => TermKind::Class,
            "ObjectProperty" => TermKind::ObjectProperty,
            "DataProperty" => TermKind::DataProperty,
            _ => return Ok(()),
        };
        if let Some(previous) = self.terms.declare(&iri, kind) {
            self.warn(
                span,
                format!("{iri} declared as {kind:?} after {previous:?}; keeping {previous:?}"),
            );
        }
        Ok(())
    }

    fn push_axiom(&mut self, subject: Iri, kind: TermKind, relation: Relation, span: Span) {
        self.terms.infer(&subject, kind);
        self.axioms
            .push(Axiom::new(subject, kind, relation).with_span(span));
    }

    fn axiom(&mut self, keyword: String, span: Span) -> Result<(), ParseError> {
        let start = self.pos;
        if let Some((characteristic, kind)) = Characteristic::from_keyword(&keyword) {
            self.pos += 1;
            self.lparen()?;
            self.skip_axiom_annotations()?;
            if !self.at_iri() {
                self.pos = start;
                self.skip_group()?;
                self.warn(span, format!("{keyword} on a property expression is not supported"));
                return Ok(());
            }
            let subject = self.iri()?;
            self.rparen()?;
            self.push_axiom(subject, kind, Relation::Characteristic(characteristic), span);
            return Ok(());
        }

        match keyword.as_str() {
            "SubClassOf" => {
                self.pos += 1;
                self.lparen()?;
                self.skip_axiom_annotations()?;
                let sub = self.class_expression(0)?;
                let sup = self.class_expression(0)?;
                self.rparen()?;
                match sub {
                    ClassExpression::Named(subject) => {
                        self.push_axiom(subject, TermKind::Class, Relation::SubClassOf(sup), span)
                    }
                    _ => self.warn(span, "SubClassOf with a complex subclass (GCI) skipped"),
                }
            }
            "EquivalentClasses" | "DisjointClasses" => {
                self.pos += 1;
                self.lparen()?;
                self.skip_axiom_annotations()?;
                let mut operands = Vec::new();
                while self.peek() != Some(&Token::RParen) {
                    operands.push(self.class_expression(0)?);
                }
                self.rparen()?;
                if operands.len() < 2 {
                    return Err(ParseError::new(
                        span,
                        ParseErrorKind::TooFewOperands(keyword),
                    ));
                }
                let Some(at) = operands
                    .iter()
                    .position(|e| matches!(e, ClassExpression::Named(_)))
                else {
                    self.warn(span, format!("{keyword} without a named class skipped"));
                    return Ok(());
                };
                let ClassExpression::Named(subject) = operands.remove(at) else {
                    unreachable!()
                };
                // n-ary axioms become one binary axiom per remaining operand,
                // all on the first named class.
                for object in operands {
                    let relation = if keyword == "EquivalentClasses" {
                        Relation::EquivalentTo(object)
                    } else {
                        Relation::DisjointWith(object)
                    };
                    self.push_axiom(subject.clone(), TermKind::Class, relation, span);
                }
            }
            "ObjectPropertyDomain" | "ObjectPropertyRange" | "DataPropertyDomain"
            | "DataPropertyRange" => {
                let kind = if keyword.starts_with("Object") {
                    TermKind::ObjectProperty
                } else {
                    TermKind::DataProperty
                };
                self.pos += 1;
                self.lparen()?;
                self.skip_axiom_annotations()?;
                if !self.at_iri() {
                    self.pos = start;
                    self.skip_group()?;
                    self.warn(span, format!("{keyword} on a property expression is not supported"));
                    return Ok(());
                }
                let subject = self.iri()?;
                let object = if keyword == "DataPropertyRange" {
                    self.data_range()?
                } else {
                    self.class_expression(0)?
                };
                self.rparen()?;
                let relation = if keyword.ends_with("Domain") {
                    Relation::Domain(object)
                } else {
                    Relation::Range(object)
                };
                self.push_axiom(subject, kind, relation, span);
            }
            "SubObjectPropertyOf" | "SubDataPropertyOf" | "InverseObjectProperties" => {
                let kind = if keyword == "SubDataPropertyOf" {
                    TermKind::DataProperty
                } else {
                    TermKind::ObjectProperty
                };
                self.pos += 1;
                self.lparen()?;
                self.skip_axiom_annotations()?;
                if !self.at_iri() {
                    self.pos = start;
                    self.skip_group()?;
                    self.warn(span, format!("{keyword} over property expressions is not supported"));
                    return Ok(());
                }
                let subject = self.iri()?;
                if !self.at_iri() {
                    self.pos = start;
                    self.skip_group()?;
                    self.warn(span, format!("{keyword} over property expressions is not supported"));
                    return Ok(());
                }
                let object = self.iri()?;
                self.rparen()?;
                let relation = if keyword == "InverseObjectProperties" {
                    Relation::InverseOf(object)
                } else {
                    Relation::SubPropertyOf(object)
                };
                self.push_axiom(subject, kind, relation, span);
            }
            "AnnotationAssertion" => {
                self.pos += 1;
                self.lparen()?;
                self.skip_axiom_annotations()?;
                let property = self.iri()?;
                let subject = if self.at_iri() {
                    Some(self.iri()?)
                } else {
                    self.balanced_text()?;
                    None
                };
                let value = self.next()?.0;
                self.rparen()?;
                if let (Some(subject), Token::Literal { value, .. }) = (subject, value) {
                    if property.as_str() == format!("{RDFS}label") {
                        self.labels.entry(subject).or_insert(value);
                    }
                }
            }
            _ => {
                self.skip_group()?;
                self.warn(span, format!("unsupported axiom {keyword} skipped"));
            }
        }
        Ok(())
    }

    fn data_range(&mut self) -> Result<ClassExpression, ParseError> {
        if self.at_iri() {
            Ok(ClassExpression::Named(self.iri()?))
        } else if self.at_group() {
            Ok(ClassExpression::Opaque(self.balanced_text()?))
        } else {
            Err(self.unexpected("data range"))
        }
    }

    fn class_expression(&mut self, depth: usize) -> Result<ClassExpression, ParseError> {
        if depth >= MAX_EXPRESSION_DEPTH {
            return Err(ParseError::new(
                self.span(),
                ParseErrorKind::NestingTooDeep(MAX_EXPRESSION_DEPTH),
            ));
        }
        if self.at_iri() {
            return Ok(ClassExpression::Named(self.iri()?));
        }
        if !self.at_group() {
            return Err(self.unexpected("class expression"));
        }
        let start = self.pos;
        let span = self.span();
        let Some(Token::Name(keyword)) = self.peek().cloned() else {
            unreachable!()
        };
        match keyword.as_str() {
            "ObjectIntersectionOf" | "ObjectUnionOf" => {
                self.pos += 2;
                let mut operands = Vec::new();
                while self.peek() != Some(&Token::RParen) {
                    operands.push(self.class_expression(depth + 1)?);
                }
                self.rparen()?;
                if operands.len() < 2 {
                    return Err(ParseError::new(span, ParseErrorKind::TooFewOperands(keyword)));
                }
                Ok(if keyword == "ObjectIntersectionOf" {
                    ClassExpression::IntersectionOf(operands)
                } else {
                    ClassExpression::UnionOf(operands)
                })
            }
            "ObjectComplementOf" => {
                self.pos += 2;
                let inner = self.class_expression(depth + 1)?;
                self.rparen()?;
                Ok(ClassExpression::ComplementOf(Box::new(inner)))
            }
            "ObjectSomeValuesFrom" | "ObjectAllValuesFrom" => {
                self.pos += 2;
                if !self.at_iri() {
                    self.pos = start;
                    return Ok(ClassExpression::Opaque(self.balanced_text()?));
                }
                let property = self.iri()?;
                let filler = Box::new(self.class_expression(depth + 1)?);
                self.rparen()?;
                Ok(if keyword == "ObjectSomeValuesFrom" {
                    ClassExpression::SomeValuesFrom { property, filler }
                } else {
                    ClassExpression::AllValuesFrom { property, filler }
                })
            }
            "ObjectHasValue" => {
                self.pos += 2;
                if !self.at_iri() {
                    self.pos = start;
                    return Ok(ClassExpression::Opaque(self.balanced_text()?));
                }
                let property = self.iri()?;
                if !self.at_iri() {
                    self.pos = start;
                    return Ok(ClassExpression::Opaque(self.balanced_text()?));
                }
                let individual = self.iri()?;
                self.rparen()?;
                Ok(ClassExpression::HasValue {
                    property,
                    individual,
                })
            }
            _ => Ok(ClassExpression::Opaque(self.balanced_text()?)),
        }
    }

    fn finish(self, ontology_id: &str) -> Ontology {
        let mut by_subject: HashMap<Iri, Vec<Axiom>> = HashMap::new();
        for axiom in self.axioms {
            by_subject
                .entry(axiom.subject.clone())
                .or_default()
                .push(axiom);
        }
        let mut ontology = Ontology {
            id: ontology_id.to_owned(),
            iri: self.ontology_iri,
            prefixes: self.prefixes,
            terms: Vec::with_capacity(self.terms.order.len()),
            hierarchy: BTreeMap::new(),
            warnings: self.warnings,
        };
        for iri in &self.terms.order {
            let (kind, _) = self.terms.kinds[iri];
            let axioms = by_subject.remove(iri).unwrap_or_default();
            for axiom in &axioms {
                match &axiom.relation {
                    Relation::SubClassOf(ClassExpression::Named(parent))
                    | Relation::SubPropertyOf(parent) => ontology.add_edge(iri, parent),
                    _ => {}
                }
            }
            ontology.terms.push(TermRecord {
                term: iri.clone(),
                kind,
                label: self.labels.get(iri).cloned(),
                axioms,
                ontology_id: ontology_id.to_owned(),
            });
        }
        ontology
    }
}
