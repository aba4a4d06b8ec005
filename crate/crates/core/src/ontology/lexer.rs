use super::axiom::Span;
use super::error::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    LParen,
    RParen,
    Equals,
    /// `<...>` with the brackets stripped.
    FullIri(String),
    /// Keyword, prefixed name or blank node label.
    Name(String),
    Literal {
        value: String,
        lang: Option<String>,
        datatype: Option<String>,
    },
}

impl Token {
    /// Canonical source text of the token.
    pub(crate) fn render(&self) -> String {
        match self {
            Token::LParen => "(".into(),
            Token::RParen => ")".into(),
            Token::Equals => "=".into(),
            Token::FullIri(s) => format!("<{s}>"),
            Token::Name(s) => s.clone(),
            Token::Literal {
                value,
                lang,
                datatype,
            } => {
                let mut out = String::with_capacity(value.len() + 2);
                out.push('"');
                for c in value.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        c => out.push(c),
                    }
                }
                out.push('"');
                if let Some(l) = lang {
                    out.push('@');
                    out.push_str(l);
                } else if let Some(dt) = datatype {
                    out.push_str("^^");
                    out.push_str(dt);
                }
                out
            }
        }
    }
}

fn is_name_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '(' | ')' | '<' | '>' | '"' | '=')
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<(Token, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    let mut column = 1usize;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    column = 1;
                } else {
                    column += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let span = Span { line, column };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        match c {
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '(' => {
                bump!();
                out.push((Token::LParen, span));
            }
            ')' => {
                bump!();
                out.push((Token::RParen, span));
            }
            '=' => {
                bump!();
                out.push((Token::Equals, span));
            }
            '<' => {
                bump!();
                let mut iri = String::new();
                loop {
                    match bump!() {
                        Some('>') => break,
                        Some('\n') | None => {
                            return Err(ParseError::new(span, ParseErrorKind::UnterminatedIri))
                        }
                        Some(c) => iri.push(c),
                    }
                }
                if iri.is_empty() {
                    return Err(ParseError::new(span, ParseErrorKind::EmptyIri));
                }
                out.push((Token::FullIri(iri), span));
            }
            '"' => {
                bump!();
                let mut value = String::new();
                loop {
                    match bump!() {
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('n') => value.push('\n'),
                            Some(c) => value.push(c),
                            None => {
                                return Err(ParseError::new(
                                    span,
                                    ParseErrorKind::UnterminatedString,
                                ))
                            }
                        },
                        Some(c) => value.push(c),
                        None => {
                            return Err(ParseError::new(span, ParseErrorKind::UnterminatedString))
                        }
                    }
                }
                let mut lang = None;
                let mut datatype = None;
                if chars.peek() == Some(&'@') {
                    bump!();
                    let mut tag = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_alphanumeric() || c == '-' {
                            tag.push(c);
                            bump!();
                        } else {
                            break;
                        }
                    }
                    lang = Some(tag);
                } else if chars.peek() == Some(&'^') {
                    bump!();
                    if bump!() != Some('^') {
                        return Err(ParseError::new(span, ParseErrorKind::UnexpectedChar('^')));
                    }
                    let mut dt = String::new();
                    if chars.peek() == Some(&'<') {
                        while let Some(c) = bump!() {
                            dt.push(c);
                            if c == '>' {
                                break;
                            }
                        }
                    } else {
                        while let Some(&c) = chars.peek() {
                            if is_name_char(c) {
                                dt.push(c);
                                bump!();
                            } else {
                                break;
                            }
                        }
                    }
                    datatype = Some(dt);
                }
                out.push((
                    Token::Literal {
                        value,
                        lang,
                        datatype,
                    },
                    span,
                ));
            }
            c if is_name_char(c) => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if is_name_char(c) {
                        name.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                out.push((Token::Name(name), span));
            }
            other => return Err(ParseError::new(span, ParseErrorKind::UnexpectedChar(other))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<Token> {
        tokenize(text).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn prefix_declaration() {
        assert_eq!(
            kinds("Prefix(:=<http://ex.org/#>)"),
            vec![
                Token::Name("Prefix".into()),
                Token::LParen,
                Token::Name(":".into()),
                Token::Equals,
                Token::FullIri("http://ex.org/#".into()),
                Token::RParen,
            ]
        );
    }

    #[test]
    fn literals_and_comments() {
        let toks = kinds("# header\nAnnotationAssertion(rdfs:label :lion \"Lion \\\"king\\\"\"@en)");
        assert_eq!(toks.len(), 6);
        assert_eq!(
            toks[4],
            Token::Literal {
                value: "Lion \"king\"".into(),
                lang: Some("en".into()),
                datatype: None
            }
        );
        assert_eq!(toks[4].render(), "\"Lion \\\"king\\\"\"@en");
    }

    #[test]
    fn typed_literal() {
        let toks = kinds("\"3\"^^xsd:integer");
        assert_eq!(toks[0].render(), "\"3\"^^xsd:integer");
    }

    #[test]
    fn spans_are_one_based() {
        let toks = tokenize("a\n  (b").unwrap();
        assert_eq!(toks[1].1, Span { line: 2, column: 3 });
    }

    #[test]
    fn unterminated_iri_reports_position() {
        let err = tokenize("SubClassOf(<http://x").unwrap_err();
        assert_eq!((err.line, err.column), (1, 12));
    }
}
