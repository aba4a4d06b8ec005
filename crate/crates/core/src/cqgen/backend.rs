use thiserror::Error;

use super::prompt::TEMPLATE_HEADER_PREFIX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    /// No connection could be made (refused, DNS, timeout).
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    #[error("backend returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    InvalidResponse(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    pub fn is_unreachable(&self) -> bool {
        matches!(self, BackendError::Unreachable(_))
    }
}

/// A text-generation service. Deterministic implementations must return the
/// same text for the same `(prompt, seed)`.
pub trait TextBackend: Send + Sync {
    fn id(&self) -> &str;
    fn complete(
        &self,
        prompt: &str,
        temperature: Option<f64>,
        seed: u64,
    ) -> Result<String, BackendError>;
}

/// Wraps a closure as a backend; handy for scripted responses in tests.
pub struct FnBackend<F> {
    id: String,
    f: F,
}

impl<F> FnBackend<F>
where
    F: Fn(&str, u64) -> Result<String, BackendError> + Send + Sync,
{
    pub fn new(id: impl Into<String>, f: F) -> Self {
        FnBackend { id: id.into(), f }
    }
}

impl<F> TextBackend for FnBackend<F>
where
    F: Fn(&str, u64) -> Result<String, BackendError> + Send + Sync,
{
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, prompt: &str, _: Option<f64>, seed: u64) -> Result<String, BackendError> {
        (self.f)(prompt, seed)
    }
}

/// Offline backend that answers the two pipeline prompts mechanically.
///
/// For a CQ prompt it instantiates the first `n` listed templates with the
/// bound names (cycling with a numeric suffix if fewer templates exist). For
/// a definition prompt it restates the axiom set.
#[derive(Debug, Clone, Default)]
pub struct MockBackend;

pub const MOCK_BACKEND_ID: &str = "mock";

impl TextBackend for MockBackend {
    fn id(&self) -> &str {
        MOCK_BACKEND_ID
    }

    fn complete(&self, prompt: &str, _: Option<f64>, _: u64) -> Result<String, BackendError> {
        if prompt.contains("\nGenerated CQs:") || prompt.ends_with("Generated CQs:") {
            mock_cqs(prompt)
        } else if prompt.contains("\nAxiom set: ") {
            mock_definition(prompt)
        } else {
            Err(BackendError::InvalidResponse(
                "mock backend only understands CQ and definition prompts".into(),
            ))
        }
    }
}

fn mock_cqs(prompt: &str) -> Result<String, BackendError> {
    let bad = |m: &str| BackendError::InvalidResponse(m.to_owned());
    let n: usize = prompt
        .split("Just return ")
        .nth(1)
        .and_then(|s| s.split(' ').next())
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("no CQ count in prompt"))?;
    let block = prompt
        .split(&format!("Template: {TEMPLATE_HEADER_PREFIX}"))
        .nth(1)
        .ok_or_else(|| bad("no template block in prompt"))?;
    let mut templates = Vec::new();
    let mut binds: Vec<(char, String)> = Vec::new();
    for line in block.lines().skip(1) {
        if let Some(t) = line.strip_prefix("- ") {
            templates.push(t);
        } else if let Some((c, v)) = binding_line(line) {
            binds.push((c, v.to_owned()));
        } else {
            break;
        }
    }
    if templates.is_empty() {
        return Err(bad("template block lists no templates"));
    }
    let questions: Vec<String> = (0..n)
        .map(|i| {
            let q = substitute_letters(templates[i % templates.len()], &binds).replace('|', "/");
            match i / templates.len() {
                0 => q,
                round => format!("{q} ({})", round + 1),
            }
        })
        .collect();
    Ok(questions.join(" | "))
}

fn binding_line(line: &str) -> Option<(char, &str)> {
    let mut chars = line.chars();
    let c = chars.next().filter(|c| ('A'..='D').contains(c))?;
    line[1..].strip_prefix(" = ").map(|v| (c, v))
}

/// Replaces standalone capital letters that have a binding.
fn substitute_letters(text: &str, binds: &[(char, String)]) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    for (i, &c) in chars.iter().enumerate() {
        let standalone = (i == 0 || !chars[i - 1].is_alphanumeric())
            && chars.get(i + 1).is_none_or(|n| !n.is_alphanumeric());
        match binds.iter().find(|(l, _)| *l == c) {
            Some((_, v)) if standalone => out.push_str(v),
            _ => out.push(c),
        }
    }
    out
}

fn mock_definition(prompt: &str) -> Result<String, BackendError> {
    let (noun, name) = prompt
        .lines()
        .find_map(|l| {
            ["class", "property"].into_iter().find_map(|noun| {
                l.strip_prefix(&format!("{noun} name: "))
                    .map(|name| (noun, name))
            })
        })
        .ok_or_else(|| BackendError::InvalidResponse("no term name in prompt".into()))?;
    let axioms = super::prompt::definition_prompt_axioms(prompt);
    Ok(format!(
        "{name} is a {noun} characterised by: {}.",
        axioms.join("; ")
    ))
}
