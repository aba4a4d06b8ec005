use thiserror::Error;

use super::templates::{DefinitionExamples, TemplateKey, TemplateRegistry};
use crate::misalignment::MisalignmentCase;
use crate::ontology::{
    render_expression, serialize_axiom, Axiom, ClassExpression, Labels, PrefixMap, Relation,
};

/// CQ generation prompt. Slots: `{n}`, `{template}`, `{example}`, `{axiom}`.
pub const CQ_PROMPT: &str = "As an ontology engineer, generate a list of competency questions based on the following axiom and one-shot example. Definition of competency questions (CQs): the questions that outline the scope of ontology and provide an idea about the knowledge that needs to be entailed in the ontology. Avoid using narrative questions + axioms. Don\u{2019}t generate unnecessary text.
Just return {n} distinct CQs separated by '|'. Use the one-shot and known templates only as inspiration \u{2014} do not copy them directly.  Rephrase and vary the structure of each CQ while maintaining its logical intent.
Generate competency questions including axioms and current template.
Template: {template}
{example}
Axiom: {axiom}
Generated CQs:";

/// Definition prompt. Slots: `{type}`, `{name}`, `{axiom set}`, `{examples}`.
pub const DEFINITION_PROMPT: &str = "You are an ontology engineer.
Generate a {type} description including information of axiom set.
The description should be concise and informative, providing a clear understanding of the {type}\u{2019}s purpose and characteristics.
Don\u{2019}t generate unnecessary text. Just generate {type} description only.
{type} name: {name}
Axiom set: {axiom set}
For example, {examples}
Now, generate the description.";

/// Line introducing the template list inside the `{template}` slot.
pub const TEMPLATE_HEADER_PREFIX: &str = "Template examples for ";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("no templates registered for {0}")]
    NoTemplates(TemplateKey),
    #[error("definition source for {0} is empty")]
    EmptyDefinitionSource(String),
    #[error("n must be at least 1")]
    ZeroCount,
}

/// Replaces `{name}` slots in one left-to-right pass, so substituted text is
/// never rescanned.
pub fn fill(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    'scan: while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        for (name, value) in slots {
            let key = format!("{{{name}}}");
            if tail.starts_with(&key) {
                out.push_str(value);
                rest = &tail[key.len()..];
                continue 'scan;
            }
        }
        out.push('{');
        rest = &tail[1..];
    }
    out.push_str(rest);
    out
}

/// Names bound to the placeholders of one axiom, in letter order.
pub fn bindings(axiom: &Axiom, labels: &Labels) -> Vec<(char, String)> {
    let subject = labels.name(&axiom.subject).to_owned();
    let restriction = |e: &ClassExpression| match e {
        ClassExpression::SomeValuesFrom { property, filler }
        | ClassExpression::AllValuesFrom { property, filler } => Some((
            labels.name(property).to_owned(),
            render_expression(filler, labels),
        )),
        _ => None,
    };
    let mut out = vec![('A', subject)];
    match &axiom.relation {
        Relation::SubClassOf(e) | Relation::EquivalentTo(e) => match restriction(e) {
            Some((p, filler)) => {
                out.push(('B', p));
                out.push(('C', filler));
            }
            None => out.push(('B', render_expression(e, labels))),
        },
        Relation::DisjointWith(e) | Relation::Domain(e) | Relation::Range(e) => {
            out.push(('B', render_expression(e, labels)))
        }
        Relation::SubPropertyOf(p) | Relation::InverseOf(p) => {
            out.push(('B', labels.name(p).to_owned()))
        }
        Relation::Characteristic(c) => out.push(('B', humanize(c.name()))),
    }
    out
}

/// `InverseFunctional` -> `inverse functional`.
fn humanize(camel: &str) -> String {
    let mut out = String::new();
    for (i, ch) in camel.chars().enumerate() {
        if ch.is_uppercase() && i > 0 {
            out.push(' ');
        }
        out.extend(ch.to_lowercase());
    }
    out
}

/// Contents of the `{template}` slot: header, template lines with
/// placeholders shown as letters, then one `X = name` line per binding.
pub fn template_block(
    axiom: &Axiom,
    registry: &TemplateRegistry,
    labels: &Labels,
) -> Result<String, PromptError> {
    let key = TemplateKey::for_axiom(axiom);
    let templates = registry.templates(key);
    let pattern = registry.pattern(key).ok_or(PromptError::NoTemplates(key))?;
    if templates.is_empty() {
        return Err(PromptError::NoTemplates(key));
    }
    let mut lines = vec![format!("{TEMPLATE_HEADER_PREFIX}{pattern} axioms:")];
    lines.extend(templates.iter().map(|t| format!("- {}", t.display())));
    lines.extend(
        bindings(axiom, labels)
            .into_iter()
            .map(|(c, v)| format!("{c} = {v}")),
    );
    Ok(lines.join("\n"))
}

/// Contents of the `{example}` slot for the axiom's template key.
pub fn example_block(axiom: &Axiom, registry: &TemplateRegistry) -> Result<String, PromptError> {
    let key = TemplateKey::for_axiom(axiom);
    let ex = registry.example(key).ok_or(PromptError::NoTemplates(key))?;
    Ok(format!(
        "Example axiom: {}\nExample CQs: {}",
        ex.axiom,
        ex.cqs.join(" | ")
    ))
}

pub fn build_cq_prompt(
    axiom: &Axiom,
    registry: &TemplateRegistry,
    n: usize,
    prefixes: &PrefixMap,
    labels: &Labels,
) -> Result<String, PromptError> {
    if n == 0 {
        return Err(PromptError::ZeroCount);
    }
    let template = template_block(axiom, registry, labels)?;
    let example = example_block(axiom, registry)?;
    let axiom_text = serialize_axiom(axiom, prefixes);
    Ok(fill(
        CQ_PROMPT,
        &[
            ("n", &n.to_string()),
            ("template", &template),
            ("example", &example),
            ("axiom", &axiom_text),
        ],
    ))
}

/// Builds the definition prompt from `definition_source_axioms`; the input
/// axioms are never consulted.
pub fn build_definition_prompt(
    case: &MisalignmentCase,
    examples: &DefinitionExamples,
    prefixes: &PrefixMap,
) -> Result<String, PromptError> {
    if case.definition_source_axioms.is_empty() {
        return Err(PromptError::EmptyDefinitionSource(
            case.term.term.as_str().to_owned(),
        ));
    }
    let noun = case.term.kind.noun();
    let axiom_set = case
        .definition_source_axioms
        .iter()
        .map(|a| serialize_axiom(a, prefixes))
        .collect::<Vec<_>>()
        .join("\n");
    let examples = examples
        .for_noun(noun)
        .iter()
        .map(|ex| {
            format!(
                "{noun} name: {}\nAxiom set: {}\nDescription: {}",
                ex.name,
                ex.axioms.join("\n"),
                ex.description
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n");
    Ok(fill(
        DEFINITION_PROMPT,
        &[
            ("type", noun),
            ("name", case.term.display_name()),
            ("axiom set", &axiom_set),
            ("examples", &examples),
        ],
    ))
}

/// Recovers the axiom-set lines from a built definition prompt.
pub fn definition_prompt_axioms(prompt: &str) -> Vec<&str> {
    let Some(start) = prompt.find("\nAxiom set: ") else {
        return Vec::new();
    };
    let body = &prompt[start + "\nAxiom set: ".len()..];
    let end = body.find("\nFor example, ").unwrap_or(body.len());
    body[..end].lines().collect()
}
