//! Prompts and text backends for generating definitions and competency
//! questions.

mod backend;
mod generate;
mod http;
mod prompt;
mod templates;

pub use backend::{BackendError, FnBackend, MockBackend, TextBackend, MOCK_BACKEND_ID};
pub use generate::{
    parse_cq_response, CaseArtifacts, CqParseError, CqRole, CqSet, GenerationConfig,
    GenerationError, Generator, OntologyContext, CQ_SEPARATOR, DEFAULT_MAX_RETRIES, DEFAULT_N,
};
pub use http::{
    HttpBackendConfig, HttpTextBackend, WireFormat, ENV_API, ENV_API_KEY, ENV_MODEL, ENV_URL,
};
pub use prompt::{
    bindings, build_cq_prompt, build_definition_prompt, definition_prompt_axioms, example_block,
    fill, template_block, PromptError, CQ_PROMPT, DEFINITION_PROMPT,
};
pub use templates::{
    CqTemplate, DefinitionExample, DefinitionExamples, OneShotExample, TemplateError, TemplateKey,
    TemplateRegistry, BUNDLED_DEFINITION_EXAMPLES, BUNDLED_TEMPLATES, MAX_TEMPLATES,
    MIN_TEMPLATES,
};
