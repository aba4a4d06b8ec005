mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use common::*;
use cqpitfall::cqgen::*;
use cqpitfall::misalignment::{inject, MisalignmentCase, MisalignmentType};
use cqpitfall::ontology::{parse_ontology, Ontology, TermRecord};

fn fixture() -> Ontology {
    parse_ontology(include_str!("../fixtures/african_wildlife.ofn"), "african_wildlife").unwrap()
}

fn term<'a>(o: &'a Ontology, local: &str) -> &'a TermRecord {
    o.terms.iter().find(|t| t.term.local_name() == local).unwrap()
}

fn case_with_source(t: &TermRecord, ty: MisalignmentType, dropped: Option<usize>) -> MisalignmentCase {
    let mut source = t.axioms.clone();
    let mut input = t.axioms.clone();
    match ty {
        MisalignmentType::Type1MissingAxiom => {
            input.remove(dropped.unwrap());
        }
        MisalignmentType::Type2UndefinedAxiom => {
            source.remove(dropped.unwrap());
        }
        _ => {}
    }
    let case = MisalignmentCase {
        term: t.clone(),
        assigned_type: ty,
        input_axioms: input,
        definition_source_axioms: source,
        pitfall_axiom_index: dropped,
        swap_detail: None,
        rng_seed: 7,
    };
    case.check_invariants().unwrap();
    case
}

#[test]
fn cq_prompt_matches_golden() {
    let o = fixture();
    let ctx = OntologyContext::from_ontology(&o);
    let eaten_by = term(&o, "eaten-by");
    let prompt = build_cq_prompt(&eaten_by.axioms[0], &TemplateRegistry::bundled(), 3, &ctx.prefixes, &ctx.labels).unwrap();
    assert_eq!(prompt, include_str!("golden/prompts/cq_inverse_of.txt"));
    assert!(prompt.contains("Just return 3 distinct CQs separated by '|'."));
}

#[test]
fn definition_prompts_match_golden() {
    let o = fixture();
    let ctx = OntologyContext::from_ontology(&o);
    let examples = DefinitionExamples::bundled();

    let lion = case_with_source(term(&o, "lion"), MisalignmentType::Type2UndefinedAxiom, Some(1));
    let p = build_definition_prompt(&lion, &examples, &ctx.prefixes).unwrap();
    assert_eq!(p, include_str!("golden/prompts/definition_lion_type2.txt"));
    assert!(p.contains("\nclass name: lion\n"));

    let eaten_by = case_with_source(term(&o, "eaten-by"), MisalignmentType::Type1MissingAxiom, Some(0));
    let p = build_definition_prompt(&eaten_by, &examples, &ctx.prefixes).unwrap();
    assert_eq!(p, include_str!("golden/prompts/definition_eaten_by_type1.txt"));
    assert_eq!(
        definition_prompt_axioms(&p),
        vec!["InverseObjectProperties(:eaten-by :eats)", "ObjectPropertyRange(:eaten-by :animal)"]
    );
}

#[test]
fn definition_prompt_follows_definition_source_only() {
    let o = fixture();
    let ctx = OntologyContext::from_ontology(&o);
    let examples = DefinitionExamples::bundled();
    for t in o.terms.iter().filter(|t| !t.axioms.is_empty()) {
        for ty in MisalignmentType::ALL {
            for seed in 0..4 {
                let Ok(case) = inject(t, ty, seed) else { continue };
                let p = build_definition_prompt(&case, &examples, &ctx.prefixes).unwrap();
                let expected: Vec<String> = case
                    .definition_source_axioms
                    .iter()
                    .map(|a| cqpitfall::ontology::serialize_axiom(a, &ctx.prefixes))
                    .collect();
                assert_eq!(definition_prompt_axioms(&p), expected, "{} {ty}", t.term);
            }
        }
    }
}

fn generator<'a>(
    registry: &'a TemplateRegistry,
    examples: &'a DefinitionExamples,
    config: &'a GenerationConfig,
    backend: &'a dyn TextBackend,
) -> Generator<'a> {
    Generator { registry, examples, config, backend }
}

#[test]
fn mock_generation_is_deterministic_and_partitions_roles() {
    let o = fixture();
    let ctx = OntologyContext::from_ontology(&o);
    let (registry, examples, config) = (TemplateRegistry::bundled(), DefinitionExamples::bundled(), GenerationConfig::default());
    let g = generator(&registry, &examples, &config, &MockBackend);
    let omnivore = term(&o, "omnivore");
    let case = inject(omnivore, MisalignmentType::Type3MisusingAxiom, 11).unwrap();
    let a = g.case_artifacts(&case, &ctx).unwrap();
    assert_eq!(a, g.case_artifacts(&case, &ctx).unwrap());
    assert_eq!(a.cq_sets.len(), omnivore.axioms.len());
    for (i, set) in a.cq_sets.iter().enumerate() {
        assert_eq!(set.axiom_index, i);
        assert_eq!(set.questions.len(), 3);
        let expected = if Some(i) == case.pitfall_axiom_index { CqRole::SemanticPitfall } else { CqRole::Normal };
        assert_eq!(set.role, expected);
    }
    assert_eq!(a.cq_sets.iter().filter(|s| s.role == CqRole::SemanticPitfall).count(), 1);
    assert!(a.definition.starts_with("omnivore is a class"));

    let eaten_by = inject(term(&o, "eaten-by"), MisalignmentType::Type4Alignment, 1).unwrap();
    let a = g.case_artifacts(&eaten_by, &ctx).unwrap();
    assert!(a.cq_sets.iter().all(|s| s.role == CqRole::Normal));
    assert_eq!(a.cq_sets[0].questions[0], "How are property eaten by and property eats logically related in the ontology?");
}

#[test]
fn cqs_come_from_original_axioms() {
    let o = fixture();
    let ctx = OntologyContext::from_ontology(&o);
    let (registry, examples, config) = (TemplateRegistry::bundled(), DefinitionExamples::bundled(), GenerationConfig::default());
    let seen = std::sync::Mutex::new(Vec::new());
    let backend = FnBackend::new("spy", |prompt: &str, seed| {
        seen.lock().unwrap().push(prompt.to_owned());
        MockBackend.complete(prompt, None, seed)
    });
    let g = generator(&registry, &examples, &config, &backend);
    let herbivore = term(&o, "herbivore");
    let case = inject(herbivore, MisalignmentType::Type3MisusingAxiom, 3).unwrap();
    g.case_artifacts(&case, &ctx).unwrap();
    let original = cqpitfall::ontology::serialize_axiom(&herbivore.axioms[0], &ctx.prefixes);
    let prompts = seen.into_inner().unwrap();
    assert!(prompts.iter().any(|p| p.ends_with(&format!("Axiom: {original}\nGenerated CQs:"))));
}

#[test]
fn item_count_mismatch_is_retried_with_fresh_seeds() {
    let o = fixture();
    let ctx = OntologyContext::from_ontology(&o);
    let (registry, examples, config) = (TemplateRegistry::bundled(), DefinitionExamples::bundled(), GenerationConfig::default());
    let seeds = std::sync::Mutex::new(Vec::new());
    let calls = AtomicUsize::new(0);
    let backend = FnBackend::new("flaky", |prompt: &str, seed| {
        if prompt.starts_with("You are") {
            return Ok("A definition.".into());
        }
        seeds.lock().unwrap().push(seed);
        Ok(match calls.fetch_add(1, Ordering::SeqCst) {
            0 => "only one?".into(),
            1 => "a? | b?".into(),
            _ => "a? | b? | c?".into(),
        })
    });
    let g = generator(&registry, &examples, &config, &backend);
    let case = inject(term(&o, "tree"), MisalignmentType::Type4Alignment, 0).unwrap();
    let a = g.case_artifacts(&case, &ctx).unwrap();
    assert_eq!(a.cq_sets[0].questions, vec!["a?", "b?", "c?"]);
    let seeds = seeds.into_inner().unwrap();
    assert_eq!(seeds.len(), 3);
    assert!(seeds[0] != seeds[1] && seeds[1] != seeds[2]);
}

#[test]
fn persistent_mismatch_fails_after_retries() {
    let o = fixture();
    let ctx = OntologyContext::from_ontology(&o);
    let (registry, examples, config) = (TemplateRegistry::bundled(), DefinitionExamples::bundled(), GenerationConfig::default());
    let calls = AtomicUsize::new(0);
    let backend = FnBackend::new("short", |prompt: &str, _| {
        if !prompt.starts_with("You are") {
            calls.fetch_add(1, Ordering::SeqCst);
        }
        Ok("a? | b?".into())
    });
    let g = generator(&registry, &examples, &config, &backend);
    let case = inject(term(&o, "tree"), MisalignmentType::Type4Alignment, 0).unwrap();
    let err = g.case_artifacts(&case, &ctx).unwrap_err();
    assert_eq!(
        err,
        GenerationError::Parse {
            axiom_index: 0,
            attempts: 4,
            last: CqParseError::ItemCountMismatch { found: 2, expected: 3 }
        }
    );
    assert_eq!(calls.load(Ordering::SeqCst), 4);
}

#[test]
fn unreachable_backend_fails_remaining_cases_fast() {
    let o = fixture();
    let ctx = OntologyContext::from_ontology(&o);
    let (registry, examples) = (TemplateRegistry::bundled(), DefinitionExamples::bundled());
    let config = GenerationConfig { max_in_flight: 1, ..GenerationConfig::default() };
    let calls = AtomicUsize::new(0);
    let backend = FnBackend::new("down", |_: &str, _| {
        calls.fetch_add(1, Ordering::SeqCst);
        Err(BackendError::Unreachable("refused".into()))
    });
    let g = generator(&registry, &examples, &config, &backend);
    let cases: Vec<_> = o
        .terms
        .iter()
        .filter(|t| !t.axioms.is_empty())
        .map(|t| inject(t, MisalignmentType::Type4Alignment, 0).unwrap())
        .collect();
    let results = g.all(&cases, |_| &ctx);
    assert_eq!(results.len(), cases.len());
    assert!(results.iter().all(|r| r.as_ref().is_err_and(GenerationError::is_unreachable)));
    assert_eq!(calls.load(Ordering::SeqCst), 1);
}

#[test]
fn parallel_generation_keeps_input_order() {
    let o = fixture();
    let ctx = OntologyContext::from_ontology(&o);
    let (registry, examples) = (TemplateRegistry::bundled(), DefinitionExamples::bundled());
    let cases: Vec<_> = o
        .terms
        .iter()
        .filter(|t| !t.axioms.is_empty())
        .map(|t| inject(t, MisalignmentType::Type4Alignment, 0).unwrap())
        .collect();
    let serial_cfg = GenerationConfig { max_in_flight: 1, ..GenerationConfig::default() };
    let parallel_cfg = GenerationConfig { max_in_flight: 8, ..GenerationConfig::default() };
    let serial = generator(&registry, &examples, &serial_cfg, &MockBackend).all(&cases, |_| &ctx);
    let parallel = generator(&registry, &examples, &parallel_cfg, &MockBackend).all(&cases, |_| &ctx);
    assert_eq!(serial, parallel);
}

fn fast(config: HttpBackendConfig) -> HttpTextBackend {
    HttpTextBackend::new(HttpBackendConfig {
        timeout: Duration::from_secs(5),
        backoff: Duration::from_millis(10),
        ..config
    })
}

#[test]
fn http_simple_format_round_trip() {
    let server = ScriptedServer::start(|_, _| (200, r#"{"text":"q1? | q2? | q3?"}"#.into()));
    let mut config = HttpBackendConfig::new(format!("{}/generate", server.url), WireFormat::Simple);
    config.api_key = Some("secret".into());
    let backend = fast(config);
    assert_eq!(backend.complete("hello", Some(0.7), 42).unwrap(), "q1? | q2? | q3?");
    let req = &server.captured()[0];
    assert_eq!(req.path, "/generate");
    assert_eq!(req.header("authorization"), Some("Bearer secret"));
    assert_eq!(req.json(), serde_json::json!({"prompt": "hello", "temperature": 0.7, "seed": 42}));
}

#[test]
fn http_chat_format_round_trip() {
    let server = ScriptedServer::start(|_, _| {
        (200, r#"{"choices":[{"message":{"role":"assistant","content":"a | b | c"}}]}"#.into())
    });
    let mut config = HttpBackendConfig::new(server.url.clone(), WireFormat::ChatCompletions);
    config.model = Some("m1".into());
    let backend = fast(config);
    assert_eq!(backend.id(), "http:m1");
    assert_eq!(backend.complete("hi", None, 1).unwrap(), "a | b | c");
    let body = server.captured()[0].json();
    assert_eq!(body["model"], "m1");
    assert_eq!(body["messages"][0]["content"], "hi");
    assert!(body.get("temperature").is_none());
    assert!(server.captured()[0].header("authorization").is_none());
}

#[test]
fn http_retries_server_errors() {
    let server = ScriptedServer::start(|k, _| match k {
        0 => (503, "busy".into()),
        1 => (429, "slow down".into()),
        _ => (200, r#"{"text":"ok"}"#.into()),
    });
    let backend = fast(HttpBackendConfig::new(server.url.clone(), WireFormat::Simple));
    assert_eq!(backend.complete("p", None, 0).unwrap(), "ok");
    assert_eq!(server.captured().len(), 3);
}

#[test]
fn http_client_errors_are_not_retried() {
    let server = ScriptedServer::start(|_, _| (400, "bad".into()));
    let backend = fast(HttpBackendConfig::new(server.url.clone(), WireFormat::Simple));
    assert_eq!(
        backend.complete("p", None, 0),
        Err(BackendError::Http { status: 400, body: "bad".into() })
    );
    assert_eq!(server.captured().len(), 1);
}

#[test]
fn http_malformed_body_is_reported() {
    let server = ScriptedServer::start(|_, _| (200, r#"{"nope":1}"#.into()));
    let backend = fast(HttpBackendConfig::new(server.url.clone(), WireFormat::Simple));
    assert!(matches!(backend.complete("p", None, 0), Err(BackendError::InvalidResponse(_))));
}

#[test]
fn http_unreachable_backend() {
    let mut config = HttpBackendConfig::new(closed_port_url(), WireFormat::Simple);
    config.max_attempts = 2;
    let err = fast(config).complete("p", None, 0).unwrap_err();
    assert!(err.is_unreachable(), "{err}");
}
