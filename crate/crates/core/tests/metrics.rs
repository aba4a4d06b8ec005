mod common;

use std::collections::BTreeSet;

use common::*;
use cqpitfall::eval::{
    evaluate_suite, evaluate_term, reference_generations, sweep, tau_grid, Aggregation, CsMode,
    EmbeddingSimilarity, EvalConfig, EvalError, ExactMatch, GenerationRecord, GtMode,
    MissingPolicy, Similarity, TokenJaccard, DEFAULT_TAU, OVERALL,
};
use cqpitfall::misalignment::MisalignmentType::*;

fn check_against_oracle(sim: &dyn Similarity, oracle: fn(&str, &str) -> f64, seeds: std::ops::Range<u64>) {
    for seed in seeds {
        let (gen, gt) = random_instance(seed);
        let tau = [DEFAULT_TAU, 0.0, 0.25, 0.5, 1.0][(seed % 5) as usize];
        let got = evaluate_term(&gen, &gt, tau, sim).unwrap();
        let (valid, matched, p, r, f) = oracle_metrics(&gen, &gt, tau, oracle);
        assert_eq!(got.valid_gen, valid.into_iter().collect::<BTreeSet<_>>(), "seed {seed}");
        assert_eq!(got.matched_gt, matched.into_iter().collect::<BTreeSet<_>>(), "seed {seed}");
        assert!((got.precision - p).abs() <= 1e-12);
        assert!((got.recall - r).abs() <= 1e-12);
        assert!((got.f1 - f).abs() <= 1e-12);
        assert_eq!(got.empty_generation, gen.is_empty());
        for (i, g) in gen.iter().enumerate() {
            let best = gt.iter().map(|r| oracle(g, r)).fold(f64::NEG_INFINITY, f64::max);
            assert!((got.per_gen_max_sim[i] - best).abs() <= 1e-12);
        }
    }
}

#[test]
fn jaccard_metrics_match_brute_force() {
    check_against_oracle(&TokenJaccard, oracle_jaccard, 0..100);
}

#[test]
fn embedding_metrics_match_brute_force() {
    let sim = EmbeddingSimilarity::new(HashEmbedder);
    check_against_oracle(&sim, oracle_cosine, 100..200);
    assert!(sim.cached() > 0);
}

#[test]
fn identical_sets_score_one() {
    let q: Vec<String> = ["Does a lion eat plants?", "What eats grass?", "Is a twig part of a tree?"]
        .map(String::from)
        .to_vec();
    let sims: [&dyn Similarity; 3] = [&ExactMatch, &TokenJaccard, &EmbeddingSimilarity::new(HashEmbedder)];
    for sim in sims {
        let r = evaluate_term(&q, &q, DEFAULT_TAU, sim).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0), "{}", sim.id());
        assert!(r.per_gen_max_sim.iter().all(|&s| s == 1.0));
    }
}

#[test]
fn disjoint_sets_score_zero_under_exact_match() {
    let gen = vec!["a?".to_string(), "b?".to_string()];
    let gt = vec!["c?".to_string()];
    let r = evaluate_term(&gen, &gt, DEFAULT_TAU, &ExactMatch).unwrap();
    assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    assert!(r.valid_gen.is_empty() && r.matched_gt.is_empty());
    assert_eq!(r.per_gen_max_sim, vec![0.0, 0.0]);
}

#[test]
fn default_threshold() {
    assert_eq!(DEFAULT_TAU, 0.7);
    assert_eq!(EvalConfig::default().tau, 0.7);
}

#[test]
fn empty_generation_and_reference() {
    let gt = vec!["q?".to_string()];
    let r = evaluate_term(&[], &gt, 0.5, &TokenJaccard).unwrap();
    assert!(r.empty_generation);
    assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    assert!(matches!(
        evaluate_term(&gt, &[], 0.5, &TokenJaccard),
        Err(EvalError::EmptyReference)
    ));
}

#[test]
fn precision_and_recall_fall_as_threshold_rises() {
    let grid = tau_grid(0.0, 1.0, 0.05);
    assert_eq!(grid.len(), 21);
    for seed in 0..50 {
        let (gen, gt) = random_instance(1000 + seed);
        let mut last = (f64::INFINITY, f64::INFINITY);
        for &tau in &grid {
            let r = evaluate_term(&gen, &gt, tau, &TokenJaccard).unwrap();
            assert!(r.precision <= last.0 && r.recall <= last.1, "seed {seed} tau {tau}");
            last = (r.precision, r.recall);
        }
    }
}

fn toy_triples() -> Vec<cqpitfall::dataset::DatasetTriple> {
    vec![
        triple("lion", Type1MissingAxiom, &["Does a lion eat meat?"], &["Is a lion an animal?"]),
        triple(
            "giraffe",
            Type3MisusingAxiom,
            &["Does a giraffe eat leaves?", "What do giraffes eat?", "Is a giraffe a herbivore?"],
            &[],
        ),
        triple("impala", Type4Alignment, &[], &["Is an impala an animal?"]),
    ]
}

#[test]
fn reference_generations_score_perfectly() {
    let triples = toy_triples();
    let gens = reference_generations(&triples);
    let config = EvalConfig::default();
    let report = evaluate_suite(&triples, &gens, &config, &TokenJaccard).unwrap();
    let overall = &report.groups[OVERALL];
    assert_eq!(overall.terms, 2);
    assert_eq!(report.skipped.len(), 1);
    assert_eq!(overall.micro.precision, 1.0);
    assert_eq!(overall.micro.recall, 1.0);
    assert_eq!(overall.cs_per_question, 1.0);
    let text = report.render();
    assert!(text.contains("Overall       2   100.0   100.0   100.0  1.0000"), "{text}");
    assert!(text.contains("Type 1"));
}

#[test]
fn micro_and_macro_differ_on_unequal_terms() {
    let triples = toy_triples();
    let gens = vec![
        GenerationRecord { term_iri: ex("lion"), questions: vec!["Does a lion eat meat?".into()] },
        GenerationRecord {
            term_iri: ex("giraffe"),
            questions: vec!["x?".into(), "y?".into(), "z?".into()],
        },
    ];
    let config = EvalConfig { aggregation: Aggregation::Macro, ..EvalConfig::default() };
    let report = evaluate_suite(&triples, &gens, &config, &ExactMatch).unwrap();
    let g = &report.groups[OVERALL];
    assert_eq!(g.micro.precision, 0.25);
    assert_eq!(g.macro_avg.precision, 0.5);
    assert_eq!(g.micro.recall, 0.25);
    assert_eq!(g.macro_avg.recall, 0.5);
    assert_eq!(g.macro_avg.f1, 0.5);
    assert_eq!(g.cs_per_question, 0.25);
    assert_eq!(g.cs_per_term, 0.5);
    assert_eq!(g.cs(CsMode::PerTerm), 0.5);
}

#[test]
fn missing_generations_follow_policy() {
    let triples = toy_triples();
    let gens = vec![GenerationRecord { term_iri: ex("lion"), questions: vec!["Does a lion eat meat?".into()] }];
    let skip = evaluate_suite(&triples, &gens, &EvalConfig::default(), &TokenJaccard).unwrap();
    assert_eq!(skip.groups[OVERALL].terms, 1);
    assert_eq!(skip.groups[OVERALL].micro.recall, 1.0);

    let zero = EvalConfig { missing: MissingPolicy::CountAsZero, ..EvalConfig::default() };
    let report = evaluate_suite(&triples, &gens, &zero, &TokenJaccard).unwrap();
    let g = &report.groups[OVERALL];
    assert_eq!(g.terms, 2);
    assert_eq!(g.micro.recall, 0.25);
    assert!(report.terms.iter().any(|t| t.missing_generation && t.result.empty_generation));
    assert!(report.render().contains("scored as empty"));
}

#[test]
fn normal_questions_extend_references() {
    let triples = toy_triples();
    let config = EvalConfig { gt_mode: GtMode::SpPlusNormal, ..EvalConfig::default() };
    let report = evaluate_suite(&triples, &reference_generations(&triples), &config, &ExactMatch).unwrap();
    assert_eq!(report.groups[OVERALL].terms, 3);
    assert_eq!(report.groups[OVERALL].references, 6);
    assert_eq!(report.groups[OVERALL].micro.precision, 1.0);
    assert_eq!(report.groups["type1"].micro.recall, 0.5);
    let t4 = &report.groups["type4"];
    assert_eq!((t4.generated, t4.micro.precision), (0, 0.0));
}

#[test]
fn sweep_matches_individual_runs() {
    let triples = toy_triples();
    let gens = vec![GenerationRecord {
        term_iri: ex("giraffe"),
        questions: vec!["Does a giraffe eat grass?".into(), "What eats giraffes?".into()],
    }];
    let config = EvalConfig::default();
    let taus = tau_grid(0.5, 0.9, 0.05);
    let reports = sweep(&triples, &gens, &config, &TokenJaccard, &taus).unwrap();
    assert_eq!(reports.len(), 9);
    for (tau, report) in taus.iter().zip(&reports) {
        let single = evaluate_suite(&triples, &gens, &EvalConfig { tau: *tau, ..config.clone() }, &TokenJaccard).unwrap();
        assert_eq!(&single, report);
    }
}

fn embed_reply(req: &Captured) -> String {
    let texts: Vec<String> = serde_json::from_value(req.json()["texts"].clone()).unwrap();
    let vectors: Vec<Vec<f64>> = texts.iter().map(|t| HashEmbedder::raw(t)).collect();
    serde_json::json!({"vectors": vectors, "dim": 8, "model_id": "hash-8"}).to_string()
}

#[test]
fn http_embedder_batches_and_caches() {
    use cqpitfall::eval::HttpEmbedder;
    let server = ScriptedServer::start(|_, req| (200, embed_reply(req)));
    let sim = EmbeddingSimilarity::new(HttpEmbedder::new(format!("{}/", server.url)));
    let gen: Vec<String> = (0..70).map(|i| format!("question {i}?")).collect();
    let gt = vec!["question 3?".to_string(), "other?".to_string()];
    let m = sim.matrix(&gen, &gt).unwrap();
    assert_eq!(m[3][0], 1.0);
    assert!((m[5][1] - oracle_cosine("question 5?", "other?")).abs() <= 1e-12);
    let calls = server.captured();
    assert!(calls.iter().all(|c| c.path == "/embed"));
    let sizes: Vec<usize> = calls.iter().map(|c| c.json()["texts"].as_array().unwrap().len()).collect();
    assert_eq!(sizes, vec![64, 6, 1]);
    assert_eq!(sim.cached(), 71);
    sim.matrix(&gen, &gt).unwrap();
    assert_eq!(server.captured().len(), 3);
}

#[test]
fn http_embedder_rejects_bad_responses() {
    use cqpitfall::eval::{HttpEmbedder, SimilarityError};
    let server = ScriptedServer::start(|_, _| (200, r#"{"vectors":[[1.0]],"dim":2}"#.into()));
    let sim = EmbeddingSimilarity::new(HttpEmbedder::new(server.url.clone()));
    let q = vec!["a?".to_string()];
    assert!(matches!(sim.matrix(&q, &q), Err(SimilarityError::InvalidResponse(_))));

    let down = EmbeddingSimilarity::new(HttpEmbedder::new(closed_port_url()));
    assert!(matches!(down.matrix(&q, &q), Err(SimilarityError::Unreachable(_))));
}
