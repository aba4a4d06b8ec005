//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use cqpitfall::ontology::{
    Axiom, Characteristic, ClassExpression, Iri, PrefixMap, Relation, TermKind, TermRecord,
};
use proptest::prelude::*;

pub const NS: &str = "http://ex.org/#";
pub const OTHER_NS: &str = "http://other.org/ns/";

pub fn ex(local: &str) -> Iri {
    Iri::new(format!("{NS}{local}")).unwrap()
}

pub fn prefixes() -> PrefixMap {
    let mut p = PrefixMap::with_standard();
    p.insert("", NS);
    p
}

/// Wraps serialized axiom lines in a minimal ontology document.
pub fn document(lines: &[String]) -> String {
    format!(
        "Prefix(:=<{NS}>)\nPrefix(xsd:=<http://www.w3.org/2001/XMLSchema#>)\nOntology(<http://ex.org/o>\n{}\n)\n",
        lines.join("\n")
    )
}

pub fn arb_iri() -> impl Strategy<Value = Iri> {
    prop_oneof![
        4 => "[a-h][a-z0-9-]{0,5}".prop_map(|l| ex(&l)),
        1 => "[A-Z][a-z]{0,4}".prop_map(|l| Iri::new(format!("{OTHER_NS}{l}")).unwrap()),
    ]
}

pub fn arb_leaf() -> impl Strategy<Value = ClassExpression> {
    prop_oneof![
        8 => arb_iri().prop_map(ClassExpression::Named),
        1 => (arb_iri(), arb_iri()).prop_map(|(property, individual)| ClassExpression::HasValue { property, individual }),
        1 => prop::sample::select(vec![
            "ObjectMinCardinality(2 :p :a)",
            "ObjectOneOf(:i :j)",
            "ObjectExactCardinality(1 :q)",
        ])
        .prop_map(|s| ClassExpression::Opaque(s.to_owned())),
    ]
}

/// Class expressions up to depth 4 with 2 to 4 operands per boolean node.
pub fn arb_expr() -> impl Strategy<Value = ClassExpression> {
    arb_leaf().prop_recursive(4, 48, 4, |inner| {
        prop_oneof![
            (arb_iri(), inner.clone()).prop_map(|(property, f)| ClassExpression::SomeValuesFrom {
                property,
                filler: Box::new(f)
            }),
            (arb_iri(), inner.clone()).prop_map(|(property, f)| ClassExpression::AllValuesFrom {
                property,
                filler: Box::new(f)
            }),
            prop::collection::vec(inner.clone(), 2..=4).prop_map(ClassExpression::IntersectionOf),
            prop::collection::vec(inner.clone(), 2..=4).prop_map(ClassExpression::UnionOf),
            inner.prop_map(|e| ClassExpression::ComplementOf(Box::new(e))),
        ]
    })
}

fn object_characteristics() -> Vec<Characteristic> {
    Characteristic::ALL
        .into_iter()
        .filter(|c| c.keyword(TermKind::ObjectProperty).is_some())
        .collect()
}

fn data_characteristics() -> Vec<Characteristic> {
    Characteristic::ALL
        .into_iter()
        .filter(|c| c.keyword(TermKind::DataProperty).is_some())
        .collect()
}

/// A relation whose object shape is valid for a subject of `kind`.
pub fn arb_relation(kind: TermKind) -> BoxedStrategy<Relation> {
    match kind {
        TermKind::Class => prop_oneof![
            3 => arb_expr().prop_map(Relation::SubClassOf),
            1 => arb_expr().prop_map(Relation::EquivalentTo),
            1 => arb_expr().prop_map(Relation::DisjointWith),
        ]
        .boxed(),
        TermKind::ObjectProperty => prop_oneof![
            arb_expr().prop_map(Relation::Domain),
            arb_expr().prop_map(Relation::Range),
            arb_iri().prop_map(Relation::SubPropertyOf),
            arb_iri().prop_map(Relation::InverseOf),
            prop::sample::select(object_characteristics()).prop_map(Relation::Characteristic),
        ]
        .boxed(),
        TermKind::DataProperty => prop_oneof![
            arb_expr().prop_map(Relation::Domain),
            prop::sample::select(vec!["string", "integer", "decimal"]).prop_map(|d| Relation::Range(
                ClassExpression::Named(
                    Iri::new(format!("http://www.w3.org/2001/XMLSchema#{d}")).unwrap()
                )
            )),
            arb_iri().prop_map(Relation::SubPropertyOf),
            prop::sample::select(data_characteristics()).prop_map(Relation::Characteristic),
        ]
        .boxed(),
    }
}

pub fn arb_kind() -> impl Strategy<Value = TermKind> {
    prop_oneof![
        3 => Just(TermKind::Class),
        2 => Just(TermKind::ObjectProperty),
        1 => Just(TermKind::DataProperty),
    ]
}

pub fn arb_axiom() -> impl Strategy<Value = Axiom> {
    (arb_kind(), arb_iri()).prop_flat_map(|(kind, subject)| {
        arb_relation(kind).prop_map(move |r| Axiom::new(subject.clone(), kind, r))
    })
}

/// A term with 1 to 5 axioms, all on the term itself.
pub fn arb_term() -> impl Strategy<Value = TermRecord> {
    (arb_kind(), "[a-h][a-z]{0,5}").prop_flat_map(|(kind, local)| {
        let subject = ex(&local);
        prop::collection::vec(arb_relation(kind), 1..=5).prop_map(move |rels| TermRecord {
            term: subject.clone(),
            kind,
            label: None,
            axioms: rels
                .into_iter()
                .map(|r| Axiom::new(subject.clone(), kind, r))
                .collect(),
            ontology_id: "gen".into(),
        })
    })
}

/// An expression paired with one of its node paths, chosen uniformly.
pub fn arb_expr_with_path() -> impl Strategy<Value = (ClassExpression, Vec<usize>)> {
    arb_expr().prop_flat_map(|e| {
        let paths = all_paths(&e);
        prop::sample::select(paths).prop_map(move |p| (e.clone(), p))
    })
}

/// Oracle: every node path in pre-order, computed by direct recursion.
pub fn all_paths(e: &ClassExpression) -> Vec<Vec<usize>> {
    fn go(e: &ClassExpression, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(prefix.clone());
        let kids: Vec<&ClassExpression> = match e {
            ClassExpression::SomeValuesFrom { filler, .. }
            | ClassExpression::AllValuesFrom { filler, .. } => vec![filler],
            ClassExpression::ComplementOf(i) => vec![i],
            ClassExpression::IntersectionOf(ops) | ClassExpression::UnionOf(ops) => ops.iter().collect(),
            _ => vec![],
        };
        for (k, c) in kids.into_iter().enumerate() {
            prefix.push(k);
            go(c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(e, &mut Vec::new(), &mut out);
    out
}

/// Oracle tag of a node plus its non-child payload, so two nodes with equal
/// signatures differ at most in their children.
pub fn signature(e: &ClassExpression) -> (String, String) {
    match e {
        ClassExpression::Named(i) => ("named".into(), i.as_str().into()),
        ClassExpression::SomeValuesFrom { property, .. } => ("some".into(), property.as_str().into()),
        ClassExpression::AllValuesFrom { property, .. } => ("all".into(), property.as_str().into()),
        ClassExpression::IntersectionOf(ops) => ("and".into(), ops.len().to_string()),
        ClassExpression::UnionOf(ops) => ("or".into(), ops.len().to_string()),
        ClassExpression::ComplementOf(_) => ("not".into(), String::new()),
        ClassExpression::HasValue { property, individual } => {
            ("value".into(), format!("{} {}", property.as_str(), individual.as_str()))
        }
        ClassExpression::Opaque(s) => ("opaque".into(), s.clone()),
    }
}

/// Oracle: paths at which two same-shaped trees have different node
/// signatures. `None` if the shapes diverge.
pub fn diff_paths(a: &ClassExpression, b: &ClassExpression) -> Option<Vec<Vec<usize>>> {
    let pa = all_paths(a);
    let pb = all_paths(b);
    if pa != pb {
        return None;
    }
    let at = |e: &ClassExpression, p: &[usize]| {
        let mut cur = e.clone();
        for &k in p {
            cur = match cur {
                ClassExpression::SomeValuesFrom { filler, .. }
                | ClassExpression::AllValuesFrom { filler, .. } => *filler,
                ClassExpression::ComplementOf(i) => *i,
                ClassExpression::IntersectionOf(ops) | ClassExpression::UnionOf(ops) => ops[k].clone(),
                _ => unreachable!(),
            };
        }
        signature(&cur)
    };
    Some(pa.into_iter().filter(|p| at(a, p) != at(b, p)).collect())
}

/// Oracle: whether an expression contains an existential, universal,
/// intersection or union node.
pub fn oracle_has_swappable(e: &ClassExpression) -> bool {
    let s = signature(e).0;
    matches!(s.as_str(), "some" | "all" | "and" | "or")
        || match e {
            ClassExpression::SomeValuesFrom { filler, .. }
            | ClassExpression::AllValuesFrom { filler, .. } => oracle_has_swappable(filler),
            ClassExpression::ComplementOf(i) => oracle_has_swappable(i),
            ClassExpression::IntersectionOf(ops) | ClassExpression::UnionOf(ops) => {
                ops.iter().any(oracle_has_swappable)
            }
            _ => false,
        }
}

/// Oracle token Jaccard: lowercase-preserving alphanumeric runs.
pub fn oracle_jaccard(a: &str, b: &str) -> f64 {
    let toks = |s: &str| -> std::collections::HashSet<String> {
        let mut out = std::collections::HashSet::new();
        let mut cur = String::new();
        for c in s.chars() {
            if c.is_alphanumeric() {
                cur.push(c);
            } else if !cur.is_empty() {
                out.insert(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            out.insert(cur);
        }
        out
    };
    let (x, y) = (toks(a), toks(b));
    let u = x.union(&y).count();
    if u == 0 {
        1.0
    } else {
        x.intersection(&y).count() as f64 / u as f64
    }
}

/// Brute-force threshold metrics: (valid, matched, P, R, F1).
pub fn oracle_metrics(
    gen: &[String],
    gt: &[String],
    tau: f64,
    sim: impl Fn(&str, &str) -> f64,
) -> (Vec<usize>, Vec<usize>, f64, f64, f64) {
    let valid: Vec<usize> = (0..gen.len())
        .filter(|&i| gt.iter().any(|r| sim(&gen[i], r) >= tau))
        .collect();
    let matched: Vec<usize> = (0..gt.len())
        .filter(|&j| gen.iter().any(|g| sim(g, &gt[j]) >= tau))
        .collect();
    let p = if gen.is_empty() { 0.0 } else { valid.len() as f64 / gen.len() as f64 };
    let r = matched.len() as f64 / gt.len() as f64;
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (valid, matched, p, r, f)
}

use cqpitfall::dataset::{DatasetTriple, NormalCqs};
use cqpitfall::eval::{Embedder, SimilarityError};
use cqpitfall::misalignment::MisalignmentType;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A record with the given pitfall and normal questions.
pub fn triple(local: &str, ty: MisalignmentType, sp: &[&str], normal: &[&str]) -> DatasetTriple {
    let strings = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let pitfall = ty.is_pitfall();
    DatasetTriple {
        term_iri: ex(local),
        term_kind: TermKind::Class,
        ontology_id: "toy".into(),
        assigned_type: ty,
        input_axioms_text: vec![format!("SubClassOf(:{local} :thing)")],
        definition: format!("{local} is a class."),
        target_cqs: strings(sp),
        cq_normal_all: if normal.is_empty() {
            vec![]
        } else {
            vec![NormalCqs { axiom_index: usize::from(pitfall), questions: strings(normal) }]
        },
        pitfall_axiom_index: pitfall.then_some(0),
        seed: 0,
    }
}

const WORDS: [&str; 7] = ["does", "lion", "eat", "plant", "what", "is", "part"];

/// A question of 1 to 4 words drawn from a small vocabulary.
pub fn random_question(rng: &mut ChaCha8Rng) -> String {
    let k = rng.gen_range(1..=4);
    let words: Vec<&str> = (0..k).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
    format!("{}?", words.join(" "))
}

/// Generated and reference question lists of sizes 0..=5 and 1..=5.
pub fn random_instance(seed: u64) -> (Vec<String>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_gen = rng.gen_range(0..=5);
    let n_gt = rng.gen_range(1..=5);
    let gen = (0..n_gen).map(|_| random_question(&mut rng)).collect();
    let gt = (0..n_gt).map(|_| random_question(&mut rng)).collect();
    (gen, gt)
}

/// Deterministic 8-dimensional vectors seeded by the text bytes.
pub struct HashEmbedder;

impl HashEmbedder {
    pub fn raw(text: &str) -> Vec<f64> {
        let seed = text.trim().bytes().fold(1469598103934665603u64, |h, b| (h ^ u64::from(b)).wrapping_mul(1099511628211));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
}

impl Embedder for HashEmbedder {
    fn id(&self) -> &str {
        "hash"
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, SimilarityError> {
        Ok(texts.iter().map(|t| Self::raw(t)).collect())
    }
}

pub fn oracle_cosine(a: &str, b: &str) -> f64 {
    if a.trim() == b.trim() {
        return 1.0;
    }
    let (x, y) = (HashEmbedder::raw(a), HashEmbedder::raw(b));
    let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
    let n = |v: &[f64]| v.iter().map(|p| p * p).sum::<f64>().sqrt();
    dot / (n(&x) * n(&y))
}

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};

/// A request captured by [`ScriptedServer`].
#[derive(Debug, Clone)]
pub struct Captured {
    pub path: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Captured {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap()
    }
}

/// One-connection-per-request HTTP server answering with `respond`.
pub struct ScriptedServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Captured>>>,
}

impl ScriptedServer {
    pub fn start<F>(respond: F) -> Self
    where
        F: Fn(usize, &Captured) -> (u16, String) + Send + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&requests);
        std::thread::spawn(move || {
            for (k, stream) in listener.incoming().enumerate() {
                let Ok(mut stream) = stream else { break };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    continue;
                }
                let path = line.split_whitespace().nth(1).unwrap_or("/").to_owned();
                let mut headers = Vec::new();
                loop {
                    let mut h = String::new();
                    reader.read_line(&mut h).unwrap();
                    let h = h.trim_end();
                    if h.is_empty() {
                        break;
                    }
                    if let Some((k, v)) = h.split_once(':') {
                        headers.push((k.trim().to_owned(), v.trim().to_owned()));
                    }
                }
                let len: usize = headers
                    .iter()
                    .find(|(k, _)| k.eq_ignore_ascii_case("content-length"))
                    .and_then(|(_, v)| v.parse().ok())
                    .unwrap_or(0);
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                let captured = Captured { path, headers, body: String::from_utf8(body).unwrap() };
                let (status, reply) = respond(k, &captured);
                log.lock().unwrap().push(captured);
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                    reply.len()
                );
            }
        });
        ScriptedServer { url, requests }
    }

    pub fn captured(&self) -> Vec<Captured> {
        self.requests.lock().unwrap().clone()
    }
}

/// A local URL nothing listens on.
pub fn closed_port_url() -> String {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", l.local_addr().unwrap());
    drop(l);
    url
}

use cqpitfall::cqgen::{DefinitionExamples, MockBackend, TemplateRegistry, BUNDLED_TEMPLATES};
use cqpitfall::dataset::{SplitSpec, REFERENCE_TRAIN_FRACTION};
use cqpitfall::pipeline::{build, load_ontology, BuildConfig, BuildInputs, BuildOutcome};
use cqpitfall::seed::sha256_hex;

pub const GOLDEN_SEED: u64 = 42;
pub const GOLDEN_FILES: [&str; 6] = [
    "cases.jsonl",
    "dataset.jsonl",
    "train.jsonl",
    "test.jsonl",
    "stats.txt",
    "manifest.json",
];

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn golden_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/run")
}

/// The toy-ontology build with the mock backend at [`GOLDEN_SEED`].
pub fn golden_build(out: &std::path::Path) -> BuildOutcome {
    let ontologies = vec![load_ontology(&fixture_path("african_wildlife.ofn")).unwrap()];
    let config = BuildConfig::new(
        GOLDEN_SEED,
        SplitSpec::Random { train_fraction: REFERENCE_TRAIN_FRACTION, seed: GOLDEN_SEED, stratify: false },
    );
    let registry = TemplateRegistry::bundled();
    let examples = DefinitionExamples::bundled();
    let inputs = BuildInputs {
        ontologies: &ontologies,
        config: &config,
        registry: &registry,
        registry_sha256: sha256_hex(BUNDLED_TEMPLATES.as_bytes()),
        examples: &examples,
        backend: &MockBackend,
    };
    build(&inputs, out).unwrap()
}
