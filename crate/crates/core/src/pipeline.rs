//! End-to-end build from ontology files to dataset files.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cqgen::{
    CaseArtifacts, DefinitionExamples, GenerationConfig, GenerationError, Generator,
    OntologyContext, TemplateRegistry, TextBackend,
};
use crate::dataset::{
    assemble, config_hash, count_by_type, export_jsonl, split, stats, write_json_pretty,
    write_jsonl, DatasetManifest, Exclusion, FineTuningMetadata, ManifestCounts, SplitError,
    SplitSpec, TOOL_NAME, TOOL_VERSION,
};
use crate::misalignment::{classify_and_inject, CaseManifestEntry, MisalignmentCase, TypeWeights};
use crate::ontology::{extract_terms, parse_ontology, sample_terms, ExtractionFilter, Ontology, ParseError};
use crate::seed::{derive_seed, sha256_hex};

pub const CASES_FILE: &str = "cases.jsonl";
pub const DATASET_FILE: &str = "dataset.jsonl";
pub const TRAIN_FILE: &str = "train.jsonl";
pub const TEST_FILE: &str = "test.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const STATS_FILE: &str = "stats.txt";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}:{column}: {kind}", line = .source.line, column = .source.column, kind = .source.kind)]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("{0}")]
    Output(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_owned(),
        source,
    }
}

/// A parsed ontology with the hash of its source text.
#[derive(Debug, Clone)]
pub struct LoadedOntology {
    pub ontology: Ontology,
    pub source_sha256: String,
}

/// Ontology id used for a file: its stem.
pub fn ontology_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "ontology".into())
}

pub fn load_ontology(path: &Path) -> Result<LoadedOntology, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let ontology = parse_ontology(&text, &ontology_id(path)).map_err(|source| PipelineError::Parse {
        path: path.to_owned(),
        source,
    })?;
    Ok(LoadedOntology {
        ontology,
        source_sha256: sha256_hex(text.as_bytes()),
    })
}

/// Warnings sidecar lines: `file<TAB>line<TAB>reason`.
pub fn warning_lines(file: &str, ontology: &Ontology) -> Vec<String> {
    ontology
        .warnings
        .iter()
        .map(|w| format!("{file}\t{}\t{}", w.line, w.reason))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub master_seed: u64,
    pub generation: GenerationConfig,
    pub split: SplitSpec,
    pub extraction: ExtractionFilter,
    /// Per-ontology term cap applied before classification.
    pub sample_cap: Option<usize>,
    pub weights: TypeWeights,
}

impl BuildConfig {
    pub fn new(master_seed: u64, split: SplitSpec) -> Self {
        BuildConfig {
            master_seed,
            generation: GenerationConfig {
                master_seed,
                ..GenerationConfig::default()
            },
            split,
            extraction: ExtractionFilter::default(),
            sample_cap: None,
            weights: TypeWeights::default(),
        }
    }
}

/// Cases for every term with at least one axiom, ontology by ontology.
/// The second vector holds each case's ontology index.
pub fn classify(ontologies: &[LoadedOntology], config: &BuildConfig) -> (Vec<MisalignmentCase>, Vec<usize>) {
    let mut cases = Vec::new();
    let mut owner = Vec::new();
    for (k, lo) in ontologies.iter().enumerate() {
        let o = &lo.ontology;
        let mut terms = extract_terms(o, config.extraction);
        if let Some(cap) = config.sample_cap {
            terms = sample_terms(&terms, cap, derive_seed(config.master_seed, &format!("sample/{}", o.id)));
        }
        for term in terms {
            if term.axioms.is_empty() {
                log::info!("{}: no axioms, not used", term.term);
                continue;
            }
            let case = classify_and_inject(&term, config.master_seed, &config.weights)
                .expect("assigned type is drawn from the eligible set");
            cases.push(case);
            owner.push(k);
        }
    }
    (cases, owner)
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub manifest: DatasetManifest,
    pub stats_text: String,
    pub failures: Vec<Exclusion>,
    /// The text backend could not be reached for at least one case.
    pub backend_unreachable: bool,
}

/// Shared inputs of a build.
pub struct BuildInputs<'a> {
    pub ontologies: &'a [LoadedOntology],
    pub config: &'a BuildConfig,
    pub registry: &'a TemplateRegistry,
    /// SHA-256 of the template file, or of the bundled one.
    pub registry_sha256: String,
    pub examples: &'a DefinitionExamples,
    pub backend: &'a dyn TextBackend,
}

#[derive(Serialize)]
struct HashedConfig<'a> {
    ontologies: Vec<BTreeMap<&'static str, &'a str>>,
    templates_sha256: &'a str,
    backend: &'a str,
    build: &'a BuildConfig,
}

pub fn build(inputs: &BuildInputs<'_>, out_dir: &Path) -> Result<BuildOutcome, PipelineError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let config = inputs.config;
    let contexts: Vec<OntologyContext> = inputs
        .ontologies
        .iter()
        .map(|o| OntologyContext::from_ontology(&o.ontology))
        .collect();
    let (cases, owner) = classify(inputs.ontologies, config);

    let entries: Vec<CaseManifestEntry> = cases
        .iter()
        .zip(&owner)
        .map(|(c, &k)| CaseManifestEntry::from_case(c, &contexts[k].prefixes))
        .collect();
    let cases_path = out_dir.join(CASES_FILE);
    write_jsonl(&entries, io::BufWriter::new(fs::File::create(&cases_path).map_err(io_err(&cases_path))?))
        .map_err(|e| PipelineError::Output(e.to_string()))?;

    let generator = Generator {
        registry: inputs.registry,
        examples: inputs.examples,
        config: &config.generation,
        backend: inputs.backend,
    };
    let results: Vec<Result<CaseArtifacts, GenerationError>> =
        generator.all(&cases, |i| &contexts[owner[i]]);
    let backend_unreachable = results
        .iter()
        .any(|r| matches!(r, Err(e) if e.is_unreachable()));

    let assembly = assemble(
        cases.iter().zip(&results).zip(&owner).map(|((c, r), &k)| {
            (
                c,
                r.as_ref().map_err(ToString::to_string),
                &contexts[k].prefixes,
            )
        }),
        config.generation.n,
        config.master_seed,
    );
    let (train, test) = split(&assembly.triples, &config.split)?;

    let mut files = BTreeMap::new();
    for (name, rows) in [
        (DATASET_FILE, &assembly.triples),
        (TRAIN_FILE, &train),
        (TEST_FILE, &test),
    ] {
        let path = out_dir.join(name);
        export_jsonl(rows, &path).map_err(|e| PipelineError::Output(format!("{}: {e}", path.display())))?;
    }

    let ontologies: Vec<BTreeMap<&'static str, &str>> = inputs
        .ontologies
        .iter()
        .map(|o| BTreeMap::from([("id", o.ontology.id.as_str()), ("sha256", o.source_sha256.as_str())]))
        .collect();
    let (config_value, hash) = config_hash(&HashedConfig {
        ontologies,
        templates_sha256: &inputs.registry_sha256,
        backend: inputs.backend.id(),
        build: config,
    });

    let corpus = stats(&assembly.triples);
    let stats_text = format!(
        "{TOOL_NAME} {TOOL_VERSION}  config sha256:{hash}\n\n{}",
        corpus.render()
    );
    let stats_path = out_dir.join(STATS_FILE);
    fs::write(&stats_path, &stats_text).map_err(io_err(&stats_path))?;

    for name in [CASES_FILE, DATASET_FILE, TRAIN_FILE, TEST_FILE, STATS_FILE] {
        let path = out_dir.join(name);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        files.insert(name.to_owned(), sha256_hex(&bytes));
    }

    let manifest = DatasetManifest {
        tool: TOOL_NAME.to_owned(),
        tool_version: TOOL_VERSION.to_owned(),
        config_hash: hash,
        config: config_value,
        master_seed: config.master_seed,
        generation: config.generation.clone(),
        split: config.split.clone(),
        counts: ManifestCounts {
            cases: cases.len(),
            triples: assembly.triples.len(),
            excluded: assembly.exclusions.len(),
            train: train.len(),
            test: test.len(),
            by_type: count_by_type(&assembly.triples),
        },
        exclusions: assembly.exclusions.clone(),
        files,
        fine_tuning: FineTuningMetadata::default(),
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    write_json_pretty(&manifest, &manifest_path).map_err(io_err(&manifest_path))?;

    Ok(BuildOutcome {
        manifest,
        stats_text,
        failures: assembly.exclusions,
        backend_unreachable,
    })
}
