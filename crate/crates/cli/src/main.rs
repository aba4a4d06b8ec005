//! Command-line front end: ingest, classify, build, eval, report, sweep.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cqpitfall::cqgen::{
    DefinitionExamples, GenerationConfig, HttpBackendConfig, HttpTextBackend, MockBackend,
    TemplateRegistry, TextBackend, BUNDLED_TEMPLATES, DEFAULT_MAX_RETRIES, DEFAULT_N,
};
use cqpitfall::dataset::{
    import_jsonl, read_jsonl, stats, write_json_pretty, write_jsonl, SplitSpec,
    REFERENCE_TRAIN_FRACTION,
};
use cqpitfall::eval::{
    evaluate_suite, sweep, tau_grid, Aggregation, CsMode, EmbeddingSimilarity, EvalConfig,
    EvalError, ExactMatch, GenerationRecord, GtMode, HttpEmbedder, MetricsReport, MissingPolicy,
    Similarity, SimilarityError, TokenJaccard, DEFAULT_TAU, ENV_EMBED_URL,
};
use cqpitfall::misalignment::{CaseManifestEntry, TypeWeights};
use cqpitfall::ontology::ExtractionFilter;
use cqpitfall::pipeline::{self, BuildConfig, BuildInputs, LoadedOntology};
use cqpitfall::seed::sha256_hex;

const EXIT_USAGE: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_UNREACHABLE: u8 = 3;

#[derive(Parser)]
#[command(name = "cqpitfall", version, about = "Build semantic-pitfall CQ datasets from OWL ontologies and score generated CQs")]
struct Cli {
    /// Log verbosity (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse ontologies and write normalized term records.
    Ingest(IngestArgs),
    /// Assign misalignment types and write the cases manifest.
    Classify(ClassifyArgs),
    /// Run the full pipeline and write the dataset.
    Build(BuildArgs),
    /// Score generated CQs against a dataset split.
    Eval(EvalArgs),
    /// Print corpus statistics for a dataset file.
    Report(ReportArgs),
    /// Score generated CQs over a range of thresholds.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Ontology files in OWL functional syntax.
    #[arg(required = true)]
    ontologies: Vec<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Extraction {
    SubjectOnly,
    ExcludeHierarchyDuplicates,
}

impl From<Extraction> for ExtractionFilter {
    fn from(e: Extraction) -> Self {
        match e {
            Extraction::SubjectOnly => ExtractionFilter::SubjectOnly,
            Extraction::ExcludeHierarchyDuplicates => ExtractionFilter::ExcludeHierarchyDuplicates,
        }
    }
}

#[derive(Args)]
struct SelectionArgs {
    #[arg(required = true)]
    ontologies: Vec<PathBuf>,
    /// Master seed; every random choice derives from it.
    #[arg(long)]
    seed: u64,
    /// Keep at most this many terms per ontology (uniform sample).
    #[arg(long)]
    sample_cap: Option<usize>,
    #[arg(long, value_enum, default_value = "subject-only")]
    extraction: Extraction,
    /// Relative weights of types 1 to 4, e.g. "1,1,1,3". Uniform by default.
    #[arg(long, value_parser = parse_weights)]
    type_weights: Option<TypeWeights>,
}

fn parse_weights(s: &str) -> Result<TypeWeights, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let arr: [f64; 4] = parts
        .try_into()
        .map_err(|_| "expected four comma-separated weights".to_string())?;
    if arr.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err("weights must be finite and non-negative".into());
    }
    Ok(TypeWeights(arr))
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    selection: SelectionArgs,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    /// Deterministic offline backend.
    Mock,
    /// HTTP endpoint from CQPITFALL_GEN_URL (see README).
    Http,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    selection: SelectionArgs,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "mock")]
    backend: BackendKind,
    /// CQs per axiom.
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,
    /// Sampling temperature; omitted means the backend default.
    #[arg(long)]
    temperature: Option<f64>,
    /// Extra attempts when a response has the wrong number of CQs.
    #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
    max_retries: u32,
    /// Concurrent backend calls.
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    /// Template registry file replacing the bundled one.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Fraction of records used for training (random split).
    #[arg(long, default_value_t = REFERENCE_TRAIN_FRACTION, conflicts_with = "holdout")]
    train_fraction: f64,
    /// Cut the random split per (ontology, type) group.
    #[arg(long, conflicts_with = "holdout")]
    stratify: bool,
    /// Put every record of this ontology id in the test split instead.
    #[arg(long)]
    holdout: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityKind {
    Exact,
    Jaccard,
    /// Embedding service from CQPITFALL_EMBED_URL.
    Embed,
}

#[derive(Clone, Copy, ValueEnum)]
enum GtArg {
    SpOnly,
    SpPlusNormal,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggArg {
    Micro,
    Macro,
}

#[derive(Clone, Copy, ValueEnum)]
enum CsArg {
    PerQuestion,
    PerTerm,
}

#[derive(Clone, Copy, ValueEnum)]
enum MissingArg {
    Skip,
    CountAsZero,
}

#[derive(Args)]
struct ScoringArgs {
    /// Dataset JSONL (usually test.jsonl).
    #[arg(long)]
    dataset: PathBuf,
    /// Generations JSONL: {"term_iri": ..., "questions": [...]} per line.
    #[arg(long)]
    generations: PathBuf,
    #[arg(long, value_enum, default_value = "jaccard")]
    similarity: SimilarityKind,
    #[arg(long, value_enum, default_value = "sp-only")]
    references: GtArg,
    #[arg(long, value_enum, default_value = "micro")]
    aggregation: AggArg,
    #[arg(long, value_enum, default_value = "per-question")]
    cs_mode: CsArg,
    /// What to do with terms that have no generations.
    #[arg(long, value_enum, default_value = "skip")]
    missing: MissingArg,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Similarity threshold.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scoring: ScoringArgs,
    #[arg(long, default_value_t = 0.5)]
    tau_start: f64,
    #[arg(long, default_value_t = 0.9)]
    tau_end: f64,
    #[arg(long, default_value_t = 0.05)]
    tau_step: f64,
}

#[derive(Args)]
struct ReportArgs {
    /// Dataset JSONL.
    dataset: PathBuf,
    /// Per-type totals to compare against, e.g. "266,265,220,812".
    #[arg(long)]
    compare: Option<String>,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: EXIT_USAGE,
            error: e.into(),
        }
    }
}

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log).init();
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Classify(a) => classify(a),
        Command::Build(a) => build(a),
        Command::Eval(a) => eval(a),
        Command::Report(a) => report(a),
        Command::Sweep(a) => run_sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn ingest(a: IngestArgs) -> Result<u8, Failure> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut summary = Vec::new();
    let mut warnings = Vec::new();
    let mut failed = 0;
    for path in &a.ontologies {
        match pipeline::load_ontology(path) {
            Ok(lo) => {
                let o = &lo.ontology;
                write_json_pretty(o, &a.out.join(format!("{}.terms.json", o.id)))?;
                warnings.extend(pipeline::warning_lines(&path.display().to_string(), o));
                println!(
                    "{}: {} classes, {} properties, {} axioms, {} warnings",
                    path.display(),
                    o.class_count(),
                    o.property_count(),
                    o.axiom_count(),
                    o.warnings.len()
                );
                summary.push(serde_json::json!({
                    "file": path.display().to_string(),
                    "ontology_id": o.id,
                    "sha256": lo.source_sha256,
                    "classes": o.class_count(),
                    "properties": o.property_count(),
                    "axioms": o.axiom_count(),
                    "warnings": o.warnings.len(),
                }));
            }
            Err(e) => {
                eprintln!("error: {e}");
                failed += 1;
            }
        }
    }
    write_json_pretty(&summary, &a.out.join("terms-manifest.json"))?;
    let mut text = warnings.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    fs::write(a.out.join("warnings.tsv"), text)?;
    Ok(if failed > 0 { EXIT_USAGE } else { 0 })
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<LoadedOntology>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        let lo = pipeline::load_ontology(p)?;
        if out.iter().any(|o: &LoadedOntology| o.ontology.id == lo.ontology.id) {
            return Err(anyhow!("two inputs share the ontology id {:?}", lo.ontology.id).into());
        }
        for w in pipeline::warning_lines(&p.display().to_string(), &lo.ontology) {
            log::warn!("skipped: {w}");
        }
        out.push(lo);
    }
    Ok(out)
}

fn build_config(s: &SelectionArgs, split: SplitSpec) -> BuildConfig {
    let mut c = BuildConfig::new(s.seed, split);
    c.sample_cap = s.sample_cap;
    c.extraction = s.extraction.into();
    if let Some(w) = s.type_weights {
        c.weights = w;
    }
    c
}

fn classify(a: ClassifyArgs) -> Result<u8, Failure> {
    let ontologies = load_all(&a.selection.ontologies)?;
    let config = build_config(
        &a.selection,
        SplitSpec::Random {
            train_fraction: REFERENCE_TRAIN_FRACTION,
            seed: a.selection.seed,
            stratify: false,
        },
    );
    let (cases, owner) = pipeline::classify(&ontologies, &config);
    let entries: Vec<CaseManifestEntry> = cases
        .iter()
        .zip(&owner)
        .map(|(c, &k)| CaseManifestEntry::from_case(c, &ontologies[k].ontology.prefixes))
        .collect();
    fs::create_dir_all(&a.out)?;
    let path = a.out.join(pipeline::CASES_FILE);
    write_jsonl(&entries, fs::File::create(&path)?)?;
    let mut counts = [0usize; 4];
    for c in &cases {
        counts[usize::from(c.assigned_type.number() - 1)] += 1;
    }
    println!(
        "{} cases (type 1: {}, type 2: {}, type 3: {}, type 4: {}) -> {}",
        cases.len(),
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        path.display()
    );
    Ok(0)
}

fn build(a: BuildArgs) -> Result<u8, Failure> {
    if a.n == 0 {
        return Err(anyhow!("--n must be at least 1").into());
    }
    let split = match &a.holdout {
        Some(h) => SplitSpec::LeaveOneOntologyOut { holdout: h.clone() },
        None => SplitSpec::Random {
            train_fraction: a.train_fraction,
            seed: a.selection.seed,
            stratify: a.stratify,
        },
    };
    let (registry, registry_sha256) = match &a.templates {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let r = TemplateRegistry::from_toml(&text).with_context(|| p.display().to_string())?;
            (r, sha256_hex(text.as_bytes()))
        }
        None => (TemplateRegistry::bundled(), sha256_hex(BUNDLED_TEMPLATES.as_bytes())),
    };
    let backend: Box<dyn TextBackend> = match a.backend {
        BackendKind::Mock => Box::new(MockBackend),
        BackendKind::Http => Box::new(HttpTextBackend::new(HttpBackendConfig::from_env()?)),
    };
    let ontologies = load_all(&a.selection.ontologies)?;
    let mut config = build_config(&a.selection, split);
    config.generation = GenerationConfig {
        n: a.n,
        temperature: a.temperature,
        backend_id: backend.id().to_owned(),
        master_seed: a.selection.seed,
        max_retries: a.max_retries,
        max_in_flight: a.max_in_flight,
    };
    let examples = DefinitionExamples::bundled();
    let outcome = pipeline::build(
        &BuildInputs {
            ontologies: &ontologies,
            config: &config,
            registry: &registry,
            registry_sha256,
            examples: &examples,
            backend: backend.as_ref(),
        },
        &a.out,
    )?;
    let c = &outcome.manifest.counts;
    println!(
        "{} cases, {} records ({} train / {} test), {} excluded -> {}",
        c.cases,
        c.triples,
        c.train,
        c.test,
        c.excluded,
        a.out.display()
    );
    print!("{}", outcome.stats_text);
    if outcome.backend_unreachable {
        return Err(fail(
            EXIT_UNREACHABLE,
            anyhow!("text backend unreachable; {} case(s) failed", outcome.failures.len()),
        ));
    }
    if !outcome.failures.is_empty() {
        for f in &outcome.failures {
            eprintln!("failed: {} ({})", f.term_iri, f.reason);
        }
        return Err(fail(
            EXIT_PARTIAL,
            anyhow!("{} case(s) failed generation", outcome.failures.len()),
        ));
    }
    Ok(0)
}

fn similarity(kind: SimilarityKind) -> Result<Box<dyn Similarity>, Failure> {
    Ok(match kind {
        SimilarityKind::Exact => Box::new(ExactMatch),
        SimilarityKind::Jaccard => Box::new(TokenJaccard),
        SimilarityKind::Embed => {
            let e = HttpEmbedder::from_env()
                .ok_or_else(|| anyhow!("--similarity embed needs {ENV_EMBED_URL}"))?;
            Box::new(EmbeddingSimilarity::new(e))
        }
    })
}

fn eval_config(s: &ScoringArgs, tau: f64, sim: &dyn Similarity) -> EvalConfig {
    EvalConfig {
        tau,
        backend_id: sim.id().to_owned(),
        aggregation: match s.aggregation {
            AggArg::Micro => Aggregation::Micro,
            AggArg::Macro => Aggregation::Macro,
        },
        gt_mode: match s.references {
            GtArg::SpOnly => GtMode::SpOnly,
            GtArg::SpPlusNormal => GtMode::SpPlusNormal,
        },
        missing: match s.missing {
            MissingArg::Skip => MissingPolicy::Skip,
            MissingArg::CountAsZero => MissingPolicy::CountAsZero,
        },
        cs_mode: match s.cs_mode {
            CsArg::PerQuestion => CsMode::PerQuestion,
            CsArg::PerTerm => CsMode::PerTerm,
        },
    }
}

fn scoring_inputs(
    s: &ScoringArgs,
) -> Result<(Vec<cqpitfall::dataset::DatasetTriple>, Vec<GenerationRecord>), Failure> {
    let triples = import_jsonl(&s.dataset).with_context(|| s.dataset.display().to_string())?;
    let generations: Vec<GenerationRecord> = read_jsonl(
        fs::File::open(&s.generations).with_context(|| s.generations.display().to_string())?,
    )
    .with_context(|| s.generations.display().to_string())?;
    Ok((triples, generations))
}

fn eval_failure(e: EvalError) -> Failure {
    match e {
        EvalError::Similarity(SimilarityError::Unreachable(_)) => fail(EXIT_UNREACHABLE, e.into()),
        other => other.into(),
    }
}

fn write_report(report: &MetricsReport, dir: &Path, stem: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{stem}.txt")), report.render())?;
    write_json_pretty(report, &dir.join(format!("{stem}.json")))?;
    Ok(())
}

fn eval(a: EvalArgs) -> Result<u8, Failure> {
    if !a.tau.is_finite() {
        return Err(anyhow!("--tau must be a number").into());
    }
    let (triples, generations) = scoring_inputs(&a.scoring)?;
    let sim = similarity(a.scoring.similarity)?;
    let config = eval_config(&a.scoring, a.tau, sim.as_ref());
    let report = evaluate_suite(&triples, &generations, &config, sim.as_ref()).map_err(eval_failure)?;
    write_report(&report, &a.scoring.out, "report")?;
    print!("{}", report.render());
    Ok(0)
}

fn run_sweep(a: SweepArgs) -> Result<u8, Failure> {
    if a.tau_step <= 0.0 || a.tau_end < a.tau_start {
        return Err(anyhow!("need --tau-step > 0 and --tau-end >= --tau-start").into());
    }
    let (triples, generations) = scoring_inputs(&a.scoring)?;
    let sim = similarity(a.scoring.similarity)?;
    let config = eval_config(&a.scoring, a.tau_start, sim.as_ref());
    let taus = tau_grid(a.tau_start, a.tau_end, a.tau_step);
    let reports = sweep(&triples, &generations, &config, sim.as_ref(), &taus).map_err(eval_failure)?;
    for (tau, r) in taus.iter().zip(&reports) {
        write_report(r, &a.scoring.out, &format!("report-tau-{tau:.2}"))?;
        println!("{}", r.render());
    }
    Ok(0)
}

fn report(a: ReportArgs) -> Result<u8, Failure> {
    let triples = import_jsonl(&a.dataset).with_context(|| a.dataset.display().to_string())?;
    let s = stats(&triples);
    print!("{}", s.render());
    if let Some(spec) = &a.compare {
        let values: Vec<usize> = spec
            .split(',')
            .map(|v| v.trim().parse())
            .collect::<Result<_, _>>()
            .context("--compare expects four integers")?;
        let Ok(arr) = <[usize; 4]>::try_from(values) else {
            return Err(anyhow!("--compare expects four integers").into());
        };
        println!();
        print!("{}", s.compare_type_totals(arr));
    }
    Ok(0)
}
