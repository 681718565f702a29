//! End-to-end pipeline: ledger, agency, fine-tuning and appearance bias per
//! document, then corpus aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use gaze_core::agency::{agency_bias, extract_gendered_arguments, AgencyResult, GenderedArgument};
use gaze_core::embeddings::{
    build_finetune_space, finetune, EmbeddingError, EmbeddingSpace, FinetuneConfig,
};
use gaze_core::ledger::{build_ledger_with, GenderLedger, LedgerConfig};
use gaze_core::model::{AnnotatedDocument, DocMetadata, DocumentError};
use gaze_core::stats::{frequency_table, summarize, BiasReport, CorpusSummary};
use gaze_core::weat::{appearance_bias, select_entity_weat_tokens, WeatError, WeatReport, WordSets};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canonical::{to_canonical_json, write_atomic};
use crate::interchange::parse_annotation_document;
use crate::metadata::{read_metadata_csv, MetadataError};
use crate::reports::{frequency_csv, summary_csv, AgencyReport, LedgerReport};
use crate::vectors::{format_vectors, load_vectors, VectorError};
use crate::wordsets::{load_word_sets, WordSetError};

/// Seed for one document's RNG streams, independent of scheduling order.
pub fn doc_seed(run_seed: u64, doc_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(run_seed.to_le_bytes());
    h.update(doc_id.as_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

/// Everything shared by the documents of one run.
#[derive(Debug, Clone)]
pub struct AnalysisContext {
    pub pretrained: EmbeddingSpace,
    pub word_sets: WordSets,
    pub ledger: LedgerConfig,
    /// `seed` here is the run seed; each document derives its own.
    pub finetune: FinetuneConfig,
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("embedding: {0}")]
    Embedding(#[from] EmbeddingError),
    #[error("weat: {0}")]
    Weat(#[from] WeatError),
    #[error("doc_id {0:?} cannot be used as a file name")]
    BadDocId(String),
    #[error("doc_id {0:?} appears in more than one file")]
    DuplicateDocId(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct DocumentAnalysis {
    pub ledger: GenderLedger,
    pub arguments: Vec<GenderedArgument>,
    pub agency: AgencyResult,
    pub word_sets: WordSets,
    pub weat: WeatReport,
    pub finetune: FinetuneConfig,
    pub finetuned: EmbeddingSpace,
    pub report: BiasReport,
}

pub fn analyze_document(
    doc: &AnnotatedDocument,
    ctx: &AnalysisContext,
) -> Result<DocumentAnalysis, AnalysisError> {
    let ledger = build_ledger_with(doc, &ctx.ledger);
    let arguments = extract_gendered_arguments(doc, &ledger);
    let agency = agency_bias(&arguments);
    if let Err(cause) = agency.agency_bias {
        log::warn!("{}: agency bias undefined ({cause})", doc.doc_id());
    }

    let word_sets = ctx.word_sets.augment(&select_entity_weat_tokens(&ledger));
    let cfg = FinetuneConfig {
        seed: doc_seed(ctx.finetune.seed, doc.doc_id()),
        ..ctx.finetune
    };
    let pre = build_finetune_space(doc, &ledger, &ctx.pretrained, &cfg, &word_sets.all_words())?;
    let run = finetune(doc, &pre, &cfg)?;
    let weat = appearance_bias(&pre, &run.space, &word_sets)?;
    log::debug!(
        "{}: {} steps, weat {:.4} -> {:.4}",
        doc.doc_id(),
        run.steps,
        weat.weat_pre,
        weat.weat_post
    );

    let report = BiasReport {
        doc_id: doc.doc_id().into(),
        agency_bias: agency.bias(),
        appearance_bias: weat.appearance_bias,
        female_mentions: agency.female_arguments,
        male_mentions: agency.male_arguments,
        female_agentivity: agency.female_agentivity,
        male_agentivity: agency.male_agentivity,
        metadata: doc.metadata().clone(),
    };
    Ok(DocumentAnalysis {
        ledger,
        arguments,
        agency,
        word_sets,
        weat,
        finetune: cfg,
        finetuned: run.space.without_output(),
        report,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub annotations: PathBuf,
    pub metadata: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub wordsets: PathBuf,
    pub finetune: FinetuneConfig,
    /// Vector dimension when no pretrained file is given.
    pub dim: usize,
    pub min_mentions: usize,
    pub out: PathBuf,
    pub jobs: usize,
    pub save_vectors: bool,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("annotation directory {path}: {source}")]
    Annotations {
        path: String,
        source: std::io::Error,
    },
    #[error("no annotation files (*.json) in {0}")]
    NoDocuments(String),
    #[error("word sets: {0}")]
    WordSets(#[from] WordSetError),
    #[error("vectors: {0}")]
    Vectors(#[from] VectorError),
    #[error("metadata: {0}")]
    Metadata(#[from] MetadataError),
    #[error("metadata {path}: {source}")]
    MetadataIo {
        path: String,
        source: std::io::Error,
    },
    #[error("output directory {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
    #[error("embedding: {0}")]
    Embedding(#[from] EmbeddingError),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentFailure {
    pub file: String,
    pub doc_id: Option<String>,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOutcome {
    pub succeeded: Vec<String>,
    pub failures: Vec<DocumentFailure>,
}

impl AnalyzeOutcome {
    pub fn all_failed(&self) -> bool {
        self.succeeded.is_empty()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AnalysisError + '_ {
    move |source| AnalysisError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn list_files(dir: &Path, suffix: &str) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p
                    .file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.ends_with(suffix))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn valid_doc_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && !id.contains(['/', '\\', '\0'])
        && id.chars().all(|c| !c.is_control())
}

pub fn load_context(cfg: &RunConfig) -> Result<AnalysisContext, ConfigError> {
    let word_sets = load_word_sets(&cfg.wordsets)?;
    let pretrained = match &cfg.vectors {
        Some(p) => load_vectors(p)?,
        None => EmbeddingSpace::new(cfg.dim)?,
    };
    Ok(AnalysisContext {
        pretrained,
        word_sets,
        ledger: LedgerConfig {
            min_mentions: cfg.min_mentions,
        },
        finetune: cfg.finetune,
    })
}

fn write_document_outputs(
    out: &Path,
    save_vectors: bool,
    a: &DocumentAnalysis,
) -> Result<(), AnalysisError> {
    let id = &a.report.doc_id;
    let files = [
        (format!("{id}.report.json"), to_canonical_json(&a.report)),
        (
            format!("{id}.agency.json"),
            to_canonical_json(&AgencyReport::new(id, &a.agency)),
        ),
        (
            format!("{id}.ledger.json"),
            to_canonical_json(&LedgerReport::from(&a.ledger)),
        ),
        (format!("{id}.weat.json"), to_canonical_json(&a.weat)),
    ];
    for (name, body) in files {
        let p = out.join(name);
        write_atomic(&p, body.as_bytes()).map_err(io_err(&p))?;
    }
    if save_vectors {
        let dir = out.join("vectors");
        let p = dir.join(format!("{id}.vec"));
        write_atomic(&p, format_vectors(&a.finetuned).as_bytes()).map_err(io_err(&p))?;
        let sidecar = serde_json::json!({
            "doc_id": id,
            "dim": a.finetuned.dim(),
            "seed": a.finetune.seed,
            "config": a.finetune,
            "words": a.finetuned.len(),
        });
        let p = dir.join(format!("{id}.vec.json"));
        write_atomic(&p, to_canonical_json(&sidecar).as_bytes()).map_err(io_err(&p))?;
    }
    Ok(())
}

fn load_documents(
    files: &[PathBuf],
    metadata: &BTreeMap<String, DocMetadata>,
) -> Vec<Result<AnnotatedDocument, AnalysisError>> {
    let mut docs: Vec<Result<AnnotatedDocument, AnalysisError>> = files
        .par_iter()
        .map(|f| {
            let bytes = fs::read(f).map_err(io_err(f))?;
            let doc = parse_annotation_document(&bytes)?;
            if !valid_doc_id(doc.doc_id()) {
                return Err(AnalysisError::BadDocId(doc.doc_id().into()));
            }
            Ok(match metadata.get(doc.doc_id()) {
                Some(m) => doc.with_metadata(m.clone()),
                None => doc,
            })
        })
        .collect();
    let mut seen = BTreeSet::new();
    for d in &mut docs {
        let dup = match d {
            Ok(doc) => !seen.insert(doc.doc_id().to_string()),
            Err(_) => false,
        };
        if dup {
            let id = d.as_ref().map(|x| x.doc_id().to_string()).unwrap_or_default();
            *d = Err(AnalysisError::DuplicateDocId(id));
        }
    }
    docs
}

fn failed_doc_id(e: &AnalysisError) -> Option<String> {
    match e {
        AnalysisError::Document(d) if !d.doc_id().is_empty() => Some(d.doc_id().to_string()),
        AnalysisError::BadDocId(id) | AnalysisError::DuplicateDocId(id) => Some(id.clone()),
        _ => None,
    }
}

/// Runs `analyze` over every `*.json` file in the annotation directory.
/// Document failures are collected, never fatal; configuration problems
/// are.
pub fn run_analyze(cfg: &RunConfig) -> Result<AnalyzeOutcome, ConfigError> {
    let files = list_files(&cfg.annotations, ".json").map_err(|source| ConfigError::Annotations {
        path: cfg.annotations.display().to_string(),
        source,
    })?;
    if files.is_empty() {
        return Err(ConfigError::NoDocuments(cfg.annotations.display().to_string()));
    }
    let metadata = match &cfg.metadata {
        Some(p) => {
            let f = fs::File::open(p).map_err(|source| ConfigError::MetadataIo {
                path: p.display().to_string(),
                source,
            })?;
            read_metadata_csv(f)?
        }
        None => BTreeMap::new(),
    };
    let ctx = load_context(cfg)?;
    let out_err = |source| ConfigError::Output {
        path: cfg.out.display().to_string(),
        source,
    };
    fs::create_dir_all(&cfg.out).map_err(out_err)?;
    if cfg.save_vectors {
        fs::create_dir_all(cfg.out.join("vectors")).map_err(out_err)?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()?;
    let results: Vec<Result<String, (Option<String>, AnalysisError)>> = pool.install(|| {
        load_documents(&files, &metadata)
            .into_par_iter()
            .map(|doc| {
                let doc = doc.map_err(|e| (failed_doc_id(&e), e))?;
                let id = doc.doc_id().to_string();
                let analysis = analyze_document(&doc, &ctx)
                    .and_then(|a| write_document_outputs(&cfg.out, cfg.save_vectors, &a).map(|()| a))
                    .map_err(|e| (Some(id.clone()), e))?;
                log::info!(
                    "{id}: agency {:?}, appearance {:.4}",
                    analysis.report.agency_bias,
                    analysis.report.appearance_bias
                );
                Ok(id)
            })
            .collect()
    });

    let mut outcome = AnalyzeOutcome::default();
    for (file, r) in files.iter().zip(results) {
        match r {
            Ok(id) => outcome.succeeded.push(id),
            Err((doc_id, e)) => {
                log::error!("{}: {e}", file.display());
                outcome.failures.push(DocumentFailure {
                    file: file
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                    doc_id,
                    error: e.to_string(),
                });
            }
        }
    }
    let p = cfg.out.join("errors.json");
    write_atomic(&p, to_canonical_json(&outcome.failures).as_bytes()).map_err(out_err)?;
    Ok(outcome)
}

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("no report files found")]
    NoReports,
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Collects `*.report.json` files from the given files and directories.
pub fn collect_report_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, AggregateError> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            files.extend(list_files(p, ".report.json").map_err(|source| AggregateError::Io {
                path: p.display().to_string(),
                source,
            })?);
        } else {
            files.push(p.clone());
        }
    }
    files.sort();
    files.dedup();
    Ok(files)
}

pub fn read_reports(files: &[PathBuf]) -> Result<Vec<BiasReport>, AggregateError> {
    let mut reports = files
        .iter()
        .map(|f| {
            let bytes = fs::read(f).map_err(|source| AggregateError::Io {
                path: f.display().to_string(),
                source,
            })?;
            serde_json::from_slice(&bytes).map_err(|source| AggregateError::Json {
                path: f.display().to_string(),
                source,
            })
        })
        .collect::<Result<Vec<BiasReport>, _>>()?;
    reports.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(reports)
}

/// Writes `summary.json`, `summary.csv` and `frequency.csv` into `out`.
pub fn run_aggregate(inputs: &[PathBuf], out: &Path) -> Result<CorpusSummary, AggregateError> {
    let files = collect_report_files(inputs)?;
    if files.is_empty() {
        return Err(AggregateError::NoReports);
    }
    let reports = read_reports(&files)?;
    let summary = summarize(&reports);
    let io = |p: &Path| {
        let path = p.display().to_string();
        move |source| AggregateError::Io { path, source }
    };
    fs::create_dir_all(out).map_err(io(out))?;
    let outputs = [
        ("summary.json", to_canonical_json(&summary)),
        ("summary.csv", summary_csv(&summary)?),
        ("frequency.csv", frequency_csv(&frequency_table(&reports))?),
    ];
    for (name, body) in outputs {
        let p = out.join(name);
        write_atomic(&p, body.as_bytes()).map_err(io(&p))?;
    }
    Ok(summary)
}
