//! Phase runners behind the command-line tool.
//!
//! Phases communicate through files in a work directory:
//!
//! | phase      | reads                                   | writes                                     |
//! |------------|-----------------------------------------|--------------------------------------------|
//! | `ingest`   | corpus input                            | `corpus.jsonl`, `ingest-stats.json`        |
//! | `families` | `corpus.jsonl`, optional family table   | `families.csv`                             |
//! | `build`    | `corpus.jsonl`, `families.csv`          | store directory                            |
//! | `stats`    | store                                   | `indicators.txt`, `indicators.json`, `histogram.csv` |
//! | `export`   | store, `corpus.jsonl`, `families.csv`   | dataset file                               |
//! | `select`   | store, `corpus.jsonl`                   | id-list file                               |
//! | `evaluate` | store, `corpus.jsonl`, id list, adapter | `report.json`, `per_query.csv`, `results.jsonl` |
//!
//! No payload file carries a timestamp, so reruns on identical inputs are
//! byte-identical.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterOptions;
use crate::corpus::{ingest_corpus, Corpus, IngestMode, IngestStats, InputFormat};
use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::export::{export_dataset, read_id_list, select_test_documents, write_id_list, ExportConfig, ExportSummary, Selection, SelectionCriteria};
use crate::family::{parse_family_table, resolve_families, FamilyIndex};
use crate::metrics::{aggregate_metrics, per_query_metrics, relevance_sets, EvaluationConfig, MetricsReport, RankedResult, SkippedQuery};
use crate::search::{load_run, ReferenceSearcher, RemoteConfig, RemoteSearcher, SearchAdapter};
use crate::stats::{compute_indicators, size_histogram, IndicatorReport, KindGroups};
use crate::store::{build_all_clusters, get_cluster, BuildReport, ClusterStore};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AdapterKind {
    #[default]
    Replay,
    Reference,
    Remote,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdapterConfig {
    pub kind: AdapterKind,
    /// Run file for `replay`.
    pub run: Option<PathBuf>,
    pub remote: RemoteConfig,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub work_dir: PathBuf,
    pub corpus: Option<PathBuf>,
    pub corpus_format: InputFormat,
    pub ingest_mode: IngestMode,
    pub family_table: Option<PathBuf>,
    /// Defaults to `<work_dir>/store`.
    pub store: Option<PathBuf>,
    pub kind_groups: KindGroups,
    pub cluster: ClusterOptions,
    pub export: ExportConfig,
    pub selection: SelectionCriteria,
    pub evaluation: EvaluationConfig,
    pub adapter: AdapterConfig,
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            work_dir: PathBuf::from("semclust-work"),
            corpus: None,
            corpus_format: InputFormat::default(),
            ingest_mode: IngestMode::default(),
            family_table: None,
            store: None,
            kind_groups: KindGroups::default(),
            cluster: ClusterOptions::default(),
            export: ExportConfig::default(),
            selection: SelectionCriteria::default(),
            evaluation: EvaluationConfig::default(),
            adapter: AdapterConfig::default(),
            threads: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_file(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path).map_err(Error::at(path))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.work_dir.join("corpus.jsonl")
    }

    pub fn families_path(&self) -> PathBuf {
        self.work_dir.join("families.csv")
    }

    pub fn store_path(&self) -> PathBuf {
        self.store.clone().unwrap_or_else(|| self.work_dir.join("store"))
    }

    fn load_corpus(&self) -> Result<Corpus> {
        let path = self.corpus_path();
        if !path.exists() {
            return Err(Error::NotFound(format!("{} (run `ingest` first)", path.display())));
        }
        Corpus::load(&path)
    }

    fn load_families(&self) -> Result<FamilyIndex> {
        let path = self.families_path();
        let file = File::open(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(format!("{} (run `families` first)", path.display())),
            _ => Error::at(&path)(e),
        })?;
        FamilyIndex::from_pairs(parse_family_table(BufReader::new(file))?)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(Error::at(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(Error::at(path))?))
}

fn write_string(path: &Path, s: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(s.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn run_ingest(cfg: &PipelineConfig) -> Result<IngestStats> {
    let input = cfg.corpus.as_ref().ok_or_else(|| Error::Config("no corpus input given".into()))?;
    let file = File::open(input).map_err(Error::at(input))?;
    let (corpus, stats) = ingest_corpus(BufReader::new(file), cfg.corpus_format, cfg.ingest_mode)?;
    corpus.write_canonical(create(&cfg.corpus_path())?)?;
    write_string(&cfg.work_dir.join("ingest-stats.json"), &(serde_json::to_string_pretty(&stats)? + "\n"))?;
    log::info!(
        "ingested {} records ({} rejected, {} duplicates) into {}",
        stats.accepted,
        stats.rejected,
        stats.duplicates,
        cfg.corpus_path().display()
    );
    Ok(stats)
}

pub fn run_families(cfg: &PipelineConfig) -> Result<FamilyIndex> {
    let corpus = cfg.load_corpus()?;
    let table = match &cfg.family_table {
        Some(p) => Some(parse_family_table(BufReader::new(File::open(p).map_err(Error::at(p))?))?),
        None => None,
    };
    let index = resolve_families(&corpus, table.as_deref())?;
    index.write_table(create(&cfg.families_path())?)?;
    log::info!("{} documents in {} families", index.doc_count(), index.family_count());
    Ok(index)
}

pub fn run_build(cfg: &PipelineConfig) -> Result<BuildReport> {
    let corpus = cfg.load_corpus()?;
    let families = cfg.load_families()?;
    let store = ClusterStore::open(cfg.store_path())?;
    let report = build_all_clusters(&corpus, &families, &cfg.cluster, &store)?;
    log::info!(
        "built {} clusters ({} resumed); citations: {} followed, {} constructed, {} dropped",
        report.built,
        report.resumed,
        report.citations.followed,
        report.citations.constructed,
        report.citations.dropped
    );
    Ok(report)
}

pub fn run_stats(cfg: &PipelineConfig, out_dir: &Path) -> Result<IndicatorReport> {
    let store = ClusterStore::open_existing(cfg.store_path())?;
    let report = compute_indicators(&store, &cfg.kind_groups)?;
    write_string(&out_dir.join("indicators.txt"), &report.to_table())?;
    write_string(&out_dir.join("indicators.json"), &(report.to_json() + "\n"))?;
    size_histogram(&store, &cfg.kind_groups).write_csv(create(&out_dir.join("histogram.csv"))?)?;
    Ok(report)
}

pub fn run_export(cfg: &PipelineConfig) -> Result<ExportSummary> {
    let store = ClusterStore::open_existing(cfg.store_path())?;
    let summary = export_dataset(&store, &cfg.load_corpus()?, &cfg.load_families()?, &cfg.export)?;
    log::info!(
        "wrote {} clusters referencing {} documents to {}",
        summary.clusters_written,
        summary.documents_referenced,
        cfg.export.output_path.display()
    );
    Ok(summary)
}

pub fn run_select(cfg: &PipelineConfig, out: &Path) -> Result<Selection> {
    cfg.selection.validate()?;
    let store = ClusterStore::open_existing(cfg.store_path())?;
    let selection = select_test_documents(&store, &cfg.load_corpus()?, &cfg.selection)?;
    write_id_list(&selection.ids, create(out)?)?;
    log::info!("selected {} of {} eligible documents", selection.count(), selection.eligible);
    Ok(selection)
}

/// Rankings obtained during an evaluation, in query order.
#[derive(Debug)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub results: Vec<RankedResult>,
}

/// Scores `queries` with rankings from `adapter`. Queries without a cluster
/// record, without relevant families, or whose search fails are skipped
/// with a reason. Fails only when nothing could be evaluated.
pub fn evaluate_queries(
    queries: &[DocId],
    store: &ClusterStore,
    corpus: &Corpus,
    adapter: &dyn SearchAdapter,
    cfg: &EvaluationConfig,
) -> Result<Evaluation> {
    cfg.validate()?;
    let one = |q: &DocId| -> std::result::Result<(crate::metrics::PerQueryMetrics, RankedResult), String> {
        let cluster = get_cluster(store, q).map_err(|e| e.to_string())?;
        let rel = relevance_sets(&cluster);
        if rel.cy_size() == 0 {
            return Err("no relevant families (C_Y is empty)".into());
        }
        let ranked = adapter.search(q, corpus.get(q), cfg.k).map_err(|e| e.to_string())?;
        let row = per_query_metrics(&ranked, &rel, cfg).map_err(|e| e.to_string())?;
        Ok((row, ranked))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(adapter.parallelism().min(rayon::current_num_threads()).max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let outcomes: Vec<_> = pool.install(|| queries.par_iter().map(one).collect());

    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (q, outcome) in queries.iter().zip(outcomes) {
        match outcome {
            Ok((row, ranked)) => {
                rows.push(row);
                results.push(ranked);
            }
            Err(reason) => {
                log::warn!("skipping {q}: {reason}");
                skipped.push(SkippedQuery { query: q.to_string(), reason });
            }
        }
    }
    let mut report = aggregate_metrics(rows)?;
    report.skipped_queries = skipped;
    Ok(Evaluation { report, results })
}

/// Builds the adapter named by the configuration.
pub fn make_adapter(cfg: &AdapterConfig, corpus: &Corpus) -> Result<Box<dyn SearchAdapter>> {
    Ok(match cfg.kind {
        AdapterKind::Replay => {
            let path = cfg.run.as_ref().ok_or_else(|| Error::Config("replay adapter needs a run file".into()))?;
            Box::new(load_run(path)?)
        }
        AdapterKind::Reference => Box::new(ReferenceSearcher::new(corpus)),
        AdapterKind::Remote => Box::new(RemoteSearcher::new(cfg.remote.clone())?),
    })
}

pub fn run_evaluate(cfg: &PipelineConfig, queries: &Path, out_dir: &Path) -> Result<MetricsReport> {
    let store = ClusterStore::open_existing(cfg.store_path())?;
    let corpus = cfg.load_corpus()?;
    let ids = read_id_list(BufReader::new(File::open(queries).map_err(Error::at(queries))?))?;
    let adapter = make_adapter(&cfg.adapter, &corpus)?;
    let eval = evaluate_queries(&ids, &store, &corpus, adapter.as_ref(), &cfg.evaluation)?;
    write_string(&out_dir.join("report.json"), &(eval.report.to_json() + "\n"))?;
    eval.report.write_rows_csv(create(&out_dir.join("per_query.csv"))?)?;
    crate::search::save_run(&eval.results, create(&out_dir.join("results.jsonl"))?)?;
    Ok(eval.report)
}
