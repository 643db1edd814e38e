use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use semclust::corpus::InputFormat;
use semclust::export::ExportConfig;
use semclust::pipeline::{self, AdapterKind, PipelineConfig};
use semclust::Error;

#[derive(Parser)]
#[command(name = "semclust", version, about = "Semantic patent clusters: build, export, evaluate")]
struct Cli {
    /// Pipeline configuration (TOML); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Work directory holding intermediate files.
    #[arg(long, global = true)]
    work: Option<PathBuf>,
    /// Cluster store directory (default: <work>/store).
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    /// Worker thread bound.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a corpus into the work directory.
    Ingest {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Abort on the first malformed record.
        #[arg(long)]
        fail_fast: bool,
    },
    /// Resolve patent families.
    Families {
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Build the cluster store.
    Build {
        /// Kind codes of base documents (comma-separated).
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
        #[arg(long)]
        examiner_only: bool,
    },
    /// Collection indicators and size histogram.
    Stats {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also print the store dump.
        #[arg(long)]
        dump: bool,
    },
    /// Write a dataset as configured in an export file.
    Export {
        /// Export configuration (TOML); defaults to the pipeline's `[export]` table.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Select query documents for evaluation.
    Select {
        #[arg(long)]
        date_from: Option<NaiveDate>,
        #[arg(long)]
        date_to: Option<NaiveDate>,
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
        #[arg(long)]
        interval: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a search system on selected queries.
    Evaluate {
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, value_enum)]
        adapter: Option<AdapterKind>,
        /// Run file for the replay adapter.
        #[arg(long)]
        run: Option<PathBuf>,
        /// Search endpoint for the remote adapter.
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        exclude_base_family: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Canonical,
    St96,
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::from_toml_file(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(w) = cli.work {
        cfg.work_dir = w;
    }
    if cli.store.is_some() {
        cfg.store = cli.store;
    }
    if let Some(t) = cli.threads.or(cfg.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }

    match cli.command {
        Command::Ingest { corpus, format, fail_fast } => {
            cfg.corpus = corpus.or(cfg.corpus);
            if let Some(f) = format {
                cfg.corpus_format = match f {
                    Format::Canonical => InputFormat::Canonical,
                    Format::St96 => InputFormat::St96,
                };
            }
            if fail_fast {
                cfg.ingest_mode = semclust::IngestMode::FailFast;
            }
            let stats = pipeline::run_ingest(&cfg)?;
            println!("accepted={} rejected={} duplicates={}", stats.accepted, stats.rejected, stats.duplicates);
        }
        Command::Families { table } => {
            cfg.family_table = table.or(cfg.family_table);
            let index = pipeline::run_families(&cfg)?;
            println!("documents={} families={}", index.doc_count(), index.family_count());
        }
        Command::Build { kinds, examiner_only } => {
            if !kinds.is_empty() {
                cfg.cluster.base_kinds = kinds.into_iter().map(|k| k.to_ascii_uppercase()).collect();
            }
            cfg.cluster.examiner_only |= examiner_only;
            let r = pipeline::run_build(&cfg)?;
            println!("built={} resumed={}", r.built, r.resumed);
        }
        Command::Stats { out, dump } => {
            let report = pipeline::run_stats(&cfg, &out)?;
            print!("{}", report.to_table());
            if dump {
                semclust::ClusterStore::open_existing(cfg.store_path())?.dump(std::io::stdout().lock())?;
            }
        }
        Command::Export { config } => {
            if let Some(p) = config {
                cfg.export = ExportConfig::from_toml_file(&p)?;
            }
            let s = pipeline::run_export(&cfg)?;
            println!("clusters={} documents={}", s.clusters_written, s.documents_referenced);
        }
        Command::Select { date_from, date_to, kinds, interval, out } => {
            if date_from.is_some() || date_to.is_some() {
                cfg.selection.date_from = date_from;
                cfg.selection.date_to = date_to;
            }
            if !kinds.is_empty() {
                cfg.selection.kinds = kinds.into_iter().map(|k| k.to_ascii_uppercase()).collect();
            }
            if let Some(m) = interval {
                cfg.selection.interval = m;
            }
            let s = pipeline::run_select(&cfg, &out)?;
            println!("selected={} eligible={}", s.count(), s.eligible);
        }
        Command::Evaluate { queries, adapter, run, endpoint, k, exclude_base_family, out } => {
            if let Some(a) = adapter {
                cfg.adapter.kind = a;
            }
            cfg.adapter.run = run.or(cfg.adapter.run);
            if let Some(e) = endpoint {
                cfg.adapter.remote.endpoint = e;
            }
            if let Some(k) = k {
                cfg.evaluation.k = k;
            }
            cfg.evaluation.exclude_base_family_from_ranking |= exclude_base_family;
            let report = pipeline::run_evaluate(&cfg, &queries, &out)?;
            println!("{}", report.summary());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
