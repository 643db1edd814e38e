//! Semantic clusters of patent documents.
//!
//! A semantic cluster of a base document is its patent family together with
//! the families of every document cited against it during examination. This
//! crate builds such clusters from a bibliographic corpus, exports them as
//! machine-learning datasets and scores prior-art search systems with
//! family-aware metrics (S@K, H@K, MPF@K, MRF@K).
//!
//! The pipeline is:
//!
//! 1. [`corpus`]: parse canonical JSON lines or ST.96-like XML into
//!    [`DocumentRecord`]s and index them by [`DocId`].
//! 2. [`family`]: partition every known document into patent families.
//! 3. [`cluster`] / [`store`]: materialise one [`SemanticCluster`] per base
//!    document and persist it.
//! 4. [`stats`], [`export`]: corpus indicators, size histograms, datasets and
//!    query selection.
//! 5. [`search`], [`metrics`]: obtain rankings and score them.
//!
//! [`pipeline`] wires the phases together; the `semclust` binary is a thin
//! command-line front end over it.

pub mod cluster;
pub mod corpus;
pub mod docid;
pub mod error;
pub mod export;
pub mod family;
pub mod metrics;
pub mod pipeline;
pub mod record;
pub mod search;
pub mod st96;
pub mod stats;
pub mod store;
pub mod synth;

pub use cluster::{build_cluster, ClusterOptions, SemanticCluster};
pub use corpus::{ingest_corpus, Corpus, IngestMode, IngestStats};
pub use docid::{canonical_doc_id, DocId};
pub use error::{Error, Result};
pub use family::{resolve_families, FamilyId, FamilyIndex};
pub use metrics::{
    aggregate_metrics, per_query_metrics, relevance_sets, EvaluationConfig, MetricsReport,
    PerQueryMetrics, RankedResult, RelevanceSets,
};
pub use record::{CitationRef, CitationSource, DocumentRecord, PriorityClaim};
pub use store::{build_all_clusters, get_cluster, ClusterStore};
