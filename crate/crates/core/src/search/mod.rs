//! Sources of ranked results for evaluation.
//!
//! - [`run`]: replay of a saved run file.
//! - [`reference`]: a built-in TF-IDF cosine searcher over the corpus.
//! - [`remote`]: a JSON-over-HTTP search service.

pub mod reference;
pub mod remote;
pub mod run;

use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::metrics::RankedResult;
use crate::record::DocumentRecord;

pub use reference::ReferenceSearcher;
pub use remote::{RemoteConfig, RemoteSearcher};
pub use run::{load_run, read_run, save_run, Run};

/// Anything that can answer a prior-art query with a ranking.
pub trait SearchAdapter: Sync {
    /// `record` is the query document's corpus record, when known.
    fn search(&self, query: &DocId, record: Option<&DocumentRecord>, k: usize) -> Result<RankedResult>;

    /// Upper bound on concurrent queries.
    fn parallelism(&self) -> usize {
        1
    }
}

impl SearchAdapter for Run {
    fn search(&self, query: &DocId, _: Option<&DocumentRecord>, _: usize) -> Result<RankedResult> {
        self.get(query)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("run has no ranking for {query}")))
    }
}

impl SearchAdapter for ReferenceSearcher {
    fn search(&self, query: &DocId, record: Option<&DocumentRecord>, k: usize) -> Result<RankedResult> {
        let record = record.ok_or_else(|| Error::NotFound(format!("query document {query} in corpus")))?;
        ReferenceSearcher::search(self, record, k)
    }

    fn parallelism(&self) -> usize {
        rayon::current_num_threads()
    }
}

impl SearchAdapter for RemoteSearcher {
    fn search(&self, query: &DocId, record: Option<&DocumentRecord>, k: usize) -> Result<RankedResult> {
        let record = record.ok_or_else(|| Error::NotFound(format!("query document {query} in corpus")))?;
        RemoteSearcher::search(self, record, k)
    }

    fn parallelism(&self) -> usize {
        self.config().parallelism.max(1)
    }
}
