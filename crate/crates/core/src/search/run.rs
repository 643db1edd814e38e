//! Run files: saved rankings of a system under test.
//!
//! One JSON object per line:
//! `{"query":"US…","results":[{"doc_id":"US…","score":12.5},{"doc_id":"EP…"}]}`.
//! Scores are optional; when present they must be non-increasing.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::metrics::RankedResult;

#[derive(Debug, Serialize, Deserialize)]
struct RunLine {
    query: DocId,
    results: Vec<RunEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RunEntry {
    doc_id: DocId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

/// Rankings keyed by query, in file order.
pub type Run = IndexMap<DocId, RankedResult>;

pub fn load_run(path: &Path) -> Result<Run> {
    read_run(BufReader::new(File::open(path).map_err(Error::at(path))?))
}

pub fn read_run<R: BufRead>(source: R) -> Result<Run> {
    let mut run = Run::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| Error::Malformed { line: i + 1, reason };
        let parsed: RunLine = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let scores: Vec<f64> = parsed.results.iter().filter_map(|e| e.score).collect();
        if let Some(w) = scores.windows(2).find(|w| w[1] > w[0]) {
            return Err(bad(format!("scores increase ({} then {}) for {}", w[0], w[1], parsed.query)));
        }
        let result = RankedResult::new(parsed.query.clone(), parsed.results.into_iter().map(|e| e.doc_id).collect());
        if let Some(dup) = result.first_duplicate() {
            return Err(bad(format!("ranking for {} lists {dup} twice", parsed.query)));
        }
        if run.insert(parsed.query.clone(), result).is_some() {
            return Err(bad(format!("duplicate query {}", parsed.query)));
        }
    }
    Ok(run)
}

/// Writes rankings without scores, one line per query.
pub fn save_run<'a, W: Write>(results: impl IntoIterator<Item = &'a RankedResult>, mut out: W) -> Result<()> {
    for r in results {
        let line = RunLine {
            query: r.query.clone(),
            results: r.ranking.iter().map(|d| RunEntry { doc_id: d.clone(), score: None }).collect(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
