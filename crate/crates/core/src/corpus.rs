//! Corpus ingestion and lookup.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::record::{parse_document_record, DocumentRecord};
use crate::st96::parse_st96_subset;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IngestMode {
    /// Abort on the first malformed record.
    FailFast,
    /// Count malformed records and keep going.
    #[default]
    Skip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Canonical,
    St96,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Records whose id was already present; the later record replaced it.
    pub duplicates: usize,
    pub rejections: Vec<Rejection>,
}

impl IngestStats {
    fn absorb(&mut self, other: IngestStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.duplicates += other.duplicates;
        self.rejections.extend(other.rejections);
    }
}

/// All accepted records, indexed by id and iterated in canonical id order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    records: BTreeMap<DocId, DocumentRecord>,
}

impl Corpus {
    pub fn new() -> Corpus {
        Corpus::default()
    }

    /// Inserts a record, returning true if it replaced an earlier one.
    pub fn insert(&mut self, record: DocumentRecord) -> bool {
        self.records.insert(record.id.clone(), record).is_some()
    }

    pub fn get(&self, id: &DocId) -> Option<&DocumentRecord> {
        self.records.get(id)
    }

    pub fn contains(&self, id: &DocId) -> bool {
        self.records.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &DocId> {
        self.records.keys()
    }

    pub fn records(&self) -> impl Iterator<Item = &DocumentRecord> {
        self.records.values()
    }

    pub fn from_records(records: impl IntoIterator<Item = DocumentRecord>) -> Corpus {
        let mut c = Corpus::new();
        for r in records {
            c.insert(r);
        }
        c
    }

    /// Merges shards ingested in parallel. Later shards win on duplicate ids.
    pub fn merge(shards: impl IntoIterator<Item = (Corpus, IngestStats)>) -> (Corpus, IngestStats) {
        let mut corpus = Corpus::new();
        let mut stats = IngestStats::default();
        for (shard, s) in shards {
            stats.absorb(s);
            for (_, rec) in shard.records {
                if corpus.insert(rec) {
                    stats.duplicates += 1;
                }
            }
        }
        (corpus, stats)
    }

    /// Writes every record as one canonical line, ascending by id.
    pub fn write_canonical<W: Write>(&self, mut out: W) -> Result<()> {
        for rec in self.records.values() {
            writeln!(out, "{}", rec.to_canonical_line())?;
        }
        out.flush()?;
        Ok(())
    }

    /// SHA-256 over the canonical serialization; identifies corpus content.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for rec in self.records.values() {
            h.update(rec.to_canonical_line().as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        let file = File::open(path).map_err(Error::at(path))?;
        let (corpus, _) = ingest_corpus(BufReader::new(file), InputFormat::Canonical, IngestMode::FailFast)?;
        Ok(corpus)
    }
}

/// Reads records from `source`. Canonical input is one record per line
/// (blank lines skipped); ST.96 input is one or more XML documents, each
/// starting with an `<?xml` declaration.
pub fn ingest_corpus<R: BufRead>(source: R, format: InputFormat, mode: IngestMode) -> Result<(Corpus, IngestStats)> {
    let mut corpus = Corpus::new();
    let mut stats = IngestStats::default();
    let mut accept = |parsed: Result<DocumentRecord>, line: usize| -> Result<()> {
        match parsed {
            Ok(rec) => {
                stats.accepted += 1;
                if corpus.insert(rec) {
                    stats.duplicates += 1;
                }
                Ok(())
            }
            Err(e) => match mode {
                IngestMode::FailFast => Err(Error::Malformed { line, reason: e.to_string() }),
                IngestMode::Skip => {
                    stats.rejected += 1;
                    stats.rejections.push(Rejection { line, reason: e.to_string() });
                    Ok(())
                }
            },
        }
    };

    match format {
        InputFormat::Canonical => {
            for (i, line) in source.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                accept(parse_document_record(&line), i + 1)?;
            }
        }
        InputFormat::St96 => {
            let mut buf = String::new();
            let mut start = 1;
            for (i, line) in source.lines().enumerate() {
                let line = line?;
                if line.trim_start().starts_with("<?xml") && !buf.trim().is_empty() {
                    accept(parse_st96_subset(&buf), start)?;
                    buf.clear();
                }
                if buf.trim().is_empty() {
                    start = i + 1;
                }
                buf.push_str(&line);
                buf.push('\n');
            }
            if !buf.trim().is_empty() {
                accept(parse_st96_subset(&buf), start)?;
            }
        }
    }
    if stats.duplicates > 0 {
        log::warn!("{} duplicate document ids replaced by later records", stats.duplicates);
    }
    Ok((corpus, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(number: &str, date: &str, title: &str) -> String {
        format!(r#"{{"id":{{"office":"US","number":"{number}","kind":"A1","pub_date":"{date}"}},"title":"{title}"}}"#)
    }

    #[test]
    fn three_valid_records() {
        let input = [line("1", "2001-01-01", "a"), line("2", "2001-01-01", "b"), line("3", "2001-01-01", "c")].join("\n");
        let (corpus, stats) = ingest_corpus(input.as_bytes(), InputFormat::Canonical, IngestMode::Skip).unwrap();
        assert_eq!((stats.accepted, stats.rejected, stats.duplicates), (3, 0, 0));
        assert_eq!(corpus.len(), 3);
    }

    #[test]
    fn skip_mode_counts_malformed() {
        let input = [line("1", "2001-01-01", "a"), line("2", "2001-13-01", "b"), line("3", "2001-01-01", "c")].join("\n");
        let (corpus, stats) = ingest_corpus(input.as_bytes(), InputFormat::Canonical, IngestMode::Skip).unwrap();
        assert_eq!((stats.accepted, stats.rejected), (2, 1));
        assert_eq!(stats.rejections[0].line, 2);
        assert_eq!(corpus.len(), 2);

        let err = ingest_corpus(input.as_bytes(), InputFormat::Canonical, IngestMode::FailFast).unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicate_id_keeps_later_record() {
        let input = [line("1", "2001-01-01", "first"), line("1", "2001-01-01", "second")].join("\n");
        let (corpus, stats) = ingest_corpus(input.as_bytes(), InputFormat::Canonical, IngestMode::Skip).unwrap();
        assert_eq!((stats.accepted, stats.duplicates), (2, 1));
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.records().next().unwrap().title.as_deref(), Some("second"));
    }

    #[test]
    fn splits_concatenated_xml() {
        let doc = |n: u32| {
            format!(
                "<?xml version=\"1.0\"?>\n<PatentPublication><PatentPublicationIdentification>\
                 <IPOfficeCode>US</IPOfficeCode><PublicationNumber>{n}</PublicationNumber>\
                 <PatentDocumentKindCode>B2</PatentDocumentKindCode><PublicationDate>2010-01-0{n}</PublicationDate>\
                 </PatentPublicationIdentification></PatentPublication>\n"
            )
        };
        let input = format!("{}{}<?xml version=\"1.0\"?>\n<Broken/>\n", doc(1), doc(2));
        let (corpus, stats) = ingest_corpus(input.as_bytes(), InputFormat::St96, IngestMode::Skip).unwrap();
        assert_eq!((stats.accepted, stats.rejected), (2, 1));
        assert_eq!(stats.rejections[0].line, 5);
        assert_eq!(corpus.len(), 2);
    }

    #[test]
    fn merge_counts_cross_shard_duplicates() {
        let a = ingest_corpus(line("1", "2001-01-01", "a").as_bytes(), InputFormat::Canonical, IngestMode::Skip).unwrap();
        let b = ingest_corpus(line("1", "2001-01-01", "b").as_bytes(), InputFormat::Canonical, IngestMode::Skip).unwrap();
        let (corpus, stats) = Corpus::merge([a, b]);
        assert_eq!((corpus.len(), stats.accepted, stats.duplicates), (1, 2, 1));
        assert_eq!(corpus.records().next().unwrap().title.as_deref(), Some("b"));
    }
}
