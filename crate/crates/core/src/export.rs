//! Dataset export and test-query selection.
//!
//! A dataset file is UTF-8 JSON lines. The first line is a header
//! `{"schema":"semclust.dataset","version":1}`; every further line is one
//! cluster:
//!
//! ```text
//! {"base":"US…","base_family":[…],
//!  "cited_same_office":[{"family_id":"…","members":[…]}],
//!  "cited_other_office":[…],
//!  "texts":{"US…":{"abstract":"…","claims":"…"}}}
//! ```
//!
//! `texts` is present only when some text field is requested. Clusters are
//! written in ascending base id order.
//!
//! An id-list file has a `# count=<n>` first line followed by one canonical
//! id per line.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::cluster::{build_cluster_with, CitationResolver, ClusterOptions, SemanticCluster};
use crate::corpus::Corpus;
use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::family::FamilyIndex;
use crate::metrics::relevance_sets;
use crate::store::{get_cluster, ClusterStore};

pub const DATASET_SCHEMA: &str = "semclust.dataset";
pub const DATASET_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextFields {
    #[serde(rename = "abstract")]
    pub abstract_text: bool,
    pub description: bool,
    pub claims: bool,
}

impl TextFields {
    pub fn any(&self) -> bool {
        self.abstract_text || self.description || self.claims
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportConfig {
    pub date_from: Option<NaiveDate>,
    pub date_to: Option<NaiveDate>,
    /// Empty means every kind.
    pub base_kinds: BTreeSet<String>,
    /// Explicit ("thematic") base selection.
    pub id_list: Option<Vec<String>>,
    pub include_texts: TextFields,
    pub examiner_only: bool,
    pub max_clusters: Option<usize>,
    pub output_path: PathBuf,
}

impl ExportConfig {
    pub fn validate(&self) -> Result<()> {
        if let (Some(from), Some(to)) = (self.date_from, self.date_to) {
            if from > to {
                return Err(Error::Config(format!("date range {from}..{to} is reversed")));
            }
        }
        if self.output_path.as_os_str().is_empty() {
            return Err(Error::Config("export output_path is empty".into()));
        }
        self.parsed_id_list().map(|_| ())
    }

    fn parsed_id_list(&self) -> Result<Option<BTreeSet<DocId>>> {
        self.id_list
            .as_ref()
            .map(|ids| {
                ids.iter()
                    .map(|s| s.parse::<DocId>().map_err(|e| Error::Config(format!("id_list entry: {e}"))))
                    .collect()
            })
            .transpose()
    }

    fn in_range(&self, date: NaiveDate) -> bool {
        self.date_from.is_none_or(|f| date >= f) && self.date_to.is_none_or(|t| date <= t)
    }

    pub fn from_toml_file(path: &Path) -> Result<ExportConfig> {
        let text = fs::read_to_string(path).map_err(Error::at(path))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportSummary {
    pub clusters_written: usize,
    /// Distinct documents across all written clusters.
    pub documents_referenced: usize,
    /// `id_list` entries with no cluster record.
    pub missing_ids: Vec<String>,
}

#[derive(Serialize, Deserialize, PartialEq, Eq, Debug)]
pub struct ExportedFamily {
    pub family_id: String,
    pub members: Vec<DocId>,
}

#[derive(Serialize, Deserialize, Default, PartialEq, Eq, Debug)]
pub struct ExportedTexts {
    #[serde(rename = "abstract", skip_serializing_if = "Option::is_none", default)]
    pub abstract_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub claims: Option<String>,
}

/// One line of a dataset file.
#[derive(Serialize, Deserialize, PartialEq, Eq, Debug)]
pub struct ExportedCluster {
    pub base: DocId,
    pub base_family: Vec<DocId>,
    pub cited_same_office: Vec<ExportedFamily>,
    pub cited_other_office: Vec<ExportedFamily>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub texts: Option<BTreeMap<DocId, ExportedTexts>>,
}

impl ExportedCluster {
    fn new(cluster: &SemanticCluster, corpus: &Corpus, fields: TextFields) -> ExportedCluster {
        let fams = |m: &BTreeMap<_, crate::cluster::CitedFamily>| {
            m.iter()
                .map(|(id, f): (&crate::family::FamilyId, _)| ExportedFamily {
                    family_id: id.to_string(),
                    members: f.members.iter().cloned().collect(),
                })
                .collect()
        };
        let texts = fields.any().then(|| {
            cluster
                .member_union()
                .into_iter()
                .filter_map(|id| corpus.get(id))
                .map(|r| {
                    let pick = |on: bool, t: &Option<String>| if on { t.clone() } else { None };
                    let t = ExportedTexts {
                        abstract_text: pick(fields.abstract_text, &r.abstract_text),
                        description: pick(fields.description, &r.description),
                        claims: pick(fields.claims, &r.claims),
                    };
                    (r.id.clone(), t)
                })
                .collect()
        });
        ExportedCluster {
            base: cluster.base.clone(),
            base_family: cluster.base_family.iter().cloned().collect(),
            cited_same_office: fams(&cluster.cited_same_office),
            cited_other_office: fams(&cluster.cited_other_office),
            texts,
        }
    }

    /// Member union of the exported cluster.
    pub fn members(&self) -> BTreeSet<&DocId> {
        self.base_family
            .iter()
            .chain(self.cited_same_office.iter().chain(&self.cited_other_office).flat_map(|f| &f.members))
            .collect()
    }
}

/// Writes the dataset selected by `cfg`.
///
/// Clusters come from the store unless `cfg.examiner_only` differs from the
/// option the store was built with; then they are rebuilt from the corpus.
pub fn export_dataset(store: &ClusterStore, corpus: &Corpus, families: &FamilyIndex, cfg: &ExportConfig) -> Result<ExportSummary> {
    cfg.validate()?;
    let store_opts = store.meta().options;
    let rebuild_opts = (store_opts.examiner_only != cfg.examiner_only)
        .then_some(ClusterOptions { examiner_only: cfg.examiner_only, ..store_opts });
    let resolver = CitationResolver::new(families);

    let mut summary = ExportSummary::default();
    let bases: Vec<DocId> = match cfg.parsed_id_list()? {
        Some(ids) => {
            let (present, missing): (Vec<_>, Vec<_>) = ids.into_iter().partition(|id| store.contains(id));
            summary.missing_ids = missing.iter().map(|id| id.to_string()).collect();
            present
        }
        None => store.bases(),
    };
    let selected = bases
        .into_iter()
        .filter(|id| cfg.in_range(id.pub_date()))
        .filter(|id| cfg.base_kinds.is_empty() || cfg.base_kinds.contains(id.kind()))
        .take(cfg.max_clusters.unwrap_or(usize::MAX));

    if let Some(parent) = cfg.output_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(Error::at(parent))?;
    }
    let file = File::create(&cfg.output_path).map_err(Error::at(&cfg.output_path))?;
    let mut out = BufWriter::new(file);
    writeln!(out, r#"{{"schema":"{DATASET_SCHEMA}","version":{DATASET_VERSION}}}"#)?;
    let mut referenced: BTreeSet<DocId> = BTreeSet::new();
    for base in selected {
        let cluster = match &rebuild_opts {
            Some(opts) => build_cluster_with(&base, corpus, &resolver, opts)?.0,
            None => get_cluster(store, &base)?,
        };
        let exported = ExportedCluster::new(&cluster, corpus, cfg.include_texts);
        referenced.extend(exported.members().into_iter().cloned());
        serde_json::to_writer(&mut out, &exported)?;
        out.write_all(b"\n")?;
        summary.clusters_written += 1;
    }
    out.flush()?;
    summary.documents_referenced = referenced.len();
    Ok(summary)
}

/// Reads a dataset file back, checking its header.
pub fn read_dataset(path: &Path) -> Result<Vec<ExportedCluster>> {
    let reader = BufReader::new(File::open(path).map_err(Error::at(path))?);
    let mut lines = reader.lines();
    let header: serde_json::Value = match lines.next() {
        Some(line) => serde_json::from_str(&line?)?,
        None => return Err(Error::Malformed { line: 1, reason: "missing dataset header".into() }),
    };
    if header["schema"] != DATASET_SCHEMA || header["version"] != DATASET_VERSION {
        return Err(Error::Malformed { line: 1, reason: format!("unsupported dataset header {header}") });
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(&line?).map_err(|e| Error::Malformed { line: i + 2, reason: e.to_string() })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionCriteria {
    pub date_from: Option<NaiveDate>,
    pub date_to: Option<NaiveDate>,
    /// Kind codes of granted patents to draw queries from.
    pub kinds: BTreeSet<String>,
    /// Keep positions 1, m+1, 2m+1, … of the eligible list.
    pub interval: usize,
}

impl SelectionCriteria {
    pub fn validate(&self) -> Result<()> {
        if self.interval < 1 {
            return Err(Error::Config("sampling interval must be at least 1".into()));
        }
        if self.date_from.is_none() && self.date_to.is_none() {
            return Err(Error::Config("selection needs a publication date or date range".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Config("selection needs at least one kind code".into()));
        }
        Ok(())
    }
}

impl Default for SelectionCriteria {
    fn default() -> Self {
        SelectionCriteria {
            date_from: None,
            date_to: None,
            kinds: ["B2", "C1", "C2"].map(String::from).into(),
            interval: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub ids: Vec<DocId>,
    /// Candidates passing all checks before sampling.
    pub eligible: usize,
}

impl Selection {
    pub fn count(&self) -> usize {
        self.ids.len()
    }
}

/// Selects query documents: within the date range, of a granted kind, with
/// text, and with at least one relevant cited family; every `interval`-th of
/// those in canonical id order, starting with the first.
pub fn select_test_documents(store: &ClusterStore, corpus: &Corpus, criteria: &SelectionCriteria) -> Result<Selection> {
    criteria.validate()?;
    let in_range = |d: NaiveDate| criteria.date_from.is_none_or(|f| d >= f) && criteria.date_to.is_none_or(|t| d <= t);
    let eligible: Vec<DocId> = corpus
        .records()
        .filter(|r| in_range(r.id.pub_date()) && criteria.kinds.contains(r.id.kind()))
        .filter(|r| r.has_text())
        .filter(|r| get_cluster(store, &r.id).is_ok_and(|c| relevance_sets(&c).cy_size() > 0))
        .map(|r| r.id.clone())
        .collect();
    let ids = eligible.iter().step_by(criteria.interval).cloned().collect();
    Ok(Selection { ids, eligible: eligible.len() })
}

pub fn write_id_list<W: Write>(ids: &[DocId], mut out: W) -> Result<()> {
    writeln!(out, "# count={}", ids.len())?;
    for id in ids {
        writeln!(out, "{id}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an id-list file. The count line, when present, must agree.
pub fn read_id_list<R: BufRead>(source: R) -> Result<Vec<DocId>> {
    let mut ids = Vec::new();
    let mut declared = None;
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('#') {
            if let Some(n) = rest.trim().strip_prefix("count=") {
                declared = Some(n.trim().parse::<usize>().map_err(|e| Error::Malformed { line: i + 1, reason: e.to_string() })?);
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        ids.push(t.parse().map_err(|e: Error| Error::Malformed { line: i + 1, reason: e.to_string() })?);
    }
    if let Some(n) = declared.filter(|&n| n != ids.len()) {
        return Err(Error::Malformed { line: 1, reason: format!("declared count={n} but {} ids follow", ids.len()) });
    }
    Ok(ids)
}
