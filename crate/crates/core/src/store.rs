//! Persistent cluster store.
//!
//! One record per base document, holding four id categories: the base id,
//! the base family, same-office cited documents with their family members and
//! other-office cited documents with their family members.
//!
//! On disk a store is a directory:
//!
//! - `clusters.jsonl`: one record per line, ascending base id. This is the
//!   payload and is byte-identical across rebuilds of identical inputs.
//! - `meta.json`: format version, input hashes, build options, record count.
//! - `pending.jsonl`: records of an interrupted build, replayed on reopen.
//! - `build-info.json`: wall-clock build time; not part of the payload.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::{build_cluster_with, CitationResolver, CitationTally, CitedFamily, ClusterOptions, SemanticCluster};
use crate::corpus::Corpus;
use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::family::{FamilyId, FamilyIndex};

pub const STORE_FORMAT_VERSION: u32 = 1;
const CLUSTERS_FILE: &str = "clusters.jsonl";
const META_FILE: &str = "meta.json";
const PENDING_FILE: &str = "pending.jsonl";
const BUILD_INFO_FILE: &str = "build-info.json";
const BUILD_BATCH: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredFamily {
    pub family_id: FamilyId,
    pub cited: Vec<DocId>,
    pub members: Vec<DocId>,
}

/// The on-disk form of one cluster.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredCluster {
    pub base: DocId,
    pub base_family_id: FamilyId,
    pub base_family: Vec<DocId>,
    pub cited_same_office: Vec<StoredFamily>,
    pub cited_other_office: Vec<StoredFamily>,
}

impl From<&SemanticCluster> for StoredCluster {
    fn from(c: &SemanticCluster) -> StoredCluster {
        let fams = |m: &BTreeMap<FamilyId, CitedFamily>| {
            m.iter()
                .map(|(id, f)| StoredFamily {
                    family_id: id.clone(),
                    cited: f.cited.iter().cloned().collect(),
                    members: f.members.iter().cloned().collect(),
                })
                .collect()
        };
        StoredCluster {
            base: c.base.clone(),
            base_family_id: c.base_family_id.clone(),
            base_family: c.base_family.iter().cloned().collect(),
            cited_same_office: fams(&c.cited_same_office),
            cited_other_office: fams(&c.cited_other_office),
        }
    }
}

impl From<&StoredCluster> for SemanticCluster {
    fn from(s: &StoredCluster) -> SemanticCluster {
        let fams = |v: &[StoredFamily]| {
            v.iter()
                .map(|f| {
                    let fam = CitedFamily {
                        cited: f.cited.iter().cloned().collect(),
                        members: f.members.iter().cloned().collect(),
                    };
                    (f.family_id.clone(), fam)
                })
                .collect()
        };
        SemanticCluster {
            base: s.base.clone(),
            base_family_id: s.base_family_id.clone(),
            base_family: s.base_family.iter().cloned().collect(),
            cited_same_office: fams(&s.cited_same_office),
            cited_other_office: fams(&s.cited_other_office),
        }
    }
}

impl StoredCluster {
    /// One `|`-separated debug line: base, base family, same-office
    /// families, other-office families. Families are `;`-separated as
    /// `family_id:cited,…/members,…`.
    pub fn dump_line(&self) -> String {
        let ids = |v: &[DocId]| v.iter().map(DocId::as_str).collect::<Vec<_>>().join(",");
        let fams = |v: &[StoredFamily]| {
            v.iter()
                .map(|f| format!("{}:{}/{}", f.family_id, ids(&f.cited), ids(&f.members)))
                .collect::<Vec<_>>()
                .join(";")
        };
        format!(
            "{}|{}|{}|{}",
            self.base,
            ids(&self.base_family),
            fams(&self.cited_same_office),
            fams(&self.cited_other_office)
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreMeta {
    pub format_version: u32,
    /// Hash of the canonical corpus serialization.
    pub corpus_id: String,
    /// Hash of the family partition.
    pub families_id: String,
    /// Hash of the build options.
    pub config_hash: String,
    pub options: ClusterOptions,
    pub records: usize,
}

/// Persistence behind a [`ClusterStore`].
pub trait StorageBackend: Send + Sync {
    fn load(&self) -> Result<Option<(StoreMeta, Vec<StoredCluster>)>>;
    /// Durably records a finished batch of an ongoing build.
    fn append(&self, batch: &[StoredCluster]) -> Result<()>;
    /// Replaces the persisted state with a complete snapshot.
    fn commit(&self, meta: &StoreMeta, records: &BTreeMap<DocId, StoredCluster>) -> Result<()>;
    /// Drops everything persisted.
    fn clear(&self) -> Result<()>;
}

#[derive(Debug, Default)]
pub struct MemoryBackend;

impl StorageBackend for MemoryBackend {
    fn load(&self) -> Result<Option<(StoreMeta, Vec<StoredCluster>)>> {
        Ok(None)
    }
    fn append(&self, _: &[StoredCluster]) -> Result<()> {
        Ok(())
    }
    fn commit(&self, _: &StoreMeta, _: &BTreeMap<DocId, StoredCluster>) -> Result<()> {
        Ok(())
    }
    fn clear(&self) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug)]
pub struct DirBackend {
    dir: PathBuf,
}

impl DirBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Result<DirBackend> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(Error::at(&dir))?;
        Ok(DirBackend { dir })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn read_records(path: &Path, out: &mut Vec<StoredCluster>, tolerate_torn_tail: bool) -> Result<()> {
        if !path.exists() {
            return Ok(());
        }
        let reader = BufReader::new(File::open(path).map_err(Error::at(path))?);
        let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
        let last = lines.len().saturating_sub(1);
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(line) {
                Ok(rec) => out.push(rec),
                // An interrupted append may leave a partial final line.
                Err(_) if tolerate_torn_tail && i == last => {}
                Err(e) => return Err(Error::Malformed { line: i + 1, reason: format!("{}: {e}", path.display()) }),
            }
        }
        Ok(())
    }

    fn write_atomic(&self, name: &str, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let tmp = self.path(&format!("{name}.tmp"));
        let mut w = BufWriter::new(File::create(&tmp).map_err(Error::at(&tmp))?);
        write(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        let dest = self.path(name);
        fs::rename(&tmp, &dest).map_err(Error::at(dest))?;
        Ok(())
    }
}

impl StorageBackend for DirBackend {
    fn load(&self) -> Result<Option<(StoreMeta, Vec<StoredCluster>)>> {
        let meta_path = self.path(META_FILE);
        if !meta_path.exists() {
            return Ok(None);
        }
        let meta: StoreMeta = serde_json::from_slice(&fs::read(&meta_path).map_err(Error::at(&meta_path))?)?;
        let mut records = Vec::new();
        Self::read_records(&self.path(CLUSTERS_FILE), &mut records, false)?;
        Self::read_records(&self.path(PENDING_FILE), &mut records, true)?;
        Ok(Some((meta, records)))
    }

    fn append(&self, batch: &[StoredCluster]) -> Result<()> {
        let path = self.path(PENDING_FILE);
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(Error::at(&path))?;
        let mut w = BufWriter::new(file);
        for rec in batch {
            serde_json::to_writer(&mut w, rec)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    fn commit(&self, meta: &StoreMeta, records: &BTreeMap<DocId, StoredCluster>) -> Result<()> {
        self.write_atomic(CLUSTERS_FILE, |w| {
            for rec in records.values() {
                serde_json::to_writer(&mut *w, rec)?;
                w.write_all(b"\n")?;
            }
            Ok(())
        })?;
        self.write_atomic(META_FILE, |w| {
            serde_json::to_writer_pretty(&mut *w, meta)?;
            w.write_all(b"\n")?;
            Ok(())
        })?;
        let pending = self.path(PENDING_FILE);
        if pending.exists() {
            fs::remove_file(&pending).map_err(Error::at(pending))?;
        }
        Ok(())
    }

    fn clear(&self) -> Result<()> {
        for name in [CLUSTERS_FILE, META_FILE, PENDING_FILE, BUILD_INFO_FILE] {
            let p = self.path(name);
            if p.exists() {
                fs::remove_file(&p).map_err(Error::at(p))?;
            }
        }
        Ok(())
    }
}

/// Cluster records keyed by base id. Readers may run concurrently with a
/// build and only ever observe complete records.
pub struct ClusterStore {
    backend: Box<dyn StorageBackend>,
    meta: RwLock<StoreMeta>,
    records: RwLock<BTreeMap<DocId, StoredCluster>>,
    dir: Option<PathBuf>,
}

impl std::fmt::Debug for ClusterStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClusterStore").field("dir", &self.dir).field("len", &self.len()).finish()
    }
}

impl ClusterStore {
    pub fn in_memory() -> ClusterStore {
        ClusterStore::with_backend(Box::new(MemoryBackend), None).expect("memory backend cannot fail")
    }

    /// Opens (or creates) a directory store, replaying any interrupted build.
    pub fn open(dir: impl AsRef<Path>) -> Result<ClusterStore> {
        let dir = dir.as_ref();
        ClusterStore::with_backend(Box::new(DirBackend::new(dir)?), Some(dir.to_path_buf()))
    }

    /// Opens an existing directory store; fails if none was built there.
    pub fn open_existing(dir: impl AsRef<Path>) -> Result<ClusterStore> {
        let dir = dir.as_ref();
        if !dir.join(META_FILE).exists() {
            return Err(Error::NotFound(format!("cluster store at {}", dir.display())));
        }
        ClusterStore::open(dir)
    }

    pub fn with_backend(backend: Box<dyn StorageBackend>, dir: Option<PathBuf>) -> Result<ClusterStore> {
        let (meta, records) = match backend.load()? {
            Some((meta, recs)) => (meta, recs.into_iter().map(|r| (r.base.clone(), r)).collect()),
            None => (StoreMeta::default(), BTreeMap::new()),
        };
        Ok(ClusterStore { backend, meta: RwLock::new(meta), records: RwLock::new(records), dir })
    }

    pub fn meta(&self) -> StoreMeta {
        self.meta.read().unwrap().clone()
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, base: &DocId) -> bool {
        self.records.read().unwrap().contains_key(base)
    }

    pub fn get(&self, base: &DocId) -> Option<StoredCluster> {
        self.records.read().unwrap().get(base).cloned()
    }

    pub fn bases(&self) -> Vec<DocId> {
        self.records.read().unwrap().keys().cloned().collect()
    }

    /// Visits every record in ascending base order.
    pub fn for_each(&self, mut f: impl FnMut(&StoredCluster)) {
        for rec in self.records.read().unwrap().values() {
            f(rec);
        }
    }

    pub fn records(&self) -> Vec<StoredCluster> {
        self.records.read().unwrap().values().cloned().collect()
    }

    /// SHA-256 of the payload serialization.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for rec in self.records.read().unwrap().values() {
            h.update(serde_json::to_vec(rec).expect("record serialization is infallible"));
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    /// Writes the `|`-separated debug dump.
    pub fn dump<W: Write>(&self, mut out: W) -> Result<()> {
        for rec in self.records.read().unwrap().values() {
            writeln!(out, "{}", rec.dump_line())?;
        }
        out.flush()?;
        Ok(())
    }

    fn insert_batch(&self, batch: Vec<StoredCluster>) -> Result<()> {
        self.backend.append(&batch)?;
        let mut records = self.records.write().unwrap();
        for rec in batch {
            records.insert(rec.base.clone(), rec);
        }
        Ok(())
    }

    fn reset(&self, meta: StoreMeta) -> Result<()> {
        self.backend.clear()?;
        self.records.write().unwrap().clear();
        *self.meta.write().unwrap() = meta;
        Ok(())
    }

    fn commit(&self) -> Result<()> {
        let records = self.records.read().unwrap();
        let mut meta = self.meta.write().unwrap();
        meta.records = records.len();
        self.backend.commit(&meta, &records)?;
        if let Some(dir) = &self.dir {
            let info = serde_json::json!({ "built_at": chrono::Utc::now().to_rfc3339() });
            let path = dir.join(BUILD_INFO_FILE);
            fs::write(&path, format!("{info}\n")).map_err(Error::at(path))?;
        }
        Ok(())
    }
}

/// Totals of one [`build_all_clusters`] run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub built: usize,
    /// Records kept from an earlier, interrupted build of the same inputs.
    pub resumed: usize,
    pub citations: CitationTally,
}

fn families_hash(families: &FamilyIndex) -> String {
    let mut h = Sha256::new();
    for (fam, members) in families.families() {
        for m in members {
            h.update(fam.as_str().as_bytes());
            h.update(b",");
            h.update(m.as_str().as_bytes());
            h.update(b"\n");
        }
    }
    hex::encode(h.finalize())
}

/// Builds one record per corpus document accepted by `opts.base_kinds`.
///
/// If the store already holds a build of the same inputs (interrupted or
/// complete), records already present are kept and only missing bases are
/// built. Otherwise the store is cleared first.
pub fn build_all_clusters(
    corpus: &Corpus,
    families: &FamilyIndex,
    opts: &ClusterOptions,
    store: &ClusterStore,
) -> Result<BuildReport> {
    let meta = StoreMeta {
        format_version: STORE_FORMAT_VERSION,
        corpus_id: corpus.content_hash(),
        families_id: families_hash(families),
        config_hash: hex::encode(Sha256::digest(serde_json::to_vec(opts)?)),
        options: opts.clone(),
        records: 0,
    };
    let same_inputs = {
        let old = store.meta.read().unwrap();
        (old.format_version, &old.corpus_id, &old.families_id, &old.config_hash)
            == (meta.format_version, &meta.corpus_id, &meta.families_id, &meta.config_hash)
    };
    if !same_inputs {
        store.reset(meta.clone())?;
        // Persist meta up front so an interrupted build can be resumed.
        store.backend.commit(&meta, &BTreeMap::new())?;
    }

    let wanted: Vec<&DocId> = corpus.ids().filter(|id| opts.accepts_base(id)).collect();
    let wanted_set: BTreeSet<&DocId> = wanted.iter().copied().collect();
    {
        // Drop stale records that the current options no longer select.
        let mut records = store.records.write().unwrap();
        records.retain(|base, _| wanted_set.contains(base));
    }
    let todo: Vec<&DocId> = wanted.iter().copied().filter(|id| !store.contains(id)).collect();

    let mut report = BuildReport { resumed: wanted.len() - todo.len(), ..Default::default() };
    let resolver = CitationResolver::new(families);
    for chunk in todo.chunks(BUILD_BATCH) {
        let built: Vec<(StoredCluster, CitationTally)> = chunk
            .par_iter()
            .map(|base| {
                let (cluster, tally) = build_cluster_with(base, corpus, &resolver, opts)?;
                Ok((StoredCluster::from(&cluster), tally))
            })
            .collect::<Result<_>>()?;
        let mut batch = Vec::with_capacity(built.len());
        for (rec, tally) in built {
            report.citations += tally;
            batch.push(rec);
        }
        report.built += batch.len();
        store.insert_batch(batch)?;
    }
    store.commit()?;
    Ok(report)
}

/// Reconstructs the cluster of `base` from its stored record.
pub fn get_cluster(store: &ClusterStore, base: &DocId) -> Result<SemanticCluster> {
    store
        .get(base)
        .map(|r| SemanticCluster::from(&r))
        .ok_or_else(|| Error::NotFound(format!("cluster record for {base}")))
}
