//! Patent family resolution.
//!
//! Families are the connected components of a graph over every known
//! document (corpus records plus documents named only in the family table).
//! Two documents are linked when they
//!
//! - share a family key (family table line or a record's `family_id`),
//! - share a priority claim (office, number, date), or
//! - were published from the same application (office, number).
//!
//! A component that carries external family keys is named by the smallest
//! one. Other components get `FAM<n>`, numbered by ascending smallest member.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::docid::DocId;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FamilyId(String);

impl FamilyId {
    pub fn new(key: impl Into<String>) -> Result<FamilyId> {
        let key = key.into().trim().to_string();
        if key.is_empty() || key.contains(',') || key.contains('|') || key.chars().any(char::is_whitespace) {
            return Err(Error::InvalidId(format!("family key `{key}` is empty or contains separators")));
        }
        Ok(FamilyId(key))
    }

    /// Family key of a pseudo-family made of a single cited document that is
    /// not known to the corpus or the family table.
    pub fn external(id: &DocId) -> FamilyId {
        FamilyId(format!("EXT:{id}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FamilyId({})", self.0)
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(len: usize) -> UnionFind {
        UnionFind { parent: (0..len).collect(), size: vec![1; len] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Partition of all known documents into families.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyIndex {
    doc_family: BTreeMap<DocId, FamilyId>,
    members: BTreeMap<FamilyId, BTreeSet<DocId>>,
}

impl FamilyIndex {
    /// Returns the family of `id` and its full member set.
    pub fn family_of(&self, id: &DocId) -> Result<(&FamilyId, &BTreeSet<DocId>)> {
        let fam = self.doc_family.get(id).ok_or_else(|| Error::NotFound(format!("document {id} in family index")))?;
        Ok((fam, &self.members[fam]))
    }

    pub fn family_id(&self, id: &DocId) -> Option<&FamilyId> {
        self.doc_family.get(id)
    }

    pub fn members(&self, family: &FamilyId) -> Option<&BTreeSet<DocId>> {
        self.members.get(family)
    }

    pub fn families(&self) -> impl Iterator<Item = (&FamilyId, &BTreeSet<DocId>)> {
        self.members.iter()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &DocId> {
        self.doc_family.keys()
    }

    pub fn doc_count(&self) -> usize {
        self.doc_family.len()
    }

    pub fn family_count(&self) -> usize {
        self.members.len()
    }

    /// Rebuilds an index from `(family, doc)` pairs as written by
    /// [`FamilyIndex::write_table`]. Pairs are taken as the final partition.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (FamilyId, DocId)>) -> Result<FamilyIndex> {
        let mut index = FamilyIndex::default();
        for (fam, doc) in pairs {
            if let Some(prev) = index.doc_family.get(&doc) {
                if *prev != fam {
                    return Err(Error::FamilyConflict { doc: doc.to_string(), first: prev.0.clone(), second: fam.0 });
                }
                continue;
            }
            index.members.entry(fam.clone()).or_default().insert(doc.clone());
            index.doc_family.insert(doc, fam);
        }
        Ok(index)
    }

    /// Writes `family_id,doc_id` lines, grouped by family and sorted.
    pub fn write_table<W: Write>(&self, mut out: W) -> Result<()> {
        for (fam, members) in &self.members {
            for doc in members {
                writeln!(out, "{fam},{doc}")?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Parses a family table: `family_id,doc_id` per line, `#` comments and
/// blank lines ignored.
pub fn parse_family_table<R: BufRead>(source: R) -> Result<Vec<(FamilyId, DocId)>> {
    let mut pairs = Vec::new();
    let mut seen: HashMap<DocId, FamilyId> = HashMap::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| Error::Malformed { line: i + 1, reason };
        let (fam, doc) = trimmed
            .split_once(',')
            .ok_or_else(|| malformed("expected `family_id,doc_id`".into()))?;
        let fam = FamilyId::new(fam).map_err(|e| malformed(e.to_string()))?;
        let doc: DocId = doc.trim().parse().map_err(|e: Error| malformed(e.to_string()))?;
        match seen.get(&doc) {
            Some(prev) if *prev != fam => {
                return Err(Error::FamilyConflict { doc: doc.to_string(), first: prev.0.clone(), second: fam.0 });
            }
            Some(_) => continue,
            None => {
                seen.insert(doc.clone(), fam.clone());
                pairs.push((fam, doc));
            }
        }
    }
    Ok(pairs)
}

/// Computes families over the corpus and an optional family table.
pub fn resolve_families(corpus: &Corpus, table: Option<&[(FamilyId, DocId)]>) -> Result<FamilyIndex> {
    let table = table.unwrap_or(&[]);

    // Dense node numbering in canonical order keeps the result independent
    // of input order.
    let universe: BTreeSet<&DocId> = corpus.ids().chain(table.iter().map(|(_, d)| d)).collect();
    let docs: Vec<&DocId> = universe.into_iter().collect();
    let node: HashMap<&DocId, usize> = docs.iter().enumerate().map(|(i, d)| (*d, i)).collect();

    let mut uf = UnionFind::new(docs.len());
    let mut keyed: HashMap<&str, usize> = HashMap::new();
    let mut by_priority: HashMap<_, usize> = HashMap::new();
    let mut by_application: HashMap<_, usize> = HashMap::new();
    // (node, external family key)
    let mut keys: Vec<(usize, &str)> = Vec::new();

    let link = |map_node: usize, anchor: Option<usize>, uf: &mut UnionFind| {
        if let Some(a) = anchor {
            uf.union(a, map_node);
        }
    };

    for (fam, doc) in table {
        let n = node[doc];
        keys.push((n, fam.as_str()));
        let anchor = keyed.get(fam.as_str()).copied();
        link(n, anchor, &mut uf);
        keyed.entry(fam.as_str()).or_insert(n);
    }
    for rec in corpus.records() {
        let n = node[&rec.id];
        if let Some(fam) = rec.family_id.as_deref() {
            keys.push((n, fam));
            let anchor = keyed.get(fam).copied();
            link(n, anchor, &mut uf);
            keyed.entry(fam).or_insert(n);
        }
        for p in &rec.priorities {
            let anchor = by_priority.get(p).copied();
            link(n, anchor, &mut uf);
            by_priority.entry(p).or_insert(n);
        }
        if let Some(app) = &rec.application {
            let anchor = by_application.get(app).copied();
            link(n, anchor, &mut uf);
            by_application.entry(app).or_insert(n);
        }
    }

    // Components keyed by root, in order of their smallest member (docs is sorted).
    let mut component_of_root: HashMap<usize, usize> = HashMap::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    for i in 0..docs.len() {
        let root = uf.find(i);
        let c = *component_of_root.entry(root).or_insert_with(|| {
            components.push(Vec::new());
            components.len() - 1
        });
        components[c].push(i);
    }
    let mut external: Vec<Option<&str>> = vec![None; components.len()];
    for (n, key) in keys {
        let c = component_of_root[&uf.find(n)];
        if external[c].is_none_or(|k| key < k) {
            external[c] = Some(key);
        }
    }

    let used: BTreeSet<&str> = external.iter().flatten().copied().collect();
    let mut next = 1usize;
    let mut index = FamilyIndex::default();
    for (c, members) in components.iter().enumerate() {
        let fam = match external[c] {
            Some(key) => FamilyId::new(key)?,
            None => loop {
                let candidate = format!("FAM{next}");
                next += 1;
                if !used.contains(candidate.as_str()) {
                    break FamilyId(candidate);
                }
            },
        };
        let set: BTreeSet<DocId> = members.iter().map(|&i| docs[i].clone()).collect();
        for d in &set {
            index.doc_family.insert(d.clone(), fam.clone());
        }
        index.members.insert(fam, set);
    }
    Ok(index)
}
