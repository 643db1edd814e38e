//! Semantic cluster construction.
//!
//! The cluster of a base document `x` is its family `C_x` plus the family
//! `C_y` of every document `y` cited against `x`. Cited families are split by
//! whether the citation points to the base document's office.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::family::{FamilyId, FamilyIndex};
use crate::record::{CitationRef, CitationSource};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterOptions {
    /// Only follow citations marked as examiner citations.
    pub examiner_only: bool,
    /// Kind codes of documents that get a cluster record; empty means all.
    pub base_kinds: BTreeSet<String>,
}

impl ClusterOptions {
    pub fn accepts_base(&self, id: &DocId) -> bool {
        self.base_kinds.is_empty() || self.base_kinds.contains(id.kind())
    }
}

/// A cited family: the cited documents that led to it and all its members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitedFamily {
    pub cited: BTreeSet<DocId>,
    pub members: BTreeSet<DocId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticCluster {
    pub base: DocId,
    pub base_family_id: FamilyId,
    /// `C_x`, always contains `base`.
    pub base_family: BTreeSet<DocId>,
    pub cited_same_office: BTreeMap<FamilyId, CitedFamily>,
    pub cited_other_office: BTreeMap<FamilyId, CitedFamily>,
}

impl SemanticCluster {
    /// Resolved cited documents outside the base family.
    pub fn cited_docs(&self) -> BTreeSet<&DocId> {
        self.cited_families().flat_map(|(_, f)| &f.cited).collect()
    }

    /// All cited families, same-office first.
    pub fn cited_families(&self) -> impl Iterator<Item = (&FamilyId, &CitedFamily)> {
        self.cited_same_office.iter().chain(&self.cited_other_office)
    }

    /// `C_x ∪ ⋃ C_y`.
    pub fn member_union(&self) -> BTreeSet<&DocId> {
        self.base_family
            .iter()
            .chain(self.cited_families().flat_map(|(_, f)| &f.members))
            .collect()
    }

    pub fn size(&self) -> usize {
        self.member_union().len()
    }
}

/// Outcome of resolving one citation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolution {
    /// Matches a document known to the corpus or the family table.
    Known(DocId),
    /// Unknown, but kind and date were present so a full id could be formed.
    Constructed(DocId),
    Dropped,
}

/// Maps loosely structured citations onto known document ids.
#[derive(Debug)]
pub struct CitationResolver<'a> {
    families: &'a FamilyIndex,
    by_number: HashMap<(&'a str, &'a str), Vec<&'a DocId>>,
}

impl<'a> CitationResolver<'a> {
    pub fn new(families: &'a FamilyIndex) -> CitationResolver<'a> {
        let mut by_number: HashMap<(&str, &str), Vec<&DocId>> = HashMap::new();
        // doc_ids() is sorted, so each candidate list is too.
        for id in families.doc_ids() {
            by_number.entry((id.office(), id.number())).or_default().push(id);
        }
        CitationResolver { families, by_number }
    }

    pub fn families(&self) -> &'a FamilyIndex {
        self.families
    }

    /// Candidates share office and number; a kind code, when given, must
    /// match; a date, when given, narrows the candidates only if some match
    /// it (citation dates are not always publication dates). The smallest
    /// remaining id wins.
    pub fn resolve(&self, c: &CitationRef) -> Resolution {
        let candidates = self.by_number.get(&(c.office.as_str(), c.number.as_str()));
        let by_kind: Vec<&DocId> = candidates
            .into_iter()
            .flatten()
            .copied()
            .filter(|id| c.kind.as_deref().is_none_or(|k| id.kind() == k))
            .collect();
        let dated = c.date.and_then(|date| by_kind.iter().find(|id| id.pub_date() == date));
        if let Some(id) = dated.or(by_kind.first()) {
            return Resolution::Known((*id).clone());
        }
        match c.doc_id() {
            Some(id) => Resolution::Constructed(id),
            None => Resolution::Dropped,
        }
    }
}

/// Per-cluster citation bookkeeping not kept in the cluster itself.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationTally {
    pub followed: usize,
    pub filtered_by_source: usize,
    pub constructed: usize,
    pub dropped: usize,
    /// Citations that resolved into the base document's own family.
    pub self_family: usize,
}

impl std::ops::AddAssign for CitationTally {
    fn add_assign(&mut self, o: CitationTally) {
        self.followed += o.followed;
        self.filtered_by_source += o.filtered_by_source;
        self.constructed += o.constructed;
        self.dropped += o.dropped;
        self.self_family += o.self_family;
    }
}

/// Builds the semantic cluster of `base`.
pub fn build_cluster(base: &DocId, corpus: &Corpus, families: &FamilyIndex, opts: &ClusterOptions) -> Result<SemanticCluster> {
    build_cluster_with(base, corpus, &CitationResolver::new(families), opts).map(|(c, _)| c)
}

/// As [`build_cluster`] with a shared resolver; also returns the citation tally.
pub fn build_cluster_with(
    base: &DocId,
    corpus: &Corpus,
    resolver: &CitationResolver<'_>,
    opts: &ClusterOptions,
) -> Result<(SemanticCluster, CitationTally)> {
    let record = corpus.get(base).ok_or_else(|| Error::NotFound(format!("base document {base} in corpus")))?;
    let families = resolver.families();
    let (base_family_id, base_family) = families.family_of(base)?;

    let mut tally = CitationTally::default();
    // family -> (cited docs, members, any same-office citation)
    let mut cited: BTreeMap<FamilyId, (BTreeSet<DocId>, BTreeSet<DocId>, bool)> = BTreeMap::new();
    for c in &record.citations {
        if opts.examiner_only && c.source != CitationSource::Examiner {
            tally.filtered_by_source += 1;
            continue;
        }
        let (fam, members, y) = match resolver.resolve(c) {
            Resolution::Known(y) => {
                let (fam, members) = families.family_of(&y)?;
                (fam.clone(), members.clone(), y)
            }
            Resolution::Constructed(y) => {
                tally.constructed += 1;
                (FamilyId::external(&y), BTreeSet::from([y.clone()]), y)
            }
            Resolution::Dropped => {
                tally.dropped += 1;
                continue;
            }
        };
        tally.followed += 1;
        if fam == *base_family_id {
            tally.self_family += 1;
            continue;
        }
        let same = y.office() == base.office();
        let entry = cited.entry(fam).or_insert_with(|| (BTreeSet::new(), members, false));
        entry.0.insert(y);
        entry.2 |= same;
    }

    let mut cluster = SemanticCluster {
        base: base.clone(),
        base_family_id: base_family_id.clone(),
        base_family: base_family.clone(),
        cited_same_office: BTreeMap::new(),
        cited_other_office: BTreeMap::new(),
    };
    for (fam, (cited, members, same)) in cited {
        let target = if same { &mut cluster.cited_same_office } else { &mut cluster.cited_other_office };
        target.insert(fam, CitedFamily { cited, members });
    }
    Ok((cluster, tally))
}
