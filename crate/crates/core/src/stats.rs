//! Collection indicators and cluster-size distributions.
//!
//! Indicators are reported for three groups of base documents: applications,
//! granted patents and the total. Group membership is by kind code.
//! Citation counts are resolved cited documents per cluster (outside the base
//! family, after deduplication), split by the cited document's office.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::store::{ClusterStore, StoredCluster};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KindGroups {
    pub applications: BTreeSet<String>,
    pub patents: BTreeSet<String>,
}

impl Default for KindGroups {
    fn default() -> Self {
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        KindGroups { applications: set(&["A", "A1"]), patents: set(&["B2", "C1", "C2"]) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindGroup {
    Applications,
    Patents,
}

impl KindGroups {
    pub fn group_of(&self, kind: &str) -> Option<KindGroup> {
        if self.applications.contains(kind) {
            Some(KindGroup::Applications)
        } else if self.patents.contains(kind) {
            Some(KindGroup::Patents)
        } else {
            None
        }
    }
}

/// Counts for one group. Averages are derived on demand.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupIndicators {
    pub cluster_count: u64,
    /// Sum of cluster sizes.
    pub nonunique_doc_count: u64,
    /// Size of the union of all clusters.
    pub unique_doc_count: u64,
    pub base_only_cluster_count: u64,
    pub citations_same_office: u64,
    pub citations_other_office: u64,
    pub clusters_with_same_office: u64,
    pub clusters_with_only_same_office: u64,
    pub clusters_with_other_office: u64,
    pub clusters_with_only_other_office: u64,
    pub clusters_with_both: u64,
    pub clusters_family_only_no_citations: u64,
    pub base_family_member_sum: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Half-away-from-zero rounding to two decimals, for display.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

impl GroupIndicators {
    pub fn avg_citations_all(&self) -> f64 {
        ratio(self.citations_same_office + self.citations_other_office, self.cluster_count)
    }

    pub fn avg_citations_same(&self) -> f64 {
        ratio(self.citations_same_office, self.cluster_count)
    }

    pub fn avg_citations_other(&self) -> f64 {
        ratio(self.citations_other_office, self.cluster_count)
    }

    pub fn avg_base_family_size(&self) -> f64 {
        ratio(self.base_family_member_sum, self.cluster_count)
    }

    fn add_cluster(&mut self, rec: &StoredCluster, size: usize) {
        // A family cited from both office classes is stored once, under
        // same-office; its other-office citations still count as such.
        let (mut same_docs, mut other_docs) = (0u64, 0u64);
        for f in rec.cited_same_office.iter().chain(&rec.cited_other_office) {
            for c in &f.cited {
                if c.office() == rec.base.office() {
                    same_docs += 1;
                } else {
                    other_docs += 1;
                }
            }
        }

        self.cluster_count += 1;
        self.nonunique_doc_count += size as u64;
        self.base_family_member_sum += rec.base_family.len() as u64;
        self.citations_same_office += same_docs;
        self.citations_other_office += other_docs;
        match (same_docs > 0, other_docs > 0) {
            (true, true) => {
                self.clusters_with_same_office += 1;
                self.clusters_with_other_office += 1;
                self.clusters_with_both += 1;
            }
            (true, false) => {
                self.clusters_with_same_office += 1;
                self.clusters_with_only_same_office += 1;
            }
            (false, true) => {
                self.clusters_with_other_office += 1;
                self.clusters_with_only_other_office += 1;
            }
            (false, false) if rec.base_family.len() > 1 => self.clusters_family_only_no_citations += 1,
            (false, false) => {}
        }
        if size == 1 {
            self.base_only_cluster_count += 1;
        }
    }

    /// Checks the identities that must hold between the counts.
    pub fn check_identities(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::Config(format!("indicator identity violated: {what}")));
        if self.unique_doc_count > self.nonunique_doc_count {
            return fail("unique > non-unique documents");
        }
        if self.clusters_with_only_same_office + self.clusters_with_both != self.clusters_with_same_office {
            return fail("only-same + both != with-same");
        }
        if self.clusters_with_only_other_office + self.clusters_with_both != self.clusters_with_other_office {
            return fail("only-other + both != with-other");
        }
        let uncited = self.cluster_count - self.clusters_with_same_office - self.clusters_with_only_other_office;
        if self.base_only_cluster_count + self.clusters_family_only_no_citations != uncited {
            return fail("base-only + family-only != clusters without citations");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub applications: GroupIndicators,
    pub patents: GroupIndicators,
    pub total: GroupIndicators,
    pub notes: Vec<String>,
}

type Row = (&'static str, fn(&GroupIndicators) -> String);

const ROWS: &[Row] = &[
    ("Number of clusters (database entries)", |g| g.cluster_count.to_string()),
    ("Number of non-unique documents in all clusters", |g| g.nonunique_doc_count.to_string()),
    ("Number of unique documents in all clusters", |g| g.unique_doc_count.to_string()),
    ("Number of clusters containing only the base document", |g| g.base_only_cluster_count.to_string()),
    ("Number of citations from the base patent office", |g| g.citations_same_office.to_string()),
    ("Number of citations from other patent offices", |g| g.citations_other_office.to_string()),
    ("Clusters containing citations from the base patent office", |g| g.clusters_with_same_office.to_string()),
    ("Clusters containing citations ONLY from the base patent office", |g| {
        g.clusters_with_only_same_office.to_string()
    }),
    ("Clusters containing citations from NOT the base patent office", |g| g.clusters_with_other_office.to_string()),
    ("Clusters containing citations ONLY NOT from the base patent office", |g| {
        g.clusters_with_only_other_office.to_string()
    }),
    ("Clusters containing citations BOTH from the base office and non-base office", |g| {
        g.clusters_with_both.to_string()
    }),
    ("Number of clusters with only patent family members of the base document (without citations)", |g| {
        g.clusters_family_only_no_citations.to_string()
    }),
    ("Average number of all citations", |g| format!("{:.2}", g.avg_citations_all())),
    ("Average number of citations from the base patent office", |g| format!("{:.2}", g.avg_citations_same())),
    ("Average number of citations from other patent offices", |g| format!("{:.2}", g.avg_citations_other())),
    ("Average number of patent family members for the base document", |g| {
        format!("{:.2}", g.avg_base_family_size())
    }),
];

impl IndicatorReport {
    /// Tab-separated table with one row per indicator.
    pub fn to_table(&self) -> String {
        let mut s = String::from("Indicator\tApplications\tPatents\tTotal\n");
        for (label, value) in ROWS {
            let _ = writeln!(s, "{label}\t{}\t{}\t{}", value(&self.applications), value(&self.patents), value(&self.total));
        }
        s
    }

    /// Structured export: raw counts plus full-precision and rounded averages.
    pub fn to_json(&self) -> String {
        let group = |g: &GroupIndicators| {
            let mut v = serde_json::to_value(g).expect("plain struct");
            let avgs = [
                ("avg_citations_all", g.avg_citations_all()),
                ("avg_citations_same", g.avg_citations_same()),
                ("avg_citations_other", g.avg_citations_other()),
                ("avg_base_family_size", g.avg_base_family_size()),
            ];
            for (name, x) in avgs {
                v[name] = serde_json::json!(x);
                v[format!("{name}_2dp")] = serde_json::json!(round2(x));
            }
            v
        };
        let out = serde_json::json!({
            "applications": group(&self.applications),
            "patents": group(&self.patents),
            "total": group(&self.total),
            "notes": self.notes,
        });
        serde_json::to_string_pretty(&out).expect("json value")
    }

    pub fn check_identities(&self) -> Result<()> {
        self.applications.check_identities()?;
        self.patents.check_identities()?;
        self.total.check_identities()
    }
}

fn cluster_members(rec: &StoredCluster) -> impl Iterator<Item = &DocId> {
    rec.base_family
        .iter()
        .chain(rec.cited_same_office.iter().chain(&rec.cited_other_office).flat_map(|f| &f.members))
}

fn cluster_size(rec: &StoredCluster) -> usize {
    cluster_members(rec).collect::<HashSet<_>>().len()
}

/// Computes all indicators over the store.
pub fn compute_indicators(store: &ClusterStore, groups: &KindGroups) -> Result<IndicatorReport> {
    let mut report = IndicatorReport {
        notes: vec![
            "citation counts are resolved cited documents per cluster after deduplication, excluding the base family"
                .into(),
        ],
        ..Default::default()
    };
    let mut unique: [HashSet<DocId>; 3] = Default::default();
    store.for_each(|rec| {
        let size = cluster_size(rec);
        report.total.add_cluster(rec, size);
        unique[2].extend(cluster_members(rec).cloned());
        match groups.group_of(rec.base.kind()) {
            Some(KindGroup::Applications) => {
                report.applications.add_cluster(rec, size);
                unique[0].extend(cluster_members(rec).cloned());
            }
            Some(KindGroup::Patents) => {
                report.patents.add_cluster(rec, size);
                unique[1].extend(cluster_members(rec).cloned());
            }
            None => {}
        }
    });
    report.applications.unique_doc_count = unique[0].len() as u64;
    report.patents.unique_doc_count = unique[1].len() as u64;
    report.total.unique_doc_count = unique[2].len() as u64;
    report.check_identities()?;
    Ok(report)
}

/// Number of clusters per member-union size.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeHistogram {
    pub applications: BTreeMap<usize, u64>,
    pub patents: BTreeMap<usize, u64>,
    pub total: BTreeMap<usize, u64>,
}

impl SizeHistogram {
    /// `size,count_applications,count_patents`, ascending size.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "size,count_applications,count_patents")?;
        for size in self.total.keys() {
            let get = |m: &BTreeMap<usize, u64>| m.get(size).copied().unwrap_or(0);
            writeln!(out, "{size},{},{}", get(&self.applications), get(&self.patents))?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn size_histogram(store: &ClusterStore, groups: &KindGroups) -> SizeHistogram {
    let mut h = SizeHistogram::default();
    store.for_each(|rec| {
        let size = cluster_size(rec);
        *h.total.entry(size).or_default() += 1;
        match groups.group_of(rec.base.kind()) {
            Some(KindGroup::Applications) => *h.applications.entry(size).or_default() += 1,
            Some(KindGroup::Patents) => *h.patents.entry(size).or_default() += 1,
            None => {}
        }
    });
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterOptions;
    use crate::corpus::Corpus;
    use crate::family::resolve_families;
    use crate::record::{CitationRef, CitationSource, DocumentRecord, PriorityClaim};
    use crate::store::build_all_clusters;

    fn id(s: &str) -> DocId {
        s.parse().unwrap()
    }

    #[test]
    fn large_collection_averages() {
        let g = GroupIndicators {
            cluster_count: 14_415_916,
            citations_same_office: 126_163_574,
            citations_other_office: 581_322,
            ..Default::default()
        };
        assert_eq!(format!("{:.2}", g.avg_citations_all()), "8.79");
        assert_eq!(format!("{:.2}", g.avg_citations_same()), "8.75");
    }

    #[test]
    fn small_collection_averages() {
        let g = GroupIndicators {
            cluster_count: 1_112_502,
            citations_same_office: 790_111,
            citations_other_office: 581_840,
            ..Default::default()
        };
        assert_eq!(round2(g.avg_citations_all()), 1.23);
        assert_eq!(round2(g.avg_citations_same()), 0.71);
        assert_eq!(round2(g.avg_citations_other()), 0.52);
    }

    #[test]
    fn empty_store_is_all_zero() {
        let store = ClusterStore::in_memory();
        let r = compute_indicators(&store, &KindGroups::default()).unwrap();
        assert_eq!(r.total.cluster_count, 0);
        assert_eq!(r.total.avg_citations_all(), 0.0);
        assert_eq!(r.total.avg_base_family_size(), 0.0);
        assert!(size_histogram(&store, &KindGroups::default()).total.is_empty());
    }

    fn sample_store() -> ClusterStore {
        // US1B2 cites US2A1 (same office) and EP3A1 (other office);
        // US4A1 shares a priority with US5A1 and has no citations;
        // US6A1 stands alone.
        let p = PriorityClaim::new("US", "60/1", chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap()).unwrap();
        let mut base = DocumentRecord::new(id("US1B2_20100101"));
        for (o, n, k) in [("US", "2", "A1"), ("EP", "3", "A1")] {
            base.citations.push(CitationRef::new(o, n, Some(k), None, CitationSource::Examiner).unwrap());
        }
        let mut a4 = DocumentRecord::new(id("US4A1_20050101"));
        a4.priorities.push(p.clone());
        let mut a5 = DocumentRecord::new(id("US5A1_20050101"));
        a5.priorities.push(p);
        let corpus = Corpus::from_records([
            base,
            DocumentRecord::new(id("US2A1_20050101")),
            DocumentRecord::new(id("EP3A1_20060101")),
            a4,
            a5,
            DocumentRecord::new(id("US6A1_20050101")),
        ]);
        let families = resolve_families(&corpus, None).unwrap();
        let opts = ClusterOptions { base_kinds: ["B2", "A1"].map(String::from).into(), ..Default::default() };
        let store = ClusterStore::in_memory();
        build_all_clusters(&corpus, &families, &opts, &store).unwrap();
        store
    }

    #[test]
    fn counts_planted_indicators() {
        let r = compute_indicators(&sample_store(), &KindGroups::default()).unwrap();
        let p = &r.patents;
        assert_eq!((p.cluster_count, p.citations_same_office, p.citations_other_office), (1, 1, 1));
        assert_eq!((p.clusters_with_both, p.nonunique_doc_count), (1, 3));
        let a = &r.applications;
        // US2A1, EP3A1, US4A1, US5A1, US6A1; sizes 1, 1, 2, 2, 1
        assert_eq!(a.cluster_count, 5);
        assert_eq!((a.base_only_cluster_count, a.clusters_family_only_no_citations), (3, 2));
        assert_eq!((a.nonunique_doc_count, a.unique_doc_count), (7, 5));
        assert_eq!(a.avg_base_family_size(), 1.4);
        assert_eq!(r.total.unique_doc_count, 6);
        assert!(r.to_table().contains("Average number of all citations\t0.00\t2.00\t0.33"));
    }

    #[test]
    fn histogram_counts_sizes() {
        let h = size_histogram(&sample_store(), &KindGroups::default());
        assert_eq!(h.total, BTreeMap::from([(1, 3), (2, 2), (3, 1)]));
        let mut csv = Vec::new();
        h.write_csv(&mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "size,count_applications,count_patents\n1,3,0\n2,2,0\n3,0,1\n"
        );
    }
}
