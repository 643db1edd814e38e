//! Random inputs and brute-force oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

use semclust::metrics::{RankedResult, RelevanceSets};
use semclust::record::ApplicationRef;
use semclust::{CitationRef, CitationSource, DocId, DocumentRecord, FamilyId, PriorityClaim};

pub fn date(days: i64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 1).unwrap() + chrono::Duration::days(days)
}

pub fn id(s: &str) -> DocId {
    s.parse().unwrap()
}

#[derive(Clone, Debug)]
pub struct RandomCorpus {
    pub records: Vec<DocumentRecord>,
    pub table: Vec<(FamilyId, DocId)>,
}

impl RandomCorpus {
    /// Every id known to family resolution: corpus ids plus table ids.
    pub fn universe(&self) -> BTreeSet<DocId> {
        self.records.iter().map(|r| r.id.clone()).chain(self.table.iter().map(|(_, d)| d.clone())).collect()
    }

    pub fn shuffled(&self, rng: &mut impl Rng) -> RandomCorpus {
        let mut c = self.clone();
        c.records.shuffle(rng);
        c.table.shuffle(rng);
        c
    }
}

/// A corpus with dense family links and deliberately ambiguous citations:
/// numbers are reused across kinds and dates, some citations lack kind or
/// date, and some point outside the corpus.
pub fn random_corpus(rng: &mut impl Rng, n: usize) -> RandomCorpus {
    let offices = ["US", "RU", "EP"];
    let kinds = ["A1", "B2", "C1"];
    let numbers = (n * 2 / 3).max(1);
    let mut ids = BTreeSet::new();
    while ids.len() < n {
        let office = offices[rng.gen_range(0..offices.len())];
        let number = 100 + rng.gen_range(0..numbers);
        let kind = kinds[rng.gen_range(0..kinds.len())];
        ids.insert(DocId::new(office, &number.to_string(), kind, date(rng.gen_range(0..3))).unwrap());
    }
    let ids: Vec<DocId> = ids.into_iter().collect();

    let mut table = Vec::new();
    for i in 0..rng.gen_range(0..=n / 20 + 1) {
        // Table-only documents from an office the corpus never uses.
        let ext = DocId::new("JP", &(5000 + i).to_string(), "A", date(0)).unwrap();
        table.push((FamilyId::new(format!("T{}", rng.gen_range(0..n / 8 + 1))).unwrap(), ext));
    }

    let pool = |rng: &mut dyn rand::RngCore, size: usize| rng.gen_range(0..size.max(1));
    let mut records = Vec::with_capacity(n);
    for doc in &ids {
        let mut r = DocumentRecord::new(doc.clone());
        if rng.gen_bool(0.4) {
            let p = pool(rng, n / 4);
            r.priorities.push(PriorityClaim::new("US", &(500 + p).to_string(), date(p as i64)).unwrap());
        }
        if rng.gen_bool(0.15) {
            let p = pool(rng, n / 4);
            // Same number, different date: not the same priority.
            r.priorities.push(PriorityClaim::new("US", &(500 + p).to_string(), date(p as i64 + 1)).unwrap());
        }
        if rng.gen_bool(0.2) {
            r.application = Some(ApplicationRef::new("WO", &(700 + pool(rng, n / 5)).to_string()).unwrap());
        }
        if rng.gen_bool(0.1) {
            r.family_id = Some(format!("K{}", pool(rng, n / 8)));
        }
        if rng.gen_bool(0.1) {
            table.push((FamilyId::new(format!("T{}", pool(rng, n / 8))).unwrap(), doc.clone()));
        }
        for _ in 0..rng.gen_range(0..=4) {
            let source = [CitationSource::Examiner, CitationSource::Applicant, CitationSource::Unknown][rng.gen_range(0..3)];
            let c = if rng.gen_bool(0.1) {
                let number = (90_000 + rng.gen_range(0..1000)).to_string();
                if rng.gen_bool(0.5) {
                    CitationRef::new("DE", &number, Some("B1"), Some(date(7)), source)
                } else {
                    CitationRef::new("DE", &number, None, None, source)
                }
            } else {
                let t = &ids[rng.gen_range(0..ids.len())];
                match rng.gen_range(0..10) {
                    0..=5 => CitationRef::new(t.office(), t.number(), Some(t.kind()), Some(t.pub_date()), source),
                    6 => CitationRef::new(t.office(), t.number(), Some(t.kind()), Some(date(9)), source),
                    7 => CitationRef::new(t.office(), t.number(), Some(t.kind()), None, source),
                    _ => CitationRef::new(t.office(), t.number(), None, None, source),
                }
            };
            r.citations.push(c.unwrap());
        }
        r.normalize();
        records.push(r);
    }
    RandomCorpus { records, table }
}

/// Families by fixpoint label propagation over explicit pairwise links.
pub fn oracle_families(c: &RandomCorpus) -> BTreeMap<DocId, BTreeSet<DocId>> {
    let universe: Vec<DocId> = c.universe().into_iter().collect();
    let n = universe.len();
    let pos = |d: &DocId| universe.binary_search(d).unwrap();
    let mut table_keys: Vec<BTreeSet<String>> = vec![BTreeSet::new(); n];
    for (f, d) in &c.table {
        table_keys[pos(d)].insert(f.as_str().to_string());
    }
    let mut keys = table_keys;
    let mut prios = vec![Vec::new(); n];
    let mut apps = vec![None; n];
    for r in &c.records {
        let i = pos(&r.id);
        keys[i].extend(r.family_id.clone());
        prios[i] = r.priorities.clone();
        apps[i] = r.application.clone();
    }
    let linked = |i: usize, j: usize| {
        !keys[i].is_disjoint(&keys[j])
            || prios[i].iter().any(|p| prios[j].contains(p))
            || (apps[i].is_some() && apps[i] == apps[j])
    };
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if label[j] < label[i] && linked(i, j) {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<DocId>> = BTreeMap::new();
    for (i, l) in label.iter().enumerate() {
        groups.entry(*l).or_default().insert(universe[i].clone());
    }
    let mut out = BTreeMap::new();
    for members in groups.values() {
        for m in members {
            out.insert(m.clone(), members.clone());
        }
    }
    out
}

/// Expected family names: the smallest external key, else `FAM<n>` in
/// order of each family's smallest member.
pub fn oracle_family_names(c: &RandomCorpus) -> BTreeMap<BTreeSet<DocId>, String> {
    let fams: BTreeSet<BTreeSet<DocId>> = oracle_families(c).into_values().collect();
    let mut keys: BTreeMap<&DocId, Vec<&str>> = BTreeMap::new();
    for (f, d) in &c.table {
        keys.entry(d).or_default().push(f.as_str());
    }
    for r in &c.records {
        if let Some(k) = &r.family_id {
            keys.entry(&r.id).or_default().push(k);
        }
    }
    let mut by_min: Vec<&BTreeSet<DocId>> = fams.iter().collect();
    by_min.sort_by_key(|f| f.iter().next().unwrap().clone());
    let mut next = 0;
    let mut out = BTreeMap::new();
    for f in by_min {
        let name = match f.iter().flat_map(|d| keys.get(d).into_iter().flatten()).min() {
            Some(k) => k.to_string(),
            None => {
                next += 1;
                format!("FAM{next}")
            }
        };
        out.insert(f.clone(), name);
    }
    out
}

/// Resolves a citation against the universe: same office and number, kind
/// must match when given, an exact date match wins when present, smallest id
/// otherwise.
pub fn oracle_resolve(universe: &BTreeSet<DocId>, c: &CitationRef) -> Option<DocId> {
    let candidates: Vec<&DocId> = universe
        .iter()
        .filter(|d| d.office() == c.office && d.number() == c.number)
        .filter(|d| c.kind.as_ref().is_none_or(|k| d.kind() == k.as_str()))
        .collect();
    if let Some(date) = c.date {
        if let Some(d) = candidates.iter().find(|d| d.pub_date() == date) {
            return Some((*d).clone());
        }
    }
    candidates.first().map(|d| (*d).clone())
}

#[derive(Debug, PartialEq, Eq)]
pub struct OracleCluster {
    pub base_family: BTreeSet<DocId>,
    /// Cited family members -> cited documents in it.
    pub families: BTreeMap<BTreeSet<DocId>, BTreeSet<DocId>>,
    pub union: BTreeSet<DocId>,
}

pub fn oracle_cluster(
    c: &RandomCorpus,
    families: &BTreeMap<DocId, BTreeSet<DocId>>,
    base: &DocumentRecord,
    examiner_only: bool,
) -> OracleCluster {
    let universe = c.universe();
    let base_family = families[&base.id].clone();
    let mut fams: BTreeMap<BTreeSet<DocId>, BTreeSet<DocId>> = BTreeMap::new();
    for cite in &base.citations {
        if examiner_only && cite.source != CitationSource::Examiner {
            continue;
        }
        let (members, y) = match oracle_resolve(&universe, cite) {
            Some(y) => (families[&y].clone(), y),
            None => match (&cite.kind, cite.date) {
                (Some(k), Some(d)) => {
                    let y = DocId::new(&cite.office, &cite.number, k, d).unwrap();
                    (BTreeSet::from([y.clone()]), y)
                }
                _ => continue,
            },
        };
        if members == base_family {
            continue;
        }
        fams.entry(members).or_default().insert(y);
    }
    let mut union = base_family.clone();
    for m in fams.keys() {
        union.extend(m.iter().cloned());
    }
    OracleCluster { base_family, families: fams, union }
}

/// One randomized metric instance: per-query relevance sets and rankings.
#[derive(Clone, Debug)]
pub struct MetricInstance {
    pub k: usize,
    pub exclude_base_family: bool,
    pub queries: Vec<(RelevanceSets, RankedResult)>,
}

pub fn random_metric_instance(rng: &mut impl Rng) -> MetricInstance {
    let k = rng.gen_range(1..=10);
    let n = rng.gen_range(1..=20);
    let mut next = 1u32;
    let mut fresh = |size: usize| -> BTreeSet<DocId> {
        (0..size)
            .map(|_| {
                next += 1;
                id(&format!("US{next}A1_20000101"))
            })
            .collect()
    };
    let queries = (0..n)
        .map(|qi| {
            let base_family = fresh(rng.gen_range(1..=8));
            let relevant: BTreeMap<FamilyId, BTreeSet<DocId>> = (0..rng.gen_range(1..=6))
                .map(|f| (FamilyId::new(format!("F{qi}_{f}")).unwrap(), fresh(rng.gen_range(1..=8))))
                .collect();
            let noise = fresh(rng.gen_range(0..=8));
            let mut pool: Vec<DocId> = base_family.iter().chain(noise.iter()).cloned().collect();
            for m in relevant.values() {
                pool.extend(m.iter().cloned());
            }
            pool.shuffle(rng);
            pool.truncate(rng.gen_range(0..=pool.len().min(15)));
            let query = base_family.iter().next().unwrap().clone();
            (RelevanceSets { base_family, relevant_families: relevant }, RankedResult::new(query, pool))
        })
        .collect();
    MetricInstance { k, exclude_base_family: rng.gen_bool(0.3), queries }
}

#[derive(Debug, PartialEq, Eq)]
pub struct OracleAggregates {
    pub s: BigRational,
    pub h: BigRational,
    pub mpf: BigRational,
    pub mrf: BigRational,
}

fn ratio(a: usize, b: usize) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Distinct relevant families with a member among the first K entries.
pub fn oracle_hits(rel: &RelevanceSets, ranking: &[DocId], k: usize, exclude_base_family: bool) -> usize {
    let mut top = Vec::new();
    for d in ranking {
        if top.len() == k {
            break;
        }
        if exclude_base_family && rel.base_family.contains(d) {
            continue;
        }
        top.push(d);
    }
    rel.relevant_families.values().filter(|members| top.iter().any(|d| members.contains(*d))).count()
}

pub fn oracle_metrics(inst: &MetricInstance) -> OracleAggregates {
    let n = inst.queries.len();
    let (mut s, mut h) = (0, 0);
    let (mut pf, mut rf) = (ratio(0, 1), ratio(0, 1));
    for (rel, res) in &inst.queries {
        let hits = oracle_hits(rel, &res.ranking, inst.k, inst.exclude_base_family);
        let cy = rel.relevant_families.len();
        if hits > 0 {
            s += 1;
        }
        if hits >= inst.k.min(cy) {
            h += 1;
        }
        pf += ratio(hits, inst.k);
        rf += ratio(hits, cy);
    }
    let nn = BigRational::from_integer(BigInt::from(n));
    OracleAggregates { s: ratio(s, n), h: ratio(h, n), mpf: pf / nn.clone(), mrf: rf / nn }
}
