//! Seeded synthetic patent corpora with planted structure.
//!
//! Documents are generated family by family. Every planted family is linked
//! by exactly one mechanism (shared priority, shared application, a family
//! table entry or a record `family_id`) using keys unique to that family, so
//! the resolved partition must equal the planted one. Each family also gets
//! a rare marker token; a citing document repeats the markers of the
//! families it cites, which lets a lexical searcher find them.

use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::docid::DocId;
use crate::family::FamilyId;
use crate::record::{ApplicationRef, CitationRef, CitationSource, DocumentRecord, PriorityClaim};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub docs: usize,
    pub max_family_size: usize,
    pub max_citations: usize,
    /// Share of citations that name a document outside the corpus.
    pub unresolved_rate: f64,
    /// Share of documents without abstract, description or claims.
    pub textless_rate: f64,
    /// Share of citations printed without kind code and date.
    pub partial_citation_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            docs: 1000,
            max_family_size: 4,
            max_citations: 5,
            unresolved_rate: 0.05,
            textless_rate: 0.05,
            partial_citation_rate: 0.2,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SynthCorpus {
    pub records: Vec<DocumentRecord>,
    pub family_table: Vec<(FamilyId, DocId)>,
    /// Planted family members, one entry per family.
    pub planted_families: Vec<BTreeSet<DocId>>,
}

impl SynthCorpus {
    /// Canonical corpus lines in generation order.
    pub fn corpus_lines(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&r.to_canonical_line());
            s.push('\n');
        }
        s
    }

    pub fn family_table_lines(&self) -> String {
        let mut s = String::from("# family_id,doc_id\n");
        for (f, d) in &self.family_table {
            s.push_str(&format!("{f},{d}\n"));
        }
        s
    }
}

const OFFICES: &[(&str, &[&str])] = &[
    ("US", &["A1", "B2"]),
    ("RU", &["A", "C1", "C2"]),
    ("EP", &["A1", "B1"]),
    ("JP", &["A", "B2"]),
];

const WORDS: &[&str] = &[
    "device", "method", "system", "layer", "signal", "housing", "valve", "circuit", "polymer", "sensor",
    "assembly", "control", "unit", "fluid", "module", "surface", "member", "frame", "power", "data",
];

#[derive(Clone, Copy)]
enum Link {
    Priority,
    Application,
    Table,
    RecordKey,
}

pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let epoch = NaiveDate::from_ymd_opt(2001, 1, 2).unwrap();
    let mut out = SynthCorpus::default();
    let mut family_of_doc: Vec<usize> = Vec::new();
    let mut serial = 1000u64;

    while out.records.len() < cfg.docs {
        let f = out.planted_families.len();
        let size = rng.gen_range(1..=cfg.max_family_size.max(1)).min(cfg.docs - out.records.len());
        let link = [Link::Priority, Link::Application, Link::Table, Link::RecordKey][rng.gen_range(0..4)];
        let prio_date = epoch + Duration::days(rng.gen_range(0..8000));
        let mut members = BTreeSet::new();
        for m in 0..size {
            let (office, kinds) = OFFICES[rng.gen_range(0..OFFICES.len())];
            let kind = kinds[rng.gen_range(0..kinds.len())];
            serial += rng.gen_range(1..50);
            let date = prio_date + Duration::days(rng.gen_range(200..1500));
            let id = DocId::new(office, &serial.to_string(), kind, date).expect("generated ids are valid");
            let mut rec = DocumentRecord::new(id.clone());
            if size > 1 {
                match link {
                    Link::Priority => rec
                        .priorities
                        .push(PriorityClaim::new("US", &format!("60/{f:06}"), prio_date).expect("valid priority")),
                    Link::Application => {
                        rec.application = Some(ApplicationRef::new("WO", &format!("PCT{f:07}")).expect("valid application"))
                    }
                    Link::Table => out.family_table.push((FamilyId::new(format!("T{f}")).expect("valid key"), id.clone())),
                    Link::RecordKey => rec.family_id = Some(format!("K{f}")),
                }
            } else if m == 0 && rng.gen_bool(0.3) {
                // A priority nobody else shares.
                rec.priorities.push(PriorityClaim::new("US", &format!("60/{f:06}"), prio_date).expect("valid priority"));
            }
            members.insert(id);
            out.records.push(rec);
            family_of_doc.push(f);
        }
        out.planted_families.push(members);
    }

    // Citations point backwards in time where possible; targets outside the
    // corpus use numbers no generated document has.
    let n = out.records.len();
    let ids: Vec<DocId> = out.records.iter().map(|r| r.id.clone()).collect();
    for i in 0..n {
        let count = rng.gen_range(0..=cfg.max_citations);
        let mut cited_families = BTreeSet::new();
        for _ in 0..count {
            let source = [CitationSource::Examiner, CitationSource::Applicant, CitationSource::Unknown][rng.gen_range(0..3)];
            if rng.gen_bool(cfg.unresolved_rate) {
                let number = format!("9{:08}", rng.gen_range(0..100_000_000u64));
                let (kind, date) = if rng.gen_bool(0.5) {
                    (Some("B1"), Some(epoch + Duration::days(rng.gen_range(0..3000))))
                } else {
                    (None, None)
                };
                out.records[i]
                    .citations
                    .push(CitationRef::new("DE", &number, kind, date, source).expect("valid citation"));
                continue;
            }
            let j = rng.gen_range(0..n);
            if j == i {
                continue;
            }
            let t = &ids[j];
            let partial = rng.gen_bool(cfg.partial_citation_rate);
            let cite = if partial {
                CitationRef::new(t.office(), t.number(), None, None, source)
            } else {
                CitationRef::new(t.office(), t.number(), Some(t.kind()), Some(t.pub_date()), source)
            };
            out.records[i].citations.push(cite.expect("valid citation"));
            cited_families.insert(family_of_doc[j]);
        }

        if !rng.gen_bool(cfg.textless_rate) {
            let mut words: Vec<String> = (0..8).map(|_| WORDS[rng.gen_range(0..WORDS.len())].to_string()).collect();
            words.push(marker(family_of_doc[i]));
            for f in &cited_families {
                words.push(marker(*f));
            }
            words.shuffle(&mut rng);
            let text = words.join(" ");
            match rng.gen_range(0..3) {
                0 => out.records[i].abstract_text = Some(text),
                1 => out.records[i].claims = Some(text),
                _ => {
                    out.records[i].abstract_text = Some(text.clone());
                    out.records[i].description = Some(format!("detailed {text}"));
                }
            }
            out.records[i].title = Some(format!("{} {}", WORDS[i % WORDS.len()], marker(family_of_doc[i])));
        }
        out.records[i].normalize();
    }
    out
}

fn marker(family: usize) -> String {
    format!("zq{family}x")
}
