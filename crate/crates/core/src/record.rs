//! Bibliographic document records and the canonical line format.
//!
//! One record per line, encoded as a JSON object:
//!
//! ```text
//! {"id":{"office":"US","number":"9166223","kind":"B2","pub_date":"2015-10-20"},
//!  "title":"…","abstract":"…","description":"…","claims":"…",
//!  "citations":[{"office":"US","number":"7000001","kind":"B1","date":"2006-02-14","source":"examiner"}],
//!  "priorities":[{"office":"US","number":"61/111111","date":"2010-01-01"}],
//!  "application":{"office":"US","number":"13/500000"},
//!  "family_id":"F1"}
//! ```
//!
//! Unknown keys are ignored. Dates are ISO-8601 `YYYY-MM-DD`.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::docid::{normalize_kind, normalize_number, normalize_office, parse_date, DocId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CitationSource {
    Examiner,
    Applicant,
    #[default]
    Unknown,
}

impl CitationSource {
    /// Lenient mapping of the category labels seen in bulk data
    /// ("examiner", "cited by examiner", "applicant", ...).
    pub fn from_label(label: &str) -> CitationSource {
        let l = label.trim().to_ascii_lowercase();
        if l.contains("examiner") {
            CitationSource::Examiner
        } else if l.contains("applicant") {
            CitationSource::Applicant
        } else {
            CitationSource::Unknown
        }
    }
}

/// A reference to a cited patent document as printed in a search report.
/// It may lack a kind code or date and therefore not form a full [`DocId`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CitationRef {
    pub office: String,
    pub number: String,
    pub kind: Option<String>,
    pub date: Option<NaiveDate>,
    pub source: CitationSource,
}

impl CitationRef {
    pub fn new(
        office: &str,
        number: &str,
        kind: Option<&str>,
        date: Option<NaiveDate>,
        source: CitationSource,
    ) -> Result<CitationRef> {
        let number = normalize_number(number);
        if number.is_empty() {
            return Err(Error::Record("citation with empty number".into()));
        }
        Ok(CitationRef {
            office: normalize_office(office)?,
            number,
            kind: kind.filter(|k| !k.trim().is_empty()).map(normalize_kind).transpose()?,
            date,
            source,
        })
    }

    /// The full identifier this reference names, when kind and date are known.
    pub fn doc_id(&self) -> Option<DocId> {
        DocId::new(&self.office, &self.number, self.kind.as_deref()?, self.date?).ok()
    }

    fn key(&self) -> (&str, &str, Option<&str>, Option<NaiveDate>) {
        (&self.office, &self.number, self.kind.as_deref(), self.date)
    }
}

/// Priority data. Equal triples denote the same priority.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PriorityClaim {
    pub office: String,
    pub number: String,
    pub date: NaiveDate,
}

impl PriorityClaim {
    pub fn new(office: &str, number: &str, date: NaiveDate) -> Result<PriorityClaim> {
        let number = normalize_number(number);
        if number.is_empty() {
            return Err(Error::Record("priority claim with empty number".into()));
        }
        Ok(PriorityClaim { office: normalize_office(office)?, number, date })
    }
}

/// Office and application number of the application a document was published from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ApplicationRef {
    pub office: String,
    pub number: String,
}

impl ApplicationRef {
    pub fn new(office: &str, number: &str) -> Result<ApplicationRef> {
        let number = normalize_number(number);
        if number.is_empty() {
            return Err(Error::Record("application reference with empty number".into()));
        }
        Ok(ApplicationRef { office: normalize_office(office)?, number })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocumentRecord {
    pub id: DocId,
    pub title: Option<String>,
    pub abstract_text: Option<String>,
    pub description: Option<String>,
    pub claims: Option<String>,
    pub citations: Vec<CitationRef>,
    pub priorities: Vec<PriorityClaim>,
    pub application: Option<ApplicationRef>,
    pub family_id: Option<String>,
}

impl DocumentRecord {
    pub fn new(id: DocId) -> DocumentRecord {
        DocumentRecord {
            id,
            title: None,
            abstract_text: None,
            description: None,
            claims: None,
            citations: Vec::new(),
            priorities: Vec::new(),
            application: None,
            family_id: None,
        }
    }

    /// True iff at least one of abstract, description or claims is non-empty.
    pub fn has_text(&self) -> bool {
        [&self.abstract_text, &self.description, &self.claims]
            .into_iter()
            .any(|t| t.as_deref().is_some_and(|t| !t.trim().is_empty()))
    }

    /// Drops blank texts, deduplicates citations and priorities. Called by
    /// both parsers so that they agree field for field.
    pub fn normalize(&mut self) {
        for text in [
            &mut self.title,
            &mut self.abstract_text,
            &mut self.description,
            &mut self.claims,
        ] {
            if text.as_deref().is_some_and(|t| t.trim().is_empty()) {
                *text = None;
            }
        }
        self.family_id = self.family_id.take().map(|f| f.trim().to_string()).filter(|f| !f.is_empty());

        // First occurrence keeps its position; an examiner mark on any duplicate wins.
        let mut seen: BTreeMap<(String, String, Option<String>, Option<NaiveDate>), usize> = BTreeMap::new();
        let mut deduped: Vec<CitationRef> = Vec::with_capacity(self.citations.len());
        for c in self.citations.drain(..) {
            let (o, n, k, d) = c.key();
            let key = (o.to_string(), n.to_string(), k.map(str::to_string), d);
            match seen.get(&key) {
                // Examiner < Applicant < Unknown
                Some(&i) => deduped[i].source = deduped[i].source.min(c.source),
                None => {
                    seen.insert(key, deduped.len());
                    deduped.push(c);
                }
            }
        }
        self.citations = deduped;

        let mut seen_p = std::collections::BTreeSet::new();
        self.priorities.retain(|p| seen_p.insert(p.clone()));
    }

    /// Serializes to one canonical line (no trailing newline).
    pub fn to_canonical_line(&self) -> String {
        serde_json::to_string(&RawRecord::from(self)).expect("record serialization is infallible")
    }
}

/// Parses one line of the canonical corpus format.
pub fn parse_document_record(line: &str) -> Result<DocumentRecord> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| Error::Record(e.to_string()))?;
    raw.into_record()
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawId {
    office: String,
    number: String,
    kind: String,
    pub_date: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawCitation {
    office: String,
    number: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    date: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPriority {
    office: String,
    number: String,
    date: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawApplication {
    office: String,
    number: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    id: RawId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    #[serde(default, rename = "abstract", skip_serializing_if = "Option::is_none")]
    abstract_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    claims: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    citations: Vec<RawCitation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    priorities: Vec<RawPriority>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    application: Option<RawApplication>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family_id: Option<String>,
}

impl RawRecord {
    fn into_record(self) -> Result<DocumentRecord> {
        let id = DocId::new(&self.id.office, &self.id.number, &self.id.kind, parse_date(&self.id.pub_date)?)?;
        let citations = self
            .citations
            .into_iter()
            .map(|c| {
                let date = c.date.as_deref().filter(|d| !d.trim().is_empty()).map(parse_date).transpose()?;
                let source = c.source.as_deref().map(CitationSource::from_label).unwrap_or_default();
                CitationRef::new(&c.office, &c.number, c.kind.as_deref(), date, source)
            })
            .collect::<Result<Vec<_>>>()?;
        let priorities = self
            .priorities
            .into_iter()
            .map(|p| PriorityClaim::new(&p.office, &p.number, parse_date(&p.date)?))
            .collect::<Result<Vec<_>>>()?;
        let application = self.application.map(|a| ApplicationRef::new(&a.office, &a.number)).transpose()?;
        let mut rec = DocumentRecord {
            id,
            title: self.title,
            abstract_text: self.abstract_text,
            description: self.description,
            claims: self.claims,
            citations,
            priorities,
            application,
            family_id: self.family_id,
        };
        rec.normalize();
        Ok(rec)
    }
}

impl From<&DocumentRecord> for RawRecord {
    fn from(r: &DocumentRecord) -> RawRecord {
        let iso = |d: NaiveDate| d.format("%Y-%m-%d").to_string();
        RawRecord {
            id: RawId {
                office: r.id.office().into(),
                number: r.id.number().into(),
                kind: r.id.kind().into(),
                pub_date: iso(r.id.pub_date()),
            },
            title: r.title.clone(),
            abstract_text: r.abstract_text.clone(),
            description: r.description.clone(),
            claims: r.claims.clone(),
            citations: r
                .citations
                .iter()
                .map(|c| RawCitation {
                    office: c.office.clone(),
                    number: c.number.clone(),
                    kind: c.kind.clone(),
                    date: c.date.map(iso),
                    source: match c.source {
                        CitationSource::Unknown => None,
                        CitationSource::Examiner => Some("examiner".into()),
                        CitationSource::Applicant => Some("applicant".into()),
                    },
                })
                .collect(),
            priorities: r
                .priorities
                .iter()
                .map(|p| RawPriority { office: p.office.clone(), number: p.number.clone(), date: iso(p.date) })
                .collect(),
            application: r
                .application
                .as_ref()
                .map(|a| RawApplication { office: a.office.clone(), number: a.number.clone() }),
            family_id: r.family_id.clone(),
        }
    }
}
