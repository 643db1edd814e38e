//! Canonical patent document identifiers.
//!
//! The canonical string form is `<office><number><kind>_<YYYYMMDD>`, for
//! example `US9166223B2_20151020`. Identifiers compare, hash and sort by that
//! string, so "ascending canonical id" order everywhere in the crate is plain
//! byte order of the canonical form.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A patent document identifier: office, number, kind code and publication
/// date. Cheap to clone.
#[derive(Clone)]
pub struct DocId {
    repr: Arc<str>,
    kind_start: usize,
    kind_end: usize,
    pub_date: NaiveDate,
}

/// Formats the canonical string for the given fields after normalization.
pub fn canonical_doc_id(office: &str, number: &str, kind: &str, pub_date: NaiveDate) -> Result<String> {
    DocId::new(office, number, kind, pub_date).map(|id| id.to_string())
}

/// Uppercases and trims an office code, checking `[A-Z]{2}`.
pub fn normalize_office(office: &str) -> Result<String> {
    let office = office.trim().to_ascii_uppercase();
    if office.len() == 2 && office.bytes().all(|b| b.is_ascii_uppercase()) {
        Ok(office)
    } else {
        Err(Error::InvalidId(format!("office code `{office}` is not two letters")))
    }
}

/// Removes spaces, commas and slashes and uppercases; leading zeros stay.
pub fn normalize_number(number: &str) -> String {
    number
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',' && *c != '/')
        .flat_map(char::to_uppercase)
        .collect()
}

fn normalize_doc_number(number: &str) -> Result<String> {
    let number = normalize_number(number);
    if number.is_empty() {
        return Err(Error::InvalidId("empty document number".into()));
    }
    if !number.bytes().all(|b| b.is_ascii_digit() || b.is_ascii_uppercase()) {
        return Err(Error::InvalidId(format!("document number `{number}` has invalid characters")));
    }
    if !number.bytes().any(|b| b.is_ascii_digit()) {
        return Err(Error::InvalidId(format!("document number `{number}` has no digits")));
    }
    Ok(number)
}

/// Uppercases and trims a kind code, checking `[A-Z][0-9]?`.
pub fn normalize_kind(kind: &str) -> Result<String> {
    let kind = kind.trim().to_ascii_uppercase();
    let b = kind.as_bytes();
    let ok = match b {
        [l] => l.is_ascii_uppercase(),
        [l, d] => l.is_ascii_uppercase() && d.is_ascii_digit(),
        _ => false,
    };
    if ok {
        Ok(kind)
    } else {
        Err(Error::InvalidId(format!("kind code `{kind}` does not match [A-Z][0-9]?")))
    }
}

/// Parses `YYYY-MM-DD` or `YYYYMMDD`.
pub fn parse_date(s: &str) -> Result<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%Y%m%d"))
        .map_err(|_| Error::MalformedDate(s.to_string()))
}

impl DocId {
    pub fn new(office: &str, number: &str, kind: &str, pub_date: NaiveDate) -> Result<DocId> {
        let office = normalize_office(office)?;
        let number = normalize_doc_number(number)?;
        let kind = normalize_kind(kind)?;
        let repr = format!("{office}{number}{kind}_{}", pub_date.format("%Y%m%d"));
        let kind_start = 2 + number.len();
        Ok(DocId {
            kind_end: kind_start + kind.len(),
            kind_start,
            repr: repr.into(),
            pub_date,
        })
    }

    pub fn office(&self) -> &str {
        &self.repr[..2]
    }

    pub fn number(&self) -> &str {
        &self.repr[2..self.kind_start]
    }

    pub fn kind(&self) -> &str {
        &self.repr[self.kind_start..self.kind_end]
    }

    pub fn pub_date(&self) -> NaiveDate {
        self.pub_date
    }

    pub fn as_str(&self) -> &str {
        &self.repr
    }
}

impl FromStr for DocId {
    type Err = Error;

    /// Parses the canonical form. The kind code is the trailing letter, or
    /// letter plus digit, before the underscore.
    fn from_str(s: &str) -> Result<DocId> {
        let bad = || Error::InvalidId(format!("`{s}` is not a canonical document id"));
        let (head, date) = s.rsplit_once('_').ok_or_else(bad)?;
        if date.len() != 8 || !date.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let pub_date = NaiveDate::parse_from_str(date, "%Y%m%d").map_err(|_| Error::MalformedDate(date.into()))?;
        let b = head.as_bytes();
        if b.len() < 4 || !head.is_ascii() {
            return Err(bad());
        }
        let kind_len = if b[b.len() - 1].is_ascii_digit() { 2 } else { 1 };
        let kind_start = b.len() - kind_len;
        if kind_start < 3 {
            return Err(bad());
        }
        let id = DocId::new(&head[..2], &head[2..kind_start], &head[kind_start..], pub_date)?;
        if id.as_str() != s {
            return Err(bad());
        }
        Ok(id)
    }
}

impl PartialEq for DocId {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr
    }
}

impl Eq for DocId {}

impl Hash for DocId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.repr.hash(state)
    }
}

impl PartialOrd for DocId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DocId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.repr.cmp(&other.repr)
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.repr)
    }
}

impl fmt::Debug for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DocId({})", self.repr)
    }
}

impl Serialize for DocId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.repr)
    }
}

impl<'de> Deserialize<'de> for DocId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
