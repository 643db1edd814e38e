//! Minimal adapter for ST.96-style patent publication XML.
//!
//! Only the handful of elements needed to populate a [`DocumentRecord`] are
//! read. Elements are matched by local name, so namespace prefixes (`pat:`,
//! `com:`) are irrelevant:
//!
//! | field           | container                                   | children                                                                      |
//! |-----------------|---------------------------------------------|-------------------------------------------------------------------------------|
//! | publication     | `PatentPublicationIdentification`           | `IPOfficeCode`, `PublicationNumber`, `PatentDocumentKindCode`, `PublicationDate` |
//! | application     | `ApplicationIdentification`                 | `IPOfficeCode`, `ApplicationNumberText`                                       |
//! | priority        | `PriorityClaim` (repeated)                  | `IPOfficeCode`, `ApplicationNumberText`, `FilingDate`                         |
//! | citation        | `PatentCitation` (repeated)                 | `IPOfficeCode`, `PatentNumber`, `PatentDocumentKindCode`?, `PatentPublicationDate`?, `CitedBy`? or attribute `citedBy` |
//! | texts           | `InventionTitle`, `Abstract`, `Description`, `Claims` | all descendant text, whitespace collapsed                           |
//!
//! Dates may be `YYYY-MM-DD` or `YYYYMMDD`. A document without a
//! publication identification is rejected; every other section is optional.

use roxmltree::{Document, Node};

use crate::docid::{parse_date, DocId};
use crate::error::{Error, Result};
use crate::record::{ApplicationRef, CitationRef, CitationSource, DocumentRecord, PriorityClaim};

/// Parses one XML document into a record.
pub fn parse_st96_subset(xml: &str) -> Result<DocumentRecord> {
    let doc = Document::parse(xml).map_err(|e| Error::Xml(e.to_string()))?;
    let root = doc.root_element();

    let publication = find(root, "PatentPublicationIdentification")
        .ok_or_else(|| Error::Xml("missing publication reference (PatentPublicationIdentification)".into()))?;
    let id = DocId::new(
        &required(publication, "IPOfficeCode")?,
        &required(publication, "PublicationNumber")?,
        &required(publication, "PatentDocumentKindCode")?,
        parse_date(&required(publication, "PublicationDate")?)?,
    )?;

    let mut rec = DocumentRecord::new(id);
    rec.title = find(root, "InventionTitle").map(text_of);
    rec.abstract_text = find(root, "Abstract").map(text_of);
    rec.description = find(root, "Description").map(text_of);
    rec.claims = find(root, "Claims").map(text_of);

    if let Some(app) = find(root, "ApplicationIdentification") {
        if let (Some(office), Some(number)) = (child_text(app, "IPOfficeCode"), child_text(app, "ApplicationNumberText")) {
            rec.application = Some(ApplicationRef::new(&office, &number)?);
        }
    }

    for claim in descendants(root, "PriorityClaim") {
        rec.priorities.push(PriorityClaim::new(
            &required(claim, "IPOfficeCode")?,
            &required(claim, "ApplicationNumberText")?,
            parse_date(&required(claim, "FilingDate")?)?,
        )?);
    }

    for cite in descendants(root, "PatentCitation") {
        let source = attribute(cite, "citedBy")
            .map(str::to_string)
            .or_else(|| child_text(cite, "CitedBy"))
            .map(|l| CitationSource::from_label(&l))
            .unwrap_or_default();
        let date = child_text(cite, "PatentPublicationDate").map(|d| parse_date(&d)).transpose()?;
        rec.citations.push(CitationRef::new(
            &required(cite, "IPOfficeCode")?,
            &required(cite, "PatentNumber")?,
            child_text(cite, "PatentDocumentKindCode").as_deref(),
            date,
            source,
        )?);
    }

    rec.normalize();
    Ok(rec)
}

fn descendants<'a, 'i>(node: Node<'a, 'i>, name: &'static str) -> impl Iterator<Item = Node<'a, 'i>> {
    node.descendants().filter(move |n| n.is_element() && n.tag_name().name() == name)
}

fn find<'a, 'i>(node: Node<'a, 'i>, name: &'static str) -> Option<Node<'a, 'i>> {
    descendants(node, name).next()
}

fn attribute<'a>(node: Node<'a, '_>, name: &str) -> Option<&'a str> {
    node.attributes().find(|a| a.name() == name).map(|a| a.value())
}

fn text_of(node: Node) -> String {
    let mut out = String::new();
    for t in node.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()) {
        for word in t.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(word);
        }
    }
    out
}

fn child_text(node: Node, name: &'static str) -> Option<String> {
    find(node, name).map(text_of).filter(|t| !t.is_empty())
}

fn required(node: Node, name: &'static str) -> Result<String> {
    child_text(node, name)
        .ok_or_else(|| Error::Xml(format!("<{}> lacks <{name}>", node.tag_name().name())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::parse_document_record;

    const MINIMAL: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<pat:PatentPublication xmlns:pat="http://www.wipo.int/standards/XMLSchema/ST96/Patent"
                       xmlns:com="http://www.wipo.int/standards/XMLSchema/ST96/Common">
  <pat:PatentPublicationIdentification>
    <com:IPOfficeCode>US</com:IPOfficeCode>
    <pat:PublicationNumber>9166223</pat:PublicationNumber>
    <com:PatentDocumentKindCode>B2</com:PatentDocumentKindCode>
    <com:PublicationDate>2015-10-20</com:PublicationDate>
  </pat:PatentPublicationIdentification>
</pat:PatentPublication>"#;

    const FULL: &str = r#"<?xml version="1.0"?>
<PatentPublication>
  <BibliographicData>
    <PatentPublicationIdentification>
      <IPOfficeCode>ru</IPOfficeCode>
      <PublicationNumber>2 700 001</PublicationNumber>
      <PatentDocumentKindCode>c1</PatentDocumentKindCode>
      <PublicationDate>20190701</PublicationDate>
    </PatentPublicationIdentification>
    <ApplicationIdentification>
      <IPOfficeCode>RU</IPOfficeCode>
      <ApplicationNumber><ApplicationNumberText>2018100001</ApplicationNumberText></ApplicationNumber>
    </ApplicationIdentification>
    <PriorityClaimBag>
      <PriorityClaim>
        <IPOfficeCode>RU</IPOfficeCode>
        <ApplicationNumber><ApplicationNumberText>2017100000</ApplicationNumberText></ApplicationNumber>
        <FilingDate>2017-01-09</FilingDate>
      </PriorityClaim>
    </PriorityClaimBag>
    <InventionTitle>Heat   exchanger</InventionTitle>
    <ReferenceCitationBag>
      <PatentCitation citedBy="examiner">
        <CitedPatentIdentification>
          <IPOfficeCode>RU</IPOfficeCode>
          <PatentNumber>2600000</PatentNumber>
          <PatentDocumentKindCode>C2</PatentDocumentKindCode>
          <PatentPublicationDate>2017-01-01</PatentPublicationDate>
        </CitedPatentIdentification>
      </PatentCitation>
      <PatentCitation>
        <CitedBy>cited by applicant</CitedBy>
        <IPOfficeCode>US</IPOfficeCode>
        <PatentNumber>5,000,000</PatentNumber>
      </PatentCitation>
    </ReferenceCitationBag>
  </BibliographicData>
  <Abstract><P>A plate</P><P>heat exchanger.</P></Abstract>
  <Claims><Claim><ClaimText>1. A heat exchanger.</ClaimText></Claim></Claims>
</PatentPublication>"#;

    #[test]
    fn minimal_document() {
        let rec = parse_st96_subset(MINIMAL).unwrap();
        assert_eq!(rec.id.as_str(), "US9166223B2_20151020");
        assert!(!rec.has_text());
        assert!(rec.citations.is_empty() && rec.priorities.is_empty() && rec.application.is_none());
    }

    #[test]
    fn full_document() {
        let rec = parse_st96_subset(FULL).unwrap();
        assert_eq!(rec.id.as_str(), "RU2700001C1_20190701");
        assert_eq!(rec.title.as_deref(), Some("Heat exchanger"));
        assert_eq!(rec.abstract_text.as_deref(), Some("A plate heat exchanger."));
        assert_eq!(rec.claims.as_deref(), Some("1. A heat exchanger."));
        assert_eq!(rec.description, None);
        assert_eq!(rec.application, Some(ApplicationRef::new("RU", "2018100001").unwrap()));
        assert_eq!(rec.priorities.len(), 1);
        assert_eq!(rec.citations.len(), 2);
        assert_eq!(rec.citations[0].source, CitationSource::Examiner);
        assert_eq!(rec.citations[0].doc_id().unwrap().as_str(), "RU2600000C2_20170101");
        assert_eq!(rec.citations[1].source, CitationSource::Applicant);
        assert_eq!(rec.citations[1].number, "5000000");
    }

    #[test]
    fn one_examiner_citation() {
        let xml = MINIMAL.replace(
            "</pat:PatentPublicationIdentification>",
            "</pat:PatentPublicationIdentification>
             <pat:PatentCitation><pat:CitedBy>EXAMINER</pat:CitedBy>
               <com:IPOfficeCode>US</com:IPOfficeCode><pat:PatentNumber>1</pat:PatentNumber>
             </pat:PatentCitation>",
        );
        let rec = parse_st96_subset(&xml).unwrap();
        assert_eq!(rec.citations.len(), 1);
        assert_eq!(rec.citations[0].source, CitationSource::Examiner);
    }

    #[test]
    fn missing_publication_reference_is_an_error() {
        let err = parse_st96_subset("<PatentPublication><Abstract>x</Abstract></PatentPublication>").unwrap_err();
        assert!(matches!(err, Error::Xml(_)));
        assert!(parse_st96_subset("<unclosed>").is_err());
    }

    #[test]
    fn agrees_with_canonical_parser() {
        for xml in [MINIMAL, FULL] {
            let rec = parse_st96_subset(xml).unwrap();
            assert_eq!(parse_document_record(&rec.to_canonical_line()).unwrap(), rec);
        }
    }
}
