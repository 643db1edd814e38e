// Read the bibliographic subset of an ST.96-style XML publication.

use semclust::st96::parse_st96_subset;

const XML: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<pat:PatentPublication xmlns:pat="http://www.wipo.int/standards/XMLSchema/ST96/Patent"
                       xmlns:com="http://www.wipo.int/standards/XMLSchema/ST96/Common">
  <pat:PatentPublicationIdentification>
    <com:IPOfficeCode>RU</com:IPOfficeCode>
    <pat:PublicationNumber>2512345</pat:PublicationNumber>
    <com:PatentDocumentKindCode>C2</com:PatentDocumentKindCode>
    <com:PublicationDate>2014-04-10</com:PublicationDate>
  </pat:PatentPublicationIdentification>
  <pat:InventionTitle>Heat exchanger</pat:InventionTitle>
  <pat:Abstract><com:P>A plate heat exchanger with   corrugated plates.</com:P></pat:Abstract>
  <pat:PatentCitation citedBy="examiner">
    <com:IPOfficeCode>US</com:IPOfficeCode>
    <pat:PatentNumber>7000001</pat:PatentNumber>
    <com:PatentDocumentKindCode>B1</com:PatentDocumentKindCode>
    <pat:PatentPublicationDate>2006-02-14</pat:PatentPublicationDate>
  </pat:PatentCitation>
</pat:PatentPublication>
"#;

pub fn run_example() -> semclust::Result<()> {
    let record = parse_st96_subset(XML)?;
    println!("{}", record.id);
    println!("abstract: {}", record.abstract_text.as_deref().unwrap_or("-"));
    for c in &record.citations {
        println!("cites {:?} ({:?})", c.doc_id().map(|d| d.to_string()), c.source);
    }
    println!("{}", record.to_canonical_line());
    Ok(())
}

fn main() -> semclust::Result<()> {
    run_example()
}
