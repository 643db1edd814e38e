// Parse canonical records and group them into patent families.

use semclust::corpus::InputFormat;
use semclust::{ingest_corpus, resolve_families, IngestMode};

const LINES: &str = r#"{"id":{"office":"US","number":"8000001","kind":"B2","pub_date":"2011-08-16"},"priorities":[{"office":"US","number":"61/100","date":"2008-03-01"}]}
{"id":{"office":"EP","number":"2100001","kind":"A1","pub_date":"2009-09-02"},"priorities":[{"office":"US","number":"61/100","date":"2008-03-01"}]}
{"id":{"office":"RU","number":"2400001","kind":"C1","pub_date":"2010-10-27"},"application":{"office":"WO","number":"PCT/US2009/000001"}}
{"id":{"office":"JP","number":"2011500001","kind":"A","pub_date":"2011-01-06"},"application":{"office":"WO","number":"PCT/US2009/000001"}}
{"id":{"office":"US","number":"8000002","kind":"B2","pub_date":"2011-08-16"}}
{"id":{"office":"US","number":"oops"}}
"#;

pub fn run_example() -> semclust::Result<()> {
    let (corpus, stats) = ingest_corpus(LINES.as_bytes(), InputFormat::Canonical, IngestMode::Skip)?;
    println!("accepted {} records, rejected {}", stats.accepted, stats.rejected);
    for r in &stats.rejections {
        println!("  line {}: {}", r.line, r.reason);
    }

    let families = resolve_families(&corpus, None)?;
    for (family, members) in families.families() {
        let ids: Vec<_> = members.iter().map(|d| d.as_str()).collect();
        println!("{family}: {}", ids.join(", "));
    }
    assert_eq!(families.family_count(), 3);
    Ok(())
}

fn main() -> semclust::Result<()> {
    run_example()
}
