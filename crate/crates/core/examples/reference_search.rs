// The built-in TF-IDF searcher as a baseline system.

use semclust::export::{select_test_documents, SelectionCriteria};
use semclust::metrics::EvaluationConfig;
use semclust::pipeline::evaluate_queries;
use semclust::search::ReferenceSearcher;
use semclust::synth::{generate, SynthConfig};
use semclust::{build_all_clusters, resolve_families, ClusterOptions, ClusterStore, Corpus};

pub fn run_example() -> semclust::Result<()> {
    let synth = generate(&SynthConfig { docs: 2000, seed: 3, ..Default::default() });
    let corpus = Corpus::from_records(synth.records);
    let families = resolve_families(&corpus, Some(&synth.family_table))?;
    let store = ClusterStore::in_memory();
    build_all_clusters(&corpus, &families, &ClusterOptions::default(), &store)?;

    let searcher = ReferenceSearcher::new(&corpus);
    let query = corpus.records().find(|r| r.has_text()).expect("some text");
    let top = searcher.search(query, 5)?;
    println!("top 5 for {}: {:?}", query.id, top.ranking.iter().map(|d| d.as_str()).collect::<Vec<_>>());

    let criteria = SelectionCriteria { date_from: chrono::NaiveDate::from_ymd_opt(2001, 1, 1), ..Default::default() };
    let queries = select_test_documents(&store, &corpus, &criteria)?.ids;
    let eval = evaluate_queries(&queries, &store, &corpus, &searcher, &EvaluationConfig::new(10)?)?;
    println!("{}", eval.report.summary());
    Ok(())
}

fn main() -> semclust::Result<()> {
    run_example()
}
