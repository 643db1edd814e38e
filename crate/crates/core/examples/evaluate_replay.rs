// Score a saved run file with family-aware metrics.

use semclust::metrics::{relevance_sets, EvaluationConfig, RankedResult};
use semclust::pipeline::evaluate_queries;
use semclust::search::{read_run, save_run};
use semclust::synth::{generate, SynthConfig};
use semclust::{build_all_clusters, get_cluster, resolve_families, ClusterOptions, ClusterStore, Corpus};

pub fn run_example() -> semclust::Result<()> {
    let synth = generate(&SynthConfig { docs: 1000, ..Default::default() });
    let corpus = Corpus::from_records(synth.records);
    let families = resolve_families(&corpus, Some(&synth.family_table))?;
    let store = ClusterStore::in_memory();
    build_all_clusters(&corpus, &families, &ClusterOptions::default(), &store)?;

    // A system that finds one member of every other relevant family, after
    // first returning a document of the query's own family.
    let mut results = Vec::new();
    for base in store.bases().into_iter().take(200) {
        let rel = relevance_sets(&get_cluster(&store, &base)?);
        if rel.cy_size() == 0 {
            continue;
        }
        let mut ranking = vec![base.clone()];
        ranking.extend(rel.relevant_families.values().step_by(2).map(|m| m.iter().next().unwrap().clone()));
        results.push(RankedResult::new(base, ranking));
    }
    let mut file = Vec::new();
    save_run(&results, &mut file)?;
    let run = read_run(file.as_slice())?;

    let queries: Vec<_> = run.keys().cloned().collect();
    for k in [1, 3, 10] {
        let eval = evaluate_queries(&queries, &store, &corpus, &run, &EvaluationConfig::new(k)?)?;
        println!("{}", eval.report.summary());
    }
    let cfg = EvaluationConfig { k: 3, exclude_base_family_from_ranking: true };
    let eval = evaluate_queries(&queries, &store, &corpus, &run, &cfg)?;
    println!("base family excluded: {}", eval.report.summary());
    Ok(())
}

fn main() -> semclust::Result<()> {
    run_example()
}
