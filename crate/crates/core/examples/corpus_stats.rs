// Collection indicators and the cluster size histogram.

use semclust::stats::{compute_indicators, size_histogram, KindGroups};
use semclust::synth::{generate, SynthConfig};
use semclust::{build_all_clusters, resolve_families, ClusterOptions, ClusterStore, Corpus};

pub fn run_example() -> semclust::Result<()> {
    let synth = generate(&SynthConfig { docs: 2000, seed: 11, ..Default::default() });
    let corpus = Corpus::from_records(synth.records);
    let families = resolve_families(&corpus, Some(&synth.family_table))?;
    let store = ClusterStore::in_memory();
    build_all_clusters(&corpus, &families, &ClusterOptions::default(), &store)?;

    let groups = KindGroups::default();
    let report = compute_indicators(&store, &groups)?;
    report.check_identities()?;
    print!("{}", report.to_table());

    let mut csv = Vec::new();
    size_histogram(&store, &groups).write_csv(&mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}

fn main() -> semclust::Result<()> {
    run_example()
}
