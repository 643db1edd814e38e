// Build a persistent cluster store and read a cluster back.

use semclust::synth::{generate, SynthConfig};
use semclust::{build_all_clusters, get_cluster, resolve_families, ClusterOptions, ClusterStore, Corpus};

pub fn run_example() -> semclust::Result<()> {
    let synth = generate(&SynthConfig { docs: 300, ..Default::default() });
    let corpus = Corpus::from_records(synth.records);
    let families = resolve_families(&corpus, Some(&synth.family_table))?;

    let dir = tempfile::tempdir()?;
    let store = ClusterStore::open(dir.path().join("store"))?;
    let opts = ClusterOptions { base_kinds: ["B2", "C1", "C2"].map(String::from).into(), ..Default::default() };
    let report = build_all_clusters(&corpus, &families, &opts, &store)?;
    println!("built {} clusters; {} citations followed, {} dropped", report.built, report.citations.followed, report.citations.dropped);

    // Reopening reuses the stored records.
    let again = build_all_clusters(&corpus, &families, &opts, &ClusterStore::open(dir.path().join("store"))?)?;
    assert_eq!(again.built, 0);

    let base = store.bases().into_iter().next().expect("at least one base");
    let cluster = get_cluster(&store, &base)?;
    println!("cluster of {base}: {} documents", cluster.size());
    println!("  base family {}: {:?}", cluster.base_family_id, cluster.base_family.iter().map(|d| d.as_str()).collect::<Vec<_>>());
    for (fam, f) in cluster.cited_families() {
        println!("  cited family {fam}: {} members", f.members.len());
    }

    let mut dump = Vec::new();
    store.dump(&mut dump)?;
    println!("{}", String::from_utf8_lossy(&dump).lines().next().unwrap_or(""));
    Ok(())
}

fn main() -> semclust::Result<()> {
    run_example()
}
