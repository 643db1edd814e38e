// Export clusters with abstracts as a JSON-lines dataset.

use semclust::export::{export_dataset, read_dataset, ExportConfig, TextFields};
use semclust::synth::{generate, SynthConfig};
use semclust::{build_all_clusters, resolve_families, ClusterOptions, ClusterStore, Corpus};

pub fn run_example() -> semclust::Result<()> {
    let synth = generate(&SynthConfig { docs: 500, ..Default::default() });
    let corpus = Corpus::from_records(synth.records);
    let families = resolve_families(&corpus, Some(&synth.family_table))?;
    let store = ClusterStore::in_memory();
    build_all_clusters(&corpus, &families, &ClusterOptions::default(), &store)?;

    let dir = tempfile::tempdir()?;
    let cfg = ExportConfig {
        base_kinds: ["B2", "C1", "C2"].map(String::from).into(),
        include_texts: TextFields { abstract_text: true, ..Default::default() },
        examiner_only: true,
        max_clusters: Some(50),
        output_path: dir.path().join("dataset.jsonl"),
        ..Default::default()
    };
    let summary = export_dataset(&store, &corpus, &families, &cfg)?;
    println!("{} clusters, {} distinct documents", summary.clusters_written, summary.documents_referenced);

    let clusters = read_dataset(&cfg.output_path)?;
    let first = &clusters[0];
    println!(
        "{}: {} same-office and {} other-office cited families, {} texts",
        first.base,
        first.cited_same_office.len(),
        first.cited_other_office.len(),
        first.texts.as_ref().map_or(0, |t| t.len())
    );
    Ok(())
}

fn main() -> semclust::Result<()> {
    run_example()
}
