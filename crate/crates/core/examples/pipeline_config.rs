// Drive every phase from one TOML configuration, as the CLI does.

use semclust::pipeline::{self, PipelineConfig};
use semclust::synth::{generate, SynthConfig};

pub fn run_example() -> semclust::Result<()> {
    let dir = tempfile::tempdir()?;
    let synth = generate(&SynthConfig { docs: 800, ..Default::default() });
    std::fs::write(dir.path().join("corpus.jsonl"), synth.corpus_lines())?;
    std::fs::write(dir.path().join("families.csv"), synth.family_table_lines())?;

    let toml = format!(
        r#"
work_dir = "{work}/work"
corpus = "{work}/corpus.jsonl"
family_table = "{work}/families.csv"

[cluster]
base_kinds = ["B2", "C1", "C2", "A1", "A"]

[export]
output_path = "{work}/dataset.jsonl"
base_kinds = ["B2", "C1", "C2"]

[selection]
date_from = "2001-01-01"
interval = 3

[evaluation]
k = 5

[adapter]
kind = "reference"
"#,
        work = dir.path().display()
    );
    let cfg_path = dir.path().join("semclust.toml");
    std::fs::write(&cfg_path, toml)?;
    let cfg = PipelineConfig::from_toml_file(&cfg_path)?;

    let ingest = pipeline::run_ingest(&cfg)?;
    let families = pipeline::run_families(&cfg)?;
    let build = pipeline::run_build(&cfg)?;
    println!("{} docs, {} families, {} clusters", ingest.accepted, families.family_count(), build.built);
    let stats = pipeline::run_stats(&cfg, &dir.path().join("stats"))?;
    println!("average citations (all groups): {:.2}", stats.total.avg_citations_all());
    let export = pipeline::run_export(&cfg)?;
    println!("exported {} clusters", export.clusters_written);
    let ids = dir.path().join("queries.txt");
    let selection = pipeline::run_select(&cfg, &ids)?;
    let report = pipeline::run_evaluate(&cfg, &ids, &dir.path().join("eval"))?;
    println!("{} queries: {}", selection.count(), report.summary());
    Ok(())
}

fn main() -> semclust::Result<()> {
    run_example()
}
