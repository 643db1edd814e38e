// Pick evaluation queries: every second eligible granted patent of a year.

use chrono::NaiveDate;
use semclust::export::{read_id_list, select_test_documents, write_id_list, SelectionCriteria};
use semclust::synth::{generate, SynthConfig};
use semclust::{build_all_clusters, resolve_families, ClusterOptions, ClusterStore, Corpus};

pub fn run_example() -> semclust::Result<()> {
    let synth = generate(&SynthConfig { docs: 3000, ..Default::default() });
    let corpus = Corpus::from_records(synth.records);
    let families = resolve_families(&corpus, Some(&synth.family_table))?;
    let store = ClusterStore::in_memory();
    build_all_clusters(&corpus, &families, &ClusterOptions::default(), &store)?;

    let criteria = SelectionCriteria {
        date_from: NaiveDate::from_ymd_opt(2010, 1, 1),
        date_to: NaiveDate::from_ymd_opt(2014, 12, 31),
        interval: 2,
        ..Default::default()
    };
    let selection = select_test_documents(&store, &corpus, &criteria)?;
    println!("{} of {} eligible documents selected", selection.count(), selection.eligible);

    let mut file = Vec::new();
    write_id_list(&selection.ids, &mut file)?;
    assert_eq!(read_id_list(file.as_slice())?, selection.ids);
    print!("{}", String::from_utf8_lossy(&file).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}

fn main() -> semclust::Result<()> {
    run_example()
}
