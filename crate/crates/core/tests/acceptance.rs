//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semclust::corpus::InputFormat;
use semclust::export::{select_test_documents, SelectionCriteria};
use semclust::metrics::{exact_aggregates, per_query_metrics, relevance_sets, EvaluationConfig, RankedResult};
use semclust::pipeline::evaluate_queries;
use semclust::search::Run;
use semclust::stats::GroupIndicators;
use semclust::synth::{generate, SynthConfig};
use semclust::{
    build_all_clusters, build_cluster, get_cluster, ingest_corpus, resolve_families, CitationRef, CitationSource,
    ClusterOptions, ClusterStore, Corpus, DocId, DocumentRecord, IngestMode, PriorityClaim,
};

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration) -> std::result::Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.1?}, limit {limit:?}"))
    }
}

fn metric_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let instances = 400;
    for i in 0..instances {
        let inst = random_metric_instance(&mut rng);
        let cfg = EvaluationConfig { k: inst.k, exclude_base_family_from_ranking: inst.exclude_base_family };
        let rows = inst
            .queries
            .iter()
            .map(|(rel, res)| per_query_metrics(res, rel, &cfg))
            .collect::<semclust::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        let got = exact_aggregates(&rows).map_err(|e| e.to_string())?;
        let want = oracle_metrics(&inst);
        ensure!(
            (&got.s_at_k, &got.h_at_k, &got.mpf_at_k, &got.mrf_at_k) == (&want.s, &want.h, &want.mpf, &want.mrf),
            "instance {i}: got {got:?}, oracle {want:?}"
        );
        let report = semclust::aggregate_metrics(rows).map_err(|e| e.to_string())?;
        let f = |r: &num_rational::BigRational| num_traits::ToPrimitive::to_f64(r).unwrap();
        for (a, b) in [
            (report.s_at_k, f(&want.s)),
            (report.h_at_k, f(&want.h)),
            (report.mpf_at_k, f(&want.mpf)),
            (report.mrf_at_k, f(&want.mrf)),
        ] {
            ensure!((a - b).abs() <= 1e-12, "instance {i}: float aggregate {a} vs {b}");
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{instances} instances exact, {:.1?}", start.elapsed()))
}

fn table_arithmetic() -> Outcome {
    let t1 = GroupIndicators {
        cluster_count: 14_415_916,
        citations_same_office: 126_163_574,
        citations_other_office: 581_322,
        ..Default::default()
    };
    let t2 = GroupIndicators {
        cluster_count: 1_112_502,
        citations_same_office: 790_111,
        citations_other_office: 581_840,
        ..Default::default()
    };
    let checks = [
        ("large collection, all", t1.avg_citations_all(), 8.79),
        ("large collection, same office", t1.avg_citations_same(), 8.75),
        ("small collection, all", t2.avg_citations_all(), 1.23),
        ("small collection, same office", t2.avg_citations_same(), 0.71),
    ];
    for (what, got, want) in checks {
        ensure!((got - want).abs() <= 0.005, "{what}: {got} vs {want}");
    }
    Ok(checks.iter().map(|(w, g, _)| format!("{w} {g:.4}")).collect::<Vec<_>>().join(", "))
}

fn cluster_construction_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let corpora = 100;
    let mut clusters = 0;
    for i in 0..corpora {
        let n = rng.gen_range(1..=500);
        let rc = random_corpus(&mut rng, n);
        let examiner_only = rng.gen_bool(0.3);
        let corpus = Corpus::from_records(rc.records.clone());
        let families = resolve_families(&corpus, Some(&rc.table)).map_err(|e| e.to_string())?;
        let oracle_fams = oracle_families(&rc);
        let opts = ClusterOptions { examiner_only, ..Default::default() };
        let store = ClusterStore::in_memory();
        build_all_clusters(&corpus, &families, &opts, &store).map_err(|e| e.to_string())?;
        ensure!(store.len() == corpus.len(), "corpus {i}: {} records for {} docs", store.len(), corpus.len());

        for rec in &rc.records {
            let c = build_cluster(&rec.id, &corpus, &families, &opts).map_err(|e| e.to_string())?;
            let stored = get_cluster(&store, &rec.id).map_err(|e| e.to_string())?;
            ensure!(stored == c, "corpus {i}: stored cluster of {} differs", rec.id);

            let want = oracle_cluster(&rc, &oracle_fams, rec, examiner_only);
            let union: BTreeSet<DocId> = c.member_union().into_iter().cloned().collect();
            ensure!(union == want.union, "corpus {i}: union of {} is {union:?}, oracle {:?}", rec.id, want.union);
            ensure!(c.base_family == want.base_family, "corpus {i}: base family of {}", rec.id);
            let got: BTreeMap<BTreeSet<DocId>, BTreeSet<DocId>> =
                c.cited_families().map(|(_, f)| (f.members.clone(), f.cited.clone())).collect();
            ensure!(got == want.families, "corpus {i}: cited families of {}", rec.id);

            ensure!(
                !c.cited_same_office.contains_key(&c.base_family_id) && !c.cited_other_office.contains_key(&c.base_family_id),
                "corpus {i}: base family listed as cited for {}",
                rec.id
            );
            for (fam, f) in c.cited_families() {
                ensure!(f.members.is_disjoint(&c.base_family), "corpus {i}: {fam} overlaps base family of {}", rec.id);
                ensure!(f.cited.is_subset(&f.members), "corpus {i}: cited docs outside {fam}");
            }
            for fam in c.cited_same_office.keys() {
                ensure!(!c.cited_other_office.contains_key(fam), "corpus {i}: {fam} in both categories");
            }
            for (fam, f) in &c.cited_same_office {
                ensure!(f.cited.iter().any(|y| y.office() == rec.id.office()), "corpus {i}: {fam} wrongly same-office");
            }
            for (fam, f) in &c.cited_other_office {
                ensure!(f.cited.iter().all(|y| y.office() != rec.id.office()), "corpus {i}: {fam} wrongly other-office");
            }
            let rel = relevance_sets(&c);
            ensure!(
                rel.relevant_families.values().all(|m| m.is_disjoint(&c.base_family)),
                "corpus {i}: C_Y of {} includes the base family",
                rec.id
            );
            clusters += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{corpora} corpora, {clusters} clusters, {:.1?}", start.elapsed()))
}

fn family_resolution_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let graphs = 100;
    for i in 0..graphs {
        let n = rng.gen_range(1..=200);
        let rc = random_corpus(&mut rng, n);
        let index = resolve_families(&Corpus::from_records(rc.records.clone()), Some(&rc.table)).map_err(|e| e.to_string())?;
        let got: BTreeMap<BTreeSet<DocId>, String> =
            index.families().map(|(f, m)| (m.clone(), f.as_str().to_string())).collect();
        let want = oracle_family_names(&rc);
        ensure!(
            got.keys().collect::<Vec<_>>() == want.keys().collect::<Vec<_>>(),
            "graph {i}: partition differs from transitive closure"
        );
        ensure!(got == want, "graph {i}: family names differ");
        let reference: Vec<_> = index.families().map(|(f, m)| (f.clone(), m.clone())).collect();
        for s in 0..10 {
            let shuffled = rc.shuffled(&mut rng);
            let again = resolve_families(&Corpus::from_records(shuffled.records), Some(&shuffled.table))
                .map_err(|e| e.to_string())?;
            let again: Vec<_> = again.families().map(|(f, m)| (f.clone(), m.clone())).collect();
            ensure!(again == reference, "graph {i}: shuffle {s} changed the result");
        }
    }
    Ok(format!("{graphs} graphs x 10 shuffles"))
}

fn end_to_end_sanity() -> Outcome {
    let start = Instant::now();
    let synth = generate(&SynthConfig { seed: 5, docs: 1000, ..Default::default() });
    let corpus = Corpus::from_records(synth.records.clone());
    let families = resolve_families(&corpus, Some(&synth.family_table)).map_err(|e| e.to_string())?;
    let store = ClusterStore::in_memory();
    build_all_clusters(&corpus, &families, &ClusterOptions::default(), &store).map_err(|e| e.to_string())?;

    let mut queries = Vec::new();
    let mut perfect = Run::new();
    let mut adversarial = Run::new();
    let mut max_cy = 0;
    let all: Vec<&DocId> = corpus.ids().collect();
    for base in store.bases() {
        let rel = relevance_sets(&get_cluster(&store, &base).map_err(|e| e.to_string())?);
        if rel.cy_size() == 0 {
            continue;
        }
        max_cy = max_cy.max(rel.cy_size());
        let ideal: Vec<DocId> = rel.relevant_families.values().map(|m| m.iter().next().unwrap().clone()).collect();
        let relevant: BTreeSet<&DocId> = rel.relevant_families.values().flatten().collect();
        let mut bad: Vec<DocId> = rel.base_family.iter().cloned().collect();
        bad.extend(
            all.iter()
                .filter(|d| !relevant.contains(*d) && !rel.base_family.contains(*d))
                .take(20)
                .map(|d| (*d).clone()),
        );
        perfect.insert(base.clone(), RankedResult::new(base.clone(), ideal));
        adversarial.insert(base.clone(), RankedResult::new(base.clone(), bad));
        queries.push(base);
    }
    ensure!(queries.len() >= 100, "only {} queries with relevant families", queries.len());

    for k in [max_cy, max_cy + 5] {
        let cfg = EvaluationConfig::new(k).map_err(|e| e.to_string())?;
        let good = evaluate_queries(&queries, &store, &corpus, &perfect, &cfg).map_err(|e| e.to_string())?.report;
        ensure!(good.n == queries.len(), "perfect run skipped {:?}", good.skipped_queries);
        ensure!(
            (good.s_at_k, good.h_at_k, good.mrf_at_k) == (1.0, 1.0, 1.0),
            "perfect run at K={k}: S={} H={} MRF={}",
            good.s_at_k,
            good.h_at_k,
            good.mrf_at_k
        );
        let worst = evaluate_queries(&queries, &store, &corpus, &adversarial, &cfg).map_err(|e| e.to_string())?.report;
        ensure!(
            (worst.s_at_k, worst.h_at_k, worst.mpf_at_k, worst.mrf_at_k) == (0.0, 0.0, 0.0, 0.0),
            "adversarial run at K={k}: {}",
            worst.summary()
        );
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{} queries, K in {{{max_cy}, {}}}, {:.1?}", queries.len(), max_cy + 5, start.elapsed()))
}

const PAYLOADS: &[&str] = &[
    "corpus.jsonl",
    "families.csv",
    "store/clusters.jsonl",
    "store/meta.json",
    "stats/indicators.txt",
    "stats/indicators.json",
    "stats/histogram.csv",
    "dataset.jsonl",
    "queries.txt",
    "eval/report.json",
    "eval/per_query.csv",
    "eval/results.jsonl",
];

fn run_cli(work: &Path, corpus: &Path, table: &Path) -> Result<(), String> {
    let export_cfg = work.join("export.toml");
    fs::create_dir_all(work).map_err(|e| e.to_string())?;
    fs::write(
        &export_cfg,
        format!(
            "output_path = {:?}\nbase_kinds = [\"B2\", \"C1\", \"C2\"]\ninclude_texts = {{ abstract = true, claims = true }}\n",
            work.join("dataset.jsonl")
        ),
    )
    .map_err(|e| e.to_string())?;
    let w = work.to_str().unwrap();
    let steps: Vec<Vec<String>> = vec![
        vec!["ingest".into(), "--corpus".into(), corpus.display().to_string()],
        vec!["families".into(), "--table".into(), table.display().to_string()],
        vec!["build".into()],
        vec!["stats".into(), "--out".into(), format!("{w}/stats")],
        vec!["export".into(), "--config".into(), export_cfg.display().to_string()],
        vec!["select".into(), "--date-from".into(), "2000-01-01".into(), "--date-to".into(), "2040-12-31".into(), "--interval".into(), "2".into(), "--out".into(), format!("{w}/queries.txt")],
        vec!["evaluate".into(), "--queries".into(), format!("{w}/queries.txt"), "--adapter".into(), "reference".into(), "--k".into(), "10".into(), "--out".into(), format!("{w}/eval")],
    ];
    for args in steps {
        let out = Command::new(env!("CARGO_BIN_EXE_semclust"))
            .arg("--work")
            .arg(work)
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
        }
    }
    Ok(())
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let synth = generate(&SynthConfig { seed: 6, docs: 1500, ..Default::default() });
    let corpus = synth.corpus_lines();
    let table = synth.family_table_lines();
    fs::write(root.join("corpus.jsonl"), &corpus).map_err(|e| e.to_string())?;
    fs::write(root.join("table.csv"), &table).map_err(|e| e.to_string())?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut lines: Vec<&str> = corpus.lines().collect();
    lines.shuffle(&mut rng);
    fs::write(root.join("corpus-permuted.jsonl"), lines.join("\n") + "\n").map_err(|e| e.to_string())?;
    let mut rows: Vec<&str> = table.lines().skip(1).collect();
    rows.shuffle(&mut rng);
    fs::write(root.join("table-permuted.csv"), rows.join("\n") + "\n").map_err(|e| e.to_string())?;

    run_cli(&root.join("a"), &root.join("corpus.jsonl"), &root.join("table.csv"))?;
    run_cli(&root.join("b"), &root.join("corpus.jsonl"), &root.join("table.csv"))?;
    run_cli(&root.join("c"), &root.join("corpus-permuted.jsonl"), &root.join("table-permuted.csv"))?;
    // Rebuilding over an existing store must also reproduce it.
    run_cli(&root.join("a"), &root.join("corpus-permuted.jsonl"), &root.join("table-permuted.csv"))?;

    for file in PAYLOADS {
        let a = fs::read(root.join("a").join(file)).map_err(|e| format!("{file}: {e}"))?;
        ensure!(!a.is_empty(), "{file} is empty");
        for other in ["b", "c"] {
            let b = fs::read(root.join(other).join(file)).map_err(|e| format!("{file}: {e}"))?;
            ensure!(a == b, "{file} differs between runs a and {other}");
        }
    }
    Ok(format!("{} payload files identical across 2 runs and a permuted input", PAYLOADS.len()))
}

fn selection_contract() -> Outcome {
    let d = |y, m, dd| chrono::NaiveDate::from_ymd_opt(y, m, dd).unwrap();
    let cite = |target: &str| {
        let t = id(target);
        CitationRef::new(t.office(), t.number(), Some(t.kind()), Some(t.pub_date()), CitationSource::Examiner).unwrap()
    };
    let text = |mut r: DocumentRecord| {
        r.abstract_text = Some("a rotor blade".into());
        r
    };
    let mut records = Vec::new();
    let mut eligible = Vec::new();
    for n in 0..7 {
        let base = id(&format!("US{}B2_2012010{}", 10 + n, 1 + n % 5));
        let mut r = text(DocumentRecord::new(base.clone()));
        r.citations.push(cite(&format!("US{}A1_20050101", 900 + n)));
        records.push(r);
        eligible.push(base);
    }
    for n in 0..3 {
        let base = id(&format!("RU{}C1_2012020{}", 20 + n, 1 + n));
        let mut r = DocumentRecord::new(base.clone());
        r.claims = Some("a valve".into());
        r.citations.push(cite(&format!("US{}A1_20050101", 900 + n)));
        records.push(r);
        eligible.push(base);
    }
    for n in 900..907 {
        records.push(text(DocumentRecord::new(id(&format!("US{n}A1_20050101")))));
    }
    // Text-less.
    let mut textless = DocumentRecord::new(id("US30B2_20120301"));
    textless.citations.push(cite("US900A1_20050101"));
    records.push(textless);
    // No citations at all.
    records.push(text(DocumentRecord::new(id("US31B2_20120301"))));
    // Cites only its own family.
    let p = PriorityClaim::new("US", "61/1", d(2010, 1, 1)).unwrap();
    let mut own = text(DocumentRecord::new(id("US32B2_20120301")));
    own.priorities.push(p.clone());
    own.citations.push(cite("US33A1_20110101"));
    let mut sibling = text(DocumentRecord::new(id("US33A1_20110101")));
    sibling.priorities.push(p);
    records.extend([own, sibling]);
    // Cited document outside the corpus without kind and date: dropped.
    let mut dangling = text(DocumentRecord::new(id("US34B2_20120301")));
    dangling.citations.push(CitationRef::new("DE", "4711", None, None, CitationSource::Examiner).unwrap());
    records.push(dangling);
    // Wrong kind and out of range.
    let mut app = text(DocumentRecord::new(id("US35A1_20120301")));
    app.citations.push(cite("US900A1_20050101"));
    let mut late = text(DocumentRecord::new(id("US36B2_20150301")));
    late.citations.push(cite("US900A1_20050101"));
    records.extend([app, late]);
    for r in &mut records {
        r.normalize();
    }

    let corpus = Corpus::from_records(records);
    let families = resolve_families(&corpus, None).map_err(|e| e.to_string())?;
    let store = ClusterStore::in_memory();
    build_all_clusters(&corpus, &families, &ClusterOptions::default(), &store).map_err(|e| e.to_string())?;
    eligible.sort();

    for m in [1usize, 2, 3] {
        let criteria = SelectionCriteria {
            date_from: Some(d(2012, 1, 1)),
            date_to: Some(d(2012, 12, 31)),
            interval: m,
            ..Default::default()
        };
        let sel = select_test_documents(&store, &corpus, &criteria).map_err(|e| e.to_string())?;
        ensure!(sel.eligible == eligible.len(), "m={m}: {} eligible, expected {}", sel.eligible, eligible.len());
        ensure!(sel.count() == eligible.len().div_ceil(m), "m={m}: {} ids", sel.count());
        let want: Vec<DocId> = eligible.iter().step_by(m).cloned().collect();
        ensure!(sel.ids == want, "m={m}: selected {:?}, expected {want:?}", sel.ids);
    }
    Ok(format!("{} eligible of {} docs; counts 10/5/4 for m=1/2/3", eligible.len(), corpus.len()))
}

fn peak_rss_kib() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    status.lines().find_map(|l| l.strip_prefix("VmHWM:")).and_then(|v| v.split_whitespace().next()?.parse().ok())
}

fn throughput() -> Outcome {
    let synth = generate(&SynthConfig { seed: 8, docs: 100_000, ..Default::default() });
    let lines = synth.corpus_lines();
    drop(synth.records);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (docs, families, clusters) = pool.install(|| -> Result<_, String> {
        let (corpus, stats) = ingest_corpus(lines.as_bytes(), InputFormat::Canonical, IngestMode::FailFast).map_err(|e| e.to_string())?;
        ensure!(stats.accepted == 100_000, "accepted {}", stats.accepted);
        let families = resolve_families(&corpus, Some(&synth.family_table)).map_err(|e| e.to_string())?;
        let store = ClusterStore::in_memory();
        build_all_clusters(&corpus, &families, &ClusterOptions::default(), &store).map_err(|e| e.to_string())?;
        Ok((corpus.len(), families.family_count(), store.len()))
    })?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    let rss = peak_rss_kib().map_or("n/a".to_string(), |k| format!("{} MiB", k / 1024));
    Ok(format!("{docs} docs, {families} families, {clusters} clusters in {elapsed:.1?} on 1 thread; peak RSS {rss}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("metric-oracle equivalence", metric_oracle_equivalence),
        ("indicator arithmetic cross-check", table_arithmetic),
        ("cluster-construction oracle", cluster_construction_oracle),
        ("family-resolution oracle", family_resolution_oracle),
        ("end-to-end sanity", end_to_end_sanity),
        ("determinism", determinism),
        ("selection contract", selection_contract),
        ("throughput smoke test", throughput),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
