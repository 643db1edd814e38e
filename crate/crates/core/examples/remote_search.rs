// Evaluate a search service over HTTP. A small in-process server stands
// in for the external system.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::Arc;

use semclust::metrics::EvaluationConfig;
use semclust::pipeline::evaluate_queries;
use semclust::search::{ReferenceSearcher, RemoteConfig, RemoteSearcher};
use semclust::synth::{generate, SynthConfig};
use semclust::{build_all_clusters, resolve_families, ClusterOptions, ClusterStore, Corpus, DocumentRecord};

fn serve(listener: TcpListener, searcher: Arc<ReferenceSearcher>) {
    for stream in listener.incoming().flatten() {
        let mut reader = BufReader::new(&stream);
        let mut len = 0;
        let mut line = String::new();
        while reader.read_line(&mut line).is_ok_and(|n| n > 0) && line != "\r\n" {
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap_or(0);
            }
            line.clear();
        }
        let mut body = vec![0; len];
        if reader.read_exact(&mut body).is_err() {
            continue;
        }
        let req: serde_json::Value = serde_json::from_slice(&body).unwrap_or_default();
        let mut query = DocumentRecord::new(req["query_id"].as_str().unwrap_or_default().parse().unwrap());
        query.abstract_text = req["abstract"].as_str().map(String::from);
        query.claims = req["claims"].as_str().map(String::from);
        let k = req["k"].as_u64().unwrap_or(10) as usize;
        let results: Vec<_> = match searcher.search(&query, k) {
            Ok(r) => r.ranking.iter().map(|d| serde_json::json!({ "doc_id": d })).collect(),
            Err(_) => Vec::new(),
        };
        let out = serde_json::json!({ "query_id": req["query_id"], "results": results }).to_string();
        let _ = write!(&stream, "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{out}", out.len());
    }
}

pub fn run_example() -> semclust::Result<()> {
    let synth = generate(&SynthConfig { docs: 500, seed: 9, ..Default::default() });
    let corpus = Corpus::from_records(synth.records);
    let families = resolve_families(&corpus, Some(&synth.family_table))?;
    let store = ClusterStore::in_memory();
    build_all_clusters(&corpus, &families, &ClusterOptions::default(), &store)?;

    let listener = TcpListener::bind("127.0.0.1:0")?;
    let endpoint = format!("http://{}/search", listener.local_addr()?);
    let searcher = Arc::new(ReferenceSearcher::new(&corpus));
    std::thread::spawn(move || serve(listener, searcher));

    let remote = RemoteSearcher::new(RemoteConfig { endpoint, timeout_ms: 5000, retries: 1, parallelism: 4 })?;
    let queries: Vec<_> = store.bases().into_iter().filter(|b| corpus.get(b).is_some_and(|r| r.has_text())).take(50).collect();
    let eval = evaluate_queries(&queries, &store, &corpus, &remote, &EvaluationConfig::new(10)?)?;
    println!("{} ({} skipped)", eval.report.summary(), eval.report.skipped_queries.len());
    Ok(())
}

fn main() -> semclust::Result<()> {
    run_example()
}
