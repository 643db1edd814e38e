//! Reference lexical searcher.
//!
//! Documents are represented by their abstract and claims, tokenized into
//! lowercase alphanumeric words without stemming, weighted by
//! `tf · ln(1 + N/df)` and L2-normalized. Scores are cosine similarities;
//! ties go to the smaller canonical id. Every corpus document is a
//! candidate, including the query document itself.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::Corpus;
use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::metrics::RankedResult;
use crate::record::DocumentRecord;

/// Lowercase alphanumeric runs.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

fn searchable_text(rec: &DocumentRecord) -> String {
    [rec.abstract_text.as_deref(), rec.claims.as_deref()]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join(" ")
}

fn term_counts(text: &str) -> BTreeMap<String, u32> {
    let mut tf = BTreeMap::new();
    for t in tokenize(text) {
        *tf.entry(t).or_default() += 1;
    }
    tf
}

/// Immutable TF-IDF index; safe to query from many threads.
#[derive(Debug)]
pub struct ReferenceSearcher {
    docs: Vec<DocId>,
    vocab: HashMap<String, usize>,
    idf: Vec<f64>,
    postings: Vec<Vec<(u32, f64)>>,
}

impl ReferenceSearcher {
    pub fn new(corpus: &Corpus) -> ReferenceSearcher {
        let docs: Vec<DocId> = corpus.ids().cloned().collect();
        let counts: Vec<BTreeMap<String, u32>> = corpus.records().map(|r| term_counts(&searchable_text(r))).collect();

        let mut vocab: HashMap<String, usize> = HashMap::new();
        let mut df: Vec<u32> = Vec::new();
        for tf in &counts {
            for term in tf.keys() {
                let next = vocab.len();
                let t = *vocab.entry(term.clone()).or_insert(next);
                if t == df.len() {
                    df.push(0);
                }
                df[t] += 1;
            }
        }
        let n = docs.len() as f64;
        let idf: Vec<f64> = df.iter().map(|&d| (1.0 + n / d as f64).ln()).collect();

        let mut postings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); vocab.len()];
        for (doc, tf) in counts.iter().enumerate() {
            let weights: Vec<(usize, f64)> = tf.iter().map(|(t, &c)| (vocab[t], c as f64 * idf[vocab[t]])).collect();
            let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (t, w) in weights {
                    postings[t].push((doc as u32, w / norm));
                }
            }
        }
        ReferenceSearcher { docs, vocab, idf, postings }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Cosine similarity of `text` against every document, in id order.
    pub fn scores(&self, text: &str) -> Vec<f64> {
        let query: Vec<(usize, f64)> = term_counts(text)
            .iter()
            .filter_map(|(t, &c)| self.vocab.get(t).map(|&i| (i, c as f64 * self.idf[i])))
            .collect();
        let norm = query.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        let mut scores = vec![0.0; self.docs.len()];
        if norm == 0.0 {
            return scores;
        }
        for (t, qw) in query {
            for &(doc, dw) in &self.postings[t] {
                scores[doc as usize] += qw / norm * dw;
            }
        }
        scores
    }

    /// Top `min(k, corpus size)` documents for the query record.
    pub fn search(&self, query: &DocumentRecord, k: usize) -> Result<RankedResult> {
        if !query.has_text() {
            return Err(Error::NoText(query.id.to_string()));
        }
        let scores = self.scores(&searchable_text(query));
        let mut order: Vec<usize> = (0..self.docs.len()).collect();
        let by_score = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
        let k = k.min(order.len());
        if k < order.len() {
            order.select_nth_unstable_by(k, by_score);
            order.truncate(k);
        }
        order.sort_unstable_by(by_score);
        Ok(RankedResult::new(query.id.clone(), order.into_iter().map(|i| self.docs[i].clone()).collect()))
    }
}
