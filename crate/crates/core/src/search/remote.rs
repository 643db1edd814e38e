//! Client for an external search service.
//!
//! Each query is one `POST` of a JSON object to the configured endpoint:
//!
//! ```text
//! request:  {"query_id":"US…","abstract":"…","description":"…","claims":"…","k":10}
//! response: {"query_id":"US…","results":[{"doc_id":"US…","score":3.2},…]}
//! ```
//!
//! Text fields are omitted when the query document lacks them. Transport
//! failures are retried; a response with a different `query_id`, a
//! non-canonical `doc_id` or a non-2xx status is a protocol error and is not
//! retried.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::metrics::RankedResult;
use crate::record::DocumentRecord;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub timeout_ms: u64,
    /// Additional attempts after a transport failure.
    pub retries: u32,
    /// Maximum concurrent requests.
    pub parallelism: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig { endpoint: String::new(), timeout_ms: 30_000, retries: 2, parallelism: 4 }
    }
}

#[derive(Debug, Serialize)]
pub struct SearchRequest<'a> {
    pub query_id: &'a str,
    #[serde(rename = "abstract", skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claims: Option<&'a str>,
    pub k: usize,
}

#[derive(Debug, Deserialize)]
pub struct SearchResponse {
    pub query_id: String,
    pub results: Vec<ResponseEntry>,
}

#[derive(Debug, Deserialize)]
pub struct ResponseEntry {
    pub doc_id: String,
    #[serde(default)]
    pub score: Option<f64>,
}

#[derive(Debug)]
pub struct RemoteSearcher {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteSearcher {
    pub fn new(config: RemoteConfig) -> Result<RemoteSearcher> {
        if config.endpoint.is_empty() {
            return Err(Error::Config("remote endpoint is not set".into()));
        }
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_millis(config.timeout_ms)).build();
        Ok(RemoteSearcher { config, agent })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    pub fn search(&self, query: &DocumentRecord, k: usize) -> Result<RankedResult> {
        let query_id = query.id.to_string();
        let request = SearchRequest {
            query_id: &query_id,
            abstract_text: query.abstract_text.as_deref(),
            description: query.description.as_deref(),
            claims: query.claims.as_deref(),
            k,
        };
        let body = serde_json::to_string(&request)?;

        let mut attempt = 0;
        let response = loop {
            attempt += 1;
            match self.agent.post(&self.config.endpoint).set("Content-Type", "application/json").send_string(&body) {
                Ok(resp) => break resp,
                Err(ureq::Error::Status(code, _)) => {
                    return Err(Error::Remote(format!("protocol error: HTTP status {code}")));
                }
                Err(ureq::Error::Transport(t)) if attempt > self.config.retries => {
                    let what = if is_timeout(&t) { "timeout" } else { "transport error" };
                    return Err(Error::Remote(format!("{what} after {attempt} attempts: {t}")));
                }
                Err(ureq::Error::Transport(t)) => {
                    log::debug!("{query_id}: attempt {attempt} failed: {t}");
                }
            }
        };
        let text = response
            .into_string()
            .map_err(|e| Error::Remote(format!("protocol error: reading body: {e}")))?;
        parse_response(&query.id, &text)
    }
}

fn is_timeout(t: &ureq::Transport) -> bool {
    let mut source: Option<&(dyn std::error::Error + 'static)> = std::error::Error::source(t);
    while let Some(e) = source {
        if let Some(io) = e.downcast_ref::<std::io::Error>() {
            if matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) {
                return true;
            }
        }
        source = e.source();
    }
    t.to_string().contains("timed out")
}

/// Validates a response body against the query it answers.
pub fn parse_response(query: &DocId, body: &str) -> Result<RankedResult> {
    let resp: SearchResponse =
        serde_json::from_str(body).map_err(|e| Error::Remote(format!("protocol error: malformed response: {e}")))?;
    if resp.query_id != query.as_str() {
        return Err(Error::Remote(format!("protocol error: response is for {} not {query}", resp.query_id)));
    }
    let ranking = resp
        .results
        .into_iter()
        .map(|e| {
            e.doc_id
                .parse::<DocId>()
                .map_err(|err| Error::Remote(format!("protocol error: result id: {err}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankedResult::new(query.clone(), ranking))
}
