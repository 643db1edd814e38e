//! Family-aware search quality metrics.
//!
//! The unit of relevance is the patent family. For a query document `x` with
//! base family `C_x` and relevant families `C_Y` (the deduplicated families
//! of the documents cited against `x`, minus `C_x`), and the first `K`
//! results `R_K`:
//!
//! - `distinct_hits = |{C_y ∈ C_Y : R_K ∩ C_y ≠ ∅}|`
//! - `pi  = 1` iff `distinct_hits ≥ 1`, averaged into S@K
//! - `rho = 1` iff `distinct_hits ≥ min(K, |C_Y|)`, averaged into H@K
//! - `pf  = distinct_hits / K`, averaged into MPF@K
//! - `rf  = distinct_hits / |C_Y|`, averaged into MRF@K
//!
//! Base-family documents in a ranking are never relevant. By default they
//! still occupy their slots in `R_K`.
//!
//! Aggregation is exact: per-query ratios are summed as big rationals and
//! converted to `f64` once.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cluster::SemanticCluster;
use crate::docid::DocId;
use crate::error::{Error, Result};
use crate::family::FamilyId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub k: usize,
    /// Remove base-family documents before cutting the ranking at K.
    pub exclude_base_family_from_ranking: bool,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig { k: 10, exclude_base_family_from_ranking: false }
    }
}

impl EvaluationConfig {
    pub fn new(k: usize) -> Result<EvaluationConfig> {
        let cfg = EvaluationConfig { k, ..Default::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        Ok(())
    }
}

/// A system's ranked answer for one query document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedResult {
    pub query: DocId,
    pub ranking: Vec<DocId>,
}

impl RankedResult {
    pub fn new(query: DocId, ranking: Vec<DocId>) -> RankedResult {
        RankedResult { query, ranking }
    }

    /// The first duplicated id, if any.
    pub fn first_duplicate(&self) -> Option<&DocId> {
        let mut seen = HashSet::with_capacity(self.ranking.len());
        self.ranking.iter().find(|id| !seen.insert(*id))
    }
}

/// `C_x` and `C_Y` for one query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelevanceSets {
    pub base_family: BTreeSet<DocId>,
    pub relevant_families: BTreeMap<FamilyId, BTreeSet<DocId>>,
}

impl RelevanceSets {
    pub fn cy_size(&self) -> usize {
        self.relevant_families.len()
    }
}

/// Relevant families of a cluster: every cited family of either office class
/// except the base family itself.
pub fn relevance_sets(cluster: &SemanticCluster) -> RelevanceSets {
    let relevant_families = cluster
        .cited_families()
        .filter(|(fam, f)| **fam != cluster.base_family_id && f.members != cluster.base_family)
        .map(|(fam, f)| (fam.clone(), f.members.clone()))
        .collect();
    RelevanceSets { base_family: cluster.base_family.clone(), relevant_families }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerQueryMetrics {
    pub query: DocId,
    pub k: usize,
    pub pi: u8,
    pub rho: u8,
    pub distinct_hits: usize,
    pub cy_size: usize,
}

impl PerQueryMetrics {
    /// precision_family@K
    pub fn pf(&self) -> f64 {
        self.distinct_hits as f64 / self.k as f64
    }

    /// recall_family@K
    pub fn rf(&self) -> f64 {
        self.distinct_hits as f64 / self.cy_size as f64
    }

    pub fn pf_exact(&self) -> BigRational {
        BigRational::new(BigInt::from(self.distinct_hits), BigInt::from(self.k))
    }

    pub fn rf_exact(&self) -> BigRational {
        BigRational::new(BigInt::from(self.distinct_hits), BigInt::from(self.cy_size))
    }

    pub fn csv_header() -> &'static str {
        "query_id,K,pi,rho,distinct_hits,cy_size,pf,rf"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.query,
            self.k,
            self.pi,
            self.rho,
            self.distinct_hits,
            self.cy_size,
            self.pf(),
            self.rf()
        )
    }
}

/// Scores one ranking against its relevance sets.
pub fn per_query_metrics(result: &RankedResult, rel: &RelevanceSets, cfg: &EvaluationConfig) -> Result<PerQueryMetrics> {
    cfg.validate()?;
    if rel.relevant_families.is_empty() {
        return Err(Error::Config(format!("query {} has no relevant families", result.query)));
    }
    if let Some(dup) = result.first_duplicate() {
        return Err(Error::MalformedRun(format!("ranking for {} lists {dup} twice", result.query)));
    }

    let family_of: HashMap<&DocId, &FamilyId> = rel
        .relevant_families
        .iter()
        .flat_map(|(fam, members)| members.iter().map(move |m| (m, fam)))
        .filter(|(m, _)| !rel.base_family.contains(*m))
        .collect();

    let top_k = result
        .ranking
        .iter()
        .filter(|id| !(cfg.exclude_base_family_from_ranking && rel.base_family.contains(*id)))
        .take(cfg.k);
    let hit: HashSet<&FamilyId> = top_k.filter_map(|id| family_of.get(id).copied()).collect();

    let distinct_hits = hit.len();
    let cy_size = rel.cy_size();
    Ok(PerQueryMetrics {
        query: result.query.clone(),
        k: cfg.k,
        pi: u8::from(distinct_hits >= 1),
        rho: u8::from(distinct_hits >= cfg.k.min(cy_size)),
        distinct_hits,
        cy_size,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedQuery {
    pub query: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub k: usize,
    pub n: usize,
    pub s_at_k: f64,
    pub h_at_k: f64,
    pub mpf_at_k: f64,
    pub mrf_at_k: f64,
    pub skipped_queries: Vec<SkippedQuery>,
    #[serde(skip)]
    pub rows: Vec<PerQueryMetrics>,
}

/// The four aggregates as exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactAggregates {
    pub s_at_k: BigRational,
    pub h_at_k: BigRational,
    pub mpf_at_k: BigRational,
    pub mrf_at_k: BigRational,
}

fn mean(values: impl Iterator<Item = BigRational>, n: usize) -> BigRational {
    let sum = values.fold(BigRational::zero(), |acc, v| acc + v);
    sum / BigRational::from_integer(BigInt::from(n))
}

/// Exact means over the rows.
pub fn exact_aggregates(rows: &[PerQueryMetrics]) -> Result<ExactAggregates> {
    if rows.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let n = rows.len();
    let int = |v: u8| BigRational::from_integer(BigInt::from(v));
    Ok(ExactAggregates {
        s_at_k: mean(rows.iter().map(|r| int(r.pi)), n),
        h_at_k: mean(rows.iter().map(|r| int(r.rho)), n),
        mpf_at_k: mean(rows.iter().map(PerQueryMetrics::pf_exact), n),
        mrf_at_k: mean(rows.iter().map(PerQueryMetrics::rf_exact), n),
    })
}

/// Averages per-query rows into S@K, H@K, MPF@K and MRF@K.
pub fn aggregate_metrics(rows: Vec<PerQueryMetrics>) -> Result<MetricsReport> {
    let exact = exact_aggregates(&rows)?;
    let f = |r: &BigRational| r.to_f64().expect("ratio of bounded integers is finite");
    let k = rows.first().map_or(0, |r| r.k);
    Ok(MetricsReport {
        k,
        n: rows.len(),
        s_at_k: f(&exact.s_at_k),
        h_at_k: f(&exact.h_at_k),
        mpf_at_k: f(&exact.mpf_at_k),
        mrf_at_k: f(&exact.mrf_at_k),
        skipped_queries: Vec::new(),
        rows,
    })
}

impl MetricsReport {
    pub fn write_rows_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", PerQueryMetrics::csv_header())?;
        for row in &self.rows {
            writeln!(out, "{}", row.csv_row())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// Short human-readable summary, four decimals.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let k = self.k;
        let _ = writeln!(s, "N = {} (skipped {})", self.n, self.skipped_queries.len());
        let _ = writeln!(s, "S@{k}   = {:.4}", self.s_at_k);
        let _ = writeln!(s, "H@{k}   = {:.4}", self.h_at_k);
        let _ = writeln!(s, "MPF@{k} = {:.4}", self.mpf_at_k);
        let _ = write!(s, "MRF@{k} = {:.4}", self.mrf_at_k);
        s
    }
}
