//! Inter-rater reliability statistics: Cohen's kappa, weighted Cohen's kappa,
//! Fleiss's kappa, and Krippendorff's alpha, plus the dataset-level
//! aggregations (pairwise tables, per-site and per-heuristic breakdowns,
//! severity histogram, issue frequency).
//!
//! All statistics are pure functions over immutable inputs. Degenerate cases
//! (expected agreement 1, expected disagreement 0) yield an explicit `None`
//! rather than a number or an error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{heuristic_catalog, HeuristicId};
use crate::schema::{ExclusionReason, SessionEvaluation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("rating vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no jointly rated items remain after removing missing cells")]
    EmptyAfterMissingRemoval,
    #[error("no items with a complete set of ratings (listwise deletion)")]
    NoCompleteItems,
    #[error("no items with at least two ratings")]
    NoUsableItems,
    #[error("a ratings table needs at least 2 raters, got {0}")]
    TooFewRaters(usize),
    #[error("cell value {value} outside category domain of size {domain}")]
    ValueOutOfDomain { value: u8, domain: usize },
}

/// Items x raters grid of optional categorical values; the substrate for all
/// agreement math.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingsTable {
    pub items: Vec<String>,
    pub raters: Vec<u32>,
    /// `cells[item][rater]`
    pub cells: Vec<Vec<Option<u8>>>,
    /// Number of categories in the domain; values range over `0..domain`.
    pub domain: usize,
}

impl RatingsTable {
    pub fn new(
        items: Vec<String>,
        raters: Vec<u32>,
        cells: Vec<Vec<Option<u8>>>,
        domain: usize,
    ) -> Result<Self, StatsError> {
        if raters.len() < 2 {
            return Err(StatsError::TooFewRaters(raters.len()));
        }
        for row in &cells {
            for value in row.iter().flatten() {
                if usize::from(*value) >= domain {
                    return Err(StatsError::ValueOutOfDomain {
                        value: *value,
                        domain,
                    });
                }
            }
        }
        Ok(Self {
            items,
            raters,
            cells,
            domain,
        })
    }

    /// Column of ratings for one rater position.
    pub fn column(&self, rater_pos: usize) -> Vec<Option<u8>> {
        self.cells.iter().map(|row| row[rater_pos]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    Identity,
    Linear,
    Quadratic,
}

impl WeightScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Linear => "linear",
            Self::Quadratic => "quadratic",
        }
    }

    pub const ALL: [WeightScheme; 3] =
        [Self::Identity, Self::Linear, Self::Quadratic];
}

/// Disagreement weight matrix: zero diagonal, symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub k: usize,
    pub w: Vec<Vec<f64>>,
    pub scheme: WeightScheme,
}

impl WeightMatrix {
    pub fn build(scheme: WeightScheme, k: usize) -> Self {
        let mut w = vec![vec![0.0; k]; k];
        for (i, row) in w.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                if i == j {
                    continue;
                }
                let d = (i as f64 - j as f64).abs();
                *cell = match scheme {
                    WeightScheme::Identity => 1.0,
                    WeightScheme::Linear => d,
                    WeightScheme::Quadratic => d * d,
                };
            }
        }
        Self { k, w, scheme }
    }
}

/// k x k cross-tabulation of two raters' joint ratings with chance-expected
/// counts from the marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    pub k: usize,
    pub observed: Vec<Vec<f64>>,
    pub expected: Vec<Vec<f64>>,
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub n: f64,
}

impl ContingencyTable {
    /// Tabulate two equal-length complete rating vectors over `0..k`.
    pub fn from_pairs(r1: &[u8], r2: &[u8], k: usize) -> Self {
        let mut observed = vec![vec![0.0; k]; k];
        for (&a, &b) in r1.iter().zip(r2) {
            observed[usize::from(a)][usize::from(b)] += 1.0;
        }
        let row: Vec<f64> = observed.iter().map(|r| r.iter().sum()).collect();
        let col: Vec<f64> = (0..k).map(|j| observed.iter().map(|r| r[j]).sum()).collect();
        let n: f64 = row.iter().sum();
        let expected = (0..k)
            .map(|i| (0..k).map(|j| row[i] * col[j] / n).collect())
            .collect();
        Self {
            k,
            observed,
            expected,
            row,
            col,
            n,
        }
    }
}

/// Two-rater agreement result. `kappa` is `None` when expected agreement is 1
/// (or expected weighted disagreement is 0 for the weighted variant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub kappa: Option<f64>,
    pub p_o: f64,
    pub p_e: f64,
    pub agreed: usize,
    pub total: usize,
}

impl AgreementStats {
    /// Exact-match percentage at full precision; rounding happens in reports.
    pub fn exact_percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.agreed as f64 / self.total as f64
        }
    }
}

/// Multi-rater agreement result. Fleiss fields and alpha fields are filled by
/// their respective operations; `merge` combines them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MultiRaterStats {
    pub fleiss_kappa: Option<f64>,
    pub krippendorff_alpha: Option<f64>,
    pub p_bar: f64,
    pub p_bar_e: f64,
    pub d_o: f64,
    pub d_e: f64,
}

impl MultiRaterStats {
    pub fn merge(fleiss: MultiRaterStats, alpha: MultiRaterStats) -> Self {
        Self {
            fleiss_kappa: fleiss.fleiss_kappa,
            krippendorff_alpha: alpha.krippendorff_alpha,
            p_bar: fleiss.p_bar,
            p_bar_e: fleiss.p_bar_e,
            d_o: alpha.d_o,
            d_e: alpha.d_e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMetric {
    Nominal,
    Interval,
    Ordinal,
}

impl AlphaMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Nominal => "nominal",
            Self::Interval => "interval",
            Self::Ordinal => "ordinal",
        }
    }
}

fn drop_missing(r1: &[Option<u8>], r2: &[Option<u8>]) -> Result<(Vec<u8>, Vec<u8>), StatsError> {
    if r1.len() != r2.len() {
        return Err(StatsError::LengthMismatch(r1.len(), r2.len()));
    }
    let pairs: (Vec<u8>, Vec<u8>) = r1
        .iter()
        .zip(r2)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    if pairs.0.is_empty() {
        return Err(StatsError::EmptyAfterMissingRemoval);
    }
    Ok(pairs)
}

/// Cohen's kappa for two raters on nominal data: (p_o - p_e) / (1 - p_e),
/// with chance agreement from per-rater marginals over the union of observed
/// categories. Missing cells are dropped pairwise.
pub fn cohen_kappa(
    r1: &[Option<u8>],
    r2: &[Option<u8>],
) -> Result<AgreementStats, StatsError> {
    let (a, b) = drop_missing(r1, r2)?;
    let total = a.len();
    let agreed = a.iter().zip(&b).filter(|(x, y)| x == y).count();
    let n = total as f64;
    let p_o = agreed as f64 / n;

    let mut cats: Vec<u8> = a.iter().chain(&b).copied().collect();
    cats.sort_unstable();
    cats.dedup();
    let p_e: f64 = cats
        .iter()
        .map(|c| {
            let pa = a.iter().filter(|&&v| v == *c).count() as f64 / n;
            let pb = b.iter().filter(|&&v| v == *c).count() as f64 / n;
            pa * pb
        })
        .sum();

    let kappa = if (1.0 - p_e).abs() < 1e-14 {
        None
    } else {
        Some((p_o - p_e) / (1.0 - p_e))
    };
    Ok(AgreementStats {
        kappa,
        p_o,
        p_e,
        agreed,
        total,
    })
}

/// Weighted Cohen's kappa over the full category domain `0..k`:
/// 1 - (sum w*o) / (sum w*e). Exact-match counts are reported regardless of
/// scheme.
pub fn weighted_kappa(
    r1: &[Option<u8>],
    r2: &[Option<u8>],
    scheme: WeightScheme,
    k: usize,
) -> Result<AgreementStats, StatsError> {
    let (a, b) = drop_missing(r1, r2)?;
    for v in a.iter().chain(&b) {
        if usize::from(*v) >= k {
            return Err(StatsError::ValueOutOfDomain {
                value: *v,
                domain: k,
            });
        }
    }
    let table = ContingencyTable::from_pairs(&a, &b, k);
    let weights = WeightMatrix::build(scheme, k);
    let mut wo = 0.0;
    let mut we = 0.0;
    for i in 0..k {
        for j in 0..k {
            wo += weights.w[i][j] * table.observed[i][j];
            we += weights.w[i][j] * table.expected[i][j];
        }
    }
    let agreed = a.iter().zip(&b).filter(|(x, y)| x == y).count();
    let total = a.len();
    let p_o = agreed as f64 / total as f64;
    // p_e here is the exact-match chance rate from the same marginals
    let p_e: f64 = (0..k)
        .map(|i| table.expected[i][i] / table.n)
        .sum();
    let kappa = if we.abs() < 1e-14 {
        None
    } else {
        Some(1.0 - wo / we)
    };
    Ok(AgreementStats {
        kappa,
        p_o,
        p_e,
        agreed,
        total,
    })
}

/// Fleiss's kappa with listwise deletion: items missing any rating are
/// removed, then the standard pooled-marginal computation applies.
pub fn fleiss_kappa(table: &RatingsTable) -> Result<MultiRaterStats, StatsError> {
    if table.raters.len() < 2 {
        return Err(StatsError::TooFewRaters(table.raters.len()));
    }
    let complete: Vec<Vec<u8>> = table
        .cells
        .iter()
        .filter_map(|row| row.iter().copied().collect::<Option<Vec<u8>>>())
        .collect();
    if complete.is_empty() {
        return Err(StatsError::NoCompleteItems);
    }
    let domain = table.domain;

    // integer accumulators keep the final ratio exact in f64 for small
    // hand-checkable inputs and bit-stable across platforms
    let mut pooled = vec![0u64; domain];
    let mut agree_sum = 0u64;
    for row in &complete {
        let mut counts = vec![0u64; domain];
        for &v in row {
            counts[usize::from(v)] += 1;
        }
        agree_sum += counts.iter().map(|c| c * c.saturating_sub(1)).sum::<u64>();
        for (p, c) in pooled.iter_mut().zip(&counts) {
            *p += c;
        }
    }
    let n_items = complete.len() as u64;
    let n = table.raters.len() as u64;
    let pair_slots = n_items * n * (n - 1);
    let total_ratings = n_items * n;
    let t2 = total_ratings * total_ratings;
    let q: u64 = pooled.iter().map(|c| c * c).sum();

    let p_bar = agree_sum as f64 / pair_slots as f64;
    let p_bar_e = q as f64 / t2 as f64;

    let fleiss = if q == t2 {
        None
    } else {
        let num = (agree_sum * t2) as f64 - (q * pair_slots) as f64;
        let den = (pair_slots * (t2 - q)) as f64;
        Some(num / den)
    };
    Ok(MultiRaterStats {
        fleiss_kappa: fleiss,
        p_bar,
        p_bar_e,
        ..Default::default()
    })
}

fn alpha_delta(metric: AlphaMetric, c: usize, k: usize, marginals: &[f64]) -> f64 {
    match metric {
        AlphaMetric::Nominal => {
            if c == k {
                0.0
            } else {
                1.0
            }
        }
        AlphaMetric::Interval => {
            let d = c as f64 - k as f64;
            d * d
        }
        AlphaMetric::Ordinal => {
            let (lo, hi) = if c <= k { (c, k) } else { (k, c) };
            let between: f64 = marginals[lo..=hi].iter().sum();
            let d = between - (marginals[lo] + marginals[hi]) / 2.0;
            d * d
        }
    }
}

/// Krippendorff's alpha in the coincidence-matrix formulation, which handles
/// missing cells natively: items contribute all within-item value pairs,
/// weighted by 1/(m_u - 1).
pub fn krippendorff_alpha(
    table: &RatingsTable,
    metric: AlphaMetric,
) -> Result<MultiRaterStats, StatsError> {
    if table.raters.len() < 2 {
        return Err(StatsError::TooFewRaters(table.raters.len()));
    }
    let units: Vec<Vec<u8>> = table
        .cells
        .iter()
        .map(|row| row.iter().flatten().copied().collect::<Vec<u8>>())
        .filter(|vals| vals.len() >= 2)
        .collect();
    if units.is_empty() {
        return Err(StatsError::NoUsableItems);
    }
    let domain = table.domain;
    let mut coincidence = vec![vec![0.0_f64; domain]; domain];
    for vals in &units {
        let m = vals.len() as f64;
        for (i, &a) in vals.iter().enumerate() {
            for (j, &b) in vals.iter().enumerate() {
                if i != j {
                    coincidence[usize::from(a)][usize::from(b)] += 1.0 / (m - 1.0);
                }
            }
        }
    }
    let marginals: Vec<f64> = coincidence.iter().map(|r| r.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();

    let mut d_o = 0.0;
    let mut d_e = 0.0;
    for c in 0..domain {
        for k in 0..domain {
            let delta = alpha_delta(metric, c, k, &marginals);
            d_o += coincidence[c][k] * delta;
            d_e += marginals[c] * marginals[k] * delta / (n - 1.0);
        }
    }
    let alpha = if d_e.abs() < 1e-14 {
        None
    } else {
        Some(1.0 - d_o / d_e)
    };
    Ok(MultiRaterStats {
        krippendorff_alpha: alpha,
        d_o,
        d_e,
        ..Default::default()
    })
}

// ---------------------------------------------------------------------------
// Dataset-level aggregations
// ---------------------------------------------------------------------------

/// Sorted distinct session indices present in the dataset.
pub fn session_indices(dataset: &[SessionEvaluation]) -> Vec<u32> {
    let mut idx: Vec<u32> = dataset.iter().map(|s| s.session_index).collect();
    idx.sort_unstable();
    idx.dedup();
    idx
}

fn sorted_sites(dataset: &[SessionEvaluation]) -> Vec<&str> {
    let mut sites: Vec<&str> = dataset.iter().map(|s| s.site_id.as_str()).collect();
    sites.sort_unstable();
    sites.dedup();
    sites
}

fn find_session<'a>(
    dataset: &'a [SessionEvaluation],
    site: &str,
    index: u32,
) -> Option<&'a SessionEvaluation> {
    dataset
        .iter()
        .find(|s| s.site_id == site && s.session_index == index)
}

fn cell_value(
    session: Option<&SessionEvaluation>,
    heuristic: &HeuristicId,
    severity: bool,
) -> Option<u8> {
    let entry = session?
        .entries
        .iter()
        .find(|e| e.heuristic == heuristic)?;
    if severity {
        entry.severity.map(|s| s.value())
    } else {
        entry.issue_found.map(u8::from)
    }
}

/// Build the (site x heuristic) items-by-sessions table. `severity` selects
/// the 0-4 severity domain; otherwise binary issue presence.
pub fn ratings_table(dataset: &[SessionEvaluation], severity: bool) -> Result<RatingsTable, StatsError> {
    let raters = session_indices(dataset);
    let mut items = Vec::new();
    let mut cells = Vec::new();
    for site in sorted_sites(dataset) {
        let sessions: Vec<Option<&SessionEvaluation>> = raters
            .iter()
            .map(|&r| find_session(dataset, site, r))
            .collect();
        for heuristic in heuristic_catalog() {
            items.push(format!("{site}/{}", heuristic.slug));
            cells.push(
                sessions
                    .iter()
                    .map(|s| cell_value(*s, heuristic, severity))
                    .collect(),
            );
        }
    }
    RatingsTable::new(items, raters, cells, if severity { 5 } else { 2 })
}

/// One pairwise comparison row. `items_total` counts every item the pair
/// could have rated (the paper-style denominator); `stats.total` counts only
/// pairwise-complete items (the strict denominator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAgreement {
    pub pair: (u32, u32),
    pub stats: AgreementStats,
    pub items_total: usize,
}

fn rater_pairs(raters: &[u32]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..raters.len() {
        for j in i + 1..raters.len() {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Unweighted Cohen's kappa on binary issue presence, per session pair.
pub fn pairwise_issue_agreement(
    dataset: &[SessionEvaluation],
) -> Result<Vec<PairAgreement>, StatsError> {
    let table = ratings_table(dataset, false)?;
    rater_pairs(&table.raters)
        .into_iter()
        .map(|(i, j)| {
            let stats = cohen_kappa(&table.column(i), &table.column(j))?;
            Ok(PairAgreement {
                pair: (table.raters[i], table.raters[j]),
                stats,
                items_total: table.items.len(),
            })
        })
        .collect()
}

/// Fleiss's kappa (listwise) and Krippendorff's alpha (nominal) on the
/// binary issue table.
pub fn multi_rater_issue_agreement(
    dataset: &[SessionEvaluation],
    metric: AlphaMetric,
) -> Result<MultiRaterStats, StatsError> {
    let table = ratings_table(dataset, false)?;
    let fleiss = fleiss_kappa(&table)?;
    let alpha = krippendorff_alpha(&table, metric)?;
    Ok(MultiRaterStats::merge(fleiss, alpha))
}

/// Weighted Cohen's kappa on severity ratings, per session pair.
pub fn pairwise_severity_agreement(
    dataset: &[SessionEvaluation],
    scheme: WeightScheme,
) -> Result<Vec<PairAgreement>, StatsError> {
    let table = ratings_table(dataset, true)?;
    rater_pairs(&table.raters)
        .into_iter()
        .map(|(i, j)| {
            let stats = weighted_kappa(&table.column(i), &table.column(j), scheme, 5)?;
            Ok(PairAgreement {
                pair: (table.raters[i], table.raters[j]),
                stats,
                items_total: table.items.len(),
            })
        })
        .collect()
}

/// Weighted kappa per site for one session pair (the per-site distribution
/// behind the severity analysis). Sites whose kappa is undefined carry a
/// `None` marker rather than being dropped.
pub fn per_site_weighted_kappa(
    dataset: &[SessionEvaluation],
    pair: (u32, u32),
    scheme: WeightScheme,
) -> Vec<(String, Option<AgreementStats>)> {
    let mut out = Vec::new();
    for site in sorted_sites(dataset) {
        let s1 = find_session(dataset, site, pair.0);
        let s2 = find_session(dataset, site, pair.1);
        let mut r1 = Vec::new();
        let mut r2 = Vec::new();
        for heuristic in heuristic_catalog() {
            r1.push(cell_value(s1, heuristic, true));
            r2.push(cell_value(s2, heuristic, true));
        }
        let stats = weighted_kappa(&r1, &r2, scheme, 5).ok();
        out.push((site.to_string(), stats));
    }
    out
}

/// Per-heuristic unweighted kappa on binary issue vectors across sites, for
/// every session pair.
pub fn per_heuristic_kappa(
    dataset: &[SessionEvaluation],
) -> Vec<(&'static HeuristicId, Vec<((u32, u32), Option<AgreementStats>)>)> {
    let raters = session_indices(dataset);
    let sites = sorted_sites(dataset);
    heuristic_catalog()
        .iter()
        .map(|heuristic| {
            let cells = rater_pairs(&raters)
                .into_iter()
                .map(|(i, j)| {
                    let mut r1 = Vec::new();
                    let mut r2 = Vec::new();
                    for site in &sites {
                        r1.push(cell_value(
                            find_session(dataset, site, raters[i]),
                            heuristic,
                            false,
                        ));
                        r2.push(cell_value(
                            find_session(dataset, site, raters[j]),
                            heuristic,
                            false,
                        ));
                    }
                    ((raters[i], raters[j]), cohen_kappa(&r1, &r2).ok())
                })
                .collect();
            (heuristic, cells)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityHistogram {
    /// Counts per severity level 0..=4.
    pub counts: [usize; 5],
    /// Entries excluded from severity analysis (missing or malformed values).
    pub excluded: usize,
}

impl SeverityHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Severity distribution across every entry in the dataset.
pub fn severity_histogram(dataset: &[SessionEvaluation]) -> SeverityHistogram {
    let mut counts = [0usize; 5];
    let mut excluded = 0usize;
    for session in dataset {
        for entry in &session.entries {
            if let Some(s) = entry.severity {
                counts[usize::from(s.value())] += 1;
            }
        }
        excluded += session
            .exclusions
            .iter()
            .filter(|x| {
                matches!(
                    x.reason,
                    ExclusionReason::MalformedSeverity | ExclusionReason::MissingSeverity
                )
            })
            .count();
    }
    SeverityHistogram { counts, excluded }
}

/// Fraction of entries with `issue_found = true` among entries carrying a
/// usable flag.
pub fn issue_frequency(dataset: &[SessionEvaluation]) -> f64 {
    let mut flagged = 0usize;
    let mut total = 0usize;
    for session in dataset {
        for entry in &session.entries {
            if let Some(found) = entry.issue_found {
                total += 1;
                if found {
                    flagged += 1;
                }
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        flagged as f64 / total as f64
    }
}
