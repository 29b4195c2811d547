//! Correlation-based feature subset selection (CFS).
//!
//! Numeric attributes are first discretized with the entropy/MDL method from
//! [`mdl`]; correlations between discrete columns are then measured with
//! symmetric uncertainty, and subsets are scored with the CFS merit
//!
//! ```text
//! merit(S) = k * mean_fc / sqrt(k + k*(k-1) * mean_ff)
//! ```
//!
//! which rewards subsets whose members correlate with the class but not with
//! each other. The subset space is explored with forward best-first search,
//! followed (by default) by a pass that re-admits locally predictive
//! attributes: candidates, in decreasing class correlation, join the subset
//! when their class correlation exceeds their correlation with every member.

mod mdl;

pub use mdl::{mdl_discretize, DiscretizationCuts};

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeKind, Dataset};
use crate::error::{Error, Result};

/// Symmetric uncertainty between feature/class and feature/feature columns,
/// indexed by original attribute position.
#[derive(Debug, Clone)]
pub struct CorrelationCache {
    /// Original attribute indices covered by the cache (all predictors).
    pub attribute_indices: Vec<usize>,
    /// SU of each predictor with the class, keyed by attribute index.
    su_fc: HashMap<usize, f64>,
    /// SU for each unordered predictor pair.
    su_ff: HashMap<(usize, usize), f64>,
}

impl CorrelationCache {
    /// SU of a predictor with the class.
    pub fn with_class(&self, attribute: usize) -> Result<f64> {
        self.su_fc
            .get(&attribute)
            .copied()
            .ok_or_else(|| Error::Validation(format!("attribute {attribute} missing from cache")))
    }

    /// SU between two predictors.
    pub fn between(&self, a: usize, b: usize) -> Result<f64> {
        let key = (a.min(b), a.max(b));
        self.su_ff
            .get(&key)
            .copied()
            .ok_or_else(|| Error::Validation(format!("pair ({a},{b}) missing from cache")))
    }

    /// Measure all correlations needed by the search: each predictor is
    /// discretized (numeric via MDL cuts, nominal as-is) and compared with the
    /// class and with every other predictor.
    pub fn build(dataset: &Dataset) -> Result<CorrelationCache> {
        let class: Vec<usize> = dataset
            .instances
            .iter()
            .map(|i| dataset.class_of(i))
            .collect();

        let mut attribute_indices = Vec::new();
        let mut columns: Vec<Vec<usize>> = Vec::new();
        for spec in dataset.predictors() {
            let column = match spec.kind {
                AttributeKind::Numeric => {
                    let values: Vec<f64> = dataset
                        .instances
                        .iter()
                        .map(|inst| {
                            inst.values[spec.index].as_num().ok_or_else(|| {
                                Error::Validation(format!(
                                    "attribute '{}' has missing values; impute before selection",
                                    spec.name
                                ))
                            })
                        })
                        .collect::<Result<_>>()?;
                    let cuts = mdl_discretize(&values, &class)?;
                    values.iter().map(|&x| cuts.bin_of(x)).collect()
                }
                AttributeKind::Nominal => dataset
                    .instances
                    .iter()
                    .map(|inst| {
                        inst.values[spec.index].as_cat().ok_or_else(|| {
                            Error::Validation(format!(
                                "attribute '{}' has missing values; impute before selection",
                                spec.name
                            ))
                        })
                    })
                    .collect::<Result<_>>()?,
            };
            attribute_indices.push(spec.index);
            columns.push(column);
        }

        let mut su_fc = HashMap::new();
        let mut su_ff = HashMap::new();
        for (pos, &attr) in attribute_indices.iter().enumerate() {
            su_fc.insert(attr, symmetric_uncertainty(&columns[pos], &class)?);
            for (pos2, &attr2) in attribute_indices.iter().enumerate().take(pos + 1) {
                let su = symmetric_uncertainty(&columns[pos], &columns[pos2])?;
                su_ff.insert((attr2.min(attr), attr2.max(attr)), su);
                let _ = pos2;
            }
        }

        Ok(CorrelationCache {
            attribute_indices,
            su_fc,
            su_ff,
        })
    }
}

/// A selected set of attribute indices with its CFS merit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSubset {
    /// Sorted original attribute indices; never contains the class.
    pub members: Vec<usize>,
    pub merit: f64,
}

/// Search configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectParams {
    /// Consecutive non-improving expansions before the search stops.
    pub stale_limit: usize,
    /// Run the locally-predictive re-admission pass after the search.
    pub locally_predictive: bool,
}

impl Default for SelectParams {
    fn default() -> Self {
        SelectParams {
            stale_limit: 5,
            locally_predictive: true,
        }
    }
}

/// Entropy of a count multiset. Counts are summed in sorted order so the
/// result is bitwise identical for equal multisets, regardless of how the
/// underlying map iterates; this is what makes SU exactly symmetric.
fn entropy_of_count_multiset(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let mut counts: Vec<usize> = counts.filter(|&c| c > 0).collect();
    counts.sort_unstable();
    let total = total as f64;
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Symmetric uncertainty `2*[H(X) + H(Y) - H(X,Y)] / (H(X) + H(Y))` between
/// two discrete columns; defined as 0 when `H(X) + H(Y) = 0`.
pub fn symmetric_uncertainty(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "columns differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    let mut cx: HashMap<usize, usize> = HashMap::new();
    let mut cy: HashMap<usize, usize> = HashMap::new();
    let mut cxy: HashMap<(usize, usize), usize> = HashMap::new();
    for i in 0..n {
        *cx.entry(x[i]).or_default() += 1;
        *cy.entry(y[i]).or_default() += 1;
        *cxy.entry((x[i], y[i])).or_default() += 1;
    }
    let hx = entropy_of_count_multiset(cx.into_values(), n);
    let hy = entropy_of_count_multiset(cy.into_values(), n);
    let hxy = entropy_of_count_multiset(cxy.into_values(), n);
    let denom = hx + hy;
    if denom == 0.0 {
        return Ok(0.0);
    }
    // Clamp tiny negative mutual information caused by rounding.
    let mi = (hx + hy - hxy).max(0.0);
    Ok((2.0 * mi / denom).min(1.0))
}

/// Hall's merit of a subset: `k*mean_fc / sqrt(k + k(k-1)*mean_ff)`.
/// The empty subset scores 0.
pub fn cfs_merit(members: &[usize], cache: &CorrelationCache) -> Result<f64> {
    let k = members.len();
    if k == 0 {
        return Ok(0.0);
    }
    let mut sum_fc = 0.0;
    for &m in members {
        sum_fc += cache.with_class(m)?;
    }
    let mean_fc = sum_fc / k as f64;
    let mean_ff = if k > 1 {
        let mut sum_ff = 0.0;
        let mut pairs = 0usize;
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                sum_ff += cache.between(a, b)?;
                pairs += 1;
            }
        }
        sum_ff / pairs as f64
    } else {
        0.0
    };
    let k = k as f64;
    Ok(k * mean_fc / (k + k * (k - 1.0) * mean_ff).sqrt())
}

const MERIT_EPS: f64 = 1e-10;

/// `true` when `(merit, subset)` is preferable to the incumbent: higher
/// merit, then smaller subset, then lexicographically lowest indices.
fn better(merit: f64, subset: &BTreeSet<usize>, best_merit: f64, best: &BTreeSet<usize>) -> bool {
    if merit > best_merit + MERIT_EPS {
        return true;
    }
    if (merit - best_merit).abs() <= MERIT_EPS {
        if subset.len() != best.len() {
            return subset.len() < best.len();
        }
        return subset.iter().lt(best.iter());
    }
    false
}

/// Forward best-first search over feature subsets, maximizing CFS merit.
///
/// Search starts from the empty set, repeatedly expands the best open node by
/// adding each absent predictor, and stops after `stale_limit` consecutive
/// expansions without improving the best merit found. When
/// `locally_predictive` is set, attributes whose class correlation exceeds
/// their correlation with every selected member are then re-admitted in
/// decreasing class-correlation order.
pub fn best_first_select(dataset: &Dataset, params: &SelectParams) -> Result<FeatureSubset> {
    let cache = CorrelationCache::build(dataset)?;
    if cache.attribute_indices.is_empty() {
        return Err(Error::Validation("no predictor attributes".into()));
    }
    select_from_cache(&cache, params)
}

/// Search over a prebuilt correlation cache (exposed for testing against
/// exhaustive enumeration).
pub fn select_from_cache(cache: &CorrelationCache, params: &SelectParams) -> Result<FeatureSubset> {
    let all = &cache.attribute_indices;

    let mut open: Vec<(BTreeSet<usize>, f64)> = vec![(BTreeSet::new(), 0.0)];
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(Vec::new());

    let mut best: BTreeSet<usize> = BTreeSet::new();
    let mut best_merit = 0.0;
    let mut stale = 0usize;

    while !open.is_empty() && stale < params.stale_limit {
        // Pop the best open node: highest merit, smallest, lexicographic.
        let mut pick = 0;
        for i in 1..open.len() {
            if better(open[i].1, &open[i].0, open[pick].1, &open[pick].0) {
                pick = i;
            }
        }
        let (node, _) = open.swap_remove(pick);

        let mut improved = false;
        for &attr in all {
            if node.contains(&attr) {
                continue;
            }
            let mut child = node.clone();
            child.insert(attr);
            let key: Vec<usize> = child.iter().copied().collect();
            if !seen.insert(key.clone()) {
                continue;
            }
            let merit = cfs_merit(&key, cache)?;
            if better(merit, &child, best_merit, &best) {
                best = child.clone();
                best_merit = merit;
                improved = true;
            }
            open.push((child, merit));
        }
        stale = if improved { 0 } else { stale + 1 };
    }

    if params.locally_predictive {
        locally_predictive_pass(cache, &mut best)?;
    }

    let members: Vec<usize> = best.iter().copied().collect();
    let merit = cfs_merit(&members, cache)?;
    Ok(FeatureSubset { members, merit })
}

/// Re-admit attributes that carry class signal not already covered: walk the
/// excluded attributes in decreasing class correlation and add each one whose
/// class correlation is positive and not exceeded by its correlation with any
/// current member.
fn locally_predictive_pass(cache: &CorrelationCache, group: &mut BTreeSet<usize>) -> Result<()> {
    let mut remaining: Vec<usize> = cache
        .attribute_indices
        .iter()
        .copied()
        .filter(|a| !group.contains(a))
        .collect();
    while !remaining.is_empty() {
        let mut pick = 0;
        for i in 1..remaining.len() {
            let (ci, cp) = (
                cache.with_class(remaining[i])?,
                cache.with_class(remaining[pick])?,
            );
            if ci > cp || (ci == cp && remaining[i] < remaining[pick]) {
                pick = i;
            }
        }
        let candidate = remaining.swap_remove(pick);
        let su_class = cache.with_class(candidate)?;
        if su_class <= 0.0 {
            continue;
        }
        let mut admissible = true;
        for &member in group.iter() {
            if cache.between(candidate, member)? > su_class {
                admissible = false;
                break;
            }
        }
        if admissible {
            group.insert(candidate);
        }
    }
    Ok(())
}
