//! Choosing a feature bundle for a target audience.
//!
//! Under the uniform threshold model (`tau_i ~ U[-1, 1]`) the expected number
//! of converted target users for a bundle `S` is
//! `sum_i P[sum_{k in S} w_ik > tau_i] = 1/2 * sum_{k in S} w_k + |U'|/2`
//! where `w_k` sums `w_ik` over the targets. Maximizing it is a linear
//! objective over per-type constraints, so every type is solved on its own.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::FeatureCatalog;
use crate::walks::{FastAggregate, PreferenceMatrix, TargetSet};

/// `w_k = sum over target users of w_ik`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedScores {
    scores: Vec<f64>,
    target_size: usize,
}

impl AggregatedScores {
    pub fn new(scores: Vec<f64>, target_size: usize) -> Self {
        AggregatedScores { scores, target_size }
    }

    pub fn from_fast(agg: FastAggregate, target: &TargetSet) -> Self {
        AggregatedScores { scores: agg.combined, target_size: target.len() }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }
}

/// Exact per-feature sums of the targeted rows of `w`.
pub fn aggregate_scores(w: &PreferenceMatrix, target: &TargetSet) -> Result<AggregatedScores> {
    Ok(AggregatedScores { scores: w.sum_rows(target)?, target_size: target.len() })
}

/// Maximum number of features per type label. Types not listed get zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CapacityConstraints {
    pub caps: BTreeMap<String, usize>,
}

impl CapacityConstraints {
    pub fn new(caps: impl IntoIterator<Item = (String, usize)>) -> Self {
        CapacityConstraints { caps: caps.into_iter().collect() }
    }

    /// Six actors, two directors, two genres, one producer, one studio.
    pub fn default_profile() -> Self {
        Self::new(
            [("actor", 6), ("director", 2), ("genre", 2), ("producer", 1), ("studio", 1)]
                .into_iter()
                .map(|(l, c)| (l.to_string(), c)),
        )
    }

    pub fn cap(&self, label: &str) -> usize {
        self.caps.get(label).copied().unwrap_or(0)
    }
}

/// Per-feature costs (keyed by external feature id) and per-type budgets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BudgetConstraints {
    pub costs: BTreeMap<u64, f64>,
    pub budgets: BTreeMap<String, f64>,
}

impl BudgetConstraints {
    pub fn budget(&self, label: &str) -> f64 {
        self.budgets.get(label).copied().unwrap_or(0.0)
    }
}

/// How capacities are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuotaMode {
    /// At most `B` features, never picking a feature with score <= 0.
    #[default]
    UpperBound,
    /// Exactly `min(B, |F_type|)` features, even when scores are negative.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnapsackMode {
    /// Dynamic program over costs scaled by `10^resolution_digits`.
    Exact { resolution_digits: u32, cell_limit: usize },
    /// Descending score/cost ratio.
    Greedy,
}

impl Default for KnapsackMode {
    fn default() -> Self {
        KnapsackMode::Exact { resolution_digits: 2, cell_limit: 50_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeSelection {
    pub label: String,
    /// Internal feature indices in selection order.
    pub features: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    /// One entry per catalog type, in catalog label order.
    pub selections: Vec<TypeSelection>,
    /// Sum of the selected aggregated scores, added in ascending feature index.
    pub objective: f64,
}

impl Design {
    fn from_selections(selections: Vec<TypeSelection>, scores: &[f64]) -> Self {
        let mut d = Design { selections, objective: 0.0 };
        d.objective = d.features().iter().map(|&k| scores[k]).sum();
        d
    }

    /// All selected features, ascending.
    pub fn features(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.selections.iter().flat_map(|s| s.features.iter().copied()).collect();
        all.sort_unstable();
        all
    }

    pub fn len(&self) -> usize {
        self.selections.iter().map(|s| s.features.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Binary characteristic vector over `num_features` features.
    pub fn indicator(&self, num_features: usize) -> Vec<bool> {
        let mut x = vec![false; num_features];
        for k in self.features() {
            x[k] = true;
        }
        x
    }
}

/// Descending score, ascending index.
fn by_score_desc(scores: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

fn check_len(scores: &AggregatedScores, catalog: &FeatureCatalog) -> Result<()> {
    if scores.scores.len() != catalog.len() {
        return Err(Error::DimensionMismatch { what: "feature scores", expected: catalog.len(), found: scores.scores.len() });
    }
    Ok(())
}

/// Top-`B` features of every type.
pub fn design_cardinality(
    scores: &AggregatedScores,
    catalog: &FeatureCatalog,
    caps: &CapacityConstraints,
    mode: QuotaMode,
) -> Result<Design> {
    check_len(scores, catalog)?;
    let w = &scores.scores;
    let selections = catalog
        .partition()
        .into_iter()
        .enumerate()
        .map(|(ty, mut feats)| {
            let label = catalog.labels()[ty].clone();
            if mode == QuotaMode::UpperBound {
                feats.retain(|&k| w[k] > 0.0);
            }
            feats.sort_by(by_score_desc(w));
            feats.truncate(caps.cap(&label));
            TypeSelection { label, features: feats }
        })
        .collect();
    Ok(Design::from_selections(selections, w))
}

/// Best bundle when every feature has a cost and each type has a budget.
/// Only features with positive score are candidates, and each of them must
/// have a cost.
pub fn design_budget(
    scores: &AggregatedScores,
    catalog: &FeatureCatalog,
    budget: &BudgetConstraints,
    mode: KnapsackMode,
) -> Result<Design> {
    check_len(scores, catalog)?;
    let w = &scores.scores;
    let mut selections = Vec::new();
    for (ty, feats) in catalog.partition().into_iter().enumerate() {
        let label = catalog.labels()[ty].clone();
        let limit = budget.budget(&label);
        if limit.is_nan() || limit < 0.0 {
            return Err(Error::InvalidParameter(alloc::format!("budget for '{label}' must be >= 0")));
        }
        let mut items = Vec::new();
        for k in feats.into_iter().filter(|&k| w[k] > 0.0) {
            let id = catalog.features().id_of(k);
            let cost = *budget.costs.get(&id).ok_or(Error::MissingCost { feature: id })?;
            if !cost.is_finite() || cost < 0.0 {
                return Err(Error::InvalidParameter(alloc::format!("cost of feature {id} must be >= 0")));
            }
            items.push((k, w[k], cost));
        }
        let chosen = match mode {
            KnapsackMode::Greedy => knapsack_greedy(&items, limit),
            KnapsackMode::Exact { resolution_digits, cell_limit } => {
                knapsack_exact(&items, limit, resolution_digits, cell_limit)
                    .map_err(|cells| Error::TableTooLarge { label: label.clone(), cells, limit: cell_limit })?
            }
        };
        selections.push(TypeSelection { label, features: chosen });
    }
    Ok(Design::from_selections(selections, w))
}

/// `(feature, score, cost)` items with positive scores.
fn knapsack_greedy(items: &[(usize, f64, f64)], budget: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    let ratio = |i: usize| {
        let (_, w, c) = items[i];
        if c == 0.0 {
            f64::INFINITY
        } else {
            w / c
        }
    };
    order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)).then(items[a].0.cmp(&items[b].0)));
    let mut used = 0.0;
    let mut chosen = Vec::new();
    for i in order {
        let (k, _, c) = items[i];
        if used + c <= budget {
            used += c;
            chosen.push(k);
        }
    }
    chosen
}

/// 0/1 knapsack over integer-scaled costs. `Err(cells)` when the table would
/// exceed `cell_limit`.
fn knapsack_exact(items: &[(usize, f64, f64)], budget: f64, digits: u32, cell_limit: usize) -> Result<Vec<usize>, usize> {
    let scale = libm::pow(10.0, digits as f64);
    let cap_f = libm::floor(budget * scale + 1e-9);
    let scaled: Vec<f64> = items.iter().map(|it| libm::round(it.2 * scale)).collect();
    // Items that can never fit do not need columns; the usable capacity is
    // bounded by their total scaled cost.
    let fitting_total: f64 = scaled.iter().filter(|&&c| c <= cap_f).sum();
    let cap_f = cap_f.min(fitting_total);
    let n = items.len();
    let cells_f = (n as f64 + 1.0) * (cap_f + 1.0);
    if cells_f > cell_limit as f64 {
        return Err(if cells_f >= usize::MAX as f64 { usize::MAX } else { cells_f as usize });
    }
    let cap = cap_f as usize;
    let costs: Vec<Option<usize>> = scaled.iter().map(|&c| if c <= cap_f { Some(c as usize) } else { None }).collect();
    let mut best = vec![0.0f64; cap + 1];
    let mut keep = vec![false; n * (cap + 1)];
    for (i, item) in items.iter().enumerate() {
        let Some(c) = costs[i] else { continue };
        let w = item.1;
        for b in (c..=cap).rev() {
            let cand = best[b - c] + w;
            if cand > best[b] {
                best[b] = cand;
                keep[i * (cap + 1) + b] = true;
            }
        }
    }
    let mut b = cap;
    let mut chosen = Vec::new();
    for i in (0..n).rev() {
        if keep[i * (cap + 1) + b] {
            chosen.push(items[i].0);
            b -= costs[i].unwrap();
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Conversion probability for a summed score under `tau ~ U[-1, 1]`,
/// clamped to `[0, 1]`.
pub fn conversion_probability(summed: f64) -> f64 {
    (0.5 * (summed + 1.0)).clamp(0.0, 1.0)
}

/// Expected converted users over the given preference rows.
pub fn expected_conversions_rows<'a>(rows: impl IntoIterator<Item = &'a [f64]>, design: &Design) -> f64 {
    let feats = design.features();
    rows.into_iter()
        .map(|row| conversion_probability(feats.iter().map(|&k| row[k]).sum()))
        .sum()
}

/// Expected converted target users under the uniform threshold model.
pub fn expected_conversions(w: &PreferenceMatrix, target: &TargetSet, design: &Design) -> Result<f64> {
    if target.universe() != w.num_users() {
        return Err(Error::DimensionMismatch { what: "target universe", expected: w.num_users(), found: target.universe() });
    }
    if let Some(&k) = design.features().last() {
        if k >= w.num_features() {
            return Err(Error::DimensionMismatch { what: "design feature", expected: w.num_features(), found: k });
        }
    }
    Ok(expected_conversions_rows(target.indices().iter().map(|&i| w.row(i)), design))
}

/// The unclamped linear surrogate `1/2 * sum_{k in S} w_k + |U'|/2`.
pub fn linear_conversions(scores: &AggregatedScores, design: &Design) -> f64 {
    0.5 * design.objective + scores.target_size as f64 / 2.0
}
