//! Apriori frequent-itemset mining over movie feature sets, plus pairwise
//! independence checks via lift.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::FeatureCatalog;
use crate::sparse::CsrMatrix;

/// Transactions over items `0..num_items`, each sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionDb {
    transactions: Vec<Vec<usize>>,
    num_items: usize,
}

impl TransactionDb {
    pub fn new(transactions: Vec<Vec<usize>>, num_items: usize) -> Result<Self> {
        let mut transactions = transactions;
        for t in &mut transactions {
            t.sort_unstable();
            t.dedup();
            if let Some(&bad) = t.last().filter(|&&i| i >= num_items) {
                return Err(Error::DimensionMismatch { what: "item", expected: num_items, found: bad });
            }
        }
        Ok(TransactionDb { transactions, num_items })
    }

    /// One transaction per movie: its feature indices.
    pub fn from_membership(membership: &CsrMatrix) -> Self {
        let transactions = (0..membership.rows()).map(|m| membership.row(m).0.to_vec()).collect();
        TransactionDb { transactions, num_items: membership.cols() }
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn transactions(&self) -> &[Vec<usize>] {
        &self.transactions
    }

    /// Number of transactions containing every item of the sorted `items`.
    pub fn support_count(&self, items: &[usize]) -> usize {
        self.transactions.iter().filter(|t| is_subset(items, t)).count()
    }
}

/// Both slices sorted ascending.
fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    'outer: for &x in small {
        for &y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinSupport {
    /// Fraction of transactions in `(0, 1]`.
    Relative(f64),
    /// At least this many transactions, `>= 1`.
    Absolute(usize),
}

impl MinSupport {
    pub fn count(&self, n: usize) -> Result<usize> {
        match *self {
            MinSupport::Relative(s) if s > 0.0 && s <= 1.0 => {
                // Guard against `s * n` landing a hair above an integer.
                let raw = s * n as f64;
                let rounded = libm::round(raw);
                let c = if libm::fabs(raw - rounded) < 1e-9 { rounded } else { libm::ceil(raw) };
                Ok((c as usize).max(1))
            }
            MinSupport::Relative(s) => Err(Error::InvalidParameter(alloc::format!("support {s} not in (0, 1]"))),
            MinSupport::Absolute(c) if c >= 1 => Ok(c),
            MinSupport::Absolute(_) => Err(Error::InvalidParameter("minimum count must be at least 1".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequentItemset {
    pub items: Vec<usize>,
    pub count: usize,
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningResult {
    /// Ordered by size, then lexicographically by items.
    pub itemsets: Vec<FrequentItemset>,
    /// Frequent itemsets found per level, starting at size 1.
    pub level_sizes: Vec<usize>,
    pub min_count: usize,
}

/// Level-wise apriori: candidates of size `k + 1` join two frequent `k`-sets
/// sharing their first `k - 1` items, and are kept only if every `k`-subset
/// is frequent.
pub fn mine(db: &TransactionDb, min_support: MinSupport) -> Result<MiningResult> {
    if db.is_empty() {
        return Err(Error::EmptyInput("transaction database"));
    }
    let n = db.len();
    let min_count = min_support.count(n)?;
    let mut item_counts = vec![0usize; db.num_items];
    for t in &db.transactions {
        for &i in t {
            item_counts[i] += 1;
        }
    }
    let mut level: Vec<(Vec<usize>, usize)> = (0..db.num_items)
        .filter(|&i| item_counts[i] >= min_count)
        .map(|i| (vec![i], item_counts[i]))
        .collect();
    let mut all = Vec::new();
    let mut level_sizes = Vec::new();
    while !level.is_empty() {
        level_sizes.push(level.len());
        let candidates = generate_candidates(&level);
        all.append(&mut level);
        if candidates.is_empty() {
            break;
        }
        let mut counts = vec![0usize; candidates.len()];
        for t in &db.transactions {
            if t.len() < candidates[0].len() {
                continue;
            }
            for (c, cand) in candidates.iter().enumerate() {
                if is_subset(cand, t) {
                    counts[c] += 1;
                }
            }
        }
        level = candidates
            .into_iter()
            .zip(counts)
            .filter(|(_, c)| *c >= min_count)
            .collect();
    }
    let itemsets = all
        .into_iter()
        .map(|(items, count)| FrequentItemset { items, count, support: count as f64 / n as f64 })
        .collect();
    Ok(MiningResult { itemsets, level_sizes, min_count })
}

/// `level` is sorted lexicographically with equal-length sets.
fn generate_candidates(level: &[(Vec<usize>, usize)]) -> Vec<Vec<usize>> {
    let k = level[0].0.len();
    let mut out = Vec::new();
    for (a, (left, _)) in level.iter().enumerate() {
        for (right, _) in &level[a + 1..] {
            if left[..k - 1] != right[..k - 1] {
                // Sorted order: once prefixes differ no later set matches.
                break;
            }
            let mut cand = left.clone();
            cand.push(right[k - 1]);
            let all_subsets_frequent = (0..cand.len() - 2).all(|drop| {
                let sub: Vec<usize> =
                    cand.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &x)| x).collect();
                level.binary_search_by(|probe| probe.0.cmp(&sub)).is_ok()
            });
            if all_subsets_frequent {
                out.push(cand);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Independent,
    Dependent,
    /// `P(A) * P(B) = 0`.
    UndefinedLift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependencyVerdict {
    pub pair: (usize, usize),
    pub count_a: usize,
    pub count_b: usize,
    pub count_ab: usize,
    pub n: usize,
    pub p_a: f64,
    pub p_b: f64,
    pub p_ab: f64,
    /// `P(AB) / (P(A) P(B))`; `None` when undefined.
    pub lift: Option<f64>,
    pub verdict: Verdict,
}

/// Dependent iff `|lift - 1| > tolerance`.
pub fn independence_test(db: &TransactionDb, a: usize, b: usize, tolerance: f64) -> Result<DependencyVerdict> {
    if db.is_empty() {
        return Err(Error::EmptyInput("transaction database"));
    }
    for item in [a, b] {
        if item >= db.num_items {
            return Err(Error::DimensionMismatch { what: "item", expected: db.num_items, found: item });
        }
    }
    let (mut ca, mut cb, mut cab) = (0, 0, 0);
    for t in &db.transactions {
        let ha = t.binary_search(&a).is_ok();
        let hb = t.binary_search(&b).is_ok();
        ca += ha as usize;
        cb += hb as usize;
        cab += (ha && hb) as usize;
    }
    let n = db.len();
    let p = |c: usize| c as f64 / n as f64;
    let (p_a, p_b, p_ab) = (p(ca), p(cb), p(cab));
    let (lift, verdict) = if ca == 0 || cb == 0 {
        (None, Verdict::UndefinedLift)
    } else {
        let lift = p_ab / (p_a * p_b);
        let v = if libm::fabs(lift - 1.0) > tolerance { Verdict::Dependent } else { Verdict::Independent };
        (Some(lift), v)
    };
    Ok(DependencyVerdict { pair: (a, b), count_a: ca, count_b: cb, count_ab: cab, n, p_a, p_b, p_ab, lift, verdict })
}

/// Tally of frequent itemsets (size >= 2) by their sorted tuple of type labels.
pub fn type_combination_report(frequent: &[FrequentItemset], catalog: &FeatureCatalog) -> BTreeMap<Vec<String>, usize> {
    let mut tally = BTreeMap::new();
    for set in frequent.iter().filter(|s| s.items.len() >= 2) {
        let mut key: Vec<String> = set.items.iter().map(|&k| String::from(catalog.label_of(k))).collect();
        key.sort();
        *tally.entry(key).or_insert(0) += 1;
    }
    tally
}
