use alloc::vec;
use alloc::vec::Vec;

use crate::design::{design_cardinality, AggregatedScores, CapacityConstraints, Design, QuotaMode};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sparse::CsrMatrix;
use crate::walks::TargetSet;

/// Per-movie rating counts and mean ratings over the target users. Movies no
/// target user rated have count 0 and mean 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MovieTargetStats {
    pub counts: Vec<usize>,
    pub means: Vec<f64>,
}

pub fn movie_target_stats(ratings: &CsrMatrix, target: &TargetSet) -> Result<MovieTargetStats> {
    if target.universe() != ratings.rows() {
        return Err(Error::DimensionMismatch { what: "target universe", expected: ratings.rows(), found: target.universe() });
    }
    let mut counts = vec![0usize; ratings.cols()];
    let mut sums = vec![0.0f64; ratings.cols()];
    for &u in target.indices() {
        let (movies, vals) = ratings.row(u);
        for (&m, &r) in movies.iter().zip(vals) {
            counts[m] += 1;
            sums[m] += r;
        }
    }
    let means = sums.iter().zip(&counts).map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 }).collect();
    Ok(MovieTargetStats { counts, means })
}

/// `p = v F` with `v_j` the number of target users who rated movie `j`.
pub fn popularity_scores(graph: &Graph, target: &TargetSet) -> Result<Vec<f64>> {
    let stats = movie_target_stats(graph.ratings(), target)?;
    let v: Vec<f64> = stats.counts.iter().map(|&c| c as f64).collect();
    graph.membership().left_mul(&v)
}

/// `t = rbar F~` with `F~` the column-normalized membership matrix, i.e. each
/// feature's average of its movies' target mean ratings.
pub fn top_scores(graph: &Graph, target: &TargetSet) -> Result<Vec<f64>> {
    let stats = movie_target_stats(graph.ratings(), target)?;
    let f = graph.membership();
    let col = f.col_counts();
    let normalized = f.map_values(|_, k, v| v / col[k] as f64);
    normalized.left_mul(&stats.means)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineDesign {
    pub scores: Vec<f64>,
    pub design: Design,
}

fn design_from(graph: &Graph, target: &TargetSet, scores: Vec<f64>, caps: &CapacityConstraints) -> Result<BaselineDesign> {
    let agg = AggregatedScores::new(scores, target.len());
    let design = design_cardinality(&agg, graph.catalog(), caps, QuotaMode::UpperBound)?;
    Ok(BaselineDesign { scores: agg.scores().to_vec(), design })
}

/// Most popular features among the target users, per type.
pub fn baseline_popular(graph: &Graph, target: &TargetSet, caps: &CapacityConstraints) -> Result<BaselineDesign> {
    design_from(graph, target, popularity_scores(graph, target)?, caps)
}

/// Most highly rated features among the target users, per type.
pub fn baseline_top(graph: &Graph, target: &TargetSet, caps: &CapacityConstraints) -> Result<BaselineDesign> {
    design_from(graph, target, top_scores(graph, target)?, caps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnOptions {
    pub k: usize,
    /// Similarity-weighted mean instead of the plain mean.
    pub weighted: bool,
    /// Keep movies no target user rated as neighbour candidates.
    pub include_unrated: bool,
}

impl Default for KnnOptions {
    fn default() -> Self {
        KnnOptions { k: 20, weighted: false, include_unrated: true }
    }
}

/// Scores a design by the mean target rating of its `k` nearest movies under
/// cosine similarity of binary feature vectors. Ties in similarity go to the
/// lower movie index. The weighted variant uses `sum sim * rbar / sum sim`,
/// falling back to the plain mean when every neighbour has similarity 0.
pub fn knn_design_score(
    design: &[bool],
    membership: &CsrMatrix,
    stats: &MovieTargetStats,
    options: KnnOptions,
) -> Result<f64> {
    if design.len() != membership.cols() {
        return Err(Error::DimensionMismatch { what: "design vector", expected: membership.cols(), found: design.len() });
    }
    if stats.means.len() != membership.rows() {
        return Err(Error::DimensionMismatch { what: "movie means", expected: membership.rows(), found: stats.means.len() });
    }
    if options.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let design_size = design.iter().filter(|&&x| x).count();
    if design_size == 0 {
        return Err(Error::EmptyDesign);
    }
    let mut sims: Vec<(usize, f64)> = (0..membership.rows())
        .filter(|&m| options.include_unrated || stats.counts[m] > 0)
        .map(|m| {
            let (feats, _) = membership.row(m);
            let overlap = feats.iter().filter(|&&k| design[k]).count();
            let sim = if feats.is_empty() {
                0.0
            } else {
                overlap as f64 / libm::sqrt(design_size as f64 * feats.len() as f64)
            };
            (m, sim)
        })
        .collect();
    if sims.is_empty() {
        return Err(Error::EmptyInput("neighbour candidates"));
    }
    sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    sims.truncate(options.k);
    let plain = sims.iter().map(|&(m, _)| stats.means[m]).sum::<f64>() / sims.len() as f64;
    if !options.weighted {
        return Ok(plain);
    }
    let total: f64 = sims.iter().map(|s| s.1).sum();
    if total == 0.0 {
        return Ok(plain);
    }
    Ok(sims.iter().map(|&(m, s)| s * stats.means[m]).sum::<f64>() / total)
}
