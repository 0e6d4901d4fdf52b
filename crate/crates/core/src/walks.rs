//! Signed random walks along the three fixed path shapes.
//!
//! Walks start at a user and follow the reversed path shapes:
//!
//! | path              | steps                 |
//! |-------------------|-----------------------|
//! | `TwoStep`         | U -> M -> F           |
//! | `FourStepUser`    | U -> M -> U -> M -> F |
//! | `FourStepFeature` | U -> M -> F -> M -> F |
//!
//! User-movie steps use the reweighed positive or negative rating graph;
//! movie-feature steps are uniform over memberships and carry no sign. The
//! score of a (user, feature) pair on one path is the probability of
//! arriving at the feature on the positive graph minus that on the negative
//! graph, so it lies in `[-1, 1]`.
//!
//! Two evaluation routes exist. [`infer_full`] materializes the dense
//! user x feature matrix row by row. [`aggregate_fast`] pushes the target
//! indicator vector through the same operators and never allocates anything
//! larger than `O(u + m + f)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{split_and_reweigh, user_means, Graph, SignedSplit, TiePolicy};
use crate::ids::IdMap;
use crate::sparse::{row_normalize, CsrMatrix, TransitionOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathKind {
    TwoStep,
    FourStepUser,
    FourStepFeature,
}

impl PathKind {
    pub const ALL: [PathKind; 3] = [PathKind::TwoStep, PathKind::FourStepUser, PathKind::FourStepFeature];

    pub fn index(self) -> usize {
        match self {
            PathKind::TwoStep => 0,
            PathKind::FourStepUser => 1,
            PathKind::FourStepFeature => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

/// Convex weights of the three path scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathWeights {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl PathWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !(ok(alpha) && ok(beta) && ok(gamma)) {
            return Err(Error::InvalidParameter(alloc::format!(
                "path weights must be nonnegative, got ({alpha}, {beta}, {gamma})"
            )));
        }
        if libm::fabs(alpha + beta + gamma - 1.0) > 1e-9 {
            return Err(Error::InvalidParameter(alloc::format!(
                "path weights must sum to 1, got {}",
                alpha + beta + gamma
            )));
        }
        Ok(PathWeights { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn of(&self, path: PathKind) -> f64 {
        match path {
            PathKind::TwoStep => self.alpha,
            PathKind::FourStepUser => self.beta,
            PathKind::FourStepFeature => self.gamma,
        }
    }
}

impl Default for PathWeights {
    fn default() -> Self {
        PathWeights { alpha: 0.5, beta: 0.2, gamma: 0.3 }
    }
}

/// Everything that determines a preference matrix besides the graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnpParams {
    pub weights: PathWeights,
    pub delta: f64,
    pub tie: TiePolicy,
}

impl Default for PnpParams {
    fn default() -> Self {
        PnpParams { weights: PathWeights::default(), delta: 0.5, tie: TiePolicy::Positive }
    }
}

/// Row-stochastic operators for the user-movie legs of one sign.
#[derive(Debug, Clone)]
pub struct SignOperators {
    pub user_movie: TransitionOperator,
    pub movie_user: TransitionOperator,
}

impl SignOperators {
    pub fn new(weighted: &CsrMatrix) -> Result<Self> {
        Ok(SignOperators { user_movie: row_normalize(weighted)?, movie_user: row_normalize(&weighted.transpose())? })
    }
}

/// Unsigned movie-feature operators, uniform over memberships.
#[derive(Debug, Clone)]
pub struct ContentOperators {
    pub movie_feature: TransitionOperator,
    pub feature_movie: TransitionOperator,
}

impl ContentOperators {
    pub fn new(membership: &CsrMatrix) -> Result<Self> {
        Ok(ContentOperators {
            movie_feature: row_normalize(membership)?,
            feature_movie: row_normalize(&membership.transpose())?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct WalkOperators {
    pub positive: SignOperators,
    pub negative: SignOperators,
    pub content: ContentOperators,
}

impl WalkOperators {
    pub fn new(split: &SignedSplit, membership: &CsrMatrix) -> Result<Self> {
        if split.positive.cols() != membership.rows() {
            return Err(Error::DimensionMismatch {
                what: "membership rows vs rating columns",
                expected: split.positive.cols(),
                found: membership.rows(),
            });
        }
        if split.positive.rows() != split.negative.rows() || split.positive.cols() != split.negative.cols() {
            return Err(Error::DimensionMismatch {
                what: "negative graph shape",
                expected: split.positive.rows(),
                found: split.negative.rows(),
            });
        }
        Ok(WalkOperators {
            positive: SignOperators::new(&split.positive)?,
            negative: SignOperators::new(&split.negative)?,
            content: ContentOperators::new(membership)?,
        })
    }

    pub fn num_users(&self) -> usize {
        self.positive.user_movie.rows()
    }

    pub fn num_movies(&self) -> usize {
        self.content.movie_feature.rows()
    }

    pub fn num_features(&self) -> usize {
        self.content.movie_feature.cols()
    }

    pub fn sign(&self, sign: Sign) -> &SignOperators {
        match sign {
            Sign::Positive => &self.positive,
            Sign::Negative => &self.negative,
        }
    }
}

/// The walk steps after leaving the user, in order.
fn path_steps<'a>(s: &'a SignOperators, c: &'a ContentOperators, path: PathKind) -> Vec<&'a TransitionOperator> {
    match path {
        PathKind::TwoStep => vec![&s.user_movie, &c.movie_feature],
        PathKind::FourStepUser => vec![&s.user_movie, &s.movie_user, &s.user_movie, &c.movie_feature],
        PathKind::FourStepFeature => {
            vec![&s.user_movie, &c.movie_feature, &c.feature_movie, &c.movie_feature]
        }
    }
}

fn run_chain(start: &[f64], steps: &[&TransitionOperator]) -> Vec<f64> {
    let mut v = start.to_vec();
    for op in steps {
        v = op.step(&v).expect("operator chain shapes are validated at construction");
    }
    v
}

/// Dense row-major matrix of walk scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { what: "score matrix data", expected: rows * cols, found: data.len() });
        }
        Ok(ScoreMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Arrival probabilities on one sign's graph: entry (i, k) is the chance that
/// a walk from user `i` along `path` ends at feature `k`.
pub fn walk_scores_single_sign(
    sign: &SignOperators,
    content: &ContentOperators,
    path: PathKind,
) -> Result<ScoreMatrix> {
    if sign.user_movie.cols() != content.movie_feature.rows() {
        return Err(Error::DimensionMismatch {
            what: "movie count",
            expected: sign.user_movie.cols(),
            found: content.movie_feature.rows(),
        });
    }
    let steps = path_steps(sign, content, path);
    let (u, f) = (sign.user_movie.rows(), content.movie_feature.cols());
    let mut data = Vec::with_capacity(u * f);
    let mut start = vec![0.0; u];
    for i in 0..u {
        start[i] = 1.0;
        data.extend(run_chain(&start, &steps));
        start[i] = 0.0;
    }
    ScoreMatrix::from_vec(u, f, data)
}

/// Positive-graph scores minus negative-graph scores for one path.
pub fn signed_path_scores(ops: &WalkOperators, path: PathKind) -> Result<ScoreMatrix> {
    let pos = walk_scores_single_sign(&ops.positive, &ops.content, path)?;
    let neg = walk_scores_single_sign(&ops.negative, &ops.content, path)?;
    let data = pos.data.iter().zip(&neg.data).map(|(p, n)| p - n).collect();
    ScoreMatrix::from_vec(pos.rows, pos.cols, data)
}

/// Provenance stamped onto every preference matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub weights: PathWeights,
    pub delta: f64,
    pub dataset_hash: [u8; 32],
}

/// Dense user x feature matrix of signed preferences, entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    scores: ScoreMatrix,
    provenance: Provenance,
}

/// Slack allowed on the `[-1, 1]` bound for rounding in long sums.
const RANGE_SLACK: f64 = 1e-9;

impl PreferenceMatrix {
    pub fn new(scores: ScoreMatrix, provenance: Provenance) -> Result<Self> {
        if let Some(bad) = scores.data.iter().find(|w| w.is_nan() || libm::fabs(**w) > 1.0 + RANGE_SLACK) {
            return Err(Error::InvalidParameter(alloc::format!("preference score {bad} outside [-1, 1]")));
        }
        Ok(PreferenceMatrix { scores, provenance })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn scores(&self) -> &ScoreMatrix {
        &self.scores
    }

    pub fn num_users(&self) -> usize {
        self.scores.rows
    }

    pub fn num_features(&self) -> usize {
        self.scores.cols
    }

    pub fn row(&self, user: usize) -> &[f64] {
        self.scores.row(user)
    }

    pub fn get(&self, user: usize, feature: usize) -> f64 {
        self.scores.get(user, feature)
    }

    /// Sum of the target users' rows, accumulated in ascending user order.
    pub fn sum_rows(&self, target: &TargetSet) -> Result<Vec<f64>> {
        if target.universe() != self.num_users() {
            return Err(Error::DimensionMismatch {
                what: "target universe",
                expected: self.num_users(),
                found: target.universe(),
            });
        }
        let mut out = vec![0.0; self.num_features()];
        for &u in target.indices() {
            for (o, w) in out.iter_mut().zip(self.row(u)) {
                *o += w;
            }
        }
        Ok(out)
    }
}

/// `alpha * W2 + beta * W4u + gamma * W4f`.
pub fn combine_paths(
    two_step: &ScoreMatrix,
    four_step_user: &ScoreMatrix,
    four_step_feature: &ScoreMatrix,
    weights: PathWeights,
    provenance_hash: [u8; 32],
    delta: f64,
) -> Result<PreferenceMatrix> {
    for m in [four_step_user, four_step_feature] {
        if m.rows != two_step.rows || m.cols != two_step.cols {
            return Err(Error::DimensionMismatch {
                what: "path score matrices",
                expected: two_step.rows * two_step.cols,
                found: m.rows * m.cols,
            });
        }
    }
    let data = two_step
        .data
        .iter()
        .zip(&four_step_user.data)
        .zip(&four_step_feature.data)
        .map(|((a, b), c)| (weights.alpha * a + weights.beta * b + weights.gamma * c).clamp(-1.0, 1.0))
        .collect();
    PreferenceMatrix::new(
        ScoreMatrix::from_vec(two_step.rows, two_step.cols, data)?,
        Provenance { weights, delta, dataset_hash: provenance_hash },
    )
}

/// A nonempty set of target users with its indicator vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    ids: Vec<u64>,
    indices: Vec<usize>,
    indicator: Vec<f64>,
}

impl TargetSet {
    /// Fails with every id missing from `users` when any is unknown.
    pub fn new(users: &IdMap, ids: &[u64]) -> Result<Self> {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(Error::EmptyInput("target set"));
        }
        let unknown: Vec<u64> = ids.iter().copied().filter(|&id| users.index_of(id).is_none()).collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownIds { kind: "user", ids: unknown });
        }
        let indices: Vec<usize> = ids.iter().map(|&id| users.index_of(id).unwrap()).collect();
        let mut indicator = vec![0.0; users.len()];
        for &i in &indices {
            indicator[i] = 1.0;
        }
        Ok(TargetSet { ids, indices, indicator })
    }

    pub fn all(users: &IdMap) -> Result<Self> {
        Self::new(users, users.ids())
    }

    pub fn from_indices(users: &IdMap, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= users.len()) {
            return Err(Error::DimensionMismatch { what: "target index", expected: users.len(), found: bad });
        }
        let ids: Vec<u64> = indices.iter().map(|&i| users.id_of(i)).collect();
        Self::new(users, &ids)
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    /// Internal indices, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn indicator(&self) -> &[f64] {
        &self.indicator
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Number of users in the graph the set was built against.
    pub fn universe(&self) -> usize {
        self.indicator.len()
    }
}

/// Per-(sign, path) aggregated vectors and their combination.
#[derive(Debug, Clone, PartialEq)]
pub struct FastAggregate {
    pub positive: [Vec<f64>; 3],
    pub negative: [Vec<f64>; 3],
    /// Combined `w_k = sum over targets of W[i, k]`.
    pub combined: Vec<f64>,
}

impl FastAggregate {
    pub fn signed(&self, path: PathKind) -> Vec<f64> {
        let i = path.index();
        self.positive[i].iter().zip(&self.negative[i]).map(|(p, n)| p - n).collect()
    }
}

/// Pushes a start distribution over users through all six chains, sharing
/// the common prefixes. Returns per-path arrival vectors for one sign.
fn sign_chains(sign: &SignOperators, content: &ContentOperators, start: &[f64]) -> [Vec<f64>; 3] {
    let movies = run_chain(start, &[&sign.user_movie]);
    let two = run_chain(&movies, &[&content.movie_feature]);
    let four_user = run_chain(&movies, &[&sign.movie_user, &sign.user_movie, &content.movie_feature]);
    let four_feature = run_chain(&two, &[&content.feature_movie, &content.movie_feature]);
    [two, four_user, four_feature]
}

fn combine_into(out: &mut [f64], pos: &[Vec<f64>; 3], neg: &[Vec<f64>; 3], w: PathWeights) {
    let coeff = [w.alpha, w.beta, w.gamma];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for p in 0..3 {
            acc += coeff[p] * (pos[p][k] - neg[p][k]);
        }
        *o = acc;
    }
}

/// A single user's scores are differences of probabilities, so they lie in
/// `[-1, 1]`; this only removes rounding error in the last bit.
fn clamp_unit(row: &mut [f64]) {
    for x in row {
        *x = x.clamp(-1.0, 1.0);
    }
}

/// Aggregated preference scores over `target` without materializing `W`.
pub fn aggregate_fast(ops: &WalkOperators, target: &TargetSet, weights: PathWeights) -> Result<FastAggregate> {
    aggregate_vector(ops, target.indicator(), weights)
}

/// Same as [`aggregate_fast`] for an arbitrary nonnegative start vector over users.
pub fn aggregate_vector(ops: &WalkOperators, start: &[f64], weights: PathWeights) -> Result<FastAggregate> {
    if start.len() != ops.num_users() {
        return Err(Error::DimensionMismatch { what: "target indicator", expected: ops.num_users(), found: start.len() });
    }
    let positive = sign_chains(&ops.positive, &ops.content, start);
    let negative = sign_chains(&ops.negative, &ops.content, start);
    let mut combined = vec![0.0; ops.num_features()];
    combine_into(&mut combined, &positive, &negative, weights);
    Ok(FastAggregate { positive, negative, combined })
}

/// One user's preference row, computed with the vector chains.
pub fn user_row(ops: &WalkOperators, user: usize, weights: PathWeights) -> Result<Vec<f64>> {
    if user >= ops.num_users() {
        return Err(Error::DimensionMismatch { what: "user index", expected: ops.num_users(), found: user });
    }
    let mut start = vec![0.0; ops.num_users()];
    start[user] = 1.0;
    let mut row = aggregate_vector(ops, &start, weights)?.combined;
    clamp_unit(&mut row);
    Ok(row)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferOptions {
    /// Upper bound on dense `f64` cells held at once.
    pub max_dense_cells: usize,
}

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions { max_dense_cells: 1 << 28 }
    }
}

/// Rows computed together, each with its own scratch vectors.
const ROW_BLOCK: usize = 32;

/// Dense preference matrix for every user.
///
/// Each row is computed independently by the same fixed-order loop, so the
/// result does not depend on how rows are distributed across threads.
pub fn infer_full(
    ops: &WalkOperators,
    weights: PathWeights,
    provenance: Provenance,
    options: &InferOptions,
) -> Result<PreferenceMatrix> {
    let (u, m, f) = (ops.num_users(), ops.num_movies(), ops.num_features());
    let widest = m.max(u).max(f);
    let needed = u
        .checked_mul(f)
        .and_then(|out| ROW_BLOCK.checked_mul(widest * 4).and_then(|scratch| out.checked_add(scratch)))
        .unwrap_or(usize::MAX);
    if needed > options.max_dense_cells {
        return Err(Error::MemoryBudget { needed, limit: options.max_dense_cells });
    }
    let mut data = vec![0.0; u * f];
    if f > 0 {
        fill_rows(ops, weights, &mut data, f);
    }
    PreferenceMatrix::new(ScoreMatrix::from_vec(u, f, data)?, provenance)
}

fn fill_block(ops: &WalkOperators, weights: PathWeights, first_row: usize, block: &mut [f64], f: usize) {
    let mut start = vec![0.0; ops.num_users()];
    for (r, out) in block.chunks_mut(f).enumerate() {
        let i = first_row + r;
        start[i] = 1.0;
        let pos = sign_chains(&ops.positive, &ops.content, &start);
        let neg = sign_chains(&ops.negative, &ops.content, &start);
        combine_into(out, &pos, &neg, weights);
        clamp_unit(out);
        start[i] = 0.0;
    }
}

#[cfg(not(feature = "parallel"))]
fn fill_rows(ops: &WalkOperators, weights: PathWeights, data: &mut [f64], f: usize) {
    for (b, block) in data.chunks_mut(f * ROW_BLOCK).enumerate() {
        fill_block(ops, weights, b * ROW_BLOCK, block, f);
    }
}

#[cfg(feature = "parallel")]
fn fill_rows(ops: &WalkOperators, weights: PathWeights, data: &mut [f64], f: usize) {
    use rayon::prelude::*;
    data.par_chunks_mut(f * ROW_BLOCK)
        .enumerate()
        .for_each(|(b, block)| fill_block(ops, weights, b * ROW_BLOCK, block, f));
}

/// Operators plus parameters for one graph: the state shared by all
/// inference queries.
#[derive(Debug, Clone)]
pub struct PnpModel {
    ops: WalkOperators,
    params: PnpParams,
    dataset_hash: [u8; 32],
}

impl PnpModel {
    pub fn fit(graph: &Graph, params: PnpParams) -> Result<Self> {
        let ops = build_operators(graph.ratings(), graph.membership(), params.delta, params.tie)?;
        Ok(PnpModel { ops, params, dataset_hash: graph.fingerprint() })
    }

    /// Fits on a ratings matrix other than the graph's own (e.g. a training fold).
    pub fn fit_ratings(ratings: &CsrMatrix, membership: &CsrMatrix, params: PnpParams, dataset_hash: [u8; 32]) -> Result<Self> {
        let ops = build_operators(ratings, membership, params.delta, params.tie)?;
        Ok(PnpModel { ops, params, dataset_hash })
    }

    pub fn operators(&self) -> &WalkOperators {
        &self.ops
    }

    pub fn params(&self) -> &PnpParams {
        &self.params
    }

    pub fn provenance(&self) -> Provenance {
        Provenance { weights: self.params.weights, delta: self.params.delta, dataset_hash: self.dataset_hash }
    }

    pub fn infer_full(&self, options: &InferOptions) -> Result<PreferenceMatrix> {
        infer_full(&self.ops, self.params.weights, self.provenance(), options)
    }

    pub fn aggregate(&self, target: &TargetSet) -> Result<FastAggregate> {
        aggregate_fast(&self.ops, target, self.params.weights)
    }

    pub fn user_row(&self, user: usize) -> Result<Vec<f64>> {
        user_row(&self.ops, user, self.params.weights)
    }
}

/// Means, signed split and operators for a ratings/membership pair.
pub fn build_operators(ratings: &CsrMatrix, membership: &CsrMatrix, delta: f64, tie: TiePolicy) -> Result<WalkOperators> {
    let stats = user_means(ratings);
    let split = split_and_reweigh(ratings, &stats, delta, tie)?;
    WalkOperators::new(&split, membership)
}
