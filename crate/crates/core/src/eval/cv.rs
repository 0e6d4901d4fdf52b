use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::auc::auc;
use crate::error::{Error, Result};
use crate::graph::{user_means, Graph, UserStats};
use crate::sparse::CsrMatrix;
use crate::stats::mean_std;
use crate::walks::{InferOptions, PnpModel, PnpParams, PreferenceMatrix};

/// Like/dislike labels on the rating support, in row-major entry order.
#[derive(Debug, Clone, PartialEq)]
pub struct LikeLabels {
    /// `(user, movie, liked)`.
    pub entries: Vec<(usize, usize, bool)>,
}

impl LikeLabels {
    pub fn like_fraction(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().filter(|e| e.2).count() as f64 / self.entries.len() as f64
    }
}

/// `liked` iff the rating is at least the user's mean in `stats`. Ratings of
/// users without a mean are skipped.
pub fn label_likes(ratings: &CsrMatrix, stats: &UserStats) -> LikeLabels {
    let entries = ratings
        .iter()
        .filter_map(|(u, m, r)| stats.mean(u).map(|mean| (u, m, r >= mean)))
        .collect();
    LikeLabels { entries }
}

/// `score(i, j) = sum_k w_ik f_jk` for each requested (user, movie) pair.
pub fn predict_movie_scores(w: &PreferenceMatrix, membership: &CsrMatrix, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    if membership.cols() != w.num_features() {
        return Err(Error::DimensionMismatch { what: "membership columns", expected: w.num_features(), found: membership.cols() });
    }
    pairs
        .iter()
        .map(|&(u, m)| {
            if u >= w.num_users() || m >= membership.rows() {
                return Err(Error::DimensionMismatch { what: "score pair", expected: w.num_users(), found: u });
            }
            let row = w.row(u);
            let (feats, vals) = membership.row(m);
            Ok(feats.iter().zip(vals).map(|(&k, &f)| row[k] * f).sum())
        })
        .collect()
}

/// Assignment of every stored rating to one of `k` folds.
///
/// Each user's ratings are shuffled and dealt round-robin, so per-user fold
/// sizes differ by at most one. The starting fold rotates across users to
/// keep global fold sizes balanced too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    fold_of: Vec<usize>,
}

impl FoldPlan {
    pub fn new(ratings: &CsrMatrix, k: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(alloc::format!("need at least 2 folds, got {k}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fold_of = vec![0usize; ratings.nnz()];
        let mut offset = 0usize;
        let mut base = 0usize;
        for u in 0..ratings.rows() {
            let n = ratings.row_nnz(u);
            let mut slots: Vec<usize> = (0..n).collect();
            slots.shuffle(&mut rng);
            for (pos, &s) in slots.iter().enumerate() {
                fold_of[base + s] = (offset + pos) % k;
            }
            offset = (offset + n) % k;
            base += n;
        }
        Ok(FoldPlan { k, seed, fold_of })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold of the `e`-th stored rating in row-major order.
    pub fn fold_of(&self, entry: usize) -> usize {
        self.fold_of[entry]
    }

    /// `(train, test)` rating matrices for one fold.
    pub fn split(&self, ratings: &CsrMatrix, fold: usize) -> Result<(CsrMatrix, CsrMatrix)> {
        if self.fold_of.len() != ratings.nnz() {
            return Err(Error::DimensionMismatch { what: "fold plan", expected: ratings.nnz(), found: self.fold_of.len() });
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (e, t) in ratings.iter().enumerate() {
            if self.fold_of[e] == fold {
                test.push(t);
            } else {
                train.push(t);
            }
        }
        Ok((
            CsrMatrix::from_triplets(ratings.rows(), ratings.cols(), train)?,
            CsrMatrix::from_triplets(ratings.rows(), ratings.cols(), test)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvParams {
    pub pnp: PnpParams,
    pub folds: usize,
    pub seed: u64,
    pub infer: InferOptions,
}

impl Default for CvParams {
    fn default() -> Self {
        CvParams { pnp: PnpParams::default(), folds: 5, seed: 0, infer: InferOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldSummary {
    pub fold: usize,
    /// `(internal user, auc)` for users with both classes in this fold's test set.
    pub user_auc: Vec<(usize, f64)>,
    pub mean: f64,
    pub std: f64,
    pub single_class_users: usize,
    pub skipped_no_train: usize,
    pub like_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AucReport {
    /// Per-user AUC averaged over the folds where it was defined, by internal user.
    pub per_user: Vec<(usize, f64)>,
    /// Mean and std across users.
    pub mean: f64,
    pub std: f64,
    /// Mean and std of the per-fold means.
    pub fold_mean: f64,
    pub fold_std: f64,
    pub folds: Vec<FoldSummary>,
    /// Users with no AUC in any fold.
    pub excluded_users: usize,
}

/// Preference matrix trained on one fold's training ratings only.
pub fn fold_model(graph: &Graph, plan: &FoldPlan, fold: usize, params: &CvParams) -> Result<(PreferenceMatrix, CsrMatrix, CsrMatrix)> {
    let (train, test) = plan.split(graph.ratings(), fold)?;
    let model = PnpModel::fit_ratings(&train, graph.membership(), params.pnp, graph.fingerprint())?;
    Ok((model.infer_full(&params.infer)?, train, test))
}

/// k-fold per-user AUC of the like/dislike prediction `sum_k w_ik f_jk`.
/// Means, split and `W` are recomputed from training ratings in every fold.
pub fn cross_validate(graph: &Graph, params: &CvParams) -> Result<AucReport> {
    let plan = FoldPlan::new(graph.ratings(), params.folds, params.seed)?;
    let mut folds = Vec::with_capacity(params.folds);
    for fold in 0..params.folds {
        let (w, train, test) = fold_model(graph, &plan, fold, params)?;
        folds.push(evaluate_fold(fold, &w, &train, &test, graph.membership())?);
    }
    let mut sums = vec![(0.0f64, 0usize); graph.num_users()];
    for f in &folds {
        for &(u, a) in &f.user_auc {
            sums[u].0 += a;
            sums[u].1 += 1;
        }
    }
    let per_user: Vec<(usize, f64)> = sums
        .iter()
        .enumerate()
        .filter(|(_, s)| s.1 > 0)
        .map(|(u, s)| (u, s.0 / s.1 as f64))
        .collect();
    let excluded_users = graph.num_users() - per_user.len();
    let values: Vec<f64> = per_user.iter().map(|p| p.1).collect();
    let (mean, std) = mean_std(&values).unwrap_or((f64::NAN, f64::NAN));
    let fold_means: Vec<f64> = folds.iter().map(|f| f.mean).filter(|m| !m.is_nan()).collect();
    let (fold_mean, fold_std) = mean_std(&fold_means).unwrap_or((f64::NAN, f64::NAN));
    Ok(AucReport { per_user, mean, std, fold_mean, fold_std, folds, excluded_users })
}

fn evaluate_fold(fold: usize, w: &PreferenceMatrix, train: &CsrMatrix, test: &CsrMatrix, membership: &CsrMatrix) -> Result<FoldSummary> {
    let stats = user_means(train);
    let mut user_auc = Vec::new();
    let mut single_class_users = 0;
    let mut skipped_no_train = 0;
    let mut liked = 0usize;
    let mut labelled = 0usize;
    for u in 0..test.rows() {
        let (movies, ratings) = test.row(u);
        if movies.is_empty() {
            continue;
        }
        let Some(mean) = stats.mean(u) else {
            skipped_no_train += 1;
            continue;
        };
        let labels: Vec<bool> = ratings.iter().map(|&r| r >= mean).collect();
        liked += labels.iter().filter(|&&l| l).count();
        labelled += labels.len();
        let pairs: Vec<(usize, usize)> = movies.iter().map(|&m| (u, m)).collect();
        let scores = predict_movie_scores(w, membership, &pairs)?;
        match auc(&scores, &labels) {
            Some(a) => user_auc.push((u, a)),
            None => single_class_users += 1,
        }
    }
    let values: Vec<f64> = user_auc.iter().map(|p| p.1).collect();
    let (mean, std) = mean_std(&values).unwrap_or((f64::NAN, f64::NAN));
    Ok(FoldSummary {
        fold,
        user_auc,
        mean,
        std,
        single_class_users,
        skipped_no_train,
        like_fraction: if labelled == 0 { 0.0 } else { liked as f64 / labelled as f64 },
    })
}
