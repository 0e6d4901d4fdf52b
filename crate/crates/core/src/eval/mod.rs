//! Evaluation: per-user like/dislike AUC under k-fold cross validation, and
//! design scoring against popularity and rating baselines.

mod auc;
mod baselines;
mod cv;

pub use auc::auc;
pub use baselines::{
    baseline_popular, baseline_top, knn_design_score, movie_target_stats, popularity_scores, top_scores,
    BaselineDesign, KnnOptions, MovieTargetStats,
};
pub use cv::{
    cross_validate, fold_model, label_likes, predict_movie_scores, AucReport, CvParams, FoldPlan, FoldSummary,
    LikeLabels,
};
