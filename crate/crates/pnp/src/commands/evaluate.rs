use pnp_core::eval::{cross_validate, AucReport, CvParams};
use pnp_core::graph::Graph;
use pnp_core::walks::PathWeights;
use serde_json::{json, Value};

use super::{ensure_dir, out_file};
use crate::config::RunConfig;
use crate::error::Result;
use crate::report::Report;
use crate::tsv::Table;
use crate::dataset;

fn summary(r: &AucReport) -> Value {
    json!({
        "mean_auc": r.mean,
        "std_across_users": r.std,
        "fold_mean_auc": r.fold_mean,
        "std_across_folds": r.fold_std,
        "users_scored": r.per_user.len(),
        "users_excluded": r.excluded_users,
    })
}

fn spread(xs: &[f64]) -> Option<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    (!xs.is_empty()).then_some(max - min)
}

/// `(alpha, gamma)` pairs from the grid with `beta = 1 - alpha - gamma >= 0`.
fn weight_points(grid: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &a in grid {
        for &g in grid {
            let b = 1.0 - a - g;
            if b > -1e-12 {
                out.push((a, b.max(0.0), g));
            }
        }
    }
    out
}

fn sweep_deltas(cfg: &RunConfig, graph: &Graph, base: &CvParams, report: &mut Report) -> Result<()> {
    let mut t = Table::create(out_file(cfg, "delta_sweep.tsv"), &["delta", "mean_auc", "std_across_users", "std_across_folds"])?;
    let mut means = Vec::new();
    for &delta in &cfg.delta_grid {
        let mut p = *base;
        p.pnp.delta = delta;
        let r = cross_validate(graph, &p)?;
        log::info!("delta {delta}: mean auc {:.4}", r.mean);
        t.row(&[&delta, &r.mean, &r.std, &r.fold_std])?;
        means.push(r.mean);
    }
    report.set("delta_sweep", json!({ "deltas": cfg.delta_grid, "mean_auc": means, "spread": spread(&means) }));
    report.file(t.finish()?);
    Ok(())
}

fn sweep_weights(cfg: &RunConfig, graph: &Graph, base: &CvParams, report: &mut Report) -> Result<()> {
    let mut t = Table::create(out_file(cfg, "weight_grid.tsv"), &["alpha", "beta", "gamma", "mean_auc", "std_across_users"])?;
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for (a, b, g) in weight_points(&cfg.weight_grid) {
        let mut p = *base;
        p.pnp.weights = PathWeights::new(a, b, g)?;
        let r = cross_validate(graph, &p)?;
        t.row(&[&a, &b, &g, &r.mean, &r.std])?;
        if best.is_none_or(|x| r.mean > x.3) {
            best = Some((a, b, g, r.mean));
        }
    }
    report.set(
        "weight_grid",
        json!({ "best": best.map(|(a, b, g, m)| json!({ "alpha": a, "beta": b, "gamma": g, "mean_auc": m })) }),
    );
    report.file(t.finish()?);
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let seed = cfg.require_seed()?;
    let graph = dataset::load(cfg)?;
    let base = CvParams { pnp: cfg.params()?, folds: cfg.folds, seed, infer: cfg.infer() };
    let result = cross_validate(&graph, &base)?;
    ensure_dir(&cfg.out)?;

    let mut report = Report::new("evaluate", cfg);
    report.dataset(&graph.fingerprint()).set("auc", summary(&result));

    let mut t = Table::create(
        out_file(cfg, "folds.tsv"),
        &["fold", "users", "mean_auc", "std_auc", "single_class_users", "skipped_no_train", "like_fraction"],
    )?;
    let mut folds = Vec::new();
    for f in &result.folds {
        t.row(&[&f.fold, &f.user_auc.len(), &f.mean, &f.std, &f.single_class_users, &f.skipped_no_train, &f.like_fraction])?;
        folds.push(json!({
            "fold": f.fold,
            "users": f.user_auc.len(),
            "mean_auc": f.mean,
            "std_auc": f.std,
            "single_class_users": f.single_class_users,
            "skipped_no_train": f.skipped_no_train,
            "like_fraction": f.like_fraction,
        }));
    }
    report.set("folds", folds);
    report.file(t.finish()?);

    if cfg.per_user_auc {
        let mut t = Table::create(out_file(cfg, "per_user_auc.tsv"), &["user_id", "auc"])?;
        for &(u, a) in &result.per_user {
            t.row(&[&graph.users().id_of(u), &a])?;
        }
        report.file(t.finish()?);
    }
    if !cfg.delta_grid.is_empty() {
        sweep_deltas(cfg, &graph, &base, &mut report)?;
    }
    if !cfg.weight_grid.is_empty() {
        sweep_weights(cfg, &graph, &base, &mut report)?;
    }
    Ok(report)
}
