use std::collections::BTreeMap;

use pnp_core::design::{
    design_budget, design_cardinality, expected_conversions_rows, linear_conversions, AggregatedScores,
    BudgetConstraints, Design, QuotaMode,
};
use pnp_core::eval::{baseline_popular, baseline_top, knn_design_score, movie_target_stats, KnnOptions};
use pnp_core::graph::Graph;
use pnp_core::walks::{PnpModel, TargetSet};
use pnp_core::Error as CoreError;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{ensure_dir, out_file};
use crate::config::{RunConfig, TargetSource};
use crate::error::{CliError, Result};
use crate::report::Report;
use crate::tsv::{self, Table};
use crate::{dataset, export};

pub fn target_set(cfg: &RunConfig, graph: &Graph) -> Result<TargetSet> {
    match &cfg.target {
        TargetSource::All => Ok(TargetSet::all(graph.users())?),
        TargetSource::File(path) => {
            let ids = tsv::read_ids(path)?;
            TargetSet::new(graph.users(), &ids).map_err(|source| CliError::Input { path: path.clone(), source })
        }
    }
}

fn selections_json(design: &Design, graph: &Graph, scores: &[f64], costs: Option<&BTreeMap<u64, f64>>) -> Value {
    let types: Vec<Value> = design
        .selections
        .iter()
        .map(|s| {
            let features: Vec<Value> = s
                .features
                .iter()
                .map(|&k| {
                    let id = graph.features().id_of(k);
                    json!({ "id": id, "score": scores[k], "cost": costs.and_then(|c| c.get(&id)) })
                })
                .collect();
            json!({ "type": s.label, "features": features })
        })
        .collect();
    Value::Array(types)
}

/// kNN score, or `None` for an empty design.
fn knn(design: &Design, graph: &Graph, stats: &pnp_core::eval::MovieTargetStats, options: KnnOptions) -> Result<Option<f64>> {
    match knn_design_score(&design.indicator(graph.num_features()), graph.membership(), stats, options) {
        Ok(s) => Ok(Some(s)),
        Err(CoreError::EmptyDesign) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| v.to_string())
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let graph = dataset::load(cfg)?;
    let model = PnpModel::fit(&graph, cfg.params()?)?;
    let target = target_set(cfg, &graph)?;
    let agg = AggregatedScores::from_fast(model.aggregate(&target)?, &target);
    let catalog = graph.catalog();

    let mut costs = None;
    let (design, constraints) = match &cfg.budgets {
        Some(budgets) => {
            let path = cfg.costs.as_ref().ok_or_else(|| CliError::Usage("budget mode needs --costs".into()))?;
            let table: BTreeMap<u64, f64> = tsv::read_costs(path)?.into_iter().collect();
            let constraints = BudgetConstraints { costs: table, budgets: budgets.clone() };
            let design = design_budget(&agg, catalog, &constraints, cfg.knapsack())?;
            costs = Some(constraints.costs);
            let echo = json!({
                "mode": "budget",
                "knapsack": if cfg.greedy { "greedy" } else { "exact" },
                "budgets": budgets,
            });
            (design, echo)
        }
        None => {
            let design = design_cardinality(&agg, catalog, &cfg.caps, cfg.quota)?;
            let echo = json!({ "mode": "cardinality", "caps": cfg.caps.caps, "strict": cfg.quota == QuotaMode::Strict });
            (design, echo)
        }
    };

    // Per-user rows of the targeted users only; each row is independent.
    let rows: Vec<Vec<f64>> = target
        .indices()
        .par_iter()
        .map(|&u| model.user_row(u))
        .collect::<std::result::Result<_, _>>()?;
    let expected = |d: &Design| expected_conversions_rows(rows.iter().map(Vec::as_slice), d);

    ensure_dir(&cfg.out)?;
    let mut t = Table::create(out_file(cfg, "design.tsv"), &["type", "feature_id", "score", "cost"])?;
    for s in &design.selections {
        for &k in &s.features {
            let id = graph.features().id_of(k);
            t.row(&[&s.label, &id, &agg.scores()[k], &cell(costs.as_ref().and_then(|c| c.get(&id).copied()))])?;
        }
    }

    let mut report = Report::new("design", cfg);
    report
        .dataset(&graph.fingerprint())
        .set("target_users", target.len())
        .set("constraints", constraints)
        .set("selections", selections_json(&design, &graph, agg.scores(), costs.as_ref()))
        .set("objective", design.objective)
        .set("expected_conversions", expected(&design))
        .set("linear_estimate", linear_conversions(&agg, &design));
    report.file(t.finish()?);

    if cfg.compare {
        let popular = baseline_popular(&graph, &target, &cfg.caps)?;
        let top = baseline_top(&graph, &target, &cfg.caps)?;
        let stats = movie_target_stats(graph.ratings(), &target)?;
        let plain = KnnOptions { k: cfg.knn_k, weighted: false, include_unrated: cfg.include_unrated };
        let weighted = KnnOptions { weighted: true, ..plain };
        let mut t = Table::create(out_file(cfg, "comparison.tsv"), &["method", "features", "knn", "wknn", "expected_conversions"])?;
        let mut block = Vec::new();
        for (name, d) in [("pnp", &design), ("popular", &popular.design), ("top", &top.design)] {
            let (k, w) = (knn(d, &graph, &stats, plain)?, knn(d, &graph, &stats, weighted)?);
            let conv = expected(d);
            t.row(&[&name, &d.len(), &cell(k), &cell(w), &conv])?;
            let ids: Vec<u64> = d.features().iter().map(|&f| graph.features().id_of(f)).collect();
            block.push(json!({ "method": name, "features": ids, "knn": k, "wknn": w, "expected_conversions": conv }));
        }
        report.set("comparison", block);
        report.file(t.finish()?);
    }

    if cfg.export_preferences {
        let w = model.infer_full(&cfg.infer())?;
        let bin = out_file(cfg, "preferences.bin");
        export::write_binary(&w, &bin)?;
        let tsv_path = out_file(cfg, "preferences.tsv");
        let rows = export::write_tsv(&w, &graph, cfg.export_threshold, &tsv_path)?;
        report.set("exported_scores", rows);
        report.file(bin);
        report.file(tsv_path);
    }
    Ok(report)
}
