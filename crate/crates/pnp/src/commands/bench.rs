use std::hint::black_box;
use std::time::Instant;

use pnp_core::synth::scaling_instance;
use pnp_core::walks::{aggregate_fast, build_operators, infer_full, Provenance, TargetSet};
use pnp_core::IdMap;
use serde_json::json;

use super::{ensure_dir, out_file};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::Report;
use crate::tsv::Table;

/// Fastest of `repeats` runs, in seconds, with the last result.
fn best_of<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        let out = black_box(f()?);
        best = best.min(t.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((best, last.unwrap()))
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx)
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let seed = cfg.require_seed()?;
    if cfg.nnz_grid.is_empty() {
        return Err(CliError::Usage("nnz grid is empty".into()));
    }
    let params = cfg.params()?;
    let provenance = Provenance { weights: params.weights, delta: params.delta, dataset_hash: [0; 32] };
    ensure_dir(&cfg.out)?;
    let mut t = Table::create(out_file(cfg, "bench.tsv"), &["nnz", "method", "seconds", "peak_bytes"])?;
    let mut fast_points = Vec::new();
    let mut worst_rel = 0.0f64;
    let mut rows = Vec::new();
    for &nnz in &cfg.nnz_grid {
        let (ratings, membership) = scaling_instance(nnz, seed)?;
        let (u, m, f) = (ratings.rows(), ratings.cols(), membership.cols());
        let users = IdMap::from_unsorted((0..u as u64).collect());
        let target = TargetSet::all(&users)?;
        // CSR storage of the four user-movie and two movie-feature operators.
        let operators = 16 * 2 * (ratings.nnz() + membership.nnz()) + 8 * (4 * (u + m) + 2 * (m + f));

        let (fast_s, fast) = best_of(cfg.repeats, || {
            let ops = build_operators(&ratings, &membership, params.delta, params.tie)?;
            Ok(aggregate_fast(&ops, &target, params.weights)?)
        })?;
        let fast_bytes = operators + 8 * 9 * (u + m + f);
        t.row(&[&ratings.nnz(), &"fast", &fast_s, &fast_bytes])?;
        rows.push(json!({ "nnz": ratings.nnz(), "method": "fast", "seconds": fast_s, "peak_bytes": fast_bytes }));
        fast_points.push((ratings.nnz() as f64, fast_s));

        if nnz <= cfg.naive_max_nnz {
            let (naive_s, sums) = best_of(cfg.repeats, || {
                let ops = build_operators(&ratings, &membership, params.delta, params.tie)?;
                let w = infer_full(&ops, params.weights, provenance, &cfg.infer())?;
                Ok(w.sum_rows(&target)?)
            })?;
            let naive_bytes = fast_bytes + 8 * u * f;
            t.row(&[&ratings.nnz(), &"naive", &naive_s, &naive_bytes])?;
            rows.push(json!({ "nnz": ratings.nnz(), "method": "naive", "seconds": naive_s, "peak_bytes": naive_bytes }));
            for (a, b) in sums.iter().zip(&fast.combined) {
                worst_rel = worst_rel.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
            }
        }
    }
    let mut report = Report::new("bench", cfg);
    report
        .set("dataset_hash", format!("synthetic scaling instances, seed {seed}"))
        .set("timings", rows)
        .set("fast_log_log_slope", log_log_slope(&fast_points))
        .set("max_relative_difference", worst_rel);
    report.file(t.finish()?);
    Ok(report)
}
