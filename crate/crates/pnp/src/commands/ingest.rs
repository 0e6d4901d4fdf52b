use pnp_core::graph::{filter_core, GraphSummary};
use serde_json::{json, Value};

use super::{ensure_dir, out_file};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::Report;
use crate::tsv::Table;
use crate::{bundle, dataset};

fn summary_json(s: &GraphSummary) -> Value {
    json!({
        "movies": s.movies,
        "users": s.users,
        "features": s.features,
        "ratings": s.ratings,
        "memberships": s.memberships,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let (Some(ratings), Some(membership)) = (&cfg.ratings, &cfg.membership) else {
        return Err(CliError::Usage("ingest needs --ratings and --membership".into()));
    };
    let (raw, warnings) = dataset::read_files(ratings, membership, &cfg.ingest())?;
    for w in &warnings {
        log::warn!("{}:{}: duplicate rating for user {} movie {}", ratings.display(), w.line, w.user, w.movie);
    }
    let core = filter_core(&raw, &cfg.thresholds)?;
    let (before, after) = (raw.summary(), core.summary());
    log::info!("filtered {} ratings down to {}", before.ratings, after.ratings);

    ensure_dir(&cfg.out)?;
    let bundle_path = out_file(cfg, "graph.pnpg");
    bundle::save(&core, &bundle_path)?;
    let mut t = Table::create(out_file(cfg, "summary.tsv"), &["stage", "movies", "users", "features", "ratings", "memberships"])?;
    for (stage, s) in [("raw", before), ("filtered", after)] {
        t.row(&[&stage, &s.movies, &s.users, &s.features, &s.ratings, &s.memberships])?;
    }
    let summary_path = t.finish()?;

    let mut report = Report::new("ingest", cfg);
    report
        .dataset(&core.fingerprint())
        .set("duplicate_ratings", warnings.len())
        .set("raw", summary_json(&before))
        .set("filtered", summary_json(&after))
        .set("type_labels", core.catalog().labels().to_vec());
    report.file(bundle_path);
    report.file(summary_path);
    Ok(report)
}
