use pnp_core::synth::SyntheticSpec;

use super::{ensure_dir, out_file};
use crate::config::RunConfig;
use crate::error::Result;
use crate::report::Report;
use crate::tsv::Table;

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let spec = SyntheticSpec {
        seed: cfg.require_seed()?,
        min_rating: cfg.min_rating,
        max_rating: cfg.max_rating,
        step: cfg.rating_step.unwrap_or(cfg.synth.step),
        ..cfg.synth.clone()
    };
    let data = spec.generate()?;
    ensure_dir(&cfg.out)?;

    let mut ratings = Table::headerless(out_file(cfg, "ratings.tsv"))?;
    for r in &data.ratings {
        ratings.row(&[&r.user, &r.movie, &r.value])?;
    }
    let mut membership = Table::headerless(out_file(cfg, "membership.tsv"))?;
    for m in &data.memberships {
        membership.row(&[&m.movie, &m.feature, &m.label])?;
    }
    let mut groups = Table::create(out_file(cfg, "groups.tsv"), &["user_id", "group"])?;
    for (i, g) in data.user_groups.iter().enumerate() {
        groups.row(&[&(i + 1), g])?;
    }

    let mut report = Report::new("synth", cfg);
    report
        .dataset(&data.graph(&cfg.ingest())?.fingerprint())
        .set("ratings", data.ratings.len())
        .set("memberships", data.memberships.len())
        .set("users", spec.users)
        .set("movies", spec.movies)
        .set("features", spec.features)
        .set("groups", spec.groups);
    report.file(ratings.finish()?);
    report.file(membership.finish()?);
    report.file(groups.finish()?);
    Ok(report)
}
