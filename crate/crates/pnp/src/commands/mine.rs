use pnp_core::graph::FeatureCatalog;
use pnp_core::itemsets::{independence_test, mine, type_combination_report, MinSupport, TransactionDb, Verdict};
use pnp_core::sparse::CsrMatrix;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::{ensure_dir, out_file};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::Report;
use crate::tsv::Table;
use crate::{bundle, dataset};

fn memberships(cfg: &RunConfig) -> Result<(CsrMatrix, FeatureCatalog)> {
    if let Some(path) = &cfg.bundle {
        let g = bundle::load(path)?;
        return Ok((g.membership().clone(), g.catalog().clone()));
    }
    let path = cfg.membership.as_ref().ok_or_else(|| CliError::Usage("mine needs --membership or --bundle".into()))?;
    let (m, catalog) = dataset::read_membership(path)?;
    Ok((m.matrix, catalog))
}

/// SHA-256 over feature ids, type labels and the membership pattern.
fn membership_hash(m: &CsrMatrix, catalog: &FeatureCatalog) -> [u8; 32] {
    let mut h = Sha256::new();
    for &id in catalog.features().ids() {
        h.update(id.to_le_bytes());
    }
    for k in 0..catalog.len() {
        h.update(catalog.label_of(k).as_bytes());
        h.update([0]);
    }
    for (r, c, _) in m.iter() {
        h.update((r as u64).to_le_bytes());
        h.update((c as u64).to_le_bytes());
    }
    h.finalize().into()
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Independent => "independent",
        Verdict::Dependent => "dependent",
        Verdict::UndefinedLift => "undefined-lift",
    }
}

fn join(xs: impl IntoIterator<Item = impl ToString>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let support = match cfg.min_count {
        Some(c) if c >= 1 => MinSupport::Absolute(c),
        Some(_) => return Err(CliError::Usage("--min-count must be at least 1".into())),
        None if cfg.min_support > 0.0 && cfg.min_support <= 1.0 => MinSupport::Relative(cfg.min_support),
        None => return Err(CliError::Usage(format!("--min-support {} is not in (0, 1]", cfg.min_support))),
    };
    let (membership, catalog) = memberships(cfg)?;
    let db = TransactionDb::from_membership(&membership);
    let result = mine(&db, support)?;
    let id = |k: usize| catalog.features().id_of(k);
    ensure_dir(&cfg.out)?;

    let mut t = Table::create(out_file(cfg, "itemsets.tsv"), &["items", "count", "support"])?;
    let mut written = 0;
    for set in result.itemsets.iter().filter(|s| s.items.len() >= cfg.min_size) {
        t.row(&[&join(set.items.iter().map(|&k| id(k))), &set.count, &set.support])?;
        written += 1;
    }
    let itemsets_path = t.finish()?;

    let tally = type_combination_report(&result.itemsets, &catalog);
    let mut t = Table::create(out_file(cfg, "type_combinations.tsv"), &["types", "count"])?;
    let mut tally_json = Map::new();
    for (types, count) in &tally {
        t.row(&[&join(types), count])?;
        tally_json.insert(join(types), json!(count));
    }
    let tally_path = t.finish()?;

    let mut t = Table::create(
        out_file(cfg, "dependencies.tsv"),
        &["feature_a", "feature_b", "count_a", "count_b", "count_ab", "n", "lift", "verdict"],
    )?;
    let mut dependent = 0;
    let mut pairs = 0;
    for set in result.itemsets.iter().filter(|s| s.items.len() == 2) {
        let v = independence_test(&db, set.items[0], set.items[1], cfg.tolerance)?;
        let lift = v.lift.map_or_else(|| "-".into(), |l| l.to_string());
        t.row(&[&id(v.pair.0), &id(v.pair.1), &v.count_a, &v.count_b, &v.count_ab, &v.n, &lift, &verdict_name(v.verdict)])?;
        pairs += 1;
        dependent += usize::from(v.verdict == Verdict::Dependent);
    }
    let deps_path = t.finish()?;

    let mut report = Report::new("mine", cfg);
    report
        .dataset(&membership_hash(&membership, &catalog))
        .set("transactions", db.len())
        .set("items", db.num_items())
        .set("min_count", result.min_count)
        .set("level_sizes", result.level_sizes.clone())
        .set("itemsets_written", written)
        .set("type_combinations", Value::Object(tally_json))
        .set("pairs_tested", pairs)
        .set("dependent_pairs", dependent);
    report.file(itemsets_path);
    report.file(tally_path);
    report.file(deps_path);
    Ok(report)
}
