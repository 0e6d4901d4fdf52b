//! Getting a graph from ingest files or a bundle.

use std::path::Path;

use pnp_core::graph::{
    ingest_membership, ingest_ratings_numbered, FeatureCatalog, Graph, IngestConfig, IngestWarning, MembershipMatrix,
    MembershipRecord,
};
use pnp_core::Error as CoreError;

use crate::bundle;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::tsv;

/// Tags a core error with its file, mapping stream positions to file lines.
fn at<'a>(path: &'a Path, lines: Option<&'a [usize]>) -> impl Fn(CoreError) -> CliError + 'a {
    move |e| {
        let source = match (e, lines) {
            // Record numbers from the core are positions in the stream.
            (CoreError::Record { line, message }, Some(lines)) => {
                CoreError::Record { line: lines.get(line - 1).copied().unwrap_or(line), message }
            }
            (e, _) => e,
        };
        CliError::Input { path: path.to_path_buf(), source }
    }
}

pub fn read_files(ratings: &Path, membership: &Path, config: &IngestConfig) -> Result<(Graph, Vec<IngestWarning>)> {
    let records = tsv::read_ratings(ratings)?;
    let (r, warnings) = ingest_ratings_numbered(records, config).map_err(at(ratings, None))?;
    let (m, catalog) = read_membership(membership)?;
    Ok((Graph::new(r, m, catalog)?, warnings))
}

pub fn read_membership(path: &Path) -> Result<(MembershipMatrix, FeatureCatalog)> {
    let (lines, records): (Vec<usize>, Vec<MembershipRecord>) = tsv::read_membership(path)?.into_iter().unzip();
    ingest_membership(records).map_err(at(path, Some(&lines)))
}

/// The bundle if one is configured, otherwise the raw ingest files.
pub fn load(config: &RunConfig) -> Result<Graph> {
    if let Some(path) = &config.bundle {
        log::info!("loading bundle {}", path.display());
        return bundle::load(path);
    }
    let (Some(r), Some(m)) = (&config.ratings, &config.membership) else {
        return Err(CliError::Usage("need --bundle, or both --ratings and --membership".into()));
    };
    let (graph, warnings) = read_files(r, m, &config.ingest())?;
    for w in &warnings {
        log::warn!("{}:{}: duplicate rating for user {} movie {}", r.display(), w.line, w.user, w.movie);
    }
    Ok(graph)
}
