use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{FeatureCatalog, MembershipMatrix, RatingsMatrix};
use crate::error::{Error, Result};
use crate::ids::IdMap;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: u64,
    pub movie: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipRecord {
    pub movie: u64,
    pub feature: u64,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    #[default]
    KeepLast,
    KeepFirst,
    Reject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub min_rating: f64,
    pub max_rating: f64,
    /// Ratings must sit on `min_rating + n * step` when set.
    pub step: Option<f64>,
    pub duplicates: DuplicatePolicy,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig { min_rating: 1.0, max_rating: 5.0, step: Some(0.5), duplicates: DuplicatePolicy::KeepLast }
    }
}

impl IngestConfig {
    fn validate(&self) -> Result<()> {
        if self.min_rating.is_nan() || self.min_rating <= 0.0 || self.max_rating.is_nan() || self.max_rating < self.min_rating {
            return Err(Error::InvalidParameter(format!(
                "rating range [{}, {}] must be positive and ordered",
                self.min_rating, self.max_rating
            )));
        }
        if let Some(step) = self.step {
            if step.is_nan() || step <= 0.0 {
                return Err(Error::InvalidParameter(format!("rating step {step} must be positive")));
            }
        }
        Ok(())
    }

    fn check(&self, line: usize, r: &Rating) -> Result<()> {
        let v = r.value;
        if !(v >= self.min_rating && v <= self.max_rating) {
            return Err(Error::Record {
                line,
                message: format!("rating {v} outside [{}, {}]", self.min_rating, self.max_rating),
            });
        }
        if let Some(step) = self.step {
            let k = (v - self.min_rating) / step;
            if libm::fabs(k - libm::round(k)) > 1e-9 {
                return Err(Error::Record { line, message: format!("rating {v} is not a multiple of step {step}") });
            }
        }
        Ok(())
    }
}

/// A (user, movie) pair that appeared more than once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestWarning {
    pub line: usize,
    pub user: u64,
    pub movie: u64,
}

/// Builds the rating matrix from a finite record stream. Records are numbered
/// from 1 in stream order for error reporting.
pub fn ingest_ratings(
    records: impl IntoIterator<Item = Rating>,
    config: &IngestConfig,
) -> Result<(RatingsMatrix, Vec<IngestWarning>)> {
    ingest_ratings_numbered(records.into_iter().enumerate().map(|(n, r)| (n + 1, r)), config)
}

/// Same as [`ingest_ratings`], with caller-provided line numbers.
pub fn ingest_ratings_numbered(
    records: impl IntoIterator<Item = (usize, Rating)>,
    config: &IngestConfig,
) -> Result<(RatingsMatrix, Vec<IngestWarning>)> {
    config.validate()?;
    let mut cells: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (line, r) in records {
        config.check(line, &r)?;
        match cells.get_mut(&(r.user, r.movie)) {
            None => {
                cells.insert((r.user, r.movie), r.value);
            }
            Some(slot) => {
                match config.duplicates {
                    DuplicatePolicy::KeepLast => *slot = r.value,
                    DuplicatePolicy::KeepFirst => {}
                    DuplicatePolicy::Reject => {
                        return Err(Error::Record {
                            line,
                            message: format!("duplicate rating for user {} movie {}", r.user, r.movie),
                        })
                    }
                }
                warnings.push(IngestWarning { line, user: r.user, movie: r.movie });
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyInput("rating stream"));
    }
    let users = IdMap::from_unsorted(cells.keys().map(|k| k.0).collect());
    let movies = IdMap::from_unsorted(cells.keys().map(|k| k.1).collect());
    let triplets = cells
        .into_iter()
        .map(|((u, m), v)| (users.index_of(u).unwrap(), movies.index_of(m).unwrap(), v))
        .collect();
    let matrix = CsrMatrix::from_triplets(users.len(), movies.len(), triplets)?;
    Ok((RatingsMatrix { users, movies, matrix }, warnings))
}

/// Builds the binary membership matrix and the type catalog. A feature that
/// shows up with two different labels is a record error; repeated
/// (movie, feature) pairs are collapsed.
pub fn ingest_membership(
    records: impl IntoIterator<Item = MembershipRecord>,
) -> Result<(MembershipMatrix, FeatureCatalog)> {
    let mut label_of: BTreeMap<u64, String> = BTreeMap::new();
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    for (n, rec) in records.into_iter().enumerate() {
        let line = n + 1;
        if rec.label.is_empty() {
            return Err(Error::Record { line, message: "empty feature type label".into() });
        }
        match label_of.get(&rec.feature) {
            Some(existing) if *existing != rec.label => {
                return Err(Error::Record {
                    line,
                    message: format!(
                        "feature {} has type '{}' but was earlier typed '{}'",
                        rec.feature, rec.label, existing
                    ),
                })
            }
            Some(_) => {}
            None => {
                label_of.insert(rec.feature, rec.label);
            }
        }
        pairs.push((rec.movie, rec.feature));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyInput("membership stream"));
    }
    let movies = IdMap::from_unsorted(pairs.iter().map(|p| p.0).collect());
    let features = IdMap::from_unsorted(label_of.keys().copied().collect());
    let mut labels: Vec<String> = label_of.values().cloned().collect();
    labels.sort();
    labels.dedup();
    let type_of = label_of.values().map(|l| labels.binary_search(l).unwrap()).collect();
    let triplets: Vec<(usize, usize, f64)> = pairs
        .into_iter()
        .map(|(m, k)| (movies.index_of(m).unwrap(), features.index_of(k).unwrap(), 1.0))
        .collect();
    let mut matrix = CsrMatrix::from_triplets(movies.len(), features.len(), triplets)?;
    matrix = matrix.map_values(|_, _, _| 1.0);
    let catalog = FeatureCatalog::new(features.clone(), type_of, labels)?;
    Ok((MembershipMatrix { movies, features, matrix }, catalog))
}
