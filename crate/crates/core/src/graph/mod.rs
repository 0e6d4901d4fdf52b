//! The user-movie-feature graph: ingestion, alignment, core filtering and the
//! positive/negative split of the rating edges.

mod filter;
mod ingest;
mod split;

pub use filter::{filter_core, FilterThresholds};
pub use ingest::{
    ingest_membership, ingest_ratings, ingest_ratings_numbered, DuplicatePolicy, IngestConfig,
    IngestWarning, MembershipRecord, Rating,
};
pub use split::{split_and_reweigh, user_means, SignedSplit, TiePolicy, UserStats};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ids::IdMap;
use crate::sparse::CsrMatrix;

/// Sparse user x movie rating matrix with its external id maps.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    pub users: IdMap,
    pub movies: IdMap,
    pub matrix: CsrMatrix,
}

/// Binary movie x feature membership matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    pub movies: IdMap,
    pub features: IdMap,
    pub matrix: CsrMatrix,
}

/// Assigns every feature exactly one type label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureCatalog {
    features: IdMap,
    type_of: Vec<usize>,
    labels: Vec<String>,
}

impl FeatureCatalog {
    /// `type_of[k]` indexes into `labels`; labels must be non-empty and unique.
    pub fn new(features: IdMap, type_of: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if type_of.len() != features.len() {
            return Err(Error::DimensionMismatch {
                what: "feature types",
                expected: features.len(),
                found: type_of.len(),
            });
        }
        if labels.iter().any(|l| l.is_empty()) {
            return Err(Error::InvalidParameter("empty feature type label".into()));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::InvalidParameter("duplicate feature type label".into()));
        }
        if type_of.iter().any(|&t| t >= labels.len()) {
            return Err(Error::InvalidParameter("feature type index out of range".into()));
        }
        Ok(FeatureCatalog { features, type_of, labels })
    }

    pub fn features(&self) -> &IdMap {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn type_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn type_of(&self, feature: usize) -> usize {
        self.type_of[feature]
    }

    pub fn label_of(&self, feature: usize) -> &str {
        &self.labels[self.type_of[feature]]
    }

    /// Internal feature indices of one type, ascending.
    pub fn features_of_type(&self, ty: usize) -> Vec<usize> {
        (0..self.type_of.len()).filter(|&k| self.type_of[k] == ty).collect()
    }

    /// Features grouped by type index.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.labels.len()];
        for (k, &t) in self.type_of.iter().enumerate() {
            groups[t].push(k);
        }
        groups
    }

    fn retain(&self, keep: &[bool]) -> (FeatureCatalog, Vec<Option<usize>>) {
        let (features, remap) = self.features.retain(keep);
        let type_of = self
            .type_of
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(&t, _)| t)
            .collect();
        (FeatureCatalog { features, type_of, labels: self.labels.clone() }, remap)
    }
}

/// The aligned tripartite graph. Users, movies and features carry dense
/// indices; the ratings matrix is users x movies and the membership matrix is
/// movies x features over the same movie index space.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    users: IdMap,
    movies: IdMap,
    ratings: CsrMatrix,
    membership: CsrMatrix,
    catalog: FeatureCatalog,
}

impl Graph {
    /// Aligns ratings and memberships on the union of their movie ids.
    pub fn new(ratings: RatingsMatrix, membership: MembershipMatrix, catalog: FeatureCatalog) -> Result<Self> {
        if membership.features != *catalog.features() {
            return Err(Error::InvalidParameter(
                "membership columns do not match the feature catalog".into(),
            ));
        }
        let mut all = ratings.movies.ids().to_vec();
        all.extend_from_slice(membership.movies.ids());
        let movies = IdMap::from_unsorted(all);
        let r_map: Vec<usize> = ratings.movies.ids().iter().map(|&id| movies.index_of(id).unwrap()).collect();
        let f_map: Vec<usize> = membership.movies.ids().iter().map(|&id| movies.index_of(id).unwrap()).collect();
        let r = CsrMatrix::from_triplets(
            ratings.users.len(),
            movies.len(),
            ratings.matrix.iter().map(|(u, m, v)| (u, r_map[m], v)).collect(),
        )?;
        let f = CsrMatrix::from_triplets(
            movies.len(),
            catalog.len(),
            membership.matrix.iter().map(|(m, k, v)| (f_map[m], k, v)).collect(),
        )?;
        Self::from_parts(ratings.users, movies, r, f, catalog)
    }

    /// Assembles a graph from already aligned parts.
    pub fn from_parts(
        users: IdMap,
        movies: IdMap,
        ratings: CsrMatrix,
        membership: CsrMatrix,
        catalog: FeatureCatalog,
    ) -> Result<Self> {
        let check = |what, expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { what, expected, found })
            }
        };
        check("rating rows", users.len(), ratings.rows())?;
        check("rating columns", movies.len(), ratings.cols())?;
        check("membership rows", movies.len(), membership.rows())?;
        check("membership columns", catalog.len(), membership.cols())?;
        if membership.values().iter().any(|&v| v != 1.0) {
            return Err(Error::InvalidParameter("membership entries must be 0 or 1".into()));
        }
        if ratings.values().iter().any(|&v| v <= 0.0 || v.is_nan()) {
            return Err(Error::InvalidParameter("stored ratings must be positive".into()));
        }
        Ok(Graph { users, movies, ratings, membership, catalog })
    }

    pub fn users(&self) -> &IdMap {
        &self.users
    }

    pub fn movies(&self) -> &IdMap {
        &self.movies
    }

    pub fn features(&self) -> &IdMap {
        self.catalog.features()
    }

    pub fn catalog(&self) -> &FeatureCatalog {
        &self.catalog
    }

    /// users x movies.
    pub fn ratings(&self) -> &CsrMatrix {
        &self.ratings
    }

    /// movies x features, entries are exactly 1.
    pub fn membership(&self) -> &CsrMatrix {
        &self.membership
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_movies(&self) -> usize {
        self.movies.len()
    }

    pub fn num_features(&self) -> usize {
        self.catalog.len()
    }

    pub fn summary(&self) -> GraphSummary {
        GraphSummary {
            users: self.num_users(),
            movies: self.num_movies(),
            features: self.num_features(),
            ratings: self.ratings.nnz(),
            memberships: self.membership.nnz(),
        }
    }

    /// Same graph with a different ratings matrix (same users and movies).
    pub fn with_ratings(&self, ratings: CsrMatrix) -> Result<Graph> {
        Self::from_parts(
            self.users.clone(),
            self.movies.clone(),
            ratings,
            self.membership.clone(),
            self.catalog.clone(),
        )
    }

    /// Keeps the flagged users, movies and features, reindexing densely.
    pub fn restrict(&self, users: &[bool], movies: &[bool], features: &[bool]) -> Graph {
        let (user_ids, u_map) = self.users.retain(users);
        let (movie_ids, m_map) = self.movies.retain(movies);
        let (catalog, f_map) = self.catalog.retain(features);
        Graph {
            users: user_ids,
            movies: movie_ids,
            ratings: self.ratings.submatrix(&u_map, &m_map),
            membership: self.membership.submatrix(&m_map, &f_map),
            catalog,
        }
    }

    /// SHA-256 over a canonical encoding of ids, matrices and type labels.
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        let mut put = |x: u64| h.update(x.to_le_bytes());
        for map in [&self.users, &self.movies, self.catalog.features()] {
            put(map.len() as u64);
            map.ids().iter().for_each(|&id| put(id));
        }
        for m in [&self.ratings, &self.membership] {
            put(m.nnz() as u64);
            for (r, c, v) in m.iter() {
                put(r as u64);
                put(c as u64);
                put(v.to_bits());
            }
        }
        self.catalog.type_of.iter().for_each(|&t| put(t as u64));
        for label in &self.catalog.labels {
            h.update((label.len() as u64).to_le_bytes());
            h.update(label.as_bytes());
        }
        let digest = h.finalize();
        let mut out = [0u8; 32];
        out.copy_from_slice(&digest);
        out
    }
}

/// Entity and edge counts of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphSummary {
    pub users: usize,
    pub movies: usize,
    pub features: usize,
    pub ratings: usize,
    pub memberships: usize,
}
