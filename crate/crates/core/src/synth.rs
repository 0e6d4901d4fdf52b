//! Planted-preference generator for benchmarks and end-to-end checks.
//!
//! Non-genre features are split into `groups` preferred sets; genres form a
//! shared pool used by every theme. Every movie has a theme group and draws
//! its features from that group's set (with probability `theme_purity`) or
//! from the genre pool. Within each pool feature frequency is Zipf-skewed, so
//! a few frequent features co-occur in most of a theme's movies.
//!
//! A user of group `g` likes a movie iff it carries a feature from `g`'s
//! preferred set, flipped with probability `noise`. Likes land 1 to 1.5
//! above the user's baseline, dislikes 1 to 1.5 below. Half of each user's
//! ratings go to movies they would like, so the label classes stay balanced.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::graph::{ingest_membership, ingest_ratings, Graph, IngestConfig, MembershipRecord, Rating};

/// Labels and relative shares of the themed feature types.
pub const THEMED_TYPES: [(&str, f64); 4] = [("actor", 0.55), ("director", 0.15), ("producer", 0.15), ("studio", 0.15)];

/// Label of the shared, unthemed feature type.
pub const GENERIC_TYPE: &str = "genre";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub users: usize,
    pub movies: usize,
    pub features: usize,
    pub groups: usize,
    /// Probability of flipping a user's like/dislike, in `[0, 0.5)`.
    pub noise: f64,
    pub ratings_per_user: usize,
    pub features_per_movie: usize,
    /// Chance a movie feature comes from its theme rather than the genre pool.
    pub theme_purity: f64,
    /// Fraction of features that are genres.
    pub genre_fraction: f64,
    /// Exponent of the Zipf-like movie exposure skew; 0 means uniform.
    pub popularity_skew: f64,
    /// Exponent of the Zipf-like skew of feature frequency within each pool.
    pub feature_skew: f64,
    pub min_rating: f64,
    pub max_rating: f64,
    pub step: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            users: 500,
            movies: 300,
            features: 200,
            groups: 5,
            noise: 0.1,
            ratings_per_user: 80,
            features_per_movie: 4,
            theme_purity: 0.6,
            genre_fraction: 0.1,
            popularity_skew: 0.8,
            feature_skew: 1.0,
            min_rating: 1.0,
            max_rating: 5.0,
            step: 0.5,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub ratings: Vec<Rating>,
    pub memberships: Vec<MembershipRecord>,
    /// Latent group of each user, indexed like user ids minus one.
    pub user_groups: Vec<usize>,
    /// Theme group of each movie.
    pub movie_themes: Vec<usize>,
    /// Preferred feature ids per group.
    pub preferred: Vec<Vec<u64>>,
}

impl SyntheticData {
    /// User ids of one latent group.
    pub fn group_users(&self, group: usize) -> Vec<u64> {
        (0..self.user_groups.len()).filter(|&i| self.user_groups[i] == group).map(|i| i as u64 + 1).collect()
    }

    /// Ingests the generated records with the given rating scale.
    pub fn graph(&self, config: &IngestConfig) -> Result<Graph> {
        let (ratings, _) = ingest_ratings(self.ratings.iter().copied(), config)?;
        let (membership, catalog) = ingest_membership(self.memberships.iter().cloned())?;
        Graph::new(ratings, membership, catalog)
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.users == 0 || self.movies == 0 || self.features == 0 || self.groups == 0 {
            return bad("synthetic counts must be at least 1".into());
        }
        if self.ratings_per_user == 0 || self.features_per_movie == 0 {
            return bad("ratings per user and features per movie must be at least 1".into());
        }
        if !(0.0..0.5).contains(&self.noise) {
            return bad(format!("noise {} not in [0, 0.5)", self.noise));
        }
        if !(0.0..=1.0).contains(&self.theme_purity) || !(0.0..1.0).contains(&self.genre_fraction) {
            return bad("theme purity must be in [0, 1] and genre fraction in [0, 1)".into());
        }
        if !(self.popularity_skew >= 0.0 && self.feature_skew >= 0.0) {
            return bad("skew exponents must be nonnegative".into());
        }
        if !(self.min_rating > 0.0 && self.max_rating >= self.min_rating && self.step > 0.0) {
            return bad("rating scale must satisfy 0 < min <= max and step > 0".into());
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<SyntheticData> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let f = self.features;
        let groups = self.groups;

        // Genres take the tail of the id range; the rest are dealt round-robin
        // to groups so each group spans every themed type.
        let generic = (libm::round(f as f64 * self.genre_fraction) as usize).min(f - 1);
        let themed = f - generic;
        let mut preferred: Vec<Vec<usize>> = vec![Vec::new(); groups];
        for k in 0..themed {
            preferred[k % groups].push(k);
        }
        let generic_pool: Vec<usize> = (themed..f).collect();
        let themed_types = type_assignment(themed, &mut rng);

        let movie_themes: Vec<usize> = (0..self.movies).map(|j| j % groups).collect();
        let per_movie = self.features_per_movie.min(f);
        let mut movie_features: Vec<Vec<usize>> = Vec::with_capacity(self.movies);
        for &theme in &movie_themes {
            let own = if preferred[theme].is_empty() { &generic_pool } else { &preferred[theme] };
            let mut chosen: Vec<usize> = Vec::with_capacity(per_movie);
            // Bounded attempts; small universes fall back to whatever is left.
            let mut attempts = 0;
            while chosen.len() < per_movie && attempts < 64 * per_movie {
                attempts += 1;
                let pool = if generic_pool.is_empty() || rng.gen::<f64>() < self.theme_purity { own } else { &generic_pool };
                let k = pool[zipf_index(pool.len(), self.feature_skew, &mut rng)];
                if !chosen.contains(&k) {
                    chosen.push(k);
                }
            }
            if chosen.is_empty() {
                chosen.push(own[0]);
            }
            chosen.sort_unstable();
            movie_features.push(chosen);
        }

        let mut in_group = vec![vec![false; f]; groups];
        for (g, set) in preferred.iter().enumerate() {
            for &k in set {
                in_group[g][k] = true;
            }
        }
        let overlap = |g: usize, j: usize| movie_features[j].iter().filter(|&&k| in_group[g][k]).count();

        // Exposure weights: a random popularity rank per movie.
        let mut rank: Vec<usize> = (0..self.movies).collect();
        rank.shuffle(&mut rng);
        let exposure: Vec<f64> = rank.iter().map(|&r| libm::pow(1.0 + r as f64, -self.popularity_skew)).collect();

        let user_groups: Vec<usize> = (0..self.users).map(|_| rng.gen_range(0..groups)).collect();
        let baselines = [2.5, 3.0, 3.5];
        let mut ratings = Vec::new();
        let per_user = self.ratings_per_user.min(self.movies);
        for (i, &g) in user_groups.iter().enumerate() {
            let base = baselines[rng.gen_range(0..baselines.len())];
            let (liked, other): (Vec<usize>, Vec<usize>) = (0..self.movies).partition(|&j| overlap(g, j) > 0);
            let want_liked = (per_user / 2).max(per_user.saturating_sub(other.len())).min(liked.len());
            let mut picks = weighted_sample(&liked, &exposure, want_liked, &mut rng);
            picks.extend(weighted_sample(&other, &exposure, (per_user - want_liked).min(other.len()), &mut rng));
            picks.sort_unstable();
            for j in picks {
                let mut likes = overlap(g, j) > 0;
                if rng.gen::<f64>() < self.noise {
                    likes = !likes;
                }
                let raw = if likes {
                    base + 1.0 + 0.5 * rng.gen_range(0..2) as f64
                } else {
                    base - 1.0 - 0.5 * rng.gen_range(0..2) as f64
                };
                ratings.push(Rating { user: i as u64 + 1, movie: j as u64 + 1, value: self.quantize(raw) });
            }
        }

        let mut memberships = Vec::new();
        for (j, feats) in movie_features.iter().enumerate() {
            for &k in feats {
                memberships.push(MembershipRecord {
                    movie: j as u64 + 1,
                    feature: k as u64 + 1,
                    label: String::from(if k < themed { THEMED_TYPES[themed_types[k]].0 } else { GENERIC_TYPE }),
                });
            }
        }
        let preferred = preferred.into_iter().map(|s| s.into_iter().map(|k| k as u64 + 1).collect()).collect();
        Ok(SyntheticData { ratings, memberships, user_groups, movie_themes, preferred })
    }

    fn quantize(&self, raw: f64) -> f64 {
        let steps = libm::round((raw - self.min_rating) / self.step);
        (self.min_rating + steps * self.step).clamp(self.min_rating, self.max_rating)
    }
}

/// Ratings per user and features per movie in [`scaling_instance`].
const SCALING_RATINGS_PER_USER: usize = 10;
const SCALING_FEATURES_PER_MOVIE: usize = 4;

/// Random `(ratings, membership)` pair with exactly `nnz` ratings (rounded up
/// to a multiple of 10). Users and movies number `nnz / 10` and features
/// `nnz / 100` (at least 4 each), so a sparse pass costs time linear in `nnz`.
pub fn scaling_instance(nnz: usize, seed: u64) -> Result<(CsrMatrix, CsrMatrix)> {
    if nnz == 0 {
        return Err(Error::InvalidParameter("nnz must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = nnz.div_ceil(SCALING_RATINGS_PER_USER).max(4);
    let movies = users.max(SCALING_RATINGS_PER_USER);
    let features = (nnz / 100).max(4);
    let per_user = SCALING_RATINGS_PER_USER.min(movies);
    let mut ratings = Vec::with_capacity(users * per_user);
    for u in 0..users {
        for m in rand::seq::index::sample(&mut rng, movies, per_user) {
            ratings.push((u, m, rng.gen_range(2..=10) as f64 * 0.5));
        }
    }
    let per_movie = SCALING_FEATURES_PER_MOVIE.min(features);
    let mut membership = Vec::with_capacity(movies * per_movie);
    for m in 0..movies {
        for k in rand::seq::index::sample(&mut rng, features, per_movie) {
            membership.push((m, k, 1.0));
        }
    }
    Ok((
        CsrMatrix::from_triplets(users, movies, ratings)?,
        CsrMatrix::from_triplets(movies, features, membership)?,
    ))
}

/// Themed type index per feature, with type counts proportional to the
/// shares (largest remainder) and positions shuffled.
fn type_assignment(f: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut counts: Vec<usize> = THEMED_TYPES.iter().map(|(_, s)| (s * f as f64) as usize).collect();
    let mut order: Vec<usize> = (0..THEMED_TYPES.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = THEMED_TYPES[a].1 * f as f64 - counts[a] as f64;
        let rb = THEMED_TYPES[b].1 * f as f64 - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = f - counts.iter().sum::<usize>();
    for &t in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[t] += 1;
        left -= 1;
    }
    let mut types: Vec<usize> = counts.iter().enumerate().flat_map(|(t, &c)| core::iter::repeat_n(t, c)).collect();
    types.shuffle(rng);
    types
}

/// Index in `0..n` drawn with probability proportional to `(i + 1)^-s`.
fn zipf_index(n: usize, s: f64, rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = (0..n).map(|i| libm::pow(1.0 + i as f64, -s)).sum();
    let mut u = rng.gen::<f64>() * total;
    for i in 0..n {
        u -= libm::pow(1.0 + i as f64, -s);
        if u < 0.0 {
            return i;
        }
    }
    n - 1
}

/// Weighted sampling without replacement (exponential keys).
fn weighted_sample(items: &[usize], weight: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = items
        .iter()
        .map(|&j| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            (-libm::log(u) / weight[j], j)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().take(n).map(|(_, j)| j).collect()
}
