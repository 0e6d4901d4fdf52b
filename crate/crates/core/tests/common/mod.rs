//! Random instances and brute-force reference implementations shared by the
//! integration tests. Nothing here calls into the library's numerics.
#![allow(dead_code, clippy::needless_range_loop)]

use pnp_core::graph::{FeatureCatalog, Graph};
use pnp_core::sparse::CsrMatrix;
use pnp_core::IdMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A tripartite instance in plain triplet form, indices from 0.
#[derive(Debug, Clone)]
pub struct Instance {
    pub users: usize,
    pub movies: usize,
    pub features: usize,
    pub ratings: Vec<(usize, usize, f64)>,
    pub membership: Vec<(usize, usize)>,
    pub types: Vec<usize>,
    pub labels: Vec<String>,
}

pub struct InstanceShape {
    pub max_users: usize,
    pub max_movies: usize,
    pub max_features: usize,
    pub rating_density: f64,
    pub membership_density: f64,
    /// Every movie gets a feature, every feature a movie, every user a rating.
    pub dangling_free: bool,
}

impl InstanceShape {
    pub fn up_to(n: usize) -> Self {
        InstanceShape {
            max_users: n,
            max_movies: n,
            max_features: n,
            rating_density: 0.4,
            membership_density: 0.3,
            dangling_free: false,
        }
    }
}

pub fn half_star(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(2..=10) as f64 * 0.5
}

pub fn random_instance(rng: &mut ChaCha8Rng, shape: &InstanceShape) -> Instance {
    let users = rng.gen_range(1..=shape.max_users);
    let movies = rng.gen_range(1..=shape.max_movies);
    let features = rng.gen_range(1..=shape.max_features);
    let mut ratings = Vec::new();
    for u in 0..users {
        for m in 0..movies {
            if rng.gen::<f64>() < shape.rating_density {
                ratings.push((u, m, half_star(rng)));
            }
        }
    }
    let mut membership = Vec::new();
    for m in 0..movies {
        for k in 0..features {
            if rng.gen::<f64>() < shape.membership_density {
                membership.push((m, k));
            }
        }
    }
    if shape.dangling_free {
        for u in 0..users {
            if !ratings.iter().any(|r| r.0 == u) {
                ratings.push((u, rng.gen_range(0..movies), half_star(rng)));
            }
        }
        for m in 0..movies {
            if !membership.iter().any(|e| e.0 == m) {
                membership.push((m, rng.gen_range(0..features)));
            }
        }
        for k in 0..features {
            if !membership.iter().any(|e| e.1 == k) {
                membership.push((rng.gen_range(0..movies), k));
            }
        }
    }
    ratings.sort_by_key(|r| (r.0, r.1));
    membership.sort_unstable();
    membership.dedup();
    let ntypes = rng.gen_range(1..=3.min(features));
    let types = (0..features).map(|_| rng.gen_range(0..ntypes)).collect::<Vec<_>>();
    let labels = (0..ntypes).map(|t| format!("type{t}")).collect();
    Instance { users, movies, features, ratings, membership, types, labels }
}

impl Instance {
    pub fn ratings_matrix(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.users, self.movies, self.ratings.clone()).unwrap()
    }

    pub fn membership_matrix(&self) -> CsrMatrix {
        let t = self.membership.iter().map(|&(m, k)| (m, k, 1.0)).collect();
        CsrMatrix::from_triplets(self.movies, self.features, t).unwrap()
    }

    pub fn graph(&self) -> Graph {
        let ids = |n: usize| IdMap::from_unsorted((1..=n as u64).collect());
        let catalog = FeatureCatalog::new(ids(self.features), self.types.clone(), self.labels.clone()).unwrap();
        Graph::from_parts(ids(self.users), ids(self.movies), self.ratings_matrix(), self.membership_matrix(), catalog)
            .unwrap()
    }

    pub fn user_mean(&self, u: usize) -> Option<f64> {
        let rs: Vec<f64> = self.ratings.iter().filter(|r| r.0 == u).map(|r| r.2).collect();
        if rs.is_empty() {
            None
        } else {
            Some(rs.iter().sum::<f64>() / rs.len() as f64)
        }
    }

    /// Dense signed edge weights: `(positive, negative)`, each users x movies.
    pub fn signed_weights(&self, delta: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut pos = vec![vec![0.0; self.movies]; self.users];
        let mut neg = vec![vec![0.0; self.movies]; self.users];
        for &(u, m, r) in &self.ratings {
            let mean = self.user_mean(u).unwrap();
            let w = 2f64.powf(delta * (r - mean).abs());
            if r >= mean {
                pos[u][m] = w;
            } else {
                neg[u][m] = w;
            }
        }
        (pos, neg)
    }

    pub fn dense_membership(&self) -> Vec<Vec<f64>> {
        let mut f = vec![vec![0.0; self.features]; self.movies];
        for &(m, k) in &self.membership {
            f[m][k] = 1.0;
        }
        f
    }
}

/// Transition probability from `a` to `b` in a dense weight matrix.
fn prob(w: &[Vec<f64>], a: usize, b: usize) -> f64 {
    let total: f64 = w[a].iter().sum();
    if total == 0.0 {
        0.0
    } else {
        w[a][b] / total
    }
}

fn transpose(w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if w.is_empty() {
        return Vec::new();
    }
    (0..w[0].len()).map(|c| w.iter().map(|row| row[c]).collect()).collect()
}

/// Arrival probabilities from every user to every feature, summed over every
/// explicit node sequence of the given shape. `shape` is 0 for
/// user-movie-feature, 1 for user-movie-user-movie-feature and 2 for
/// user-movie-feature-movie-feature.
pub fn enumerate_paths(um: &[Vec<f64>], mf: &[Vec<f64>], shape: usize) -> Vec<Vec<f64>> {
    let (users, movies) = (um.len(), mf.len());
    let features = mf.first().map_or(0, |r| r.len());
    let mu = transpose(um);
    let fm = transpose(mf);
    let mut out = vec![vec![0.0; features]; users];
    for i in 0..users {
        for j in 0..movies {
            let p1 = prob(um, i, j);
            if p1 == 0.0 {
                continue;
            }
            match shape {
                0 => {
                    for k in 0..features {
                        out[i][k] += p1 * prob(mf, j, k);
                    }
                }
                1 => {
                    for v in 0..users {
                        let p2 = p1 * prob(&mu, j, v);
                        for j2 in 0..movies {
                            let p3 = p2 * prob(um, v, j2);
                            for k in 0..features {
                                out[i][k] += p3 * prob(mf, j2, k);
                            }
                        }
                    }
                }
                _ => {
                    for k1 in 0..features {
                        let p2 = p1 * prob(mf, j, k1);
                        for j2 in 0..movies {
                            let p3 = p2 * prob(&fm, k1, j2);
                            for k in 0..features {
                                out[i][k] += p3 * prob(mf, j2, k);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Naive peeler: rescans every node until a full pass removes nothing.
/// Returns alive masks for users, movies and features.
pub fn naive_peel(inst: &Instance, t: &pnp_core::graph::FilterThresholds) -> (Vec<bool>, Vec<bool>, Vec<bool>) {
    let mut users = vec![true; inst.users];
    let mut movies = vec![true; inst.movies];
    let mut feats = vec![true; inst.features];
    loop {
        let mut changed = false;
        for u in 0..inst.users {
            let deg = inst.ratings.iter().filter(|r| r.0 == u && movies[r.1]).count();
            if users[u] && deg < t.min_movies_per_user {
                users[u] = false;
                changed = true;
            }
        }
        for m in 0..inst.movies {
            let raters = inst.ratings.iter().filter(|r| r.1 == m && users[r.0]).count();
            let fs = inst.membership.iter().filter(|e| e.0 == m && feats[e.1]).count();
            if movies[m] && (raters < t.min_users_per_movie || fs < t.min_features_per_movie) {
                movies[m] = false;
                changed = true;
            }
        }
        for k in 0..inst.features {
            let deg = inst.membership.iter().filter(|e| e.1 == k && movies[e.0]).count();
            if feats[k] && deg < t.min_movies_per_feature {
                feats[k] = false;
                changed = true;
            }
        }
        if !changed {
            return (users, movies, feats);
        }
    }
}

/// O(n^2) AUC: share of (positive, negative) pairs ordered correctly, ties 1/2.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let (mut num, mut pairs) = (0.0, 0usize);
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    (pairs > 0).then(|| num / pairs as f64)
}

/// Every subset of `0..n` as a bitmask, counted per transaction.
pub fn brute_force_itemsets(transactions: &[Vec<usize>], n: usize, min_count: usize) -> Vec<(Vec<usize>, usize)> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let items: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let count = transactions.iter().filter(|t| items.iter().all(|i| t.contains(i))).count();
        if count >= min_count {
            out.push((items, count));
        }
    }
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(&b.0)));
    out
}

/// Sum of `scores` over the set bits of `mask`, in ascending index.
pub fn masked_sum(scores: &[f64], mask: u32) -> f64 {
    (0..scores.len()).filter(|i| mask >> i & 1 == 1).map(|i| scores[i]).sum()
}

/// Max of `sum scores` over subsets satisfying `ok`.
pub fn brute_force_best(scores: &[f64], ok: impl Fn(u32) -> bool) -> f64 {
    (0u32..1 << scores.len()).filter(|&m| ok(m)).map(|m| masked_sum(scores, m)).fold(f64::NEG_INFINITY, f64::max)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
