use alloc::collections::VecDeque;
use alloc::vec;

use super::Graph;
use crate::error::{Error, Result};

/// Minimum degrees every node must keep in the filtered graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterThresholds {
    pub min_users_per_movie: usize,
    pub min_features_per_movie: usize,
    pub min_movies_per_user: usize,
    pub min_movies_per_feature: usize,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        FilterThresholds {
            min_users_per_movie: 20,
            min_features_per_movie: 2,
            min_movies_per_user: 20,
            min_movies_per_feature: 2,
        }
    }
}

impl FilterThresholds {
    pub fn uniform(n: usize) -> Self {
        FilterThresholds {
            min_users_per_movie: n,
            min_features_per_movie: n,
            min_movies_per_user: n,
            min_movies_per_feature: n,
        }
    }
}

#[derive(Clone, Copy)]
enum Node {
    User(usize),
    Movie(usize),
    Feature(usize),
}

/// Peels users, movies and features that fall below their thresholds until
/// nothing changes.
///
/// Every threshold is a lower bound on a degree, so the union of two
/// subgraphs that satisfy them also does. The surviving graph is therefore
/// the unique maximal one and does not depend on removal order.
pub fn filter_core(graph: &Graph, t: &FilterThresholds) -> Result<Graph> {
    let r = graph.ratings();
    let rt = r.transpose();
    let f = graph.membership();
    let ft = f.transpose();
    let (nu, nm, nf) = (graph.num_users(), graph.num_movies(), graph.num_features());

    let mut user_deg: alloc::vec::Vec<usize> = (0..nu).map(|u| r.row_nnz(u)).collect();
    let mut movie_raters: alloc::vec::Vec<usize> = (0..nm).map(|m| rt.row_nnz(m)).collect();
    let mut movie_feats: alloc::vec::Vec<usize> = (0..nm).map(|m| f.row_nnz(m)).collect();
    let mut feat_deg: alloc::vec::Vec<usize> = (0..nf).map(|k| ft.row_nnz(k)).collect();
    let mut user_alive = vec![true; nu];
    let mut movie_alive = vec![true; nm];
    let mut feat_alive = vec![true; nf];

    let mut queue = VecDeque::new();
    for u in 0..nu {
        if user_deg[u] < t.min_movies_per_user {
            user_alive[u] = false;
            queue.push_back(Node::User(u));
        }
    }
    for m in 0..nm {
        if movie_raters[m] < t.min_users_per_movie || movie_feats[m] < t.min_features_per_movie {
            movie_alive[m] = false;
            queue.push_back(Node::Movie(m));
        }
    }
    for k in 0..nf {
        if feat_deg[k] < t.min_movies_per_feature {
            feat_alive[k] = false;
            queue.push_back(Node::Feature(k));
        }
    }

    while let Some(node) = queue.pop_front() {
        match node {
            Node::User(u) => {
                for &m in r.row(u).0 {
                    if movie_alive[m] {
                        movie_raters[m] -= 1;
                        if movie_raters[m] < t.min_users_per_movie {
                            movie_alive[m] = false;
                            queue.push_back(Node::Movie(m));
                        }
                    }
                }
            }
            Node::Feature(k) => {
                for &m in ft.row(k).0 {
                    if movie_alive[m] {
                        movie_feats[m] -= 1;
                        if movie_feats[m] < t.min_features_per_movie {
                            movie_alive[m] = false;
                            queue.push_back(Node::Movie(m));
                        }
                    }
                }
            }
            Node::Movie(m) => {
                for &u in rt.row(m).0 {
                    if user_alive[u] {
                        user_deg[u] -= 1;
                        if user_deg[u] < t.min_movies_per_user {
                            user_alive[u] = false;
                            queue.push_back(Node::User(u));
                        }
                    }
                }
                for &k in f.row(m).0 {
                    if feat_alive[k] {
                        feat_deg[k] -= 1;
                        if feat_deg[k] < t.min_movies_per_feature {
                            feat_alive[k] = false;
                            queue.push_back(Node::Feature(k));
                        }
                    }
                }
            }
        }
    }

    let core = graph.restrict(&user_alive, &movie_alive, &feat_alive);
    if core.num_users() == 0 && core.num_movies() == 0 && core.num_features() == 0 {
        return Err(Error::EmptyCore);
    }
    if core.ratings().nnz() == 0 {
        return Err(Error::EmptyCore);
    }
    Ok(core)
}
