mod common;

use common::*;
use pnp_core::graph::{filter_core, FilterThresholds};
use pnp_core::Error;
use rand::Rng;

fn thresholds(rng: &mut rand_chacha::ChaCha8Rng) -> FilterThresholds {
    FilterThresholds {
        min_users_per_movie: rng.gen_range(0..=3),
        min_features_per_movie: rng.gen_range(0..=3),
        min_movies_per_user: rng.gen_range(0..=3),
        min_movies_per_feature: rng.gen_range(0..=3),
    }
}

#[test]
fn peeling_matches_repeated_scans_and_is_idempotent() {
    let mut rng = rng(41);
    for _ in 0..50 {
        let shape = InstanceShape { rating_density: 0.5, membership_density: 0.4, ..InstanceShape::up_to(15) };
        let inst = random_instance(&mut rng, &shape);
        let t = thresholds(&mut rng);
        let (users, movies, feats) = naive_peel(&inst, &t);
        let expected = inst.graph().restrict(&users, &movies, &feats);
        match filter_core(&inst.graph(), &t) {
            Ok(core) => {
                assert_eq!(core, expected);
                assert_eq!(filter_core(&core, &t).unwrap(), core);
            }
            Err(Error::EmptyCore) => assert_eq!(expected.ratings().nnz(), 0),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn hand_built_fixture_core() {
    let inst = Instance {
        users: 4,
        movies: 4,
        features: 3,
        ratings: vec![(0, 0, 4.0), (0, 1, 3.0), (1, 0, 2.0), (1, 1, 5.0), (2, 1, 4.0), (2, 3, 1.0), (3, 2, 3.0)],
        membership: vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 2), (3, 2)],
        types: vec![0, 0, 0],
        labels: vec!["actor".into()],
    };
    let core = filter_core(&inst.graph(), &FilterThresholds::uniform(2)).unwrap();
    let s = core.summary();
    assert_eq!((s.users, s.movies, s.features, s.ratings, s.memberships), (2, 2, 2, 4, 4));
    assert_eq!(core.users().ids(), &[1, 2]);
    assert_eq!(core.features().ids(), &[1, 2]);
}

#[test]
fn zero_thresholds_keep_everything() {
    let mut rng = rng(42);
    let inst = random_instance(&mut rng, &InstanceShape::up_to(10));
    let g = inst.graph();
    if g.ratings().nnz() > 0 {
        assert_eq!(filter_core(&g, &FilterThresholds::uniform(0)).unwrap(), g);
    }
}
