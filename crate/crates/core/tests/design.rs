mod common;

use common::*;
use pnp_core::design::*;
use pnp_core::graph::FeatureCatalog;
use pnp_core::walks::{PathWeights, PreferenceMatrix, Provenance, ScoreMatrix, TargetSet};
use pnp_core::IdMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Case {
    catalog: FeatureCatalog,
    scores: Vec<f64>,
    types: Vec<usize>,
}

fn random_case(rng: &mut ChaCha8Rng, max_features: usize) -> Case {
    let n = rng.gen_range(1..=max_features);
    let ntypes = rng.gen_range(1..=3);
    let types: Vec<usize> = (0..n).map(|_| rng.gen_range(0..ntypes)).collect();
    let labels = (0..ntypes).map(|t| format!("t{t}")).collect();
    let catalog = FeatureCatalog::new(IdMap::from_unsorted((100..100 + n as u64).collect()), types.clone(), labels).unwrap();
    let scores = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
    Case { catalog, scores, types }
}

fn per_type_count(types: &[usize], mask: u32, ty: usize) -> usize {
    (0..types.len()).filter(|&k| mask >> k & 1 == 1 && types[k] == ty).count()
}

#[test]
fn cardinality_matches_brute_force() {
    let mut rng = rng(21);
    for _ in 0..200 {
        let case = random_case(&mut rng, 12);
        let caps: Vec<usize> = (0..3).map(|_| rng.gen_range(0..=4)).collect();
        let constraints = CapacityConstraints::new((0..3).map(|t| (format!("t{t}"), caps[t])));
        let agg = AggregatedScores::new(case.scores.clone(), 1);

        let d = design_cardinality(&agg, &case.catalog, &constraints, QuotaMode::UpperBound).unwrap();
        let best = brute_force_best(&case.scores, |m| (0..3).all(|t| per_type_count(&case.types, m, t) <= caps[t]));
        assert_eq!(d.objective, best);

        let sizes: Vec<usize> = (0..3).map(|t| case.types.iter().filter(|&&x| x == t).count()).collect();
        let strict = design_cardinality(&agg, &case.catalog, &constraints, QuotaMode::Strict).unwrap();
        let best = brute_force_best(&case.scores, |m| (0..3).all(|t| per_type_count(&case.types, m, t) == caps[t].min(sizes[t])));
        assert_eq!(strict.objective, best);
    }
}

#[test]
fn knapsack_matches_brute_force_and_bounds_greedy() {
    let mut rng = rng(22);
    for _ in 0..200 {
        let case = random_case(&mut rng, 15);
        let costs: Vec<f64> = (0..case.scores.len()).map(|_| rng.gen_range(0..=6) as f64).collect();
        let budgets: Vec<f64> = (0..3).map(|_| rng.gen_range(0..=12) as f64).collect();
        let constraints = BudgetConstraints {
            costs: costs.iter().enumerate().map(|(k, &c)| (100 + k as u64, c)).collect(),
            budgets: (0..3).map(|t| (format!("t{t}"), budgets[t])).collect(),
        };
        let agg = AggregatedScores::new(case.scores.clone(), 1);
        let exact = design_budget(&agg, &case.catalog, &constraints, KnapsackMode::default()).unwrap();
        let spent = |m: u32, t: usize| -> f64 { (0..costs.len()).filter(|&k| m >> k & 1 == 1 && case.types[k] == t).map(|k| costs[k]).sum() };
        let best = brute_force_best(&case.scores, |m| (0..3).all(|t| spent(m, t) <= budgets[t]));
        assert_eq!(exact.objective, best);
        let greedy = design_budget(&agg, &case.catalog, &constraints, KnapsackMode::Greedy).unwrap();
        assert!(greedy.objective <= exact.objective);
        let mask = greedy.features().iter().fold(0u32, |m, &k| m | 1 << k);
        assert!((0..3).all(|t| spent(mask, t) <= budgets[t]));
    }
}

#[test]
fn joint_design_is_union_of_per_type_designs() {
    let mut rng = rng(23);
    for _ in 0..50 {
        let case = random_case(&mut rng, 12);
        let caps = CapacityConstraints::new((0..3).map(|t| (format!("t{t}"), 2)));
        let agg = AggregatedScores::new(case.scores.clone(), 1);
        let joint = design_cardinality(&agg, &case.catalog, &caps, QuotaMode::UpperBound).unwrap();
        for sel in &joint.selections {
            let ty = case.catalog.type_index(&sel.label).unwrap();
            let mut own: Vec<usize> = (0..case.scores.len()).filter(|&k| case.types[k] == ty && case.scores[k] > 0.0).collect();
            own.sort_by(|&a, &b| case.scores[b].total_cmp(&case.scores[a]).then(a.cmp(&b)));
            own.truncate(2);
            assert_eq!(sel.features, own);
        }
    }
}

fn random_preferences(rng: &mut ChaCha8Rng, users: usize, features: usize) -> PreferenceMatrix {
    let data = (0..users * features).map(|_| rng.gen_range(-0.4..0.4)).collect();
    let prov = Provenance { weights: PathWeights::default(), delta: 0.5, dataset_hash: [0; 32] };
    PreferenceMatrix::new(ScoreMatrix::from_vec(users, features, data).unwrap(), prov).unwrap()
}

#[test]
fn conversions_match_threshold_simulation() {
    let mut rng = rng(24);
    for _ in 0..5 {
        let (users, features) = (rng.gen_range(2..8), rng.gen_range(2..6));
        let w = random_preferences(&mut rng, users, features);
        let ids = IdMap::from_unsorted((0..users as u64).collect());
        let target = TargetSet::all(&ids).unwrap();
        let catalog = FeatureCatalog::new(IdMap::from_unsorted((0..features as u64).collect()), vec![0; features], vec!["a".into()]).unwrap();
        let agg = AggregatedScores::new(w.sum_rows(&target).unwrap(), users);
        let d = design_cardinality(&agg, &catalog, &CapacityConstraints::new([("a".to_string(), 2)]), QuotaMode::Strict).unwrap();
        let expected = expected_conversions(&w, &target, &d).unwrap();
        let sums: Vec<f64> = (0..users).map(|i| d.features().iter().map(|&k| w.get(i, k)).sum()).collect();
        let n = 100_000;
        let (mut total, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let c = sums.iter().filter(|&&s| s >= rng.gen_range(-1.0..1.0)).count() as f64;
            total += c;
            sq += c * c;
        }
        let mean = total / n as f64;
        let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * se + 1e-12, "{mean} vs {expected} (se {se})");
    }
}

#[test]
fn empty_design_converts_half_the_target() {
    let mut rng = rng(25);
    let w = random_preferences(&mut rng, 7, 3);
    let ids = IdMap::from_unsorted((0..7).collect());
    let target = TargetSet::new(&ids, &[0, 2, 5]).unwrap();
    let empty = Design { selections: vec![], objective: 0.0 };
    assert_eq!(expected_conversions(&w, &target, &empty).unwrap(), 1.5);
    assert_eq!(linear_conversions(&AggregatedScores::new(vec![0.0; 3], 3), &empty), 1.5);
}

#[test]
fn single_user_two_features_picks_the_higher() {
    let catalog = FeatureCatalog::new(IdMap::from_unsorted(vec![1, 2]), vec![0, 0], vec!["actor".into()]).unwrap();
    let agg = AggregatedScores::new(vec![0.2, 0.6], 1);
    let d = design_cardinality(&agg, &catalog, &CapacityConstraints::new([("actor".to_string(), 1)]), QuotaMode::UpperBound).unwrap();
    assert_eq!(d.features(), vec![1]);
}
