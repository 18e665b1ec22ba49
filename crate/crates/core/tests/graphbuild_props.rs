mod common;

use graphcomplete::graphbuild::*;
use graphcomplete::solver::SparseObservations;
use proptest::prelude::*;
use rand::Rng;

fn random_block(seed: u64, entities: usize, items: usize, p: f64) -> SparseObservations {
    let mut r = common::rng(seed);
    let mut entries = Vec::new();
    for e in 0..entities {
        for it in 0..items {
            if r.random_bool(p) {
                entries.push((e, it, r.random_range(1..=10) as f64 / 2.0));
            }
        }
    }
    SparseObservations::new(entities, items, entries).unwrap()
}

fn naive_distance(obs: &SparseObservations, i: usize, j: usize, min_common: usize) -> Option<f64> {
    let mut diffs = Vec::new();
    for item in 0..obs.n_cols() {
        if let (Some(a), Some(b)) = (obs.get(i, item), obs.get(j, item)) {
            diffs.push(a - b);
        }
    }
    if diffs.is_empty() || diffs.len() < min_common {
        return None;
    }
    Some((diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt())
}

#[test]
fn single_common_item_distance() {
    let obs = SparseObservations::new(2, 3, vec![(0, 1, 5.0), (0, 2, 3.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
    let f = FeatureBlock::rows_as_entities(&obs);
    assert_eq!(common_support_distance(&f, 0, 1, 1), Some((4.0, 1)));
    assert_eq!(common_support_distance(&f, 0, 1, 3), None);
}

#[test]
fn identical_entities_give_complete_unit_graph() {
    let entries = (0..6).flat_map(|e| (0..5).map(move |it| (e, it, 1.0 + it as f64 * 0.5))).collect();
    let obs = SparseObservations::new(6, 5, entries).unwrap();
    let g = build_side_graph(&FeatureBlock::rows_as_entities(&obs), &GraphBuildConfig::default()).unwrap();
    assert_eq!(g.n_edges(), 15);
    assert!(g.edges().all(|(_, _, w)| w == 1.0));
}

#[test]
fn separated_clusters_stay_disconnected() {
    let mut entries = Vec::new();
    for e in 0..8 {
        let base = if e < 4 { 1.0 } else { 4.5 };
        for it in 0..6 {
            entries.push((e, it, base + ((e + it) % 2) as f64 * 0.5));
        }
    }
    let obs = SparseObservations::new(8, 6, entries).unwrap();
    let g = build_side_graph(&FeatureBlock::rows_as_entities(&obs), &GraphBuildConfig::default()).unwrap();
    let comp = g.connected_components();
    assert!(comp.iter().max().unwrap() >= &1);
    assert_ne!(comp[0], comp[7]);
}

#[test]
fn no_defined_pairs_is_an_error() {
    let obs = SparseObservations::new(3, 3, vec![(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]).unwrap();
    let err = build_side_graph(&FeatureBlock::rows_as_entities(&obs), &GraphBuildConfig::default()).unwrap_err();
    assert!(err.to_string().contains("shares at least 3"), "{err}");
}

#[test]
fn summary_csv_reports_edges() {
    let obs = random_block(3, 30, 40, 0.5);
    let (g, s) = build_side_graph_with_summary(&FeatureBlock::rows_as_entities(&obs), &GraphBuildConfig::default()).unwrap();
    assert_eq!(s.edge_count, g.n_edges());
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().ends_with(&format!(",{}", g.n_edges())));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distances_match_intersection_oracle(seed in any::<u64>(), min_common in 0usize..5) {
        let obs = random_block(seed, 12, 15, 0.4);
        let pd = PairwiseDistances::compute(&FeatureBlock::rows_as_entities(&obs), min_common);
        for i in 0..12 {
            prop_assert_eq!(pd.get(i, i), Some(0.0));
            for j in 0..12 {
                prop_assert_eq!(pd.get(i, j), pd.get(j, i));
                if i != j {
                    let want = naive_distance(&obs, i, j, min_common);
                    match (pd.get(i, j), want) {
                        (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                        (None, None) => {}
                        other => prop_assert!(false, "{:?}", other),
                    }
                    if let Some(d) = pd.get(i, j) {
                        prop_assert!((0.0..=4.5).contains(&d));
                    }
                }
            }
        }
    }

    #[test]
    fn column_entities_match_transposed_rows(seed in any::<u64>()) {
        let obs = random_block(seed, 10, 9, 0.5);
        let t = SparseObservations::new(9, 10, obs.entries().iter().map(|&(i, j, v)| (j, i, v)).collect()).unwrap();
        let a = PairwiseDistances::compute(&FeatureBlock::cols_as_entities(&obs), 2);
        let b = PairwiseDistances::compute(&FeatureBlock::rows_as_entities(&t), 2);
        for i in 0..9 {
            for j in 0..9 {
                prop_assert_eq!(a.get(i, j), b.get(i, j));
            }
        }
    }

    #[test]
    fn epsilon_is_monotone_and_weights_bounded(seed in any::<u64>(), e1 in 1.0f64..2.5, de in 0.0f64..1.0) {
        let obs = random_block(seed, 25, 30, 0.5);
        let f = FeatureBlock::rows_as_entities(&obs);
        let base = GraphBuildConfig { alpha: Some(0.3), ..GraphBuildConfig::default() };
        let d_min = PairwiseDistances::compute(&f, base.min_common).d_min(false);
        prop_assume!(d_min.is_some_and(|d| d < e1));
        let small = build_side_graph(&f, &GraphBuildConfig { epsilon: e1, ..base.clone() }).unwrap();
        let large = build_side_graph(&f, &GraphBuildConfig { epsilon: e1 + de, ..base }).unwrap();
        for (u, v, w) in small.edges() {
            prop_assert_eq!(large.weight(u, v), w);
            prop_assert!(w > 0.0 && w <= 1.0);
        }
        prop_assert!(small.n_edges() <= large.n_edges());
    }
}
