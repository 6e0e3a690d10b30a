mod common;

use common::{random_connected, rng};
use likenet::graph::{degree_histogram, mean_local_clustering, mean_path_length};
use likenet::{generate_ba, Graph, GraphMetrics};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ba_graphs_are_connected_with_expected_size(n in 2usize..40, k in 1usize..5, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let g = generate_ba(n, k, seed).unwrap();
        prop_assert!(g.is_connected());
        prop_assert_eq!(g.edge_count(), k * (k - 1) / 2 + (n - k) * k);
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
        // Every node arriving after the seed clique brings k edges.
        for v in 0..n {
            let floor = if v < k { k - 1 } else { k };
            prop_assert!(g.degree(v) >= floor);
        }
        prop_assert_eq!(degree_histogram(&g).iter().sum::<usize>(), n);
        prop_assert_eq!(generate_ba(n, k, seed).unwrap(), g);
    }

    #[test]
    fn unit_path_length_only_for_complete(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = rng(seed);
        let g = random_connected(n, 0.5, &mut rng);
        let complete = g.edge_count() == n * (n - 1) / 2;
        prop_assert_eq!(mean_path_length(&g).unwrap() == 1.0, complete);
    }

    #[test]
    fn removing_an_edge_never_shortens_paths(seed in any::<u64>(), n in 3usize..10, pick in any::<prop::sample::Index>()) {
        let mut rng = rng(seed);
        let g = random_connected(n, 0.4, &mut rng);
        let &(a, b) = pick.get(g.edges());
        let h = g.without_edge(a, b).unwrap();
        if h.is_connected() {
            prop_assert!(mean_path_length(&h).unwrap() >= mean_path_length(&g).unwrap());
        } else {
            prop_assert!(mean_path_length(&h).is_err());
        }
    }

    #[test]
    fn metrics_depend_only_on_edge_set(seed in any::<u64>(), perm in Just((0..8).collect::<Vec<usize>>()).prop_shuffle()) {
        let mut rng = rng(seed);
        let g = random_connected(8, 0.3, &mut rng);
        let h = g.relabel(&perm).unwrap();
        let a = GraphMetrics::compute(&g);
        let b = GraphMetrics::compute(&h);
        prop_assert_eq!(a.mean_path_length, b.mean_path_length);
        prop_assert!((mean_local_clustering(&g) - mean_local_clustering(&h)).abs() < 1e-12);
        prop_assert_eq!(&a.degree_histogram, &b.degree_histogram);
        prop_assert_eq!(GraphMetrics::compute(&g), a);
    }

    #[test]
    fn edge_list_round_trips(seed in any::<u64>(), n in 2usize..20) {
        let g = generate_ba(n, 1.max(n / 4), seed).unwrap();
        prop_assert_eq!(Graph::from_edge_list(&g.to_edge_list()).unwrap(), g);
    }
}
