use junctionmap::baseline::{gvg, prune_leaves, rgvg};
use junctionmap::synth::{office, random_grid, random_junctions};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pruning_never_adds_nodes(seed in 0u64..10_000, prune in 0.0f64..40.0) {
        let g = random_junctions(seed, 64);
        let full = gvg(&g);
        let reduced = prune_leaves(&full, prune);
        prop_assert!(reduced.node_count() <= full.node_count());
        prop_assert_eq!(rgvg(&g, prune).node_count(), reduced.node_count());
        for e in full.edges.iter().chain(&reduced.edges) {
            prop_assert!(e.cells.iter().all(|&c| g.is_free(c)));
        }
    }

    #[test]
    fn baselines_stay_on_free_cells_of_noisy_grids(seed in 0u64..10_000) {
        let g = random_grid(seed, 48, 48);
        for e in rgvg(&g, 9.0).edges {
            prop_assert!(e.cells.iter().all(|&c| g.is_free(c)));
        }
    }
}

#[test]
fn longer_pruning_is_monotone_on_the_office() {
    let g = office(1);
    let full = gvg(&g);
    let mut last = full.node_count();
    for prune in [0.0, 3.0, 6.0, 9.0, 15.0, 30.0] {
        let n = prune_leaves(&full, prune).node_count();
        assert!(n <= last, "prune {prune}: {n} > {last}");
        last = n;
    }
}
