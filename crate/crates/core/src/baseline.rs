//! Thinning-based Voronoi baselines: the full skeleton of free space (GVG)
//! and a reduced variant with short leaf branches pruned (RGVG).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::grid::OccupancyGrid;
use crate::skeleton::{
    assemble, free_components, thin_region, trace_skeleton, NodeKind, Provenance, RegionPath, SkeletonGraph,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    /// Leaf branches shorter than this (cells, along the polyline) are
    /// pruned from the reduced graph.
    pub prune_length: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self { prune_length: 9.0 }
    }
}

fn paths_of(graph: &SkeletonGraph) -> Vec<RegionPath> {
    graph.to_paths(Provenance::Baseline)
}

/// Skeleton of all Free cells, one thinning per 4-connected component.
pub fn gvg(grid: &OccupancyGrid) -> SkeletonGraph {
    let mut paths = Vec::new();
    for comp in free_components(grid) {
        let skel = thin_region(&comp, &[]).expect("components are non-empty");
        for cells in trace_skeleton(&skel) {
            paths.push(RegionPath {
                provenance: Provenance::Baseline,
                cells,
                frontier_end: false,
                fallback: false,
            });
        }
    }
    assemble(&paths)
}

/// Remove leaf branches (endpoint to branch point) shorter than
/// `prune_length` until none is left. A branch point never loses its last
/// two edges in one round.
pub fn prune_leaves(graph: &SkeletonGraph, prune_length: f64) -> SkeletonGraph {
    let mut g = graph.clone();
    loop {
        let kind: HashMap<u32, (NodeKind, usize)> = g.nodes.iter().map(|n| (n.id, (n.kind, n.degree))).collect();
        let mut leaves: Vec<(f64, u32, u32)> = g
            .edges
            .iter()
            .filter_map(|e| {
                let (ka, kb) = (kind[&e.a], kind[&e.b]);
                let len = e.length();
                if len >= prune_length {
                    return None;
                }
                match (ka.0, kb.0) {
                    (NodeKind::Endpoint, NodeKind::BranchPoint) => Some((len, e.id, e.b)),
                    (NodeKind::BranchPoint, NodeKind::Endpoint) => Some((len, e.id, e.a)),
                    _ => None,
                }
            })
            .collect();
        if leaves.is_empty() {
            return g;
        }
        leaves.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut left: HashMap<u32, usize> = kind.iter().map(|(&id, &(_, d))| (id, d)).collect();
        let mut drop = vec![false; g.edges.len()];
        for (_, edge, hub) in leaves {
            let d = left.get_mut(&hub).expect("hub node exists");
            if *d > 2 {
                *d -= 1;
                drop[edge as usize] = true;
            }
        }
        if !drop.iter().any(|&d| d) {
            return g;
        }
        let kept: Vec<RegionPath> = paths_of(&g)
            .into_iter()
            .zip(&drop)
            .filter(|(_, &d)| !d)
            .map(|(p, _)| p)
            .collect();
        g = assemble(&kept);
    }
}

/// [`gvg`] with short leaf branches pruned.
pub fn rgvg(grid: &OccupancyGrid, prune_length: f64) -> SkeletonGraph {
    prune_leaves(&gvg(grid), prune_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{load_ascii, CellPoint};
    use crate::synth;

    fn free_cells_only(g: &OccupancyGrid, graph: &SkeletonGraph) -> bool {
        graph.edges.iter().flat_map(|e| &e.cells).all(|&c| g.is_free(c))
    }

    #[test]
    fn one_wide_corridor_is_its_own_skeleton() {
        let g = load_ascii("#########\n#.......#\n#########").unwrap();
        let s = gvg(&g);
        assert_eq!(s.node_count(), 2);
        assert_eq!(s.edges.len(), 1);
        assert_eq!(s.edges[0].cells.len(), 7);
    }

    #[test]
    fn square_room_collapses_to_its_center() {
        // the same shrink-to-a-point behavior as reference thinning codes
        let mut c = synth::Canvas::new(22, 22);
        c.free(1, 1, 21, 21);
        let g = c.finish();
        let comp = free_components(&g).remove(0);
        let skel = thin_region(&comp, &[]).unwrap();
        assert_eq!(skel.len(), 1);
        assert!(skel[0].chebyshev(CellPoint::new(10, 10)) <= 1);
        assert_eq!(gvg(&g).node_count(), 0);
    }

    #[test]
    fn oblong_room_thins_to_its_long_axis() {
        let mut c = synth::Canvas::new(12, 42);
        c.free(1, 1, 11, 41);
        let g = c.finish();
        let s = gvg(&g);
        assert_eq!((s.node_count(), s.edges.len()), (2, 1));
        assert!(s.edges[0].cells.iter().all(|c| (5..=6).contains(&c.i)));
    }

    #[test]
    fn plus_map_has_at_least_five_nodes() {
        let g = synth::plus(30, 12);
        let s = gvg(&g);
        assert!(s.node_count() >= 5);
        assert!(free_cells_only(&g, &s));
    }

    #[test]
    fn short_spur_is_pruned() {
        // a long bar with a three-cell spur in the middle
        let mut paths = vec![];
        let p = |cells: Vec<(i32, i32)>| RegionPath {
            provenance: Provenance::Baseline,
            cells: cells.into_iter().map(|(i, j)| CellPoint::new(i, j)).collect(),
            frontier_end: false,
            fallback: false,
        };
        paths.push(p((0..=10).map(|j| (5, j)).collect()));
        paths.push(p((11..=20).map(|j| (5, j)).collect()));
        paths.push(p(vec![(5, 10), (4, 10), (3, 10)]));
        let g = assemble(&paths);
        assert_eq!((g.branch_points(), g.endpoints()), (1, 3));
        let r = prune_leaves(&g, 5.0);
        assert_eq!((r.branch_points(), r.endpoints(), r.edges.len()), (0, 2, 1));
        assert_eq!(prune_leaves(&g, 0.0), g);
    }

    #[test]
    fn pruning_never_adds_nodes() {
        for seed in 0..4 {
            let g = synth::random_junctions(seed, 120);
            let full = gvg(&g);
            assert_eq!(rgvg(&g, 0.0), full);
            for prune in [3.0, 9.0, 30.0] {
                let r = rgvg(&g, prune);
                assert!(r.node_count() <= full.node_count());
                assert!(free_cells_only(&g, &r));
            }
        }
    }
}
