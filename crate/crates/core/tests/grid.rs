use std::f64::consts::PI;

use junctionmap::grid::{load_ascii, rotate, save_ascii};
use junctionmap::synth::random_grid;
use junctionmap::{CellPoint, CellState};
use proptest::prelude::*;

proptest! {
    #[test]
    fn rotated_free_cells_come_from_free_cells(seed in 0u64..1000, angle in 0.0f64..(2.0 * PI)) {
        let g = random_grid(seed, 30, 26);
        let v = rotate(&g, angle);
        for (p, s) in v.grid.iter_points() {
            if s != CellState::Free {
                continue;
            }
            let c = v.snap_to_original(p);
            let near = (-1..=1).any(|di| (-1..=1).any(|dj| g.is_free(c.offset(di, dj))));
            prop_assert!(near, "{:?} maps to {:?}", p, c);
        }
    }

    #[test]
    fn ascii_round_trip(seed in 0u64..1000) {
        let g = random_grid(seed, 17, 29);
        let text = save_ascii(&g);
        prop_assert_eq!(load_ascii(&text).unwrap(), g.clone());
        prop_assert_eq!(save_ascii(&load_ascii(&text).unwrap()), text);
    }

    #[test]
    fn frontier_is_free_and_vanishes_when_walled(seed in 0u64..1000) {
        let g = random_grid(seed, 20, 20);
        prop_assert!(g.frontier_cells().iter().all(|&c| g.is_free(c)));
        let mut known = g.clone();
        for i in 0..known.rows() {
            for j in 0..known.cols() {
                if known.at(i, j) == CellState::Unknown {
                    known.set_at(i, j, CellState::Occupied);
                }
            }
        }
        prop_assert!(known.padded(1, CellState::Occupied).frontier_cells().is_empty());
    }
}

#[test]
fn full_turn_equals_no_turn() {
    for seed in 0..20 {
        let g = random_grid(seed, 21, 33);
        assert_eq!(rotate(&g, 2.0 * PI).grid, rotate(&g, 0.0).grid);
    }
}

#[test]
fn quarter_turns_compose() {
    let g = random_grid(3, 12, 19);
    let twice = rotate(&rotate(&g, PI / 2.0).grid, PI / 2.0).grid;
    let half = rotate(&g, PI).grid;
    assert_eq!(twice, half);
    assert_eq!(half.at(0, 0), g.at(11, 18));
    assert_eq!(half.state(CellPoint::new(5, 7)), g.at(6, 11));
}
