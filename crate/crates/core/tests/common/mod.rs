//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use junctionmap::contour::WallContours;
use junctionmap::geometry::segment_clear;
use junctionmap::openings::{is_separated, wall_point_set, Endpoint, Opening, OpeningSearchParams};
use junctionmap::synth::DoorwayScene;
use junctionmap::{CellPoint, CellState, OccupancyGrid};

fn valid(row: &[CellState], s: usize, e: usize, f_uk: usize) -> bool {
    if row[s] != CellState::Free || row[e] != CellState::Free {
        return false;
    }
    let mut unknown = 0;
    for &c in &row[s..=e] {
        match c {
            CellState::Occupied => return false,
            CellState::Unknown => {
                unknown += 1;
                if unknown > f_uk {
                    return false;
                }
            }
            CellState::Free => unknown = 0,
        }
    }
    true
}

/// Every interval that satisfies the gap rules and is not strictly inside
/// another such interval.
pub fn brute_force_gaps(row: &[CellState], f_uk: usize) -> Vec<(usize, usize)> {
    let n = row.len();
    let mut ok = Vec::new();
    for s in 0..n {
        for e in s..n {
            if valid(row, s, e, f_uk) {
                ok.push((s, e));
            }
        }
    }
    ok.iter()
        .copied()
        .filter(|&(s, e)| !ok.iter().any(|&(s2, e2)| s2 <= s && e <= e2 && (s2, e2) != (s, e)))
        .collect()
}

/// Even-odd crossing test on the cell center, with boundary points inside.
pub fn inside(p: CellPoint, poly: &[CellPoint]) -> bool {
    let n = poly.len();
    let (y, x) = (p.i as f64, p.j as f64);
    let mut odd = false;
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        let cross = (b.j - a.j) as i64 * (p.i - a.i) as i64 - (b.i - a.i) as i64 * (p.j - a.j) as i64;
        let within = p.i >= a.i.min(b.i) && p.i <= a.i.max(b.i) && p.j >= a.j.min(b.j) && p.j <= a.j.max(b.j);
        if cross == 0 && within {
            return true;
        }
        let (ay, ax, by, bx) = (a.i as f64, a.j as f64, b.i as f64, b.j as f64);
        if (ay > y) != (by > y) && x < ax + (y - ay) * (bx - ax) / (by - ay) {
            odd = !odd;
        }
    }
    odd
}

pub fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

/// A diagonal seed through the doorway, from the upper-left jamb corner to
/// the lower-right one.
pub fn diagonal_seed(s: &DoorwayScene) -> Opening {
    let top = s.wall_row as i32 - 1;
    let bottom = (s.wall_row + s.wall_thickness) as i32;
    Opening::new(
        0,
        CellPoint::new(top, s.door_start as i32 - 1),
        CellPoint::new(bottom, (s.door_start + s.door_width) as i32),
    )
    .flipped()
}

pub fn acceptable(g: &OccupancyGrid, c: &WallContours, o: &Opening, n0: (f64, f64), params: &OpeningSearchParams) -> bool {
    dot(o.normal(), n0) > 0.0 && is_separated(c, o, params.separation_ratio) && segment_clear(g, o.start, o.end)
}

/// Shortest acceptable segment over the full cross product of both wall
/// point sets of the seed.
pub fn exhaustive_min(g: &OccupancyGrid, c: &WallContours, seed: &Opening, params: &OpeningSearchParams) -> Option<f64> {
    let ws = wall_point_set(c, seed.position(c, Endpoint::Start)?, params.wall_cap);
    let we = wall_point_set(c, seed.position(c, Endpoint::End)?, params.wall_cap);
    let mut best: Option<f64> = None;
    for &s in &ws {
        for &e in &we {
            if s == e {
                continue;
            }
            let cand = Opening::new(0, s, e);
            if acceptable(g, c, &cand, seed.normal(), params) && cand.is_valid(g) {
                best = Some(best.map_or(cand.length(), |b: f64| b.min(cand.length())));
            }
        }
    }
    best
}
