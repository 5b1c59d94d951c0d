//! Map sanitation driven by gap classes: unknown holes inside traversable
//! gaps are opened, narrow slivers against walls are closed, and small
//! objects next to gap splits are traced and erased.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::{Gap, GapTable, ScanParams};
use crate::geometry::on_segment;
use crate::grid::{CellPoint, CellState, OccupancyGrid, N4, N8};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterParams {
    /// Objects whose outer contour has fewer points than this are removed.
    pub f_obj: usize,
    /// Upper bound on fill/close/remove rounds before giving up on a fixed
    /// point.
    pub max_rounds: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            f_obj: 40,
            max_rounds: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
}

/// Ordered contour points of an obstacle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallTrace {
    pub points: Vec<CellPoint>,
    /// The trace came back to its start.
    pub closed: bool,
}

/// Moore-neighborhood contour trace of the occupied object containing
/// `start`, stopping after `limit` points or when the start is re-entered
/// the same way it was first left.
pub fn trace_wall(
    grid: &OccupancyGrid,
    start: CellPoint,
    orientation: Orientation,
    limit: usize,
) -> Result<WallTrace> {
    if !grid.is_occupied(start) {
        return Err(Error::Precondition(format!("{start:?} is not occupied")));
    }
    let Some(&(bi, bj)) = N4.iter().find(|&&(di, dj)| grid.is_free(start.offset(di, dj))) else {
        return Err(Error::Precondition(format!(
            "{start:?} has no free 4-neighbor"
        )));
    };

    let mut ring = N8;
    if orientation == Orientation::CounterClockwise {
        ring.reverse();
    }
    let ring_index = |d: (i32, i32)| ring.iter().position(|&r| r == d).expect("unit offset");
    // next occupied pixel clockwise (in ring order) after the backtrack
    let step = |c: CellPoint, back: usize| -> Option<(CellPoint, usize)> {
        for k in 1..=8 {
            let d = ring[(back + k) % 8];
            let p = c.offset(d.0, d.1);
            if grid.is_occupied(p) {
                let prev = ring[(back + k - 1) % 8];
                let q = c.offset(prev.0, prev.1);
                return Some((p, ring_index((q.i - p.i, q.j - p.j))));
            }
        }
        None
    };

    let mut points = vec![start];
    let Some((first, back)) = step(start, ring_index((bi, bj))) else {
        return Ok(WallTrace {
            points,
            closed: true,
        });
    };
    let (mut cur, mut back) = (first, back);
    loop {
        if cur == start {
            let (nxt, _) = step(start, back).expect("start has an occupied neighbor");
            if nxt == first {
                return Ok(WallTrace {
                    points,
                    closed: true,
                });
            }
        }
        if points.len() >= limit {
            return Ok(WallTrace {
                points,
                closed: false,
            });
        }
        points.push(cur);
        (cur, back) = step(cur, back).expect("traced pixel keeps its predecessor");
    }
}

/// Cells whose centers lie inside (even-odd) or on the boundary of the
/// closed polygon through `vertices`.
pub fn polygon_fill(vertices: &[CellPoint]) -> Result<Vec<CellPoint>> {
    if vertices.len() < 3 {
        return Err(Error::Precondition(format!(
            "polygon needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    let n = vertices.len();
    let min_i = vertices.iter().map(|v| v.i).min().unwrap_or(0);
    let max_i = vertices.iter().map(|v| v.i).max().unwrap_or(0);
    let mut out = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for y in min_i..=max_i {
        xs.clear();
        for k in 0..n {
            let (a, b) = (vertices[k], vertices[(k + 1) % n]);
            // half-open in y so shared vertices count once
            if (a.i <= y) != (b.i <= y) {
                let t = (y - a.i) as f64 / (b.i - a.i) as f64;
                xs.push(a.j as f64 + t * (b.j - a.j) as f64);
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite crossings"));
        for pair in xs.chunks_exact(2) {
            let (lo, hi) = (pair[0].ceil() as i32, pair[1].floor() as i32);
            out.extend((lo..=hi).map(|x| CellPoint::new(y, x)));
        }
    }
    // boundary cells: lattice points on each edge
    for k in 0..n {
        let (a, b) = (vertices[k], vertices[(k + 1) % n]);
        let (di, dj) = (b.i - a.i, b.j - a.j);
        let g = gcd(di.unsigned_abs(), dj.unsigned_abs()).max(1) as i32;
        let (si, sj) = (di / g, dj / g);
        let steps = if di == 0 && dj == 0 { 0 } else { g };
        for s in 0..=steps {
            let p = CellPoint::new(a.i + s * si, a.j + s * sj);
            debug_assert!(on_segment(p, a, b));
            out.push(p);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gaps_of(table: &GapTable, traversable: bool) -> Vec<Gap> {
    table
        .all()
        .filter(|g| g.traversable == traversable)
        .copied()
        .collect()
}

/// Every cell of a traversable gap becomes Free.
pub fn fill_holes(grid: &OccupancyGrid, traversable_gaps: &[Gap]) -> OccupancyGrid {
    let mut out = grid.clone();
    for g in traversable_gaps.iter().filter(|g| g.traversable) {
        for j in g.start..=g.end {
            if out.at(g.row, j) == CellState::Unknown {
                out.set_at(g.row, j, CellState::Free);
            }
        }
    }
    out
}

/// Non-traversable gaps with an Occupied cell directly left or right of
/// them become Occupied.
pub fn close_slivers(grid: &OccupancyGrid, non_traversable_gaps: &[Gap]) -> OccupancyGrid {
    let mut out = grid.clone();
    for g in non_traversable_gaps.iter().filter(|g| !g.traversable) {
        let left = g.start > 0 && grid.at(g.row, g.start - 1) == CellState::Occupied;
        let right = g.end + 1 < grid.cols() && grid.at(g.row, g.end + 1) == CellState::Occupied;
        if left || right {
            for j in g.start..=g.end {
                out.set_at(g.row, j, CellState::Occupied);
            }
        }
    }
    out
}

/// Gaps that belong to an adjacent-row group of two or more traversable
/// gaps (no depth requirement).
fn split_gaps(table: &GapTable) -> Vec<Gap> {
    let mut out = Vec::new();
    for i in 0..table.len() {
        for anchor in table.traversable(i) {
            for adj in [i.checked_sub(1), Some(i + 1)].into_iter().flatten() {
                if adj >= table.len() {
                    continue;
                }
                let group: Vec<Gap> = table
                    .traversable(adj)
                    .iter()
                    .filter(|g| anchor.overlaps(g))
                    .copied()
                    .collect();
                if group.len() >= 2 {
                    out.extend(group);
                }
            }
        }
    }
    out.sort_by_key(|g| (g.row, g.start));
    out.dedup();
    out
}

/// Trace both flanking walls of each gap in a split group; closed traces
/// shorter than `f_obj` are filled and their Occupied cells set Free.
pub fn remove_small_objects(grid: &OccupancyGrid, split: &[Gap], f_obj: usize) -> OccupancyGrid {
    let mut out = grid.clone();
    for g in split {
        let mut flanks = Vec::with_capacity(2);
        if g.start > 0 {
            flanks.push(CellPoint::new(g.row as i32, g.start as i32 - 1));
        }
        flanks.push(CellPoint::new(g.row as i32, g.end as i32 + 1));
        for wall in flanks {
            let Ok(trace) = trace_wall(&out, wall, Orientation::Clockwise, f_obj) else {
                continue;
            };
            if !trace.closed || trace.points.len() >= f_obj {
                continue;
            }
            let cells = if trace.points.len() >= 3 {
                polygon_fill(&trace.points).expect("three or more vertices")
            } else {
                trace.points.clone()
            };
            for p in cells {
                if out.is_occupied(p) {
                    out.set(p, CellState::Free);
                }
            }
        }
    }
    out
}

/// Fill holes, close slivers and remove small objects on the unrotated
/// frame, repeating on the re-extracted gaps until nothing changes.
pub fn filter_map(grid: &OccupancyGrid, scan: &ScanParams, params: &FilterParams) -> OccupancyGrid {
    let mut cur = grid.clone();
    for _ in 0..params.max_rounds.max(1) {
        let table = GapTable::build(&cur, scan);
        let mut next = fill_holes(&cur, &gaps_of(&table, true));
        next = close_slivers(&next, &gaps_of(&table, false));
        let table = GapTable::build(&next, scan);
        next = remove_small_objects(&next, &split_gaps(&table), params.f_obj);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}
