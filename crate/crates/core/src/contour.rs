//! Wall contours of free space.
//!
//! Every boundary edge between a free cell and a non-free 4-neighbor is
//! walked with the free cell on the left, treating free space as
//! 4-connected. Runs of edges on the same free cell collapse into one
//! contour position. The result is a set of closed loops of free,
//! wall-adjacent cells that openings, cleanup and topology all walk along.

use crate::grid::{CellPoint, CellState, OccupancyGrid, N4};

/// One position along a contour loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContourPos {
    pub cell: CellPoint,
    /// Bitmask over [`N4`] of the non-free sides at this position.
    pub sides: u8,
    /// Some side is an Occupied cell.
    pub occupied: bool,
    /// Some side is an in-grid Unknown cell (a frontier).
    pub unknown: bool,
}

impl ContourPos {
    pub fn side_dirs(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        (0..4)
            .filter(move |k| self.sides & (1 << k) != 0)
            .map(|k| N4[k])
    }

    /// Best alignment of a wall side with direction `d`.
    pub fn side_alignment(&self, d: (f64, f64)) -> f64 {
        let norm = d.0.hypot(d.1).max(1e-12);
        self.side_dirs()
            .map(|(di, dj)| (di as f64 * d.0 + dj as f64 * d.1) / norm)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Address of a contour position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PosRef {
    pub contour: u32,
    pub pos: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    fn sign(self) -> i64 {
        match self {
            Direction::Forward => 1,
            Direction::Backward => -1,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct WallContours {
    loops: Vec<Vec<ContourPos>>,
    /// Positions of cell `k` are `refs[start[k]..start[k + 1]]`.
    start: Vec<u32>,
    refs: Vec<PosRef>,
    rows: usize,
    cols: usize,
}

fn dir_index(d: (i32, i32)) -> usize {
    N4.iter().position(|&n| n == d).expect("unit 4-direction")
}

impl WallContours {
    pub fn build(grid: &OccupancyGrid) -> Self {
        let (rows, cols) = (grid.rows(), grid.cols());
        let free = |p: CellPoint| grid.is_free(p);
        let mut visited = vec![0u8; rows * cols];
        let mut loops = Vec::new();

        for (start_idx, &state) in grid.cells().iter().enumerate() {
            if state != CellState::Free {
                continue;
            }
            let start_cell = grid.point(start_idx);
            for k in 0..4 {
                let (di, dj) = N4[k];
                if free(start_cell.offset(di, dj)) || visited[start_idx] & (1 << k) != 0 {
                    continue;
                }
                // follow the edge cycle
                let mut edges: Vec<(CellPoint, usize)> = Vec::new();
                let (mut f, mut u) = (start_cell, k);
                loop {
                    let fi = f.i as usize * cols + f.j as usize;
                    if visited[fi] & (1 << u) != 0 {
                        break;
                    }
                    visited[fi] |= 1 << u;
                    edges.push((f, u));
                    let (ui, uj) = N4[u];
                    let w = (-uj, ui);
                    let ahead = f.offset(w.0, w.1);
                    if !free(ahead) {
                        u = dir_index(w);
                    } else {
                        let diag = ahead.offset(ui, uj);
                        if !free(diag) {
                            f = ahead;
                        } else {
                            f = diag;
                            u = dir_index((-w.0, -w.1));
                        }
                    }
                }
                loops.push(Self::collapse(grid, &edges));
            }
        }

        let cell_of = |pos: &ContourPos| pos.cell.i as usize * cols + pos.cell.j as usize;
        let mut start = vec![0u32; rows * cols + 1];
        for pos in loops.iter().flatten() {
            start[cell_of(pos) + 1] += 1;
        }
        for k in 0..rows * cols {
            start[k + 1] += start[k];
        }
        let mut fill = start.clone();
        let mut refs = vec![PosRef { contour: 0, pos: 0 }; start[rows * cols] as usize];
        for (c, lp) in loops.iter().enumerate() {
            for (p, pos) in lp.iter().enumerate() {
                let slot = &mut fill[cell_of(pos)];
                refs[*slot as usize] = PosRef {
                    contour: c as u32,
                    pos: p as u32,
                };
                *slot += 1;
            }
        }
        Self {
            loops,
            start,
            refs,
            rows,
            cols,
        }
    }

    fn collapse(grid: &OccupancyGrid, edges: &[(CellPoint, usize)]) -> Vec<ContourPos> {
        // rotate so the loop does not start in the middle of a run
        let n = edges.len();
        let shift = (0..n)
            .find(|&s| edges[s].0 != edges[(s + n - 1) % n].0)
            .unwrap_or(0);
        let mut out: Vec<ContourPos> = Vec::new();
        for t in 0..n {
            let (cell, u) = edges[(t + shift) % n];
            let (di, dj) = N4[u];
            let side = cell.offset(di, dj);
            let occupied = grid.is_occupied(side);
            let unknown = grid.contains(side) && grid.state(side) == CellState::Unknown;
            match out.last_mut() {
                Some(last) if last.cell == cell => {
                    last.sides |= 1 << u;
                    last.occupied |= occupied;
                    last.unknown |= unknown;
                }
                _ => out.push(ContourPos {
                    cell,
                    sides: 1 << u,
                    occupied,
                    unknown,
                }),
            }
        }
        out
    }

    pub fn num_loops(&self) -> usize {
        self.loops.len()
    }

    pub fn loop_len(&self, contour: u32) -> usize {
        self.loops[contour as usize].len()
    }

    pub fn get(&self, r: PosRef) -> &ContourPos {
        &self.loops[r.contour as usize][r.pos as usize]
    }

    pub fn positions(&self, cell: CellPoint) -> impl Iterator<Item = PosRef> + '_ {
        let inside = cell.i >= 0
            && cell.j >= 0
            && (cell.i as usize) < self.rows
            && (cell.j as usize) < self.cols;
        let range = if inside {
            let k = cell.i as usize * self.cols + cell.j as usize;
            self.start[k] as usize..self.start[k + 1] as usize
        } else {
            0..0
        };
        self.refs[range].iter().copied()
    }

    pub fn contains(&self, cell: CellPoint) -> bool {
        self.positions(cell).next().is_some()
    }

    /// Position `steps` away along the loop (wrapping).
    pub fn step(&self, r: PosRef, dir: Direction, steps: usize) -> PosRef {
        let len = self.loop_len(r.contour) as i64;
        let p = (r.pos as i64 + dir.sign() * steps as i64).rem_euclid(len);
        PosRef {
            contour: r.contour,
            pos: p as u32,
        }
    }

    /// Position of `cell` whose wall side best faces direction `d`.
    pub fn best_position(&self, cell: CellPoint, d: (f64, f64)) -> Option<PosRef> {
        let mut refs = self.positions(cell);
        let first = refs.next()?;
        let mut best: Option<(f64, PosRef)> = None;
        for r in std::iter::once(first).chain(refs) {
            // `d` is fixed, so the unnormalized dot product ranks the same
            let score = self
                .get(r)
                .side_dirs()
                .map(|(di, dj)| di as f64 * d.0 + dj as f64 * d.1)
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_none_or(|(s, _)| score > s + 1e-12) {
                best = Some((score, r));
            }
        }
        best.map(|(_, r)| r)
    }

    /// Positions `0..=cap` steps from `r` in one direction, stopping before
    /// a position without an Occupied side and never going around the loop.
    pub fn run(&self, r: PosRef, dir: Direction, cap: usize) -> Vec<PosRef> {
        let reach = cap.min(self.loop_len(r.contour).saturating_sub(1));
        let mut out = vec![r];
        for s in 1..=reach {
            let q = self.step(r, dir, s);
            if !self.get(q).occupied {
                break;
            }
            out.push(q);
        }
        out
    }

    /// Steps available from `r` in one direction under the [`Self::run`]
    /// rule, with the walk limited to `limit` steps.
    fn reach(&self, r: PosRef, dir: Direction, limit: usize) -> usize {
        (1..=limit)
            .find(|&s| !self.get(self.step(r, dir, s)).occupied)
            .map_or(limit, |s| s - 1)
    }

    /// Steps from `r` to a position of `cell` walking `dir`, as allowed by
    /// [`Self::run`] with the same `cap`.
    pub fn run_offset(&self, r: PosRef, dir: Direction, cap: usize, cell: CellPoint) -> Option<usize> {
        let len = self.loop_len(r.contour) as i64;
        let limit = cap.min(len as usize - 1);
        let best = self
            .positions(cell)
            .filter(|q| q.contour == r.contour)
            .map(|q| (dir.sign() * (q.pos as i64 - r.pos as i64)).rem_euclid(len) as usize)
            .filter(|&s| s <= limit)
            .min()?;
        (best <= self.reach(r, dir, best)).then_some(best)
    }

    /// Signed offset of smallest magnitude (backward first on ties) at
    /// which `cell` appears in [`Self::neighborhood`]`(r, cap)`.
    pub fn neighborhood_offset(&self, r: PosRef, cap: usize, cell: CellPoint) -> Option<i64> {
        let len = self.loop_len(r.contour);
        let limit = cap.min(len.saturating_sub(1) / 2);
        if self.get(r).cell == cell {
            return Some(0);
        }
        let back = self.run_offset(r, Direction::Backward, limit, cell);
        let fwd = self.run_offset(r, Direction::Forward, limit, cell);
        match (back, fwd) {
            (Some(b), Some(f)) if f < b => Some(f as i64),
            (Some(b), _) => Some(-(b as i64)),
            (None, Some(f)) => Some(f as i64),
            (None, None) => None,
        }
    }

    /// Positions within `cap` steps of `r` in both directions, as signed
    /// offsets. A direction stops early before a position without an
    /// Occupied side (frontier or map border) and never wraps past the
    /// other direction.
    pub fn neighborhood(&self, r: PosRef, cap: usize) -> Vec<(i64, PosRef)> {
        let len = self.loop_len(r.contour);
        let half = (len.saturating_sub(1)) / 2;
        let reach = cap.min(half);
        let mut out = vec![(0i64, r)];
        for dir in [Direction::Backward, Direction::Forward] {
            for s in 1..=reach {
                let q = self.step(r, dir, s);
                if !self.get(q).occupied {
                    break;
                }
                out.push((dir.sign() * s as i64, q));
            }
        }
        out.sort_by_key(|e| e.0);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::load_ascii;

    #[test]
    fn rectangle_room_is_one_loop() {
        let g = load_ascii("######\n#....#\n#....#\n######").unwrap();
        let c = WallContours::build(&g);
        assert_eq!(c.num_loops(), 1);
        // 8 free cells, all on the boundary, corners collapse
        assert_eq!(c.loop_len(0), 8);
        assert!((0..8).all(|p| c.get(PosRef { contour: 0, pos: p }).occupied));
    }

    #[test]
    fn forward_walks_with_free_on_left() {
        // free on the left walking east means the wall is to the south
        let g = load_ascii("?????\n.....\n#####").unwrap();
        let c = WallContours::build(&g);
        let r = c
            .positions(CellPoint::new(1, 2))
            .find(|r| c.get(*r).occupied)
            .unwrap();
        let next = c.get(c.step(r, Direction::Forward, 1)).cell;
        assert_eq!(next, CellPoint::new(1, 3));
    }

    #[test]
    fn island_gets_its_own_loop() {
        let g = load_ascii("#######\n#.....#\n#..#..#\n#.....#\n#######").unwrap();
        let c = WallContours::build(&g);
        assert_eq!(c.num_loops(), 2);
        let sizes: Vec<usize> = (0..2).map(|k| c.loop_len(k)).collect();
        assert!(sizes.contains(&8) || sizes.iter().any(|&s| s <= 8));
    }

    #[test]
    fn neighborhood_on_straight_wall() {
        let mut text = String::from("#".repeat(30));
        text.push('\n');
        text.push_str(&".".repeat(30));
        text.push('\n');
        text.push_str(&"?".repeat(30));
        let g = load_ascii(&text).unwrap();
        let c = WallContours::build(&g);
        let r = c
            .positions(CellPoint::new(1, 15))
            .find(|r| c.get(*r).occupied)
            .unwrap();
        assert_eq!(c.neighborhood(r, 5).len(), 11);
        assert_eq!(c.neighborhood(r, 0).len(), 1);
    }
}
