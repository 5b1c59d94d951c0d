//! Row gaps, their traversability, adjacent-row grouping, and the gap
//! detections that seed openings.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{rotate, CellPoint, CellState, OccupancyGrid, RotatedView};

/// A maximal run of free cells on one row. Interior unknown runs of at most
/// `f_uk` cells are absorbed; the first and last cells are always free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub row: usize,
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub traversable: bool,
}

impl Gap {
    pub fn new(row: usize, start: usize, end: usize) -> Self {
        Self {
            row,
            start,
            end,
            traversable: false,
        }
    }

    /// `end - start`, the quantity compared against `g_min`.
    pub fn span(&self) -> usize {
        self.end - self.start
    }

    /// Open-interval overlap between gaps on adjacent rows.
    pub fn overlaps(&self, other: &Gap) -> bool {
        other.start < self.end && other.end > self.start
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanParams {
    /// Minimum `end - start` of a traversable gap, in cells.
    pub g_min: usize,
    /// Number of scan directions over half a turn.
    pub n_dir: usize,
    /// Longest unknown run a gap may absorb.
    pub f_uk: usize,
    /// Minimum chain length behind a detection.
    pub g_dep: usize,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            g_min: 6,
            n_dir: 6,
            f_uk: 1,
            g_dep: 5,
        }
    }
}

impl ScanParams {
    pub fn validate(&self) -> Result<()> {
        if self.g_min == 0 || self.n_dir == 0 || self.f_uk == 0 || self.g_dep == 0 {
            return Err(Error::Precondition(format!(
                "scan parameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// Gap threshold for a robot of width `robot_width` meters.
    pub fn g_min_for(robot_width: f64, cell_size: f64) -> usize {
        ((robot_width / cell_size) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Split a row into gaps, left to right.
pub fn extract_row_gaps(row_index: usize, row: &[CellState], f_uk: usize) -> Vec<Gap> {
    let n = row.len();
    let mut gaps = Vec::new();
    let mut j = 0;
    while j < n {
        if row[j] != CellState::Free {
            j += 1;
            continue;
        }
        let start = j;
        let mut end = j;
        let mut k = j + 1;
        loop {
            while k < n && row[k] == CellState::Free {
                end = k;
                k += 1;
            }
            if k >= n || row[k] == CellState::Occupied {
                break;
            }
            let run_start = k;
            while k < n && row[k] == CellState::Unknown {
                k += 1;
            }
            if k - run_start > f_uk || k >= n || row[k] != CellState::Free {
                break;
            }
        }
        gaps.push(Gap::new(row_index, start, end));
        j = end + 1;
    }
    gaps
}

/// Mark gaps traversable per `end - start >= g_min` and split them.
pub fn classify(gaps: &[Gap], g_min: usize) -> (Vec<Gap>, Vec<Gap>) {
    gaps.iter()
        .map(|g| Gap {
            traversable: g.span() >= g_min,
            ..*g
        })
        .partition(|g| g.traversable)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Above,
    Below,
}

impl Side {
    fn step(self) -> isize {
        match self {
            Side::Above => -1,
            Side::Below => 1,
        }
    }

    fn opposite(self) -> Side {
        match self {
            Side::Above => Side::Below,
            Side::Below => Side::Above,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapGroup {
    pub anchor: Gap,
    pub neighbors: Vec<Gap>,
    pub side: Side,
}

/// The traversable gaps of an adjacent row that overlap `anchor`.
pub fn neighbor_group(anchor: &Gap, adjacent_row_gaps: &[Gap], side: Side) -> GapGroup {
    GapGroup {
        anchor: *anchor,
        neighbors: adjacent_row_gaps
            .iter()
            .filter(|g| g.traversable && anchor.overlaps(g))
            .copied()
            .collect(),
        side,
    }
}

/// All gaps of a grid, classified, row by row.
#[derive(Clone, Debug)]
pub struct GapTable {
    rows: Vec<Vec<Gap>>,
    /// Traversable gaps only, per row.
    passable: Vec<Vec<Gap>>,
}

impl GapTable {
    pub fn build(grid: &OccupancyGrid, params: &ScanParams) -> Self {
        let mut rows = Vec::with_capacity(grid.rows());
        let mut passable = Vec::with_capacity(grid.rows());
        for i in 0..grid.rows() {
            let (t, nt) = classify(&extract_row_gaps(i, grid.row(i), params.f_uk), params.g_min);
            let mut all: Vec<Gap> = t.iter().chain(nt.iter()).copied().collect();
            all.sort_by_key(|g| g.start);
            rows.push(all);
            passable.push(t);
        }
        Self { rows, passable }
    }

    pub fn row(&self, i: usize) -> &[Gap] {
        &self.rows[i]
    }

    pub fn traversable(&self, i: usize) -> &[Gap] {
        &self.passable[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn all(&self) -> impl Iterator<Item = &Gap> {
        self.rows.iter().flatten()
    }

    /// Indices into `traversable(row)` of gaps overlapping `gap`.
    fn overlapping(&self, row: usize, gap: &Gap) -> std::ops::Range<usize> {
        let gaps = &self.passable[row];
        let lo = gaps.partition_point(|g| g.end <= gap.start);
        let mut hi = lo;
        while hi < gaps.len() && gaps[hi].start < gap.end {
            hi += 1;
        }
        lo..hi
    }
}

/// Memoized chain lengths through Eq.-4-linked traversable gaps, capped at
/// `g_dep`.
#[derive(Clone, Debug)]
pub struct DepthIndex {
    up: Vec<Vec<usize>>,
    down: Vec<Vec<usize>>,
    g_dep: usize,
}

impl DepthIndex {
    pub fn build(table: &GapTable, g_dep: usize) -> Self {
        let n = table.len();
        let mut up: Vec<Vec<usize>> = Vec::with_capacity(n);
        for i in 0..n {
            let row: Vec<usize> = table
                .traversable(i)
                .iter()
                .map(|g| {
                    let best = if i == 0 {
                        0
                    } else {
                        table
                            .overlapping(i - 1, g)
                            .map(|k| up[i - 1][k])
                            .max()
                            .unwrap_or(0)
                    };
                    (best + 1).min(g_dep)
                })
                .collect();
            up.push(row);
        }
        let mut down: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in (0..n).rev() {
            down[i] = table
                .traversable(i)
                .iter()
                .map(|g| {
                    let best = if i + 1 == n {
                        0
                    } else {
                        table
                            .overlapping(i + 1, g)
                            .map(|k| down[i + 1][k])
                            .max()
                            .unwrap_or(0)
                    };
                    (best + 1).min(g_dep)
                })
                .collect();
        }
        Self { up, down, g_dep }
    }

    /// Length (capped) of the longest chain headed by `gap` heading in
    /// direction `side`.
    pub fn chain(&self, table: &GapTable, gap: &Gap, side: Side) -> usize {
        let k = table
            .traversable(gap.row)
            .iter()
            .position(|g| g.start == gap.start)
            .expect("gap belongs to the table");
        match side {
            Side::Above => self.up[gap.row][k],
            Side::Below => self.down[gap.row][k],
        }
    }

    /// Neighbors of `group` heading a full-depth chain away from the anchor.
    pub fn deep_neighbors(&self, table: &GapTable, group: &GapGroup) -> Vec<Gap> {
        group
            .neighbors
            .iter()
            .filter(|n| self.chain(table, n, group.side) >= self.g_dep)
            .copied()
            .collect()
    }

    /// The anchor and at least two neighbors each head a chain of `g_dep`
    /// gaps running away from the detection row.
    pub fn depth_ok(&self, table: &GapTable, group: &GapGroup) -> bool {
        self.chain(table, &group.anchor, group.side.opposite()) >= self.g_dep
            && self.deep_neighbors(table, group).len() >= 2
    }
}

/// Seed segment of one opening, in original-frame continuous coordinates.
/// Oriented so that the detection's anchor lies on the left of
/// `start -> end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub start: (f64, f64),
    pub end: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapDetection {
    pub angle: f64,
    /// Index of the scan direction, `angle = dir * PI / n_dir`.
    pub dir: usize,
    pub group: GapGroup,
    pub seeds: Vec<Seed>,
}

/// Detections in one frame, in that frame's coordinates (seeds unmapped).
pub fn detect_in_frame(grid: &OccupancyGrid, params: &ScanParams) -> Vec<(GapGroup, Vec<Gap>)> {
    let table = GapTable::build(grid, params);
    let depth = DepthIndex::build(&table, params.g_dep);
    let mut out = Vec::new();
    for i in 0..table.len() {
        for anchor in table.traversable(i) {
            for side in [Side::Above, Side::Below] {
                let adj = i as isize + side.step();
                if adj < 0 || adj as usize >= table.len() {
                    continue;
                }
                let adj = adj as usize;
                let range = table.overlapping(adj, anchor);
                if range.len() < 2 {
                    continue;
                }
                let group = GapGroup {
                    anchor: *anchor,
                    neighbors: table.traversable(adj)[range].to_vec(),
                    side,
                };
                if depth.depth_ok(&table, &group) {
                    let deep = depth.deep_neighbors(&table, &group);
                    out.push((group, deep));
                }
            }
        }
    }
    out
}

fn seed_for(view: &RotatedView, gap: &Gap, side: Side) -> Seed {
    let a = view.original_point(CellPoint::new(gap.row as i32, gap.start as i32));
    let b = view.original_point(CellPoint::new(gap.row as i32, gap.end as i32));
    // The anchor is on the `-side` of the neighbor row; the left normal of
    // a +column walk points to lower rows.
    match side {
        Side::Below => Seed { start: a, end: b },
        Side::Above => Seed { start: b, end: a },
    }
}

/// Scan `grid` in `n_dir` rotated frames and return every depth-filtered
/// detection with its seeds in the original frame. Output is sorted by
/// direction, row, then anchor start.
pub fn scan_all_directions(
    grid: &OccupancyGrid,
    params: &ScanParams,
    threads: usize,
) -> Vec<GapDetection> {
    let scan = |dir: usize| -> Vec<GapDetection> {
        let angle = dir as f64 * PI / params.n_dir as f64;
        let view = rotate(grid, angle);
        detect_in_frame(&view.grid, params)
            .into_iter()
            .map(|(group, deep)| {
                let seeds = deep.iter().map(|g| seed_for(&view, g, group.side)).collect();
                GapDetection {
                    angle,
                    dir,
                    group,
                    seeds,
                }
            })
            .collect()
    };

    let dirs: Vec<usize> = (0..params.n_dir).collect();
    let mut out: Vec<GapDetection> = if threads > 1 && dirs.len() > 1 {
        let chunk = dirs.len().div_ceil(threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = dirs
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().flat_map(|&d| scan(d)).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("scan thread panicked"))
                .collect()
        })
    } else {
        dirs.iter().flat_map(|&d| scan(d)).collect()
    };
    out.sort_by(|a, b| {
        (a.dir, a.group.anchor.row, a.group.anchor.start, a.group.side as u8).cmp(&(
            b.dir,
            b.group.anchor.row,
            b.group.anchor.start,
            b.group.side as u8,
        ))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::load_ascii;

    fn row(text: &str) -> Vec<CellState> {
        load_ascii(text).unwrap().row(0).to_vec()
    }

    fn spans(gaps: &[Gap]) -> Vec<(usize, usize)> {
        gaps.iter().map(|g| (g.start, g.end)).collect()
    }

    #[test]
    fn row_gap_examples() {
        assert_eq!(
            spans(&extract_row_gaps(0, &row("..##...#."), 1)),
            vec![(0, 1), (4, 6), (8, 8)]
        );
        assert_eq!(spans(&extract_row_gaps(0, &row(".?."), 1)), vec![(0, 2)]);
        assert_eq!(spans(&extract_row_gaps(0, &row(".??."), 1)), vec![(0, 0), (3, 3)]);
        assert_eq!(spans(&extract_row_gaps(0, &row("?..?"), 1)), vec![(1, 2)]);
        assert!(extract_row_gaps(0, &row("#??#"), 3).is_empty());
    }

    #[test]
    fn classification_boundary() {
        let (t, nt) = classify(&[Gap::new(0, 4, 6), Gap::new(0, 8, 8)], 2);
        assert_eq!(spans(&t), vec![(4, 6)]);
        assert_eq!(spans(&nt), vec![(8, 8)]);
        assert!(t[0].traversable && !nt[0].traversable);
    }

    #[test]
    fn g_min_from_robot_width() {
        assert_eq!(ScanParams::g_min_for(0.6, 0.1), 6);
        assert_eq!(ScanParams::g_min_for(0.7, 0.1), 7);
        assert_eq!(ScanParams::g_min_for(0.61, 0.1), 7);
    }

    fn trav(start: usize, end: usize) -> Gap {
        Gap {
            traversable: true,
            ..Gap::new(1, start, end)
        }
    }

    #[test]
    fn neighbor_group_examples() {
        let anchor = Gap {
            traversable: true,
            ..Gap::new(0, 0, 9)
        };
        let split = neighbor_group(&anchor, &[trav(0, 3), trav(6, 9)], Side::Below);
        assert_eq!(split.neighbors.len(), 2);
        let straight = neighbor_group(&anchor, &[trav(0, 9)], Side::Below);
        assert_eq!(straight.neighbors.len(), 1);
        let short = Gap {
            traversable: true,
            ..Gap::new(0, 0, 4)
        };
        assert!(neighbor_group(&short, &[trav(4, 9)], Side::Below).neighbors.is_empty());
        // non-traversable gaps never join a group
        assert!(neighbor_group(&anchor, &[Gap::new(1, 2, 3)], Side::Below)
            .neighbors
            .is_empty());
    }

    fn params(g_min: usize, g_dep: usize) -> ScanParams {
        ScanParams {
            g_min,
            n_dir: 1,
            f_uk: 1,
            g_dep,
        }
    }

    #[test]
    fn nick_in_wall_is_rejected_by_depth() {
        // a corridor whose lower wall has a one-row notch wide enough to be
        // a traversable gap
        let text = "\
##############
#............#
#............#
#............#
#............#
#............#
#............#
#.........####
#...#.....####
##############";
        let g = load_ascii(text).unwrap();
        assert!(detect_in_frame(&g, &params(2, 5)).is_empty());
        assert!(!detect_in_frame(&g, &params(2, 1)).is_empty());
    }

    #[test]
    fn plus_split_passes_depth() {
        // vertical corridor splitting into two legs, each 6 rows long
        let mut lines = vec!["##############".to_string()];
        for _ in 0..6 {
            lines.push("#............#".into());
        }
        for _ in 0..6 {
            lines.push("#....####....#".into());
        }
        lines.push("##############".into());
        let g = load_ascii(&lines.join("\n")).unwrap();
        let found = detect_in_frame(&g, &params(2, 5));
        assert_eq!(found.len(), 1);
        let (group, deep) = &found[0];
        assert_eq!(group.side, Side::Below);
        assert_eq!(group.anchor.row, 6);
        assert_eq!(deep.len(), 2);
        // legs only 3 rows deep fail at g_dep = 5
        let shallow: Vec<String> = lines[..7]
            .iter()
            .cloned()
            .chain(std::iter::repeat("#....####....#".to_string()).take(3))
            .chain(std::iter::once("##############".to_string()))
            .collect();
        let g = load_ascii(&shallow.join("\n")).unwrap();
        assert!(detect_in_frame(&g, &params(2, 5)).is_empty());
        assert_eq!(detect_in_frame(&g, &params(2, 3)).len(), 1);
    }

    #[test]
    fn all_free_grid_has_no_detections() {
        let g = OccupancyGrid::new(40, 40, 0.1, CellState::Free).unwrap();
        assert!(scan_all_directions(&g, &ScanParams::default(), 1).is_empty());
    }
}
