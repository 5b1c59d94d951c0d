//! Tri-state occupancy grids.
//!
//! Cells are addressed by `(row, col)`; the continuous position of a cell
//! center is `(row as f64, col as f64)`. Anything outside the raster reads
//! as [`CellState::Unknown`].

mod io;
mod rotate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_ascii, load_map, load_pgm_yaml, map_yaml, save_ascii, save_pgm, MapMetadata, DEFAULT_CELL_SIZE};
pub use rotate::{rotate, Affine2, RotatedView};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

impl CellState {
    pub fn is_free(self) -> bool {
        self == CellState::Free
    }

    pub fn is_occupied(self) -> bool {
        self == CellState::Occupied
    }
}

/// Integer cell coordinate. May lie outside a grid while doing geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct CellPoint {
    pub i: i32,
    pub j: i32,
}

impl CellPoint {
    pub const fn new(i: i32, j: i32) -> Self {
        Self { i, j }
    }

    pub fn offset(self, di: i32, dj: i32) -> Self {
        Self::new(self.i + di, self.j + dj)
    }

    pub fn as_f64(self) -> (f64, f64) {
        (self.i as f64, self.j as f64)
    }

    pub fn dist(self, other: CellPoint) -> f64 {
        let di = (self.i - other.i) as f64;
        let dj = (self.j - other.j) as f64;
        di.hypot(dj)
    }

    pub fn chebyshev(self, other: CellPoint) -> i32 {
        (self.i - other.i).abs().max((self.j - other.j).abs())
    }

    /// Nearest cell to a continuous position.
    pub fn round(p: (f64, f64)) -> Self {
        Self::new(p.0.round() as i32, p.1.round() as i32)
    }
}

impl From<[i32; 2]> for CellPoint {
    fn from(v: [i32; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<CellPoint> for [i32; 2] {
    fn from(p: CellPoint) -> Self {
        [p.i, p.j]
    }
}

/// 4-neighborhood offsets, clockwise from north.
pub const N4: [(i32, i32); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];

/// 8-neighborhood offsets, clockwise from north.
pub const N8: [(i32, i32); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    rows: usize,
    cols: usize,
    cell_size: f64,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    pub fn new(rows: usize, cols: usize, cell_size: f64, fill: CellState) -> Result<Self> {
        Self::from_cells(rows, cols, cell_size, vec![fill; rows * cols])
    }

    pub fn from_cells(
        rows: usize,
        cols: usize,
        cell_size: f64,
        cells: Vec<CellState>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Precondition(format!(
                "grid must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::Precondition(format!(
                "cell size must be positive, got {cell_size}"
            )));
        }
        if cells.len() != rows * cols {
            return Err(Error::Precondition(format!(
                "expected {} cells, got {}",
                rows * cols,
                cells.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            cell_size,
            cells,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn row(&self, i: usize) -> &[CellState] {
        &self.cells[i * self.cols..(i + 1) * self.cols]
    }

    pub fn contains(&self, p: CellPoint) -> bool {
        p.i >= 0 && p.j >= 0 && (p.i as usize) < self.rows && (p.j as usize) < self.cols
    }

    pub fn index(&self, p: CellPoint) -> Option<usize> {
        self.contains(p)
            .then(|| p.i as usize * self.cols + p.j as usize)
    }

    pub fn point(&self, index: usize) -> CellPoint {
        CellPoint::new((index / self.cols) as i32, (index % self.cols) as i32)
    }

    /// State at `p`; outside the raster is `Unknown`.
    pub fn state(&self, p: CellPoint) -> CellState {
        match self.index(p) {
            Some(k) => self.cells[k],
            None => CellState::Unknown,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> CellState {
        self.cells[i * self.cols + j]
    }

    pub fn is_free(&self, p: CellPoint) -> bool {
        self.state(p).is_free()
    }

    pub fn is_occupied(&self, p: CellPoint) -> bool {
        self.state(p).is_occupied()
    }

    /// Free cell with an occupied 4-neighbor.
    pub fn is_wall_adjacent(&self, p: CellPoint) -> bool {
        self.is_free(p)
            && N4
                .iter()
                .any(|&(di, dj)| self.is_occupied(p.offset(di, dj)))
    }

    pub fn set(&mut self, p: CellPoint, state: CellState) {
        if let Some(k) = self.index(p) {
            self.cells[k] = state;
        }
    }

    pub fn set_at(&mut self, i: usize, j: usize, state: CellState) {
        self.cells[i * self.cols + j] = state;
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    pub fn iter_points(&self) -> impl Iterator<Item = (CellPoint, CellState)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(move |(k, &s)| (self.point(k), s))
    }

    /// Free cells with at least one in-grid 4-neighbor that is Unknown.
    ///
    /// The implicit Unknown surrounding the raster does not count.
    pub fn frontier_cells(&self) -> Vec<CellPoint> {
        self.iter_points()
            .filter(|&(p, s)| s.is_free() && self.is_frontier_free(p))
            .map(|(p, _)| p)
            .collect()
    }

    fn is_frontier_free(&self, p: CellPoint) -> bool {
        N4.iter().any(|&(di, dj)| {
            let q = p.offset(di, dj);
            self.contains(q) && self.state(q) == CellState::Unknown
        })
    }

    /// Same grid with an extra ring of `state` cells around it.
    pub fn padded(&self, width: usize, state: CellState) -> Self {
        let rows = self.rows + 2 * width;
        let cols = self.cols + 2 * width;
        let mut cells = vec![state; rows * cols];
        for i in 0..self.rows {
            let dst = (i + width) * cols + width;
            cells[dst..dst + self.cols].copy_from_slice(self.row(i));
        }
        Self {
            rows,
            cols,
            cell_size: self.cell_size,
            cells,
        }
    }
}
