//! Deterministic synthetic maps for tests, benchmarks and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{CellState, OccupancyGrid, DEFAULT_CELL_SIZE};

/// Rectangle painter over an occupied grid.
#[derive(Clone, Debug)]
pub struct Canvas {
    grid: OccupancyGrid,
}

impl Canvas {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            grid: OccupancyGrid::new(rows, cols, DEFAULT_CELL_SIZE, CellState::Occupied)
                .expect("positive dimensions"),
        }
    }

    /// Paint rows `i0..i1`, columns `j0..j1` (half-open, clipped).
    pub fn rect(&mut self, i0: usize, j0: usize, i1: usize, j1: usize, state: CellState) -> &mut Self {
        for i in i0..i1.min(self.grid.rows()) {
            for j in j0..j1.min(self.grid.cols()) {
                self.grid.set_at(i, j, state);
            }
        }
        self
    }

    pub fn free(&mut self, i0: usize, j0: usize, i1: usize, j1: usize) -> &mut Self {
        self.rect(i0, j0, i1, j1, CellState::Free)
    }

    pub fn wall(&mut self, i0: usize, j0: usize, i1: usize, j1: usize) -> &mut Self {
        self.rect(i0, j0, i1, j1, CellState::Occupied)
    }

    pub fn finish(self) -> OccupancyGrid {
        self.grid
    }
}

/// Four corridors of `width` meeting at a square, each `arm` cells long.
pub fn plus(arm: usize, width: usize) -> OccupancyGrid {
    let n = 2 * arm + width + 2;
    let mut c = Canvas::new(n, n);
    c.free(1 + arm, 1, 1 + arm + width, n - 1);
    c.free(1, 1 + arm, n - 1, 1 + arm + width);
    c.finish()
}

/// A horizontal bar with a stem of the same width hanging from its middle.
pub fn tee(arm: usize, width: usize) -> OccupancyGrid {
    let cols = 2 * arm + width + 2;
    let rows = width + arm + 2;
    let mut c = Canvas::new(rows, cols);
    c.free(1, 1, 1 + width, cols - 1);
    c.free(1, 1 + arm, rows - 1, 1 + arm + width);
    c.finish()
}

/// Closed straight corridor.
pub fn corridor(length: usize, width: usize) -> OccupancyGrid {
    let mut c = Canvas::new(width + 2, length + 2);
    c.free(1, 1, width + 1, length + 1);
    c.finish()
}

/// A corridor with a room off each side, joined through doorways, so the
/// stretch between the two doorways is a path between two junctions.
pub fn corridor_between_rooms() -> OccupancyGrid {
    let (w, room, door) = (12, 36, 10);
    let rows = 2 * room + w + 4;
    let cols = 160;
    let ci = room + 2;
    let mut c = Canvas::new(rows, cols);
    c.free(ci, 1, ci + w, cols - 1);
    // room above, left third
    c.free(1, 20, 1 + room, 20 + room);
    c.free(1 + room, 20 + (room - door) / 2, ci, 20 + (room + door) / 2);
    // room below, right third
    let (rj, ri) = (cols - 20 - room, ci + w + 1);
    c.free(ri, rj, ri + room, rj + room);
    c.free(ci + w, rj + (room - door) / 2, ri, rj + (room + door) / 2);
    c.finish()
}

fn doorway(c: &mut Canvas, rng: &mut ChaCha8Rng, i0: usize, j0: usize, horizontal: bool, len: usize) {
    let door = 10.min(len.saturating_sub(4)).max(8);
    let off = rng.gen_range(2..=len.saturating_sub(door + 2).max(2));
    if horizontal {
        c.free(i0, j0 + off, i0 + 1, j0 + off + door);
    } else {
        c.free(i0 + off, j0, i0 + off + door, j0 + 1);
    }
}

/// Office floor of roughly `300 x 300` cells: two horizontal corridors
/// joined by a vertical one, rooms along both corridors with one door each,
/// and scattered clutter.
pub fn office(seed: u64) -> OccupancyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 300;
    let w = 12;
    let mut c = Canvas::new(n, n);
    let corridors = [80usize, 200];
    for &ci in &corridors {
        c.free(ci, 10, ci + w, n - 10);
    }
    c.free(80, 144, 212, 144 + w);

    // rooms: above the first corridor, between the corridors, below the second
    let bands = [(14usize, 79usize), (93, 140), (141, 199), (213, 290)];
    for (k, &(top, bottom)) in bands.iter().enumerate() {
        let mut j = 12;
        while j + 40 <= n - 12 {
            let width = rng.gen_range(38..=52).min(n - 12 - j);
            let (j0, j1) = (j, j + width - 1);
            if j1 >= 143 && j0 <= 157 {
                j = 158;
                continue;
            }
            c.free(top, j0, bottom, j1);
            // door into the adjacent corridor
            match k {
                0 => doorway(&mut c, &mut rng, bottom, j0, true, j1 - j0),
                1 => doorway(&mut c, &mut rng, 92, j0, true, j1 - j0),
                2 => doorway(&mut c, &mut rng, 199, j0, true, j1 - j0),
                _ => doorway(&mut c, &mut rng, 212, j0, true, j1 - j0),
            }
            // clutter: a few wall-attached boxes and a free-standing one
            for _ in 0..rng.gen_range(1..=3) {
                let h = rng.gen_range(2..=4);
                let wd = rng.gen_range(2..=5);
                let ii = if rng.gen_bool(0.5) { top } else { bottom - h };
                let jj = rng.gen_range(j0 + 2..j1.saturating_sub(wd + 2).max(j0 + 3));
                c.wall(ii, jj, ii + h, jj + wd);
            }
            if bottom - top > 30 && rng.gen_bool(0.5) {
                let ii = rng.gen_range(top + 10..bottom - 12);
                let jj = rng.gen_range(j0 + 10..j1 - 12);
                c.wall(ii, jj, ii + 2, jj + 2);
            }
            j = j1 + 2;
        }
    }
    c.finish()
}

/// Corridor lattice with rooms in the blocks, sized `n x n`.
pub fn campus(seed: u64, n: usize) -> OccupancyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 12;
    let pitch = 110;
    let mut c = Canvas::new(n, n);
    let mut lines = Vec::new();
    let mut p = 20;
    while p + w + 20 < n {
        lines.push(p);
        p += pitch;
    }
    for &l in &lines {
        c.free(l, 10, l + w, n - 10);
        c.free(10, l, n - 10, l + w);
    }
    for win in lines.windows(2) {
        for win2 in lines.windows(2) {
            // one-cell walls around each block, two rooms per block
            let (i0, i1) = (win[0] + w + 1, win[1] - 1);
            let (j0, j1) = (win2[0] + w + 1, win2[1] - 1);
            let mid = (i0 + i1) / 2;
            c.free(i0, j0, mid, j1);
            c.free(mid + 1, j0, i1, j1);
            doorway(&mut c, &mut rng, i0 - 1, j0, true, j1 - j0);
            doorway(&mut c, &mut rng, i1, j0, true, j1 - j0);
            doorway(&mut c, &mut rng, i0, j0 - 1, false, mid - i0);
        }
    }
    c.finish()
}

/// Random corridor network: a few horizontal and vertical corridors of
/// random width crossing each other.
pub fn random_junctions(seed: u64, n: usize) -> OccupancyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Canvas::new(n, n);
    let count = rng.gen_range(2..=3);
    let place = |c: &mut Canvas, rng: &mut ChaCha8Rng, horizontal: bool| {
        let w = rng.gen_range(8..=14);
        let at = rng.gen_range(12..n - w - 12);
        let (a, b) = (rng.gen_range(2..n / 4), rng.gen_range(3 * n / 4..n - 2));
        if horizontal {
            c.free(at, a, at + w, b);
        } else {
            c.free(a, at, b, at + w);
        }
    };
    for _ in 0..count {
        place(&mut c, &mut rng, true);
        place(&mut c, &mut rng, false);
    }
    c.finish()
}

/// Range-sensor artifacts typical of a SLAM-built grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorNoise {
    /// Chance that a Free cell touching a wall becomes Occupied.
    pub wall_roughness: f64,
    /// Occupied specks per Free cell.
    pub speckle: f64,
    /// Largest speck side, in cells.
    pub speck_size: usize,
    /// Single Unknown cells per Free cell.
    pub dropout: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self {
            wall_roughness: 0.15,
            speckle: 0.002,
            speck_size: 1,
            dropout: 0.002,
        }
    }
}

/// Apply `noise` to a copy of `grid`. Walls only ever grow, so no new
/// openings appear between separate spaces.
pub fn with_sensor_noise(grid: &OccupancyGrid, seed: u64, noise: &SensorNoise) -> OccupancyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = grid.clone();
    let free: Vec<(usize, usize)> = (0..grid.rows())
        .flat_map(|i| (0..grid.cols()).map(move |j| (i, j)))
        .filter(|&(i, j)| grid.at(i, j) == CellState::Free)
        .collect();
    for &(i, j) in &free {
        let p = crate::grid::CellPoint::new(i as i32, j as i32);
        if grid.is_wall_adjacent(p) && rng.gen_bool(noise.wall_roughness) {
            out.set_at(i, j, CellState::Occupied);
        }
    }
    let specks = (free.len() as f64 * noise.speckle).round() as usize;
    for _ in 0..specks {
        let (i, j) = free[rng.gen_range(0..free.len())];
        let side = noise.speck_size.max(1);
        let (h, w) = (rng.gen_range(1..=side), rng.gen_range(1..=side));
        for (ii, jj) in (i..i + h).flat_map(|ii| (j..j + w).map(move |jj| (ii, jj))) {
            if ii < grid.rows() && jj < grid.cols() && grid.at(ii, jj) == CellState::Free {
                out.set_at(ii, jj, CellState::Occupied);
            }
        }
    }
    let holes = (free.len() as f64 * noise.dropout).round() as usize;
    for _ in 0..holes {
        let (i, j) = free[rng.gen_range(0..free.len())];
        if out.at(i, j) == CellState::Free {
            out.set_at(i, j, CellState::Unknown);
        }
    }
    out
}

/// A room split by a wall with one doorway of `width` cells.
#[derive(Clone, Debug)]
pub struct DoorwayScene {
    pub grid: OccupancyGrid,
    /// Row of the dividing wall's first layer.
    pub wall_row: usize,
    pub wall_thickness: usize,
    pub door_start: usize,
    pub door_width: usize,
}

pub fn doorway_scene(seed: u64) -> DoorwayScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.gen_range(24..=36);
    let cols = rng.gen_range(30..=48);
    let thickness = rng.gen_range(1..=3);
    let door_width = rng.gen_range(7..=12);
    let wall_row = rng.gen_range(10..rows - 10 - thickness);
    let door_start = rng.gen_range(5..cols - 5 - door_width);
    let mut c = Canvas::new(rows, cols);
    c.free(1, 1, rows - 1, cols - 1);
    c.wall(wall_row, 1, wall_row + thickness, cols - 1);
    c.free(wall_row, door_start, wall_row + thickness, door_start + door_width);
    DoorwayScene {
        grid: c.finish(),
        wall_row,
        wall_thickness: thickness,
        door_start,
        door_width,
    }
}

/// Random tri-state blobs for filter property tests.
pub fn random_grid(seed: u64, rows: usize, cols: usize) -> OccupancyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Canvas::new(rows, cols);
    c.free(1, 1, rows - 1, cols - 1);
    for _ in 0..rng.gen_range(3..12) {
        let (h, w) = (rng.gen_range(1..8), rng.gen_range(1..8));
        let (i, j) = (rng.gen_range(0..rows - h), rng.gen_range(0..cols - w));
        let state = if rng.gen_bool(0.7) {
            CellState::Occupied
        } else {
            CellState::Unknown
        };
        c.rect(i, j, i + h, j + w, state);
    }
    for _ in 0..rng.gen_range(0..40) {
        let (i, j) = (rng.gen_range(0..rows), rng.gen_range(0..cols));
        let state = match rng.gen_range(0..3) {
            0 => CellState::Unknown,
            1 => CellState::Occupied,
            _ => CellState::Free,
        };
        c.rect(i, j, i + 1, j + 1, state);
    }
    c.finish()
}
