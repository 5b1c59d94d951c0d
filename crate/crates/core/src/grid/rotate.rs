use super::{CellPoint, CellState, OccupancyGrid};

const SNAP_EPS: f64 = 1e-9;

/// Affine map `(row, col) -> (row', col')`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine2 {
    pub m: [[f64; 2]; 2],
    pub t: [f64; 2],
}

impl Affine2 {
    pub const IDENTITY: Affine2 = Affine2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
        t: [0.0, 0.0],
    };

    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        (
            self.m[0][0] * p.0 + self.m[0][1] * p.1 + self.t[0],
            self.m[1][0] * p.0 + self.m[1][1] * p.1 + self.t[1],
        )
    }

    pub fn inverse(&self) -> Affine2 {
        let [[a, b], [c, d]] = self.m;
        let det = a * d - b * c;
        let inv = [[d / det, -b / det], [-c / det, a / det]];
        let t = [
            -(inv[0][0] * self.t[0] + inv[0][1] * self.t[1]),
            -(inv[1][0] * self.t[0] + inv[1][1] * self.t[1]),
        ];
        Affine2 { m: inv, t }
    }
}

/// A resampled copy of a grid, rotated about its center.
#[derive(Clone, Debug)]
pub struct RotatedView {
    pub grid: OccupancyGrid,
    pub angle: f64,
    /// Rotated cell coordinates to original continuous coordinates.
    pub to_original: Affine2,
}

impl RotatedView {
    pub fn original_point(&self, p: CellPoint) -> (f64, f64) {
        self.to_original.apply(p.as_f64())
    }

    /// Map a rotated-frame cell back and snap to the nearest original cell.
    pub fn snap_to_original(&self, p: CellPoint) -> CellPoint {
        CellPoint::round(self.original_point(p))
    }
}

fn clean_trig(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else if (v.abs() - 1.0).abs() < 1e-12 {
        v.signum()
    } else {
        v
    }
}

/// `floor` for the small magnitudes seen in raster coordinates.
fn floor_i(v: f64) -> i64 {
    let t = v as i64;
    t - ((t as f64) > v) as i64
}

fn snap(v: f64) -> f64 {
    let r = floor_i(v + 0.5) as f64;
    if (v - r).abs() < SNAP_EPS {
        r
    } else {
        v
    }
}

/// Columns `q` of a destination row whose preimage `base + q * step` may
/// land within `(-1, limit)`.
fn span(base: f64, step: f64, limit: f64, cols: usize) -> (usize, usize) {
    if step.abs() < 1e-12 {
        return if base > -1.0 - SNAP_EPS && base < limit + SNAP_EPS {
            (0, cols)
        } else {
            (0, 0)
        };
    }
    let (a, b) = ((-1.0 - base) / step, (limit - base) / step);
    let (lo, hi) = (a.min(b), a.max(b));
    let lo = (floor_i(lo) - 1).clamp(0, cols as i64) as usize;
    let hi = (floor_i(hi) + 2).clamp(0, cols as i64) as usize;
    (lo, hi.max(lo))
}

/// Rotate `grid` by `angle` radians around its center.
///
/// The destination raster is the bounding box of the rotated source. Each
/// destination cell looks at the (up to four) source cells nearest its
/// preimage: any Occupied wins, then any Free, otherwise Unknown. Samples
/// falling outside the source read as Unknown.
pub fn rotate(grid: &OccupancyGrid, angle: f64) -> RotatedView {
    let (s, c) = angle.sin_cos();
    let (s, c) = (clean_trig(s), clean_trig(c));
    if s == 0.0 && c == 1.0 {
        return RotatedView {
            grid: grid.clone(),
            angle,
            to_original: Affine2::IDENTITY,
        };
    }

    let (src_rows, src_cols) = (grid.rows() as f64, grid.cols() as f64);
    let ext_rows = s.abs() * src_cols + c.abs() * src_rows;
    let ext_cols = c.abs() * src_cols + s.abs() * src_rows;
    let rows = ((ext_rows - SNAP_EPS).ceil() as usize).max(1);
    let cols = ((ext_cols - SNAP_EPS).ceil() as usize).max(1);

    let (cy, cx) = ((src_rows - 1.0) / 2.0, (src_cols - 1.0) / 2.0);
    let (dcy, dcx) = ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0);
    let to_original = Affine2 {
        m: [[c, -s], [s, c]],
        t: [cy - c * dcy + s * dcx, cx - s * dcy - c * dcx],
    };

    let src = grid.cells();
    let (sr, sc) = (grid.rows() as i64, grid.cols() as i64);
    let mut cells = vec![CellState::Unknown; rows * cols];
    let [[_, m01], [_, m11]] = to_original.m;
    for p in 0..rows {
        let (y0, x0) = to_original.apply((p as f64, 0.0));
        let (a, b) = span(y0, m01, src_rows, cols);
        let (e, f) = span(x0, m11, src_cols, cols);
        let (lo, hi) = (a.max(e), b.min(f));
        let row = &mut cells[p * cols..(p + 1) * cols];
        for q in lo..hi.max(lo) {
            let (y, x) = (y0 + m01 * q as f64, x0 + m11 * q as f64);
            row[q] = sample(src, sr, sc, snap(y), snap(x));
        }
    }
    RotatedView {
        grid: OccupancyGrid::from_cells(rows, cols, grid.cell_size(), cells)
            .expect("rotated dimensions are positive"),
        angle,
        to_original,
    }
}

fn sample(src: &[CellState], rows: i64, cols: i64, y: f64, x: f64) -> CellState {
    let (y0, x0) = (floor_i(y), floor_i(x));
    let y1 = if y0 as f64 == y { y0 } else { y0 + 1 };
    let x1 = if x0 as f64 == x { x0 } else { x0 + 1 };
    if y1 < 0 || x1 < 0 || y0 >= rows || x0 >= cols {
        return CellState::Unknown;
    }
    let mut free = false;
    for yi in y0.max(0)..=y1.min(rows - 1) {
        for xi in x0.max(0)..=x1.min(cols - 1) {
            match src[(yi * cols + xi) as usize] {
                CellState::Occupied => return CellState::Occupied,
                CellState::Free => free = true,
                CellState::Unknown => {}
            }
        }
    }
    if free {
        CellState::Free
    } else {
        CellState::Unknown
    }
}
