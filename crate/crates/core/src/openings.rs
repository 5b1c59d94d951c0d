//! Directed openings: wall-to-wall segments whose left side faces an
//! intersection, seeded from gap detections and shortened by alternating
//! endpoint moves along the walls.

use serde::{Deserialize, Serialize};

use crate::contour::{PosRef, WallContours};
use crate::gaps::{GapDetection, Seed};
use crate::geometry::segment_clear;
use crate::grid::{CellPoint, OccupancyGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Start,
    End,
}

impl Endpoint {
    pub fn other(self) -> Self {
        match self {
            Endpoint::Start => Endpoint::End,
            Endpoint::End => Endpoint::Start,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Opening {
    pub id: u32,
    pub start: CellPoint,
    pub end: CellPoint,
    /// Created by missing-opening recovery rather than by a detection.
    #[serde(default)]
    pub synthesized: bool,
}

impl Opening {
    pub fn new(id: u32, start: CellPoint, end: CellPoint) -> Self {
        Self {
            id,
            start,
            end,
            synthesized: false,
        }
    }

    pub fn length(&self) -> f64 {
        self.start.dist(self.end)
    }

    pub fn point(&self, which: Endpoint) -> CellPoint {
        match which {
            Endpoint::Start => self.start,
            Endpoint::End => self.end,
        }
    }

    pub fn set_point(&mut self, which: Endpoint, p: CellPoint) {
        match which {
            Endpoint::Start => self.start = p,
            Endpoint::End => self.end = p,
        }
    }

    /// `end - start` as (di, dj).
    pub fn direction(&self) -> (f64, f64) {
        ((self.end.i - self.start.i) as f64, (self.end.j - self.start.j) as f64)
    }

    /// Left normal of `start -> end`, pointing into the intersection.
    pub fn normal(&self) -> (f64, f64) {
        let (di, dj) = self.direction();
        (-dj, di)
    }

    pub fn midpoint(&self) -> (f64, f64) {
        (
            (self.start.i + self.end.i) as f64 / 2.0,
            (self.start.j + self.end.j) as f64 / 2.0,
        )
    }

    pub fn flipped(&self) -> Self {
        Self {
            start: self.end,
            end: self.start,
            ..*self
        }
    }

    /// Contour position of an endpoint: the start sits on the wall behind
    /// it, the end on the wall ahead of it.
    pub fn position(&self, contours: &WallContours, which: Endpoint) -> Option<PosRef> {
        let (di, dj) = self.direction();
        match which {
            Endpoint::Start => contours.best_position(self.start, (-di, -dj)),
            Endpoint::End => contours.best_position(self.end, (di, dj)),
        }
    }

    /// Both endpoints are wall-adjacent Free cells, distinct, and the
    /// segment between them touches no Occupied cell.
    pub fn is_valid(&self, grid: &OccupancyGrid) -> bool {
        self.start != self.end
            && grid.is_wall_adjacent(self.start)
            && grid.is_wall_adjacent(self.end)
            && segment_clear(grid, self.start, self.end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpeningSearchParams {
    pub d_w: f64,
    /// Wall positions considered on each side of an endpoint per sweep.
    pub wall_cap: usize,
    pub max_iterations: usize,
    /// Seed endpoints snap to wall cells within this Chebyshev radius.
    pub snap_radius: i32,
    /// Endpoints on one wall loop must be at least this many times the
    /// opening length apart along the wall, so that an opening never just
    /// cuts a corner.
    pub separation_ratio: f64,
}

impl Default for OpeningSearchParams {
    fn default() -> Self {
        Self {
            d_w: 0.5,
            wall_cap: 64,
            max_iterations: 16,
            snap_radius: 2,
            separation_ratio: 2.0,
        }
    }
}

/// Wall steps between the endpoints of `o` the short way round, or `None`
/// when they lie on different wall loops.
pub fn wall_separation(contours: &WallContours, o: &Opening) -> Option<usize> {
    let s = o.position(contours, Endpoint::Start)?;
    let e = o.position(contours, Endpoint::End)?;
    if s.contour != e.contour {
        return None;
    }
    let len = contours.loop_len(s.contour);
    let f = (e.pos as usize + len - s.pos as usize) % len;
    Some(f.min(len - f))
}

/// The endpoints are far enough apart along the wall.
pub fn is_separated(contours: &WallContours, o: &Opening, ratio: f64) -> bool {
    wall_separation(contours, o).is_none_or(|d| d as f64 >= ratio * o.length())
}

/// Nearest wall-adjacent Free cell to a continuous point.
pub fn snap_to_wall(grid: &OccupancyGrid, p: (f64, f64), radius: i32) -> Option<CellPoint> {
    let c = CellPoint::round(p);
    let mut best: Option<(f64, CellPoint)> = None;
    for di in -radius..=radius {
        for dj in -radius..=radius {
            let q = c.offset(di, dj);
            if !grid.is_wall_adjacent(q) {
                continue;
            }
            let d = (q.i as f64 - p.0).hypot(q.j as f64 - p.1);
            if best.is_none_or(|(bd, bq)| d < bd - 1e-9 || (d < bd + 1e-9 && q < bq)) {
                best = Some((d, q));
            }
        }
    }
    best.map(|(_, q)| q)
}

fn seed_one(grid: &OccupancyGrid, seed: &Seed, radius: i32) -> Option<(CellPoint, CellPoint)> {
    let s = snap_to_wall(grid, seed.start, radius)?;
    let e = snap_to_wall(grid, seed.end, radius)?;
    Some((s, e))
}

/// One opening per seed of the detection, endpoints snapped to the walls.
/// A detection with any unsnappable seed is discarded as a whole. Ids are
/// taken from `next_id`.
pub fn seed_opening(
    grid: &OccupancyGrid,
    detection: &GapDetection,
    params: &OpeningSearchParams,
    next_id: &mut u32,
) -> Vec<Opening> {
    let Some(pairs) = detection
        .seeds
        .iter()
        .map(|s| seed_one(grid, s, params.snap_radius))
        .collect::<Option<Vec<_>>>()
    else {
        return Vec::new();
    };
    pairs
        .into_iter()
        .filter(|(s, e)| s != e)
        .map(|(s, e)| {
            let o = Opening::new(*next_id, s, e);
            *next_id += 1;
            o
        })
        .collect()
}

/// Wall cells reachable from `r` within `cap` steps each way, ordered by
/// contour offset.
pub fn wall_point_set(contours: &WallContours, r: PosRef, cap: usize) -> Vec<CellPoint> {
    let mut out: Vec<CellPoint> = Vec::new();
    for (_, q) in contours.neighborhood(r, cap) {
        let c = contours.get(q).cell;
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    out
}

fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

/// Alternating coordinate descent on the segment length. Returns `None`
/// when no clear segment is reachable from the seed.
pub fn refine_opening(
    grid: &OccupancyGrid,
    contours: &WallContours,
    seed: &Opening,
    params: &OpeningSearchParams,
) -> Option<Opening> {
    let n0 = seed.normal();
    let mut cur = *seed;
    let mut clear = segment_clear(grid, cur.start, cur.end)
        && is_separated(contours, &cur, params.separation_ratio);
    for _ in 0..params.max_iterations.max(1) {
        let mut moved = false;
        for which in [Endpoint::Start, Endpoint::End] {
            let fixed = cur.point(which.other());
            let origin = seed.point(which);
            let r = cur.position(contours, which)?;
            let mut best: Option<(f64, f64, CellPoint)> = if clear {
                Some((cur.length(), 0.0, cur.point(which)))
            } else {
                None
            };
            let mut improved = false;
            for c in wall_point_set(contours, r, params.wall_cap) {
                if c == fixed || c == cur.point(which) {
                    continue;
                }
                let mut cand = cur;
                cand.set_point(which, c);
                if dot(cand.normal(), n0) <= 0.0 {
                    continue;
                }
                let len = cand.length();
                let near = c.dist(origin);
                let better = match best {
                    None => true,
                    Some((bl, bn, _)) => {
                        len < bl - 1e-9 || (improved && len < bl + 1e-9 && near < bn - 1e-9)
                    }
                };
                if better
                    && is_separated(contours, &cand, params.separation_ratio)
                    && segment_clear(grid, c, fixed)
                {
                    best = Some((len, near, c));
                    improved = true;
                }
            }
            if improved {
                let (_, _, c) = best.expect("improved implies a candidate");
                cur.set_point(which, c);
                clear = true;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    (clear && cur.is_valid(grid)).then_some(cur)
}
