//! Raster and segment geometry on cell-center coordinates.

use crate::grid::{CellPoint, OccupancyGrid};

/// Every cell whose square the segment between two cell centers touches,
/// including both side cells when the segment passes exactly through a
/// lattice corner. Ordered from `a` to `b`.
pub fn supercover(a: CellPoint, b: CellPoint) -> Vec<CellPoint> {
    let mut out = Vec::with_capacity(((b.i - a.i).abs() + (b.j - a.j).abs() + 1) as usize);
    supercover_each(a, b, |c| {
        out.push(c);
        true
    });
    out
}

/// Visit the [`supercover`] cells in order until `visit` returns false.
/// Returns whether every cell was visited.
pub fn supercover_each(a: CellPoint, b: CellPoint, mut visit: impl FnMut(CellPoint) -> bool) -> bool {
    let (di, dj) = (b.i - a.i, b.j - a.j);
    let (si, sj) = (di.signum(), dj.signum());
    let (ai, aj) = (di.abs(), dj.abs());
    if !visit(a) {
        return false;
    }
    // walk along the major axis; `step` builds a point from (major, minor)
    let (major_len, minor_len, major_step, minor_step, col_major) = if aj >= ai {
        (aj, ai, sj, si, true)
    } else {
        (ai, aj, si, sj, false)
    };
    let make = |u: i32, v: i32| {
        if col_major {
            CellPoint::new(v, u)
        } else {
            CellPoint::new(u, v)
        }
    };
    let (mut u, mut v) = if col_major { (a.j, a.i) } else { (a.i, a.j) };
    let (dd_major, dd_minor) = (2 * major_len, 2 * minor_len);
    let mut error = major_len;
    let mut error_prev = error;
    for _ in 0..major_len {
        u += major_step;
        error += dd_minor;
        if error > dd_major {
            v += minor_step;
            error -= dd_major;
            let total = error + error_prev;
            if total < dd_major {
                if !visit(make(u, v - minor_step)) {
                    return false;
                }
            } else if total > dd_major {
                if !visit(make(u - major_step, v)) {
                    return false;
                }
            } else if !visit(make(u, v - minor_step)) || !visit(make(u - major_step, v)) {
                return false;
            }
        }
        if !visit(make(u, v)) {
            return false;
        }
        error_prev = error;
    }
    true
}

/// 8-connected Bresenham line from `a` to `b`, inclusive.
pub fn bresenham(a: CellPoint, b: CellPoint) -> Vec<CellPoint> {
    let (di, dj) = ((b.i - a.i).abs(), (b.j - a.j).abs());
    let (si, sj) = ((b.i - a.i).signum(), (b.j - a.j).signum());
    let mut err = dj - di;
    let mut p = a;
    let mut out = Vec::with_capacity((di.max(dj) + 1) as usize);
    loop {
        out.push(p);
        if p == b {
            break;
        }
        let e2 = 2 * err;
        if e2 > -di {
            err -= di;
            p.j += sj;
        }
        if e2 < dj {
            err += dj;
            p.i += si;
        }
    }
    out
}

/// True when no supercover cell of the segment is Occupied.
pub fn segment_clear(grid: &OccupancyGrid, a: CellPoint, b: CellPoint) -> bool {
    supercover_each(a, b, |p| !grid.is_occupied(p))
}

fn orient(a: CellPoint, b: CellPoint, c: CellPoint) -> i64 {
    let (abi, abj) = ((b.i - a.i) as i64, (b.j - a.j) as i64);
    let (aci, acj) = ((c.i - a.i) as i64, (c.j - a.j) as i64);
    abi * acj - abj * aci
}

/// Segments cross at a single point interior to both.
pub fn segments_properly_intersect(a: CellPoint, b: CellPoint, c: CellPoint, d: CellPoint) -> bool {
    let o1 = orient(a, b, c).signum();
    let o2 = orient(a, b, d).signum();
    let o3 = orient(c, d, a).signum();
    let o4 = orient(c, d, b).signum();
    o1 * o2 < 0 && o3 * o4 < 0
}

/// Integer point lies on the closed segment.
pub fn on_segment(p: CellPoint, a: CellPoint, b: CellPoint) -> bool {
    orient(a, b, p) == 0
        && p.i >= a.i.min(b.i)
        && p.i <= a.i.max(b.i)
        && p.j >= a.j.min(b.j)
        && p.j <= a.j.max(b.j)
}

/// Area centroid of a polygon given by its vertices (any winding). Falls
/// back to the vertex mean when the area vanishes.
pub fn polygon_centroid(vertices: &[(f64, f64)]) -> Option<(f64, f64)> {
    if vertices.is_empty() {
        return None;
    }
    let n = vertices.len();
    let (mut a, mut cy, mut cx) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let (y0, x0) = vertices[k];
        let (y1, x1) = vertices[(k + 1) % n];
        let cross = x0 * y1 - x1 * y0;
        a += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    if a.abs() < 1e-9 {
        let (sy, sx) = vertices
            .iter()
            .fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
        return Some((sy / n as f64, sx / n as f64));
    }
    Some((cy / (3.0 * a), cx / (3.0 * a)))
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vy, vx) = (b.0 - a.0, b.1 - a.1);
    let (wy, wx) = (p.0 - a.0, p.1 - a.1);
    let len2 = vy * vy + vx * vx;
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((wy * vy + wx * vx) / len2).clamp(0.0, 1.0)
    };
    let (qy, qx) = (a.0 + t * vy, a.1 + t * vx);
    (p.0 - qy).hypot(p.1 - qx)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use super::*;

    /// Closed unit square around `c` intersects segment `a`-`b`, evaluated
    /// exactly in doubled integer coordinates.
    fn touches(a: CellPoint, b: CellPoint, c: CellPoint) -> bool {
        let (ay, ax, by, bx) = (2 * a.i as i64, 2 * a.j as i64, 2 * b.i as i64, 2 * b.j as i64);
        let (lo_y, hi_y, lo_x, hi_x) = (
            2 * c.i as i64 - 1,
            2 * c.i as i64 + 1,
            2 * c.j as i64 - 1,
            2 * c.j as i64 + 1,
        );
        if ay.max(by) < lo_y || ay.min(by) > hi_y || ax.max(bx) < lo_x || ax.min(bx) > hi_x {
            return false;
        }
        let side = |y: i64, x: i64| ((by - ay) * (x - ax) - (bx - ax) * (y - ay)).signum();
        let s = [
            side(lo_y, lo_x),
            side(lo_y, hi_x),
            side(hi_y, lo_x),
            side(hi_y, hi_x),
        ];
        !(s.iter().all(|&v| v > 0) || s.iter().all(|&v| v < 0))
    }

    fn brute_supercover(a: CellPoint, b: CellPoint) -> BTreeSet<CellPoint> {
        let mut out = BTreeSet::new();
        for i in a.i.min(b.i) - 1..=a.i.max(b.i) + 1 {
            for j in a.j.min(b.j) - 1..=a.j.max(b.j) + 1 {
                let c = CellPoint::new(i, j);
                if touches(a, b, c) {
                    out.insert(c);
                }
            }
        }
        out
    }

    #[test]
    fn supercover_diagonal_includes_corner_cells() {
        let cells: BTreeSet<_> = supercover(CellPoint::new(0, 0), CellPoint::new(2, 2))
            .into_iter()
            .collect();
        assert_eq!(cells.len(), 7);
        assert!(cells.contains(&CellPoint::new(0, 1)));
        assert!(cells.contains(&CellPoint::new(1, 0)));
    }

    #[test]
    fn bresenham_is_8_connected() {
        let line = bresenham(CellPoint::new(0, 0), CellPoint::new(3, 7));
        assert_eq!(line.first(), Some(&CellPoint::new(0, 0)));
        assert_eq!(line.last(), Some(&CellPoint::new(3, 7)));
        assert_eq!(line.len(), 8);
        assert!(line.windows(2).all(|w| w[0].chebyshev(w[1]) == 1));
    }

    #[test]
    fn proper_intersection() {
        let p = CellPoint::new;
        assert!(segments_properly_intersect(p(0, 0), p(4, 4), p(0, 4), p(4, 0)));
        assert!(!segments_properly_intersect(p(0, 0), p(0, 4), p(2, 0), p(2, 4)));
        // shared endpoint is not proper
        assert!(!segments_properly_intersect(p(0, 0), p(0, 4), p(0, 4), p(4, 4)));
    }

    #[test]
    fn centroid_of_square() {
        let sq = [(0.0, 0.0), (0.0, 4.0), (4.0, 4.0), (4.0, 0.0)];
        let c = polygon_centroid(&sq).unwrap();
        assert!((c.0 - 2.0).abs() < 1e-12 && (c.1 - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn supercover_matches_brute_force(ai in -12i32..12, aj in -12i32..12, bi in -12i32..12, bj in -12i32..12) {
            let (a, b) = (CellPoint::new(ai, aj), CellPoint::new(bi, bj));
            let fast: BTreeSet<_> = supercover(a, b).into_iter().collect();
            prop_assert_eq!(fast, brute_supercover(a, b));
            let line = supercover(a, b);
            prop_assert!(line.windows(2).all(|w| w[0].chebyshev(w[1]) == 1));
            let inside = |c: &CellPoint| {
                (a.i.min(b.i)..=a.i.max(b.i)).contains(&c.i) && (a.j.min(b.j)..=a.j.max(b.j)).contains(&c.j)
            };
            prop_assert!(line.iter().all(inside));
        }
    }
}
