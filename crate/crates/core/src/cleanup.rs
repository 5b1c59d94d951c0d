//! Overlap resolution and duplicate removal for refined openings.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::contour::{Direction, WallContours};
use crate::geometry::{segments_properly_intersect, supercover, supercover_each};
use crate::grid::{CellPoint, OccupancyGrid};
use crate::openings::{Endpoint, Opening};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleanupParams {
    /// Contour steps searched when sliding an endpoint off an overlap.
    pub s_o: usize,
    /// Contour steps searched for a duplicate's endpoints.
    pub s_c: usize,
    pub d_w: f64,
}

impl Default for CleanupParams {
    fn default() -> Self {
        Self {
            s_o: 600,
            s_c: 50,
            d_w: 0.5,
        }
    }
}

fn bbox_disjoint(a: &Opening, b: &Opening) -> bool {
    let (a_lo_i, a_hi_i) = (a.start.i.min(a.end.i), a.start.i.max(a.end.i));
    let (a_lo_j, a_hi_j) = (a.start.j.min(a.end.j), a.start.j.max(a.end.j));
    let (b_lo_i, b_hi_i) = (b.start.i.min(b.end.i), b.start.i.max(b.end.i));
    let (b_lo_j, b_hi_j) = (b.start.j.min(b.end.j), b.start.j.max(b.end.j));
    a_hi_i < b_lo_i || b_hi_i < a_lo_i || a_hi_j < b_lo_j || b_hi_j < a_lo_j
}

/// The segments cross properly or their supercovers share a cell.
pub fn openings_overlap(o1: &Opening, o2: &Opening) -> bool {
    if bbox_disjoint(o1, o2) {
        return false;
    }
    if segments_properly_intersect(o1.start, o1.end, o2.start, o2.end) {
        return true;
    }
    // supercover cells stay inside their endpoints' box
    let (a, b) = (bbox(o1, 0), bbox(o2, 0));
    let shared = (a.0.max(b.0), a.1.max(b.1), a.2.min(b.2), a.3.min(b.3));
    let inside = |c: CellPoint| c.i >= shared.0 && c.j >= shared.1 && c.i <= shared.2 && c.j <= shared.3;
    let mut cells = Vec::new();
    supercover_each(o1.start, o1.end, |c| {
        if inside(c) {
            cells.push(c);
        }
        true
    });
    !supercover_each(o2.start, o2.end, |c| !(inside(c) && cells.contains(&c)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// No endpoint of the other opening on either wall.
    Disjoint,
    /// One endpoint on the start wall.
    StartWall,
    /// One endpoint on the end wall.
    EndWall,
    /// Endpoints on both walls.
    BothWalls,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum CleanupAction {
    Dropped { id: u32, reason: String },
    Moved {
        id: u32,
        endpoint: Endpoint,
        from: CellPoint,
        to: CellPoint,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleanupEvent {
    pub pair: (u32, u32),
    pub scenario: Option<Scenario>,
    #[serde(flatten)]
    pub action: CleanupAction,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Resolution {
    Drop(u32),
    Replace(Opening),
}

/// Signed contour offsets (within `h`) at which `cell` appears around the
/// endpoint of `o` on its wall. Smallest magnitude first.
fn wall_offset(
    contours: &WallContours,
    o: &Opening,
    which: Endpoint,
    cell: CellPoint,
    h: usize,
) -> Option<i64> {
    let r = o.position(contours, which)?;
    contours.neighborhood_offset(r, h, cell)
}

fn longer(o1: &Opening, o2: &Opening) -> u32 {
    let k1 = (o1.length(), o1.id);
    let k2 = (o2.length(), o2.id);
    if k1.partial_cmp(&k2) == Some(std::cmp::Ordering::Greater) {
        o1.id
    } else {
        o2.id
    }
}

/// Settle one overlapping pair by sliding an endpoint of `o1` along its
/// wall past `o2`'s endpoint, or by dropping the longer opening.
pub fn resolve_overlap(
    grid: &OccupancyGrid,
    contours: &WallContours,
    o1: &Opening,
    o2: &Opening,
    params: &CleanupParams,
) -> (Resolution, CleanupEvent) {
    resolve_overlap_among(grid, contours, o1, o2, |_| Vec::new(), params)
}

/// [`resolve_overlap`], also rejecting moves that make `o1` overlap any
/// other opening it did not overlap before. `others(b)` returns at least
/// the openings whose endpoint box meets `b`.
pub fn resolve_overlap_among(
    grid: &OccupancyGrid,
    contours: &WallContours,
    o1: &Opening,
    o2: &Opening,
    others: impl Fn(BBox) -> Vec<Opening>,
    params: &CleanupParams,
) -> (Resolution, CleanupEvent) {
    let pair = (o1.id.min(o2.id), o1.id.max(o2.id));
    let drop = |scenario: Option<Scenario>, reason: &str| {
        let id = longer(o1, o2);
        (
            Resolution::Drop(id),
            CleanupEvent {
                pair,
                scenario,
                action: CleanupAction::Dropped {
                    id,
                    reason: reason.to_string(),
                },
            },
        )
    };

    let on_wall = |which: Endpoint| -> Option<i64> {
        [o2.start, o2.end]
            .into_iter()
            .filter_map(|c| wall_offset(contours, o1, which, c, params.s_o))
            .min_by_key(|off| (off.abs(), *off))
    };
    let (hs, he) = (on_wall(Endpoint::Start), on_wall(Endpoint::End));
    let (scenario, which, h) = match (hs, he) {
        (None, None) => return drop(Some(Scenario::Disjoint), "no shared wall"),
        (Some(h), None) => (Scenario::StartWall, Endpoint::Start, h),
        (None, Some(h)) => (Scenario::EndWall, Endpoint::End, h),
        (Some(h1), Some(h2)) => {
            if h1.abs() <= h2.abs() {
                (Scenario::BothWalls, Endpoint::Start, h1)
            } else {
                (Scenario::BothWalls, Endpoint::End, h2)
            }
        }
    };

    let fixed = o1.point(which.other());
    if supercover(o2.start, o2.end).contains(&fixed) {
        return drop(Some(scenario), "fixed endpoint inside the other opening");
    }
    let Some(r) = o1.position(contours, which) else {
        return drop(Some(scenario), "endpoint off the wall");
    };
    let hood: HashMap<i64, CellPoint> = contours
        .neighborhood(r, params.s_o)
        .into_iter()
        .map(|(off, q)| (off, contours.get(q).cell))
        .collect();
    let reach = hood.values().fold(bbox(o1, 1), |b, c| {
        (b.0.min(c.i - 1), b.1.min(c.j - 1), b.2.max(c.i + 1), b.3.max(c.j + 1))
    });
    let nearby = others(reach);
    let clear_before: Vec<&Opening> = nearby
        .iter()
        .filter(|x| x.id != o1.id && x.id != o2.id)
        .filter(|x| boxes_meet(reach, bbox(x, 0)) && !openings_overlap(o1, x))
        .collect();
    let n1 = o1.normal();
    let from = o1.point(which);
    let s_o = params.s_o as i64;
    for g in 1..=s_o {
        let mut cands: Vec<(f64, CellPoint)> = [h + g, h - g]
            .into_iter()
            .filter_map(|off| hood.get(&off).copied())
            .filter(|&c| c != fixed)
            .map(|c| (c.dist(fixed), c))
            .collect();
        if cands.is_empty() && (h + g).abs() > s_o && (h - g).abs() > s_o {
            break;
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, c) in cands {
            let mut moved = *o1;
            moved.set_point(which, c);
            let m = moved.normal();
            if m.0 * n1.0 + m.1 * n1.1 <= 0.0 {
                continue;
            }
            if moved.is_valid(grid)
                && !openings_overlap(&moved, o2)
                && !clear_before.iter().any(|x| openings_overlap(&moved, x))
            {
                return (
                    Resolution::Replace(moved),
                    CleanupEvent {
                        pair,
                        scenario: Some(scenario),
                        action: CleanupAction::Moved {
                            id: o1.id,
                            endpoint: which,
                            from,
                            to: c,
                        },
                    },
                );
            }
        }
    }
    drop(Some(scenario), "no overlap-free offset within s_o")
}

/// `‖o1‖ + d_w (h1 + h2) / 2 < ‖o2‖`: true removes `o2`, false `o1`.
pub fn dedup_condition(len1: f64, h1: usize, h2: usize, d_w: f64, len2: f64) -> bool {
    len1 + d_w * (h1 + h2) as f64 / 2.0 < len2
}

/// Contour offsets of `o2`'s endpoints when `o2` duplicates `o1` from the
/// intersection side: its start lies within `s_c` steps along `o1.start`'s
/// wall and its end within `s_c` steps along `o1.end`'s wall, both walked
/// toward the intersection.
pub fn duplicate_offsets(
    contours: &WallContours,
    o1: &Opening,
    o2: &Opening,
    s_c: usize,
) -> Option<(usize, usize)> {
    let find = |which: Endpoint, dir: Direction, cell: CellPoint| -> Option<usize> {
        let r = o1.position(contours, which)?;
        contours.run_offset(r, dir, s_c, cell)
    };
    let h1 = find(Endpoint::Start, Direction::Backward, o2.start)?;
    let h2 = find(Endpoint::End, Direction::Forward, o2.end)?;
    Some((h1, h2))
}

/// Id of the opening to remove if `o1` and `o2` are duplicates.
pub fn deduplicate(
    contours: &WallContours,
    o1: &Opening,
    o2: &Opening,
    params: &CleanupParams,
) -> Option<u32> {
    let (h1, h2) = duplicate_offsets(contours, o1, o2, params.s_c)?;
    Some(if dedup_condition(o1.length(), h1, h2, params.d_w, o2.length()) {
        o2.id
    } else {
        o1.id
    })
}

/// Id of the opening to remove when `o1` and `o2` span the same doorway
/// facing opposite ways: each endpoint lies within `reach` cells of the
/// other's far endpoint. The longer one goes.
pub fn back_to_back(o1: &Opening, o2: &Opening, reach: i32) -> Option<u32> {
    let f = o2.flipped();
    let facing_away = o1.normal().0 * o2.normal().0 + o1.normal().1 * o2.normal().1 < 0.0;
    (facing_away && o1.start.chebyshev(f.start) <= reach && o1.end.chebyshev(f.end) <= reach)
        .then(|| longer(o1, o2))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanupOutput {
    pub openings: Vec<Opening>,
    pub events: Vec<CleanupEvent>,
}

fn pair_key(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

/// Opposite-facing openings closer than this are one doorway.
pub const BACK_TO_BACK_REACH: i32 = 2;

pub type BBox = (i32, i32, i32, i32);

fn bbox(o: &Opening, pad: i32) -> BBox {
    (
        o.start.i.min(o.end.i) - pad,
        o.start.j.min(o.end.j) - pad,
        o.start.i.max(o.end.i) + pad,
        o.start.j.max(o.end.j) + pad,
    )
}

const BUCKET: i32 = 64;

/// Live openings with a coarse bucket index over their endpoint boxes.
struct Live {
    by_id: BTreeMap<u32, Opening>,
    buckets: HashMap<(i32, i32), Vec<u32>>,
}

fn bucket_range(b: BBox) -> impl Iterator<Item = (i32, i32)> {
    let (bi0, bj0) = (b.0.div_euclid(BUCKET), b.1.div_euclid(BUCKET));
    let (bi1, bj1) = (b.2.div_euclid(BUCKET), b.3.div_euclid(BUCKET));
    (bi0..=bi1).flat_map(move |bi| (bj0..=bj1).map(move |bj| (bi, bj)))
}

impl Live {
    fn new(openings: &[Opening]) -> Self {
        let mut live = Self {
            by_id: BTreeMap::new(),
            buckets: HashMap::new(),
        };
        for o in openings {
            live.insert(*o);
        }
        live
    }

    fn get(&self, id: u32) -> Option<Opening> {
        self.by_id.get(&id).copied()
    }

    fn insert(&mut self, o: Opening) {
        self.remove(o.id);
        for k in bucket_range(bbox(&o, 0)) {
            self.buckets.entry(k).or_default().push(o.id);
        }
        self.by_id.insert(o.id, o);
    }

    fn remove(&mut self, id: u32) {
        if let Some(old) = self.by_id.remove(&id) {
            for k in bucket_range(bbox(&old, 0)) {
                if let Some(ids) = self.buckets.get_mut(&k) {
                    ids.retain(|&x| x != id);
                }
            }
        }
    }

    /// Openings whose endpoint box meets `b`, by id.
    fn within(&self, b: BBox) -> Vec<Opening> {
        let mut ids: Vec<u32> = bucket_range(b)
            .filter_map(|k| self.buckets.get(&k))
            .flatten()
            .copied()
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter()
            .map(|id| self.by_id[&id])
            .filter(|o| boxes_meet(b, bbox(o, 0)))
            .collect()
    }

    /// Pairs whose endpoint boxes, grown by `pad`, intersect.
    fn near_pairs(&self, pad: i32) -> BTreeSet<(u32, u32)> {
        let mut boxes: Vec<(BBox, u32)> = self.by_id.values().map(|o| (bbox(o, pad), o.id)).collect();
        boxes.sort_unstable();
        let mut pairs = Vec::new();
        for (k, &(a, ia)) in boxes.iter().enumerate() {
            for &(b, ib) in boxes[k + 1..].iter().take_while(|(b, _)| b.0 <= a.2) {
                if boxes_meet(a, b) {
                    pairs.push(pair_key(ia, ib));
                }
            }
        }
        pairs.into_iter().collect()
    }
}

fn boxes_meet(a: (i32, i32, i32, i32), b: (i32, i32, i32, i32)) -> bool {
    a.0 <= b.2 && b.0 <= a.2 && a.1 <= b.3 && b.1 <= a.3
}

/// Alternate overlap resolution and duplicate removal until neither
/// changes anything. Pairs are visited in ascending id order; a modified
/// opening re-enters the queue with every opening near it.
pub fn run_cleanup(
    grid: &OccupancyGrid,
    contours: &WallContours,
    openings: &[Opening],
    params: &CleanupParams,
) -> CleanupOutput {
    let mut live = Live::new(openings);
    let mut events = Vec::new();
    let mut budget = 32 * openings.len() + 64;
    // duplicate endpoints lie within s_c contour steps, hence within s_c cells
    let dup_pad = params.s_c as i32;

    let mut queue = live.near_pairs(1);
    loop {
        // overlap phase
        while let Some((a, b)) = queue.pop_first() {
            let (Some(oa), Some(ob)) = (live.get(a), live.get(b)) else {
                continue;
            };
            if !openings_overlap(&oa, &ob) {
                continue;
            }
            // the longer opening is the one adjusted
            let (o1, o2) = if longer(&oa, &ob) == oa.id { (oa, ob) } else { (ob, oa) };
            let (res, ev) = if budget > 0 {
                budget -= 1;
                resolve_overlap_among(grid, contours, &o1, &o2, |b| live.within(b), params)
            } else {
                let id = longer(&o1, &o2);
                (
                    Resolution::Drop(id),
                    CleanupEvent {
                        pair: pair_key(a, b),
                        scenario: None,
                        action: CleanupAction::Dropped {
                            id,
                            reason: "iteration budget exhausted".into(),
                        },
                    },
                )
            };
            events.push(ev);
            match res {
                Resolution::Drop(id) => {
                    live.remove(id);
                }
                Resolution::Replace(o) => {
                    live.insert(o);
                    for other in live.within(bbox(&o, 2)) {
                        if other.id != o.id {
                            queue.insert(pair_key(o.id, other.id));
                        }
                    }
                }
            }
        }

        // duplicate phase
        let mut removed = false;
        for (a, b) in live.near_pairs(dup_pad) {
            let (Some(oa), Some(ob)) = (live.get(a), live.get(b)) else {
                continue;
            };
            let victim = deduplicate(contours, &oa, &ob, params)
                .or_else(|| deduplicate(contours, &ob, &oa, params))
                .or_else(|| back_to_back(&oa, &ob, BACK_TO_BACK_REACH));
            if let Some(id) = victim {
                live.remove(id);
                removed = true;
                events.push(CleanupEvent {
                    pair: (a, b),
                    scenario: None,
                    action: CleanupAction::Dropped {
                        id,
                        reason: "duplicate".into(),
                    },
                });
            }
        }
        if !removed {
            break;
        }
        // removals cannot create overlaps, but re-check for safety
        queue = live.near_pairs(1);
    }

    CleanupOutput {
        openings: live.by_id.into_values().collect(),
        events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::load_ascii;

    fn p(i: i32, j: i32) -> CellPoint {
        CellPoint::new(i, j)
    }

    #[test]
    fn overlap_examples() {
        let a = Opening::new(0, p(0, 0), p(4, 4));
        let b = Opening::new(1, p(0, 4), p(4, 0));
        assert!(openings_overlap(&a, &b));
        let c = Opening::new(2, p(0, 0), p(0, 6));
        let d = Opening::new(3, p(2, 0), p(2, 6));
        assert!(!openings_overlap(&c, &d));
        let e = Opening::new(4, p(0, 6), p(5, 6));
        assert!(openings_overlap(&c, &e));
    }

    #[test]
    fn dedup_condition_examples() {
        assert!(dedup_condition(6.0, 4, 4, 0.5, 9.0));
        assert!(!dedup_condition(6.0, 4, 4, 0.5, 8.0));
        assert!(!dedup_condition(6.0, 0, 0, 0.5, 6.0));
    }

    fn corridor(width: usize, len: usize) -> OccupancyGrid {
        let mut rows = vec!["#".repeat(len)];
        rows.extend(std::iter::repeat_n(".".repeat(len), width));
        rows.push("#".repeat(len));
        load_ascii(&rows.join("\n")).unwrap()
    }

    #[test]
    fn identical_duplicates_collapse() {
        let g = corridor(7, 40);
        let c = WallContours::build(&g);
        // normal points toward lower columns
        let a = Opening::new(0, p(7, 20), p(1, 20));
        let b = Opening::new(1, p(7, 20), p(1, 20));
        assert_eq!(deduplicate(&c, &a, &b, &CleanupParams::default()), Some(0));
        let out = run_cleanup(&g, &c, &[a, b], &CleanupParams::default());
        assert_eq!(out.openings.len(), 1);
    }

    #[test]
    fn shifted_duplicate_toward_intersection_is_kept() {
        let g = corridor(7, 40);
        let c = WallContours::build(&g);
        let outer = Opening::new(0, p(7, 24), p(1, 24));
        let inner = Opening::new(1, p(7, 20), p(1, 20));
        assert_eq!(duplicate_offsets(&c, &outer, &inner, 50), Some((4, 4)));
        assert!(duplicate_offsets(&c, &inner, &outer, 50).is_none());
        // equal lengths: the outer one goes
        assert_eq!(deduplicate(&c, &outer, &inner, &CleanupParams::default()), Some(0));
        let out = run_cleanup(&g, &c, &[outer, inner], &CleanupParams::default());
        assert_eq!(out.openings, vec![inner]);
    }

    #[test]
    fn crossing_pair_slides_apart() {
        let g = corridor(7, 40);
        let c = WallContours::build(&g);
        let o1 = Opening::new(0, p(7, 18), p(1, 22));
        let o2 = Opening::new(1, p(7, 21), p(1, 20));
        assert!(openings_overlap(&o1, &o2));
        let (res, ev) = resolve_overlap(&g, &c, &o1, &o2, &CleanupParams::default());
        match res {
            Resolution::Replace(m) => {
                assert!(m.is_valid(&g));
                assert!(!openings_overlap(&m, &o2));
                assert!(matches!(ev.action, CleanupAction::Moved { id: 0, .. }));
            }
            Resolution::Drop(_) => panic!("expected a move, got {ev:?}"),
        }
        let out = run_cleanup(&g, &c, &[o1, o2], &CleanupParams::default());
        for (k, a) in out.openings.iter().enumerate() {
            for b in &out.openings[k + 1..] {
                assert!(!openings_overlap(a, b));
            }
        }
    }

    #[test]
    fn separate_corridors_untouched() {
        let g = corridor(7, 40);
        let c = WallContours::build(&g);
        let a = Opening::new(0, p(7, 5), p(1, 5));
        let b = Opening::new(1, p(1, 35), p(7, 35));
        let out = run_cleanup(&g, &c, &[a, b], &CleanupParams::default());
        assert_eq!(out.openings, vec![a, b]);
        assert!(out.events.is_empty());
    }
}
