//! Regions between openings.
//!
//! Walls are followed from opening endpoints. Walking forward along a wall
//! contour from an opening's end stays on its left (inward) face; from its
//! start, on its right (outward) face. Arriving at another opening's start
//! touches that opening's inward face, arriving at an end touches its
//! outward face, and the walk continues from the opposite endpoint. A
//! region is the closed cycle of faces such a walk visits.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::contour::{Direction, WallContours};
use crate::error::{Error, Result};
use crate::geometry::{polygon_centroid, supercover};
use crate::grid::{CellPoint, CellState, OccupancyGrid, N4};
use crate::openings::{refine_opening, Endpoint, Opening, OpeningSearchParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    /// Left of `start -> end`, toward an intersection.
    Inward,
    Outward,
}

impl Face {
    /// Endpoint a forward walk on this face leaves from.
    pub fn exit(self) -> Endpoint {
        match self {
            Face::Inward => Endpoint::End,
            Face::Outward => Endpoint::Start,
        }
    }

    /// Face touched by arriving at `which` while walking in `dir`.
    pub fn arrived(which: Endpoint, dir: Direction) -> Face {
        match (which, dir) {
            (Endpoint::Start, Direction::Forward) | (Endpoint::End, Direction::Backward) => {
                Face::Inward
            }
            _ => Face::Outward,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopologyParams {
    /// An arc between consecutive openings longer than `detour_ratio` times
    /// their straight distance plus `detour_slack` steps hides a missing
    /// opening.
    pub detour_ratio: f64,
    pub detour_slack: f64,
    /// Openings allowed in one wall walk.
    pub max_chain: usize,
    pub search: OpeningSearchParams,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self {
            detour_ratio: 3.0,
            detour_slack: 6.0,
            max_chain: 64,
            search: OpeningSearchParams::default(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Event {
    pos: u32,
    angle: f64,
    id: u32,
    which: Endpoint,
}

/// Where each opening endpoint sits on the wall contours.
#[derive(Clone, Debug, Default)]
struct EndpointIndex {
    per_contour: Vec<Vec<Event>>,
    loc: HashMap<(u32, Endpoint), (u32, u32, f64)>,
}

fn rot(u: (i32, i32)) -> (i32, i32) {
    (-u.1, u.0)
}

/// First edge side of a collapsed contour position.
fn first_side(sides: u8) -> (i32, i32) {
    let has = |d: (i32, i32)| {
        N4.iter()
            .position(|&n| n == d)
            .is_some_and(|k| sides & (1 << k) != 0)
    };
    N4.iter()
        .copied()
        .find(|&u| has(u) && !has((u.1, -u.0)))
        .or_else(|| N4.iter().copied().find(|&u| has(u)))
        .unwrap_or((0, 1))
}

/// Angle of the ray `v` swept from the position's backward direction
/// through the free side, in [0, 2pi).
fn sweep_angle(sides: u8, v: (f64, f64)) -> f64 {
    let w = rot(first_side(sides));
    let b = (-w.0 as f64, -w.1 as f64);
    let cross = b.1 * v.0 - b.0 * v.1;
    let dot = b.0 * v.0 + b.1 * v.1;
    let a = cross.atan2(dot);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

fn event_order(a: &Event, b: &Event) -> std::cmp::Ordering {
    a.pos
        .cmp(&b.pos)
        .then(a.angle.total_cmp(&b.angle))
        .then(a.id.cmp(&b.id))
}

impl EndpointIndex {
    fn build(contours: &WallContours, openings: &BTreeMap<u32, Opening>) -> Self {
        let mut index = Self {
            per_contour: vec![Vec::new(); contours.num_loops()],
            loc: HashMap::with_capacity(2 * openings.len()),
        };
        for o in openings.values() {
            index.push(contours, o);
        }
        for evs in &mut index.per_contour {
            evs.sort_by(event_order);
        }
        index
    }

    fn event(contours: &WallContours, o: &Opening, which: Endpoint) -> Option<(u32, Event)> {
        let r = o.position(contours, which)?;
        let here = o.point(which);
        let there = o.point(which.other());
        let v = ((there.i - here.i) as f64, (there.j - here.j) as f64);
        let ev = Event {
            pos: r.pos,
            angle: sweep_angle(contours.get(r).sides, v),
            id: o.id,
            which,
        };
        Some((r.contour, ev))
    }

    fn push(&mut self, contours: &WallContours, o: &Opening) {
        for which in [Endpoint::Start, Endpoint::End] {
            if let Some((c, ev)) = Self::event(contours, o, which) {
                self.loc.insert((o.id, which), (c, ev.pos, ev.angle));
                self.per_contour[c as usize].push(ev);
            }
        }
    }

    fn insert(&mut self, contours: &WallContours, o: &Opening) {
        for which in [Endpoint::Start, Endpoint::End] {
            if let Some((c, ev)) = Self::event(contours, o, which) {
                self.loc.insert((o.id, which), (c, ev.pos, ev.angle));
                let evs = &mut self.per_contour[c as usize];
                let k = evs.partition_point(|e| event_order(e, &ev).is_lt());
                evs.insert(k, ev);
            }
        }
    }

    fn remove(&mut self, id: u32) {
        for which in [Endpoint::Start, Endpoint::End] {
            if let Some((c, _, _)) = self.loc.remove(&(id, which)) {
                self.per_contour[c as usize].retain(|e| !(e.id == id && e.which == which));
            }
        }
    }
}

/// One wall-following leg between two opening endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallFollowResult {
    pub from: (u32, Endpoint),
    pub reached: (u32, Endpoint),
    pub face: Face,
    pub frontier_passed: bool,
    /// Wall cells walked, both ends included.
    pub arc: Vec<CellPoint>,
    pub steps: usize,
}

struct Walker<'a> {
    grid: &'a OccupancyGrid,
    contours: &'a WallContours,
    openings: BTreeMap<u32, Opening>,
    index: EndpointIndex,
}

impl<'a> Walker<'a> {
    fn new(grid: &'a OccupancyGrid, contours: &'a WallContours, openings: &[Opening]) -> Self {
        let openings: BTreeMap<u32, Opening> = openings.iter().map(|o| (o.id, *o)).collect();
        let index = EndpointIndex::build(contours, &openings);
        Self {
            grid,
            contours,
            openings,
            index,
        }
    }

    fn set_opening(&mut self, o: Opening) {
        self.index.remove(o.id);
        self.index.insert(self.contours, &o);
        self.openings.insert(o.id, o);
    }

    fn remove_opening(&mut self, id: u32) {
        self.index.remove(id);
        self.openings.remove(&id);
    }

    fn leg(&self, from: (u32, Endpoint), dir: Direction) -> Option<WallFollowResult> {
        let &(c, pos, angle) = self.index.loc.get(&from)?;
        let evs = &self.index.per_contour[c as usize];
        let len = self.contours.loop_len(c);
        let ev = match dir {
            Direction::Forward => {
                let k = evs.partition_point(|e| (e.pos, e.angle) <= (pos, angle + 1e-9));
                evs.get(k).or_else(|| evs.first())?
            }
            Direction::Backward => {
                let k = evs.partition_point(|e| (e.pos, e.angle) < (pos, angle - 1e-9));
                if k > 0 {
                    &evs[k - 1]
                } else {
                    evs.last()?
                }
            }
        };
        let same_or_ahead = match dir {
            Direction::Forward => (ev.pos, ev.angle) > (pos, angle + 1e-9),
            Direction::Backward => (ev.pos, ev.angle) < (pos, angle - 1e-9),
        };
        let raw = match dir {
            Direction::Forward => (ev.pos as i64 - pos as i64).rem_euclid(len as i64),
            Direction::Backward => (pos as i64 - ev.pos as i64).rem_euclid(len as i64),
        } as usize;
        let steps = if raw == 0 && !same_or_ahead { len } else { raw };

        let start = crate::contour::PosRef { contour: c, pos };
        let mut arc = Vec::with_capacity(steps + 1);
        let mut frontier = false;
        for s in 0..=steps {
            let q = self.contours.get(self.contours.step(start, dir, s));
            frontier |= q.unknown;
            if arc.last() != Some(&q.cell) {
                arc.push(q.cell);
            }
        }
        Some(WallFollowResult {
            from,
            reached: (ev.id, ev.which),
            face: Face::arrived(ev.which, dir),
            frontier_passed: frontier,
            arc,
            steps,
        })
    }

    fn is_detour(&self, leg: &WallFollowResult, p: &TopologyParams) -> bool {
        let a = self.openings[&leg.from.0].point(leg.from.1);
        let b = self.openings[&leg.reached.0].point(leg.reached.1);
        leg.steps as f64 > p.detour_ratio * a.dist(b) + p.detour_slack
    }

    /// Forward walk around the region on `face` of opening `id`.
    fn region(&self, id: u32, face: Face, max_chain: usize) -> RegionWalk {
        let mut walk = RegionWalk {
            faces: vec![(id, face)],
            legs: Vec::new(),
            closed: false,
        };
        let mut exit = (id, face.exit());
        for _ in 0..max_chain.max(1) {
            let Some(leg) = self.leg(exit, Direction::Forward) else {
                return walk;
            };
            let (nid, which) = leg.reached;
            let nface = leg.face;
            walk.legs.push(leg);
            if (nid, nface) == (id, face) {
                walk.closed = true;
                return walk;
            }
            if walk.faces.contains(&(nid, nface)) {
                return walk;
            }
            walk.faces.push((nid, nface));
            exit = (nid, which.other());
        }
        walk
    }

    /// Index of the first leg that disqualifies an intersection loop.
    fn first_bad_leg(&self, walk: &RegionWalk, p: &TopologyParams) -> Option<usize> {
        walk.legs.iter().position(|l| {
            l.face != Face::Inward || l.frontier_passed || self.is_detour(l, p)
        })
    }

    fn good_intersection(&self, walk: &RegionWalk, p: &TopologyParams) -> bool {
        walk.closed && walk.faces.len() >= 3 && self.first_bad_leg(walk, p).is_none()
    }

    /// Walk backward from the start of `id` on its inward face, collecting
    /// openings until a bad leg. Returns the start endpoint the bad leg
    /// left from and the openings passed.
    fn backward_chain(&self, id: u32, p: &TopologyParams) -> (u32, Vec<u32>) {
        let mut exit = id;
        let mut chain = vec![id];
        for _ in 0..p.max_chain {
            let Some(leg) = self.leg((exit, Endpoint::Start), Direction::Backward) else {
                break;
            };
            if leg.face != Face::Inward || leg.frontier_passed || self.is_detour(&leg, p) {
                break;
            }
            let next = leg.reached.0;
            if chain.contains(&next) {
                break;
            }
            chain.push(next);
            exit = next;
        }
        (exit, chain)
    }
}

struct RegionWalk {
    faces: Vec<(u32, Face)>,
    legs: Vec<WallFollowResult>,
    closed: bool,
}

impl RegionWalk {
    fn polygon(&self) -> Vec<CellPoint> {
        let mut out: Vec<CellPoint> = Vec::new();
        for l in &self.legs {
            for &c in &l.arc {
                if out.last() != Some(&c) {
                    out.push(c);
                }
            }
        }
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        out
    }

    fn frontier(&self) -> bool {
        self.legs.iter().any(|l| l.frontier_passed)
    }
}

/// First wall leg from the exit endpoint of `face` of `opening`.
pub fn follow_wall(
    grid: &OccupancyGrid,
    contours: &WallContours,
    openings: &[Opening],
    opening: u32,
    face: Face,
) -> Result<WallFollowResult> {
    let w = Walker::new(grid, contours, openings);
    w.leg((opening, face.exit()), Direction::Forward)
        .ok_or_else(|| Error::Trace(format!("opening {opening} is not on a wall contour")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathwayKind {
    Path,
    DeadEnd,
    FrontierPathway,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub id: u32,
    /// Opening ids in walk order.
    pub openings: Vec<u32>,
    pub boundary: Vec<CellPoint>,
    pub center: CellPoint,
    /// Found as a pathway touching three or more openings.
    #[serde(default)]
    pub promoted: bool,
    #[serde(skip)]
    pub cells: Vec<CellPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pathway {
    pub id: u32,
    pub kind: PathwayKind,
    pub openings: Vec<u32>,
    pub boundary: Vec<CellPoint>,
    #[serde(skip)]
    pub cells: Vec<CellPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyNote {
    pub opening: u32,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SemanticMap {
    /// Final opening set: cleaned, possibly flipped, plus recovered ones.
    pub openings: Vec<Opening>,
    pub intersections: Vec<Intersection>,
    pub pathways: Vec<Pathway>,
    pub notes: Vec<TopologyNote>,
}

impl SemanticMap {
    pub fn opening(&self, id: u32) -> Option<&Opening> {
        self.openings.iter().find(|o| o.id == id)
    }
}

/// Polygon centroid snapped to the nearest of `cells`.
pub fn intersection_center(boundary: &[CellPoint], cells: &[CellPoint]) -> Option<CellPoint> {
    let verts: Vec<(f64, f64)> = boundary.iter().map(|c| c.as_f64()).collect();
    let (cy, cx) = polygon_centroid(&verts)?;
    cells
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = (a.i as f64 - cy).hypot(a.j as f64 - cx);
            let db = (b.i as f64 - cy).hypot(b.j as f64 - cx);
            da.total_cmp(&db).then(a.cmp(b))
        })
}

struct Found {
    faces: Vec<(u32, Face)>,
    boundary: Vec<CellPoint>,
    seeds: Vec<CellPoint>,
    frontier: bool,
}

impl Found {
    fn from_walk(w: &RegionWalk) -> Self {
        Self {
            faces: w.faces.clone(),
            boundary: w.polygon(),
            seeds: w.legs.iter().flat_map(|l| l.arc.iter().copied()).collect(),
            frontier: w.frontier(),
        }
    }

    fn distinct_openings(&self) -> Vec<u32> {
        let mut seen = Vec::new();
        for &(id, _) in &self.faces {
            if !seen.contains(&id) {
                seen.push(id);
            }
        }
        seen
    }
}

/// Find intersections, recovering one missing opening or flipping
/// two-opening loops where needed.
fn find_intersections(
    walker: &mut Walker,
    params: &TopologyParams,
    consumed: &mut HashSet<(u32, Face)>,
    notes: &mut Vec<TopologyNote>,
) -> Vec<Found> {
    let mut out = Vec::new();
    let mut next_id = walker.openings.keys().max().map_or(0, |m| m + 1);
    let ids: Vec<u32> = walker.openings.keys().copied().collect();
    let mut attempted: HashSet<u32> = HashSet::new();

    let accept = |walk: &RegionWalk, consumed: &mut HashSet<(u32, Face)>, out: &mut Vec<Found>| {
        if walk.faces.iter().any(|f| consumed.contains(f)) {
            return false;
        }
        consumed.extend(walk.faces.iter().copied());
        out.push(Found::from_walk(walk));
        true
    };

    for id in ids {
        if consumed.contains(&(id, Face::Inward)) || !attempted.insert(id) {
            continue;
        }
        let walk = walker.region(id, Face::Inward, params.max_chain);
        if walker.good_intersection(&walk, params) {
            if !accept(&walk, consumed, &mut out) {
                notes.push(note(id, "loop shares a face with an earlier region"));
            }
            continue;
        }
        let bad = walker.first_bad_leg(&walk, params);

        if walk.closed && bad.is_none() && walk.faces.len() == 2 {
            let pair = [walk.faces[0].0, walk.faces[1].0];
            if pair.iter().any(|&o| {
                consumed.contains(&(o, Face::Inward)) || consumed.contains(&(o, Face::Outward))
            }) {
                continue;
            }
            for o in pair {
                walker.set_opening(walker.openings[&o].flipped());
            }
            let mut kept = false;
            for o in pair {
                let w = walker.region(o, Face::Inward, params.max_chain);
                if walker.good_intersection(&w, params) && accept(&w, consumed, &mut out) {
                    kept = true;
                }
            }
            if kept {
                for o in pair {
                    notes.push(note(o, "flipped out of a two-opening loop"));
                }
            } else {
                for o in pair {
                    walker.set_opening(walker.openings[&o].flipped());
                }
            }
            continue;
        }
        if walk.closed && walk.faces.len() == 1 {
            notes.push(note(id, "single-opening loop on the inward face"));
            continue;
        }

        // recovery: the leg that went wrong hides one missing opening
        let Some(bad) = bad.or(if walk.closed { None } else { Some(walk.legs.len()) }) else {
            continue;
        };
        let forward: Vec<u32> = walk.faces[..=bad.min(walk.faces.len() - 1)]
            .iter()
            .map(|f| f.0)
            .collect();
        let ok_end = if bad < walk.legs.len() {
            walk.legs[bad].from
        } else {
            match walk.legs.last() {
                Some(l) => (l.reached.0, l.reached.1.other()),
                None => continue,
            }
        };
        if ok_end.1 != Endpoint::End {
            continue;
        }
        let (pm, backward) = walker.backward_chain(id, params);
        let mut members: Vec<u32> = forward.clone();
        for b in backward {
            if !members.contains(&b) {
                members.push(b);
            }
        }
        if members.len() < 2 || members.iter().any(|&m| consumed.contains(&(m, Face::Inward))) {
            notes.push(note(id, "intersection abandoned: too few openings to recover"));
            continue;
        }
        let a = walker.openings[&ok_end.0].end;
        let b = walker.openings[&pm].start;
        if a == b {
            notes.push(note(id, "intersection abandoned: recovery endpoints coincide"));
            continue;
        }
        let mut x = Opening::new(next_id, a, b);
        x.synthesized = true;
        let Some(mut x) = refine_opening(walker.grid, walker.contours, &x, &params.search) else {
            notes.push(note(id, "intersection abandoned: no clear recovered opening"));
            continue;
        };
        x.synthesized = true;
        walker.set_opening(x);
        let retry = walker.region(id, Face::Inward, params.max_chain);
        if walker.good_intersection(&retry, params)
            && retry.faces.iter().any(|f| f.0 == x.id)
            && accept(&retry, consumed, &mut out)
        {
            next_id += 1;
            notes.push(note(x.id, "recovered missing opening"));
        } else {
            walker.remove_opening(x.id);
            notes.push(note(id, "intersection abandoned: recovery did not close the loop"));
        }
    }
    out
}

fn note(opening: u32, message: &str) -> TopologyNote {
    TopologyNote {
        opening,
        message: message.to_string(),
    }
}

/// Free cells reachable from `seeds` without crossing any opening.
/// 4-connected components of Free cells outside `blocked`.
struct Components {
    label: Vec<u32>,
    cells: Vec<Vec<CellPoint>>,
}

impl Components {
    const NONE: u32 = u32::MAX;

    fn build(grid: &OccupancyGrid, blocked: &[bool]) -> Self {
        let mut label = vec![Self::NONE; grid.rows() * grid.cols()];
        let mut cells = Vec::new();
        let open = |k: usize| grid.cells()[k] == CellState::Free && !blocked[k];
        let mut q = VecDeque::new();
        for k0 in 0..label.len() {
            if label[k0] != Self::NONE || !open(k0) {
                continue;
            }
            let id = cells.len() as u32;
            let mut comp = Vec::new();
            label[k0] = id;
            q.push_back(k0);
            while let Some(k) = q.pop_front() {
                let c = grid.point(k);
                comp.push(c);
                for (di, dj) in N4 {
                    let Some(n) = grid.index(c.offset(di, dj)) else {
                        continue;
                    };
                    if label[n] == Self::NONE && open(n) {
                        label[n] = id;
                        q.push_back(n);
                    }
                }
            }
            cells.push(comp);
        }
        Self { label, cells }
    }

    fn of(&self, grid: &OccupancyGrid, c: CellPoint) -> Option<u32> {
        grid.index(c)
            .map(|k| self.label[k])
            .filter(|&l| l != Self::NONE)
    }
}

/// Cells just off an opening on the given face. Each probe skips the
/// opening's own cells and stops at the first cell that is blocked or not
/// Free, so it never jumps over a neighboring opening.
fn face_seeds(grid: &OccupancyGrid, blocked: &[bool], o: &Opening, face: Face) -> Vec<CellPoint> {
    let own = supercover(o.start, o.end);
    let (di, dj) = o.direction();
    let len = o.length();
    let (mut ni, mut nj) = (-dj / len, di / len);
    if face == Face::Outward {
        (ni, nj) = (-ni, -nj);
    }
    let samples = len.ceil() as usize;
    let mut out = Vec::new();
    for k in 0..=samples {
        let t = k as f64 / samples.max(1) as f64;
        let (pi, pj) = (o.start.i as f64 + t * di, o.start.j as f64 + t * dj);
        for off in [1.0, 1.5, 2.0] {
            let c = CellPoint::round((pi + off * ni, pj + off * nj));
            if own.contains(&c) {
                continue;
            }
            if grid.is_free(c) && grid.index(c).is_some_and(|k| !blocked[k]) {
                out.push(c);
            }
            break;
        }
    }
    out
}

fn region_cells(
    grid: &OccupancyGrid,
    blocked: &[bool],
    found: &Found,
    openings: &BTreeMap<u32, Opening>,
    comps: &Components,
) -> Vec<CellPoint> {
    let mut seeds = found.seeds.clone();
    for &(id, face) in &found.faces {
        if let Some(o) = openings.get(&id) {
            seeds.extend(face_seeds(grid, blocked, o, face));
        }
    }
    let labels: BTreeSet<u32> = seeds.iter().filter_map(|&c| comps.of(grid, c)).collect();
    let mut cells: Vec<CellPoint> = labels
        .into_iter()
        .flat_map(|l| comps.cells[l as usize].iter().copied())
        .collect();
    for id in found.distinct_openings() {
        if let Some(o) = openings.get(&id) {
            cells.extend(supercover(o.start, o.end).into_iter().filter(|&c| grid.is_free(c)));
        }
    }
    cells.sort_unstable();
    cells.dedup();
    cells
}

/// Classify every face not claimed by an intersection.
fn find_pathways(
    walker: &Walker,
    params: &TopologyParams,
    consumed: &mut HashSet<(u32, Face)>,
    notes: &mut Vec<TopologyNote>,
) -> Vec<Found> {
    let mut out = Vec::new();
    let ids: Vec<u32> = walker.openings.keys().copied().collect();
    for id in ids {
        for face in [Face::Outward, Face::Inward] {
            if consumed.contains(&(id, face)) {
                continue;
            }
            let walk = walker.region(id, face, params.max_chain);
            if !walk.closed {
                notes.push(note(id, "pathway walk did not close"));
                consumed.insert((id, face));
                continue;
            }
            if walk.faces.iter().any(|f| consumed.contains(f)) {
                notes.push(note(id, "pathway walk reached a claimed face"));
                consumed.insert((id, face));
                continue;
            }
            consumed.extend(walk.faces.iter().copied());
            out.push(Found::from_walk(&walk));
        }
    }
    out
}

/// Build the semantic map from cleaned openings.
pub fn build_semantic_map(
    grid: &OccupancyGrid,
    contours: &WallContours,
    openings: &[Opening],
    params: &TopologyParams,
) -> SemanticMap {
    let mut walker = Walker::new(grid, contours, openings);
    let mut consumed = HashSet::new();
    let mut notes = Vec::new();
    let inter = find_intersections(&mut walker, params, &mut consumed, &mut notes);
    let paths = find_pathways(&walker, params, &mut consumed, &mut notes);

    let mut blocked = vec![false; grid.rows() * grid.cols()];
    for o in walker.openings.values() {
        for c in supercover(o.start, o.end) {
            if let Some(k) = grid.index(c) {
                blocked[k] = true;
            }
        }
    }
    let comps = Components::build(grid, &blocked);

    let mut map = SemanticMap {
        openings: walker.openings.values().copied().collect(),
        ..Default::default()
    };
    let center_of = |f: &Found, cells: &[CellPoint]| -> CellPoint {
        intersection_center(&f.boundary, cells).unwrap_or_else(|| {
            let longest = f
                .distinct_openings()
                .into_iter()
                .filter_map(|id| walker.openings.get(&id))
                .max_by(|a, b| a.length().total_cmp(&b.length()))
                .copied();
            longest.map_or(CellPoint::new(0, 0), |o| CellPoint::round(o.midpoint()))
        })
    };

    for f in &inter {
        let cells = region_cells(grid, &blocked, f, &walker.openings, &comps);
        map.intersections.push(Intersection {
            id: map.intersections.len() as u32,
            openings: f.distinct_openings(),
            center: center_of(f, &cells),
            boundary: f.boundary.clone(),
            promoted: false,
            cells,
        });
    }
    let mut pid = 0;
    for f in &paths {
        let cells = region_cells(grid, &blocked, f, &walker.openings, &comps);
        let ids = f.distinct_openings();
        if ids.len() >= 3 {
            map.intersections.push(Intersection {
                id: map.intersections.len() as u32,
                openings: ids,
                center: center_of(f, &cells),
                boundary: f.boundary.clone(),
                promoted: true,
                cells,
            });
            continue;
        }
        let kind = match (ids.len(), f.frontier) {
            (2, _) => PathwayKind::Path,
            (_, true) => PathwayKind::FrontierPathway,
            (_, false) => PathwayKind::DeadEnd,
        };
        map.pathways.push(Pathway {
            id: pid,
            kind,
            openings: ids,
            boundary: f.boundary.clone(),
            cells,
        });
        pid += 1;
    }
    map.notes = notes;
    map
}

/// Intersections only (after recovery and flipping); see
/// [`build_semantic_map`] for the full map.
pub fn detect_intersections(
    grid: &OccupancyGrid,
    contours: &WallContours,
    openings: &[Opening],
    params: &TopologyParams,
) -> Vec<Intersection> {
    build_semantic_map(grid, contours, openings, params)
        .intersections
        .into_iter()
        .filter(|i| !i.promoted)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::load_ascii;

    fn p(i: i32, j: i32) -> CellPoint {
        CellPoint::new(i, j)
    }

    const LO: i32 = 32;
    const HI: i32 = 38;

    /// Plus of 7-wide corridors with 31-cell arms, fully enclosed.
    fn plus() -> OccupancyGrid {
        let n = 71;
        let rows: Vec<String> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let inside = |v: i32| (1..n - 1).contains(&v);
                        let band = |v: i32| (LO..=HI).contains(&v);
                        if inside(i) && inside(j) && (band(i) || band(j)) {
                            '.'
                        } else {
                            '#'
                        }
                    })
                    .collect()
            })
            .collect();
        load_ascii(&rows.join("\n")).unwrap()
    }

    /// Openings across each arm mouth, inward face toward the center.
    fn plus_openings() -> Vec<Opening> {
        vec![
            // heading west, left normal points south
            Opening::new(0, p(LO - 1, HI), p(LO - 1, LO)),
            Opening::new(1, p(HI + 1, LO), p(HI + 1, HI)),
            Opening::new(2, p(LO, LO - 1), p(HI, LO - 1)),
            Opening::new(3, p(HI, HI + 1), p(LO, HI + 1)),
        ]
    }

    #[test]
    fn sweep_angle_orders_rays() {
        // wall to the south: forward is east, back is west, free side north
        let sides = 1 << 2;
        let west = sweep_angle(sides, (0.0, -1.0));
        let north = sweep_angle(sides, (-1.0, 0.0));
        let east = sweep_angle(sides, (0.0, 1.0));
        assert!(west < north && north < east, "{west} {north} {east}");
    }

    #[test]
    fn plus_has_one_intersection_and_four_dead_ends() {
        let g = plus();
        let c = WallContours::build(&g);
        let ops = plus_openings();
        for o in &ops {
            assert!(o.is_valid(&g), "{o:?}");
        }
        let m = build_semantic_map(&g, &c, &ops, &TopologyParams::default());
        assert_eq!(m.intersections.len(), 1, "{:?}", m.notes);
        let mut ids = m.intersections[0].openings.clone();
        ids.sort();
        assert_eq!(ids, vec![0, 1, 2, 3]);
        assert_eq!(m.pathways.len(), 4);
        assert!(m.pathways.iter().all(|p| p.kind == PathwayKind::DeadEnd));
        assert_eq!(m.intersections[0].center, p(35, 35));
        // the center square plus the opening rows
        let cells = &m.intersections[0].cells;
        assert!(cells.contains(&p(35, 35)));
        assert!(!cells.contains(&p(5, 35)));
    }

    #[test]
    fn follow_wall_legs() {
        let g = plus();
        let c = WallContours::build(&g);
        let ops = plus_openings();
        let leg = follow_wall(&g, &c, &ops, 0, Face::Outward).unwrap();
        assert_eq!(leg.reached, (0, Endpoint::End));
        assert!(!leg.frontier_passed);
        let inward = follow_wall(&g, &c, &ops, 0, Face::Inward).unwrap();
        assert_eq!(inward.face, Face::Inward);
        assert_ne!(inward.reached.0, 0);
    }

    #[test]
    fn missing_opening_is_recovered() {
        let g = plus();
        let c = WallContours::build(&g);
        let mut ops = plus_openings();
        ops.remove(2);
        let m = build_semantic_map(&g, &c, &ops, &TopologyParams::default());
        assert_eq!(m.intersections.len(), 1, "{:?}", m.notes);
        assert_eq!(m.intersections[0].openings.len(), 4);
        let x = m.openings.iter().find(|o| o.synthesized).unwrap();
        assert!(x.is_valid(&g));
        assert!((x.length() - 6.0).abs() < 1.5, "{x:?}");
    }

    #[test]
    fn frontier_arm() {
        let mut g = plus();
        for j in LO..=HI {
            g.set(p(1, j), crate::grid::CellState::Unknown);
        }
        let c = WallContours::build(&g);
        let m = build_semantic_map(&g, &c, &plus_openings(), &TopologyParams::default());
        let kinds: Vec<PathwayKind> = m.pathways.iter().map(|p| p.kind).collect();
        assert_eq!(
            kinds.iter().filter(|&&k| k == PathwayKind::FrontierPathway).count(),
            1
        );
        assert_eq!(m.intersections.len(), 1);
    }

    #[test]
    fn wrongly_oriented_pair_is_flipped() {
        // corridor with a junction at each end; the two openings in the
        // middle both face the corridor between them
        let g = plus();
        let c = WallContours::build(&g);
        let mut ops = plus_openings();
        // flip the north opening and add a second one further up the arm
        ops[0] = ops[0].flipped();
        ops.push(Opening::new(4, p(10, LO), p(10, HI)));
        let m = build_semantic_map(&g, &c, &ops, &TopologyParams::default());
        assert_eq!(m.intersections.len(), 1, "{:?}", m.notes);
        assert_eq!(m.intersections[0].openings.len(), 4);
    }
}
