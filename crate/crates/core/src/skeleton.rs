//! Robot paths per semantic region and the skeleton graph assembled from
//! them.
//!
//! Paths are straight where the segment is clear. Otherwise the region is
//! thinned with the path ends locked and the path follows the thinned
//! center. Dead ends keep only the longest branch from their opening.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bresenham, supercover, supercover_each};
use crate::grid::{CellPoint, CellState, OccupancyGrid, N4, N8};
use crate::openings::Opening;
use crate::topology::{PathwayKind, SemanticMap};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkeletonParams {
    /// Width in cells of the swept rectangle a straight path must keep
    /// clear of walls. `None` checks the segment itself.
    pub clearance_width: Option<f64>,
    /// Free components without openings get a path only if their skeleton
    /// diameter spans at least this many cells.
    pub min_component_path: usize,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        Self {
            clearance_width: None,
            min_component_path: 6,
        }
    }
}

/// True iff the supercover of `a -> b` touches no Occupied cell.
pub fn straight_clear(grid: &OccupancyGrid, a: CellPoint, b: CellPoint) -> bool {
    supercover_each(a, b, |c| !grid.is_occupied(c))
}

/// [`straight_clear`], additionally requiring every cell whose center lies
/// in the `width`-wide rectangle swept along `a -> b` to be non-Occupied.
pub fn straight_clear_width(grid: &OccupancyGrid, a: CellPoint, b: CellPoint, width: f64) -> bool {
    if !straight_clear(grid, a, b) {
        return false;
    }
    let half = width.max(0.0) / 2.0;
    let r = half.ceil() as i32;
    let (ai, aj) = a.as_f64();
    let (di, dj) = ((b.i - a.i) as f64, (b.j - a.j) as f64);
    let len2 = di * di + dj * dj;
    for i in a.i.min(b.i) - r..=a.i.max(b.i) + r {
        for j in a.j.min(b.j) - r..=a.j.max(b.j) + r {
            let (pi, pj) = (i as f64 - ai, j as f64 - aj);
            let (t, off) = if len2 == 0.0 {
                (0.0, pi.hypot(pj))
            } else {
                ((pi * di + pj * dj) / len2, (pi * dj - pj * di).abs() / len2.sqrt())
            };
            if (0.0..=1.0).contains(&t) && off <= half + 1e-9 && grid.is_occupied(CellPoint::new(i, j)) {
                return false;
            }
        }
    }
    true
}

/// A set of cells on a padded local raster.
#[derive(Clone, Debug)]
struct Bitmap {
    i0: i32,
    j0: i32,
    rows: usize,
    cols: usize,
    on: Vec<bool>,
}

impl Bitmap {
    fn from_cells(cells: &[CellPoint]) -> Self {
        let i0 = cells.iter().map(|c| c.i).min().unwrap_or(0) - 1;
        let j0 = cells.iter().map(|c| c.j).min().unwrap_or(0) - 1;
        let i1 = cells.iter().map(|c| c.i).max().unwrap_or(0) + 1;
        let j1 = cells.iter().map(|c| c.j).max().unwrap_or(0) + 1;
        let (rows, cols) = ((i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize);
        let mut b = Self {
            i0,
            j0,
            rows,
            cols,
            on: vec![false; rows * cols],
        };
        for &c in cells {
            let k = b.index(c).expect("cell inside its own box");
            b.on[k] = true;
        }
        b
    }

    fn index(&self, c: CellPoint) -> Option<usize> {
        let (i, j) = (c.i - self.i0, c.j - self.j0);
        (i >= 0 && j >= 0 && (i as usize) < self.rows && (j as usize) < self.cols)
            .then(|| i as usize * self.cols + j as usize)
    }

    fn point(&self, k: usize) -> CellPoint {
        CellPoint::new(self.i0 + (k / self.cols) as i32, self.j0 + (k % self.cols) as i32)
    }

    fn get(&self, c: CellPoint) -> bool {
        self.index(c).is_some_and(|k| self.on[k])
    }

    /// 8-neighbors of an interior index, clockwise from north. The padding
    /// keeps every set cell interior.
    fn ring(&self, k: usize) -> [bool; 8] {
        let c = self.cols as isize;
        let offs = [-c, -c + 1, 1, c + 1, c, c - 1, -1, -c - 1];
        offs.map(|o| self.on[(k as isize + o) as usize])
    }

    fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.cols as isize;
        [-c, -c + 1, 1, c + 1, c, c - 1, -1, -c - 1]
            .into_iter()
            .map(move |o| (k as isize + o) as usize)
            .filter(|&n| self.on[n])
    }

    fn cells(&self) -> Vec<CellPoint> {
        let mut out: Vec<CellPoint> = (0..self.on.len())
            .filter(|&k| self.on[k])
            .map(|k| self.point(k))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Foreground 8-connectivity number of the ring (clockwise from north);
/// 1 means the center is a simple point.
fn connectivity(ring: &[bool; 8]) -> u8 {
    let off = |k: usize| !ring[k % 8];
    [0, 2, 4, 6]
        .into_iter()
        .map(|k| (off(k) && !(off(k + 1) && off(k + 2))) as u8)
        .sum()
}

fn transitions(ring: &[bool; 8]) -> usize {
    (0..8).filter(|&k| !ring[k] && ring[(k + 1) % 8]).count()
}

fn count(ring: &[bool; 8]) -> usize {
    ring.iter().filter(|&&b| b).count()
}

/// Peel `bm` down to a one-cell-wide 8-connected skeleton. Candidates come
/// from the two classical sub-iterations; each is deleted only if it is
/// still a simple point when its turn comes.
fn thin_bitmap(bm: &mut Bitmap, locked: &[bool]) {
    let mut in_border = vec![false; bm.on.len()];
    let mut border = Vec::new();
    let c = bm.cols as isize;
    for k in 0..bm.on.len() {
        if bm.on[k] && [-c, 1, c, -1].iter().any(|&o| !bm.on[(k as isize + o) as usize]) {
            in_border[k] = true;
            border.push(k);
        }
    }
    loop {
        let mut changed = false;
        for sub in 0..2 {
            let cands: Vec<usize> = border
                .iter()
                .copied()
                .filter(|&k| bm.on[k] && !locked[k])
                .filter(|&k| {
                    let r = bm.ring(k);
                    let (n, e, s, w) = (r[0], r[2], r[4], r[6]);
                    let b = count(&r);
                    let side = if sub == 0 {
                        !(n && e && s) && !(e && s && w)
                    } else {
                        !(n && e && w) && !(n && s && w)
                    };
                    (2..=6).contains(&b) && transitions(&r) == 1 && side
                })
                .collect();
            for k in cands {
                if connectivity(&bm.ring(k)) == 1 {
                    bm.on[k] = false;
                    changed = true;
                    let nbrs: Vec<usize> = bm.neighbors(k).collect();
                    for n in nbrs {
                        if !in_border[n] {
                            in_border[n] = true;
                            border.push(n);
                        }
                    }
                }
            }
        }
        border.retain(|&k| bm.on[k]);
        if !changed {
            break;
        }
    }
    // staircase corners left by the sub-iterations
    loop {
        let mut changed = false;
        for &k in &border {
            if !bm.on[k] || locked[k] {
                continue;
            }
            let r = bm.ring(k);
            let corner = (r[0] || r[4]) && (r[2] || r[6]);
            if corner && count(&r) >= 2 && connectivity(&r) == 1 {
                bm.on[k] = false;
                changed = true;
            }
        }
        border.retain(|&k| bm.on[k]);
        if !changed {
            break;
        }
    }
}

fn locked_mask(bm: &Bitmap, anchors: &[CellPoint]) -> Result<Vec<bool>> {
    let mut locked = vec![false; bm.on.len()];
    for &a in anchors {
        match bm.index(a) {
            Some(k) if bm.on[k] => locked[k] = true,
            _ => {
                return Err(Error::Precondition(format!(
                    "anchor ({}, {}) is not in the region",
                    a.i, a.j
                )))
            }
        }
    }
    Ok(locked)
}

/// Thin a region to a one-cell-wide 8-connected skeleton that keeps its
/// topology and every anchor.
pub fn thin_region(cells: &[CellPoint], anchors: &[CellPoint]) -> Result<Vec<CellPoint>> {
    if cells.is_empty() {
        return Err(Error::Precondition("cannot thin an empty region".into()));
    }
    let mut bm = Bitmap::from_cells(cells);
    let locked = locked_mask(&bm, anchors)?;
    thin_bitmap(&mut bm, &locked);
    Ok(bm.cells())
}

/// Breadth-first 8-connected search over `bm` from `from`. Returns the
/// predecessor map and the visit order.
fn bfs(bm: &Bitmap, from: usize) -> (Vec<usize>, Vec<usize>) {
    let mut prev = vec![usize::MAX; bm.on.len()];
    let mut order = Vec::new();
    let mut q = VecDeque::new();
    prev[from] = from;
    q.push_back(from);
    while let Some(k) = q.pop_front() {
        order.push(k);
        for n in bm.neighbors(k) {
            if prev[n] == usize::MAX {
                prev[n] = k;
                q.push_back(n);
            }
        }
    }
    (prev, order)
}

fn unwind(bm: &Bitmap, prev: &[usize], to: usize) -> Vec<CellPoint> {
    let mut path = vec![bm.point(to)];
    let mut k = to;
    while prev[k] != k {
        k = prev[k];
        path.push(bm.point(k));
    }
    path.reverse();
    path
}

fn path_between(bm: &Bitmap, a: CellPoint, b: CellPoint) -> Option<Vec<CellPoint>> {
    let (ka, kb) = (bm.index(a)?, bm.index(b)?);
    if !bm.on[ka] || !bm.on[kb] {
        return None;
    }
    let (prev, _) = bfs(bm, ka);
    (prev[kb] != usize::MAX).then(|| unwind(bm, &prev, kb))
}

/// Path from `a` to the reachable cell farthest from it (by steps, then by
/// distance, then lowest cell).
fn farthest_path(bm: &Bitmap, a: CellPoint) -> Option<Vec<CellPoint>> {
    let ka = bm.index(a).filter(|&k| bm.on[k])?;
    let (prev, order) = bfs(bm, ka);
    let mut steps = vec![0usize; bm.on.len()];
    for &k in &order[1..] {
        steps[k] = steps[prev[k]] + 1;
    }
    let far = order.iter().copied().max_by(|&x, &y| {
        let (px, py) = (bm.point(x), bm.point(y));
        steps[x]
            .cmp(&steps[y])
            .then(px.dist(a).total_cmp(&py.dist(a)))
            .then(py.cmp(&px))
    })?;
    Some(unwind(bm, &prev, far))
}

/// Where a path attaches to an opening: the Free supercover cell nearest
/// the segment midpoint.
pub fn opening_anchor(grid: &OccupancyGrid, o: &Opening) -> CellPoint {
    let (mi, mj) = o.midpoint();
    supercover(o.start, o.end)
        .into_iter()
        .filter(|&c| grid.is_free(c))
        .min_by(|a, b| {
            let da = (a.i as f64 - mi).hypot(a.j as f64 - mj);
            let db = (b.i as f64 - mi).hypot(b.j as f64 - mj);
            da.total_cmp(&db).then(a.cmp(b))
        })
        .unwrap_or_else(|| CellPoint::round((mi, mj)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "region", content = "id", rename_all = "snake_case")]
pub enum Provenance {
    Intersection(u32),
    Pathway(u32),
    /// A free component without openings, numbered in scan order.
    Component(u32),
    Baseline,
}

/// One robot path, as an 8-connected cell chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionPath {
    pub provenance: Provenance,
    pub cells: Vec<CellPoint>,
    /// The last cell ends a frontier pathway.
    pub frontier_end: bool,
    /// No skeleton branch joined the ends; the path is a shortest path
    /// through the region instead.
    pub fallback: bool,
}

/// Straight-or-thinned path generation over one region.
struct RegionPaths<'a> {
    grid: &'a OccupancyGrid,
    params: &'a SkeletonParams,
    cells: &'a [CellPoint],
    anchors: Vec<CellPoint>,
    thinned: Option<Bitmap>,
}

impl<'a> RegionPaths<'a> {
    fn new(
        grid: &'a OccupancyGrid,
        params: &'a SkeletonParams,
        cells: &'a [CellPoint],
        anchors: Vec<CellPoint>,
    ) -> Self {
        Self {
            grid,
            params,
            cells,
            anchors,
            thinned: None,
        }
    }

    fn straight(&self, a: CellPoint, b: CellPoint) -> Option<Vec<CellPoint>> {
        let clear = match self.params.clearance_width {
            Some(w) => straight_clear_width(self.grid, a, b, w),
            None => straight_clear(self.grid, a, b),
        };
        let line = bresenham(a, b);
        (clear && line.iter().all(|&c| self.grid.is_free(c))).then_some(line)
    }

    fn skeleton(&mut self) -> &Bitmap {
        if self.thinned.is_none() {
            let mut bm = Bitmap::from_cells(self.cells);
            let anchors: Vec<CellPoint> = self.anchors.iter().copied().filter(|&a| bm.get(a)).collect();
            let locked = locked_mask(&bm, &anchors).expect("anchors filtered to the region");
            thin_bitmap(&mut bm, &locked);
            self.thinned = Some(bm);
        }
        self.thinned.as_ref().expect("just computed")
    }

    /// Straight if clear, else along the thinned region, else any shortest
    /// path through the region.
    fn between(&mut self, a: CellPoint, b: CellPoint) -> Option<(Vec<CellPoint>, bool)> {
        if let Some(line) = self.straight(a, b) {
            return Some((line, false));
        }
        if let Some(p) = path_between(self.skeleton(), a, b) {
            return Some((p, false));
        }
        let region = Bitmap::from_cells(self.cells);
        path_between(&region, a, b).map(|p| (p, true))
    }

    fn longest_from(&mut self, a: CellPoint) -> Option<Vec<CellPoint>> {
        farthest_path(self.skeleton(), a).filter(|p| p.len() >= 2)
    }
}

/// Robot paths for every region of the semantic map, plus the skeleton
/// diameter of each free component that no opening touches.
pub fn region_paths(grid: &OccupancyGrid, semantic: &SemanticMap, params: &SkeletonParams) -> Vec<RegionPath> {
    let by_id: BTreeMap<u32, &Opening> = semantic.openings.iter().map(|o| (o.id, o)).collect();
    let anchor_of: BTreeMap<u32, CellPoint> = by_id.iter().map(|(&id, o)| (id, opening_anchor(grid, o))).collect();
    let mut out = Vec::new();

    for x in &semantic.intersections {
        if x.cells.is_empty() {
            continue;
        }
        let mids: Vec<CellPoint> = x.openings.iter().filter_map(|id| anchor_of.get(id).copied()).collect();
        let mut anchors = mids.clone();
        anchors.push(x.center);
        let mut rp = RegionPaths::new(grid, params, &x.cells, anchors);
        let mut seen = HashSet::new();
        for m in mids {
            if !seen.insert(m) || m == x.center {
                continue;
            }
            if let Some((cells, fallback)) = rp.between(m, x.center) {
                out.push(RegionPath {
                    provenance: Provenance::Intersection(x.id),
                    cells,
                    frontier_end: false,
                    fallback,
                });
            }
        }
    }

    for p in &semantic.pathways {
        if p.cells.is_empty() {
            continue;
        }
        let mids: Vec<CellPoint> = p.openings.iter().filter_map(|id| anchor_of.get(id).copied()).collect();
        let mut rp = RegionPaths::new(grid, params, &p.cells, mids.clone());
        match (p.kind, mids.as_slice()) {
            (PathwayKind::Path, &[a, b]) if a != b => {
                if let Some((cells, fallback)) = rp.between(a, b) {
                    out.push(RegionPath {
                        provenance: Provenance::Pathway(p.id),
                        cells,
                        frontier_end: false,
                        fallback,
                    });
                }
            }
            (PathwayKind::DeadEnd | PathwayKind::FrontierPathway, &[a, ..]) => {
                if let Some(cells) = rp.longest_from(a) {
                    out.push(RegionPath {
                        provenance: Provenance::Pathway(p.id),
                        cells,
                        frontier_end: p.kind == PathwayKind::FrontierPathway,
                        fallback: false,
                    });
                }
            }
            _ => {}
        }
    }

    out.extend(component_paths(grid, semantic, params));
    out
}

/// 4-connected Free components, in scan order.
pub fn free_components(grid: &OccupancyGrid) -> Vec<Vec<CellPoint>> {
    let mut seen = vec![false; grid.rows() * grid.cols()];
    let mut out = Vec::new();
    for k0 in 0..seen.len() {
        if seen[k0] || grid.cells()[k0] != CellState::Free {
            continue;
        }
        seen[k0] = true;
        let mut comp = Vec::new();
        let mut q = VecDeque::from([k0]);
        while let Some(k) = q.pop_front() {
            let c = grid.point(k);
            comp.push(c);
            for (di, dj) in N4 {
                if let Some(n) = grid.index(c.offset(di, dj)) {
                    if !seen[n] && grid.cells()[n] == CellState::Free {
                        seen[n] = true;
                        q.push_back(n);
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Longest path through an unanchored skeleton: farthest from an arbitrary
/// cell, then farthest from there.
fn diameter(bm: &Bitmap) -> Option<Vec<CellPoint>> {
    let start = bm.on.iter().position(|&b| b)?;
    let a = *farthest_path(bm, bm.point(start))?.last()?;
    farthest_path(bm, a)
}

fn component_paths(grid: &OccupancyGrid, semantic: &SemanticMap, params: &SkeletonParams) -> Vec<RegionPath> {
    let touched: HashSet<CellPoint> = semantic
        .openings
        .iter()
        .flat_map(|o| supercover(o.start, o.end))
        .collect();
    let mut out = Vec::new();
    for (n, comp) in free_components(grid).iter().enumerate() {
        if comp.len() < params.min_component_path || comp.iter().any(|c| touched.contains(c)) {
            continue;
        }
        let mut bm = Bitmap::from_cells(comp);
        let locked = vec![false; bm.on.len()];
        thin_bitmap(&mut bm, &locked);
        if let Some(cells) = diameter(&bm).filter(|p| p.len() >= params.min_component_path) {
            out.push(RegionPath {
                provenance: Provenance::Component(n as u32),
                cells,
                frontier_end: false,
                fallback: false,
            });
        }
    }
    out
}

/// Split a one-cell-wide skeleton into chains between its end and branch
/// cells. Closed loops without such cells come back as a chain starting and
/// ending on the same cell.
pub fn trace_skeleton(cells: &[CellPoint]) -> Vec<Vec<CellPoint>> {
    if cells.is_empty() {
        return Vec::new();
    }
    let bm = Bitmap::from_cells(cells);
    let degree = |k: usize| bm.neighbors(k).count();
    let is_node = |k: usize| degree(k) != 2;
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut visited = vec![false; bm.on.len()];
    let mut out = Vec::new();

    let walk = |start: usize,
                first: usize,
                used: &mut HashSet<(usize, usize)>,
                visited: &mut Vec<bool>|
     -> Vec<CellPoint> {
        let mut path = vec![bm.point(start), bm.point(first)];
        used.insert((start, first));
        used.insert((first, start));
        visited[start] = true;
        let (mut prev, mut cur) = (start, first);
        while !is_node(cur) && cur != start {
            visited[cur] = true;
            let Some(next) = bm.neighbors(cur).find(|&n| n != prev && !used.contains(&(cur, n))) else {
                break;
            };
            used.insert((cur, next));
            used.insert((next, cur));
            path.push(bm.point(next));
            (prev, cur) = (cur, next);
        }
        visited[cur] = true;
        path
    };

    for k in 0..bm.on.len() {
        if !bm.on[k] || !is_node(k) {
            continue;
        }
        visited[k] = true;
        let nbrs: Vec<usize> = bm.neighbors(k).collect();
        for n in nbrs {
            if !used.contains(&(k, n)) {
                out.push(walk(k, n, &mut used, &mut visited));
            }
        }
    }
    for k in 0..bm.on.len() {
        if bm.on[k] && !visited[k] {
            if let Some(n) = bm.neighbors(k).next() {
                out.push(walk(k, n, &mut used, &mut visited));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Endpoint,
    BranchPoint,
    /// A vertex kept only to anchor a closed loop; not counted.
    Cycle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonNode {
    pub id: u32,
    pub position: CellPoint,
    pub kind: NodeKind,
    pub degree: usize,
    #[serde(default)]
    pub frontier: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonEdge {
    pub id: u32,
    pub a: u32,
    pub b: u32,
    pub cells: Vec<CellPoint>,
    pub provenance: Vec<Provenance>,
}

impl SkeletonEdge {
    pub fn length(&self) -> f64 {
        self.cells.windows(2).map(|w| w[0].dist(w[1])).sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SkeletonGraph {
    pub nodes: Vec<SkeletonNode>,
    pub edges: Vec<SkeletonEdge>,
}

impl SkeletonGraph {
    pub fn branch_points(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::BranchPoint).count()
    }

    pub fn endpoints(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Endpoint).count()
    }

    /// Branch points plus endpoints.
    pub fn node_count(&self) -> usize {
        self.branch_points() + self.endpoints()
    }

    /// Connected components of the node/edge graph.
    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.nodes.len());
        for e in &self.edges {
            uf.union(e.a as usize, e.b as usize);
        }
        (0..self.nodes.len()).filter(|&k| uf.find(k) == k).count()
    }

    pub fn to_paths(&self, provenance: Provenance) -> Vec<RegionPath> {
        self.edges
            .iter()
            .map(|e| RegionPath {
                provenance: e.provenance.first().copied().unwrap_or(provenance),
                cells: e.cells.clone(),
                frontier_end: false,
                fallback: false,
            })
            .collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut k: usize) -> usize {
        while self.parent[k] != k {
            self.parent[k] = self.parent[self.parent[k]];
            k = self.parent[k];
        }
        k
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

struct WorkEdge {
    a: usize,
    b: usize,
    cells: Vec<CellPoint>,
    provenance: Vec<Provenance>,
}

/// Join path ends lying within one cell of each other into shared nodes,
/// absorb degree-2 nodes into their edges, and classify what is left.
pub fn assemble(paths: &[RegionPath]) -> SkeletonGraph {
    let paths: Vec<&RegionPath> = paths.iter().filter(|p| p.cells.len() >= 2).collect();
    let ends: Vec<CellPoint> = paths
        .iter()
        .flat_map(|p| [p.cells[0], *p.cells.last().expect("non-empty")])
        .collect();

    let mut uf = UnionFind::new(ends.len());
    let mut at: HashMap<CellPoint, Vec<usize>> = HashMap::new();
    for (k, &c) in ends.iter().enumerate() {
        at.entry(c).or_default().push(k);
    }
    for (k, &c) in ends.iter().enumerate() {
        for (di, dj) in std::iter::once((0, 0)).chain(N8) {
            if let Some(others) = at.get(&c.offset(di, dj)) {
                for &o in others {
                    uf.union(k, o);
                }
            }
        }
    }

    // node position: the most common end cell of the group, lowest on ties
    let mut groups: BTreeMap<usize, BTreeMap<CellPoint, usize>> = BTreeMap::new();
    for (k, &c) in ends.iter().enumerate() {
        *groups.entry(uf.find(k)).or_default().entry(c).or_default() += 1;
    }
    let mut node_of_root = HashMap::new();
    let mut positions = Vec::new();
    for (root, counts) in &groups {
        let best = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&c, _)| c)
            .expect("group is non-empty");
        node_of_root.insert(*root, positions.len());
        positions.push(best);
    }

    let mut frontier = vec![false; positions.len()];
    let mut edges: Vec<Option<WorkEdge>> = Vec::new();
    for (n, p) in paths.iter().enumerate() {
        let a = node_of_root[&uf.find(2 * n)];
        let b = node_of_root[&uf.find(2 * n + 1)];
        let mut cells = p.cells.clone();
        if cells[0] != positions[a] {
            cells.insert(0, positions[a]);
        }
        if *cells.last().expect("non-empty") != positions[b] {
            cells.push(positions[b]);
        }
        if p.frontier_end {
            frontier[b] = true;
        }
        if a == b && cells.len() <= 3 {
            continue;
        }
        edges.push(Some(WorkEdge {
            a,
            b,
            cells,
            provenance: vec![p.provenance],
        }));
    }

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); positions.len()];
    for (k, e) in edges.iter().enumerate() {
        let e = e.as_ref().expect("fresh");
        incident[e.a].push(k);
        incident[e.b].push(k);
    }

    for n in 0..positions.len() {
        if incident[n].len() != 2 || incident[n][0] == incident[n][1] {
            continue;
        }
        let (k1, k2) = (incident[n][0], incident[n][1]);
        let mut e1 = edges[k1].take().expect("live edge");
        let mut e2 = edges[k2].take().expect("live edge");
        // orient e1 to end at n and e2 to start at n
        if e1.b != n {
            std::mem::swap(&mut e1.a, &mut e1.b);
            e1.cells.reverse();
        }
        if e2.a != n {
            std::mem::swap(&mut e2.a, &mut e2.b);
            e2.cells.reverse();
        }
        let mut cells = e1.cells;
        cells.extend_from_slice(&e2.cells[1..]);
        let mut provenance = e1.provenance;
        for p in e2.provenance {
            if !provenance.contains(&p) {
                provenance.push(p);
            }
        }
        let merged = WorkEdge {
            a: e1.a,
            b: e2.b,
            cells,
            provenance,
        };
        let (x, y) = (merged.a, merged.b);
        edges[k1] = Some(merged);
        for end in [x, y] {
            for slot in incident[end].iter_mut() {
                if *slot == k2 {
                    *slot = k1;
                }
            }
        }
        incident[n].clear();
        frontier[n] = false;
    }

    let mut graph = SkeletonGraph::default();
    let mut new_id = vec![u32::MAX; positions.len()];
    for n in 0..positions.len() {
        let degree = incident[n].len();
        if degree == 0 {
            continue;
        }
        let kind = match degree {
            1 => NodeKind::Endpoint,
            2 => NodeKind::Cycle,
            _ => NodeKind::BranchPoint,
        };
        new_id[n] = graph.nodes.len() as u32;
        graph.nodes.push(SkeletonNode {
            id: new_id[n],
            position: positions[n],
            kind,
            degree,
            frontier: frontier[n],
        });
    }
    for e in edges.into_iter().flatten() {
        graph.edges.push(SkeletonEdge {
            id: graph.edges.len() as u32,
            a: new_id[e.a],
            b: new_id[e.b],
            cells: e.cells,
            provenance: e.provenance,
        });
    }
    graph
}

/// Thin the semantic regions, generate paths and assemble the graph.
pub fn build_skeleton(grid: &OccupancyGrid, semantic: &SemanticMap, params: &SkeletonParams) -> SkeletonGraph {
    assemble(&region_paths(grid, semantic, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::load_ascii;

    fn rect(i0: i32, j0: i32, h: i32, w: i32) -> Vec<CellPoint> {
        (i0..i0 + h)
            .flat_map(|i| (j0..j0 + w).map(move |j| CellPoint::new(i, j)))
            .collect()
    }

    #[test]
    fn straight_clear_examples() {
        let g = load_ascii("......\n......\n..#...\n......\n......").unwrap();
        let p = CellPoint::new;
        assert!(straight_clear(&g, p(0, 0), p(0, 5)));
        assert!(!straight_clear(&g, p(2, 0), p(2, 5)));
        assert!(straight_clear(&g, p(3, 3), p(3, 3)));
        // one row below the pillar is clear, but not with a 3-wide sweep
        assert!(straight_clear(&g, p(3, 0), p(3, 5)));
        assert!(!straight_clear_width(&g, p(3, 0), p(3, 5), 3.0));
    }

    #[test]
    fn corridor_thins_to_center_line() {
        let cells = rect(0, 0, 3, 11);
        let skel = thin_region(&cells, &[CellPoint::new(1, 0), CellPoint::new(1, 10)]).unwrap();
        assert_eq!(skel, rect(1, 0, 1, 11));
    }

    #[test]
    fn single_cell_survives() {
        let c = [CellPoint::new(4, 4)];
        assert_eq!(thin_region(&c, &c).unwrap(), c.to_vec());
        assert!(thin_region(&[], &[]).is_err());
        assert!(thin_region(&c, &[CellPoint::new(0, 0)]).is_err());
    }

    #[test]
    fn plus_region_has_one_branch_cell() {
        let mut cells = rect(0, 5, 17, 3);
        cells.extend(rect(7, 0, 3, 13));
        cells.sort_unstable();
        cells.dedup();
        let skel = thin_region(&cells, &[]).unwrap();
        let set: HashSet<CellPoint> = skel.iter().copied().collect();
        let degree = |c: CellPoint| N8.iter().filter(|&&(di, dj)| set.contains(&c.offset(di, dj))).count();
        // the junction stays a small cross of branch pixels
        let center = CellPoint::new(8, 6);
        assert!(set.contains(&center));
        assert!(skel.iter().filter(|&&c| degree(c) >= 3).all(|c| c.chebyshev(center) <= 1));
        let g = assemble(
            &trace_skeleton(&skel)
                .into_iter()
                .map(|cells| RegionPath {
                    provenance: Provenance::Baseline,
                    cells,
                    frontier_end: false,
                    fallback: false,
                })
                .collect::<Vec<_>>(),
        );
        assert_eq!((g.branch_points(), g.endpoints()), (1, 4));
    }

    fn path(cells: &[(i32, i32)]) -> RegionPath {
        RegionPath {
            provenance: Provenance::Baseline,
            cells: cells.iter().map(|&(i, j)| CellPoint::new(i, j)).collect(),
            frontier_end: false,
            fallback: false,
        }
    }

    #[test]
    fn assemble_star_and_chain() {
        // four spokes into one center, one spoke continued by a second path
        let g = assemble(&[
            path(&[(0, 5), (1, 5), (2, 5), (3, 5), (4, 5), (5, 5)]),
            path(&[(10, 5), (9, 5), (8, 5), (7, 5), (6, 5), (5, 5)]),
            path(&[(5, 0), (5, 1), (5, 2), (5, 3), (5, 4), (5, 5)]),
            path(&[(5, 10), (5, 9), (5, 8), (5, 7), (5, 6)]),
            path(&[(0, 5), (0, 4), (0, 3)]),
        ]);
        assert_eq!(g.branch_points(), 1);
        assert_eq!(g.endpoints(), 4);
        assert_eq!(g.edges.len(), 4);
        assert!(g.nodes.iter().any(|n| n.position == CellPoint::new(5, 5) && n.degree == 4));
    }

    #[test]
    fn assemble_single_corridor_and_two_rooms() {
        let g = assemble(&[path(&[(0, 0), (0, 1), (0, 2), (0, 3)])]);
        assert_eq!((g.node_count(), g.edges.len()), (2, 1));
        let g = assemble(&[
            path(&[(0, 0), (0, 1), (0, 2), (0, 3)]),
            path(&[(9, 0), (9, 1), (9, 2), (9, 3)]),
        ]);
        assert_eq!(g.components(), 2);
    }
}
