//! Artifact writers: semantic and graph JSON, DOT, SVG and PNG renders,
//! metrics and the comparison table.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::grid::{CellPoint, CellState, OccupancyGrid};
use crate::pipeline::{CompareRow, PipelineConfig, PipelineOutput, StageTimings};
use crate::skeleton::{NodeKind, SkeletonGraph};
use crate::topology::{PathwayKind, SemanticMap};

pub const SCHEMA_VERSION: u32 = 1;

fn pt(c: CellPoint) -> [i32; 2] {
    [c.i, c.j]
}

fn kind_name(kind: PathwayKind) -> &'static str {
    match kind {
        PathwayKind::Path => "path",
        PathwayKind::DeadEnd => "dead_end",
        PathwayKind::FrontierPathway => "frontier_pathway",
    }
}

/// Regions with their boundary polygons and openings, plus the parameters
/// that produced them. Coordinates are `[row, col]`.
pub fn semantic_json(semantic: &SemanticMap, config: &PipelineConfig) -> Value {
    let openings: Vec<Value> = semantic
        .openings
        .iter()
        .map(|o| {
            let (ni, nj) = o.normal();
            json!({
                "id": o.id,
                "start": pt(o.start),
                "end": pt(o.end),
                "normal": [ni, nj],
                "synthesized": o.synthesized,
            })
        })
        .collect();
    let mut regions: Vec<Value> = semantic
        .intersections
        .iter()
        .map(|x| {
            json!({
                "id": format!("I{}", x.id),
                "kind": "intersection",
                "openings": x.openings,
                "polygon": x.boundary.iter().map(|&c| pt(c)).collect::<Vec<_>>(),
                "center": pt(x.center),
                "promoted": x.promoted,
                "cells": x.cells.len(),
            })
        })
        .collect();
    regions.extend(semantic.pathways.iter().map(|p| {
        json!({
            "id": format!("P{}", p.id),
            "kind": kind_name(p.kind),
            "openings": p.openings,
            "polygon": p.boundary.iter().map(|&c| pt(c)).collect::<Vec<_>>(),
            "cells": p.cells.len(),
        })
    }));
    json!({
        "schema_version": SCHEMA_VERSION,
        "params": config,
        "openings": openings,
        "regions": regions,
        "notes": semantic.notes,
    })
}

pub fn graph_json(graph: &SkeletonGraph) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "node_count": graph.node_count(),
        "nodes": graph.nodes.iter().map(|n| json!({
            "id": n.id,
            "position": pt(n.position),
            "kind": n.kind,
            "degree": n.degree,
            "frontier": n.frontier,
        })).collect::<Vec<_>>(),
        "edges": graph.edges.iter().map(|e| json!({
            "id": e.id,
            "a": e.a,
            "b": e.b,
            "length": e.length(),
            "polyline": e.cells.iter().map(|&c| pt(c)).collect::<Vec<_>>(),
            "provenance": e.provenance,
        })).collect::<Vec<_>>(),
    })
}

/// Undirected DOT of the node/edge topology; `pos` puts nodes at their
/// grid positions (column right, row down).
pub fn graph_dot(graph: &SkeletonGraph) -> String {
    let mut s = String::from("graph skeleton {\n  node [shape=point];\n");
    for n in &graph.nodes {
        let kind = match n.kind {
            NodeKind::Endpoint => "endpoint",
            NodeKind::BranchPoint => "branch",
            NodeKind::Cycle => "cycle",
        };
        let _ = writeln!(
            s,
            "  n{} [kind={kind}, degree={}, pos=\"{},{}!\"];",
            n.id, n.degree, n.position.j, -n.position.i
        );
    }
    for e in &graph.edges {
        let _ = writeln!(s, "  n{} -- n{} [length={:.2}];", e.a, e.b, e.length());
    }
    s.push_str("}\n");
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct Metrics {
    pub schema_version: u32,
    pub nodes: usize,
    pub branch_points: usize,
    pub endpoints: usize,
    pub edges: usize,
    pub graph_components: usize,
    /// Paths that fell back to a shortest path through their region.
    pub fallback_paths: usize,
    pub openings: usize,
    pub synthesized_openings: usize,
    pub intersections: usize,
    pub paths: usize,
    pub dead_ends: usize,
    pub frontier_pathways: usize,
    pub detections: usize,
    pub seeds: usize,
    pub cleanup_events: usize,
}

impl Metrics {
    pub fn of(out: &PipelineOutput) -> Self {
        let count = |k: PathwayKind| out.semantic.pathways.iter().filter(|p| p.kind == k).count();
        Self {
            schema_version: SCHEMA_VERSION,
            nodes: out.skeleton.node_count(),
            branch_points: out.skeleton.branch_points(),
            endpoints: out.skeleton.endpoints(),
            edges: out.skeleton.edges.len(),
            graph_components: out.skeleton.components(),
            fallback_paths: out.paths.iter().filter(|p| p.fallback).count(),
            openings: out.semantic.openings.len(),
            synthesized_openings: out.semantic.openings.iter().filter(|o| o.synthesized).count(),
            intersections: out.semantic.intersections.len(),
            paths: count(PathwayKind::Path),
            dead_ends: count(PathwayKind::DeadEnd),
            frontier_pathways: count(PathwayKind::FrontierPathway),
            detections: out.detections.len(),
            seeds: out.seeds.len(),
            cleanup_events: out.cleanup_events.len(),
        }
    }
}

/// Stage timings, kept apart from the deterministic artifacts.
pub fn timings_json(timings: &[StageTimings]) -> Value {
    let median = |f: fn(&StageTimings) -> f64| {
        let mut v: Vec<f64> = timings.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v.get(v.len() / 2).copied().unwrap_or(0.0)
    };
    json!({
        "runs": timings.len(),
        "median": {
            "filter": median(|t| t.filter),
            "scan": median(|t| t.scan),
            "openings": median(|t| t.openings),
            "cleanup": median(|t| t.cleanup),
            "topology": median(|t| t.topology),
            "skeleton": median(|t| t.skeleton),
            "total": median(|t| t.total),
        },
        "all": timings,
    })
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut s = String::from("method,nodes,seconds\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{:.6}", r.method, r.nodes, r.seconds);
    }
    s
}

/// Which parts of a render to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layers {
    pub grid: bool,
    pub regions: bool,
    pub openings: bool,
    pub skeleton: bool,
    pub nodes: bool,
}

impl Default for Layers {
    fn default() -> Self {
        Self {
            grid: true,
            regions: true,
            openings: true,
            skeleton: true,
            nodes: true,
        }
    }
}

impl FromStr for Layers {
    type Err = Error;

    /// Comma-separated subset of `grid,regions,openings,skeleton,nodes`, or
    /// `all`. The grid is always drawn.
    fn from_str(s: &str) -> Result<Self, Error> {
        let mut l = Layers {
            grid: true,
            regions: false,
            openings: false,
            skeleton: false,
            nodes: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "all" => l = Layers::default(),
                "grid" => {}
                "regions" | "semantic" => l.regions = true,
                "openings" => l.openings = true,
                "skeleton" => {
                    l.skeleton = true;
                    l.nodes = true;
                }
                "nodes" => l.nodes = true,
                other => return Err(Error::Precondition(format!("unknown layer {other:?}"))),
            }
        }
        Ok(l)
    }
}

fn region_color(kind: Option<PathwayKind>) -> &'static str {
    match kind {
        None => "#e4572e",
        Some(PathwayKind::Path) => "#4c9be8",
        Some(PathwayKind::DeadEnd) => "#9b6fc4",
        Some(PathwayKind::FrontierPathway) => "#f3a712",
    }
}

fn polygon_points(boundary: &[CellPoint]) -> String {
    boundary
        .iter()
        .map(|c| format!("{},{}", c.j as f64 + 0.5, c.i as f64 + 0.5))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Layered SVG in cell units: grid, semantic polygons, openings with their
/// normals, skeleton polylines and nodes.
pub fn render_svg(grid: &OccupancyGrid, semantic: &SemanticMap, graph: &SkeletonGraph, layers: Layers) -> String {
    let (w, h) = (grid.cols(), grid.rows());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{}" height="{}" shape-rendering="crispEdges">"#,
        w * 3,
        h * 3
    );
    if layers.grid {
        let _ = writeln!(s, r##"<g id="grid"><rect width="{w}" height="{h}" fill="#ffffff"/>"##);
        for i in 0..h {
            let row = grid.row(i);
            let mut j = 0;
            while j < w {
                let state = row[j];
                let mut k = j;
                while k < w && row[k] == state {
                    k += 1;
                }
                let fill = match state {
                    CellState::Occupied => Some("#222222"),
                    CellState::Unknown => Some("#b8b8b8"),
                    CellState::Free => None,
                };
                if let Some(fill) = fill {
                    let _ = writeln!(s, r#"<rect x="{j}" y="{i}" width="{}" height="1" fill="{fill}"/>"#, k - j);
                }
                j = k;
            }
        }
        s.push_str("</g>\n");
    }
    if layers.regions {
        s.push_str("<g id=\"regions\" fill-opacity=\"0.35\" stroke-width=\"0.3\">\n");
        for x in &semantic.intersections {
            let c = region_color(None);
            let _ = writeln!(
                s,
                r#"<polygon class="intersection" data-id="{}" points="{}" fill="{c}" stroke="{c}"/>"#,
                x.id,
                polygon_points(&x.boundary)
            );
        }
        for p in &semantic.pathways {
            let c = region_color(Some(p.kind));
            let _ = writeln!(
                s,
                r#"<polygon class="{}" data-id="{}" points="{}" fill="{c}" stroke="{c}"/>"#,
                kind_name(p.kind),
                p.id,
                polygon_points(&p.boundary)
            );
        }
        s.push_str("</g>\n");
    }
    if layers.openings {
        s.push_str("<g id=\"openings\" stroke=\"#1b998b\" stroke-width=\"0.6\">\n");
        for o in &semantic.openings {
            let (a, b) = (o.start, o.end);
            let (mi, mj) = o.midpoint();
            let (ni, nj) = o.normal();
            let len = ni.hypot(nj).max(1e-9);
            let tip = (mi + 3.0 * ni / len, mj + 3.0 * nj / len);
            let _ = writeln!(
                s,
                r#"<line class="opening" data-id="{}" x1="{}" y1="{}" x2="{}" y2="{}"/><line x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="0.3"/>"#,
                o.id,
                a.j as f64 + 0.5,
                a.i as f64 + 0.5,
                b.j as f64 + 0.5,
                b.i as f64 + 0.5,
                mj + 0.5,
                mi + 0.5,
                tip.1 + 0.5,
                tip.0 + 0.5
            );
        }
        s.push_str("</g>\n");
    }
    if layers.skeleton {
        s.push_str("<g id=\"skeleton\" fill=\"none\" stroke=\"#d7263d\" stroke-width=\"0.5\">\n");
        for e in &graph.edges {
            let _ = writeln!(s, r#"<polyline points="{}"/>"#, polygon_points(&e.cells));
        }
        s.push_str("</g>\n");
    }
    if layers.nodes {
        s.push_str("<g id=\"nodes\">\n");
        for n in &graph.nodes {
            let (fill, r) = match n.kind {
                NodeKind::BranchPoint => ("#d7263d", 1.6),
                NodeKind::Endpoint => ("#2e294e", 1.2),
                NodeKind::Cycle => ("#888888", 0.8),
            };
            let _ = writeln!(
                s,
                r#"<circle class="node" cx="{}" cy="{}" r="{r}" fill="{fill}"/>"#,
                n.position.j as f64 + 0.5,
                n.position.i as f64 + 0.5
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

fn hex(c: &str) -> [u8; 3] {
    let v = u32::from_str_radix(&c[1..], 16).expect("color literal");
    [(v >> 16) as u8, (v >> 8) as u8, v as u8]
}

/// Raster version of [`render_svg`], `scale` pixels per cell. Regions are
/// painted from their cells rather than their polygons.
pub fn render_png(
    grid: &OccupancyGrid,
    semantic: &SemanticMap,
    graph: &SkeletonGraph,
    layers: Layers,
    scale: u32,
) -> Vec<u8> {
    let scale = scale.max(1);
    let (w, h) = (grid.cols() as u32, grid.rows() as u32);
    let mut img = image::RgbImage::from_pixel(w * scale, h * scale, image::Rgb([255, 255, 255]));
    let mut paint = |c: CellPoint, rgb: [u8; 3], alpha: f64| {
        if c.i < 0 || c.j < 0 || c.i as u32 >= h || c.j as u32 >= w {
            return;
        }
        for y in 0..scale {
            for x in 0..scale {
                let p = img.get_pixel_mut(c.j as u32 * scale + x, c.i as u32 * scale + y);
                for k in 0..3 {
                    p.0[k] = (p.0[k] as f64 * (1.0 - alpha) + rgb[k] as f64 * alpha).round() as u8;
                }
            }
        }
    };
    if layers.grid {
        for (c, state) in grid.iter_points() {
            match state {
                CellState::Occupied => paint(c, hex("#222222"), 1.0),
                CellState::Unknown => paint(c, hex("#b8b8b8"), 1.0),
                CellState::Free => {}
            }
        }
    }
    if layers.regions {
        for x in &semantic.intersections {
            for &c in &x.cells {
                paint(c, hex(region_color(None)), 0.35);
            }
        }
        for p in &semantic.pathways {
            for &c in &p.cells {
                paint(c, hex(region_color(Some(p.kind))), 0.35);
            }
        }
    }
    if layers.openings {
        for o in &semantic.openings {
            for c in crate::geometry::supercover(o.start, o.end) {
                paint(c, hex("#1b998b"), 1.0);
            }
        }
    }
    if layers.skeleton {
        for e in &graph.edges {
            for &c in &e.cells {
                paint(c, hex("#d7263d"), 1.0);
            }
        }
    }
    if layers.nodes {
        for n in &graph.nodes {
            for di in -1..=1 {
                for dj in -1..=1 {
                    paint(n.position.offset(di, dj), hex("#2e294e"), 1.0);
                }
            }
        }
    }
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .expect("in-memory PNG encoding");
    out.into_inner()
}
