//! End-to-end driver: filter, scan, seed, refine, clean up, build the
//! semantic map and the skeleton graph.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::{gvg, prune_leaves, BaselineParams};
use crate::cleanup::{run_cleanup, CleanupEvent, CleanupParams};
use crate::contour::WallContours;
use crate::error::{Error, Result};
use crate::filter::{filter_map, FilterParams};
use crate::gaps::{scan_all_directions, GapDetection, ScanParams};
use crate::grid::OccupancyGrid;
use crate::openings::{refine_opening, seed_opening, Opening, OpeningSearchParams};
use crate::skeleton::{assemble, region_paths, RegionPath, SkeletonGraph, SkeletonParams};
use crate::topology::{build_semantic_map, SemanticMap, TopologyParams};

/// Every tunable of the pipeline. Names of the published parameters are
/// kept verbatim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub g_min: usize,
    pub n_dir: usize,
    pub f_uk: usize,
    pub g_dep: usize,
    pub f_obj: usize,
    pub d_w: f64,
    pub s_o: usize,
    pub s_c: usize,
    /// Robot width in meters; overrides `g_min` when set.
    pub robot_min_width: Option<f64>,
    pub wall_cap: usize,
    pub refine_iterations: usize,
    pub filter_rounds: usize,
    pub detour_ratio: f64,
    /// Swept-rectangle clearance (cells) for straight skeleton paths.
    pub clearance_width: Option<f64>,
    /// Leaf-branch length pruned by the reduced Voronoi baseline; defaults
    /// to 1.5 g_min.
    pub prune_length: Option<f64>,
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            g_min: 6,
            n_dir: 6,
            f_uk: 1,
            g_dep: 5,
            f_obj: 40,
            d_w: 0.5,
            s_o: 600,
            s_c: 50,
            robot_min_width: None,
            wall_cap: 64,
            refine_iterations: 16,
            filter_rounds: 16,
            detour_ratio: 3.0,
            clearance_width: None,
            prune_length: None,
            threads: 1,
        }
    }
}

impl PipelineConfig {
    /// `g_min` for a grid, honoring `robot_min_width`.
    pub fn effective_g_min(&self, cell_size: f64) -> usize {
        match self.robot_min_width {
            Some(r) => ScanParams::g_min_for(r, cell_size),
            None => self.g_min,
        }
    }

    pub fn scan_params(&self, cell_size: f64) -> ScanParams {
        ScanParams {
            g_min: self.effective_g_min(cell_size),
            n_dir: self.n_dir,
            f_uk: self.f_uk,
            g_dep: self.g_dep,
        }
    }

    pub fn filter_params(&self) -> FilterParams {
        FilterParams {
            f_obj: self.f_obj,
            max_rounds: self.filter_rounds,
        }
    }

    pub fn search_params(&self) -> OpeningSearchParams {
        OpeningSearchParams {
            d_w: self.d_w,
            wall_cap: self.wall_cap,
            max_iterations: self.refine_iterations,
            ..OpeningSearchParams::default()
        }
    }

    pub fn cleanup_params(&self) -> CleanupParams {
        CleanupParams {
            s_o: self.s_o,
            s_c: self.s_c,
            d_w: self.d_w,
        }
    }

    pub fn topology_params(&self, cell_size: f64) -> TopologyParams {
        TopologyParams {
            detour_ratio: self.detour_ratio,
            detour_slack: self.effective_g_min(cell_size) as f64,
            search: self.search_params(),
            ..TopologyParams::default()
        }
    }

    pub fn skeleton_params(&self, cell_size: f64) -> SkeletonParams {
        SkeletonParams {
            clearance_width: self.clearance_width,
            min_component_path: self.effective_g_min(cell_size),
        }
    }

    pub fn prune_length(&self, cell_size: f64) -> f64 {
        self.prune_length
            .unwrap_or(1.5 * self.effective_g_min(cell_size) as f64)
    }

    pub fn baseline_params(&self, cell_size: f64) -> BaselineParams {
        BaselineParams {
            prune_length: self.prune_length(cell_size),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("g_min", self.g_min),
            ("n_dir", self.n_dir),
            ("f_uk", self.f_uk),
            ("g_dep", self.g_dep),
            ("f_obj", self.f_obj),
            ("s_o", self.s_o),
            ("s_c", self.s_c),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Precondition(format!("{name} must be positive")));
            }
        }
        if !(self.d_w >= 0.0) {
            return Err(Error::Precondition("d_w must be non-negative".into()));
        }
        if self.prune_length.is_some_and(|p| !(p >= 0.0)) {
            return Err(Error::Precondition("prune_length must be non-negative".into()));
        }
        if let Some(r) = self.robot_min_width {
            if !(r > 0.0) {
                return Err(Error::Precondition("robot_min_width must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Wall-clock seconds per stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub filter: f64,
    pub scan: f64,
    pub openings: f64,
    pub cleanup: f64,
    pub topology: f64,
    pub skeleton: f64,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub filtered: OccupancyGrid,
    pub detections: Vec<GapDetection>,
    pub seeds: Vec<Opening>,
    /// Refined openings, before cleanup.
    pub refined: Vec<Opening>,
    pub cleanup_events: Vec<CleanupEvent>,
    pub semantic: SemanticMap,
    /// Robot paths per region, before assembly.
    pub paths: Vec<RegionPath>,
    pub skeleton: SkeletonGraph,
    pub timings: StageTimings,
}

fn refine_all(
    grid: &OccupancyGrid,
    contours: &WallContours,
    seeds: &[Opening],
    params: &OpeningSearchParams,
    threads: usize,
) -> Vec<Opening> {
    let one = |o: &Opening| refine_opening(grid, contours, o, params);
    if threads <= 1 || seeds.len() < 64 {
        return seeds.iter().filter_map(one).collect();
    }
    let chunk = seeds.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().filter_map(one).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("refinement thread panicked"))
            .collect()
    })
}

/// Run every stage on `grid`.
pub fn analyze(grid: &OccupancyGrid, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let t0 = Instant::now();
    let mut timings = StageTimings::default();
    let scan = config.scan_params(grid.cell_size());
    scan.validate()?;

    let t = Instant::now();
    let filtered = filter_map(grid, &scan, &config.filter_params());
    timings.filter = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let detections = scan_all_directions(&filtered, &scan, config.threads);
    timings.scan = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let contours = WallContours::build(&filtered);
    let search = config.search_params();
    let mut next_id = 0;
    let seeds: Vec<Opening> = detections
        .iter()
        .flat_map(|d| seed_opening(&filtered, d, &search, &mut next_id))
        .collect();
    let refined = refine_all(&filtered, &contours, &seeds, &search, config.threads);
    timings.openings = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let cleaned = run_cleanup(&filtered, &contours, &refined, &config.cleanup_params());
    timings.cleanup = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let semantic = build_semantic_map(
        &filtered,
        &contours,
        &cleaned.openings,
        &config.topology_params(grid.cell_size()),
    );
    timings.topology = t.elapsed().as_secs_f64();

    for o in &semantic.openings {
        if !o.is_valid(&filtered) {
            return Err(Error::Invariant(format!("opening {} is not wall-to-wall clear", o.id)));
        }
    }

    let t = Instant::now();
    let paths = region_paths(&filtered, &semantic, &config.skeleton_params(grid.cell_size()));
    let skeleton = assemble(&paths);
    timings.skeleton = t.elapsed().as_secs_f64();

    timings.total = t0.elapsed().as_secs_f64();
    Ok(PipelineOutput {
        filtered,
        detections,
        seeds,
        refined,
        cleanup_events: cleaned.events,
        semantic,
        paths,
        skeleton,
        timings,
    })
}

/// One row of the method comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub method: String,
    pub nodes: usize,
    pub seconds: f64,
}

/// Node counts and wall-clock seconds of the proposed method and both
/// Voronoi baselines on the same input grid.
pub fn compare(grid: &OccupancyGrid, config: &PipelineConfig) -> Result<Vec<CompareRow>> {
    let pm = analyze(grid, config)?;
    let t = Instant::now();
    let full = gvg(grid);
    let gvg_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let reduced = prune_leaves(&full, config.baseline_params(grid.cell_size()).prune_length);
    // the reduced graph is built from the full one, so it pays for both
    let rgvg_seconds = gvg_seconds + t.elapsed().as_secs_f64();
    Ok(vec![
        CompareRow {
            method: "PM".into(),
            nodes: pm.skeleton.node_count(),
            seconds: pm.timings.total,
        },
        CompareRow {
            method: "RGVG".into(),
            nodes: reduced.node_count(),
            seconds: rgvg_seconds,
        },
        CompareRow {
            method: "GVG".into(),
            nodes: full.node_count(),
            seconds: gvg_seconds,
        },
    ])
}
