//! Intersection-driven semantic and topological mapping on 2D occupancy
//! grids.
//!
//! The pipeline scans the grid row by row in several rotated frames looking
//! for places where one passable gap splits into two or more, turns those
//! events into directed openings, cleans overlapping and duplicate openings
//! up, and then follows walls between openings to carve the free space into
//! intersections, paths, dead ends and frontier pathways. A sparse skeleton
//! graph is generated on top of that semantic map. Thinning-based Voronoi
//! baselines are included for comparison.

pub mod baseline;
pub mod cleanup;
pub mod contour;
pub mod error;
pub mod export;
pub mod filter;
pub mod gaps;
pub mod geometry;
pub mod grid;
pub mod openings;
pub mod pipeline;
pub mod skeleton;
pub mod synth;
pub mod topology;

pub use error::{Error, Result};
pub use grid::{CellPoint, CellState, OccupancyGrid};
pub use pipeline::{analyze, compare, CompareRow, PipelineConfig, PipelineOutput};
