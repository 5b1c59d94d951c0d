use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{CellState, OccupancyGrid};
use crate::error::{Error, Result};

pub const DEFAULT_CELL_SIZE: f64 = 0.1;

const HEADER_KEY: &str = "cell_size=";

/// Parse the `#`/`.`/`?` text format, with an optional `cell_size=<m>`
/// header line.
pub fn load_ascii(text: &str) -> Result<OccupancyGrid> {
    let mut lines: Vec<&str> = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }

    let mut cell_size = DEFAULT_CELL_SIZE;
    if let Some(first) = lines.first() {
        if let Some(value) = first.trim().strip_prefix(HEADER_KEY) {
            cell_size = value
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::format(format!("bad cell_size header {value:?}: {e}")))?;
            lines.remove(0);
        }
    }
    if lines.is_empty() {
        return Err(Error::format("empty grid"));
    }

    let cols = lines[0].chars().count();
    let mut cells = Vec::with_capacity(cols * lines.len());
    for (i, line) in lines.iter().enumerate() {
        let before = cells.len();
        for (j, ch) in line.chars().enumerate() {
            cells.push(match ch {
                '#' => CellState::Occupied,
                '.' => CellState::Free,
                '?' => CellState::Unknown,
                other => {
                    return Err(Error::format(format!(
                        "unexpected character {other:?} at row {i}, column {j}"
                    )))
                }
            });
        }
        if cells.len() - before != cols {
            return Err(Error::format(format!(
                "ragged row {i}: expected {cols} cells, got {}",
                cells.len() - before
            )));
        }
    }
    if cols == 0 {
        return Err(Error::format("empty grid"));
    }
    OccupancyGrid::from_cells(lines.len(), cols, cell_size, cells)
        .map_err(|e| Error::format(e.to_string()))
}

/// Inverse of [`load_ascii`]; always writes the header line.
pub fn save_ascii(grid: &OccupancyGrid) -> String {
    let mut out = String::with_capacity((grid.cols() + 1) * grid.rows() + 24);
    out.push_str(HEADER_KEY);
    out.push_str(&grid.cell_size().to_string());
    out.push('\n');
    for i in 0..grid.rows() {
        out.extend(grid.row(i).iter().map(|c| match c {
            CellState::Occupied => '#',
            CellState::Free => '.',
            CellState::Unknown => '?',
        }));
        out.push('\n');
    }
    out
}

/// The map_server YAML keys this crate understands.
#[derive(Clone, Debug, Deserialize, PartialEq)]
pub struct MapMetadata {
    /// Image path, relative to the YAML file.
    #[serde(default)]
    pub image: Option<String>,
    pub resolution: f64,
    #[serde(default = "default_occupied_thresh")]
    pub occupied_thresh: f64,
    #[serde(default = "default_free_thresh")]
    pub free_thresh: f64,
    #[serde(default)]
    pub negate: i32,
}

fn default_occupied_thresh() -> f64 {
    0.65
}

fn default_free_thresh() -> f64 {
    0.196
}

impl MapMetadata {
    pub fn parse(text: &str) -> Result<Self> {
        let meta: MapMetadata =
            serde_yaml::from_str(text).map_err(|e| Error::format(format!("map yaml: {e}")))?;
        if !(meta.resolution > 0.0) {
            return Err(Error::format(format!(
                "resolution must be positive, got {}",
                meta.resolution
            )));
        }
        Ok(meta)
    }

    /// Trinary classification of an 8-bit pixel.
    pub fn classify(&self, pixel: u8) -> CellState {
        let value = if self.negate != 0 { 255 - pixel } else { pixel } as f64;
        if value > 255.0 * (1.0 - self.free_thresh) {
            CellState::Free
        } else if value < 255.0 * (1.0 - self.occupied_thresh) {
            CellState::Occupied
        } else {
            CellState::Unknown
        }
    }
}

pub fn load_pgm_yaml(pgm_path: &Path, yaml_path: &Path) -> Result<OccupancyGrid> {
    let yaml = fs::read_to_string(yaml_path).map_err(|e| Error::io(yaml_path, e))?;
    let meta = MapMetadata::parse(&yaml)?;
    let bytes = fs::read(pgm_path).map_err(|e| Error::io(pgm_path, e))?;
    let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Pnm)
        .map_err(|e| Error::format(format!("{}: {e}", pgm_path.display())))?
        .into_luma8();
    let (w, h) = img.dimensions();
    let cells = img.pixels().map(|p| meta.classify(p.0[0])).collect();
    OccupancyGrid::from_cells(h as usize, w as usize, meta.resolution, cells)
}

/// Load a map by extension: `.yaml`/`.yml` (image named inside), `.pgm`
/// (sibling YAML with the same stem), anything else as ASCII.
pub fn load_map(path: &Path) -> Result<OccupancyGrid> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "yaml" | "yml" => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let meta = MapMetadata::parse(&text)?;
            let image = meta
                .image
                .ok_or_else(|| Error::format(format!("{}: no image key", path.display())))?;
            let dir = path.parent().unwrap_or(Path::new("."));
            load_pgm_yaml(&dir.join(image), path)
        }
        "pgm" => load_pgm_yaml(path, &path.with_extension("yaml")),
        _ => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            load_ascii(&text)
        }
    }
}

/// Binary PGM with map_server pixel values (254 free, 0 occupied, 205
/// unknown).
pub fn save_pgm(grid: &OccupancyGrid) -> Vec<u8> {
    let pixels = grid
        .cells()
        .iter()
        .map(|c| match c {
            CellState::Free => 254,
            CellState::Occupied => 0,
            CellState::Unknown => 205,
        })
        .collect();
    let img = image::GrayImage::from_raw(grid.cols() as u32, grid.rows() as u32, pixels)
        .expect("buffer matches dimensions");
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Pnm)
        .expect("in-memory PNM encoding");
    out.into_inner()
}

/// map_server YAML for a PGM written by [`save_pgm`].
pub fn map_yaml(image: &str, grid: &OccupancyGrid) -> String {
    format!(
        "image: {image}\nresolution: {}\norigin: [0.0, 0.0, 0.0]\nnegate: 0\noccupied_thresh: 0.65\nfree_thresh: 0.196\n",
        grid.cell_size()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_maps_characters() {
        let g = load_ascii("#.#\n#.#").unwrap();
        assert_eq!((g.rows(), g.cols()), (2, 3));
        for i in 0..2 {
            assert_eq!(g.at(i, 0), CellState::Occupied);
            assert_eq!(g.at(i, 1), CellState::Free);
            assert_eq!(g.at(i, 2), CellState::Occupied);
        }
        let u = load_ascii("?\n").unwrap();
        assert_eq!((u.rows(), u.cols()), (1, 1));
        assert_eq!(u.at(0, 0), CellState::Unknown);
        assert_eq!(u.cell_size(), DEFAULT_CELL_SIZE);
    }

    #[test]
    fn ascii_errors() {
        assert!(matches!(load_ascii(""), Err(Error::Format(_))));
        assert!(matches!(load_ascii("cell_size=0.2\n"), Err(Error::Format(_))));
        assert!(matches!(load_ascii("..\n."), Err(Error::Format(_))));
        assert!(matches!(load_ascii(".x."), Err(Error::Format(_))));
        assert!(matches!(load_ascii("cell_size=abc\n.."), Err(Error::Format(_))));
    }

    #[test]
    fn ascii_header() {
        let g = load_ascii("cell_size=0.05\n..\r\n##\r\n").unwrap();
        assert_eq!(g.cell_size(), 0.05);
        assert_eq!(g.rows(), 2);
        assert_eq!(load_ascii(&save_ascii(&g)).unwrap(), g);
    }

    #[test]
    fn map_server_thresholds() {
        let meta = MapMetadata::parse(
            "image: map.pgm\nresolution: 0.05\norigin: [0.0, 0.0, 0.0]\noccupied_thresh: 0.65\nfree_thresh: 0.196\nnegate: 0\n",
        )
        .unwrap();
        assert_eq!(meta.resolution, 0.05);
        // 255 * (1 - 0.196) = 205.02
        assert_eq!(meta.classify(254), CellState::Free);
        assert_eq!(meta.classify(206), CellState::Free);
        assert_eq!(meta.classify(205), CellState::Unknown);
        // 255 * (1 - 0.65) = 89.25
        assert_eq!(meta.classify(0), CellState::Occupied);
        assert_eq!(meta.classify(89), CellState::Occupied);
        assert_eq!(meta.classify(90), CellState::Unknown);

        let negated = MapMetadata { negate: 1, ..meta };
        assert_eq!(negated.classify(0), CellState::Free);
        assert_eq!(negated.classify(254), CellState::Occupied);
    }

    #[test]
    fn map_yaml_errors() {
        assert!(MapMetadata::parse("resolution: -1\n").is_err());
        assert!(MapMetadata::parse("free_thresh: 0.2\n").is_err());
        assert!(MapMetadata::parse(": : :").is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let g = load_ascii("cell_size=0.1\n#.?\n..#").unwrap();
        let dir = std::env::temp_dir().join(format!("jm_io_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("m.pgm"), save_pgm(&g)).unwrap();
        fs::write(dir.join("m.yaml"), map_yaml("m.pgm", &g)).unwrap();
        assert_eq!(load_map(&dir.join("m.yaml")).unwrap(), g);
        assert_eq!(load_map(&dir.join("m.pgm")).unwrap(), g);
        fs::remove_dir_all(&dir).unwrap();
    }
}
