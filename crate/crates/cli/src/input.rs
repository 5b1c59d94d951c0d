//! Map inputs: files, or `synth:<name>[:args]` for generated maps.

use std::path::Path;

use junctionmap::grid::load_map;
use junctionmap::{synth, OccupancyGrid};

fn arg<T: std::str::FromStr>(parts: &[&str], k: usize, default: T) -> Result<T, String> {
    match parts.get(k) {
        None => Ok(default),
        Some(s) => s.parse().map_err(|_| format!("bad synth argument {s:?}")),
    }
}

/// `plus`, `tee`, `corridor`, `rooms`, `office[:seed]`,
/// `noisy-office[:seed]`, `campus[:seed[:size]]`, `junctions[:seed[:size]]`.
pub fn synthetic(spec: &str) -> Result<OccupancyGrid, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    Ok(match parts[0] {
        "plus" => synth::plus(arg(&parts, 1, 30)?, arg(&parts, 2, 12)?),
        "tee" => synth::tee(arg(&parts, 1, 30)?, arg(&parts, 2, 12)?),
        "corridor" => synth::corridor(arg(&parts, 1, 80)?, arg(&parts, 2, 12)?),
        "rooms" => synth::corridor_between_rooms(),
        "office" => synth::office(arg(&parts, 1, 1)?),
        "noisy-office" => {
            let seed = arg(&parts, 1, 1)?;
            synth::with_sensor_noise(&synth::office(seed), seed, &synth::SensorNoise::default())
        }
        "campus" => synth::campus(arg(&parts, 1, 1)?, arg(&parts, 2, 1000)?),
        "junctions" => synth::random_junctions(arg(&parts, 1, 0)?, arg(&parts, 2, 160)?),
        other => return Err(format!("unknown synthetic map {other:?}")),
    })
}

pub fn load(input: &str) -> Result<OccupancyGrid, String> {
    match input.strip_prefix("synth:") {
        Some(spec) => synthetic(spec),
        None => load_map(Path::new(input)).map_err(|e| e.to_string()),
    }
}
