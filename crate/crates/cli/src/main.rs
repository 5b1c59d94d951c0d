mod config;
mod input;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use junctionmap::export::{
    compare_csv, graph_dot, graph_json, render_png, render_svg, semantic_json, timings_json, Layers, Metrics,
};
use junctionmap::grid::{map_yaml, save_ascii, save_pgm};
use junctionmap::{analyze, compare, Error, OccupancyGrid, PipelineConfig, PipelineOutput};
use serde_json::Value;

/// Semantic and topological maps from 2D occupancy grids.
#[derive(Parser)]
#[command(name = "junctionmap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write all artifacts.
    Analyze(AnalyzeArgs),
    /// Node counts and timings of the pipeline and both Voronoi baselines.
    Compare(CommonArgs),
    /// Render the map, regions and skeleton to SVG or PNG.
    Render(RenderArgs),
    /// Time the pipeline over repeated runs.
    Bench(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Map file (.txt ASCII, .pgm, .yaml) or `synth:<name>[:args]`.
    input: String,
    /// Output directory.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Config file, flat key=value or JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    g_min: Option<usize>,
    #[arg(long)]
    n_dir: Option<usize>,
    #[arg(long)]
    f_uk: Option<usize>,
    #[arg(long)]
    g_dep: Option<usize>,
    #[arg(long)]
    f_obj: Option<usize>,
    #[arg(long)]
    d_w: Option<f64>,
    #[arg(long)]
    s_o: Option<usize>,
    #[arg(long)]
    s_c: Option<usize>,
    /// Robot width in meters; sets g_min from the cell size.
    #[arg(long)]
    robot_min_width: Option<f64>,
    /// Swept clearance, in cells, required of straight skeleton paths.
    #[arg(long)]
    clearance_width: Option<f64>,
    /// Leaf length pruned from the reduced Voronoi baseline, in cells.
    #[arg(long)]
    prune_length: Option<f64>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Runs to time; the median is reported.
    #[arg(long, default_value_t = 1)]
    repeat: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write the filtered grid (.pgm with a sibling .yaml, otherwise ASCII).
    #[arg(long)]
    dump_filtered: Option<PathBuf>,
    /// Also write map.svg.
    #[arg(long)]
    svg: bool,
    /// Also write map.png.
    #[arg(long)]
    png: bool,
    /// Layers for the renders: all, or a comma list of regions, openings,
    /// skeleton, nodes.
    #[arg(long, default_value = "all")]
    layers: String,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output image; `.png` renders a raster, anything else SVG.
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long, default_value = "all")]
    layers: String,
    /// Pixels per cell for PNG output.
    #[arg(long, default_value_t = 3)]
    scale: u32,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } | Error::Format(_) => 2,
            Error::Invariant(_) => 3,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

impl CommonArgs {
    fn config(&self) -> Outcome<PipelineConfig> {
        let mut overrides = Vec::new();
        for raw in &self.set {
            overrides.push(config::parse_set(raw).map_err(Failure::usage)?);
        }
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                overrides.push((k.to_string(), v));
            }
        };
        put("g_min", self.g_min.map(Value::from));
        put("n_dir", self.n_dir.map(Value::from));
        put("f_uk", self.f_uk.map(Value::from));
        put("g_dep", self.g_dep.map(Value::from));
        put("f_obj", self.f_obj.map(Value::from));
        put("d_w", self.d_w.map(Value::from));
        put("s_o", self.s_o.map(Value::from));
        put("s_c", self.s_c.map(Value::from));
        put("robot_min_width", self.robot_min_width.map(Value::from));
        put("clearance_width", self.clearance_width.map(Value::from));
        put("prune_length", self.prune_length.map(Value::from));
        put("threads", self.threads.map(Value::from));
        config::build_config(self.config.as_deref(), &overrides).map_err(Failure::usage)
    }

    fn grid(&self) -> Outcome<OccupancyGrid> {
        input::load(&self.input).map_err(Failure::input)
    }

    /// Run the pipeline `repeat` times; all runs give the same output.
    fn run(&self, grid: &OccupancyGrid, config: &PipelineConfig) -> Outcome<(PipelineOutput, Vec<junctionmap::pipeline::StageTimings>)> {
        let mut timings = Vec::new();
        let mut last = None;
        for _ in 0..self.repeat.max(1) {
            let out = analyze(grid, config)?;
            timings.push(out.timings.clone());
            last = Some(out);
        }
        Ok((last.expect("at least one run"), timings))
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Outcome<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn dump_filtered(path: &Path, grid: &OccupancyGrid) -> Outcome<()> {
    if path.extension().is_some_and(|e| e == "pgm") {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("filtered.pgm");
        write(path, save_pgm(grid))?;
        write(&path.with_extension("yaml"), map_yaml(name, grid))
    } else {
        write(path, save_ascii(grid))
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> Outcome<()> {
    let c = &args.common;
    let config = c.config()?;
    let layers: Layers = args.layers.parse()?;
    let grid = c.grid()?;
    let (out, timings) = c.run(&grid, &config)?;
    let dir = &c.out;
    write(&dir.join("semantic.json"), pretty(&semantic_json(&out.semantic, &config)))?;
    write(&dir.join("graph.json"), pretty(&graph_json(&out.skeleton)))?;
    write(&dir.join("graph.dot"), graph_dot(&out.skeleton))?;
    let metrics = Metrics::of(&out);
    write(&dir.join("metrics.json"), pretty(&metrics))?;
    write(&dir.join("timings.json"), pretty(&timings_json(&timings)))?;
    if args.svg {
        write(&dir.join("map.svg"), render_svg(&out.filtered, &out.semantic, &out.skeleton, layers))?;
    }
    if args.png {
        write(&dir.join("map.png"), render_png(&out.filtered, &out.semantic, &out.skeleton, layers, 3))?;
    }
    if let Some(path) = &args.dump_filtered {
        dump_filtered(path, &out.filtered)?;
    }
    println!(
        "nodes {} (branch {}, end {}), intersections {}, pathways {}, openings {}, {:.3} s",
        metrics.nodes,
        metrics.branch_points,
        metrics.endpoints,
        metrics.intersections,
        metrics.paths + metrics.dead_ends + metrics.frontier_pathways,
        metrics.openings,
        out.timings.total
    );
    Ok(())
}

fn cmd_compare(c: &CommonArgs) -> Outcome<()> {
    let config = c.config()?;
    let grid = c.grid()?;
    let mut runs = Vec::new();
    for _ in 0..c.repeat.max(1) {
        runs.push(compare(&grid, &config)?);
    }
    let mut rows = runs[0].clone();
    for (k, row) in rows.iter_mut().enumerate() {
        let mut secs: Vec<f64> = runs.iter().map(|r| r[k].seconds).collect();
        secs.sort_by(f64::total_cmp);
        row.seconds = secs[secs.len() / 2];
    }
    write(&c.out.join("compare.csv"), compare_csv(&rows))?;
    write(&c.out.join("compare.json"), pretty(&rows))?;
    println!("{:<6} {:>8} {:>10}", "method", "nodes", "seconds");
    for r in &rows {
        println!("{:<6} {:>8} {:>10.4}", r.method, r.nodes, r.seconds);
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> Outcome<()> {
    let c = &args.common;
    let config = c.config()?;
    let layers: Layers = args.layers.parse()?;
    let grid = c.grid()?;
    let out = analyze(&grid, &config)?;
    let path = args.image.clone().unwrap_or_else(|| c.out.join("map.svg"));
    if path.extension().is_some_and(|e| e == "png") {
        write(&path, render_png(&out.filtered, &out.semantic, &out.skeleton, layers, args.scale))?;
    } else {
        write(&path, render_svg(&out.filtered, &out.semantic, &out.skeleton, layers))?;
    }
    println!("{}", path.display());
    Ok(())
}

fn cmd_bench(c: &CommonArgs) -> Outcome<()> {
    let config = c.config()?;
    let grid = c.grid()?;
    let (out, timings) = c.run(&grid, &config)?;
    let report = timings_json(&timings);
    write(&c.out.join("timings.json"), pretty(&report))?;
    println!("{}x{} cells, {} runs, nodes {}", grid.rows(), grid.cols(), timings.len(), out.skeleton.node_count());
    if let Value::Object(m) = &report["median"] {
        for (stage, secs) in m {
            println!("{stage:<9} {:.4}", secs.as_f64().unwrap_or(0.0));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Compare(c) => cmd_compare(c),
        Command::Render(r) => cmd_render(r),
        Command::Bench(c) => cmd_bench(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
