use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use warewave::band::band_samples;
use warewave::coverage::{
    compare_maps, compute_power_map, coverage_stats, safe_range, PowerGrid, RangeMask, SafetyConfig, ScenarioSpec,
};
use warewave::geometry::{Material, Point3, RackPlacement};
use warewave::output::{fixed4, read_grid_csv, write_grid_csv, write_heatmap, write_path_dump, HeatmapStyle};
use warewave::scenario::parse_scenario;
use warewave::tracer::{evaluate_band, Tracer, TracerConfig};
use warewave::Result;

/// Ray-tracing UWB coverage simulator for rack warehouses.
#[derive(Parser)]
#[command(name = "warewave", version)]
struct Cli {
    /// Worker threads; falls back to WAREWAVE_THREADS, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the scene and write a JSON summary of it.
    Generate {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Override the rack placement seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_scene: PathBuf,
    },
    /// Compute the coverage map and report its statistics.
    Run {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_map: PathBuf,
        /// Write the paths reaching the `--dump-at` receivers to this file.
        #[arg(long)]
        paths_dump: Option<PathBuf>,
        /// Receiver `x,y` for the path dump (repeatable). Defaults to the
        /// point 6 m from the transmitter along +x.
        #[arg(long, value_parser = parse_xy)]
        dump_at: Vec<(f64, f64)>,
    },
    /// Recompute coverage statistics from a saved map.
    Stats {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = -90.0, allow_negative_numbers = true)]
        threshold: f64,
        /// Scenario the map came from; supplies the corridor layout and
        /// transmitter position.
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Compare two saved maps cell by cell.
    Compare {
        #[arg(long, num_args = 1, required = true)]
        csv: Vec<PathBuf>,
        #[arg(long, default_value_t = -90.0, allow_negative_numbers = true)]
        threshold: f64,
    },
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario file; built-in defaults when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

impl ScenarioArg {
    fn load(&self) -> Result<ScenarioSpec> {
        match &self.scenario {
            Some(p) => parse_scenario(&std::fs::read_to_string(p)?),
            None => parse_scenario(""),
        }
    }
}

fn parse_xy(s: &str) -> std::result::Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let x = x.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = y.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((x, y))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

#[derive(Serialize)]
struct SceneSummary<'a> {
    facet_count: usize,
    edge_count: usize,
    solid_count: usize,
    rng_seed: u64,
    bounds_min: [f64; 3],
    bounds_max: [f64; 3],
    materials: &'a [Material],
    racks: &'a [RackPlacement],
}

fn generate(spec: &ScenarioSpec, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut spec = spec.clone();
    if let Some(s) = seed {
        spec.warehouse.rng_seed = s;
    }
    let scene = spec.build_scene()?;
    let summary = SceneSummary {
        facet_count: scene.facets.len(),
        edge_count: scene.edges.len(),
        solid_count: scene.solids.len(),
        rng_seed: spec.warehouse.rng_seed,
        bounds_min: scene.bounds.min.coords.into(),
        bounds_max: scene.bounds.max.coords.into(),
        materials: &scene.materials,
        racks: &scene.racks,
    };
    let mut w = create(out)?;
    serde_json::to_writer_pretty(&mut w, &summary).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    println!("facets {}", summary.facet_count);
    println!("edges {}", summary.edge_count);
    println!("racks {}", summary.racks.len());
    Ok(())
}

fn report(grid: &PowerGrid, spec: &ScenarioSpec, threshold: f64) {
    let stats = coverage_stats(grid, threshold);
    let safety = SafetyConfig {
        threshold_dbm: threshold,
        ..SafetyConfig::default()
    };
    let range = safe_range(grid, spec.tx_xy(), &safety, RangeMask::Corridor);
    println!("covered_fraction {}", fixed4(stats.covered_fraction));
    println!("corridor_covered_fraction {}", fixed4(stats.corridor_covered_fraction));
    println!("shadow_regions {}", stats.shadow_regions.len());
    println!("safe_range_m {}", fixed4(range));
}

fn run(
    spec: &ScenarioSpec,
    out_csv: &Path,
    out_map: &Path,
    paths_dump: Option<&Path>,
    dump_at: &[(f64, f64)],
) -> Result<()> {
    let scene = spec.build_scene()?;
    let grid = compute_power_map(&scene, spec)?;
    let mut w = create(out_csv)?;
    write_grid_csv(&grid, &mut w)?;
    w.flush()?;
    let mut w = create(out_map)?;
    write_heatmap(&grid, &HeatmapStyle::default(), &mut w)?;
    w.flush()?;

    if let Some(dump) = paths_dump {
        let points = if dump_at.is_empty() {
            vec![(spec.tx_position.x + SafetyConfig::default().stop_distance, spec.tx_position.y)]
        } else {
            dump_at.to_vec()
        };
        let cfg = TracerConfig {
            pruning_frequency_hz: spec.band.lowest_frequency(),
            ..spec.tracer
        };
        let tracer = Tracer::new(&scene, spec.tx_position, cfg)?;
        let mut freqs: Vec<f64> = band_samples(&spec.band).iter().map(|s| s.0).collect();
        freqs.push(spec.band.center_frequency);
        let mut w = create(dump)?;
        for (x, y) in points {
            let rx = Point3::new(x, y, spec.rx_height);
            let mut paths = tracer.paths_to(&rx);
            for p in &mut paths {
                evaluate_band(&scene, p, &freqs, &spec.tx_antenna_model(), &spec.rx_antenna_at(rx));
            }
            if paths.is_empty() {
                writeln!(w, "rx {} {} {}  paths 0", fixed4(x), fixed4(y), fixed4(spec.rx_height))?;
            }
            write_path_dump(&scene, &paths, &spec.band, &spec.budget, &mut w)?;
        }
        w.flush()?;
    }

    report(&grid, spec, spec.budget.threshold_dbm());
    Ok(())
}

fn read_csv(path: &Path) -> Result<PowerGrid> {
    read_grid_csv(BufReader::new(File::open(path)?))
}

fn stats(csv: &Path, threshold: f64, spec: &ScenarioSpec) -> Result<()> {
    let mut grid = read_csv(csv)?;
    for i in 0..grid.len() {
        let (x, y) = grid.cell_center(i);
        grid.corridor_mask[i] = spec.is_corridor(x, y);
    }
    report(&grid, spec, threshold);
    Ok(())
}

fn compare(csv: &[PathBuf], threshold: f64) -> Result<()> {
    if csv.len() != 2 {
        return Err(warewave::Error::Range(format!("compare needs exactly two --csv files, got {}", csv.len())));
    }
    let a = read_csv(&csv[0])?;
    let b = read_csv(&csv[1])?;
    let c = compare_maps(&a, &b, threshold)?;
    println!("disagreement {}", fixed4(c.classification_disagreement_fraction));
    println!("mean_abs_diff_db {}", fixed4(c.mean_abs_diff_db));
    println!("coverage_delta {}", fixed4(c.coverage_delta));
    Ok(())
}

fn thread_count(flag: Option<usize>) -> std::result::Result<Option<usize>, String> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("WAREWAVE_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("WAREWAVE_THREADS must be a positive integer, got `{v}`")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match thread_count(cli.threads) {
        Ok(Some(0)) => {
            eprintln!("error: thread count must be at least 1");
            return ExitCode::FAILURE;
        }
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }

    let result = match &cli.command {
        Command::Generate {
            scenario,
            seed,
            out_scene,
        } => scenario.load().and_then(|s| generate(&s, *seed, out_scene)),
        Command::Run {
            scenario,
            out_csv,
            out_map,
            paths_dump,
            dump_at,
        } => scenario
            .load()
            .and_then(|s| run(&s, out_csv, out_map, paths_dump.as_deref(), dump_at)),
        Command::Stats {
            csv,
            threshold,
            scenario,
        } => scenario.load().and_then(|s| stats(csv, *threshold, &s)),
        Command::Compare { csv, threshold } => compare(csv, *threshold),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
