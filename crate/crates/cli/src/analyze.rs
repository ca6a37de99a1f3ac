use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use ordpat_core::ingest::{is_supported_path, load_grid, normalize_default, tile};
use ordpat_core::par::{self, Execution};
use ordpat_core::stats::analyze_with;
use ordpat_core::{Delay, Grid, TieBreakPolicy};

use crate::output::{open_output, Row, TableWriter};
use crate::{with_jobs, CommonArgs, Dims, EXIT_DECODE, EXIT_USAGE};

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Image files (PNG, BMP, TIFF, PGM/PPM), numeric matrices (CSV/TXT) or directories
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,

    /// Cut each input into ROWSxCOLS tiles
    #[arg(long)]
    pub tiles: Option<Dims>,

    /// Tile size ROWSxCOLS in pixels
    #[arg(long = "tile-size")]
    pub tile_size: Option<Dims>,

    /// Rescale to mean 127 and standard deviation 40 before analysis
    #[arg(long)]
    pub normalize: bool,

    #[command(flatten)]
    pub common: CommonArgs,
}

/// Expands directories into their supported files, sorted by name.
fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, String> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(input)
                .map_err(|e| format!("{}: {e}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_supported_path(p))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

/// Tile size and count, each derived from the other when only one is given.
fn tiling(grid: &Grid, tiles: Option<Dims>, size: Option<Dims>) -> Option<(Dims, Dims)> {
    match (tiles, size) {
        (None, None) => None,
        (Some(t), Some(s)) => Some((s, t)),
        (Some(t), None) => Some((
            Dims {
                rows: grid.rows() / t.rows,
                cols: grid.cols() / t.cols,
            },
            t,
        )),
        (None, Some(s)) => Some((
            s,
            Dims {
                rows: grid.rows() / s.rows,
                cols: grid.cols() / s.cols,
            },
        )),
    }
}

fn analyze_file(path: &Path, args: &AnalyzeArgs, policy: &TieBreakPolicy, delays: &[usize]) -> Result<Vec<Row>, String> {
    let mut grid = load_grid(path).map_err(|e| match e {
        ordpat_core::Error::Io(e) => format!("{}: {e}", path.display()),
        e => e.to_string(),
    })?;
    if args.normalize {
        grid = normalize_default(&grid).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let tiles = match tiling(&grid, args.tiles, args.tile_size) {
        None => vec![grid],
        Some((size, count)) => {
            tile(&grid, size.rows, size.cols, count.rows, count.cols).map_err(|e| format!("{}: {e}", path.display()))?
        }
    };
    let id = path.display().to_string();
    let mut rows = Vec::with_capacity(tiles.len() * delays.len());
    for (t, g) in tiles.iter().enumerate() {
        for &d in delays {
            let features = analyze_with(g, Delay::isotropic(d), policy, Execution::Sequential)
                .map_err(|e| format!("{id} tile {t}: {e}"))?;
            rows.push(Row {
                id: id.clone(),
                tile: t,
                features,
                simulation: None,
            });
        }
    }
    Ok(rows)
}

pub fn run(args: AnalyzeArgs) -> u8 {
    let policy = match args.common.policy() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let files = match collect_inputs(&args.inputs) {
        Ok(f) if f.is_empty() => {
            eprintln!("error: no supported input files");
            return EXIT_USAGE;
        }
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_DECODE;
        }
    };
    let delays = args.common.delays();

    let results = match with_jobs(args.common.jobs, || {
        par::map_slice(Execution::default(), &files, |f| analyze_file(f, &args, &policy, &delays))
    }) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };

    let out = match open_output(args.common.out.as_deref()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot open output: {e}");
            return 1;
        }
    };
    let mut failed = 0usize;
    let written = TableWriter::new(out, args.common.format, args.common.patterns, false).and_then(|mut w| {
        for result in &results {
            match result {
                Ok(rows) => {
                    for row in rows {
                        w.write(row)?;
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    failed += 1;
                }
            }
        }
        w.finish()
    });
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return 1;
    }
    if failed > 0 {
        eprintln!("{failed} of {} inputs failed", files.len());
        return EXIT_DECODE;
    }
    0
}
