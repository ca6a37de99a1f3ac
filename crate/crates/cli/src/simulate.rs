use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ordpat_core::ingest::{write_matrix_csv, write_pgm16};
use ordpat_core::par::{self, Execution};
use ordpat_core::stats::analyze_with;
use ordpat_core::synth::{checkerboard, fractal_surface, ramp, white_noise, FractalSpec};
use ordpat_core::{Delay, Grid};

use crate::output::{open_output, Row, Simulation, TableWriter};
use crate::{with_jobs, CommonArgs, Dims, EXIT_USAGE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Fractal,
    Noise,
    Checkerboard,
    Ramp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridFormat {
    Pgm,
    Csv,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Model::Fractal)]
    pub model: Model,

    /// Hurst exponents for fractal surfaces; repeat for a sweep
    #[arg(long = "hurst", default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])]
    pub hursts: Vec<f64>,

    /// Images per parameter value
    #[arg(long, default_value_t = 20)]
    pub count: usize,

    /// Fractal side is 2^level + 1
    #[arg(long, default_value_t = 9)]
    pub level: u32,

    #[arg(long, default_value_t = 1.0)]
    pub sigma0: f64,

    /// Size ROWSxCOLS of noise, checkerboard and ramp images
    #[arg(long, default_value = "128x128")]
    pub size: Dims,

    /// Write every generated grid into this directory
    #[arg(long = "write-grids")]
    pub write_grids: Option<PathBuf>,

    #[arg(long = "grid-format", value_enum, default_value_t = GridFormat::Pgm)]
    pub grid_format: GridFormat,

    #[command(flatten)]
    pub common: CommonArgs,
}

struct Job {
    id: String,
    hurst: Option<f64>,
    seed: u64,
}

impl SimulateArgs {
    fn jobs(&self) -> Vec<Job> {
        let base = self.common.seed;
        let tag = match self.model {
            Model::Fractal => "fractal",
            Model::Noise => "noise",
            Model::Checkerboard => "checkerboard",
            Model::Ramp => "ramp",
        };
        let hursts: Vec<Option<f64>> = match self.model {
            Model::Fractal => self.hursts.iter().copied().map(Some).collect(),
            _ => vec![None],
        };
        let mut jobs = Vec::new();
        for (h_idx, hurst) in hursts.iter().enumerate() {
            for i in 0..self.count {
                let seed = base.wrapping_add((h_idx * self.count + i) as u64);
                let id = match hurst {
                    Some(h) => format!("{tag}-H{h}-{i:03}"),
                    None => format!("{tag}-{i:03}"),
                };
                jobs.push(Job {
                    id,
                    hurst: *hurst,
                    seed,
                });
            }
        }
        jobs
    }

    fn generate(&self, job: &Job) -> Result<Grid, String> {
        let Dims { rows, cols } = self.size;
        let grid = match self.model {
            Model::Fractal => fractal_surface(&FractalSpec {
                level: self.level,
                hurst: job.hurst.expect("fractal jobs carry H"),
                seed: job.seed,
                sigma0: self.sigma0,
            }),
            Model::Noise => white_noise(rows, cols, job.seed),
            Model::Checkerboard => checkerboard(rows, cols, 0.0, 255.0),
            Model::Ramp => ramp(rows, cols, 1.0, 1.0, 0.0),
        };
        grid.map_err(|e| e.to_string())
    }

    fn validate(&self) -> Result<(), String> {
        if self.count == 0 {
            return Err("--count must be positive".into());
        }
        if self.model == Model::Fractal {
            for &h in &self.hursts {
                FractalSpec {
                    level: self.level,
                    hurst: h,
                    seed: 0,
                    sigma0: self.sigma0,
                }
                .validate()
                .map_err(|e| e.to_string())?;
            }
        }
        let side = match self.model {
            Model::Fractal => (1usize << self.level.min(30)) + 1,
            _ => self.size.rows.min(self.size.cols),
        };
        if let Some(&d) = self.common.delays.iter().find(|&&d| d as usize >= side) {
            return Err(format!("delay {d} too large for images of side {side}"));
        }
        Ok(())
    }
}

fn simulate_one(args: &SimulateArgs, job: &Job, delays: &[usize], policy: &ordpat_core::TieBreakPolicy) -> Result<Vec<Row>, String> {
    let grid = args.generate(job)?;
    if let Some(dir) = &args.write_grids {
        let result = match args.grid_format {
            GridFormat::Pgm => write_pgm16(&grid, &dir.join(format!("{}.pgm", job.id))).map_err(|e| e.to_string()),
            GridFormat::Csv => fs::File::create(dir.join(format!("{}.csv", job.id)))
                .and_then(|f| write_matrix_csv(&grid, std::io::BufWriter::new(f)))
                .map_err(|e| e.to_string()),
        };
        result.map_err(|e| format!("{}: {e}", job.id))?;
    }
    delays
        .iter()
        .map(|&d| {
            let features =
                analyze_with(&grid, Delay::isotropic(d), policy, Execution::Sequential).map_err(|e| e.to_string())?;
            Ok(Row {
                id: job.id.clone(),
                tile: 0,
                features,
                simulation: Some(Simulation {
                    hurst: job.hurst,
                    seed: job.seed,
                }),
            })
        })
        .collect()
}

pub fn run(args: SimulateArgs) -> u8 {
    let policy = match args.common.policy().and_then(|p| args.validate().map(|_| p)) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(dir) = &args.write_grids {
        if let Err(e) = fs::create_dir_all(dir) {
            eprintln!("error: {}: {e}", dir.display());
            return 1;
        }
    }
    let jobs = args.jobs();
    let delays = args.common.delays();
    let results = match with_jobs(args.common.jobs, || {
        par::map_slice(Execution::default(), &jobs, |job| simulate_one(&args, job, &delays, &policy))
    }) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };

    let written = open_output(args.common.out.as_deref()).and_then(|out| {
        let mut w = TableWriter::new(out, args.common.format, args.common.patterns, true)?;
        for result in &results {
            match result {
                Ok(rows) => {
                    for row in rows {
                        w.write(row)?;
                    }
                }
                Err(e) => return Err(std::io::Error::other(e.clone())),
            }
        }
        w.finish()
    });
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
