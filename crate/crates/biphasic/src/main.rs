use std::path::PathBuf;
use std::process::ExitCode;

use biphasic::config::RunConfig;
use biphasic::driver::{self, SweepAxis, VerifyOptions};
use biphasic::error::exit;
use biphasic::mesh_io::write_mesh;
use biphasic::{AppError, Result};
use biphasic_core::mesh::{BoxSpec, Line, MeshSpec, QuarterCylinderSpec};
use clap::{Parser, Subcommand, ValueEnum};

/// Finite-strain biphasic finite element solver.
///
/// Exit codes: 0 success, 1 failed check or sweep run, 2 usage error,
/// 3 invalid configuration or mesh, 4 solver step failure, 5 file error.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Box,
    QuarterCylinder,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a ten-node tetrahedral mesh and print its size.
    Mesh {
        #[arg(long, value_enum)]
        shape: Shape,
        /// Quarter-cylinder resolution level (1 to 4).
        #[arg(long, conflicts_with_all = ["nc", "nr"])]
        level: Option<usize>,
        /// Cylinder radius, mm.
        #[arg(long, default_value_t = 18.0)]
        radius: f64,
        /// Cylinder or box height, mm.
        #[arg(long, default_value_t = 8.0)]
        height: f64,
        /// Quarter-cylinder core divisions.
        #[arg(long)]
        nc: Option<usize>,
        /// Quarter-cylinder radial divisions.
        #[arg(long)]
        nr: Option<usize>,
        /// Divisions through the height.
        #[arg(long)]
        nz: Option<usize>,
        /// Box edge lengths, mm.
        #[arg(long, num_args = 3, value_names = ["LX", "LY", "LZ"])]
        lengths: Option<Vec<f64>>,
        /// Box cell counts.
        #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"])]
        cells: Option<Vec<usize>>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Run a compression simulation.
    Solve {
        config: PathBuf,
        /// Override a configuration entry, e.g. `fluid.permeability_mm4_per_Ns=1e-2`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory, replacing `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in verification checks.
    Verify {
        /// Consolidation resolutions to compare (1 to 3).
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        terzaghi_refine: u8,
        /// Random states per finite-difference check.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Solve a configuration for several values of one parameter, with and
    /// without stabilization.
    Sweep {
        config: PathBuf,
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_axis(s: &str) -> std::result::Result<SweepAxis, String> {
    s.parse().map_err(|e: AppError| e.to_string())
}

fn mesh_spec(
    shape: Shape,
    level: Option<usize>,
    radius: f64,
    height: f64,
    divisions: [Option<usize>; 3],
    lengths: Option<Vec<f64>>,
    cells: Option<Vec<usize>>,
) -> Result<MeshSpec> {
    match shape {
        Shape::QuarterCylinder => {
            if lengths.is_some() || cells.is_some() {
                return Err(AppError::Config(
                    "--lengths and --cells apply to boxes".into(),
                ));
            }
            let spec = match (level, divisions) {
                (Some(level), [None, None, None]) => {
                    QuarterCylinderSpec::reference(level, radius, height)?
                }
                (None, [Some(nc), Some(nr), Some(nz)]) => QuarterCylinderSpec {
                    radius,
                    height,
                    nc,
                    nr,
                    nz,
                },
                _ => {
                    return Err(AppError::Config(
                        "give either --level or all of --nc --nr --nz".into(),
                    ))
                }
            };
            Ok(MeshSpec::QuarterCylinder(spec))
        }
        Shape::Box => {
            if level.is_some() || divisions.iter().any(Option::is_some) {
                return Err(AppError::Config("boxes take --lengths and --cells".into()));
            }
            let lengths = lengths.unwrap_or_else(|| vec![1.0; 3]);
            let cells = cells.unwrap_or_else(|| vec![1; 3]);
            Ok(MeshSpec::Box(BoxSpec {
                lengths: [lengths[0], lengths[1], lengths[2]],
                cells: [cells[0], cells[1], cells[2]],
            }))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Mesh {
            shape,
            level,
            radius,
            height,
            nc,
            nr,
            nz,
            lengths,
            cells,
            output,
        } => {
            let spec = match mesh_spec(shape, level, radius, height, [nc, nr, nz], lengths, cells) {
                Ok(spec) => spec,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(exit::USAGE);
                }
            };
            let mesh = driver::mesh_from_spec(&spec)?;
            write_mesh(&mesh, &output)?;
            let stats = driver::mesh_stats(&mesh, &Line::vertical(0.0, 0.0));
            println!("nodes {}", stats.nodes);
            println!("elements {}", stats.elements);
            println!("reference_line_elements {}", stats.line_elements);
            Ok(exit::OK)
        }
        Command::Solve {
            config,
            overrides,
            out,
        } => {
            let mut cfg = RunConfig::load(&config, &overrides)?;
            if let Some(out) = out {
                cfg.output.dir = out;
            }
            let run = driver::solve(&cfg)?;
            let s = &run.summary;
            println!("output {}", cfg.output.dir.display());
            println!("steps {}", s.steps);
            println!("newton_iterations {}", s.newton.total_iterations);
            println!("peak_pressure_mpa {:e}", s.peak_pressure_mpa);
            match (&s.metrics, &s.metric_error) {
                (Some(m), _) => {
                    println!("overshoot_pct {:.4}", m.overshoot_pct);
                    println!("undershoot_pct {:.4}", m.undershoot_pct);
                    println!("max_deviation_pct {:.4}", m.max_deviation_pct);
                }
                (None, Some(e)) => eprintln!("oscillation metric not available: {e}"),
                (None, None) => {}
            }
            Ok(exit::OK)
        }
        Command::Verify {
            terzaghi_refine,
            trials,
            seed,
        } => {
            let checks = driver::verify(&VerifyOptions {
                trials,
                seed,
                terzaghi_refine: terzaghi_refine.into(),
            })?;
            for c in &checks {
                let limit = c.limit.map_or("-".to_string(), |l| format!("{l:.1e}"));
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                println!(
                    "{verdict}  {:<48} {:>12.3e}  limit {limit}",
                    c.name, c.value
                );
            }
            Ok(if checks.iter().all(|c| c.passed) {
                exit::OK
            } else {
                exit::CHECK_FAILED
            })
        }
        Command::Sweep {
            config,
            axis,
            values,
            overrides,
            out,
        } => {
            let cfg = RunConfig::load(&config, &overrides)?;
            let out = out.unwrap_or_else(|| cfg.output.dir.clone());
            let rows = driver::sweep(&cfg, axis, &values, &out)?;
            println!("axis_value,gls,overshoot_pct,undershoot_pct,peak_pressure_mpa,newton_iters_total,status");
            for r in &rows {
                println!(
                    "{:?},{},{:.4},{:.4},{:e},{},{}",
                    r.axis_value,
                    r.gls,
                    r.overshoot_pct,
                    r.undershoot_pct,
                    r.peak_pressure_mpa,
                    r.newton_iters_total,
                    r.status
                );
            }
            for r in rows.iter().filter(|r| r.status.is_failure()) {
                eprintln!("run {} (gls {}) {}", r.axis_value, r.gls, r.status);
            }
            Ok(if rows.iter().any(|r| r.status.is_failure()) {
                exit::CHECK_FAILED
            } else {
                exit::OK
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
