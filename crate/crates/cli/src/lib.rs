//! The `catsurf` command line: argument parsing, file formats and reports.

pub mod commands;
pub mod io;
pub mod report;
pub mod svg;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use catsurf_core::smoothing::Mode;
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Bundled;
use report::RunReport;

#[derive(Debug, Parser)]
#[command(name = "catsurf", version, about = "Check, refine, triangulate and smooth cone-metric surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct Output {
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Include wall time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a surface and run curvature and comparison checks.
    Check {
        /// Surface file (JSON, or OFF for flat meshes).
        surface: PathBuf,
        /// Curvature bound for --cat-faces; defaults to the largest face curvature.
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
        /// Check Gauss–Bonnet globally and on single-face and vertex-star disks.
        #[arg(long)]
        gauss_bonnet: bool,
        /// Run the sampled CAT(κ) test on every face.
        #[arg(long)]
        cat_faces: bool,
        /// Boundary samples per side for --cat-faces.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Plan and certify the smoothing of every cone vertex.
    Smooth {
        /// Surface file (JSON, or OFF for flat meshes).
        surface: PathBuf,
        /// Total budget for ball radii and cap sizes.
        #[arg(long, allow_hyphen_values = true)]
        epsilon: f64,
        /// Background geometry of the smoothing.
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Radial grid size for certification.
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        /// Smoothing plan JSON output.
        #[arg(long)]
        out_plan: Option<PathBuf>,
        /// Directory for per-vertex CSV profiles.
        #[arg(long)]
        out_profiles_dir: Option<PathBuf>,
        /// Also write an SVG next to each profile.
        #[arg(long)]
        svg: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Midpoint-refine a surface and track edge-graph distances.
    Refine {
        /// Surface file (JSON, or OFF for flat meshes).
        surface: PathBuf,
        /// Number of midpoint refinement rounds.
        #[arg(long, default_value_t = 1)]
        levels: u32,
        /// Track the distance between two vertices across levels.
        #[arg(long, num_args = 2, value_names = ["U", "V"])]
        distance: Option<Vec<usize>>,
        /// Refined surface output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV table of distances and gaps.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Add chi and omega blocks to the refined surface.
        #[arg(long)]
        derived: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Vertex-edge refinement of a triangle relative to a polygon family.
    Triangulate {
        /// Scene JSON with a parent triangle and a polygon family.
        scene: PathBuf,
        /// Override the scene curvature.
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
        /// Refinement JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// SVG drawing of the refinement.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Write a bundled surface or scene.
    Gen {
        #[arg(value_enum)]
        what: BundledArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Flat,
    Hyperbolic,
    Cbb,
    SphericalCbb,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Flat => Mode::Flat,
            ModeArg::Hyperbolic => Mode::Hyperbolic,
            ModeArg::Cbb => Mode::Cbb,
            ModeArg::SphericalCbb => Mode::SphericalCbb,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BundledArg {
    Tetrahedron,
    OctantOctahedron,
    FatOctahedron,
    Cube,
    FlatTorus,
    Icosahedron,
    RandomConvex,
    TwoTriangleScene,
    RandomScene,
}

impl From<BundledArg> for Bundled {
    fn from(b: BundledArg) -> Self {
        match b {
            BundledArg::Tetrahedron => Bundled::Tetrahedron,
            BundledArg::OctantOctahedron => Bundled::OctantOctahedron,
            BundledArg::FatOctahedron => Bundled::FatOctahedron,
            BundledArg::Cube => Bundled::Cube,
            BundledArg::FlatTorus => Bundled::FlatTorus,
            BundledArg::Icosahedron => Bundled::Icosahedron,
            BundledArg::RandomConvex => Bundled::RandomConvex,
            BundledArg::TwoTriangleScene => Bundled::TwoTriangleScene,
            BundledArg::RandomScene => Bundled::RandomScene,
        }
    }
}

/// What a run printed and the exit code it asks for.
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

fn finish(mut report: RunReport, output: Output, start: Instant) -> Result<Outcome> {
    if output.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let stdout = if output.json { io::to_json(&report)? } else { report.to_string() };
    Ok(Outcome { stdout, code: if report.passed { 0 } else { 1 } })
}

/// Runs one command. Errors are input errors and map to exit code 2.
pub fn run(cli: Cli) -> Result<Outcome> {
    let start = Instant::now();
    match cli.command {
        Command::Check { surface, kappa, gauss_bonnet, cat_faces, grid, output } => {
            let r = commands::check(&commands::CheckArgs { surface, kappa, gauss_bonnet, cat_faces, grid })?;
            finish(r, output, start)
        }
        Command::Smooth { surface, epsilon, mode, grid, out_plan, out_profiles_dir, svg, output } => {
            if !(epsilon > 0.0 && epsilon.is_finite()) {
                bail!("--epsilon must be positive, got {epsilon}");
            }
            let args = commands::SmoothArgs { surface, epsilon, mode: mode.into(), grid, out_plan, out_profiles_dir, svg };
            finish(commands::smooth(&args)?, output, start)
        }
        Command::Refine { surface, levels, distance, out, table, derived, output } => {
            let distance = distance.map(|d| (d[0], d[1]));
            finish(commands::refine(&commands::RefineArgs { surface, levels, distance, out, table, derived })?, output, start)
        }
        Command::Triangulate { scene, kappa, out, svg, output } => {
            finish(commands::triangulate(&commands::TriangulateArgs { scene, kappa, out, svg })?, output, start)
        }
        Command::Gen { what, seed, out } => {
            let text = commands::gen(what.into(), seed, out.as_deref())?;
            Ok(Outcome { stdout: if out.is_some() { String::new() } else { text }, code: 0 })
        }
    }
}

/// Caps the global thread pool from `CATSURF_THREADS`.
pub fn configure_threads(value: Option<&str>) -> Result<()> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => bail!("CATSURF_THREADS must be a positive integer, got {v:?}"),
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}
