//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_benchmark, BenchConfig};
use crate::blockpart::BlockMode;
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::io;
use crate::kernels::{Kernel, KernelKind};
use crate::pum::{pum_interpolate, EvalGrid, PumConfig, RunReport, TruthFn};
use crate::reconstruct::{reconstruct, unit_sphere_cloud, OrientedCloud, ReconstructConfig};
use crate::separatrix::{fit_separatrix, sample_separatrix, CompetitionParams, Integrator};
use crate::shapes::Shape;
use crate::validation::TestFunction;

#[derive(Parser, Debug)]
#[command(name = "pumblock", version, about = "Partition of unity interpolation with block-based range search")]
pub struct Cli {
    /// Worker threads (falls back to PUM_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Interpolate scattered data on its convex hull.
    Interpolate(InterpolateArgs),
    /// Reconstruct an implicit surface from an oriented point cloud.
    Reconstruct(ReconstructArgs),
    /// Time structure construction and range search across sizes.
    Benchmark(BenchmarkArgs),
    /// Sample and interpolate the separatrix of the competition model.
    SeparatrixDemo(SeparatrixArgs),
    /// Write Halton points restricted to a built-in shape.
    GenPoints(GenArgs),
}

#[derive(Args, Debug)]
pub struct InterpolateArgs {
    /// Point file with coordinates and an optional value column.
    #[arg(long, conflicts_with = "gen")]
    pub points: Option<PathBuf>,
    /// Generate the data instead (only `halton`).
    #[arg(long, value_parser = ["halton"])]
    pub gen: Option<String>,
    /// Raw number of generated points before restriction to the shape.
    #[arg(long, requires = "gen")]
    pub n: Option<usize>,
    #[arg(long, requires = "gen")]
    pub shape: Option<Shape>,
    /// Test function providing data values and the error reference.
    #[arg(long)]
    pub func: Option<TestFunction>,
    #[arg(long, default_value = "wendland-c2")]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// e.g. 40x40 or 20x20x20
    #[arg(long)]
    pub eval_grid: Option<EvalGrid>,
    #[arg(long, default_value = "cover")]
    pub block_mode: BlockMode,
    /// Number of subdomain centres on the bounding box.
    #[arg(long)]
    pub d_r: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Evaluation points with interpolated values.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON run report; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Zero all timing fields so reports are reproducible byte for byte.
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    /// Rows of `x y z nx ny nz`.
    #[arg(long, conflicts_with = "sphere")]
    pub points: Option<PathBuf>,
    /// Use this many points of the unit sphere instead.
    #[arg(long)]
    pub sphere: Option<usize>,
    /// Off-surface step (default: 1% of the bounding box edge).
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, default_value = "wu-c4")]
    pub kernel: KernelKind,
    /// Shape parameter (default: support equal to the subdomain diameter).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub d_r: Option<usize>,
    #[arg(long, default_value = "32x32x32")]
    pub grid: EvalGrid,
    #[arg(long, default_value = "cover")]
    pub block_mode: BlockMode,
    /// Output value grid.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    #[arg(long, value_delimiter = ',', default_value = "10000,40000,160000,640000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, default_value = "cover")]
    pub block_mode: BlockMode,
    /// Queries per size compared against brute force.
    #[arg(long, default_value_t = 1000)]
    pub brute_sample: usize,
    /// JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SeparatrixArgs {
    /// Lattice nodes per axis.
    #[arg(long, default_value_t = 10)]
    pub lattice: usize,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
    #[arg(long, default_value_t = 500.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value = "40x40")]
    pub eval_grid: EvalGrid,
    /// Separatrix samples as a 3D point file.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Interpolated height field on the evaluation points.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub shape: Shape,
    /// Append values of this function.
    #[arg(long)]
    pub func: Option<TestFunction>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_or_stdout(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = io::create(p)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
        }
    }
    Ok(())
}

fn emit_report(path: Option<&Path>, report: &RunReport, no_timings: bool) -> Result<()> {
    let text = report.to_json(!no_timings);
    write_or_stdout(path, |w| Ok(writeln!(w, "{text}")?))
}

fn with_function_values(mut pts: PointSet, func: TestFunction) -> Result<PointSet> {
    if pts.dim() != func.dim() {
        return Err(Error::DimensionMismatch {
            expected: func.dim(),
            got: pts.dim(),
        });
    }
    let v = pts.iter().map(|p| func.eval_unchecked(p)).collect();
    pts.set_values(v)?;
    Ok(pts)
}

pub fn cmd_interpolate(a: &InterpolateArgs) -> Result<()> {
    let (nodes, n_raw) = match (&a.points, &a.gen) {
        (Some(path), _) => {
            let pts = match a.func {
                Some(f) => {
                    let pts = io::read_points(io::open(path)?, f.dim())?;
                    if pts.values().is_some() {
                        pts
                    } else {
                        with_function_values(pts, f)?
                    }
                }
                None => io::read_valued_points(io::open(path)?)?,
            };
            (pts, None)
        }
        (None, Some(_)) => {
            let n = a.n.ok_or_else(|| Error::InvalidParameter("--gen needs --n".into()))?;
            let shape = a.shape.ok_or_else(|| Error::InvalidParameter("--gen needs --shape".into()))?;
            let func = a.func.unwrap_or(if shape.dim() == 2 { TestFunction::F1 } else { TestFunction::F3 });
            (with_function_values(shape.halton_points(n)?, func)?, Some(n))
        }
        (None, None) => return Err(Error::InvalidParameter("give --points FILE or --gen halton".into())),
    };
    let cfg = PumConfig {
        d_r: a.d_r,
        eval_grid: a.eval_grid.clone(),
        block_mode: a.block_mode,
        delta_override: a.delta,
        ..PumConfig::new(Kernel::new(a.kernel, a.epsilon)?)
    };
    let truth_fn = a
        .func
        .or_else(|| a.gen.as_ref().map(|_| if nodes.dim() == 2 { TestFunction::F1 } else { TestFunction::F3 }));
    let truth = truth_fn.map(|f| move |p: &[f64]| f.eval_unchecked(p));
    let run = pum_interpolate(&nodes, &cfg, truth.as_ref().map(|f| f as TruthFn))?;
    let mut report = run.report.clone();
    report.n_raw = n_raw;
    if let Some(out) = &a.out {
        let mut pts = run.eval_points.clone();
        pts.set_values(run.values().to_vec())?;
        write_or_stdout(Some(out), |w| io::write_points(w, &pts))?;
    }
    emit_report(a.report.as_deref(), &report, a.no_timings)
}

pub fn cmd_reconstruct(a: &ReconstructArgs) -> Result<()> {
    let cloud = match (&a.points, a.sphere) {
        (Some(path), _) => OrientedCloud::read(io::open(path)?)?,
        (None, Some(n)) => unit_sphere_cloud(n),
        (None, None) => return Err(Error::InvalidParameter("give --points FILE or --sphere N".into())),
    };
    let grid = match &a.grid {
        EvalGrid::Axes(c) if c.len() == 3 => [c[0], c[1], c[2]],
        EvalGrid::Total(n) => [(*n as f64).cbrt().round().max(1.0) as usize; 3],
        _ => return Err(Error::InvalidParameter("grid must be NXxNYxNZ".into())),
    };
    let cfg = ReconstructConfig {
        step: a.step,
        kernel: a.kernel,
        epsilon: a.epsilon,
        d_r: a.d_r,
        grid,
        block_mode: a.block_mode,
    };
    let rec = reconstruct(&cloud, &cfg)?;
    if let Some(out) = &a.out {
        write_or_stdout(Some(out), |w| rec.grid.write(w))?;
    }
    emit_report(a.report.as_deref(), &rec.report, a.no_timings)
}

pub fn cmd_benchmark(a: &BenchmarkArgs) -> Result<()> {
    let cfg = BenchConfig {
        sizes: a.sizes.clone(),
        dim: a.dim,
        repetitions: a.reps,
        block_mode: a.block_mode,
        brute_sample: a.brute_sample,
    };
    let rep = run_benchmark(&cfg)?;
    if let Some(out) = &a.out {
        let json = serde_json::to_string_pretty(&rep).expect("report serializes");
        write_or_stdout(Some(out), |w| Ok(writeln!(w, "{json}")?))?;
    }
    print!("{}", rep.to_table());
    Ok(())
}

pub fn cmd_separatrix_demo(a: &SeparatrixArgs) -> Result<()> {
    let params = CompetitionParams::default();
    let it = Integrator {
        step: a.step,
        t_max: a.t_max,
        tol: a.tol,
    };
    let samples = sample_separatrix(&params, &it, a.lattice, a.tol)?;
    if let Some(path) = &a.samples {
        let coords = samples.iter().flat_map(|s| s.point).collect();
        let pts = PointSet::new(3, coords)?;
        write_or_stdout(Some(path), |w| io::write_points(w, &pts))?;
    }
    let surface = fit_separatrix(&samples, a.epsilon, a.eval_grid.clone())?;
    log::info!(
        "{} samples, height axis {}, {} used",
        samples.len(),
        surface.height_axis,
        surface.data.len()
    );
    if let Some(out) = &a.out {
        let mut pts = surface.run.eval_points.clone();
        pts.set_values(surface.run.values().to_vec())?;
        write_or_stdout(Some(out), |w| io::write_points(w, &pts))?;
    }
    emit_report(a.report.as_deref(), &surface.run.report, a.no_timings)
}

pub fn cmd_gen_points(a: &GenArgs) -> Result<()> {
    let mut pts = a.shape.halton_points(a.n)?;
    if let Some(f) = a.func {
        pts = with_function_values(pts, f)?;
    }
    write_or_stdout(a.out.as_deref(), |w| io::write_points(w, &pts))
}

fn threads_from_env(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("PUM_THREADS").ok()?.trim().parse().ok())
        .filter(|&n| n > 0)
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = threads_from_env(cli.threads) {
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Interpolate(a) => cmd_interpolate(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::SeparatrixDemo(a) => cmd_separatrix_demo(a),
        Command::GenPoints(a) => cmd_gen_points(a),
    }
}

/// Process exit code for an error: 2 for file system problems, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 2,
        _ => 1,
    }
}
