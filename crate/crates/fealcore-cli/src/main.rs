//! `fealcore` binary: convergence studies plus VTK and Matrix Market export.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fealcore::backend::Backend;
use fealcore::error::{FealError, Result};
use fealcore::mesh::{CellKind, Mesh};

use fealcore_cli::mtx::export_mtx;
use fealcore_cli::study::{
    default_levels, render_csv, run_level, run_study, LevelMode, Problem, SolverChoice, StudyConfig,
};
use fealcore_cli::vtk::{export_vtk, VtkField};

#[derive(Parser)]
#[command(
    name = "fealcore",
    version,
    about = "Finite element convergence studies and mesh/matrix export"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a refinement study and write the CSV convergence table.
    Study(StudyArgs),
    /// Write a box mesh, optionally with a solved field, as legacy VTK.
    ExportVtk(ExportVtkArgs),
    /// Write a problem's constrained system matrix in Matrix Market form.
    ExportMtx(ExportMtxArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    /// Linear elasticity on the unit cube, tetrahedral mesh.
    #[value(name = "elasticity3d")]
    Elasticity3d,
    /// Polynomial diffusion benchmark on the unit square, triangle mesh.
    #[value(name = "poisson2d")]
    Poisson2d,
}

impl ProblemArg {
    fn into_problem(self) -> Problem {
        match self {
            ProblemArg::Elasticity3d => Problem::Elasticity3d,
            ProblemArg::Poisson2d => Problem::Poisson2d,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    /// Jacobi-preconditioned conjugate gradients.
    Cg,
    /// Dense LU factorization (small systems only).
    Lu,
}

impl SolverArg {
    fn into_choice(self) -> SolverChoice {
        match self {
            SolverArg::Cg => SolverChoice::Cg,
            SolverArg::Lu => SolverChoice::Lu,
        }
    }
}

#[derive(Args)]
struct StudyArgs {
    /// Benchmark problem to refine.
    #[arg(long, value_enum, default_value = "elasticity3d")]
    problem: ProblemArg,
    /// Polynomial degree of the Lagrange space (1 to 3).
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Number of refinement levels; the default depends on the degree.
    #[arg(long)]
    levels: Option<usize>,
    /// Add one refinement level beyond the default schedule.
    #[arg(long)]
    deep: bool,
    /// Execution backend (serial or parallel); overrides FEALCORE_BACKEND.
    #[arg(long)]
    backend: Option<String>,
    /// Relative residual tolerance for the iterative solver.
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    /// Iteration cap for the iterative solver; default 10x the unknown count.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Linear solver.
    #[arg(long, value_enum, default_value = "cg")]
    solver: SolverArg,
    /// Output CSV path.
    #[arg(long, default_value = "study.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ExportVtkArgs {
    /// Solve this problem and attach the solution as a point field.
    #[arg(long, value_enum)]
    problem: Option<ProblemArg>,
    /// Polynomial degree when solving a problem.
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Box divisions per axis; one value per axis (or one shared value).
    #[arg(long, value_delimiter = ',', default_value = "4")]
    divisions: Vec<usize>,
    /// Cell kind for a bare mesh export (ignored with --problem).
    #[arg(long, value_enum, default_value = "triangle")]
    kind: KindArg,
    /// Box bounds min0,max0,min1,max1,...; default unit box.
    #[arg(long, value_delimiter = ',')]
    bounds: Option<Vec<f64>>,
    /// Execution backend (serial or parallel); overrides FEALCORE_BACKEND.
    #[arg(long)]
    backend: Option<String>,
    /// Output VTK path.
    #[arg(long, default_value = "mesh.vtk")]
    out: PathBuf,
}

#[derive(Args)]
struct ExportMtxArgs {
    /// Problem whose constrained stiffness matrix is exported.
    #[arg(long, value_enum, default_value = "poisson2d")]
    problem: ProblemArg,
    /// Polynomial degree of the Lagrange space (1 to 3).
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Box divisions per axis of the problem mesh.
    #[arg(long, default_value_t = 4)]
    divisions: usize,
    /// Execution backend (serial or parallel); overrides FEALCORE_BACKEND.
    #[arg(long)]
    backend: Option<String>,
    /// Output Matrix Market path.
    #[arg(long, default_value = "system.mtx")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Interval,
    Triangle,
    Quadrangle,
    Tetrahedron,
}

impl KindArg {
    fn into_kind(self) -> CellKind {
        match self {
            KindArg::Interval => CellKind::Interval,
            KindArg::Triangle => CellKind::Triangle,
            KindArg::Quadrangle => CellKind::Quadrangle,
            KindArg::Tetrahedron => CellKind::Tetrahedron,
        }
    }
}

/// Pick the backend: explicit flag, then FEALCORE_BACKEND, then serial.
fn resolve_backend(flag: Option<&str>) -> Result<Backend> {
    if let Some(name) = flag {
        return Backend::from_name(name);
    }
    if let Ok(name) = std::env::var("FEALCORE_BACKEND") {
        return Backend::from_name(&name);
    }
    Ok(Backend::Serial)
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| FealError::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn run_study_command(args: StudyArgs) -> Result<ExitCode> {
    let backend = resolve_backend(args.backend.as_deref())?;
    let levels = args
        .levels
        .unwrap_or_else(|| default_levels(args.degree, args.deep));
    let config = StudyConfig {
        problem: args.problem.into_problem(),
        degree: args.degree,
        levels,
        backend,
        rtol: args.rtol,
        max_iter: args.max_iter,
        solver: args.solver.into_choice(),
    };
    let records = run_study(&config)?;
    let csv = render_csv(&records);
    write_text(&args.out, &csv)?;
    print!("{csv}");
    if records.iter().any(|r| r.l2_error.is_none()) {
        eprintln!("warning: at least one level did not converge");
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn bare_mesh(args: &ExportVtkArgs, backend: Backend) -> Result<Mesh> {
    let kind = args.kind.into_kind();
    let dim = match kind {
        CellKind::Interval => 1,
        CellKind::Triangle | CellKind::Quadrangle => 2,
        CellKind::Tetrahedron => 3,
    };
    let divisions: Vec<usize> = if args.divisions.len() == 1 {
        vec![args.divisions[0]; dim]
    } else {
        args.divisions.clone()
    };
    if divisions.len() != dim {
        return Err(FealError::InvalidArgument(format!(
            "expected {dim} division counts for {}, got {}",
            kind.name(),
            divisions.len()
        )));
    }
    let bounds = match &args.bounds {
        Some(b) => b.clone(),
        None => {
            let mut b = Vec::with_capacity(2 * dim);
            for _ in 0..dim {
                b.extend_from_slice(&[0.0, 1.0]);
            }
            b
        }
    };
    Mesh::from_box(kind, &bounds, &divisions, backend)
}

fn run_export_vtk(args: ExportVtkArgs) -> Result<ExitCode> {
    let backend = resolve_backend(args.backend.as_deref())?;
    match args.problem {
        None => {
            let mesh = bare_mesh(&args, backend)?;
            export_vtk(&mesh, &[], &args.out)?;
        }
        Some(parg) => {
            let problem = parg.into_problem();
            if args.divisions.len() != 1 {
                return Err(FealError::InvalidArgument(
                    "--problem exports take a single --divisions value".into(),
                ));
            }
            let config = StudyConfig {
                problem,
                degree: args.degree,
                levels: 1,
                backend,
                rtol: 1e-10,
                max_iter: None,
                solver: SolverChoice::Cg,
            };
            let out = run_level(args.divisions[0], &config, LevelMode::Solve)?;
            let coeffs = out.coefficients.ok_or_else(|| {
                FealError::InvalidArgument("solver did not converge; nothing to export".into())
            })?;
            // Vertex DoFs come first in the global numbering and carry the
            // nodal values of the Lagrange interpolant.
            let nn = out.mesh.num_nodes();
            let nodal: Vec<f64> = coeffs[..nn * out.components].to_vec();
            let field = if out.components == 1 {
                VtkField::PointScalar {
                    name: "u".into(),
                    values: nodal,
                }
            } else {
                VtkField::PointVector {
                    name: "u".into(),
                    values: nodal,
                }
            };
            export_vtk(&out.mesh, &[field], &args.out)?;
        }
    }
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn run_export_mtx(args: ExportMtxArgs) -> Result<ExitCode> {
    let backend = resolve_backend(args.backend.as_deref())?;
    let config = StudyConfig {
        problem: args.problem.into_problem(),
        degree: args.degree,
        levels: 1,
        backend,
        rtol: 1e-10,
        max_iter: None,
        solver: SolverChoice::Cg,
    };
    let out = run_level(args.divisions, &config, LevelMode::SystemOnly)?;
    let (a, _b) = out.system.expect("system-only level keeps the system");
    export_mtx(&a, &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // Exit 2 is reserved for non-converged studies; route usage errors to 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Study(args) => run_study_command(args),
        Command::ExportVtk(args) => run_export_vtk(args),
        Command::ExportMtx(args) => run_export_mtx(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
