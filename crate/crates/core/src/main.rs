use std::error::Error as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nlsfv::damping::{check_geometric_condition, damping_ratio_bound, DampingPreset, RatioSampling};
use nlsfv::experiments::{convergence_study, emit_report, parse_levels, run_example, Example, ExperimentConfig, Scale};
use nlsfv::mesh::{generate_mesh, save_mesh, validate_admissibility, MeshOptions};
use nlsfv::{DomainSpec, Error, Result, Vec2};

#[derive(Parser)]
#[command(name = "nlsfv", version, about = "Finite-volume simulator for the damped defocusing NLS on 2-D domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the reference examples or a custom configuration.
    Simulate(SimulateArgs),
    /// Generate a centroidal Voronoi mesh and write it as JSON.
    Mesh(MeshArgs),
    /// Run a refinement study against the finest level.
    Converge(ConvergeArgs),
    /// Check the damping ratio bound and the geometric control condition.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Full,
    Reduced,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Full => Scale::Full,
            ScaleArg::Reduced => Scale::Reduced,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// I, II, III, IV or custom.
    #[arg(long, default_value = "I")]
    example: Example,
    #[arg(long, value_enum, default_value = "full")]
    scale: ScaleArg,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// zero, example1..example4, constant:C, radial_quadratic:R0, custom:PATH
    #[arg(long)]
    damping: Option<String>,
    /// disk:R or annulus:RI,RO
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    picard_tol: Option<f64>,
    #[arg(long)]
    krylov_tol: Option<f64>,
    #[arg(long)]
    no_nonlinearity: bool,
    /// Right Jacobi preconditioning for GMRES.
    #[arg(long)]
    jacobi: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// a,b
    #[arg(long)]
    fit_window: Option<String>,
    #[arg(long)]
    mesh_file: Option<PathBuf>,
    #[arg(long)]
    save_mesh: Option<PathBuf>,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, default_value = "disk:10")]
    domain: String,
    #[arg(long, default_value_t = 2000)]
    cells: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "mesh.json")]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ConvergeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// "(cells,dt);(cells,dt);…" ordered coarse to fine.
    #[arg(long)]
    levels: String,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ValidateArgs {
    #[arg(long, default_value = "example1")]
    damping: String,
    #[arg(long, default_value = "disk:10")]
    domain: String,
    /// x,y
    #[arg(long, default_value = "0,0")]
    observer: String,
    /// Boundary samples per circle.
    #[arg(long, default_value_t = 720)]
    samples: usize,
    /// Radial samples for the ratio bound.
    #[arg(long, default_value_t = 2001)]
    resolution: usize,
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidConfig(format!("{what} `{s}` must be `a,b`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn build_config(c: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::with_scale(c.example, c.scale.into());
    if let Some(n) = c.cells {
        cfg.n_cells = n;
    }
    if let Some(dt) = c.dt {
        cfg.dt = dt;
    }
    if let Some(t) = c.t_final {
        cfg.t_final = t;
    }
    if let Some(p) = c.p {
        cfg.p = p;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(d) = &c.damping {
        cfg.damping = DampingPreset::parse(d)?;
    }
    if let Some(d) = &c.domain {
        cfg.domain = DomainSpec::parse(d)?;
    }
    if let Some(t) = c.picard_tol {
        cfg.picard_tol = t;
    }
    if let Some(t) = c.krylov_tol {
        cfg.krylov_tol = t;
    }
    cfg.nonlinearity = !c.no_nonlinearity;
    cfg.jacobi = c.jacobi;
    cfg.scheme().validate()?;
    Ok(cfg)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = build_config(&args.common)?;
    if let Some(r) = args.record_every {
        cfg.record_every = r;
    }
    cfg.snapshot_every = args.snapshot_every;
    if let Some(w) = &args.fit_window {
        cfg.fit_window = Some(parse_pair(w, "fit window")?);
    }
    cfg.mesh_file = args.mesh_file;
    cfg.save_mesh = args.save_mesh;
    let result = run_example(&cfg)?;
    let summary = emit_report(&result, &args.common.out)?;
    println!(
        "cells {}  h {:.5}  steps {}  picard mean {:.2} max {}",
        summary.mesh.n_cells,
        summary.mesh.h,
        summary.solver.steps,
        summary.solver.picard_iters_mean,
        summary.solver.picard_iters_max
    );
    let last = result.output.series.last().expect("series has t = 0");
    println!("E0 {:.6e} -> {:.6e}  E1 {:.6e} -> {:.6e}", result.output.series[0].e0, last.e0, result.output.series[0].e1, last.e1);
    match (&summary.fit, &summary.fit_error) {
        (Some(f), _) => println!("decay fit on [{}, {}]: gamma {:.6e}  C {:.4}  r2 {:.4}", f.window[0], f.window[1], f.gamma, f.c, f.r_squared),
        (None, Some(e)) => println!("decay fit unavailable: {e}"),
        (None, None) => {}
    }
    println!("wrote {}", args.common.out.display());
    Ok(())
}

fn mesh(args: MeshArgs) -> Result<()> {
    let domain = DomainSpec::parse(&args.domain)?;
    let mesh = generate_mesh(&domain, &MeshOptions::new(&domain, args.cells, args.seed))?;
    let report = validate_admissibility(&mesh, 1e-9);
    save_mesh(&mesh, &args.out)?;
    println!(
        "cells {}  faces {}  h {:.5}  orthogonality {:.2e}  area defect {:.2e}",
        mesh.n_cells(),
        mesh.faces().len(),
        mesh.h(),
        report.orthogonality_max,
        report.area_defect
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn converge(args: ConvergeArgs) -> Result<()> {
    let cfg = build_config(&args.common)?;
    let levels = parse_levels(&args.levels)?;
    let table = convergence_study(&cfg, &levels, cfg.t_final)?;
    let dir = &args.common.out;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let csv = table.to_csv();
    let path = dir.join("convergence.csv");
    std::fs::write(&path, &csv).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    print!("{csv}");
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<()> {
    let domain = DomainSpec::parse(&args.domain)?;
    let profile = match DampingPreset::parse(&args.damping)? {
        DampingPreset::Profile(p) => p,
        DampingPreset::Custom(_) => {
            return Err(Error::InvalidConfig("validation needs an analytic damping profile".into()))
        }
    };
    let (ox, oy) = parse_pair(&args.observer, "observer")?;
    let sampling = RatioSampling::new(domain.outer_radius(), args.resolution);
    let bound = damping_ratio_bound(&profile, &sampling);
    println!("damping {}", profile.name());
    match bound.analytic_sup {
        Some(a) => println!("sup |grad a|^2 / a: sampled {:.6e}  analytic {:.6e}", bound.sup_ratio, a),
        None => println!("sup |grad a|^2 / a: sampled {:.6e}  (no analytic bound)", bound.sup_ratio),
    }
    let report = check_geometric_condition(&domain, &profile, Vec2::new(ox, oy), args.samples);
    println!(
        "geometric condition with observer ({ox}, {oy}): {}  ({} samples, {} violations)",
        if report.covered { "satisfied" } else { "violated" },
        report.samples,
        report.violations.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Mesh(a) => mesh(a),
        Command::Converge(a) => converge(a),
        Command::Validate(a) => validate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = e.source();
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
