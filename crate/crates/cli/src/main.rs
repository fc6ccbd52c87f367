//! `koppelman`: command-line front end for the integral operators on plane
//! curves.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 when a numerical limit
//! fails to converge, 1 on I/O failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use koppelman_core::{
    growth_profile, make_curve, moment_check, parse_complex, parse_expr, represent_boundary, semigroup, solve_area,
    verify_koppelman, Complex64, Curve, CurveSpec, KernelContext, MomentConfig, PVConfig, SolveOptions, TransformRoute,
};
use serde::Serialize;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] koppelman_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_convergence() => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "koppelman", version, about = "Integral operators for the d-bar equation on singular plane curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frobenius number and gaps of the semigroup generated by r and s.
    Semigroup {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Boundary representation P_rho(phi) at the targets (CSV).
    Represent {
        #[command(flatten)]
        curve: CurveArgs,
        /// Function of tau.
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[command(flatten)]
        targets: TargetArgs,
        #[arg(long, default_value_t = 2048)]
        nodes: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Area solution K_mu(phi) at the targets (CSV).
    Solve {
        #[command(flatten)]
        curve: CurveArgs,
        /// (0,1)-form, e.g. "bump(0.04,0.36)*~tau, dbar".
        #[arg(long)]
        phi: String,
        #[command(flatten)]
        targets: TargetArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Moment pairings and strong-holomorphy verdict on a cusp (JSON).
    Moment {
        #[command(flatten)]
        curve: CurveArgs,
        /// Function of tau.
        #[arg(long)]
        phi: String,
        /// Radius of the pairing circle; the check circle has twice this radius.
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 2048)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-6)]
        moment_tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        agree_tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Finite-difference check of d-bar(K_mu phi) = phi at the targets (CSV).
    Verify {
        #[command(flatten)]
        curve: CurveArgs,
        /// (0,1)-form.
        #[arg(long)]
        phi: String,
        #[command(flatten)]
        targets: TargetArgs,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-4)]
        h: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Log-log slope of |K_mu phi| along a ray toward the singular point (JSON).
    Growth {
        #[command(flatten)]
        curve: CurveArgs,
        /// (0,1)-form.
        #[arg(long)]
        phi: String,
        /// Direction of the ray, in radians.
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        theta: f64,
        /// Radii along the ray [default: 0.1, 0.05, ..., 0.003125].
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        radii: Vec<f64>,
        /// Also write the samples (log_r, log_abs_u) as CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug)]
struct CurveArgs {
    /// Cusp exponent r (with --s).
    #[arg(long, requires = "s", conflicts_with_all = ["curve", "smooth"])]
    r: Option<u32>,
    /// Cusp exponent s (with --r).
    #[arg(long, requires = "r")]
    s: Option<u32>,
    /// Curve JSON file ({"type":"cusp",...} or {"type":"param",...}).
    #[arg(long, conflicts_with = "smooth")]
    curve: Option<PathBuf>,
    /// The smooth model curve tau -> (tau, tau).
    #[arg(long)]
    smooth: bool,
}

impl CurveArgs {
    fn load(&self) -> CliResult<Curve> {
        if let (Some(r), Some(s)) = (self.r, self.s) {
            return Ok(Curve::cusp(r, s)?);
        }
        if let Some(path) = &self.curve {
            let text = std::fs::read_to_string(path).map_err(|source| io_error(path, source))?;
            let spec: CurveSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: invalid curve JSON: {e}", path.display())))?;
            return Ok(make_curve(&spec)?);
        }
        if self.smooth {
            return Ok(Curve::smooth_model());
        }
        Err(CliError::Usage("no curve given; use --r/--s, --curve FILE or --smooth".into()))
    }
}

#[derive(Args, Debug)]
struct TargetArgs {
    /// Target parameter as a+bi; repeat or separate with commas.
    #[arg(long = "t", alias = "targets", value_delimiter = ',', required = true, allow_hyphen_values = true)]
    t: Vec<String>,
}

impl TargetArgs {
    fn parse(&self) -> CliResult<Vec<Complex64>> {
        self.t.iter().map(|s| parse_complex(s).map_err(|e| CliError::Usage(format!("target '{s}': {e}")))).collect()
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Route {
    Auto,
    Radial,
    Polar,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Weight exponent.
    #[arg(long, default_value_t = 0)]
    mu: u32,
    #[arg(long, default_value_t = 32)]
    panels: usize,
    /// Gauss-Legendre order per panel.
    #[arg(long, default_value_t = 16)]
    order: usize,
    #[arg(long, default_value_t = 1024)]
    n_theta: usize,
    /// First inner radius of the principal-value limit.
    #[arg(long, default_value_t = 0.05)]
    eps0: f64,
    #[arg(long, default_value_t = 0.5)]
    shrink: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 60)]
    max_steps: usize,
    /// Outer radius; required when the form has no bump envelope.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, value_enum, default_value_t = Route::Auto)]
    route: Route,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            panels: self.panels,
            order: self.order,
            n_theta: self.n_theta,
            pv: PVConfig { eps0: self.eps0, shrink: self.shrink, max_steps: self.max_steps, tol: self.tol },
            rho: self.rho,
            route: match self.route {
                Route::Auto => TransformRoute::Auto,
                Route::Radial => TransformRoute::Radial,
                Route::Polar => TransformRoute::Polar,
            },
        }
    }
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(File::create(path).map_err(|source| io_error(path, source))?),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut w = self.writer()?;
        serde_json::to_writer(&mut w, value)?;
        writeln!(w).and_then(|_| w.flush()).map_err(|source| self.io(source))
    }

    fn table(&self, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<()> {
        write_table(self.writer()?, header, rows)
    }

    fn io(&self, source: io::Error) -> CliError {
        let path = self.out.as_ref().map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string());
        CliError::Io { path, source }
    }
}

fn io_error(path: &Path, source: io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

fn write_table(w: impl Write, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    out.flush().map_err(|source| CliError::Io { path: "<csv>".into(), source })
}

#[derive(Serialize)]
struct SemigroupReport {
    frobenius: i64,
    gaps: Vec<u32>,
}

#[derive(Serialize)]
struct GrowthReport {
    slope: f64,
    intercept: f64,
    residual: f64,
    theta: f64,
    mu: u32,
    samples: usize,
}

fn default_radii() -> Vec<f64> {
    (0..6).map(|k| 0.1 * 0.5f64.powi(k)).collect()
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Semigroup { r, s, out } => {
            let sg = semigroup(r, s)?;
            out.json(&SemigroupReport { frobenius: sg.frobenius, gaps: sg.gaps })
        }
        Command::Represent { curve, phi, rho, targets, nodes, out } => {
            let curve = curve.load()?;
            let phi = parse_expr(&phi)?;
            let targets = targets.parse()?;
            let values = targets
                .iter()
                .map(|&t| represent_boundary(&curve, &phi, rho, t, nodes).map(|u| vec![t.re, t.im, u.re, u.im]))
                .collect::<koppelman_core::Result<Vec<_>>>()?;
            out.table(&["t_re", "t_im", "u_re", "u_im"], values)
        }
        Command::Solve { curve, phi, targets, solver, out } => {
            let ctx = KernelContext::new(curve.load()?, solver.mu);
            let phi = parse_expr(&phi)?;
            let rep = solve_area(&ctx, &phi, &targets.parse()?, &solver.options())?;
            out.table(&["t_re", "t_im", "u_re", "u_im"], rep.values.iter().map(|(t, u)| vec![t.re, t.im, u.re, u.im]))
        }
        Command::Moment { curve, phi, eps, nodes, moment_tol, agree_tol, out } => {
            let curve = curve.load()?;
            let phi = parse_expr(&phi)?;
            let rep = moment_check(&curve, &phi, &MomentConfig { eps, nodes, moment_tol, agree_tol })?;
            out.json(&rep)
        }
        Command::Verify { curve, phi, targets, h, solver, out } => {
            let ctx = KernelContext::new(curve.load()?, solver.mu);
            let phi = parse_expr(&phi)?;
            let rep = verify_koppelman(&ctx, &phi, &targets.parse()?, h, &solver.options())?;
            out.table(
                &["t_re", "t_im", "u_re", "u_im", "residual"],
                rep.points.iter().map(|p| vec![p.t.re, p.t.im, p.u.re, p.u.im, p.residual]),
            )?;
            eprintln!("max residual {:e}", rep.max_residual);
            Ok(())
        }
        Command::Growth { curve, phi, theta, radii, csv, solver, out } => {
            let ctx = KernelContext::new(curve.load()?, solver.mu);
            let phi = parse_expr(&phi)?;
            let radii = if radii.is_empty() { default_radii() } else { radii };
            if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
                return Err(CliError::Usage(format!("radii must be positive, got {r}")));
            }
            let targets: Vec<Complex64> = radii.iter().map(|&r| Complex64::from_polar(r, theta)).collect();
            let rep = solve_area(&ctx, &phi, &targets, &solver.options())?;
            let lookup = |t: Complex64| {
                let i = targets.iter().position(|&p| p == t).expect("growth samples are the solve targets");
                Ok(rep.values[i].1)
            };
            let fit = growth_profile(lookup, theta, &radii)?;
            if let Some(path) = &csv {
                let file = File::create(path).map_err(|source| io_error(path, source))?;
                write_table(file, &["log_r", "log_abs_u"], fit.samples.iter().map(|&(x, y)| vec![x, y]))?;
            }
            out.json(&GrowthReport {
                slope: fit.slope,
                intercept: fit.intercept,
                residual: fit.residual,
                theta,
                mu: solver.mu,
                samples: fit.samples.len(),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
