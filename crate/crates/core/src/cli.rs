//! Command-line front end.

use crate::jacobi::{integrability_with, IntegrabilityOptions, IntegrabilityVerdict};
use crate::net::{grouped_length_profile, GeodesicNet, NetError, NetFile, NetName};
use crate::spectral::{eigenvalues, SpectralOptions, SpectrumExport};
use crate::spineode::{caccioppoli_sweep, radial_ode_solve, SpineParams, SweepConfig, SweepReport};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "netjacobi",
    version,
    about = "Jacobi fields and spectra of equiangular geodesic nets"
)]
pub struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Validation tolerance (stationarity residual, unit norms).
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the catalog nets.
    List,
    /// Check a net loads and is stationary.
    Validate(NetArgs),
    /// Validation, integrability and low spectrum in one report.
    Report(ReportArgs),
    /// Eigenvalues of the net Laplacian with junction conditions.
    Spectrum(SpectrumArgs),
    /// Compare linear compatible fields with rotation fields.
    Integrability(IntegrabilityArgs),
    /// Caccioppoli ratios of the radial spine ODE.
    Spine(SpineArgs),
}

#[derive(Debug, Args)]
pub struct NetArgs {
    /// Catalog name.
    #[arg(required_unless_present = "file", conflicts_with = "file")]
    pub name: Option<String>,
    /// Net JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Embed in dimension `2 + codim`.
    #[arg(long)]
    pub codim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long, default_value_t = 10.0)]
    pub lambda_max: f64,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[arg(long, default_value_t = 10.0)]
    pub lambda_max: f64,
    /// Grid spacing in √λ.
    #[arg(long, default_value_t = 0.05)]
    pub grid_step: f64,
}

#[derive(Debug, Args)]
pub struct IntegrabilityArgs {
    #[command(flatten)]
    pub net: NetArgs,
    /// Drop the derivative junction rows (non-physical control).
    #[arg(long)]
    pub drop_derivative_rows: bool,
}

#[derive(Debug, Args)]
pub struct SpineArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub rho: f64,
    /// Full sweep over m ∈ {1,2,3}, λ ∈ {0,1,2}, μ ∈ {0,2,6}, ρ ∈ {4,8,16,32}.
    #[arg(long)]
    pub sweep: bool,
    /// Random initial data per parameter cell.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Write one trajectory (first sample) as CSV.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

fn net_failure(e: NetError) -> Failure {
    match e {
        NetError::NonConvergence { .. } => Failure::numeric(e.to_string()),
        _ => Failure::input(e.to_string()),
    }
}

pub fn load_net(args: &NetArgs, tol: f64) -> Result<GeodesicNet, Failure> {
    let net = match (&args.name, &args.file) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            let file = NetFile::parse(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            file.to_net(tol)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
        }
        (Some(name), None) => {
            let name: NetName = name.parse().map_err(net_failure)?;
            crate::net::catalog(name).map_err(net_failure)?
        }
        (None, None) => return Err(Failure::input("a catalog name or --file is required")),
    };
    match args.codim {
        None => Ok(net),
        Some(0) => Err(Failure::input("--codim must be at least 1")),
        Some(k) => net.embed(k + 2).map_err(net_failure),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LengthGroup {
    pub degrees: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Validation {
    pub name: String,
    pub ambient_dim: usize,
    pub vertices: usize,
    pub arcs: usize,
    pub stationarity_residual: f64,
    pub stationary: bool,
    pub edge_lengths: Vec<LengthGroup>,
    pub polyhedral: bool,
}

fn validation(net: &GeodesicNet, tol: f64) -> Validation {
    let residual = net.stationarity_residual();
    Validation {
        name: net.name.clone().unwrap_or_else(|| "unnamed".into()),
        ambient_dim: net.ambient_dim(),
        vertices: net.vertices().len(),
        arcs: net.arcs().len(),
        stationarity_residual: residual,
        stationary: residual < tol,
        edge_lengths: grouped_length_profile(net)
            .into_iter()
            .map(|(degrees, count)| LengthGroup { degrees, count })
            .collect(),
        polyhedral: net.is_polyhedral(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NetReport {
    #[serde(flatten)]
    pub validation: Validation,
    pub integrability: Option<IntegrabilityVerdict>,
    pub note: Option<String>,
    pub multiplicity_0: usize,
    pub multiplicity_1: usize,
    pub lambda_max: f64,
    pub spectrum: SpectrumExport,
}

pub fn report(net: &GeodesicNet, tol: f64, lambda_max: f64) -> Result<NetReport, Failure> {
    let validation = validation(net, tol);
    if !validation.stationary {
        return Err(Failure::input(format!(
            "{}: stationarity residual {:.3e} exceeds {tol:e}",
            validation.name, validation.stationarity_residual
        )));
    }
    let (integrability, note) = if net.is_polyhedral() {
        let v =
            integrability_with(net, IntegrabilityOptions::default()).map_err(|e| Failure::numeric(e.to_string()))?;
        (Some(v), None)
    } else {
        (None, Some("not polyhedral; integrability skipped".to_string()))
    };
    let spectrum = spectrum(net, lambda_max, 0.05)?;
    Ok(NetReport {
        validation,
        integrability,
        note,
        multiplicity_0: spectrum.multiplicity(0.0, 1e-8),
        multiplicity_1: spectrum.multiplicity(1.0, 1e-8),
        lambda_max,
        spectrum: spectrum.export(net),
    })
}

fn spectrum(net: &GeodesicNet, lambda_max: f64, grid_step: f64) -> Result<crate::spectral::SpectrumResult, Failure> {
    if !(lambda_max > 0.0) || !(grid_step > 0.0) {
        return Err(Failure::input("--lambda-max and --grid-step must be positive"));
    }
    let opts = SpectralOptions {
        lambda_max,
        grid_step,
        ..Default::default()
    };
    eigenvalues(net, opts).map_err(|e| Failure::numeric(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ListEntry {
    pub name: &'static str,
    pub polyhedral: bool,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn fmt_lengths(groups: &[LengthGroup]) -> String {
    groups
        .iter()
        .map(|g| format!("{:.3}°×{}", g.degrees, g.count))
        .collect::<Vec<_>>()
        .join(", ")
}

fn render_validation(v: &Validation) -> String {
    format!(
        "net          {}\nambient dim  {}\nvertices     {}\narcs         {}\nresidual     {:.3e}\nlengths      {}\npolyhedral   {}\n",
        v.name,
        v.ambient_dim,
        v.vertices,
        v.arcs,
        v.stationarity_residual,
        fmt_lengths(&v.edge_lengths),
        v.polyhedral
    )
}

fn render_verdict(v: &IntegrabilityVerdict) -> String {
    format!(
        "solutions    {}\nrotations    {}\nstabilizer   {}\nintegrable   {}\nresidual     {:.3e}\n",
        v.dim_solutions, v.dim_rotations, v.dim_stabilizer, v.integrable, v.residual
    )
}

fn render_spectrum(s: &SpectrumExport) -> String {
    let mut out = String::from("lambda          mult\n");
    for e in &s.eigenvalues {
        out.push_str(&format!("{:<15.10} {}\n", e.lambda, e.multiplicity));
    }
    out.push_str(&format!(
        "weyl count {} predicted {:.3}\n",
        s.weyl.count, s.weyl.predicted
    ));
    out
}

fn render_sweep(r: &SweepReport) -> String {
    let mut out = String::from("  m  lambda  mu   rho  max_ratio      c0   ok\n");
    for row in &r.rows {
        out.push_str(&format!(
            "{:>3} {:>7} {:>3} {:>5} {:>10.4} {:>7} {:>4}\n",
            row.m, row.lambda, row.mu, row.rho, row.max_ratio, row.c0, row.ok
        ));
    }
    out.push_str(&format!(
        "checks {}  raw residual {:.2e}  divergence gap {:.2e}\n",
        r.cells, r.max_raw_residual, r.max_divergence_gap
    ));
    out
}

/// Execute and return `(stdout, exit code)`; failures go to the message.
pub fn execute(cli: &Cli) -> Result<(String, i32), Failure> {
    let tol = cli.tol;
    if !(tol > 0.0) {
        return Err(Failure::input("--tol must be positive"));
    }
    match &cli.command {
        Command::List => {
            let entries: Vec<ListEntry> = NetName::ALL
                .iter()
                .map(|&n| ListEntry {
                    name: n.as_str(),
                    polyhedral: n.polyhedral(),
                })
                .collect();
            let out = if cli.json {
                to_json(&entries)
            } else {
                entries
                    .iter()
                    .map(|e| format!("{:<18} {}", e.name, if e.polyhedral { "polyhedral" } else { "-" }))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            Ok((out, EXIT_OK))
        }
        Command::Validate(args) => {
            let net = load_net(args, tol)?;
            let v = validation(&net, tol);
            let code = if v.stationary { EXIT_OK } else { EXIT_INPUT };
            let out = if cli.json { to_json(&v) } else { render_validation(&v) };
            Ok((out, code))
        }
        Command::Report(args) => {
            let net = load_net(&args.net, tol)?;
            let r = report(&net, tol, args.lambda_max)?;
            let out = if cli.json {
                to_json(&r)
            } else {
                let mut s = render_validation(&r.validation);
                match (&r.integrability, &r.note) {
                    (Some(v), _) => s.push_str(&render_verdict(v)),
                    (None, Some(note)) => s.push_str(&format!("note         {note}\n")),
                    _ => {}
                }
                s.push_str(&format!(
                    "mult(0)      {}\nmult(1)      {}\n",
                    r.multiplicity_0, r.multiplicity_1
                ));
                s.push_str(&render_spectrum(&r.spectrum));
                s
            };
            Ok((out, EXIT_OK))
        }
        Command::Spectrum(args) => {
            let net = load_net(&args.net, tol)?;
            let s = spectrum(&net, args.lambda_max, args.grid_step)?.export(&net);
            let out = if cli.json { to_json(&s) } else { render_spectrum(&s) };
            Ok((out, EXIT_OK))
        }
        Command::Integrability(args) => {
            let net = load_net(&args.net, tol)?;
            let opts = IntegrabilityOptions {
                drop_derivative_rows: args.drop_derivative_rows,
            };
            let v = integrability_with(&net, opts).map_err(|e| match e {
                crate::jacobi::JacobiError::NotPolyhedral | crate::jacobi::JacobiError::NotStationary { .. } => {
                    Failure::input(e.to_string())
                }
                _ => Failure::numeric(e.to_string()),
            })?;
            let out = if cli.json { to_json(&v) } else { render_verdict(&v) };
            Ok((out, EXIT_OK))
        }
        Command::Spine(args) => spine(args, cli.json),
    }
}

fn spine(args: &SpineArgs, json: bool) -> Result<(String, i32), Failure> {
    if args.samples == 0 {
        return Err(Failure::input("--samples must be positive"));
    }
    let cfg = if args.sweep {
        SweepConfig {
            samples: args.samples,
            seed: args.seed,
            ..Default::default()
        }
    } else {
        SpineParams::new(args.m, args.lambda, args.mu).map_err(|e| Failure::input(e.to_string()))?;
        SweepConfig {
            ms: vec![args.m],
            lambdas: vec![args.lambda],
            mus: vec![args.mu],
            rhos: vec![args.rho],
            samples: args.samples,
            seed: args.seed,
            ..Default::default()
        }
    };
    if let Some(&rho) = cfg.rhos.iter().find(|&&r| !(r >= 4.0)) {
        return Err(Failure::input(format!("--rho {rho}: ρ must be at least 4")));
    }
    if let Some(path) = &args.dump {
        let params =
            SpineParams::new(cfg.ms[0], cfg.lambdas[0], cfg.mus[0]).map_err(|e| Failure::input(e.to_string()))?;
        let (g, dg) = crate::spineode::sweep_initial_data(cfg.seed, 0, 0);
        let r1 = 4.0 * cfg.rhos.iter().cloned().fold(4.0, f64::max);
        let traj = radial_ode_solve(params, g, dg, cfg.r0, r1, 1e-2).map_err(|e| Failure::numeric(e.to_string()))?;
        let file = std::fs::File::create(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        traj.write_csv(file)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    let report = caccioppoli_sweep(&cfg).map_err(|e| match e {
        crate::spineode::SpineError::BadParameter(_) => Failure::input(e.to_string()),
        _ => Failure::numeric(e.to_string()),
    })?;
    let code = if report.all_ok { EXIT_OK } else { EXIT_NUMERIC };
    let out = if json { to_json(&report) } else { render_sweep(&report) };
    Ok((out, code))
}

/// Parse arguments, run, print, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok((out, code)) => {
            use std::io::Write;
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout().lock(), "{out}");
            code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
