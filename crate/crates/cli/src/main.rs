//! openloc command line: phase maps, exceptional-point encircling, ensemble
//! sweeps, spacing statistics, and stadium orbit tables. Every run writes a
//! manifest of its effective parameters that can be fed back via --config to
//! reproduce the outputs.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{parse_float_list, resolve, Config};
use openloc::billiard::{self, BilliardError, StadiumGeometry};
use openloc::csvio;
use openloc::ensemble::{self, EnsembleError, EnsembleParams};
use openloc::linalg::{eigendecompose, LinalgError, SolverOptions};
use openloc::spectra::{self, EigenvalueList, SpectraError};
use openloc::two_level::{self, linspace, Permutation, TwoLevelError, TwoLevelParams};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const DEFAULT_SEED: u64 = 42;
const SEED_ENV: &str = "OPENLOC_SEED";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, or parameter validation. Exit 2.
    Usage(String),
    /// A computation failed to converge or lost accuracy. Exit 3.
    Numerical(String),
    /// Filesystem or input-parsing trouble. Exit 4.
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<TwoLevelError> for CliError {
    fn from(e: TwoLevelError) -> Self {
        match e {
            TwoLevelError::AmbiguousContinuation { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Convergence { .. } | LinalgError::ResidualBound { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::Linalg(inner) => CliError::from(inner),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Io { .. } | SpectraError::Parse { .. } | SpectraError::EmptyFile { .. } => {
                CliError::Io(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<BilliardError> for CliError {
    fn from(e: BilliardError) -> Self {
        match e {
            BilliardError::Convergence { .. }
            | BilliardError::SingularJacobian
            | BilliardError::TangentChord { .. }
            | BilliardError::DegenerateOrbit { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "openloc", version, about = "Opening-induced localization toolkit")]
struct Cli {
    /// Directory for CSVs and manifests (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Master seed; beats the OPENLOC_SEED env var and the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// key=value config file, e.g. a manifest from an earlier run.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-level model: phase maps and eigenvalue braiding.
    #[command(subcommand)]
    TwoLevel(TwoLevelCmd),
    /// Random-matrix ensemble statistics.
    #[command(subcommand)]
    Ensemble(EnsembleCmd),
    /// Level-spacing and imaginary-part distributions.
    Spectra(SpectraArgs),
    /// Stadium periodic orbits.
    #[command(subcommand)]
    Orbits(OrbitsCmd),
}

#[derive(Subcommand)]
enum TwoLevelCmd {
    /// Delocalization factor F over a (d_eps/c, d_gamma/c) grid.
    PhaseMap(PhaseMapArgs),
    /// Track eigenvalue branches around a closed parameter loop.
    Encircle(EncircleArgs),
}

#[derive(Subcommand)]
enum EnsembleCmd {
    /// Average inverse participation ratio over a (c, gamma) grid.
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum OrbitsCmd {
    /// Refine all builtin orbits and write the summary table.
    Table(TableArgs),
    /// Refine one orbit, builtin by name or from explicit arclength seeds.
    Refine(RefineArgs),
}

#[derive(Args)]
struct PhaseMapArgs {
    /// Anchor level energy.
    #[arg(long)]
    eps1: Option<f64>,
    /// Anchor level opening rate (>= 0).
    #[arg(long)]
    gamma1: Option<f64>,
    /// Coupling strength (nonzero).
    #[arg(long)]
    c: Option<f64>,
    /// Delocalization threshold F_c in (0, 1).
    #[arg(long)]
    fc: Option<f64>,
    /// d_eps/c axis lower bound.
    #[arg(long)]
    de_min: Option<f64>,
    /// d_eps/c axis upper bound.
    #[arg(long)]
    de_max: Option<f64>,
    /// d_eps/c axis node count.
    #[arg(long)]
    de_steps: Option<usize>,
    /// d_gamma/c axis lower bound.
    #[arg(long)]
    dg_min: Option<f64>,
    /// d_gamma/c axis upper bound.
    #[arg(long)]
    dg_max: Option<f64>,
    /// d_gamma/c axis node count.
    #[arg(long)]
    dg_steps: Option<usize>,
}

#[derive(Args)]
struct EncircleArgs {
    /// Reference level energy.
    #[arg(long)]
    eps1: Option<f64>,
    /// Reference level opening rate (>= 0).
    #[arg(long)]
    gamma1: Option<f64>,
    /// Coupling strength (nonzero).
    #[arg(long)]
    c: Option<f64>,
    /// Loop center, d_eps coordinate.
    #[arg(long)]
    center_de: Option<f64>,
    /// Loop center, d_gamma coordinate.
    #[arg(long)]
    center_dg: Option<f64>,
    /// Loop radius (> 0).
    #[arg(long)]
    radius: Option<f64>,
    /// Discretization steps around the loop (>= 16).
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// Matrix dimension N (>= 2).
    #[arg(long)]
    n: Option<usize>,
    /// Realizations per grid node (>= 1).
    #[arg(long)]
    realizations: Option<usize>,
    /// Comma-separated coupling bounds c.
    #[arg(long)]
    c: Option<String>,
    /// Comma-separated absolute opening strengths.
    #[arg(long, conflicts_with = "gamma_over_c")]
    gamma: Option<String>,
    /// Comma-separated gamma/c ratios (needs a single c).
    #[arg(long)]
    gamma_over_c: Option<String>,
}

#[derive(Args)]
struct SpectraArgs {
    /// Compute spectra from the random-matrix ensemble.
    #[arg(long, conflicts_with = "input")]
    from_ensemble: bool,
    /// Ingest eigenvalues from a CSV file with re,im columns.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Matrix dimension N (ensemble source).
    #[arg(long)]
    n: Option<usize>,
    /// Number of pooled realizations (ensemble source).
    #[arg(long)]
    realizations: Option<usize>,
    /// Coupling bound c (ensemble source).
    #[arg(long)]
    c: Option<f64>,
    /// Absolute opening strength gamma.
    #[arg(long, conflicts_with = "gamma_over_c")]
    gamma: Option<f64>,
    /// Opening strength as a gamma/c ratio (ensemble source).
    #[arg(long)]
    gamma_over_c: Option<f64>,
    /// Histogram bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Odd unfolding window length.
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Args)]
struct TableArgs {
    /// Endcap radius R (> 0).
    #[arg(long)]
    radius: Option<f64>,
    /// Straight-segment half-length a (> 0, defaults to R).
    #[arg(long)]
    half_length: Option<f64>,
}

#[derive(Args)]
struct RefineArgs {
    /// Builtin orbit name or single-letter abbreviation.
    #[arg(long, conflicts_with = "seeds")]
    name: Option<String>,
    /// Comma-separated bounce arclengths to refine.
    #[arg(long)]
    seeds: Option<String>,
    /// Endcap radius R (> 0).
    #[arg(long)]
    radius: Option<f64>,
    /// Straight-segment half-length a (> 0, defaults to R).
    #[arg(long)]
    half_length: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = Config::load(cli.config.as_deref())?;
    let seed = resolve_seed(cli.seed, &cfg)?;
    let out_dir = match cli.out_dir {
        Some(d) => d,
        None => cfg
            .get_str("out_dir")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    match &cli.command {
        Command::TwoLevel(TwoLevelCmd::PhaseMap(a)) => run_phase_map(a, &cfg, seed, &out_dir),
        Command::TwoLevel(TwoLevelCmd::Encircle(a)) => run_encircle(a, &cfg, seed, &out_dir),
        Command::Ensemble(EnsembleCmd::Sweep(a)) => run_sweep(a, &cfg, seed, &out_dir),
        Command::Spectra(a) => run_spectra(a, &cfg, seed, &out_dir),
        Command::Orbits(OrbitsCmd::Table(a)) => run_orbit_table(a, &cfg, seed, &out_dir),
        Command::Orbits(OrbitsCmd::Refine(a)) => run_orbit_refine(a, &cfg, seed, &out_dir),
    }
}

fn resolve_seed(flag: Option<u64>, cfg: &Config) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(raw) = std::env::var(SEED_ENV) {
        return raw.trim().parse().map_err(|e| {
            CliError::Usage(format!("{SEED_ENV}={raw:?} does not parse as u64: {e}"))
        });
    }
    Ok(cfg.get::<u64>("seed")?.unwrap_or(DEFAULT_SEED))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn render<F>(f: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(buf)
}

fn manifest(command: &str, seed: u64, out_dir: &Path, params: &[(&str, String)]) -> String {
    let mut text = format!(
        "command={command}\nversion={}\ntimestamp={}\nseed={seed}\nout_dir={}\n",
        env!("CARGO_PKG_VERSION"),
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        out_dir.display(),
    );
    for (k, v) in params {
        text.push_str(k);
        text.push('=');
        text.push_str(v);
        text.push('\n');
    }
    text
}

fn fmt_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| csvio::fmt_float(v))
        .collect::<Vec<_>>()
        .join(",")
}

/// Comma float list: flag beats config key beats default.
fn resolve_list(
    flag: &Option<String>,
    cfg: &Config,
    key: &str,
    default: &[f64],
) -> Result<Vec<f64>, CliError> {
    match flag {
        Some(raw) => parse_float_list(raw).map_err(CliError::Usage),
        None => match cfg.get_list(key)? {
            Some(v) => Ok(v),
            None => Ok(default.to_vec()),
        },
    }
}

fn run_phase_map(
    args: &PhaseMapArgs,
    cfg: &Config,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let eps1 = resolve(args.eps1, cfg.get("eps1")?, 1.0);
    let gamma1 = resolve(args.gamma1, cfg.get("gamma1")?, 1.0);
    let c = resolve(args.c, cfg.get("c")?, 1.0);
    let fc = resolve(args.fc, cfg.get("fc")?, 0.5);
    let de_min = resolve(args.de_min, cfg.get("de_min")?, -5.0);
    let de_max = resolve(args.de_max, cfg.get("de_max")?, 5.0);
    let de_steps = resolve(args.de_steps, cfg.get("de_steps")?, 201);
    let dg_min = resolve(args.dg_min, cfg.get("dg_min")?, 0.0);
    let dg_max = resolve(args.dg_max, cfg.get("dg_max")?, 4.0);
    let dg_steps = resolve(args.dg_steps, cfg.get("dg_steps")?, 201);

    let anchor = TwoLevelParams::new(eps1, eps1, gamma1, gamma1, c)?;
    let de_axis = linspace(de_min, de_max, de_steps);
    let dg_axis = linspace(dg_min, dg_max, dg_steps);
    let map = two_level::phase_map(&de_axis, &dg_axis, fc, &anchor)?;

    write_file(
        out_dir,
        "phase_map.csv",
        &render(|w| csvio::write_phase_map_csv(&map, w))?,
    )?;
    write_file(
        out_dir,
        "phase_map_labels.csv",
        &render(|w| csvio::write_phase_map_labels_csv(&map, w))?,
    )?;
    let params = [
        ("eps1", csvio::fmt_float(eps1)),
        ("gamma1", csvio::fmt_float(gamma1)),
        ("c", csvio::fmt_float(c)),
        ("fc", csvio::fmt_float(fc)),
        ("de_min", csvio::fmt_float(de_min)),
        ("de_max", csvio::fmt_float(de_max)),
        ("de_steps", de_steps.to_string()),
        ("dg_min", csvio::fmt_float(dg_min)),
        ("dg_max", csvio::fmt_float(dg_max)),
        ("dg_steps", dg_steps.to_string()),
    ];
    write_file(
        out_dir,
        "phase_map_manifest.txt",
        manifest("two-level phase-map", seed, out_dir, &params).as_bytes(),
    )?;
    let delocalized = map.labels.iter().filter(|&&b| b).count();
    println!(
        "phase map: {} x {} nodes, {} delocalized at F_c = {}",
        de_axis.len(),
        dg_axis.len(),
        delocalized,
        fc
    );
    Ok(())
}

fn run_encircle(
    args: &EncircleArgs,
    cfg: &Config,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let eps1 = resolve(args.eps1, cfg.get("eps1")?, 0.0);
    let gamma1 = resolve(args.gamma1, cfg.get("gamma1")?, 0.0);
    let c = resolve(args.c, cfg.get("c")?, 1.0);
    let center_de = resolve(args.center_de, cfg.get("center_de")?, 0.0);
    let center_dg = resolve(args.center_dg, cfg.get("center_dg")?, 2.0);
    let radius = resolve(args.radius, cfg.get("radius")?, 0.5);
    let steps = resolve(args.steps, cfg.get("steps")?, 720);

    let p0 = TwoLevelParams::new(eps1, eps1, gamma1, gamma1, c)?;
    let perm = two_level::encircle_ep((center_de, center_dg), radius, steps, &p0)?;
    let result = match perm {
        Permutation::Swap => "swap",
        Permutation::Identity => "identity",
    };

    write_file(out_dir, "encircle.txt", format!("result={result}\n").as_bytes())?;
    let params = [
        ("eps1", csvio::fmt_float(eps1)),
        ("gamma1", csvio::fmt_float(gamma1)),
        ("c", csvio::fmt_float(c)),
        ("center_de", csvio::fmt_float(center_de)),
        ("center_dg", csvio::fmt_float(center_dg)),
        ("radius", csvio::fmt_float(radius)),
        ("steps", steps.to_string()),
    ];
    write_file(
        out_dir,
        "encircle_manifest.txt",
        manifest("two-level encircle", seed, out_dir, &params).as_bytes(),
    )?;
    println!("{result}");
    Ok(())
}

fn run_sweep(args: &SweepArgs, cfg: &Config, seed: u64, out_dir: &Path) -> Result<(), CliError> {
    let n = resolve(args.n, cfg.get("n")?, 300);
    let realizations = resolve(args.realizations, cfg.get("realizations")?, 20);
    let c_values = resolve_list(&args.c, cfg, "c", &[20.0 / 300.0])?;

    // Absolute gamma values win over ratios; ratios need a single c to scale.
    let mut ratios_used: Option<Vec<f64>> = None;
    let gamma_values = if let Some(raw) = &args.gamma {
        parse_float_list(raw).map_err(CliError::Usage)?
    } else if let Some(raw) = &args.gamma_over_c {
        let ratios = parse_float_list(raw).map_err(CliError::Usage)?;
        let g = scale_ratios(&ratios, &c_values)?;
        ratios_used = Some(ratios);
        g
    } else if let Some(v) = cfg.get_list("gamma")? {
        v
    } else if let Some(ratios) = cfg.get_list("gamma_over_c")? {
        let g = scale_ratios(&ratios, &c_values)?;
        ratios_used = Some(ratios);
        g
    } else {
        let ratios = vec![0.0, 1.0, 4.0, 10.0, 100.0];
        let g = scale_ratios(&ratios, &c_values)?;
        ratios_used = Some(ratios);
        g
    };

    let nodes = ensemble::sweep(&c_values, &gamma_values, n, realizations, seed)?;

    write_file(
        out_dir,
        "sweep.csv",
        &render(|w| csvio::write_sweep_csv(&nodes, n, realizations, w))?,
    )?;
    let mut params = vec![
        ("n", n.to_string()),
        ("realizations", realizations.to_string()),
        ("c", fmt_list(&c_values)),
        ("gamma", fmt_list(&gamma_values)),
    ];
    if let Some(r) = &ratios_used {
        params.push(("gamma_over_c", fmt_list(r)));
    }
    write_file(
        out_dir,
        "sweep_manifest.txt",
        manifest("ensemble sweep", seed, out_dir, &params).as_bytes(),
    )?;
    for node in &nodes {
        println!(
            "c = {:.6}, gamma = {:.6}: AIPR = {:.6} +- {:.6}",
            node.c, node.gamma, node.aipr_mean, node.aipr_stddev
        );
    }
    Ok(())
}

fn scale_ratios(ratios: &[f64], c_values: &[f64]) -> Result<Vec<f64>, CliError> {
    if c_values.len() != 1 {
        return Err(CliError::Usage(
            "gamma/c ratios need a single c value; pass absolute --gamma for a c grid".to_string(),
        ));
    }
    Ok(ratios.iter().map(|r| r * c_values[0]).collect())
}

fn run_spectra(args: &SpectraArgs, cfg: &Config, seed: u64, out_dir: &Path) -> Result<(), CliError> {
    let bins = resolve(args.bins, cfg.get("bins")?, 40);
    let window = resolve(args.window, cfg.get("window")?, 21);
    let range = (0.0, 4.0);

    let file_input = args
        .input
        .clone()
        .or_else(|| cfg.get_str("input").map(PathBuf::from));
    let from_ensemble =
        args.from_ensemble || (file_input.is_none() && cfg.get_str("source") == Some("ensemble"));

    let mut params: Vec<(&str, String)> = Vec::new();
    let (values, spacings, gamma) = if from_ensemble {
        let n = resolve(args.n, cfg.get("n")?, 300);
        let realizations = resolve(args.realizations, cfg.get("realizations")?, 22);
        let c = resolve(args.c, cfg.get("c")?, 100.0 / n as f64);
        let gamma = match args.gamma.or(cfg.get("gamma")?) {
            Some(g) => g,
            None => resolve(args.gamma_over_c, cfg.get("gamma_over_c")?, 0.0) * c,
        };
        let opts = SolverOptions {
            compute_eigenvectors: false,
            ..SolverOptions::default()
        };
        let mut values = Vec::with_capacity(n * realizations);
        let mut spacings = Vec::new();
        for r in 0..realizations {
            let p = EnsembleParams::new(n, c, gamma, seed, r as u64)?;
            let h = ensemble::sample_hamiltonian(&p);
            let s = eigendecompose(&h, &opts)?;
            let reals: Vec<f64> = s.eigenvalues.iter().map(|z| z.re).collect();
            spacings.extend(spectra::unfold(&reals, window)?);
            values.extend_from_slice(&s.eigenvalues);
        }
        params.push(("source", "ensemble".to_string()));
        params.push(("n", n.to_string()));
        params.push(("realizations", realizations.to_string()));
        params.push(("c", csvio::fmt_float(c)));
        params.push(("gamma", csvio::fmt_float(gamma)));
        (values, spacings, Some(gamma))
    } else if let Some(path) = &file_input {
        let list = spectra::ingest_eigenvalues(path)?;
        let reals: Vec<f64> = list.values.iter().map(|z| z.re).collect();
        let spacings = spectra::unfold(&reals, window)?;
        let gamma = args.gamma.or(cfg.get("gamma")?);
        params.push(("source", "file".to_string()));
        params.push(("input", path.display().to_string()));
        if let Some(g) = gamma {
            params.push(("gamma", csvio::fmt_float(g)));
        }
        (list.values, spacings, gamma)
    } else {
        return Err(CliError::Usage(
            "pass --from-ensemble or --input FILE (or source/input in the config)".to_string(),
        ));
    };
    params.push(("bins", bins.to_string()));
    params.push(("window", window.to_string()));

    let hist = spectra::spacing_histogram(&spacings, bins, range)?;
    let class = spectra::classify_spacings(&spacings)?;
    let imag = match gamma {
        Some(g) if g > 0.0 => {
            let list = EigenvalueList::new(values.clone())?;
            Some(spectra::imag_distribution(&list, g, bins)?)
        }
        _ => None,
    };

    write_file(
        out_dir,
        "spacing_histogram.csv",
        &render(|w| csvio::write_histogram_csv(&hist, w))?,
    )?;
    write_file(
        out_dir,
        "classification.txt",
        &render(|w| csvio::write_classification(&class, w))?,
    )?;
    write_file(
        out_dir,
        "eigenvalues.csv",
        &render(|w| csvio::write_eigenvalues_csv(&values, w))?,
    )?;
    if let Some((ihist, flagged)) = &imag {
        write_file(
            out_dir,
            "imag_histogram.csv",
            &render(|w| csvio::write_histogram_csv(ihist, w))?,
        )?;
        if *flagged > 0 {
            println!(
                "warning: {flagged} eigenvalue(s) outside the expected imaginary range"
            );
        }
    } else {
        println!("gamma = 0: spectrum is real, skipping imag_histogram.csv");
    }
    write_file(
        out_dir,
        "spectra_manifest.txt",
        manifest("spectra", seed, out_dir, &params).as_bytes(),
    )?;
    println!(
        "classified {} (ks_wigner = {:.4}, ks_poisson = {:.4}, {} spacings)",
        class.label, class.ks_wigner, class.ks_poisson, class.samples
    );
    Ok(())
}

fn run_orbit_table(
    args: &TableArgs,
    cfg: &Config,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let radius = resolve(args.radius, cfg.get("radius")?, 1.0);
    let half_length = resolve(args.half_length, cfg.get("half_length")?, radius);
    let geom = StadiumGeometry::with_half_length(radius, half_length)?;

    let mut orbits = Vec::new();
    let mut failures = Vec::new();
    for seed_def in billiard::builtin_orbits(&geom) {
        match billiard::realize_seed(&seed_def, &geom) {
            Ok(o) => orbits.push(o),
            Err(e) => failures.push(format!("{}: {e}", seed_def.name)),
        }
    }
    if !failures.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} orbit(s) failed to refine: {}",
            failures.len(),
            failures.join("; ")
        )));
    }

    write_file(
        out_dir,
        "orbit_table.csv",
        &render(|w| csvio::write_orbit_table_csv(&orbits, w))?,
    )?;
    for orbit in &orbits {
        let name = orbit.name.as_deref().unwrap_or("orbit").to_ascii_lowercase();
        write_file(
            out_dir,
            &format!("orbit_{name}.csv"),
            &render(|w| csvio::write_orbit_geometry_csv(orbit, w))?,
        )?;
    }
    let params = [
        ("radius", csvio::fmt_float(radius)),
        ("half_length", csvio::fmt_float(half_length)),
    ];
    write_file(
        out_dir,
        "orbits_manifest.txt",
        manifest("orbits table", seed, out_dir, &params).as_bytes(),
    )?;
    for orbit in &orbits {
        println!(
            "{}: {} bounces, l = {:.6}, dk* = {:.6}",
            orbit.name.as_deref().unwrap_or("orbit"),
            orbit.points.len(),
            orbit.length,
            orbit.dk_star
        );
    }
    Ok(())
}

fn run_orbit_refine(
    args: &RefineArgs,
    cfg: &Config,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let radius = resolve(args.radius, cfg.get("radius")?, 1.0);
    let half_length = resolve(args.half_length, cfg.get("half_length")?, radius);
    let geom = StadiumGeometry::with_half_length(radius, half_length)?;

    let name = args
        .name
        .clone()
        .or_else(|| cfg.get_str("name").map(str::to_string));
    let seeds = args
        .seeds
        .clone()
        .or_else(|| cfg.get_str("seeds").map(str::to_string));

    let mut params = vec![
        ("radius", csvio::fmt_float(radius)),
        ("half_length", csvio::fmt_float(half_length)),
    ];
    let orbit = match (&name, &seeds) {
        (Some(n), _) => {
            params.push(("name", n.clone()));
            let seed_def = billiard::builtin_seed(&geom, n)?;
            billiard::realize_seed(&seed_def, &geom)?
        }
        (None, Some(raw)) => {
            let arclengths = parse_float_list(raw).map_err(CliError::Usage)?;
            params.push(("seeds", fmt_list(&arclengths)));
            let mut o = billiard::refine_orbit(&arclengths, &geom)?;
            o.name = Some("custom".to_string());
            o
        }
        (None, None) => {
            return Err(CliError::Usage(
                "pass --name or --seeds (or name/seeds in the config)".to_string(),
            ));
        }
    };

    let row = [orbit.clone()];
    write_file(
        out_dir,
        "orbit_refined.csv",
        &render(|w| csvio::write_orbit_table_csv(&row, w))?,
    )?;
    write_file(
        out_dir,
        "orbit_refined_geometry.csv",
        &render(|w| csvio::write_orbit_geometry_csv(&orbit, w))?,
    )?;
    write_file(
        out_dir,
        "refine_manifest.txt",
        manifest("orbits refine", seed, out_dir, &params).as_bytes(),
    )?;
    println!(
        "{}: {} bounces, l = {:.9}, dk* = {:.9}, residual = {:.3e}",
        orbit.name.as_deref().unwrap_or("orbit"),
        orbit.points.len(),
        orbit.length,
        orbit.dk_star,
        orbit.reflection_residual
    );
    Ok(())
}
