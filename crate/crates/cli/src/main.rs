//! Command-line front end for the spectral laboratory.
//!
//! Subcommands cover the whole pipeline: derive cell dimensions (`cell`),
//! triangulate and inspect one period (`mesh`), sweep Bloch bands and
//! extract gaps (`bands`), print the limit operator's spectrum
//! (`limit-spectrum`), and run the two convergence studies
//! (`resolvent-convergence`, `gap-convergence`). `selfcheck` runs fast
//! built-in sanity checks against closed-form values.
//!
//! Exit codes: `0` success (and a passing verdict), `1` a study or check
//! ran but its verdict failed, `2` usage or configuration errors, `3`
//! solver failures.

mod config;

use bandgap_lab::bloch::{
    band_sweep, band_sweep_converged, extract_gaps, BlochError, IntervalSet, SweepSettings,
};
use bandgap_lab::eigen::{lowest_eigenpairs, EigenOptions};
use bandgap_lab::fem::{assemble, dof_map, phase_factor};
use bandgap_lab::geometry::{build_bounded_waveguide, CellGeometry, Region};
use bandgap_lab::harness::{gap_study, resolvent_study, RowStatus, StudyConfig, StudyError};
use bandgap_lab::io::{
    write_bands_csv, write_gap_csv, write_matrix_market, write_profile_csv, write_resolvent_csv,
    write_vtk, SpectrumDoc,
};
use bandgap_lab::limit::{CosineSeries, LimitModel};
use bandgap_lab::scalar::Cplx;
use bandgap_lab::mesh::{triangulate, triangulate_waveguide, MeshControls, MeshError};
use bandgap_lab::scaling::{CellParams, QTarget, RoomSpec, ScalingLaw};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "bandgap-lab",
    version,
    about = "Bloch spectra and homogenization limits of a thin waveguide with room-and-passage decoration"
)]
struct Cli {
    /// Worker thread count; the BANDGAP_LAB_THREADS variable overrides this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the concrete cell dimensions at one period.
    Cell(CellArgs),
    /// Triangulate one period cell and report mesh quality.
    Mesh(MeshArgs),
    /// Sweep Bloch bands at one period; print bands and gaps as JSON.
    Bands(BandsArgs),
    /// Print the limit operator's spectrum, gap and bounded eigenvalues.
    LimitSpectrum(LimitSpectrumArgs),
    /// Compare averaged waveguide solutions with the limit resolvent
    /// along the configured period schedule.
    ResolventConvergence(ResolventArgs),
    /// Compare band gaps and spectra with the limit model along the
    /// configured period schedule.
    GapConvergence(StudyArgs),
    /// Run fast built-in sanity checks against closed-form values.
    Selfcheck,
}

#[derive(Args)]
struct GeometryArgs {
    /// Period of the waveguide.
    #[arg(long)]
    eps: f64,
    /// Coupling target: a positive number or "infinity".
    #[arg(long, value_parser = parse_q, default_value = "1.0")]
    q: QTarget<f64>,
    /// Passage height exponent in h = eps^gamma.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Room width before scaling by eps.
    #[arg(long, default_value_t = 0.5)]
    room_width: f64,
    /// Room height before scaling by eps.
    #[arg(long, default_value_t = 0.5)]
    room_height: f64,
    /// Half-width of the room wall segment the passage may touch.
    #[arg(long, default_value_t = 0.2)]
    contact_half_width: f64,
}

impl GeometryArgs {
    fn derive(&self) -> Result<CellParams<f64>, Failure> {
        let law = ScalingLaw::new(self.q, self.gamma).map_err(config_err)?;
        let room = RoomSpec::new(self.room_width, self.room_height, self.contact_half_width);
        law.params_at(&room, self.eps).map_err(config_err)
    }
}

#[derive(Args)]
struct CellArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Base intervals per cell edge.
    #[arg(long, default_value_t = 4)]
    n_base: usize,
    /// Uniform refinements applied after triangulation.
    #[arg(long, default_value_t = 0)]
    refine: usize,
    /// Write the triangulation to this file in legacy VTK format.
    #[arg(long)]
    vtk: Option<PathBuf>,
}

#[derive(Args)]
struct BandsArgs {
    /// Study configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Period to sweep; defaults to the first entry of the schedule.
    #[arg(long)]
    eps: Option<f64>,
    /// Write the per-phase band table to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the band/gap summary JSON to this file as well as stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the assembled stiffness and mass matrices at phase zero to
    /// <prefix>_stiffness.mtx and <prefix>_mass.mtx (Matrix Market).
    #[arg(long, value_name = "PREFIX")]
    dump_system: Option<PathBuf>,
}

#[derive(Args)]
struct LimitSpectrumArgs {
    /// Coupling target: a positive number or "infinity".
    #[arg(long, value_parser = parse_q)]
    q: QTarget<f64>,
    /// Room area per unit cell.
    #[arg(long = "areaB")]
    area_b: f64,
    /// Upper edge of the spectral window.
    #[arg(long = "L", default_value_t = 3.0)]
    cap: f64,
    /// Length of the bounded interval; enables the eigenvalue listing.
    #[arg(long)]
    l: Option<f64>,
    /// Largest transverse index in the eigenvalue listing.
    #[arg(long, default_value_t = 8)]
    k_max: usize,
}

#[derive(Args)]
struct StudyArgs {
    /// Study configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write the full report to this JSON file.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write a per-period summary to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ResolventArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// Write the averaged strip and room profiles of every computed row to
    /// <prefix>_row<i>_j1.csv and <prefix>_row<i>_j2.csv.
    #[arg(long, value_name = "PREFIX")]
    profiles: Option<PathBuf>,
}

fn parse_q(s: &str) -> Result<QTarget<f64>, String> {
    if s == "infinity" {
        return Ok(QTarget::Infinity);
    }
    s.parse::<f64>()
        .map(QTarget::Finite)
        .map_err(|_| format!("expected a number or \"infinity\", got {s:?}"))
}

/// A failed command, tagged with the exit code it deserves.
enum Failure {
    /// Exit 2: the request itself is unusable.
    Config(String),
    /// Exit 3: the solver or an output stream failed.
    Solver(String),
}

impl Failure {
    fn report(&self) -> i32 {
        match self {
            Failure::Config(m) => {
                eprintln!("error: {m}");
                2
            }
            Failure::Solver(m) => {
                eprintln!("error: {m}");
                3
            }
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn solver_err(e: impl std::fmt::Display) -> Failure {
    Failure::Solver(e.to_string())
}

impl From<StudyError> for Failure {
    fn from(e: StudyError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

/// Restore the default SIGPIPE disposition so that piping output into a
/// consumer that exits early (`head`, `grep -m1`, ...) terminates the process
/// quietly instead of panicking on a failed write to stdout.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = Cli::parse();
    let code = match resolve_threads(cli.threads) {
        Ok(Some(n)) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli.command)),
            Err(e) => Failure::Config(format!("cannot build a {n}-thread pool: {e}")).report(),
        },
        Ok(None) => run(&cli.command),
        Err(f) => f.report(),
    };
    std::process::exit(code);
}

fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if let Some(0) = flag {
        return Err(Failure::Config("--threads must be positive".into()));
    }
    match std::env::var("BANDGAP_LAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Config(format!(
                "BANDGAP_LAB_THREADS must be a positive integer, got {v:?}"
            ))),
        },
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(Failure::Config(format!("BANDGAP_LAB_THREADS: {e}"))),
    }
}

fn run(command: &Command) -> i32 {
    let outcome = match command {
        Command::Cell(args) => cmd_cell(args),
        Command::Mesh(args) => cmd_mesh(args),
        Command::Bands(args) => cmd_bands(args),
        Command::LimitSpectrum(args) => cmd_limit_spectrum(args),
        Command::ResolventConvergence(args) => cmd_resolvent(args),
        Command::GapConvergence(args) => cmd_gap(args),
        Command::Selfcheck => cmd_selfcheck(),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => f.report(),
    }
}

fn write_text(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), Failure> {
    let file = File::create(path)
        .map_err(|e| Failure::Solver(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| Failure::Solver(format!("cannot write {}: {e}", path.display())))?;
    w.flush()
        .map_err(|e| Failure::Solver(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct CellDoc {
    params: CellParams<f64>,
    geometry: CellGeometry<f64>,
}

fn cmd_cell(args: &CellArgs) -> Result<i32, Failure> {
    let params = args.geometry.derive()?;
    let doc = CellDoc {
        params,
        geometry: CellGeometry::from_params(&params),
    };
    println!("{}", serde_json::to_string_pretty(&doc).map_err(solver_err)?);
    Ok(0)
}

#[derive(Serialize)]
struct MeshDoc {
    vertex_count: usize,
    triangle_count: usize,
    boundary_edges: usize,
    periodic_pairs: usize,
    strip_triangles: usize,
    passage_triangles: usize,
    room_triangles: usize,
    min_area: f64,
    max_aspect: f64,
}

fn mesh_failure(e: MeshError) -> Failure {
    match e {
        MeshError::BadControls(_) => Failure::Config(e.to_string()),
        other => Failure::Solver(other.to_string()),
    }
}

fn cmd_mesh(args: &MeshArgs) -> Result<i32, Failure> {
    let params = args.geometry.derive()?;
    let cell = CellGeometry::from_params(&params);
    let controls = MeshControls {
        n_base: args.n_base,
        ..MeshControls::default()
    };
    let mut mesh = triangulate(&cell, &controls).map_err(mesh_failure)?;
    for _ in 0..args.refine {
        mesh = mesh.refine().map_err(mesh_failure)?;
    }
    mesh.validate().map_err(solver_err)?;
    let q = mesh.quality();
    let count = |r: Region| mesh.regions.iter().filter(|&&x| x == r).count();
    let doc = MeshDoc {
        vertex_count: q.vertex_count,
        triangle_count: q.triangle_count,
        boundary_edges: mesh.boundary_edges.len(),
        periodic_pairs: mesh.periodic_pairs.len(),
        strip_triangles: count(Region::Strip),
        passage_triangles: count(Region::Passage),
        room_triangles: count(Region::Room),
        min_area: q.min_area,
        max_aspect: q.max_aspect,
    };
    if let Some(path) = &args.vtk {
        write_text(path, |w| write_vtk(w, &mesh, &[]))?;
    }
    println!("{}", serde_json::to_string_pretty(&doc).map_err(solver_err)?);
    Ok(0)
}

fn cmd_bands(args: &BandsArgs) -> Result<i32, Failure> {
    let cfg = config::load_study(&args.config)?;
    let eps = match args.eps {
        Some(e) if e > 0.0 => e,
        Some(e) => return Err(Failure::Config(format!("eps must be positive, got {e}"))),
        None => cfg.eps_schedule[0],
    };
    let params = cfg.law.params_at(&cfg.room, eps).map_err(config_err)?;
    let cell = CellGeometry::from_params(&params);
    let settings = SweepSettings {
        m_bands: cfg.m_bands,
        phi_count: cfg.phi_count,
        eigen: EigenOptions {
            seed: cfg.seed,
            ..EigenOptions::default()
        },
        richardson_tol: cfg.richardson_tol,
        max_refines: cfg.max_refines,
    };
    let bs = band_sweep_converged(&cell, &cfg.mesh, &settings).map_err(bloch_failure)?;
    let tau = cfg.tau_gap.unwrap_or(cfg.spectral_cap * 1e-3);
    let gaps = extract_gaps(&bs.bands, cfg.spectral_cap, tau).map_err(bloch_failure)?;
    let doc = SpectrumDoc::new(&bs, &gaps, cfg.spectral_cap, tau);
    let text = serde_json::to_string_pretty(&doc).map_err(solver_err)?;

    if let Some(path) = &args.csv {
        write_text(path, |w| write_bands_csv(w, &bs))?;
    }
    if let Some(path) = &args.json {
        write_text(path, |w| writeln!(w, "{text}"))?;
    }
    if let Some(prefix) = &args.dump_system {
        let mesh = triangulate(&cell, &cfg.mesh).map_err(mesh_failure)?;
        let dofs = dof_map(&mesh, phase_factor(0.0));
        let (k, m) = assemble(&mesh, &dofs);
        let with_suffix = |s: &str| {
            let mut os = prefix.as_os_str().to_owned();
            os.push(s);
            PathBuf::from(os)
        };
        write_text(&with_suffix("_stiffness.mtx"), |w| {
            write_matrix_market(w, &k, true)
        })?;
        write_text(&with_suffix("_mass.mtx"), |w| write_matrix_market(w, &m, true))?;
    }
    println!("{text}");
    Ok(0)
}

fn bloch_failure(e: BlochError) -> Failure {
    match e {
        BlochError::InsufficientBands { .. } | BlochError::BadSettings(_) => Failure::Config(
            format!("{e}; raise m_bands or lower the spectral window"),
        ),
        other => Failure::Solver(other.to_string()),
    }
}

fn cmd_limit_spectrum(args: &LimitSpectrumArgs) -> Result<i32, Failure> {
    let model = LimitModel::new(args.q, args.area_b).map_err(config_err)?;
    if !(args.cap > 0.0) {
        return Err(Failure::Config(format!(
            "the spectral window cap must be positive, got {}",
            args.cap
        )));
    }
    let spectrum = model.spectrum(args.cap);
    let fmt_pair = |(a, b): (f64, f64)| format!("[{a:.16e}, {b:.16e}]");
    let pieces: Vec<String> = spectrum.intervals().iter().map(|&p| fmt_pair(p)).collect();
    println!("spectrum within [0, {:.16e}]: {}", args.cap, pieces.join(" U "));
    match model.gap() {
        Some((lo, hi)) => println!("gap: ({lo:.16e}, {hi:.16e})"),
        None => println!("gap: none"),
    }
    if let Some(l) = args.l {
        let values = model.bounded_eigenvalues(l, args.k_max).map_err(config_err)?;
        println!(
            "eigenvalues on an interval of length {l:.16e} with transverse index up to {}:",
            args.k_max
        );
        for v in values {
            println!("{v:.16e}");
        }
    }
    Ok(0)
}

fn print_resolvent_report(report: &bandgap_lab::ConvergenceReport64) {
    println!(
        "limit norms: u1 = {:.16e}, u2 = {:.16e}",
        report.limit_u1_norm, report.limit_u2_norm
    );
    for row in &report.rows {
        match &row.status {
            RowStatus::Skipped(reason) => println!("eps = {:.16e}  skipped: {reason}", row.eps),
            RowStatus::Computed => println!(
                "eps = {:.16e}  vertices = {}  reduced = {}  e1 = {:.16e}  e2 = {:.16e}  coupling = {:.16e}",
                row.eps,
                row.vertex_count,
                row.reduced_dim,
                row.e1.unwrap_or(f64::NAN),
                row.e2.unwrap_or(f64::NAN),
                row.coupling_residual.unwrap_or(f64::NAN),
            ),
        }
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    println!("verdict: {}", if report.pass { "PASS" } else { "FAIL" });
}

fn path_with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut os = prefix.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}

fn cmd_resolvent(args: &ResolventArgs) -> Result<i32, Failure> {
    let cfg = config::load_study(&args.study.config)?;
    let report = resolvent_study(&cfg)?;
    if let Some(path) = &args.study.json {
        let text = serde_json::to_string_pretty(&report).map_err(solver_err)?;
        write_text(path, |w| writeln!(w, "{text}"))?;
    }
    if let Some(path) = &args.study.csv {
        write_text(path, |w| write_resolvent_csv(w, &report))?;
    }
    if let Some(prefix) = &args.profiles {
        for (i, row) in report.rows.iter().enumerate() {
            if let Some((p1, p2)) = &row.profiles {
                write_text(&path_with_suffix(prefix, &format!("_row{i}_j1.csv")), |w| {
                    write_profile_csv(w, p1)
                })?;
                write_text(&path_with_suffix(prefix, &format!("_row{i}_j2.csv")), |w| {
                    write_profile_csv(w, p2)
                })?;
            }
        }
    }
    print_resolvent_report(&report);
    Ok(if report.pass { 0 } else { 1 })
}

fn print_gap_report(report: &bandgap_lab::harness::GapReport<f64>) {
    match report.limit_gap {
        Some((lo, hi)) => println!("limit gap: ({lo:.16e}, {hi:.16e})"),
        None => println!("limit gap: none inside the window"),
    }
    println!(
        "window cap = {:.16e}, gap width floor = {:.16e}",
        report.spectral_cap, report.tau_gap
    );
    for row in &report.rows {
        match &row.status {
            RowStatus::Skipped(reason) => println!("eps = {:.16e}  skipped: {reason}", row.eps),
            RowStatus::Computed => {
                let gaps: Vec<String> = row
                    .gaps
                    .iter()
                    .map(|&(a, b)| format!("({a:.16e}, {b:.16e})"))
                    .collect();
                println!(
                    "eps = {:.16e}  vertices = {}  refinements = {}  converged = {}  symmetry = {:.16e}  residual = {:.16e}",
                    row.eps,
                    row.vertex_count,
                    row.refinements,
                    row.richardson_converged,
                    row.symmetry_deviation,
                    row.residual_max,
                );
                println!(
                    "  gaps: {}",
                    if gaps.is_empty() { "none".to_string() } else { gaps.join(" ") }
                );
                if let Some((a, b)) = row.tracked_gap {
                    println!(
                        "  tracked: ({a:.16e}, {b:.16e})  err_lower = {:.16e}  err_upper = {:.16e}",
                        row.err_lower.unwrap_or(f64::NAN),
                        row.err_upper.unwrap_or(f64::NAN),
                    );
                }
                if let Some(h) = row.hausdorff {
                    println!("  hausdorff = {h:.16e}");
                }
            }
        }
    }
    match report.single_gap {
        Some(true) => println!("single gap at the finest computed period: yes"),
        Some(false) => println!("single gap at the finest computed period: no"),
        None => println!("single gap at the finest computed period: not evaluated (no computed rows)"),
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    println!("verdict: {}", if gap_verdict(report) { "PASS" } else { "FAIL" });
}

/// Overall gap-study verdict: the trend checks must pass and the finest
/// computed row must show exactly one gap.
fn gap_verdict(report: &bandgap_lab::harness::GapReport<f64>) -> bool {
    report.pass && report.single_gap == Some(true)
}

fn cmd_gap(args: &StudyArgs) -> Result<i32, Failure> {
    let cfg = config::load_study(&args.config)?;
    let report = gap_study(&cfg)?;
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&report).map_err(solver_err)?;
        write_text(path, |w| writeln!(w, "{text}"))?;
    }
    if let Some(path) = &args.csv {
        write_text(path, |w| write_gap_csv(w, &report))?;
    }
    print_gap_report(&report);
    Ok(if gap_verdict(&report) { 0 } else { 1 })
}

/// Fast sanity checks with closed-form answers. Failure exits with 1.
fn cmd_selfcheck() -> Result<i32, Failure> {
    let t0 = Instant::now();
    let mut ok = true;
    let mut check = |name: &str, passed: bool, detail: String| {
        ok &= passed;
        println!(
            "[{}] {name}: {detail}",
            if passed { "ok" } else { "FAILED" }
        );
    };

    // 1. Roots of the limit dispersion relation against frozen values.
    {
        let model = LimitModel::new(QTarget::Finite(1.0), 1.0).map_err(solver_err)?;
        let (lo, hi) = model.eigenvalues_for_mode(1.0);
        let golden_lo = 0.3819660112501051_f64;
        let golden_hi = 2.618033988749895_f64;
        let err = (lo - golden_lo)
            .abs()
            .max((hi.unwrap_or(f64::NAN) - golden_hi).abs());
        check(
            "limit dispersion roots",
            err < 1e-12,
            format!("worst deviation {err:.3e}"),
        );
    }

    // 2. Neumann square eigenvalues via the bounded-waveguide route.
    {
        let cell = CellGeometry::strip_only(1.0);
        let cells = build_bounded_waveguide(1.0, &cell).map_err(solver_err)?;
        let controls = MeshControls {
            n_base: 4,
            ..MeshControls::default()
        };
        let mut mesh = triangulate_waveguide(&cells, &controls).map_err(solver_err)?;
        for _ in 0..2 {
            mesh = mesh.refine().map_err(solver_err)?;
        }
        let dofs = dof_map(&mesh, phase_factor(0.0));
        let (k, m) = assemble(&mesh, &dofs);
        let result =
            lowest_eigenpairs(&k, &m, 4, &EigenOptions::default()).map_err(solver_err)?;
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let exact = [0.0, pi2, pi2, 2.0 * pi2];
        let mut worst = 0.0_f64;
        for (have, want) in result.eigenvalues.iter().zip(exact) {
            let scale = want.max(1.0);
            worst = worst.max((have - want).abs() / scale);
        }
        check(
            "Neumann square eigenvalues",
            worst < 1e-2 && result.eigenvalues[0].abs() < 1e-8,
            format!("worst relative deviation {worst:.3e}"),
        );
    }

    // 3. Floquet band of the undecorated strip against (phi/eps)^2.
    {
        let eps = 0.2;
        let controls = MeshControls {
            n_base: 16,
            ..MeshControls::default()
        };
        let mesh = triangulate(&CellGeometry::strip_only(eps), &controls).map_err(solver_err)?;
        let settings = SweepSettings {
            m_bands: 2,
            phi_count: 2,
            ..SweepSettings::default()
        };
        let bs = band_sweep(&mesh, &settings).map_err(solver_err)?;
        let phi = std::f64::consts::PI;
        let want = (phi / eps) * (phi / eps);
        let have = bs.mu.last().expect("nonempty grid")[0];
        let rel = (have - want).abs() / want;
        check(
            "strip Floquet band at the zone edge",
            rel < 2e-2 && bs.residual_max < 1e-8,
            format!("relative deviation {rel:.3e}, residual {:.3e}", bs.residual_max),
        );
    }

    // 4. Decorated cell meshes stay conforming.
    {
        let law = ScalingLaw::new(QTarget::Finite(1.0), 1.0).map_err(solver_err)?;
        let room = RoomSpec::new(0.5, 0.5, 0.2);
        let params = law.params_at(&room, 0.2).map_err(solver_err)?;
        let mesh = triangulate(&CellGeometry::from_params(&params), &MeshControls::default())
            .map_err(solver_err)?;
        let conforming = mesh.validate().is_ok();
        check(
            "decorated cell triangulation",
            conforming,
            format!("{} vertices", mesh.n_vertices()),
        );
    }

    // 5. Element matrices: stiffness annihilates constants, mass totals
    //    the cell area, on a decorated cell at phase zero.
    {
        let law = ScalingLaw::new(QTarget::Finite(1.0), 1.0).map_err(solver_err)?;
        let room = RoomSpec::new(0.5, 0.5, 0.2);
        let params = law.params_at(&room, 0.2).map_err(solver_err)?;
        let cell = CellGeometry::from_params(&params);
        let mesh = triangulate(&cell, &MeshControls::default()).map_err(solver_err)?;
        let dofs = dof_map(&mesh, phase_factor(0.0));
        let (k, m) = assemble(&mesh, &dofs);
        let ones = vec![Cplx::new(1.0, 0.0); dofs.n_reduced];
        let stiff_residual = k
            .matvec_alloc(&ones)
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.norm()));
        let mass_total: f64 = m.matvec_alloc(&ones).iter().map(|v| v.re).sum();
        let p = cell.protuberance.as_ref().expect("decorated cell");
        let area = cell.strip.area() + p.passage.area() + p.room.area();
        let mass_defect = (mass_total - area).abs();
        check(
            "element matrices on a decorated cell",
            stiff_residual <= 1e-12 * k.norm_one() && mass_defect <= 1e-12 * area,
            format!("stiffness·1 residual {stiff_residual:.3e}, mass defect {mass_defect:.3e}"),
        );
    }

    // 6. Gap extraction and Hausdorff distances on hand-checkable sets.
    {
        let gaps = extract_gaps(&[(0.0, 1.0), (1.3, 2.5), (2.6, 4.0)], 3.0, 0.05)
            .map_err(solver_err)?;
        let expected = vec![(1.0, 1.3), (2.5, 2.6)];
        let narrow = extract_gaps(&[(0.0, 1.0), (1.02, 3.0)], 3.0, 0.05).map_err(solver_err)?;
        let split = IntervalSet::from_intervals(&[(0.0, 1.0), (2.0, 3.0)]);
        let hull = IntervalSet::from_intervals(&[(0.0, 3.0)]);
        let shifted = IntervalSet::from_intervals(&[(0.2, 1.0)]);
        let unit = IntervalSet::from_intervals(&[(0.0, 1.0)]);
        let exact = gaps == expected
            && narrow.is_empty()
            && split.hausdorff(&hull) == 0.5
            && unit.hausdorff(&shifted) == 0.2
            && split.hausdorff(&split) == 0.0;
        check(
            "gap extraction and Hausdorff examples",
            exact,
            format!(
                "gaps {gaps:?}, narrow {narrow:?}, midpoint distance {}",
                split.hausdorff(&hull)
            ),
        );
    }

    // 7. The resolvent pipeline produces finite errors on one coarse row.
    {
        let law = ScalingLaw::new(QTarget::Finite(1.0), 1.0).map_err(solver_err)?;
        let room = RoomSpec::new(0.5, 0.5, 0.2);
        let mut cfg = StudyConfig::new(law, room);
        cfg.eps_schedule = vec![0.25];
        cfg.l = 0.5;
        cfg.f1 = CosineSeries::constant(0.5, 1.0);
        cfg.f2 = CosineSeries::zero(0.5);
        let report = resolvent_study(&cfg)?;
        let row = &report.rows[0];
        let finite = row.status == RowStatus::Computed
            && row.e1.map(f64::is_finite).unwrap_or(false)
            && row.e2.map(f64::is_finite).unwrap_or(false);
        check(
            "resolvent pipeline",
            finite,
            format!(
                "e1 = {:.3e}, e2 = {:.3e}",
                row.e1.unwrap_or(f64::NAN),
                row.e2.unwrap_or(f64::NAN)
            ),
        );
    }

    println!(
        "selfcheck {} in {:.1}s",
        if ok { "passed" } else { "FAILED" },
        t0.elapsed().as_secs_f64()
    );
    Ok(if ok { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_flag_accepts_numbers_and_infinity() {
        assert_eq!(parse_q("2.5").unwrap(), QTarget::Finite(2.5));
        assert_eq!(parse_q("infinity").unwrap(), QTarget::Infinity);
        assert!(parse_q("lots").is_err());
    }

    #[test]
    fn cli_declaration_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
