//! `ucpg`: design, verify, and benchmark universal composite phase gates.
//!
//! Subcommands:
//! - `generate`: emit the analytic phase sequence for an even pulse count
//!   and target phase as a sequence file.
//! - `verify`: walk the error-cancellation ladder of a sequence and fit its
//!   leakage scaling exponent; exit 0 only when the full ladder passes.
//! - `scan`: map the gate fidelity over the (ε_A, δ) error plane and write
//!   CSV + JSON + SVG artifacts.
//! - `compare`: scan several sequences on one grid and tabulate plateau
//!   metrics side by side.
//!
//! Exit codes: 0 success/pass, 1 verification failure, 2 usage error,
//! 3 I/O or schema error.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use ucpg::scan::{cross_section, extract_contours, plateau_metrics, scan, Axis, Evaluator, ScanGrid};
use ucpg::seqfile::{load_sequence, save_sequence, SeqFileError, SequenceFile};
use ucpg::svgplot::render_fidelity_map;
use ucpg::verify::{default_eps_grid, estimate_leakage_order, verify_cancellation_ladder_with};
use ucpg::{generate_sequence, IntegratorConfig, PhaseSequence, PulseEnvelope};

const EXIT_VERIFY_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(name = "ucpg", version, about = "Universal composite phase gate toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the analytic phase sequence for an even pulse count.
    Generate(GenerateArgs),
    /// Verify universal error cancellation of a sequence file.
    Verify(VerifyArgs),
    /// Scan gate fidelity over the error plane and write CSV/JSON/SVG.
    Scan(ScanArgs),
    /// Compare plateau metrics of two or more sequences.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Even number of pulses.
    #[arg(long)]
    n: usize,
    /// Target gate phase; bare numbers are degrees, `rad`/`deg` suffixes
    /// are honored (e.g. `90deg`, `1.5708rad`).
    #[arg(long, allow_hyphen_values = true)]
    phi: String,
    /// Output sequence file path (defaults to ucpg-n<N>-phi<PHI>.json in
    /// the output directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Sequence file to verify.
    #[arg(long)]
    seq: PathBuf,
    /// Highest vanishing order to check (odd; defaults to the full ladder).
    #[arg(long)]
    max_order: Option<usize>,
    /// Number of α samples on [0, 2π) (min 64).
    #[arg(long, default_value_t = 64)]
    alpha_samples: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum EnvelopeKind {
    Rect,
    Gauss,
}

#[derive(Args, Clone)]
struct ScanOpts {
    /// Pulse envelope model.
    #[arg(long, value_enum, default_value_t = EnvelopeKind::Rect)]
    envelope: EnvelopeKind,
    /// Grid resolution as <n_eps>x<n_delta>.
    #[arg(long, default_value = "100x100", value_parser = parse_grid_size)]
    grid: (usize, usize),
    /// Pulse-area error range as <min>:<max>.
    #[arg(long, default_value = "-0.3:0.3", value_parser = parse_range, allow_hyphen_values = true)]
    eps_range: (f64, f64),
    /// Detuning range as <min>:<max>.
    #[arg(long, default_value = "-0.5:0.5", value_parser = parse_range, allow_hyphen_values = true)]
    delta_range: (f64, f64),
    /// Runge-Kutta steps per pulse (shaped envelopes).
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    /// Infidelity decades for contours/metrics, e.g. `2,3,4` for 1e-2..1e-4.
    #[arg(long, default_value = "2,3,4", value_parser = parse_levels)]
    levels: LevelList,
    /// Gaussian envelope width in units of the pulse duration.
    #[arg(long, default_value_t = 0.18)]
    sigma_fraction: f64,
    /// Gaussian truncation in standard deviations.
    #[arg(long, default_value_t = 2.5)]
    truncation_sigmas: f64,
    /// Cap the number of worker threads (output does not depend on this).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ScanArgs {
    /// Sequence file to scan.
    #[arg(long)]
    seq: PathBuf,
    #[command(flatten)]
    opts: ScanOpts,
    /// Output directory (default: $UCPG_OUT_DIR or the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// First sequence file.
    #[arg(long)]
    seq_a: PathBuf,
    /// Second sequence file.
    #[arg(long)]
    seq_b: PathBuf,
    /// Additional sequence files.
    #[arg(long = "seq")]
    extra: Vec<PathBuf>,
    #[command(flatten)]
    opts: ScanOpts,
    /// Also evaluate 1-D infidelity cuts along both axes and write them as
    /// CSV next to the report.
    #[arg(long)]
    axis_cuts: bool,
    /// Output directory for the JSON report (default: report to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct LevelList(Vec<f64>);

fn parse_levels(s: &str) -> Result<LevelList, String> {
    let mut levels = Vec::new();
    for part in s.split(',') {
        let m: f64 = part
            .trim()
            .parse()
            .map_err(|_| format!("invalid level decade `{part}`"))?;
        if m <= 0.0 {
            return Err("level decades must be positive".into());
        }
        levels.push(10f64.powf(-m));
    }
    if levels.is_empty() {
        return Err("need at least one level".into());
    }
    Ok(LevelList(levels))
}

fn parse_grid_size(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid must look like 100x100, got `{s}`"))?;
    let n_eps = a.trim().parse().map_err(|_| format!("bad grid size `{a}`"))?;
    let n_delta = b.trim().parse().map_err(|_| format!("bad grid size `{b}`"))?;
    Ok((n_eps, n_delta))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("range must look like -0.3:0.3, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad range bound `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad range bound `{b}`"))?;
    if lo >= hi {
        return Err(format!("range min must be below max, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// Angles on the command line default to degrees; `deg`/`rad` suffixes are
/// explicit. Returns radians.
fn parse_angle_default_deg(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(v) = t.strip_suffix("rad") {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid angle `{s}`"))
    } else if let Some(v) = t.strip_suffix("deg") {
        v.trim()
            .parse::<f64>()
            .map(f64::to_radians)
            .map_err(|_| format!("invalid angle `{s}`"))
    } else {
        t.parse::<f64>()
            .map(f64::to_radians)
            .map_err(|_| format!("invalid angle `{s}` (expected degrees or a deg/rad suffix)"))
    }
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<SeqFileError> for CliError {
    fn from(e: SeqFileError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os("UCPG_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn config_hash<T: Serialize>(config: &T) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    hex::encode(&digest[..8])
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Verify(args) => run_verify(args),
        Command::Scan(args) => run_scan(args),
        Command::Compare(args) => run_compare(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

#[derive(Serialize)]
struct GenerateConfig<'a> {
    command: &'a str,
    n: usize,
    phi_rad: f64,
    tool_version: &'a str,
}

fn run_generate(args: GenerateArgs) -> Result<u8, CliError> {
    if args.n == 0 || args.n % 2 != 0 {
        return Err(CliError::Usage(format!(
            "n must be even and positive, got {}",
            args.n
        )));
    }
    let phi = parse_angle_default_deg(&args.phi).map_err(CliError::Usage)?;
    let seq = generate_sequence(args.n, phi)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let hash = config_hash(&GenerateConfig {
        command: "generate",
        n: args.n,
        phi_rad: phi,
        tool_version: env!("CARGO_PKG_VERSION"),
    });
    let file = SequenceFile::from_sequence(
        &seq,
        PI,
        &format!(
            "generated by ucpg {} from the analytic even-N phase law; config {hash}",
            env!("CARGO_PKG_VERSION")
        ),
    );
    let path = args.out.unwrap_or_else(|| {
        out_dir(&None).join(format!(
            "ucpg-n{}-phi{:.4}rad.json",
            args.n,
            seq.target_phase_wrapped()
        ))
    });
    save_sequence(&path, &file)?;
    println!("wrote {}", path.display());
    println!("{:>5}  {:>12}  {:>12}", "pulse", "phase (deg)", "phase (rad)");
    for (k, p) in seq.phases().iter().enumerate() {
        println!("{:>5}  {:>12.6}  {:>12.8}", k + 1, p.to_degrees(), p);
    }
    println!(
        "target phase: {:.6} rad ({:.4} deg); universality order m = {}{}",
        seq.target_phase_wrapped(),
        seq.target_phase_wrapped().to_degrees(),
        seq.predicted_order(),
        if seq.order_is_conjectured() {
            " (conjectured)"
        } else {
            ""
        }
    );
    Ok(0)
}

#[derive(Serialize)]
struct VerifyConfig<'a> {
    command: &'a str,
    sequence: &'a Path,
    max_order: Option<usize>,
    alpha_samples: usize,
    tool_version: &'a str,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    config_hash: String,
    sequence: SequenceSummary<'a>,
    #[serde(flatten)]
    ladder: &'a ucpg::LadderReport,
    fitted_exponent: f64,
    fit_residual: f64,
    worst_alpha: f64,
}

#[derive(Serialize)]
struct SequenceSummary<'a> {
    family: &'a str,
    n_pulses: usize,
    target_phase: f64,
    phases_rad: &'a [f64],
}

fn summarize(seq: &PhaseSequence) -> SequenceSummary<'_> {
    SequenceSummary {
        family: seq.family(),
        n_pulses: seq.n_pulses(),
        target_phase: seq.target_phase_wrapped(),
        phases_rad: seq.phases(),
    }
}

fn run_verify(args: VerifyArgs) -> Result<u8, CliError> {
    if args.alpha_samples < 64 {
        return Err(CliError::Usage(format!(
            "alpha-samples must be at least 64, got {}",
            args.alpha_samples
        )));
    }
    if let Some(order) = args.max_order {
        if order % 2 == 0 {
            return Err(CliError::Usage(format!(
                "max-order must be odd, got {order}"
            )));
        }
    }
    let seq = load_sequence(&args.seq)?;
    let ladder = verify_cancellation_ladder_with(&seq, args.max_order, Some(args.alpha_samples));
    let alphas: Vec<f64> = (0..args.alpha_samples)
        .map(|j| 2.0 * PI * j as f64 / args.alpha_samples as f64)
        .collect();
    let estimate = estimate_leakage_order(&seq, &default_eps_grid(), &alphas)
        .map_err(|e| CliError::Data(e.to_string()))?;

    let hash = config_hash(&VerifyConfig {
        command: "verify",
        sequence: &args.seq,
        max_order: args.max_order,
        alpha_samples: args.alpha_samples,
        tool_version: env!("CARGO_PKG_VERSION"),
    });
    let report = VerifyReport {
        config_hash: hash,
        sequence: summarize(&seq),
        ladder: &ladder,
        fitted_exponent: estimate.fitted_exponent,
        fit_residual: estimate.fit_residual,
        worst_alpha: estimate.worst_alpha,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &args.out {
        Some(path) => {
            std::fs::write(path, json + "\n")?;
            println!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }

    for check in &ladder.per_order {
        eprintln!(
            "order {:>2}: max amplitude {:.3e}  {}",
            check.order,
            check.max_harmonic_amplitude.max(check.max_over_alpha),
            if check.pass { "cancels" } else { "FAILS" }
        );
    }
    eprintln!(
        "order {:>2}: max amplitude {:.3e}  {} (first surviving order{})",
        ladder.surviving_order.order,
        ladder
            .surviving_order
            .max_harmonic_amplitude
            .max(ladder.surviving_order.max_over_alpha),
        if ladder.surviving_order.pass {
            "nonzero"
        } else {
            "UNEXPECTEDLY SMALL"
        },
        if ladder.conjectured { ", conjectured" } else { "" }
    );
    eprintln!(
        "fitted exponent {:.3} vs predicted {} -> {}",
        estimate.fitted_exponent,
        ladder.predicted_exponent,
        if ladder.pass { "PASS" } else { "FAIL" }
    );
    Ok(if ladder.pass { 0 } else { EXIT_VERIFY_FAIL })
}

#[derive(Serialize)]
struct ScanConfig<'a> {
    command: &'a str,
    sequence: SequenceSummary<'a>,
    envelope: &'a PulseEnvelope,
    grid: &'a ScanGrid,
    steps: usize,
    levels: &'a [f64],
    tool_version: &'a str,
}

#[derive(Serialize)]
struct ScanSidecar<'a> {
    config_hash: &'a str,
    tool_version: &'a str,
    sequence: SequenceSummary<'a>,
    envelope: &'a PulseEnvelope,
    integrator: &'a IntegratorConfig,
    grid: &'a ScanGrid,
    levels: &'a [f64],
    csv: &'a str,
    svg: &'a str,
}

struct ScanSetup {
    env: PulseEnvelope,
    grid: ScanGrid,
    cfg: IntegratorConfig,
}

fn scan_setup(opts: &ScanOpts) -> Result<ScanSetup, CliError> {
    if opts.envelope == EnvelopeKind::Gauss && opts.steps < 100 {
        return Err(CliError::Usage(format!(
            "shaped-pulse integration needs at least 100 steps per pulse, got {}",
            opts.steps
        )));
    }
    let env = match opts.envelope {
        EnvelopeKind::Rect => PulseEnvelope::rectangular(PI),
        EnvelopeKind::Gauss => PulseEnvelope::truncated_gaussian_with(
            PI,
            opts.sigma_fraction,
            opts.truncation_sigmas,
        ),
    };
    let grid = ScanGrid {
        eps_a_range: opts.eps_range,
        delta_range: opts.delta_range,
        n_eps: opts.grid.0,
        n_delta: opts.grid.1,
    };
    let cfg = IntegratorConfig {
        steps_per_pulse: opts.steps,
    };
    Ok(ScanSetup { env, grid, cfg })
}

fn with_thread_cap<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn run_scan(args: ScanArgs) -> Result<u8, CliError> {
    let seq = load_sequence(&args.seq)?;
    let setup = scan_setup(&args.opts)?;
    setup
        .grid
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let map = with_thread_cap(args.opts.threads, || {
        scan(&seq, &setup.grid, &setup.env, &setup.cfg)
    })
    .map_err(|e| CliError::Data(e.to_string()))?;
    let contours = extract_contours(&map, &args.opts.levels.0);

    let hash = config_hash(&ScanConfig {
        command: "scan",
        sequence: summarize(&seq),
        envelope: &setup.env,
        grid: &setup.grid,
        steps: setup.cfg.steps_per_pulse,
        levels: &args.opts.levels.0,
        tool_version: env!("CARGO_PKG_VERSION"),
    });

    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir)?;
    let stem = args
        .seq
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scan".into());
    let base = format!("{stem}-{}", setup.env.kind_name());
    let csv_name = format!("{base}.csv");
    let svg_name = format!("{base}.svg");
    let json_name = format!("{base}.json");

    std::fs::write(dir.join(&csv_name), map.to_csv())?;
    let title = format!(
        "{} (N={}, target {:.4} rad, {})",
        seq.family(),
        seq.n_pulses(),
        seq.target_phase_wrapped(),
        setup.env.kind_name()
    );
    std::fs::write(
        dir.join(&svg_name),
        render_fidelity_map(&map, &contours, &title),
    )?;
    let sidecar = ScanSidecar {
        config_hash: &hash,
        tool_version: env!("CARGO_PKG_VERSION"),
        sequence: summarize(&seq),
        envelope: &setup.env,
        integrator: &setup.cfg,
        grid: &setup.grid,
        levels: &args.opts.levels.0,
        csv: &csv_name,
        svg: &svg_name,
    };
    std::fs::write(
        dir.join(&json_name),
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes") + "\n",
    )?;
    println!(
        "wrote {} {} {} (config {hash})",
        dir.join(&csv_name).display(),
        dir.join(&json_name).display(),
        dir.join(&svg_name).display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct CompareEntry {
    label: String,
    n_pulses: usize,
    target_phase: f64,
    /// Per requested level.
    area_fraction: Vec<f64>,
    eps_a_halfwidth: Vec<f64>,
    delta_halfwidth: Vec<f64>,
}

#[derive(Serialize)]
struct CompareReport<'a> {
    config_hash: String,
    levels: &'a [f64],
    grid: &'a ScanGrid,
    envelope: &'a PulseEnvelope,
    entries: Vec<CompareEntry>,
}

#[derive(Serialize)]
struct CompareConfig<'a> {
    command: &'a str,
    sequences: Vec<SequenceSummary<'a>>,
    envelope: &'a PulseEnvelope,
    grid: &'a ScanGrid,
    steps: usize,
    levels: &'a [f64],
    axis_cuts: bool,
    tool_version: &'a str,
}

fn run_compare(args: CompareArgs) -> Result<u8, CliError> {
    let mut paths = vec![args.seq_a.clone(), args.seq_b.clone()];
    paths.extend(args.extra.iter().cloned());
    let mut sequences = Vec::new();
    for p in &paths {
        let seq = load_sequence(p).map_err(|e| match e {
            SeqFileError::PlaceholderData { .. } => {
                CliError::Data(format!("reference data absent: {e}"))
            }
            other => CliError::Data(other.to_string()),
        })?;
        let label = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| seq.family().to_string());
        sequences.push((label, seq));
    }
    let setup = scan_setup(&args.opts)?;
    setup
        .grid
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let levels = &args.opts.levels.0;

    let hash = config_hash(&CompareConfig {
        command: "compare",
        sequences: sequences.iter().map(|(_, s)| summarize(s)).collect(),
        envelope: &setup.env,
        grid: &setup.grid,
        steps: setup.cfg.steps_per_pulse,
        levels,
        axis_cuts: args.axis_cuts,
        tool_version: env!("CARGO_PKG_VERSION"),
    });

    let dir = args.out.clone().map(|d| -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&d)?;
        Ok(d)
    });
    let dir = match dir {
        Some(r) => Some(r?),
        None => None,
    };

    let mut entries = Vec::new();
    for (label, seq) in &sequences {
        let map = with_thread_cap(args.opts.threads, || {
            scan(seq, &setup.grid, &setup.env, &setup.cfg)
        })
        .map_err(|e| CliError::Data(e.to_string()))?;
        let ev = Evaluator::new(seq.clone(), setup.env, setup.cfg);
        let metrics = plateau_metrics(&map, &ev, levels);
        entries.push(CompareEntry {
            label: label.clone(),
            n_pulses: seq.n_pulses(),
            target_phase: seq.target_phase_wrapped(),
            area_fraction: metrics.area_fraction,
            eps_a_halfwidth: metrics.eps_a_halfwidth,
            delta_halfwidth: metrics.delta_halfwidth,
        });
        if args.axis_cuts {
            if let Some(dir) = &dir {
                for (axis, name, range) in [
                    (Axis::EpsA, "eps", setup.grid.eps_a_range),
                    (Axis::Delta, "delta", setup.grid.delta_range),
                ] {
                    let n = match axis {
                        Axis::EpsA => setup.grid.n_eps,
                        Axis::Delta => setup.grid.n_delta,
                    };
                    let cut = cross_section(&ev, axis, range, n);
                    let mut csv = String::from("coordinate,infidelity\n");
                    for (x, inf) in cut {
                        csv.push_str(&format!("{},{}\n", x, inf));
                    }
                    std::fs::write(dir.join(format!("{label}-cut-{name}.csv")), csv)?;
                }
            }
        }
    }

    let report = CompareReport {
        config_hash: hash.clone(),
        levels,
        grid: &setup.grid,
        envelope: &setup.env,
        entries,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    if let Some(dir) = &dir {
        let path = dir.join("compare.json");
        std::fs::write(&path, &json)?;
        println!("wrote {} (config {hash})", path.display());
    } else {
        println!("{json}");
    }

    eprintln!("{:<24} {:>4} {:>12} {:>12} {:>12}", "sequence", "N", "area", "eps_a hw", "delta hw");
    let last = levels.len() - 1;
    for e in &report.entries {
        eprintln!(
            "{:<24} {:>4} {:>12.4} {:>12.4} {:>12.4}  (at level {:.0e})",
            e.label, e.n_pulses, e.area_fraction[last], e.eps_a_halfwidth[last],
            e.delta_halfwidth[last], levels[last]
        );
    }
    Ok(0)
}
