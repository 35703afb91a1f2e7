//! Batch front end: build gallery domains, run decompositions, smoothings,
//! and boundary extensions, and print a JSON report per run.
//!
//! Exit codes: 0 on success, 1 when a library invariant is violated, 2 on
//! usage errors. Reports go to standard output; masks and overlays go to
//! the directory named by `--out`.

mod jobs;
mod report;
mod sweep;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use perigrid::gallery::GalleryKind;

use jobs::{run_job, run_verify, Action, Job, Outcome, FUNCTIONS, SETS, SUITES};
use report::Report;

#[derive(Parser)]
#[command(
    name = "perigrid",
    version,
    about = "Finite-perimeter sets on dyadic grids: domains, cubes, cycles, extensions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct DomainArgs {
    /// Gallery domain: square, disk, slit_disk, comb_4_2, cusp,
    /// fat_cantor_3d, or random_polyomino.
    #[arg(long)]
    domain: String,
    /// Dyadic level; the grid has 2^level cells per axis.
    #[arg(long)]
    level: u32,
    /// Seed for the random domain family.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OutArgs {
    /// Directory for masks and overlays; created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace artifact files that already exist.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a gallery domain and write its mask and metadata.
    Gallery {
        #[command(flatten)]
        dom: DomainArgs,
        /// Mask format: auto picks pbm in 2d and layered ascii in 3d.
        #[arg(long, default_value = "auto", value_parser = ["auto", "pbm", "png", "ascii"])]
        format: String,
        #[command(flatten)]
        io: OutArgs,
    },
    /// Whitney cube decomposition of a domain, with the cube laws checked.
    Decompose {
        #[command(flatten)]
        dom: DomainArgs,
        #[command(flatten)]
        io: OutArgs,
    },
    /// Oriented boundary cycles and nesting of a domain or named subset.
    Jordan {
        #[command(flatten)]
        dom: DomainArgs,
        /// Named subset to decompose instead of the whole domain:
        /// left-half, west-of-slit, or lower-half.
        #[arg(long)]
        set: Option<String>,
        #[command(flatten)]
        io: OutArgs,
    },
    /// Whitney smoothing of a named function, with collar variation.
    Smooth {
        #[command(flatten)]
        dom: DomainArgs,
        /// Function to smooth: ramp, radial, bands, or checker.
        #[arg(long, default_value = "ramp")]
        function: String,
        /// Smoothing region; defaults to the domain's open interior.
        #[arg(long)]
        set: Option<String>,
        #[command(flatten)]
        io: OutArgs,
    },
    /// Layer-cake identity check for a named function on a domain.
    Coarea {
        #[command(flatten)]
        dom: DomainArgs,
        /// Function to check: ramp, radial, bands, or checker.
        #[arg(long, default_value = "ramp")]
        function: String,
        #[command(flatten)]
        io: OutArgs,
    },
    /// Boundary extension of a named subset through the complement.
    Extend {
        #[command(flatten)]
        dom: DomainArgs,
        /// Subset to extend: left-half, west-of-slit, or lower-half.
        #[arg(long, default_value = "left-half")]
        set: String,
        #[command(flatten)]
        io: OutArgs,
    },
    /// Run the library invariant suites.
    Verify {
        /// Suite to run: coarea, whitney, jordan, density, or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Level for the polyomino-backed suites.
        #[arg(long, default_value_t = 6)]
        level: u32,
        /// Cases per randomized suite.
        #[arg(long, default_value_t = 25)]
        count: usize,
        /// Base seed for the randomized suites.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Repeat a subcommand across levels and tabulate metric against level.
    Sweep {
        /// Subcommand to repeat: gallery, decompose, jordan, smooth,
        /// coarea, or extend.
        #[arg(long)]
        cmd: String,
        /// Comma-separated levels, for example 8,9,10.
        #[arg(long)]
        levels: String,
        /// Gallery domain to build at each level.
        #[arg(long)]
        domain: String,
        /// Seed for the random domain family.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Named subset, where the repeated command takes one.
        #[arg(long)]
        set: Option<String>,
        /// Named function, where the repeated command takes one.
        #[arg(long, default_value = "ramp")]
        function: String,
        #[command(flatten)]
        io: OutArgs,
    },
}

/// Failure with its exit code semantics: usage problems exit 2, violated
/// library invariants exit 1.
enum Fail {
    Usage(String),
    Module(perigrid::Error),
}

impl From<perigrid::Error> for Fail {
    fn from(e: perigrid::Error) -> Fail {
        Fail::Module(e)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Fail::Module(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.cmd {
        Cmd::Gallery { dom, format, io } => {
            simple(Action::Gallery, dom, None, "ramp", &format, io)
        }
        Cmd::Decompose { dom, io } => {
            simple(Action::Decompose, dom, None, "ramp", "auto", io)
        }
        Cmd::Jordan { dom, set, io } => simple(Action::Jordan, dom, set, "ramp", "auto", io),
        Cmd::Smooth { dom, function, set, io } => {
            simple(Action::Smooth, dom, set, &function, "auto", io)
        }
        Cmd::Coarea { dom, function, io } => {
            simple(Action::Coarea, dom, None, &function, "auto", io)
        }
        Cmd::Extend { dom, set, io } => {
            simple(Action::Extend, dom, Some(set), "ramp", "auto", io)
        }
        Cmd::Verify { suite, level, count, seed } => verify(&suite, level, count, seed),
        Cmd::Sweep { cmd, levels, domain, seed, set, function, io } => {
            run_sweep(&cmd, &levels, &domain, seed, set, &function, io)
        }
    }
}

/// Shared path for the single-level subcommands.
fn simple(
    action: Action,
    dom: DomainArgs,
    set: Option<String>,
    function: &str,
    format: &str,
    io: OutArgs,
) -> Result<(), Fail> {
    let kind = resolve_domain(&dom.domain, dom.seed)?;
    check_planarity(action, kind, format)?;
    check_set(set.as_deref())?;
    check_function(function)?;

    let job = Job {
        action,
        kind,
        level: dom.level,
        set: set.clone(),
        function: function.to_string(),
        format: format.to_string(),
    };
    let outcome = run_job(&job)?;

    let mut rep = Report::new(action.name());
    rep.input("domain", &dom.domain);
    rep.input("level", dom.level);
    rep.input("seed", dom.seed);
    if let Some(s) = &set {
        rep.input("set", s);
    }
    if matches!(action, Action::Smooth | Action::Coarea) {
        rep.input("function", function);
    }
    if action == Action::Gallery {
        rep.input("format", format);
    }
    finish(rep, outcome, &io)
}

fn verify(suite: &str, level: u32, count: usize, seed: u64) -> Result<(), Fail> {
    if suite != "all" && !SUITES.contains(&suite) {
        return Err(Fail::Usage(format!(
            "unknown suite {suite:?}; known: {}, all",
            SUITES.join(", ")
        )));
    }
    if count == 0 {
        return Err(Fail::Usage("--count must be at least 1".into()));
    }
    let outcome = run_verify(suite, level, count, seed)?;
    let mut rep = Report::new("verify");
    rep.input("suite", suite);
    rep.input("level", level);
    rep.input("count", count);
    rep.input("seed", seed);
    finish(rep, outcome, &OutArgs { out: None, force: false })
}

fn run_sweep(
    cmd: &str,
    levels: &str,
    domain: &str,
    seed: u64,
    set: Option<String>,
    function: &str,
    io: OutArgs,
) -> Result<(), Fail> {
    let action = Action::parse(cmd).ok_or_else(|| {
        Fail::Usage(format!(
            "sweep cannot repeat {cmd:?}; known: gallery, decompose, jordan, smooth, \
             coarea, extend"
        ))
    })?;
    let kind = resolve_domain(domain, seed)?;
    check_planarity(action, kind, "auto")?;
    check_set(set.as_deref())?;
    check_function(function)?;
    let levels = parse_levels(levels)?;
    if io.out.is_none() {
        return Err(Fail::Usage("sweep writes a csv; pass --out".into()));
    }

    let base = Job {
        action,
        kind,
        level: levels[0],
        set: set.clone(),
        function: function.to_string(),
        format: "auto".to_string(),
    };
    let rows = sweep::run_levels(&base, &levels, thread_cap()?)?;

    let mut outcome = Outcome {
        metrics: BTreeMap::new(),
        artifacts: vec![(
            format!("sweep_{}_{}.csv", action.name(), kind.name()),
            sweep::to_csv(&rows).into_bytes(),
        )],
    };
    for (level, metrics) in &rows {
        for (k, v) in metrics {
            outcome.metrics.insert(format!("{k}_L{level}"), *v);
        }
    }

    let mut rep = Report::new("sweep");
    rep.input("cmd", action.name());
    rep.input("domain", domain);
    rep.input("levels", levels.iter().map(u32::to_string).collect::<Vec<_>>().join(","));
    rep.input("seed", seed);
    if let Some(s) = &set {
        rep.input("set", s);
    }
    if matches!(action, Action::Smooth | Action::Coarea) {
        rep.input("function", function);
    }
    finish(rep, outcome, &io)
}

/// Write artifacts, attach metrics, enforce finiteness, print the report.
fn finish(mut rep: Report, outcome: Outcome, io: &OutArgs) -> Result<(), Fail> {
    rep.metrics = outcome.metrics;
    rep.artifacts = write_artifacts(io, outcome.artifacts)?;
    if let Some(dir) = &io.out {
        rep.input("out", dir.display().to_string());
    }
    rep.check_finite().map_err(|m| Fail::Module(perigrid::Error::Contract(m)))?;
    println!("{}", rep.to_json_string());
    Ok(())
}

fn write_artifacts(
    io: &OutArgs,
    files: Vec<(String, Vec<u8>)>,
) -> Result<Vec<String>, Fail> {
    let Some(dir) = &io.out else { return Ok(Vec::new()) };
    std::fs::create_dir_all(dir).map_err(|e| Fail::Module(e.into()))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(&name);
        if path.exists() && !io.force {
            return Err(Fail::Usage(format!(
                "{} already exists; pass --force to replace it",
                path.display()
            )));
        }
        std::fs::write(&path, bytes).map_err(|e| Fail::Module(e.into()))?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

fn resolve_domain(name: &str, seed: u64) -> Result<GalleryKind, Fail> {
    GalleryKind::parse(name, seed).map_err(|e| Fail::Usage(e.to_string()))
}

/// The planar commands need a two-dimensional domain; say so before
/// building one.
fn check_planarity(action: Action, kind: GalleryKind, format: &str) -> Result<(), Fail> {
    if action.needs_planar() && matches!(kind, GalleryKind::FatCantor3d) {
        return Err(Fail::Usage(format!(
            "{} works on planar domains; {} is three-dimensional",
            action.name(),
            kind.name()
        )));
    }
    if matches!(kind, GalleryKind::FatCantor3d) && matches!(format, "pbm" | "png") {
        return Err(Fail::Usage(format!(
            "{format} masks are two-dimensional; use ascii for {}",
            kind.name()
        )));
    }
    Ok(())
}

fn check_set(set: Option<&str>) -> Result<(), Fail> {
    match set {
        Some(s) if !SETS.contains(&s) => Err(Fail::Usage(format!(
            "unknown set {s:?}; known: {}",
            SETS.join(", ")
        ))),
        _ => Ok(()),
    }
}

fn check_function(function: &str) -> Result<(), Fail> {
    if !FUNCTIONS.contains(&function) {
        return Err(Fail::Usage(format!(
            "unknown function {function:?}; known: {}",
            FUNCTIONS.join(", ")
        )));
    }
    Ok(())
}

fn parse_levels(spec: &str) -> Result<Vec<u32>, Fail> {
    let mut levels = Vec::new();
    for part in spec.split(',') {
        let l: u32 = part
            .trim()
            .parse()
            .map_err(|_| Fail::Usage(format!("bad level {part:?} in --levels")))?;
        levels.push(l);
    }
    levels.sort_unstable();
    levels.dedup();
    if levels.is_empty() {
        return Err(Fail::Usage("--levels needs at least one level".into()));
    }
    Ok(levels)
}

/// Parallelism cap for sweep: the GMT_THREADS variable when set, otherwise
/// the machine's available parallelism.
fn thread_cap() -> Result<usize, Fail> {
    match std::env::var("GMT_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| {
                Fail::Usage(format!("GMT_THREADS must be a positive integer, got {v:?}"))
            }),
        Err(_) => {
            Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
        }
    }
}
