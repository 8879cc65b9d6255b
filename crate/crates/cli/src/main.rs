use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use katflow::checks::MonitorReport;
use katflow::io::{read_trace, sha256_hex, trace_events, write_trace, EdgeResult, TraceEvent};
use katflow::rigidity::unmarked_matrix;
use katflow::{
    assemble_rigidity, bootstrap, generators, monitor, numeric_rank, render_svg, solve, tol, Configuration, Disk4,
    EdgeWeights, Error, FlowOptions, ProblemFile, RenderOptions, ShallowMode, SolutionFile, StopReason,
    TriangulatedPolyhedron,
};

mod exit {
    pub const PARSE: u8 = 2;
    pub const VALIDATION: u8 = 3;
    pub const KAT: u8 = 4;
    pub const TETRAHEDRON: u8 = 5;
    pub const ILL_CONDITIONED: u8 = 6;
    pub const MONITOR: u8 = 7;
    pub const NON_CONVERGENT: u8 = 8;
    pub const BOOTSTRAP: u8 = 9;
    pub const IO: u8 = 10;
    pub const CHECK_FAILED: u8 = 11;
}

#[derive(Parser)]
#[command(name = "katflow", version, about = "Circle packings with prescribed overlaps by edge flows")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a problem file (or every problem in a directory with --batch).
    Solve(SolveArgs),
    /// Re-verify a solution file and print a JSON report.
    Check(CheckArgs),
    /// Draw a solution or one stage of a trace as SVG.
    Render(RenderArgs),
    /// Write the tangency packing of a complex as a solution file.
    Bootstrap(BootstrapArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file.
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    problem: Option<PathBuf>,
    /// Solution path; a directory with --batch. Printed to stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Draw the final packing.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Write every accepted flow step as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Override the per-edge target tolerance.
    #[arg(long)]
    tol_target: Option<f64>,
    /// Solve every *.json problem in this directory in parallel.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Write the rigidity matrices of the start and final packings here.
    #[arg(long)]
    dump_matrices: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    solution: PathBuf,
    /// Check residuals against this problem's targets instead of the stored ones.
    #[arg(long)]
    problem: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Solution file or trace file.
    input: PathBuf,
    #[arg(long)]
    svg: PathBuf,
    /// Flow index of a trace to draw (start of that flow); the final packing if absent.
    #[arg(long)]
    stage: Option<usize>,
    /// Canvas size in pixels.
    #[arg(long, default_value_t = 800.0)]
    size: f64,
}

#[derive(Args)]
struct BootstrapArgs {
    /// Problem file whose complex is packed.
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    problem: Option<PathBuf>,
    /// Random triangulation with this many vertices.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failed command: exit code and machine-readable record.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    details: Value,
}

impl Failure {
    fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Failure { code, kind, message: message.into(), details: Value::Null }
    }

    fn record(&self) -> Value {
        json!({ "error": self.kind, "code": self.code, "message": self.message, "details": self.details })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (code, kind, details) = match e {
            Error::Parse(_) => (exit::PARSE, "PARSE_ERROR", Value::Null),
            Error::Io(_) => (exit::IO, "IO_ERROR", Value::Null),
            Error::KatViolation(v) => (exit::KAT, "KAT_VIOLATION", json!({ "violations": v })),
            Error::Tetrahedron => (exit::TETRAHEDRON, "TETRAHEDRON", Value::Null),
            Error::IllConditioned(c) => (exit::ILL_CONDITIONED, "ILL_CONDITIONED", json!({ "cond": c })),
            Error::SingularAtPin => (exit::ILL_CONDITIONED, "ILL_CONDITIONED", Value::Null),
            Error::MonitorViolation(r) => (exit::MONITOR, "MONITOR_VIOLATION", json!({ "report": r })),
            Error::NonConvergent(_) => (exit::NON_CONVERGENT, "NON_CONVERGENT", Value::Null),
            Error::NormalizationFailed => (exit::BOOTSTRAP, "BOOTSTRAP_FAILED", Value::Null),
            Error::Flow(f) => {
                let (code, kind) = match f.reason {
                    StopReason::IllConditioned => (exit::ILL_CONDITIONED, "ILL_CONDITIONED"),
                    StopReason::MonitorViolation => (exit::MONITOR, "MONITOR_VIOLATION"),
                    StopReason::MaxSteps | StopReason::TargetReached => (exit::NON_CONVERGENT, "MAX_STEPS"),
                };
                let details = json!({
                    "stop_reason": f.reason,
                    "detail": f.detail,
                    "free_edge": f.trace.free_edge,
                    "pinned_face": f.trace.pinned_face,
                    "steps": f.trace.records.len(),
                    "last_t": f.trace.records.last().map(|r| r.t),
                    "report": f.report,
                });
                (code, kind, details)
            }
            _ => (exit::VALIDATION, "VALIDATION_ERROR", Value::Null),
        };
        Failure { code, kind, message, details }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(exit::IO, "IO_ERROR", e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(exit::IO, "IO_ERROR", format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::new(exit::IO, "IO_ERROR", format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bootstrap_stage(p: &TriangulatedPolyhedron) -> Result<Configuration, Failure> {
    bootstrap(p).map_err(|e| {
        let mut f = Failure::from(e);
        if f.code != exit::IO {
            f.code = exit::BOOTSTRAP;
            f.kind = "BOOTSTRAP_FAILED";
        }
        f
    })
}

fn dump_matrices(dir: &Path, tag: &str, p: &TriangulatedPolyhedron, cfg: &Configuration) -> CmdResult {
    fs::create_dir_all(dir)?;
    let j = assemble_rigidity(p, cfg);
    write(&dir.join(format!("{tag}_rigidity.txt")), &j.dump())?;
    if p.n() > 4 {
        let f = p.faces()[0];
        let ju = unmarked_matrix(&j, f)?;
        write(&dir.join(format!("{tag}_unmarked_{}_{}_{}.txt", f[0], f[1], f[2])), &ju.dump())?;
    }
    Ok(())
}

struct Solved {
    solution: SolutionFile,
    svg: String,
    trace: Vec<TraceEvent>,
}

fn solve_text(text: &str, tol_target: Option<f64>, dump: Option<&Path>) -> Result<Solved, Failure> {
    let mut prob = ProblemFile::parse(text)?;
    if tol_target.is_some() {
        prob.options.tol_target = tol_target;
    }
    let (p, w) = prob.build()?;
    let opts = prob.flow_options();
    if p.is_tetrahedron() {
        return Err(Error::Tetrahedron.into());
    }
    let kat = katflow::kat_conditions_check(&p, &w);
    if !kat.is_empty() {
        return Err(Error::KatViolation(kat).into());
    }
    let cfg0 = bootstrap_stage(&p)?;
    if let Some(dir) = dump {
        dump_matrices(dir, "start", &p, &cfg0)?;
    }
    let report = solve(&p, &w, &cfg0, &opts)?;
    if let Some(dir) = dump {
        dump_matrices(dir, "final", &p, &report.cfg)?;
    }
    let monitors = monitor(&p, &report.cfg, Some(&w), ShallowMode::Shallow, opts.monitor_tol)?;
    let solution = SolutionFile::from_report(&p, &w, &report, monitors, sha256_hex(text.as_bytes()), &opts);
    let svg = render_svg(Some(&p), &solution.configuration(), &RenderOptions::default());
    let trace = trace_events(p.faces(), &report.traces, Some(&report.cfg));
    Ok(Solved { solution, svg, trace })
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    if let Some(dir) = &a.batch {
        return solve_batch(dir, a.out.as_deref(), a.tol_target);
    }
    let path = a.problem.as_deref().expect("required by clap");
    let text = read(path)?;
    let s = solve_text(&text, a.tol_target, a.dump_matrices.as_deref())?;
    if let Some(t) = &a.trace {
        let mut buf = Vec::new();
        write_trace(&s.trace, &mut buf)?;
        fs::write(t, buf)?;
    }
    if let Some(svg) = &a.svg {
        write(svg, &s.svg)?;
    }
    emit(a.out.as_deref(), &s.solution.to_json())
}

fn solve_batch(dir: &Path, out: Option<&Path>, tol_target: Option<f64>) -> CmdResult {
    let mut inputs: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    inputs.sort();
    let out_dir = out.map(Path::to_path_buf).unwrap_or_else(|| dir.to_path_buf());
    fs::create_dir_all(&out_dir)?;
    let results: Vec<(PathBuf, CmdResult)> = inputs
        .par_iter()
        .map(|path| {
            let r = read(path).and_then(|text| solve_text(&text, tol_target, None)).and_then(|s| {
                let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                write(&out_dir.join(format!("{stem}.solution.json")), &s.solution.to_json())
            });
            (path.clone(), r)
        })
        .collect();
    let mut first_failure = None;
    for (path, r) in results {
        let line = match &r {
            Ok(()) => json!({ "input": path, "ok": true }),
            Err(f) => json!({ "input": path, "ok": false, "failure": f.record() }),
        };
        println!("{line}");
        if let Err(f) = r {
            first_failure.get_or_insert(f);
        }
    }
    first_failure.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct PinReport {
    face: [usize; 3],
    cond: f64,
}

#[derive(Serialize)]
struct CheckReport {
    passed: bool,
    failures: Vec<String>,
    monitors: MonitorReport,
    edges: Vec<EdgeResult>,
    max_residual: f64,
    residual_tol: f64,
    max_norm_error: f64,
    rank: usize,
    expected_rank: usize,
    pins: Vec<PinReport>,
}

fn cmd_check(a: CheckArgs) -> CmdResult {
    let sol = SolutionFile::parse(&read(&a.solution)?)?;
    let p = TriangulatedPolyhedron::build(&sol.faces)?;
    if sol.disks.len() != p.n() {
        return Err(Failure::new(exit::VALIDATION, "VALIDATION_ERROR", "disk count does not match the complex"));
    }
    let cfg = sol.configuration();
    let mut failures = Vec::new();

    let weights = match &a.problem {
        Some(path) => {
            let (q, w) = ProblemFile::parse(&read(path)?)?.build()?;
            if q != p {
                failures.push("problem and solution describe different complexes".to_string());
                None
            } else {
                Some(w)
            }
        }
        None => {
            let stored: Vec<f64> = p
                .edges()
                .iter()
                .map(|&(i, j)| sol.edges.iter().find(|e| (e.i, e.j) == (i, j)).map_or(f64::NAN, |e| e.target))
                .collect();
            EdgeWeights::from_vec(&p, stored).ok()
        }
    };
    let weights = weights.unwrap_or_else(|| EdgeWeights::uniform(&p, 1.0));

    let max_norm_error = cfg.max_norm_error();
    if max_norm_error > tol::NORM * 10.0 {
        failures.push(format!("disks are not normalized (max |<D,D> + 1| = {max_norm_error:e})"));
    }
    let edges = SolutionFile::edge_results(&p, &weights, &cfg);
    let max_residual = edges.iter().map(|e| e.residual).fold(0.0, f64::max);
    // Relaxed solves stop at the limit tolerance.
    let residual_tol = if sol.levels.is_empty() { 1e-8 } else { tol::LIMIT };
    for e in edges.iter().filter(|e| !(e.residual <= residual_tol)) {
        failures.push(format!("edge ({}, {}) at {} misses its target {}", e.i, e.j, e.achieved, e.target));
    }
    let monitors = monitor(&p, &cfg, Some(&weights), ShallowMode::Shallow, 1e-8)?;
    if !monitors.passed() {
        failures.push("geometric monitors failed".to_string());
    }
    let j = assemble_rigidity(&p, &cfg);
    let rank = numeric_rank(&j.mat, tol::RANK);
    let expected_rank = 4 * p.n() - 6;
    if rank != expected_rank {
        failures.push(format!("rigidity matrix has rank {rank}, expected {expected_rank}"));
    }
    let mut pins = Vec::new();
    if p.n() > 4 {
        for &f in p.faces() {
            pins.push(PinReport { face: f, cond: unmarked_matrix(&j, f)?.condition_number() });
        }
    }
    let report = CheckReport {
        passed: failures.is_empty(),
        failures,
        monitors,
        edges,
        max_residual,
        residual_tol,
        max_norm_error,
        rank,
        expected_rank,
        pins,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    if report.passed {
        Ok(())
    } else {
        Err(Failure::new(exit::CHECK_FAILED, "CHECK_FAILED", report.failures.join("; ")))
    }
}

fn disks(v: &[[f64; 4]]) -> Configuration {
    Configuration::new(v.iter().map(|&d| Disk4::from_array(d)).collect())
}

fn cmd_render(a: RenderArgs) -> CmdResult {
    let text = read(&a.input)?;
    let mut opts = RenderOptions { size: a.size, ..Default::default() };
    let (faces, cfg) = if let Ok(sol) = SolutionFile::parse(&text) {
        if a.stage.is_some() {
            return Err(Failure::new(exit::VALIDATION, "VALIDATION_ERROR", "--stage needs a trace file"));
        }
        let cfg = sol.configuration();
        (sol.faces, cfg)
    } else {
        let events = read_trace(&text)?;
        let faces = events
            .iter()
            .find_map(|e| match e {
                TraceEvent::Complex { faces } => Some(faces.clone()),
                _ => None,
            })
            .ok_or_else(|| Failure::new(exit::PARSE, "PARSE_ERROR", "trace has no complex record"))?;
        let cfg = match a.stage {
            Some(k) => {
                let stage = events.iter().find_map(|e| match e {
                    TraceEvent::Stage { flow, disks: d, pinned_face, free_edge, velocity, .. } if *flow == k => {
                        Some((disks(d), *pinned_face, *free_edge, disks(velocity)))
                    }
                    _ => None,
                });
                let (cfg, face, edge, vel) = stage.ok_or_else(|| {
                    Failure::new(exit::VALIDATION, "VALIDATION_ERROR", format!("trace has no stage {k}"))
                })?;
                opts.pinned_face = Some(face);
                opts.free_edge = Some(edge);
                opts.velocities = Some(vel.disks);
                cfg
            }
            None => events
                .iter()
                .rev()
                .find_map(|e| match e {
                    TraceEvent::Final { disks: d } => Some(disks(d)),
                    _ => None,
                })
                .ok_or_else(|| Failure::new(exit::PARSE, "PARSE_ERROR", "trace has no final configuration"))?,
        };
        (faces, cfg)
    };
    let p = TriangulatedPolyhedron::build(&faces)?;
    write(&a.svg, &render_svg(Some(&p), &cfg, &opts))
}

fn cmd_bootstrap(a: BootstrapArgs) -> CmdResult {
    let (p, hash) = match (&a.problem, a.random) {
        (Some(path), _) => {
            let text = read(path)?;
            let (p, _) = ProblemFile::parse(&text)?.build()?;
            (p, sha256_hex(text.as_bytes()))
        }
        (None, Some(n)) => {
            if n < 4 {
                return Err(Failure::new(
                    exit::VALIDATION,
                    "VALIDATION_ERROR",
                    "a triangulated sphere needs 4 vertices",
                ));
            }
            let p = generators::random_triangulation(n, a.seed);
            (p, sha256_hex(format!("random:{n}:{}", a.seed).as_bytes()))
        }
        (None, None) => unreachable!("required by clap"),
    };
    let cfg = bootstrap_stage(&p)?;
    let w = EdgeWeights::uniform(&p, 1.0);
    let opts = FlowOptions::default();
    let report = katflow::SolveReport {
        residuals: vec![],
        max_residual: 0.0,
        flows: 0,
        total_steps: 0,
        wall_time_s: 0.0,
        min_radius_floor: katflow::checks::min_radius(&cfg)?,
        traces: vec![],
        levels: vec![],
        cfg,
    };
    let monitors = monitor(&p, &report.cfg, Some(&w), ShallowMode::Strict, opts.monitor_tol)?;
    let sol = SolutionFile::from_report(&p, &w, &report, monitors, hash, &opts);
    emit(a.out.as_deref(), &sol.to_json())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Render(a) => cmd_render(a),
        Cmd::Bootstrap(a) => cmd_bootstrap(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(f.code)
        }
    }
}
