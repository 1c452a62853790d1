//! Command-line front end. Exit codes: 0 success, 1 failed check or
//! simulation, 2 usage, input or parse error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use super::{
    bundled, check_suite, lift_model, lift_report, model_summary, parse_model, ports_report,
    ModelDoc, ModelError, Suite, REPORT_SCHEMA,
};
use crate::grid::{BoundaryKind, Grid};
use crate::numerics::{
    discretize, integrate, prolong_state, Closure, IntegrateOptions, Trajectory,
};
use crate::system::PhsSystem;

#[derive(Parser, Debug)]
#[command(
    name = "jetphs",
    version,
    about = "Jet-space lifts and simulation of port-Hamiltonian PDE models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lift a model to derivative-free form; prints JSON, writes the lifted model with --out.
    Lift {
        model: String,
        /// Also lift the dissipation operator and build the composite operator.
        #[arg(long)]
        dissipative: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a check suite; exit 0 iff every check passes.
    Check { model: String, suite: Suite },
    /// Boundary port matrices Q and W of the original and lifted operators.
    Ports { model: String },
    /// Method-of-lines simulation; writes a trajectory CSV and a balance summary.
    Simulate(SimulateArgs),
    /// Full JSON certificate: model, lift, ports and every check suite.
    Report { model: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Bc {
    Periodic,
    Bounded,
    ZeroTrace,
}

#[derive(clap::Args, Debug)]
struct SimulateArgs {
    model: String,
    #[arg(long, default_value_t = 201)]
    nx: usize,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    #[arg(long, default_value_t = 0.1)]
    t_end: f64,
    #[arg(long, value_enum, default_value_t = Bc::Periodic)]
    bc: Bc,
    /// Simulate the lifted system, started from the prolonged initial data.
    #[arg(long)]
    lifted: bool,
    #[arg(long, default_value_t = 2)]
    stencil: usize,
    /// Amplitude of the default initial data.
    #[arg(long, default_value_t = 0.5)]
    amplitude: f64,
    #[arg(long, default_value_t = 100)]
    record_every: usize,
    /// Skip the RK4 stability check.
    #[arg(long)]
    no_cfl_check: bool,
    /// Trajectory CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON path; printed to stdout when the CSV goes to --out.
    #[arg(long)]
    report: Option<PathBuf>,
}

struct Failure {
    code: i32,
    diagnostic: Value,
}

fn failure(code: i32, kind: &str, message: impl Into<String>) -> Failure {
    Failure {
        code,
        diagnostic: json!({ "kind": kind, "message": message.into() }),
    }
}

fn parse_failure(source: &str, e: ModelError) -> Failure {
    let mut diagnostic = serde_json::to_value(&e).expect("serializable");
    diagnostic["source"] = json!(source);
    diagnostic["message"] = json!(e.to_string());
    Failure {
        code: 2,
        diagnostic,
    }
}

fn load(model: &str) -> Result<(ModelDoc, PhsSystem), Failure> {
    let text = if Path::new(model).exists() {
        std::fs::read_to_string(model).map_err(|e| failure(2, "io", format!("{model}: {e}")))?
    } else if let Some(src) = bundled(model) {
        src.to_string()
    } else {
        return Err(failure(
            2,
            "io",
            format!("{model}: no such file or bundled model"),
        ));
    };
    let doc = parse_model(&text).map_err(|e| parse_failure(model, e))?;
    let system = doc.build().map_err(|e| failure(2, "semantic", e.message))?;
    Ok((doc, system))
}

fn write_json(out: &mut dyn Write, v: &Value) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).expect("serializable");
    writeln!(out, "{s}").map_err(|e| failure(2, "io", e.to_string()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| failure(2, "io", format!("{}: {e}", path.display())))
}

fn lift(
    model: &str,
    dissipative: bool,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let (doc, system) = load(model)?;
    if dissipative && system.dissipation().is_none() {
        return Err(failure(
            2,
            "usage",
            format!("{} has no dissipation section", doc.name),
        ));
    }
    let (report, lifted) =
        lift_report(&doc, &system, dissipative).map_err(|e| failure(1, "lift", e.to_string()))?;
    if let Some(path) = path {
        write_file(path, super::print_model(&lifted).as_bytes())?;
    }
    write_json(out, &report)?;
    Ok(0)
}

fn check(model: &str, suite: Suite, out: &mut dyn Write) -> Result<i32, Failure> {
    let (doc, system) = load(model)?;
    let r = check_suite(&doc, &system, suite);
    let mut v = serde_json::to_value(&r).expect("serializable");
    v["schema"] = json!("jetphs.check/1");
    v["model"] = json!(doc.name);
    write_json(out, &v)?;
    Ok(if r.passed { 0 } else { 1 })
}

fn report(model: &str, out: &mut dyn Write) -> Result<i32, Failure> {
    let (doc, system) = load(model)?;
    let checks = std::thread::scope(|s| {
        let handles: Vec<_> = Suite::ALL
            .iter()
            .map(|&suite| {
                let (doc, system) = (&doc, &system);
                s.spawn(move || check_suite(doc, system, suite))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("check suite panicked"))
            .collect::<Vec<_>>()
    });
    let passed = checks.iter().all(|c| c.passed);
    let lift = lift_report(&doc, &system, system.dissipation().is_some())
        .map(|(v, _)| v)
        .map_err(|e| failure(1, "lift", e.to_string()))?;
    let ports = ports_report(&doc, &system).map_err(|e| failure(1, "ports", e))?;
    let v = json!({
        "schema": REPORT_SCHEMA,
        "model": model_summary(&doc, &system),
        "lift": lift,
        "ports": ports,
        "checks": checks,
        "passed": passed,
    });
    write_json(out, &v)?;
    Ok(if passed { 0 } else { 1 })
}

/// Default initial data: one smooth periodic profile per state.
fn initial_value(state: usize, z: f64, a: f64, b: f64, amplitude: f64) -> f64 {
    let s = std::f64::consts::TAU * (z - a) / (b - a);
    amplitude * ((s + state as f64).sin() + 0.25 * (2.0 * s).cos())
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (doc, system) = load(&args.model)?;
    let (a, b) = doc.domain_f64();
    let kind = if args.bc == Bc::Periodic {
        BoundaryKind::Periodic
    } else {
        BoundaryKind::Bounded
    };
    let numerics = |e: crate::numerics::NumericsError| failure(1, "numerics", e.to_string());
    let grid = Grid::new(a, b, args.nx, kind).map_err(|e| failure(2, "usage", e.to_string()))?;
    let original = discretize(&system, &grid, args.stencil).map_err(numerics)?;
    let x0 = original.sample(|i, z| initial_value(i, z, a, b, args.amplitude));

    let (sd, x0, names) = if args.lifted {
        let l = lift_model(&doc, &system, system.dissipation().is_some())
            .map_err(|e| failure(1, "lift", e.to_string()))?;
        let lifted_system = match &l.dissipative {
            Some(dl) => dl.to_system(),
            None => l.lifted.to_system(),
        };
        let sd = discretize(&lifted_system, &grid, args.stencil).map_err(numerics)?;
        let xl = prolong_state(original.derivative(), &x0, &l.spec);
        (sd, xl, l.doc.states)
    } else {
        (original, x0, doc.states.clone())
    };
    let closure = if args.bc == Bc::ZeroTrace {
        Closure::ZeroTrace
    } else {
        Closure::Free
    };
    let sd = sd.with_closure(closure).map_err(numerics)?;
    let opts = IntegrateOptions::new(args.dt, args.t_end)
        .record_every(args.record_every.max(1))
        .check_cfl(!args.no_cfl_check);
    let traj = integrate(&sd, &x0, &opts).map_err(numerics)?;

    let mut csv = Vec::new();
    traj.write_csv(&mut csv, &names)
        .map_err(|e| failure(2, "io", e.to_string()))?;
    let summary = summary_json(&doc.name, args, &traj);
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            match &args.report {
                Some(r) => write_file(
                    r,
                    serde_json::to_string_pretty(&summary)
                        .expect("json")
                        .as_bytes(),
                )?,
                None => write_json(out, &summary)?,
            }
        }
        None => {
            out.write_all(&csv)
                .map_err(|e| failure(2, "io", e.to_string()))?;
            if let Some(r) = &args.report {
                write_file(
                    r,
                    serde_json::to_string_pretty(&summary)
                        .expect("json")
                        .as_bytes(),
                )?;
            }
        }
    }
    Ok(0)
}

fn summary_json(name: &str, args: &SimulateArgs, traj: &Trajectory) -> Value {
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let min_phi_f = traj.min_phi_f.iter().copied().fold(f64::INFINITY, f64::min);
    json!({
        "schema": "jetphs.simulate/1",
        "model": name,
        "lifted": args.lifted,
        "bc": args.bc.to_possible_value().map(|v| v.get_name().to_string()),
        "nx": args.nx,
        "dt": args.dt,
        "t_end": args.t_end,
        "steps": traj.times.len().saturating_sub(1),
        "spectral_radius": traj.spectral_radius,
        "hamiltonian_initial": traj.hamiltonian.first(),
        "hamiltonian_final": traj.hamiltonian.last(),
        "relative_energy_drift": traj.relative_energy_drift(),
        "max_hamiltonian_increase": traj.max_hamiltonian_increase(),
        "max_abs_defect": max_abs(&traj.defect),
        "min_phi_f": if min_phi_f.is_finite() { Some(min_phi_f) } else { None },
    })
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let diag = json!({ "kind": "usage", "message": e.to_string().trim_end() });
            let _ = writeln!(err, "{diag}");
            return 2;
        }
    };
    let result = match &cli.command {
        Command::Lift {
            model,
            dissipative,
            out: path,
        } => lift(model, *dissipative, path.as_deref(), out),
        Command::Check { model, suite } => check(model, *suite, out),
        Command::Ports { model } => load(model).and_then(|(doc, system)| {
            let v = ports_report(&doc, &system).map_err(|e| failure(1, "ports", e))?;
            write_json(out, &v).map(|_| 0)
        }),
        Command::Simulate(args) => simulate(args, out),
        Command::Report { model } => report(model, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "{}", f.diagnostic);
            f.code
        }
    }
}
