//! `havoid`: run, tune and check obstacle-avoidance scenarios.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid scenario or parameters,
//! 3 property violation, 4 solver failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hybrid_avoidance::geometry::Vector;
use hybrid_avoidance::parallel::Execution;
use hybrid_avoidance::properties::run_all;
use hybrid_avoidance::scenario::{
    import_trajectory, load_scenario, run_scenario, summarize, write_run, write_samples_csv, Scenario,
};
use hybrid_avoidance::tuning::validate_params;
use hybrid_avoidance::Error;
use serde::Serialize;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_PROPERTY: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "havoid", version, about = "Hybrid obstacle-avoidance controller toolkit")]
struct Cli {
    /// Integration step, overriding the scenario.
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Final time, overriding the scenario.
    #[arg(long = "t-max", global = true)]
    t_max: Option<f64>,
    /// Seed for random jump selection and sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate every initial condition and write trajectories and a summary.
    Run {
        scenario: PathBuf,
        /// Output directory (default: out/<scenario name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tune the parameters and print the tuning report.
    Tune { scenario: PathBuf },
    /// Run the sampled property suites against the tuned scenario.
    Check {
        scenario: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Convert a trajectory CSV.
    Export {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        to: Format,
        /// Output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonProgress(_)
        | Error::EmptyJump(_)
        | Error::NoBracket
        | Error::DegenerateCenter(_)
        | Error::SolverFailure(_) => EXIT_SOLVER,
        _ => EXIT_VALIDATION,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e))
}

fn load(cli: &Cli, path: &Path) -> Result<Scenario, Error> {
    let mut sc = load_scenario(path)?;
    if let Some(h) = cli.step {
        sc.solver.step = h;
    }
    if let Some(t) = cli.t_max {
        sc.solver.t_max = t;
    }
    if let Some(s) = cli.seed {
        sc.set_seed(s);
    }
    sc.solver.validate()?;
    Ok(sc)
}

fn cmd_run(cli: &Cli, path: &Path, out: Option<&Path>) -> Result<u8, Error> {
    let sc = load(cli, path)?;
    let run = run_scenario(&sc, Execution::default());
    let summary = summarize(&sc, &run);
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| Path::new("out").join(&sc.name));
    write_run(&sc, &run, &summary, &dir)?;
    for r in &summary.runs {
        match &r.error {
            None => println!(
                "{} {}: jumps {}, final |x| {:.3e}, min clearance {:.9}, max |u| {:.6}",
                if r.passed { "PASS" } else { "FAIL" },
                r.file,
                r.jump_count,
                r.final_norm.unwrap_or(f64::NAN),
                r.min_clearance.unwrap_or(f64::NAN),
                r.max_control.unwrap_or(f64::NAN),
            ),
            Some(e) => println!("ERROR run {}: {e}", r.index),
        }
    }
    println!("wrote {}", dir.join("summary.txt").display());
    let code = if run.trajectories.iter().any(|t| t.is_err()) {
        run.trajectories
            .iter()
            .filter_map(|t| t.as_ref().err())
            .map(exit_code)
            .max()
            .unwrap_or(EXIT_SOLVER)
    } else if summary.passed {
        0
    } else {
        EXIT_PROPERTY
    };
    Ok(code)
}

fn cmd_tune(cli: &Cli, path: &Path) -> Result<u8, Error> {
    let sc = load(cli, path)?;
    let report = &sc.tuned.report;
    println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
    Ok(if report.violations.is_empty() { 0 } else { EXIT_VALIDATION })
}

fn cmd_check(cli: &Cli, path: &Path, samples: usize) -> Result<u8, Error> {
    let sc = load(cli, path)?;
    let w = sc.workspace();
    let violations = validate_params(w, true);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        return Ok(EXIT_VALIDATION);
    }
    let seed = cli.seed.unwrap_or(sc.seed);
    let mut ok = true;
    for s in run_all(w, &sc.gains, samples, seed, Execution::default()) {
        ok &= s.passed();
        println!(
            "{} {}: {} checks, {} violations, max residual {:.3e}",
            if s.passed() { "PASS" } else { "FAIL" },
            s.name,
            s.checked,
            s.violations,
            s.max_residual
        );
        if let Some(f) = &s.first_violation {
            println!("    first violation: {f}");
        }
    }
    Ok(if ok { 0 } else { EXIT_PROPERTY })
}

#[derive(Serialize)]
struct Row<'a> {
    t: f64,
    j: usize,
    i: usize,
    m: i8,
    x: &'a [f64],
}

fn cmd_export(input: &Path, to: Format, out: Option<&Path>) -> Result<u8, Error> {
    let samples = import_trajectory(input)?;
    let mut buf = Vec::new();
    match to {
        Format::Json => {
            let rows: Vec<Row> = samples
                .iter()
                .map(|s| Row {
                    t: s.t,
                    j: s.j,
                    i: s.i + 1,
                    m: s.m.value(),
                    x: s.x.as_slice(),
                })
                .collect();
            serde_json::to_writer_pretty(&mut buf, &rows).map_err(|e| Error::Io(e.into()))?;
            buf.push(b'\n');
        }
        Format::Csv => {
            let n = samples[0].x.len();
            write_samples_csv(&samples, &Vector::zeros(n), &mut buf)?;
        }
    }
    match out {
        Some(p) => fs::write(p, buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run { scenario, out } => cmd_run(&cli, scenario, out.as_deref()),
        Command::Tune { scenario } => cmd_tune(&cli, scenario),
        Command::Check { scenario, samples } => cmd_check(&cli, scenario, *samples),
        Command::Export { input, to, out } => cmd_export(input, *to, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}
