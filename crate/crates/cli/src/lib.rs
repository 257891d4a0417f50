//! Command-line front end: certificate checks, equilibria, simulation,
//! envelope verification and interval sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fpds_core::{
    builtin_scenario, certificate, envelope_check, find_weights, integrate, load_spec,
    picard_solve, Certificate, Error, PicardOptions, Realization, ScenarioName, Selector,
    StateVector, ValidatedSystem, Weights,
};
use rayon::prelude::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INPUT: i32 = 66;
pub const EXIT_NUMERIC: i32 = 70;

#[derive(Debug, Parser)]
#[command(
    name = "fpds",
    version,
    about = "Fractional interval projection networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the stability certificate.
    Certify(CertifyArgs),
    /// Solve for the equilibrium of one realization.
    Equilibrium(EquilibriumArgs),
    /// Integrate the dynamics and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Check a trajectory against the Mittag-Leffler envelope.
    Envelope(EnvelopeArgs),
    /// Run the envelope check over many realizations.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SelectorArg {
    Lower,
    Upper,
    Midpoint,
    Random,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Built-in scenario name or path to a JSON spec file.
    scenario: String,
    /// Norm weights, comma separated (mu then tau).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct RealizationArgs {
    #[arg(long, value_enum, default_value = "lower")]
    selector: SelectorArg,
    #[arg(long, env = "FPDS_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

#[derive(Debug, Args)]
struct TimeArgs {
    #[arg(long, default_value_t = 20.0)]
    t_end: f64,
    #[arg(long, default_value_t = 4000)]
    steps: usize,
    /// Initial state, comma separated (x then y). Defaults to the scenario's.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    init: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
}

#[derive(Debug, Args)]
struct EquilibriumArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    real: RealizationArgs,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    real: RealizationArgs,
    #[command(flatten)]
    time: TimeArgs,
    /// Write the CSV here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnvelopeArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    real: RealizationArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    time: TimeArgs,
    #[arg(long, default_value_t = 0.05)]
    slack: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, env = "FPDS_SEED", default_value_t = 0)]
    seed: u64,
    /// Number of realizations; the first two are the lower and upper vertices.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    time: TimeArgs,
    #[arg(long, default_value_t = 0.05)]
    slack: f64,
}

/// An error together with the process exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    error: anyhow::Error,
}

type Outcome<T> = std::result::Result<T, Failure>;

fn fail(code: i32, error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        error: error.into(),
    }
}

fn usage(msg: String) -> Failure {
    fail(EXIT_USAGE, anyhow!(msg))
}

fn core_failure(e: Error) -> Failure {
    let code = match &e {
        Error::CertificateFailed { .. } => EXIT_FAIL,
        Error::Unconverged(_) | Error::NonFinite { .. } | Error::Unsupported(_) => EXIT_NUMERIC,
        _ => EXIT_INPUT,
    };
    fail(code, e)
}

/// Formats a report number to 12 significant digits in shortest form.
fn num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn list<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    let parts: Vec<String> = values.into_iter().map(|v| num(*v)).collect();
    format!("[{}]", parts.join(", "))
}

fn exact_list<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    let parts: Vec<String> = values.into_iter().map(|v| format!("{v:.16e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn load(arg: &str) -> Outcome<ValidatedSystem> {
    if let Ok(name) = arg.parse::<ScenarioName>() {
        return builtin_scenario(name).map_err(core_failure);
    }
    let path = PathBuf::from(arg);
    if !path.exists() {
        return Err(fail(EXIT_INPUT, Error::UnknownScenario(arg.to_string())));
    }
    let bytes = fs::read(&path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(|e| fail(EXIT_INPUT, e))?;
    load_spec(&bytes)
        .with_context(|| format!("loading {}", path.display()))
        .map_err(|e| fail(EXIT_INPUT, e))
}

fn selector(args: &RealizationArgs) -> Selector {
    match args.selector {
        SelectorArg::Lower => Selector::Lower,
        SelectorArg::Upper => Selector::Upper,
        SelectorArg::Midpoint => Selector::Midpoint,
        SelectorArg::Random => Selector::Random(args.seed),
    }
}

fn selector_label(sel: Selector) -> String {
    match sel {
        Selector::Lower => "lower".into(),
        Selector::Upper => "upper".into(),
        Selector::Midpoint => "midpoint".into(),
        Selector::Random(seed) => format!("random(seed={seed})"),
    }
}

/// Weights from the command line, then from the scenario, then from the search.
fn weights(sys: &ValidatedSystem, given: &Option<Vec<f64>>) -> Outcome<(Weights, &'static str)> {
    if let Some(values) = given {
        if values.len() != sys.dim() {
            return Err(usage(format!(
                "--weights needs {} values, got {}",
                sys.dim(),
                values.len()
            )));
        }
        let w = Weights::from_flat(values, sys.n).map_err(|e| usage(e.to_string()))?;
        return Ok((w, "given"));
    }
    if let Some(w) = &sys.weights {
        return Ok((w.clone(), "scenario"));
    }
    match find_weights(sys) {
        Some(w) => Ok((w, "search")),
        None => Ok((Weights::unit(sys.n, sys.m), "unit")),
    }
}

fn initial_state(sys: &ValidatedSystem, init: &Option<Vec<f64>>) -> Outcome<StateVector> {
    match init {
        Some(values) if values.len() != sys.dim() => Err(usage(format!(
            "--init needs {} values, got {}",
            sys.dim(),
            values.len()
        ))),
        Some(values) => Ok(StateVector::from_flat(values, sys.n)),
        None => Ok(sys.initial.clone().unwrap_or_else(|| sys.box_midpoint())),
    }
}

fn check_time(t: &TimeArgs) -> Outcome<()> {
    if !(t.t_end > 0.0 && t.t_end.is_finite()) {
        return Err(usage(format!("--t-end must be positive, got {}", t.t_end)));
    }
    if t.steps == 0 {
        return Err(usage("--steps must be at least 1".into()));
    }
    Ok(())
}

fn check_solve(s: &SolveArgs) -> Outcome<()> {
    if !(s.tol > 0.0) {
        return Err(usage(format!("--tol must be positive, got {}", s.tol)));
    }
    Ok(())
}

fn write_certificate(out: &mut String, c: &Certificate, source: &str) {
    let w = &c.weights;
    let _ = writeln!(
        out,
        "weights = {} ({source})",
        list(w.mu.iter().chain(w.tau.iter()))
    );
    let _ = writeln!(out, "a2_margins = {}", list(c.a2_margins.iter()));
    let _ = writeln!(out, "a3_margins = {}", list(c.a3_margins.iter()));
    let _ = writeln!(out, "xi = {}", list(c.xi.iter()));
    let _ = writeln!(out, "zeta = {}", list(c.zeta.iter()));
    let _ = writeln!(out, "kappa = {}", num(c.kappa));
    let _ = writeln!(out, "theta = {}", num(c.theta));
    let _ = writeln!(out, "min_slack = {}", num(c.min_slack));
    if c.gains_warning {
        let _ = writeln!(
            out,
            "warning = non-unit gains are not covered by the certificate"
        );
    }
    let _ = writeln!(out, "pass = {}", c.pass);
}

fn cmd_certify(args: &CertifyArgs, out: &mut String) -> Outcome<i32> {
    let sys = load(&args.scenario.scenario)?;
    let (w, source) = weights(&sys, &args.scenario.weights)?;
    let c = certificate(&sys, &w).map_err(core_failure)?;
    let _ = writeln!(out, "scenario = {}", args.scenario.scenario);
    write_certificate(out, &c, source);
    Ok(if c.pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_equilibrium(args: &EquilibriumArgs, out: &mut String) -> Outcome<i32> {
    check_solve(&args.solve)?;
    let sys = load(&args.scenario.scenario)?;
    let (w, source) = weights(&sys, &args.scenario.weights)?;
    let sel = selector(&args.real);
    let real = Realization::select(&sys, sel);
    let opts = PicardOptions {
        tol: args.solve.tol,
        max_iter: args.solve.max_iter,
        initial: None,
    };
    let eq = picard_solve(&sys, &real, &w, &opts).map_err(core_failure)?;
    let _ = writeln!(out, "scenario = {}", args.scenario.scenario);
    let _ = writeln!(out, "selector = {}", selector_label(sel));
    let _ = writeln!(out, "weights = {} ({source})", list(w.to_flat().iter()));
    let _ = writeln!(out, "x = {}", exact_list(eq.point.x.iter()));
    let _ = writeln!(out, "y = {}", exact_list(eq.point.y.iter()));
    let _ = writeln!(out, "residual = {:e}", eq.residual);
    let _ = writeln!(out, "iterations = {}", eq.iterations);
    let _ = writeln!(out, "kappa = {}", num(eq.kappa));
    let _ = writeln!(out, "a_priori_bound = {:e}", eq.a_priori_bound);
    Ok(EXIT_OK)
}

/// Renders a trajectory as CSV: `t,x1..xn,y1..ym`, 17 significant digits.
pub fn trajectory_csv(traj: &fpds_core::Trajectory) -> String {
    let first = &traj.states[0];
    let mut header = vec!["t".to_string()];
    header.extend((1..=first.x.len()).map(|i| format!("x{i}")));
    header.extend((1..=first.y.len()).map(|j| format!("y{j}")));
    let mut csv = header.join(",");
    csv.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let _ = write!(csv, "{t:.16e}");
        for v in s.x.iter().chain(s.y.iter()) {
            let _ = write!(csv, ",{v:.16e}");
        }
        csv.push('\n');
    }
    csv
}

fn cmd_simulate(args: &SimulateArgs, out: &mut String) -> Outcome<i32> {
    check_time(&args.time)?;
    let sys = load(&args.scenario.scenario)?;
    let z0 = initial_state(&sys, &args.time.init)?;
    let real = Realization::select(&sys, selector(&args.real));
    let traj =
        integrate(&sys, &real, &z0, args.time.t_end, args.time.steps).map_err(core_failure)?;
    let csv = trajectory_csv(&traj);
    match &args.output {
        Some(path) => fs::write(path, csv)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(|e| fail(EXIT_INPUT, e))?,
        None => out.push_str(&csv),
    }
    Ok(EXIT_OK)
}

struct EnvelopeRun {
    max_ratio: f64,
    violations: usize,
    v0: f64,
    v_end: f64,
    residual: f64,
    pass: bool,
}

#[allow(clippy::too_many_arguments)]
fn run_envelope(
    sys: &ValidatedSystem,
    sel: Selector,
    w: &Weights,
    theta: f64,
    z0: &StateVector,
    solve: &SolveArgs,
    time: &TimeArgs,
    slack: f64,
) -> fpds_core::Result<EnvelopeRun> {
    let real = Realization::select(sys, sel);
    let opts = PicardOptions {
        tol: solve.tol,
        max_iter: solve.max_iter,
        initial: None,
    };
    let eq = picard_solve(sys, &real, w, &opts)?;
    let traj = integrate(sys, &real, z0, time.t_end, time.steps)?;
    let rep = envelope_check(&traj, &eq, w, theta, slack)?;
    Ok(EnvelopeRun {
        max_ratio: rep.max_ratio,
        violations: rep.violations,
        v0: rep.v0,
        v_end: rep.v_end,
        residual: eq.residual,
        pass: rep.pass,
    })
}

fn passing_certificate(
    sys: &ValidatedSystem,
    w: &Weights,
    source: &str,
    out: &mut String,
) -> Outcome<Option<Certificate>> {
    let c = certificate(sys, w).map_err(core_failure)?;
    if c.pass {
        return Ok(Some(c));
    }
    write_certificate(out, &c, source);
    Ok(None)
}

fn cmd_envelope(args: &EnvelopeArgs, out: &mut String) -> Outcome<i32> {
    check_time(&args.time)?;
    check_solve(&args.solve)?;
    if !(args.slack >= 0.0) {
        return Err(usage(format!(
            "--slack must be nonnegative, got {}",
            args.slack
        )));
    }
    let sys = load(&args.scenario.scenario)?;
    let (w, source) = weights(&sys, &args.scenario.weights)?;
    let z0 = initial_state(&sys, &args.time.init)?;
    let _ = writeln!(out, "scenario = {}", args.scenario.scenario);
    let Some(cert) = passing_certificate(&sys, &w, source, out)? else {
        return Ok(EXIT_FAIL);
    };
    let sel = selector(&args.real);
    let run = run_envelope(
        &sys,
        sel,
        &w,
        cert.theta,
        &z0,
        &args.solve,
        &args.time,
        args.slack,
    )
    .map_err(core_failure)?;
    let _ = writeln!(out, "selector = {}", selector_label(sel));
    let _ = writeln!(out, "weights = {} ({source})", list(w.to_flat().iter()));
    let _ = writeln!(out, "theta = {}", num(cert.theta));
    let _ = writeln!(out, "residual = {:e}", run.residual);
    let _ = writeln!(out, "v0 = {}", num(run.v0));
    let _ = writeln!(out, "v_end = {}", num(run.v_end));
    let _ = writeln!(out, "max_ratio = {}", num(run.max_ratio));
    let _ = writeln!(out, "violations = {}", run.violations);
    let _ = writeln!(out, "pass = {}", run.pass);
    Ok(if run.pass { EXIT_OK } else { EXIT_FAIL })
}

/// Realization of sweep sample `k`: the two vertices, then seeded draws.
pub fn sweep_selector(seed: u64, k: usize) -> Selector {
    match k {
        0 => Selector::Lower,
        1 => Selector::Upper,
        _ => Selector::Random(seed.wrapping_add(k as u64 - 2)),
    }
}

fn cmd_sweep(args: &SweepArgs, out: &mut String) -> Outcome<i32> {
    check_time(&args.time)?;
    check_solve(&args.solve)?;
    if args.samples < 2 {
        return Err(usage(format!(
            "--samples must be at least 2, got {}",
            args.samples
        )));
    }
    if !(args.slack >= 0.0) {
        return Err(usage(format!(
            "--slack must be nonnegative, got {}",
            args.slack
        )));
    }
    let sys = load(&args.scenario.scenario)?;
    let (w, source) = weights(&sys, &args.scenario.weights)?;
    let z0 = initial_state(&sys, &args.time.init)?;
    let _ = writeln!(out, "scenario = {}", args.scenario.scenario);
    let Some(cert) = passing_certificate(&sys, &w, source, out)? else {
        return Ok(EXIT_FAIL);
    };
    let _ = writeln!(out, "weights = {} ({source})", list(w.to_flat().iter()));
    let _ = writeln!(out, "kappa = {}", num(cert.kappa));
    let _ = writeln!(out, "theta = {}", num(cert.theta));

    let runs: Vec<_> = (0..args.samples)
        .into_par_iter()
        .map(|k| {
            let sel = sweep_selector(args.seed, k);
            (
                sel,
                run_envelope(
                    &sys,
                    sel,
                    &w,
                    cert.theta,
                    &z0,
                    &args.solve,
                    &args.time,
                    args.slack,
                ),
            )
        })
        .collect();

    let mut passed = 0;
    for (k, (sel, run)) in runs.into_iter().enumerate() {
        let run = run.map_err(core_failure)?;
        if run.pass {
            passed += 1;
        }
        let _ = writeln!(
            out,
            "sample {k} {}: max_ratio = {}, violations = {}, {}",
            selector_label(sel),
            num(run.max_ratio),
            run.violations,
            if run.pass { "pass" } else { "FAIL" }
        );
    }
    let _ = writeln!(out, "summary = {passed}/{} passed", args.samples);
    Ok(if passed == args.samples {
        EXIT_OK
    } else {
        EXIT_FAIL
    })
}

/// Runs the tool with `args` (program name first). Reports go to `out`,
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut report = String::new();
    let result = match &cli.command {
        Command::Certify(a) => cmd_certify(a, &mut report),
        Command::Equilibrium(a) => cmd_equilibrium(a, &mut report),
        Command::Simulate(a) => cmd_simulate(a, &mut report),
        Command::Envelope(a) => cmd_envelope(a, &mut report),
        Command::Sweep(a) => cmd_sweep(a, &mut report),
    };
    if out
        .write_all(report.as_bytes())
        .and_then(|_| out.flush())
        .is_err()
    {
        return EXIT_INPUT;
    }
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {:#}", f.error);
            f.code
        }
    }
}
