//! `pcurv`: solve, shoot, sweep and certify radial solutions from the shell.
//!
//! Every command prints a single JSON document (or writes it to `--out`).
//! Total curvatures are entered and reported in units of π.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcurv::blowup::{blowup_sweep, write_sweep_csv, DEFAULT_DELTA, DEFAULT_R_ETA};
use pcurv::continuation::{run_continuation, write_steps_csv, DEFAULT_SCHEDULE};
use pcurv::diagnostics::{diagnose, kelvin_transform, DiagnoseOptions, DiagnosticsReport, DEFAULT_FIT_WINDOW};
use pcurv::quadrature::IntegralReport;
use pcurv::{
    integrate, lambda_of_u0, solve_for_lambda, sweep, CurvatureSpec, Error, IntegratorControls, RadialProfile,
    SolverOptions, Status, FORMAT_VERSION,
};
use serde::Serialize;
use serde_json::{json, Value};

/// Environment variable capping the number of worker threads.
const WORKERS_ENV: &str = "PCURV_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "pcurv", version, about = "Entire radial solutions of -Δu = (1-|x|^p) e^{2u}")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(flatten)]
    controls: ControlArgs,
}

#[derive(Args, Debug, Clone)]
struct ControlArgs {
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    #[arg(long, global = true)]
    r_start: Option<f64>,
    #[arg(long, global = true)]
    r_max: Option<f64>,
    #[arg(long, global = true)]
    u_floor: Option<f64>,
    /// Largest step in log r.
    #[arg(long, global = true)]
    max_step: Option<f64>,
}

impl ControlArgs {
    fn build(&self) -> IntegratorControls {
        let d = IntegratorControls::default();
        IntegratorControls {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            r_start: self.r_start.unwrap_or(d.r_start),
            r_max: self.r_max.unwrap_or(d.r_max),
            r_settle: d.r_settle.min(self.r_max.unwrap_or(d.r_max)),
            u_floor: self.u_floor.unwrap_or(d.u_floor),
            max_step: self.max_step.unwrap_or(d.max_step),
            ..d
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    SignChanging,
    Regularized,
    Constant,
}

#[derive(Args, Debug, Clone)]
struct SpecArgs {
    #[arg(long, value_enum, default_value = "sign-changing")]
    kind: Kind,
    /// Exponent in K = 1 - r^p.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Central value of the regularized curvature (λ - r^p) e^{-r²}.
    #[arg(long)]
    lambda: Option<f64>,
    /// Constant curvature value.
    #[arg(long, default_value_t = 1.0)]
    k0: f64,
}

impl SpecArgs {
    fn build(&self) -> pcurv::Result<CurvatureSpec> {
        match self.kind {
            Kind::SignChanging => CurvatureSpec::sign_changing(self.p),
            Kind::Regularized => {
                let lambda = self
                    .lambda
                    .ok_or_else(|| Error::InvalidSpec("--lambda is required for the regularized kind".into()))?;
                CurvatureSpec::regularized(self.p, lambda)
            }
            Kind::Constant => CurvatureSpec::constant(self.k0),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ProfileOut {
    /// Dump the node table (r,u,w,lam,vol,pw) as CSV.
    #[arg(long)]
    profile_csv: Option<PathBuf>,
    /// Save the self-describing profile document for later `pohozaev`/`kelvin` runs.
    #[arg(long)]
    profile_json: Option<PathBuf>,
}

impl ProfileOut {
    fn write(&self, profile: &RadialProfile) -> pcurv::Result<()> {
        if let Some(path) = &self.profile_csv {
            profile.write_csv(BufWriter::new(File::create(path)?))?;
        }
        if let Some(path) = &self.profile_json {
            profile.write_json(BufWriter::new(File::create(path)?))?;
        }
        Ok(())
    }
}

#[derive(Args, Debug, Clone)]
struct FitArgs {
    #[arg(long, default_value_t = DEFAULT_FIT_WINDOW.0)]
    fit_lo: f64,
    #[arg(long, default_value_t = DEFAULT_FIT_WINDOW.1)]
    fit_hi: f64,
}

impl FitArgs {
    fn options(&self) -> DiagnoseOptions {
        DiagnoseOptions { fit_window: (self.fit_lo, self.fit_hi) }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find the solution with a prescribed total curvature and certify it.
    Solve {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        lambda_over_pi: f64,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        profile: ProfileOut,
    },
    /// Integrate a single shot from a given central height.
    Shoot {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, allow_hyphen_values = true)]
        u0: f64,
        #[command(flatten)]
        profile: ProfileOut,
    },
    /// Map the total curvature over a grid of central heights.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        u0_min: f64,
        #[arg(long, default_value_t = 15.0, allow_hyphen_values = true)]
        u0_max: f64,
        #[arg(long, default_value_t = 57)]
        count: usize,
        /// Also write u0,status,lambda_over_pi rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the identity and far-field checks on a stored profile document.
    Pohozaev {
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Rescale a sequence of high-curvature solutions onto the spherical bubble.
    Blowup {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [3.9, 3.99, 3.999])]
        targets_over_pi: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_R_ETA)]
        r_eta: f64,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Recover a solution through the damped family as λ decreases.
    Continue {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        lambda_over_pi: f64,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SCHEDULE)]
        schedule: Vec<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        profile: ProfileOut,
    },
    /// Kelvin-transform a solution and tabulate it near the origin.
    Kelvin {
        /// Stored profile document; otherwise the profile is solved for.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        lambda_over_pi: Option<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3, 1e-4])]
        s_grid: Vec<f64>,
    },
    /// Check the integrator against the closed-form spherical bubble.
    Oracle {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, std::f64::consts::LN_2, 3.0])]
        u0: Vec<f64>,
    },
}

/// Failure of a command, split by exit code.
enum Failure {
    Config(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_configuration() {
            Failure::Config(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = std::result::Result<Value, Failure>;

#[derive(Serialize)]
struct IntegralsOut {
    lambda_hat_over_pi: f64,
    v_hat: f64,
    p_hat: Option<f64>,
    tail_fraction: f64,
    converged: bool,
    r_trunc: f64,
}

impl From<&IntegralReport> for IntegralsOut {
    fn from(r: &IntegralReport) -> Self {
        IntegralsOut {
            lambda_hat_over_pi: r.lambda_hat / PI,
            v_hat: r.v_hat,
            p_hat: r.p_hat,
            tail_fraction: r.tail_fraction,
            converged: r.converged,
            r_trunc: r.r_trunc,
        }
    }
}

fn diagnostics_json(d: &DiagnosticsReport) -> Value {
    json!({
        "pohozaev_residual": d.pohozaev_residual,
        "volume_residual": d.volume_residual,
        "farfield": d.farfield,
        "gradient_bound": d.gradient_bound,
        "kelvin_sup": d.kelvin_sup,
        "loglog_ratio": d.loglog_ratio,
        "monotone": d.monotone,
        "integrals": IntegralsOut::from(&d.integrals),
    })
}

fn over_pi(l: Option<f64>) -> Option<f64> {
    l.map(|l| l / PI)
}

/// Rejects targets outside the existence window before any shooting.
fn check_target(spec: &CurvatureSpec, target: f64) -> std::result::Result<(), Failure> {
    if let Some(w) = spec.window() {
        if !w.nonempty {
            return Err(Failure::Config(format!(
                "no entire solutions exist for p = {}: the window ((2+p)π, 4π) is empty",
                spec.p().unwrap_or(f64::NAN)
            )));
        }
        if !w.contains_open(target) {
            return Err(Failure::Config(format!(
                "target {}π lies outside the window ({}π, 4π)",
                target / PI,
                w.lambda_star / PI
            )));
        }
    }
    Ok(())
}

fn read_profile(path: &Path) -> std::result::Result<RadialProfile, Failure> {
    Ok(RadialProfile::read_json(BufReader::new(File::open(path)?))?)
}

fn run(cmd: &Command, controls: &IntegratorControls) -> Outcome {
    controls.validate()?;
    match cmd {
        Command::Solve { spec, lambda_over_pi, fit, profile } => {
            let spec = spec.build()?;
            let target = lambda_over_pi * PI;
            check_target(&spec, target)?;
            let shot = solve_for_lambda(&spec, target, controls, &SolverOptions::default())?;
            profile.write(&shot.profile)?;
            let diag = diagnose(&shot.profile, &fit.options())?;
            Ok(json!({
                "spec": spec,
                "controls": controls,
                "target_over_pi": lambda_over_pi,
                "u0": shot.u0,
                "status": shot.status,
                "lambda_hat_over_pi": over_pi(shot.lambda_hat),
                "diagnostics": diagnostics_json(&diag),
            }))
        }
        Command::Shoot { spec, u0, profile } => {
            let spec = spec.build()?;
            let shot = lambda_of_u0(&spec, *u0, controls)?;
            profile.write(&shot.profile)?;
            Ok(json!({
                "spec": spec,
                "controls": controls,
                "u0": shot.u0,
                "status": shot.status,
                "lambda_hat_over_pi": over_pi(shot.lambda_hat),
                "r_last": shot.profile.r_last(),
                "nodes": shot.profile.nodes.len(),
            }))
        }
        Command::Sweep { spec, u0_min, u0_max, count, csv } => {
            let spec = spec.build()?;
            if *count < 2 || u0_max.partial_cmp(u0_min) != Some(std::cmp::Ordering::Greater) {
                return Err(Failure::Config("sweep needs count ≥ 2 and u0_max > u0_min".into()));
            }
            let grid: Vec<f64> = (0..*count)
                .map(|i| u0_min + (u0_max - u0_min) * i as f64 / (*count - 1) as f64)
                .collect();
            let shots = sweep(&spec, &grid, controls)?;
            if let Some(path) = csv {
                let mut f = BufWriter::new(File::create(path)?);
                writeln!(f, "u0,status,lambda_over_pi")?;
                for s in &shots {
                    let l = over_pi(s.lambda_hat).map_or(String::new(), |l| l.to_string());
                    writeln!(f, "{},{},{}", s.u0, s.status, l)?;
                }
                f.flush()?;
            }
            let points: Vec<Value> = shots
                .iter()
                .map(|s| json!({"u0": s.u0, "status": s.status, "lambda_hat_over_pi": over_pi(s.lambda_hat)}))
                .collect();
            let converged = shots.iter().filter(|s| s.is_converged()).count();
            Ok(json!({"spec": spec, "controls": controls, "converged": converged, "points": points}))
        }
        Command::Pohozaev { profile, fit } => {
            let prof = read_profile(profile)?;
            let diag = diagnose(&prof, &fit.options())?;
            Ok(json!({
                "spec": prof.spec,
                "u0": prof.u0,
                "status": prof.status,
                "lambda_hat_over_pi": over_pi(prof.lambda_hat),
                "diagnostics": diagnostics_json(&diag),
            }))
        }
        Command::Blowup { p, targets_over_pi, r_eta, delta, csv } => {
            let targets: Vec<f64> = targets_over_pi.iter().map(|t| t * PI).collect();
            let entries = blowup_sweep(*p, &targets, controls, *r_eta, *delta)?;
            if let Some(path) = csv {
                write_sweep_csv(&entries, BufWriter::new(File::create(path)?))?;
            }
            let rows: Vec<Value> = entries
                .iter()
                .map(|e| {
                    let d = &e.diagnostics;
                    json!({
                        "target_over_pi": e.target / PI,
                        "lambda_hat_over_pi": e.lambda_hat / PI,
                        "u0": d.u0,
                        "mu": d.mu,
                        "sup_dist": d.sup_dist,
                        "grad_dist": d.grad_dist,
                        "mass_in_delta_over_pi": d.mass_in_delta / PI,
                        "mass_fraction": e.mass_fraction(),
                    })
                })
                .collect();
            Ok(json!({"p": p, "r_eta": r_eta, "delta": delta, "controls": controls, "entries": rows}))
        }
        Command::Continue { p, lambda_over_pi, schedule, csv, profile } => {
            let res = run_continuation(*p, lambda_over_pi * PI, schedule, controls)?;
            if let Some(path) = csv {
                write_steps_csv(&res.steps, BufWriter::new(File::create(path)?))?;
            }
            profile.write(&res.final_profile)?;
            let steps: Vec<Value> = res
                .steps
                .iter()
                .map(|s| {
                    json!({
                        "lambda": s.lambda,
                        "u0": s.u0,
                        "r_lambda": s.r_lambda,
                        "ratio": s.ratio,
                        "lambda_e2u0": s.lambda * (2.0 * s.u0).exp(),
                    })
                })
                .collect();
            let diag = diagnose(&res.final_profile, &DiagnoseOptions::default())?;
            Ok(json!({
                "p": p,
                "target_over_pi": lambda_over_pi,
                "controls": controls,
                "steps": steps,
                "mu_hat": res.mu_hat,
                "rho": res.rho,
                "final_u0": res.rho.ln(),
                "direct_u0": res.direct_u0,
                "match_error": res.match_error,
                "final_diagnostics": diagnostics_json(&diag),
            }))
        }
        Command::Kelvin { profile, spec, lambda_over_pi, s_grid } => {
            let prof = match (profile, lambda_over_pi) {
                (Some(path), _) => read_profile(path)?,
                (None, Some(l)) => {
                    let spec = spec.build()?;
                    check_target(&spec, l * PI)?;
                    let shot = solve_for_lambda(&spec, l * PI, controls, &SolverOptions::default())?;
                    (*shot.profile).clone()
                }
                (None, None) => return Err(Failure::Config("kelvin needs --profile or --lambda-over-pi".into())),
            };
            let lambda = prof
                .lambda_hat
                .ok_or_else(|| Failure::Solver(format!("profile did not converge ({})", prof.status)))?;
            let values: Vec<Value> = kelvin_transform(&prof, lambda, s_grid)?
                .into_iter()
                .map(|(s, u)| json!({"s": s, "u_tilde": u}))
                .collect();
            Ok(json!({
                "spec": prof.spec,
                "u0": prof.u0,
                "lambda_hat_over_pi": lambda / PI,
                "values": values,
            }))
        }
        Command::Oracle { u0 } => {
            let spec = CurvatureSpec::constant(1.0)?;
            let threshold = 10.0 * controls.rel_tol;
            let mut cases = Vec::new();
            let mut pass = true;
            for &h in u0 {
                let prof = integrate(&spec, h, controls)?;
                let err = prof
                    .nodes
                    .iter()
                    .filter(|n| n.r <= 100.0)
                    .map(|n| (n.u - (h - (1.0 + (2.0 * h).exp() * n.r * n.r / 4.0).ln())).abs())
                    .fold(0.0, f64::max);
                let ok = err <= threshold && prof.status == Status::Converged;
                pass &= ok;
                cases.push(json!({
                    "u0": h,
                    "max_error": err,
                    "status": prof.status,
                    "lambda_hat_over_pi": over_pi(prof.lambda_hat),
                    "pass": ok,
                }));
            }
            let doc = json!({"threshold": threshold, "controls": controls, "cases": cases, "pass": pass});
            if pass {
                Ok(doc)
            } else {
                Err(Failure::Solver(format!("bubble oracle failed: {doc}")))
            }
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Solve { .. } => "solve",
        Command::Shoot { .. } => "shoot",
        Command::Sweep { .. } => "sweep",
        Command::Pohozaev { .. } => "pohozaev",
        Command::Blowup { .. } => "blowup",
        Command::Continue { .. } => "continue",
        Command::Kelvin { .. } => "kelvin",
        Command::Oracle { .. } => "oracle",
    }
}

fn configure_workers() -> std::result::Result<(), Failure> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(Failure::Config(format!("{WORKERS_ENV} must be positive")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn emit(doc: &Value, out: Option<&Path>) -> io::Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n"),
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}")
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let controls = cli.controls.build();
    let result = configure_workers().and_then(|_| run(&cli.command, &controls));
    match result {
        Ok(body) => {
            let mut doc = json!({"format_version": FORMAT_VERSION, "command": command_name(&cli.command)});
            if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
                d.extend(b);
            }
            if let Err(e) = emit(&doc, cli.out.as_deref()) {
                eprintln!("pcurv: cannot write result: {e}");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Config(msg)) => {
            eprintln!("pcurv: configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("pcurv: solver failure: {msg}");
            ExitCode::from(1)
        }
    }
}
