//! Command-line front end.
//!
//! Settings resolve as defaults < `--config` JSON < flags. Every run writes
//! `diagnostics.json` into the output directory with the resolved settings,
//! including the problem inline, so the file can be passed back as
//! `--config` to repeat the run.
//!
//! Exit codes: 0 on success, 2 for invalid input or IO failures, 3 when a
//! solver does not converge (partial artifacts are still written).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bvp::{solve_bvp, solve_bvp_yosida, BvpOptions};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::halfline::{solve_halfline, HalflineOptions};
use crate::operators::check_properties;
use crate::presets::load_preset;
use crate::problem::{Problem, ProblemSpec};
use crate::semigroup::{check_generator_sqrt, check_semigroup_law, SemigroupHandle};
use crate::variational::{minimize_psi, VariationalOptions};
use crate::viscosity::{viscosity_sweep, ViscosityConfig};
use crate::weights::{build_weights, y_norm, CoefficientSpec};
use crate::SweepMethod;

#[derive(Parser, Debug)]
#[command(name = "halfline", version, about = "Bounded solutions of monotone second-order inclusions on the half-line")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Bounded solution on the window [0, R] via the horizon cascade.
    Solve,
    /// Two-point problem on [0, horizon] with u(horizon) = y.
    Bvp,
    /// Two-point problems with A replaced by its Yosida approximation.
    SweepLambda,
    /// Two-point problems with u(n) = 0 for a list of horizons n.
    SweepN,
    /// Evaluates S(t)x for a list of times and checks the semigroup law.
    Semigroup,
    /// Minimizes the discrete energy on [0, horizon] and compares with the BVP.
    Variational,
    /// Compares eps u'' - u' in Au + f with the first-order flow u' + Au + f = 0.
    Viscosity,
    /// Checks the operator, the coefficients and the forcing without solving.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Bvp => "bvp",
            Command::SweepLambda => "sweep-lambda",
            Command::SweepN => "sweep-n",
            Command::Semigroup => "semigroup",
            Command::Variational => "variational",
            Command::Viscosity => "viscosity",
            Command::Validate => "validate",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    GaussSeidel,
    Newton,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid step.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Window length.
    #[arg(long = "R", global = true)]
    pub window: Option<f64>,
    /// First cascade horizon.
    #[arg(long, global = true)]
    pub n0: Option<f64>,
    /// Cascade tolerance on the window.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_doublings: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodArg>,
    /// Decay excess of the power-forcing preset.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Initial value, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Option<Vec<f64>>,
    /// Right end of the interval for bvp and variational.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Right boundary value for bvp.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub y: Option<Vec<f64>>,
    /// Yosida parameter for bvp.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Time step of the first-order reference flow.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Random samples for the operator checks.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub delta: Option<f64>,
    pub problem: Option<ProblemSpec>,
    /// Replaces the initial value of the problem.
    pub x: Option<Vec<f64>>,
    pub h: f64,
    pub window: f64,
    /// Defaults to `2 window`.
    pub n0: Option<f64>,
    pub tol: f64,
    pub max_doublings: usize,
    pub method: SweepMethod,
    pub max_iterations: usize,
    pub bvp_tol: f64,
    pub variational_tol: f64,
    /// Defaults to `window`.
    pub horizon: Option<f64>,
    pub y: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub lambdas: Vec<f64>,
    /// Defaults to `n0 2^k`, `k = 0..=4`.
    pub horizons: Option<Vec<f64>>,
    pub eps: Vec<f64>,
    /// Defaults to `h / 10`.
    pub tau: Option<f64>,
    pub times: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: None,
            delta: None,
            problem: None,
            x: None,
            h: 0.01,
            window: 10.0,
            n0: None,
            tol: 1e-3,
            max_doublings: 12,
            method: SweepMethod::Newton,
            max_iterations: 10_000,
            bvp_tol: 1e-10,
            variational_tol: 1e-9,
            horizon: None,
            y: None,
            lambda: None,
            lambdas: (0..=10).map(|k| 0.5f64.powi(k)).collect(),
            horizons: None,
            eps: vec![0.2, 0.1, 0.05, 0.025],
            tau: None,
            times: vec![0.5, 1.0, 2.0],
            seed: 0,
            samples: 1000,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Applies the config file and the flags, then fixes the problem inline.
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let mut c = match &flags.config {
            Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &flags.preset {
            c.preset = Some(p.clone());
            c.problem = None;
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &flags.$field {
                    c.$field = v.clone().into();
                }
            )*};
        }
        set!(delta, x, n0, horizon, y, lambda, horizons, tau);
        set!(out, seed, h, window, tol, max_doublings, lambdas, eps, times, samples);
        if let Some(m) = flags.method {
            c.method = match m {
                MethodArg::GaussSeidel => SweepMethod::GaussSeidel,
                MethodArg::Newton => SweepMethod::Newton,
            };
        }
        let mut spec = match (&c.problem, &c.preset) {
            (Some(p), _) => p.clone(),
            (None, Some(name)) => load_preset(name, c.delta)?,
            (None, None) => return Err(Error::invalid("no problem given; use --preset or a config with `problem`")),
        };
        if let Some(x) = c.x.take() {
            spec.x = x;
        }
        c.problem = Some(spec);
        Ok(c)
    }

    pub fn problem(&self) -> Result<Problem> {
        match &self.problem {
            Some(spec) => Problem::from_spec(spec),
            None => Err(Error::invalid("configuration has no problem")),
        }
    }

    pub fn halfline_options(&self) -> HalflineOptions {
        HalflineOptions {
            h: self.h,
            window: self.window,
            n0: self.n0.unwrap_or(2.0 * self.window),
            tol: self.tol,
            max_doublings: self.max_doublings,
            method: self.method,
            max_iterations: self.max_iterations,
            bvp_tol: self.bvp_tol,
        }
    }

    fn bvp_options(&self) -> BvpOptions {
        BvpOptions {
            tol: self.bvp_tol,
            max_iterations: self.max_iterations,
            method: self.method,
        }
    }
}

/// 2 for bad input or IO, 3 for solver failures.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() || matches!(e, Error::Io(_)) {
        2
    } else {
        3
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let config = match RunConfig::resolve(&cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = fs::create_dir_all(&config.out) {
        eprintln!("error: cannot create {}: {e}", config.out.display());
        return 2;
    }
    let mut diagnostics = json!({
        "command": cli.command.name(),
        "config": config,
    });
    let (code, extra) = match execute(cli.command, &config) {
        Ok((status, body)) => {
            let code = if status == "ok" { 0 } else { 3 };
            (code, json!({ "status": status, "result": body }))
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut body = json!({ "status": status_word(&e), "error": e.to_string() });
            if let Error::CascadeDiverged { report } = &e {
                body["cascade"] = json!(report);
                if let Err(io) = write(&config.out, "cascade.csv", &report.to_csv()) {
                    eprintln!("error: {io}");
                }
            }
            (exit_code(&e), body)
        }
    };
    if let (Value::Object(d), Value::Object(x)) = (&mut diagnostics, extra) {
        d.extend(x);
    }
    let text = serde_json::to_string_pretty(&diagnostics).expect("diagnostics serialize");
    match write(&config.out, "diagnostics.json", &text) {
        Ok(()) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn status_word(e: &Error) -> &'static str {
    if exit_code(e) == 2 {
        "invalid"
    } else {
        "not-converged"
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn execute(command: Command, c: &RunConfig) -> Result<(&'static str, Value)> {
    let problem = c.problem()?;
    match command {
        Command::Solve => solve(&problem, c),
        Command::Bvp => bvp(&problem, c),
        Command::SweepLambda => sweep_lambda(&problem, c),
        Command::SweepN => sweep_n(&problem, c),
        Command::Semigroup => semigroup(&problem, c),
        Command::Variational => variational(&problem, c),
        Command::Viscosity => viscosity(&problem, c),
        Command::Validate => validate(&problem, c),
    }
}

fn solve(problem: &Problem, c: &RunConfig) -> Result<(&'static str, Value)> {
    let (sol, report) = solve_halfline(problem, &c.halfline_options())?;
    write(&c.out, "solution.csv", &sol.to_csv())?;
    write(&c.out, "cascade.csv", &report.to_csv())?;
    Ok((
        "ok",
        json!({
            "accepted_horizon": report.accepted_horizon,
            "diagnostics": report.accepted_diagnostics(),
            "cascade": report,
        }),
    ))
}

fn bvp(problem: &Problem, c: &RunConfig) -> Result<(&'static str, Value)> {
    let horizon = c.horizon.unwrap_or(c.window);
    let grid = Grid::with_step(horizon, c.h)?;
    let y = c.y.clone().unwrap_or_else(|| vec![0.0; problem.dim()]);
    let sol = match c.lambda {
        Some(l) => solve_bvp_yosida(problem, l, &grid, &y, &c.bvp_options())?,
        None => solve_bvp(problem, &grid, &y, &c.bvp_options())?,
    };
    write(&c.out, "solution.csv", &sol.to_csv())?;
    Ok((
        "ok",
        json!({ "horizon": horizon, "residual": sol.residual, "iterations": sol.iterations }),
    ))
}

fn sweep_lambda(problem: &Problem, c: &RunConfig) -> Result<(&'static str, Value)> {
    let horizon = c.horizon.unwrap_or(c.window);
    let grid = Grid::with_step(horizon, c.h)?;
    let y = c.y.clone().unwrap_or_else(|| vec![0.0; problem.dim()]);
    let exact = solve_bvp(problem, &grid, &y, &c.bvp_options())?;
    let mut csv = String::from("lambda,sup_difference,residual,iterations\n");
    let mut rows = Vec::new();
    for &l in &c.lambdas {
        let sol = solve_bvp_yosida(problem, l, &grid, &y, &c.bvp_options())?;
        let gap = sol.sup_distance(&exact, grid.len());
        csv.push_str(&format!("{l:.16e},{gap:.16e},{:.16e},{}\n", sol.residual, sol.iterations));
        rows.push(json!({ "lambda": l, "sup_difference": gap }));
    }
    write(&c.out, "sweep_lambda.csv", &csv)?;
    Ok(("ok", json!({ "horizon": horizon, "rows": rows })))
}

fn sweep_n(problem: &Problem, c: &RunConfig) -> Result<(&'static str, Value)> {
    let opts = c.halfline_options();
    let horizons = c
        .horizons
        .clone()
        .unwrap_or_else(|| (0..=4).map(|k| opts.n0 * 2f64.powi(k)).collect());
    let window_cells = crate::grid::cells_for(c.window, c.h)?;
    let zero = vec![0.0; problem.dim()];
    let mut csv = String::from("horizon,window_gap_to_previous,residual,iterations\n");
    let mut rows = Vec::new();
    let mut prev: Option<crate::grid::GridSolution> = None;
    for &n in &horizons {
        if n < c.window {
            return Err(Error::invalid(format!("horizon {n} is shorter than the window {}", c.window)));
        }
        let grid = Grid::with_step(n, c.h)?;
        let sol = solve_bvp(problem, &grid, &zero, &c.bvp_options())?;
        let gap = prev.as_ref().map(|p| sol.sup_distance(p, window_cells + 1));
        csv.push_str(&format!(
            "{n:.16e},{},{:.16e},{}\n",
            gap.map(|g| format!("{g:.16e}")).unwrap_or_default(),
            sol.residual,
            sol.iterations
        ));
        rows.push(json!({ "horizon": n, "window_gap_to_previous": gap }));
        prev = Some(sol);
    }
    write(&c.out, "sweep_n.csv", &csv)?;
    Ok(("ok", json!({ "rows": rows })))
}

fn semigroup(problem: &Problem, c: &RunConfig) -> Result<(&'static str, Value)> {
    let opts = c.halfline_options();
    let handle = SemigroupHandle::new(problem.operator.clone(), problem.coefficients.clone(), opts)?;
    let x = &problem.x;
    let d = problem.dim();
    let mut csv = String::from("t");
    for k in 1..=d {
        csv.push_str(&format!(",u_{k}"));
    }
    csv.push('\n');
    for &t in &c.times {
        let v = handle.evaluate(t, x)?;
        csv.push_str(&format!("{t:.16e}"));
        for value in v {
            csv.push_str(&format!(",{value:.16e}"));
        }
        csv.push('\n');
    }
    write(&c.out, "semigroup.csv", &csv)?;
    let s = c.times.first().copied().unwrap_or(1.0);
    let law = check_semigroup_law(&handle, s, s, x, 2.0 * c.tol)?;
    let mut body = json!({ "law": law, "forcing_ignored": problem.forcing != Default::default() });
    let unit = CoefficientSpec::constant(1.0, 0.0);
    if let (Some(m), true) = (problem.operator.linear_matrix(), problem.coefficients == unit) {
        let rows: Vec<Vec<f64>> = m.chunks(d).map(|r| r.to_vec()).collect();
        if let Ok(report) = check_generator_sqrt(&rows, x, &c.times, &opts, 2.0 * c.tol) {
            body["generator"] = json!(report);
        }
    }
    Ok(("ok", body))
}

fn variational(problem: &Problem, c: &RunConfig) -> Result<(&'static str, Value)> {
    let horizon = c.horizon.unwrap_or(c.window);
    let opts = VariationalOptions {
        tol: c.variational_tol,
        ..Default::default()
    };
    let m = minimize_psi(problem, horizon, c.h, &opts)?;
    let reference = solve_bvp(problem, &m.solution.grid, &vec![0.0; problem.dim()], &c.bvp_options())?;
    let distance = m.solution.sup_distance(&reference, m.solution.grid.len());
    write(&c.out, "solution.csv", &m.solution.to_csv())?;
    Ok((
        "ok",
        json!({
            "horizon": horizon,
            "energy": m.value,
            "iterations": m.iterations,
            "gradient_mapping": m.gradient_mapping,
            "bvp_sup_distance": distance,
        }),
    ))
}

fn viscosity(problem: &Problem, c: &RunConfig) -> Result<(&'static str, Value)> {
    let opts = c.halfline_options();
    let config = ViscosityConfig {
        eps: c.eps.clone(),
        tau: c.tau.unwrap_or(c.h / 10.0),
        window: c.window,
        h: c.h,
        n0: opts.n0,
        tol: c.tol,
        max_doublings: c.max_doublings,
    };
    let table = viscosity_sweep(&problem.operator, &problem.forcing, &problem.x, &config)?;
    write(&c.out, "viscosity.csv", &table.to_csv())?;
    let all_ok = table.rows.iter().all(|r| r.solver_status == "ok");
    Ok((
        if all_ok { "ok" } else { "partial" },
        json!({ "monotone": table.is_monotone(), "table": table }),
    ))
}

fn validate(problem: &Problem, c: &RunConfig) -> Result<(&'static str, Value)> {
    let report = check_properties(&problem.operator, c.samples, 5.0, c.seed, 1e-9)?;
    println!(
        "operator checks: {} ({} samples, seed {})",
        if report.pass { "pass" } else { "FAIL" },
        c.samples,
        c.seed
    );
    if !report.pass {
        return Err(Error::Hypothesis {
            hypothesis: "monotonicity",
            detail: format!("randomized resolvent checks failed: {report:?}"),
        });
    }
    let opts = c.halfline_options();
    let grid = Grid::with_step(opts.n0, opts.h)?;
    let weights = build_weights(&problem.coefficients, &grid)?;
    let a_plus = weights.a_plus_infinity()?;
    println!("p0 = {:e}", weights.p0());
    println!("a_plus(inf) = {a_plus:e}");
    let norm = y_norm(&problem.forcing, &weights)?;
    println!("y_norm = {:e} (tail {:e} +/- {:e})", norm.value, norm.tail, norm.tail_error);
    Ok((
        "ok",
        json!({
            "operator_checks": report,
            "p0": weights.p0(),
            "a_plus_infinity": a_plus,
            "bounded_equivalence": weights.bounded_equivalence(),
            "y_norm": norm,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"preset": "linear", "h": 0.02, "tol": 1e-4}"#).unwrap();
        let cli = Cli::parse_from(["halfline", "solve", "--config", path.to_str().unwrap(), "--h", "0.05"]);
        let c = RunConfig::resolve(&cli.flags).unwrap();
        assert_eq!(c.h, 0.05);
        assert_eq!(c.tol, 1e-4);
        assert_eq!(c.problem.unwrap().x, vec![1.0]);
    }

    #[test]
    fn echo_round_trips() {
        let cli = Cli::parse_from(["halfline", "solve", "--preset", "power-forcing", "--delta", "0.5", "--x", "2"]);
        let c = RunConfig::resolve(&cli.flags).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"hh": 1}"#).is_err());
    }
}
