//! The `treewalk` command line.
//!
//! Exit codes: 0 success; 1 validation failure or failed claim; 2 parse
//! error or unreadable file; 3 truncation too coarse for the requested
//! tolerance.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use treewalk_core::affine::elem_norm;
use treewalk_core::rng::{label_of, StreamFamily};
use treewalk_core::walk::{height_regime_report, run_right};
use treewalk_core::Error;

use crate::config::{self, ConfigError, Experiment, Setup};
use crate::parallel::Rayon;
use crate::realization::Realization;
use crate::report::{self, ClaimRecord, Manifest, Report, SuiteRecord};
use crate::suites::{self, Suite};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_TRUNCATION: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "treewalk",
    version,
    about = "Random walks on the affine group of a homogeneous tree"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that the configured law is non-exceptional and print its moments.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulate trajectories and report the height regime.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Also write trajectories.csv.
        #[arg(long)]
        dump: bool,
    },
    /// Run verification suites and write report.json, kernel_values.csv and manifest.json.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated: algebra, regimes, wald, renewal, boundary-limit, omega-limit; or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Tolerance in combined standard errors.
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trajectories: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}

pub fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Validate { config } => validate(&config),
        Command::Simulate { run, dump } => simulate(&run, dump),
        Command::Verify { run, suite, tol } => verify(&run, &suite, tol),
    }
}

fn read(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_PARSE
    })
}

fn report_config_error(e: &ConfigError) -> u8 {
    match e {
        ConfigError::Syntax(errs) => {
            for err in errs {
                eprintln!("error: {err}");
            }
            EXIT_PARSE
        }
        ConfigError::Law(e) => {
            eprintln!("FAIL: {e}");
            EXIT_FAIL
        }
    }
}

fn validate(path: &Path) -> u8 {
    let text = match read(path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let exp = match config::load(&text) {
        Ok(e) => e,
        Err(e) => return report_config_error(&e),
    };
    let (summary, pass) = match &exp {
        Experiment::Padic(s) => describe(s),
        Experiment::Lamplighter(s) => describe(s),
    };
    print!("{summary}");
    if pass {
        println!("PASS");
        EXIT_OK
    } else {
        println!("FAIL");
        EXIT_FAIL
    }
}

fn describe<T: Realization>(s: &Setup<T>) -> (String, bool) {
    let mut out = String::new();
    let v = &s.validation;
    let _ = writeln!(out, "realization: {} (degree {})", s.tree.kind(), s.tree.degree());
    for a in s.law.atoms() {
        let _ = writeln!(out, "atom: {} @ {} (phi = {})", a.element, a.weight, a.phi);
    }
    let _ = writeln!(out, "drift: {}", s.law.drift());
    let _ = writeln!(out, "not horocyclic: {}", v.not_horocyclic);
    let _ = writeln!(out, "no common fixed bottom end: {}", v.no_common_fixed_end);
    let _ = writeln!(out, "gcd of phi: {}", v.phi_gcd);
    for r in &v.reasons {
        let _ = writeln!(out, "reason: {r}");
    }
    match s.law.moment_report(&s.tree, s.params.epsilon) {
        Ok(m) => {
            let _ = writeln!(out, "E|phi| = {}", m.mean_abs_phi);
            let _ = writeln!(out, "E|X| = {}", m.mean_norm);
            let _ = writeln!(out, "E[phi^2] = {}", m.mean_phi_sq);
            let _ = writeln!(out, "E|b(X)|^(2 + {}) = {}", m.epsilon, m.mean_b_norm_pow);
        }
        Err(e) => {
            let _ = writeln!(out, "moments unavailable: {e}");
        }
    }
    let pass = v.strict_pass() || (v.pass() && s.allow_exceptional);
    (out, pass)
}

fn load_run(run: &RunArgs, tol: Option<f64>) -> Result<Experiment, u8> {
    let text = read(&run.config)?;
    let mut exp = config::parse_config(&text).map_err(|e| report_config_error(&e))?;
    let p = exp.params_mut();
    if let Some(seed) = run.seed {
        p.seed = seed;
    }
    if let Some(n) = run.trajectories {
        p.trajectories = n.max(1);
    }
    if let Some(n) = run.horizon {
        p.horizon = n.max(1);
    }
    if let Some(t) = tol {
        p.tol = t;
    }
    exp.rehash();
    Ok(exp)
}

fn create_out(dir: &Path) -> Result<(), u8> {
    fs::create_dir_all(dir).map_err(|e| {
        eprintln!("error: cannot create {}: {e}", dir.display());
        EXIT_FAIL
    })
}

fn io_fail(e: io::Error) -> u8 {
    eprintln!("error: {e}");
    EXIT_FAIL
}

fn simulate(run: &RunArgs, dump: bool) -> u8 {
    let exp = match load_run(run, None) {
        Ok(e) => e,
        Err(code) => return code,
    };
    if let Err(code) = create_out(&run.out) {
        return code;
    }
    let result = match &exp {
        Experiment::Padic(s) => simulate_with(s, run, dump),
        Experiment::Lamplighter(s) => simulate_with(s, run, dump),
    };
    result.unwrap_or_else(|code| code)
}

fn simulate_with<T: Realization>(s: &Setup<T>, run: &RunArgs, dump: bool) -> Result<u8, u8> {
    let started = Instant::now();
    let p = &s.params;
    let fam = StreamFamily::new(p.seed, label_of("simulate"));
    let rep = height_regime_report(&s.law, p.trajectories, p.horizon, p.threshold, p.extreme, &Rayon, fam);
    let mut data = BTreeMap::new();
    data.insert("regime".to_string(), regime_value(&rep));
    let mut claim = treewalk_core::renewal::Claim::new(
        "simulate/classification",
        "sign of E[phi(X)] determines the limit of R_n",
    );
    claim.verdict = treewalk_core::renewal::Verdict::from_bool(rep.consistent());
    claim.detail = format!(
        "expected: {}; observed: {}",
        rep.expected.describe(),
        rep.observed.describe()
    );
    println!("drift: {}", s.law.drift());
    println!("regime: {}", rep.observed.describe());
    let report = Report {
        tool: report::TOOL,
        version: report::VERSION,
        config_hash: s.hash.clone(),
        seed: p.seed,
        realization: s.tree.kind().into(),
        drift: s.law.drift().to_string(),
        notes: report::standard_notes(),
        suites: vec![SuiteRecord {
            suite: "simulate".into(),
            claims: vec![ClaimRecord::from(&claim)],
            data,
            error: None,
        }],
    };
    let mut outputs = vec!["report.json".to_string()];
    report::write_json(&run.out.join("report.json"), &report).map_err(io_fail)?;
    if dump {
        let csv = trajectories_csv(s, fam.child(1)).map_err(|e| {
            eprintln!("error: {e}");
            EXIT_FAIL
        })?;
        fs::write(run.out.join("trajectories.csv"), csv).map_err(io_fail)?;
        outputs.push("trajectories.csv".into());
    }
    let mut timings = BTreeMap::new();
    timings.insert("simulate".to_string(), started.elapsed().as_millis());
    write_manifest(&run.out, "simulate", &run.config, s, &report, timings, outputs)?;
    Ok(EXIT_OK)
}

fn regime_value(rep: &treewalk_core::walk::RegimeReport) -> serde_json::Value {
    serde_json::json!({
        "drift": rep.drift.to_string(),
        "horizon": rep.horizon,
        "threshold": rep.threshold,
        "extreme": rep.extreme,
        "trajectories": rep.summaries.len(),
        "fraction_below": rep.fraction_below,
        "fraction_above": rep.fraction_above,
        "fraction_both_extremes": rep.fraction_both_extremes,
        "expected": rep.expected.describe(),
        "observed": rep.observed.describe(),
        "consistent": rep.consistent(),
    })
}

/// `trajectory,n,height,norm,vertex` for the first `dump_trajectories`
/// trajectories; vertices beyond the working precision print as `?`.
fn trajectories_csv<T: Realization>(s: &Setup<T>, fam: StreamFamily) -> treewalk_core::Result<String> {
    let p = &s.params;
    let mut out = String::from("trajectory,n,height,norm,vertex\n");
    let o = s.tree.origin();
    for i in 0..p.dump_trajectories.min(p.trajectories) {
        run_right(&s.tree, &s.law, p.horizon, &mut fam.stream(i), |obs| {
            let (norm, vertex) = match (elem_norm(&s.tree, obs.element), s.tree.act_vertex(obs.element, &o)) {
                (Ok(n), Ok(v)) => (n.to_string(), v.to_string()),
                (Err(Error::PrecisionExhausted { .. }), _) | (_, Err(Error::PrecisionExhausted { .. })) => {
                    ("?".to_string(), "?".to_string())
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            let _ = writeln!(out, "{i},{},{},{norm},\"{vertex}\"", obs.step, obs.height);
            Ok(core::ops::ControlFlow::Continue(()))
        })?;
    }
    Ok(out)
}

fn write_manifest<T: Realization>(
    dir: &Path,
    command: &str,
    config: &Path,
    s: &Setup<T>,
    report: &Report,
    timings_ms: BTreeMap<String, u128>,
    outputs: Vec<String>,
) -> Result<(), u8> {
    let verdicts = report
        .suites
        .iter()
        .flat_map(|r| r.claims.iter().map(|c| (c.id.clone(), c.verdict)))
        .collect();
    let m = Manifest {
        tool: report::TOOL,
        version: report::VERSION,
        command: command.into(),
        config: config.display().to_string(),
        config_hash: s.hash.clone(),
        seed: s.params.seed,
        verdicts,
        timings_ms,
        outputs,
    };
    report::write_json(&dir.join("manifest.json"), &m).map_err(io_fail)
}

fn verify(run: &RunArgs, suite: &str, tol: Option<f64>) -> u8 {
    let suites = match suites::parse_suites(suite) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let exp = match load_run(run, tol) {
        Ok(e) => e,
        Err(code) => return code,
    };
    if let Err(code) = create_out(&run.out) {
        return code;
    }
    let result = match &exp {
        Experiment::Padic(s) => verify_with(s, &suites, run),
        Experiment::Lamplighter(s) => verify_with(s, &suites, run),
    };
    result.unwrap_or_else(|code| code)
}

/// Runs the suites and builds the report; also returns the kernel series
/// and per-suite timings.
pub fn run_suites<T: Realization>(
    s: &Setup<T>,
    suites: &[Suite],
) -> (Report, Vec<suites::Series>, BTreeMap<String, u128>, bool) {
    let mut records = Vec::new();
    let mut series = Vec::new();
    let mut timings = BTreeMap::new();
    let mut truncated = false;
    for &suite in suites {
        let started = Instant::now();
        let record = match suites::run_suite(s, suite, &Rayon) {
            Ok(out) => {
                series.extend(out.series);
                SuiteRecord {
                    suite: suite.name().into(),
                    claims: out.claims.iter().map(ClaimRecord::from).collect(),
                    data: out.data,
                    error: None,
                }
            }
            Err(e) => {
                truncated |= matches!(e, Error::HorizonTooSmall(_) | Error::TruncationTooCoarse(_));
                SuiteRecord {
                    suite: suite.name().into(),
                    claims: Vec::new(),
                    data: BTreeMap::new(),
                    error: Some(e.to_string()),
                }
            }
        };
        timings.insert(suite.name().to_string(), started.elapsed().as_millis());
        records.push(record);
    }
    let report = Report {
        tool: report::TOOL,
        version: report::VERSION,
        config_hash: s.hash.clone(),
        seed: s.params.seed,
        realization: s.tree.kind().into(),
        drift: s.law.drift().to_string(),
        notes: report::standard_notes(),
        suites: records,
    };
    (report, series, timings, truncated)
}

fn verify_with<T: Realization>(s: &Setup<T>, suites: &[Suite], run: &RunArgs) -> Result<u8, u8> {
    let (report, series, timings, truncated) = run_suites(s, suites);
    for r in &report.suites {
        if let Some(e) = &r.error {
            println!("{:<16} ERROR {e}", r.suite);
        }
        for c in &r.claims {
            println!("{:<8} {}  {}", c.verdict.to_uppercase(), c.id, c.detail);
        }
    }
    report::write_json(&run.out.join("report.json"), &report).map_err(io_fail)?;
    fs::write(run.out.join("kernel_values.csv"), report::kernel_csv(&series)).map_err(io_fail)?;
    let outputs = vec!["report.json".into(), "kernel_values.csv".into()];
    write_manifest(&run.out, "verify", &run.config, s, &report, timings, outputs)?;
    Ok(if truncated {
        EXIT_TRUNCATION
    } else if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_FAIL
    })
}
