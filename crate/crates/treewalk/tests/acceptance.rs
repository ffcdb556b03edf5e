//! The twelve acceptance criteria at their pinned tolerances; one PASS/FAIL
//! line each. Exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{all_pass, experiment, experiment_from, oracle_rows, run_claims, select, two_atom_config};
use treewalk::suites::Suite;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    fn all(parts: Vec<(bool, String)>) -> Self {
        let pass = parts.iter().all(|p| p.0);
        Self::new(pass, parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join(" | "))
    }
}

fn claims_or_fail(name: &str, suites: &[Suite]) -> Result<Vec<treewalk_core::renewal::Claim>, Outcome> {
    run_claims(&experiment(name), suites).map_err(|e| Outcome::new(false, format!("{name}: {e}")))
}

fn algebra() -> Outcome {
    let mut parts = Vec::new();
    for r in ["2", "3", "lamplighter"] {
        let exp = experiment_from(&two_atom_config(r));
        match run_claims(&exp, &[Suite::Algebra]) {
            Ok(claims) => {
                for id in [
                    "group-axioms",
                    "decomposition",
                    "meet-equivariance",
                    "theta-scaling",
                    "norm",
                ] {
                    let (ok, d) = all_pass(&claims, &format!("algebra/{id}"));
                    parts.push((ok, format!("{r}: {d}")));
                }
            }
            Err(e) => parts.push((false, format!("{r}: {e}"))),
        }
    }
    Outcome::all(parts)
}

fn isometry() -> Outcome {
    let mut parts = Vec::new();
    for p in ["2", "3"] {
        match run_claims(&experiment_from(&two_atom_config(p)), &[Suite::Algebra]) {
            Ok(claims) => {
                let (ok, d) = all_pass(&claims, "algebra/isometry");
                parts.push((ok, format!("p = {p}: {d}")));
            }
            Err(e) => parts.push((false, e)),
        }
    }
    Outcome::all(parts)
}

fn wald() -> Outcome {
    match claims_or_fail("padic_ascending.toml", &[Suite::Wald]) {
        Ok(c) => Outcome::all(vec![all_pass(&c, "wald/mass"), all_pass(&c, "wald/residual")]),
        Err(o) => o,
    }
}

fn regimes() -> Outcome {
    let mut parts = Vec::new();
    for (name, id) in [
        ("padic_descending.toml", "regimes/escape-below"),
        ("padic_ascending.toml", "regimes/prefix-stable"),
        ("padic_centered.toml", "regimes/recurrent-extremes"),
    ] {
        match claims_or_fail(name, &[Suite::Regimes]) {
            Ok(c) => parts.push(all_pass(&c, id)),
            Err(o) => return o,
        }
    }
    Outcome::all(parts)
}

fn regime_claim(id: &str) -> Outcome {
    match claims_or_fail("padic_ascending.toml", &[Suite::Regimes]) {
        Ok(c) => {
            let (ok, d) = all_pass(&c, id);
            Outcome::new(ok, d)
        }
        Err(o) => o,
    }
}

fn oracle() -> Outcome {
    let rows = oracle_rows(&experiment("oracle.toml"));
    let worst = rows.iter().max_by(|a, b| a.z.total_cmp(&b.z)).expect("cylinders");
    let failing: Vec<String> = rows
        .iter()
        .filter(|r| r.z.is_nan() || r.z > 3.0)
        .map(|r| {
            format!(
                "{}: {:.5} vs exact {:.5} (z = {:.2})",
                r.cylinder, r.estimate.value, r.exact, r.z
            )
        })
        .collect();
    let detail = if failing.is_empty() {
        format!(
            "{} cylinders; largest z = {:.2} on {}",
            rows.len(),
            worst.z,
            worst.cylinder
        )
    } else {
        failing.join("; ")
    };
    Outcome::new(failing.is_empty(), detail)
}

fn boundary_limit() -> Outcome {
    match claims_or_fail("padic_descending.toml", &[Suite::BoundaryLimit]) {
        Ok(c) => {
            let stable = all_pass(&c, "boundary-limit/stable/");
            let limit = all_pass(&c, "boundary-limit/limit/");
            let counts = (
                select(&c, "boundary-limit/stable/").len(),
                select(&c, "boundary-limit/limit/").len(),
            );
            Outcome::all(vec![
                stable,
                limit,
                (counts == (3, 3), format!("{counts:?} pairwise and limit comparisons")),
            ])
        }
        Err(o) => o,
    }
}

fn null_limits() -> Outcome {
    let mut parts = Vec::new();
    match claims_or_fail("padic_ascending.toml", &[Suite::BoundaryLimit, Suite::OmegaLimit]) {
        Ok(c) => {
            parts.push(all_pass(&c, "boundary-limit/null/30/"));
            parts.push(all_pass(&c, "omega-limit/descend/30/"));
        }
        Err(o) => return o,
    }
    match claims_or_fail("padic_descending.toml", &[Suite::OmegaLimit]) {
        Ok(c) => {
            parts.push(all_pass(&c, "omega-limit/descend/30/"));
            parts.push(all_pass(&c, "omega-limit/ascend-escape/30/"));
        }
        Err(o) => return o,
    }
    match claims_or_fail("padic_centered.toml", &[Suite::OmegaLimit]) {
        Ok(c) => parts.push(all_pass(&c, "omega-limit/descend/30/")),
        Err(o) => return o,
    }
    Outcome::all(parts)
}

fn renewal() -> Outcome {
    match claims_or_fail("padic_ascending.toml", &[Suite::Renewal]) {
        Ok(c) => {
            let n = select(&c, "renewal/identity/").len();
            Outcome::all(vec![
                all_pass(&c, "renewal/identity/"),
                (n >= 2, format!("{n} product cylinders")),
            ])
        }
        Err(o) => o,
    }
}

fn periods() -> Outcome {
    match claims_or_fail("padic_descending.toml", &[Suite::BoundaryLimit]) {
        Ok(c) => {
            let n = select(&c, "boundary-limit/period/").len();
            Outcome::all(vec![
                all_pass(&c, "boundary-limit/period/"),
                (n == 3, format!("{n} horocyclic directions")),
            ])
        }
        Err(o) => o,
    }
}

/// Small-count copy of a shipped config; later keys override earlier ones.
fn reduced(name: &str, dir: &Path) -> std::path::PathBuf {
    let text = common::config_text(name)
        + "\n[experiment]\ntrajectories = 200\nhorizon = 2000\nboundary_samples = 500\nexcursions = 5000\n\
           kernel_trajectories = 300\nkernel_horizon = 2000\nlimit_samples = 2000\ntail_trajectories = 100\n\
           tail_steps = 200\nalgebra_cases = 300\ncontraction_trajectories = 20\n";
    let path = dir.join(name);
    std::fs::write(&path, text).expect("write config");
    path
}

fn run_twice(args: &[&str], dir: &Path, files: &[&str]) -> (bool, String) {
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("run{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_treewalk"))
            .args(args)
            .arg("--out")
            .arg(&out)
            .output()
            .expect("run treewalk");
        let bytes: Vec<Vec<u8>> = files
            .iter()
            .map(|f| std::fs::read(out.join(f)).unwrap_or_default())
            .collect();
        outputs.push((status.status.code(), bytes));
    }
    let same = outputs[0] == outputs[1] && outputs[0].1.iter().all(|b| !b.is_empty());
    (
        same,
        format!(
            "{} {}: {}",
            args[0],
            args[2],
            if same { "identical" } else { "differs" }
        ),
    )
}

fn determinism() -> Outcome {
    let mut parts = Vec::new();
    for name in [
        "padic_ascending.toml",
        "padic_descending.toml",
        "padic_centered.toml",
        "lamplighter.toml",
    ] {
        let dir = tempfile::tempdir().expect("tempdir");
        let cfg = reduced(name, dir.path());
        let cfg = cfg.to_str().expect("utf-8 path");
        parts.push(run_twice(
            &["verify", "--config", cfg, "--suite", "all"],
            dir.path(),
            &["report.json", "kernel_values.csv"],
        ));
        parts.push(run_twice(
            &["simulate", "--config", cfg, "--dump"],
            dir.path(),
            &["report.json", "trajectories.csv"],
        ));
    }
    Outcome::all(parts)
}

/// Title, runtime limit, check.
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (
            "algebra suite over Q_2, Q_3 and the lamplighter tree",
            Some(Duration::from_secs(30)),
            algebra,
        ),
        (
            "p-adic isometry of the boundary",
            Some(Duration::from_secs(10)),
            isometry,
        ),
        ("Wald mass 1/drift", Some(Duration::from_secs(120)), wald),
        ("regime trichotomy", Some(Duration::from_secs(120)), regimes),
        ("no atoms in the limit law", Some(Duration::from_secs(120)), || {
            regime_claim("regimes/non-atomic")
        }),
        ("invariance of the limit law", Some(Duration::from_secs(120)), || {
            regime_claim("regimes/invariance")
        }),
        ("kernel against the exact chain", Some(Duration::from_secs(60)), oracle),
        (
            "boundary limit for negative drift",
            Some(Duration::from_secs(300)),
            boundary_limit,
        ),
        ("null limits", Some(Duration::from_secs(300)), null_limits),
        ("renewal identity", Some(Duration::from_secs(300)), renewal),
        ("period invariance", Some(Duration::from_secs(180)), periods),
        ("byte-identical reruns", None, determinism),
    ];
    let mut failed = 0;
    for (i, (title, limit, check)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let elapsed = started.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = outcome.pass && in_time;
        failed += !pass as usize;
        let budget = limit.map_or("no limit".to_string(), |l| format!("limit {} s", l.as_secs()));
        println!(
            "{} criterion {:>2}: {title} [{:.1} s, {budget}] {}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
