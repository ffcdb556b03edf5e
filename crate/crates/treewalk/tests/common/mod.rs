#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use treewalk::config::{self, Experiment, Setup};
use treewalk::parallel::Rayon;
use treewalk::realization::Realization;
use treewalk::suites::{self, Suite};
use treewalk_core::affine::Cylinder;
use treewalk_core::padic_tree::PAdicTree;
use treewalk_core::renewal::{potential_kernel, Claim, Verdict};
use treewalk_core::rng::{label_of, StreamFamily};
use treewalk_core::stats::Estimate;
use treewalk_core::tree::AffineTree;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

pub fn config_text(name: &str) -> String {
    std::fs::read_to_string(config_path(name)).expect("config file")
}

pub fn experiment(name: &str) -> Experiment {
    experiment_from(&config_text(name))
}

pub fn experiment_from(text: &str) -> Experiment {
    config::parse_config(text).unwrap_or_else(|e| panic!("config rejected: {e}"))
}

/// A two-atom drift-one-half law over `Q_p` or the lamplighter tree.
pub fn two_atom_config(realization: &str) -> String {
    let (header, up, down) = match realization {
        "lamplighter" => (
            "kind = lamplighter\nq = 2".to_string(),
            "lamp(shift = 1, lamps = [])".to_string(),
            "lamp(shift = -1, lamps = [0:1])".to_string(),
        ),
        p => (
            format!("kind = padic\np = {p}\nprecision = 48"),
            format!("affine(t = 0, a = {p})"),
            format!("affine(t = 1, a = 1/{p})"),
        ),
    };
    format!("[realization]\n{header}\n\n[law]\natom = {up} @ 3/4\natom = {down} @ 1/4\n")
}

fn claims_of<T: Realization>(s: &Setup<T>, suites: &[Suite]) -> Result<Vec<Claim>, String> {
    let mut out = Vec::new();
    for &suite in suites {
        let o = suites::run_suite(s, suite, &Rayon).map_err(|e| format!("{}: {e}", suite.name()))?;
        out.extend(o.claims);
    }
    Ok(out)
}

pub fn run_claims(exp: &Experiment, suites: &[Suite]) -> Result<Vec<Claim>, String> {
    match exp {
        Experiment::Padic(s) => claims_of(s, suites),
        Experiment::Lamplighter(s) => claims_of(s, suites),
    }
}

/// Claims whose id starts with `prefix`.
pub fn select<'a>(claims: &'a [Claim], prefix: &str) -> Vec<&'a Claim> {
    claims.iter().filter(|c| c.id.starts_with(prefix)).collect()
}

/// True when at least one claim matches and all matching claims pass.
pub fn all_pass(claims: &[Claim], prefix: &str) -> (bool, String) {
    let sel = select(claims, prefix);
    let ok = !sel.is_empty() && sel.iter().all(|c| c.verdict == Verdict::Pass);
    let detail = if sel.is_empty() {
        format!("no claim {prefix}")
    } else {
        sel.iter()
            .map(|c| format!("{} {}: {}", c.verdict.as_str(), c.id, c.detail))
            .collect::<Vec<_>>()
            .join("; ")
    };
    (ok, detail)
}

pub struct OracleRow {
    pub cylinder: String,
    pub exact: f64,
    pub estimate: Estimate,
    pub z: f64,
}

fn padic(exp: &Experiment) -> &Setup<PAdicTree> {
    match exp {
        Experiment::Padic(s) => s,
        Experiment::Lamplighter(_) => panic!("oracle law is over Q_2"),
    }
}

pub fn to_cylinder(s: &Setup<PAdicTree>, c: &oracle::DyadicCylinder) -> Cylinder<treewalk_core::padic_tree::Disc> {
    let parse = |d: &oracle::DyadicDisc| s.tree.parse_vertex(&d.literal()).expect("disc literal");
    let (xs, ys): (Vec<_>, Vec<_>) = c.pairs.iter().map(|(x, y)| (parse(x), parse(y))).unzip();
    Cylinder::new(&s.tree, xs, ys).expect("consistent cylinder")
}

/// Monte Carlo `e*U(f)` against the exact occupation on every test cylinder.
pub fn oracle_rows(exp: &Experiment) -> Vec<OracleRow> {
    let s = padic(exp);
    let cylinders = oracle::test_cylinders();
    let exact = oracle::occupation(&cylinders, None);
    let opts = suites::kernel_options(&s.params);
    let fam = StreamFamily::new(s.params.seed, label_of("oracle"));
    cylinders
        .iter()
        .zip(exact)
        .enumerate()
        .map(|(i, (c, exact))| {
            let f = to_cylinder(s, c);
            let k = potential_kernel(
                &s.tree,
                &s.tree.identity(),
                &f,
                &s.law,
                &opts,
                &Rayon,
                fam.child(i as u64),
            )
            .expect("kernel estimate");
            let estimate = k.estimate();
            let z = estimate.z_against(Estimate::exact(exact));
            let name = c
                .pairs
                .iter()
                .map(|(x, y)| format!("{} -> {}", x.literal(), y.literal()))
                .collect::<Vec<_>>();
            OracleRow {
                cylinder: name.join(", "),
                exact,
                estimate,
                z,
            }
        })
        .collect()
}
