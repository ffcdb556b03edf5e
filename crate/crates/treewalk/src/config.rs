//! Experiment configuration files.
//!
//! ```text
//! # comment
//! [realization]
//! kind = padic            # or lamplighter
//! p = 2                   # lamplighter: q = 2, window = 64
//! precision = 48
//! min_precision = 16
//!
//! [law]
//! atom = affine(t = 0, a = 2) @ 3/4
//! atom = affine(t = 1, a = 1/2) @ 1/4
//! allow_exceptional = false
//!
//! [experiment]
//! seed = 7
//! trajectories = 1000
//!
//! [cylinders]
//! cylinder = o -> o
//! cylinder = o, s -> s^-1, o
//! product = disc(center = 0, height = 1) x {0, 1}
//! period = affine(t = 0, a = 3)
//! b = affine(t = 1, a = 1)
//! ```

use std::fmt;

use serde::Serialize;
use treewalk_core::affine::Cylinder;
use treewalk_core::lamplighter::LampTree;
use treewalk_core::law::{StepLaw, ValidationReport};
use treewalk_core::padic::{PrecisionBudget, Qp};
use treewalk_core::padic_tree::PAdicTree;
use treewalk_core::walk::{BoundaryLimitOptions, DEFAULT_STEP_BUDGET};
use treewalk_core::Rational;

use crate::literal::{parse_int, parse_rational, split_top_level};
use crate::realization::Realization;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Located {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Located {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{}", join(.0))]
    Syntax(Vec<Located>),
    #[error("invalid law: {0}")]
    Law(treewalk_core::Error),
}

fn join(errs: &[Located]) -> String {
    errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RealizationSpec {
    Padic { p: u32, precision: u32, min_precision: u32 },
    Lamplighter { q: u32, window: i64 },
}

/// Numeric experiment parameters; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params {
    pub seed: u64,
    pub trajectories: u64,
    pub horizon: u64,
    pub dump_trajectories: u64,
    pub threshold: i64,
    pub extreme: i64,
    pub algebra_cases: u64,
    pub excursions: u64,
    pub boundary_samples: u64,
    pub depth: i64,
    pub invariance_depth: i64,
    pub prefix_extension: u64,
    pub kernel_trajectories: u64,
    pub kernel_horizon: u64,
    pub limit_samples: u64,
    pub n_list: Option<Vec<i64>>,
    pub omega_n_list: Vec<i64>,
    pub period_n: i64,
    pub z_max: i64,
    pub max_truncation: f64,
    pub tol: f64,
    pub stop_margin: i64,
    pub min_steps: u64,
    pub tail_steps: u64,
    pub tail_trajectories: u64,
    pub stable_epochs: u32,
    pub margin: i64,
    pub step_budget: u64,
    pub epsilon: f64,
    pub contraction_trajectories: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            seed: 0,
            trajectories: 1000,
            horizon: 10_000,
            dump_trajectories: 10,
            threshold: 20,
            extreme: 10,
            algebra_cases: 10_000,
            excursions: 100_000,
            boundary_samples: 10_000,
            depth: 4,
            invariance_depth: 3,
            prefix_extension: 1000,
            kernel_trajectories: 100_000,
            kernel_horizon: 100_000,
            limit_samples: 100_000,
            n_list: None,
            omega_n_list: vec![10, 20, 30],
            period_n: 20,
            z_max: 64,
            max_truncation: 1e-3,
            tol: 3.0,
            stop_margin: 15,
            min_steps: 50,
            tail_steps: 1000,
            tail_trajectories: 2000,
            stable_epochs: 3,
            margin: 20,
            step_budget: DEFAULT_STEP_BUDGET,
            epsilon: 0.1,
            contraction_trajectories: 200,
        }
    }
}

impl Params {
    pub fn limit_options(&self) -> BoundaryLimitOptions {
        BoundaryLimitOptions {
            stable_epochs: self.stable_epochs,
            margin: self.margin,
            step_budget: self.step_budget,
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("expected a number, found `{v}`"))
        }
        fn list(v: &str) -> Result<Vec<i64>, String> {
            split_top_level(v).into_iter().map(parse_int).collect()
        }
        match key {
            "seed" => self.seed = num(value)?,
            "trajectories" => self.trajectories = num(value)?,
            "horizon" => self.horizon = num(value)?,
            "dump_trajectories" => self.dump_trajectories = num(value)?,
            "threshold" => self.threshold = num(value)?,
            "extreme" => self.extreme = num(value)?,
            "algebra_cases" => self.algebra_cases = num(value)?,
            "excursions" => self.excursions = num(value)?,
            "boundary_samples" => self.boundary_samples = num(value)?,
            "depth" => self.depth = num(value)?,
            "invariance_depth" => self.invariance_depth = num(value)?,
            "prefix_extension" => self.prefix_extension = num(value)?,
            "kernel_trajectories" => self.kernel_trajectories = num(value)?,
            "kernel_horizon" => self.kernel_horizon = num(value)?,
            "limit_samples" => self.limit_samples = num(value)?,
            "n_list" => self.n_list = Some(list(value)?),
            "omega_n_list" => self.omega_n_list = list(value)?,
            "period_n" => self.period_n = num(value)?,
            "z_max" => self.z_max = num(value)?,
            "max_truncation" => self.max_truncation = num(value)?,
            "tol" => self.tol = num(value)?,
            "stop_margin" => self.stop_margin = num(value)?,
            "min_steps" => self.min_steps = num(value)?,
            "tail_steps" => self.tail_steps = num(value)?,
            "tail_trajectories" => self.tail_trajectories = num(value)?,
            "stable_epochs" => self.stable_epochs = num(value)?,
            "margin" => self.margin = num(value)?,
            "step_budget" => self.step_budget = num(value)?,
            "epsilon" => self.epsilon = num(value)?,
            "contraction_trajectories" => self.contraction_trajectories = num(value)?,
            _ => return Err(format!("unknown experiment key `{key}`")),
        }
        Ok(())
    }

    fn check(&self) -> Result<(), String> {
        if self.trajectories < 1 {
            return Err("trajectories must be at least 1".into());
        }
        if self.horizon < 1 {
            return Err("horizon must be at least 1".into());
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err("tol must be positive".into());
        }
        Ok(())
    }
}

/// Syntactically valid configuration; literals are still text.
#[derive(Clone, Debug)]
pub struct RawConfig {
    pub realization: RealizationSpec,
    pub atoms: Vec<(usize, String, Rational)>,
    pub allow_exceptional: bool,
    pub params: Params,
    pub cylinders: Vec<(usize, Vec<String>, Vec<String>)>,
    pub products: Vec<(usize, String, Vec<i64>)>,
    pub periods: Vec<(usize, String)>,
    pub direction: Option<(usize, String)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Realization,
    Law,
    Experiment,
    Cylinders,
}

pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    let mut errors = Vec::new();
    let mut section = Section::None;
    let mut kind: Option<(usize, String)> = None;
    let mut fields: Vec<(usize, String, String)> = Vec::new();
    let mut atoms = Vec::new();
    let mut allow_exceptional = false;
    let mut params = Params::default();
    let mut cylinders = Vec::new();
    let mut products = Vec::new();
    let mut periods = Vec::new();
    let mut direction = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut err = |message: String| errors.push(Located { line, message });
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "realization" => Section::Realization,
                "law" => Section::Law,
                "experiment" => Section::Experiment,
                "cylinders" => Section::Cylinders,
                other => {
                    err(format!("unknown section `[{other}]`"));
                    Section::None
                }
            };
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            err(format!("expected `key = value`, found `{content}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        match section {
            Section::None => err(format!("`{key}` appears before any section")),
            Section::Realization => {
                if key == "kind" {
                    kind = Some((line, value.to_string()));
                } else {
                    fields.push((line, key.to_string(), value.to_string()));
                }
            }
            Section::Law => match key {
                "atom" => match value.rsplit_once('@') {
                    Some((elem, w)) => match parse_rational(w) {
                        Ok(w) => atoms.push((line, elem.trim().to_string(), w)),
                        Err(e) => err(e),
                    },
                    None => err("expected `atom = <element> @ <weight>`".into()),
                },
                "allow_exceptional" => match value {
                    "true" => allow_exceptional = true,
                    "false" => allow_exceptional = false,
                    _ => err(format!("expected true or false, found `{value}`")),
                },
                _ => err(format!("unknown law key `{key}`")),
            },
            Section::Experiment => {
                if let Err(e) = params.set(key, value) {
                    err(e);
                }
            }
            Section::Cylinders => match key {
                "cylinder" => match value.split_once("->") {
                    Some((s, t)) => {
                        let s: Vec<String> = split_top_level(s).into_iter().map(String::from).collect();
                        let t: Vec<String> = split_top_level(t).into_iter().map(String::from).collect();
                        if s.len() != t.len() || s.is_empty() {
                            err("sources and targets must be non-empty lists of equal length".into());
                        } else {
                            cylinders.push((line, s, t));
                        }
                    }
                    None => err("expected `cylinder = x1, .. -> y1, ..`".into()),
                },
                "product" => match value.rsplit_once(" x ") {
                    Some((disc, zs)) => {
                        let inner = zs.trim().strip_prefix('{').and_then(|z| z.strip_suffix('}'));
                        match inner.map(|z| {
                            split_top_level(z)
                                .into_iter()
                                .map(parse_int)
                                .collect::<Result<Vec<_>, _>>()
                        }) {
                            Some(Ok(z)) => products.push((line, disc.trim().to_string(), z)),
                            Some(Err(e)) => err(e),
                            None => err("expected a z-set `{z1, z2, ..}`".into()),
                        }
                    }
                    None => err("expected `product = <vertex> x {z1, ..}`".into()),
                },
                "period" => periods.push((line, value.to_string())),
                "b" => direction = Some((line, value.to_string())),
                _ => err(format!("unknown cylinders key `{key}`")),
            },
        }
    }
    let realization = match kind {
        None => {
            errors.push(Located {
                line: 0,
                message: "missing `kind` in [realization]".into(),
            });
            None
        }
        Some((line, k)) => match realization_spec(&k, &fields) {
            Ok(r) => Some(r),
            Err(message) => {
                errors.push(Located { line, message });
                None
            }
        },
    };
    if atoms.is_empty() {
        errors.push(Located {
            line: 0,
            message: "the law has no atoms".into(),
        });
    }
    if let Err(message) = params.check() {
        errors.push(Located { line: 0, message });
    }
    match realization {
        Some(realization) if errors.is_empty() => Ok(RawConfig {
            realization,
            atoms,
            allow_exceptional,
            params,
            cylinders,
            products,
            periods,
            direction,
        }),
        _ => {
            errors.sort_by_key(|e| e.line);
            Err(ConfigError::Syntax(errors))
        }
    }
}

fn realization_spec(kind: &str, fields: &[(usize, String, String)]) -> Result<RealizationSpec, String> {
    let get = |k: &str| fields.iter().find(|(_, key, _)| key == k).map(|(_, _, v)| v.as_str());
    let allowed: &[&str] = match kind {
        "padic" => &["p", "precision", "min_precision"],
        "lamplighter" => &["q", "window"],
        other => return Err(format!("unknown realization kind `{other}`")),
    };
    if let Some((line, key, _)) = fields.iter().find(|(_, k, _)| !allowed.contains(&k.as_str())) {
        return Err(format!("`{key}` (line {line}) does not apply to {kind}"));
    }
    let num = |k: &str, default: i64| -> Result<i64, String> { get(k).map(parse_int).unwrap_or(Ok(default)) };
    let defaults = PrecisionBudget::default();
    match kind {
        "padic" => Ok(RealizationSpec::Padic {
            p: u32::try_from(num("p", 2)?).map_err(|_| "p out of range".to_string())?,
            precision: u32::try_from(num("precision", defaults.working_precision as i64)?)
                .map_err(|_| "precision out of range".to_string())?,
            min_precision: u32::try_from(num("min_precision", defaults.min_acceptable as i64)?)
                .map_err(|_| "min_precision out of range".to_string())?,
        }),
        _ => Ok(RealizationSpec::Lamplighter {
            q: u32::try_from(num("q", 2)?).map_err(|_| "q out of range".to_string())?,
            window: num("window", treewalk_core::lamplighter::DEFAULT_WINDOW)?,
        }),
    }
}

/// A fully typed experiment over one realization.
pub struct Setup<T: Realization> {
    pub spec: RealizationSpec,
    pub tree: T,
    pub law: StepLaw<T::Elem>,
    pub validation: ValidationReport,
    pub params: Params,
    pub cylinders: Vec<Cylinder<T::Vertex>>,
    pub products: Vec<(T::Vertex, Vec<i64>)>,
    pub periods: Vec<T::Elem>,
    pub direction: Option<T::Elem>,
    pub allow_exceptional: bool,
    pub hash: String,
}

pub enum Experiment {
    Padic(Setup<PAdicTree>),
    Lamplighter(Setup<LampTree>),
}

impl Experiment {
    pub fn hash(&self) -> &str {
        match self {
            Experiment::Padic(s) => &s.hash,
            Experiment::Lamplighter(s) => &s.hash,
        }
    }

    pub fn params_mut(&mut self) -> &mut Params {
        match self {
            Experiment::Padic(s) => &mut s.params,
            Experiment::Lamplighter(s) => &mut s.params,
        }
    }

    pub fn params(&self) -> &Params {
        match self {
            Experiment::Padic(s) => &s.params,
            Experiment::Lamplighter(s) => &s.params,
        }
    }

    pub fn validation(&self) -> &ValidationReport {
        match self {
            Experiment::Padic(s) => &s.validation,
            Experiment::Lamplighter(s) => &s.validation,
        }
    }

    pub fn drift(&self) -> Rational {
        match self {
            Experiment::Padic(s) => s.law.drift(),
            Experiment::Lamplighter(s) => s.law.drift(),
        }
    }

    /// Recomputes the hash after parameter overrides.
    pub fn rehash(&mut self) {
        match self {
            Experiment::Padic(s) => s.rehash(),
            Experiment::Lamplighter(s) => s.rehash(),
        }
    }
}

/// Parses and builds the law; the law is not required to be non-exceptional.
pub fn load(text: &str) -> Result<Experiment, ConfigError> {
    let raw = parse_raw(text)?;
    match raw.realization {
        RealizationSpec::Padic {
            p,
            precision,
            min_precision,
        } => {
            let budget = PrecisionBudget::new(precision, min_precision).map_err(|e| {
                ConfigError::Syntax(vec![Located {
                    line: 0,
                    message: e.to_string(),
                }])
            })?;
            let field = Qp::new(p, budget).map_err(|e| {
                ConfigError::Syntax(vec![Located {
                    line: 0,
                    message: e.to_string(),
                }])
            })?;
            Ok(Experiment::Padic(build(PAdicTree::new(field), raw)?))
        }
        RealizationSpec::Lamplighter { q, window } => {
            let tree = LampTree::with_window(q, window).map_err(|e| {
                ConfigError::Syntax(vec![Located {
                    line: 0,
                    message: e.to_string(),
                }])
            })?;
            Ok(Experiment::Lamplighter(build(tree, raw)?))
        }
    }
}

/// [`load`], then rejects exceptional laws unless the config allows them.
pub fn parse_config(text: &str) -> Result<Experiment, ConfigError> {
    let exp = load(text)?;
    let v = exp.validation();
    let allowed = match &exp {
        Experiment::Padic(s) => s.allow_exceptional,
        Experiment::Lamplighter(s) => s.allow_exceptional,
    };
    if !v.strict_pass() && !allowed {
        return Err(ConfigError::Law(treewalk_core::Error::NonExceptional(
            v.reasons.join("; "),
        )));
    }
    Ok(exp)
}

impl<T: Realization> Setup<T> {
    /// Recomputes the hash after parameter overrides.
    pub fn rehash(&mut self) {
        self.hash = semantic_hash(self);
    }
}

fn build<T: Realization>(tree: T, raw: RawConfig) -> Result<Setup<T>, ConfigError> {
    let mut errors = Vec::new();
    let mut atoms = Vec::new();
    for (line, lit, w) in &raw.atoms {
        match tree.parse_element(lit) {
            Ok(g) => atoms.push((g, *w)),
            Err(message) => errors.push(Located { line: *line, message }),
        }
    }
    let mut cylinders = Vec::new();
    for (line, s, t) in &raw.cylinders {
        let parse_all = |xs: &[String]| xs.iter().map(|x| tree.parse_vertex(x)).collect::<Result<Vec<_>, _>>();
        match (parse_all(s), parse_all(t)) {
            (Ok(s), Ok(t)) => match Cylinder::new(&tree, s, t) {
                Ok(c) => cylinders.push(c),
                Err(e) => errors.push(Located {
                    line: *line,
                    message: e.to_string(),
                }),
            },
            (Err(message), _) | (_, Err(message)) => errors.push(Located { line: *line, message }),
        }
    }
    let mut products = Vec::new();
    for (line, d, z) in &raw.products {
        match tree.parse_vertex(d) {
            Ok(v) => products.push((v, z.clone())),
            Err(message) => errors.push(Located { line: *line, message }),
        }
    }
    let mut element = |line: usize, lit: &str| match tree.parse_element(lit) {
        Ok(g) => Some(g),
        Err(message) => {
            errors.push(Located { line, message });
            None
        }
    };
    let mut periods: Vec<T::Elem> = raw.periods.iter().filter_map(|(l, p)| element(*l, p)).collect();
    let direction = raw.direction.as_ref().and_then(|(l, b)| element(*l, b));
    if !errors.is_empty() {
        return Err(ConfigError::Syntax(errors));
    }
    if periods.is_empty() {
        periods = tree.default_periods();
    }
    let law = StepLaw::new(&tree, atoms, true).map_err(ConfigError::Law)?;
    let validation = law.validation().clone();
    let mut setup = Setup {
        spec: raw.realization,
        tree,
        law,
        validation,
        params: raw.params,
        cylinders,
        products,
        periods,
        direction,
        allow_exceptional: raw.allow_exceptional,
        hash: String::new(),
    };
    setup.rehash();
    Ok(setup)
}

#[derive(Serialize)]
struct Canonical<'a> {
    realization: &'a RealizationSpec,
    atoms: Vec<(String, String)>,
    allow_exceptional: bool,
    params: &'a Params,
    cylinders: Vec<(Vec<String>, Vec<String>)>,
    products: Vec<(String, Vec<i64>)>,
    periods: Vec<String>,
    direction: Option<String>,
}

/// SHA-256 of the canonical form of every field that affects results.
fn semantic_hash<T: Realization>(s: &Setup<T>) -> String {
    use sha2::{Digest, Sha256};
    let strings = |xs: &[T::Vertex]| xs.iter().map(ToString::to_string).collect::<Vec<_>>();
    let c = Canonical {
        realization: &s.spec,
        atoms: s
            .law
            .atoms()
            .iter()
            .map(|a| (a.element.to_string(), a.weight.to_string()))
            .collect(),
        allow_exceptional: s.allow_exceptional,
        params: &s.params,
        cylinders: s
            .cylinders
            .iter()
            .map(|c| (strings(c.sources()), strings(c.targets())))
            .collect(),
        products: s.products.iter().map(|(v, z)| (v.to_string(), z.clone())).collect(),
        periods: s.periods.iter().map(ToString::to_string).collect(),
        direction: s.direction.as_ref().map(ToString::to_string),
    };
    let bytes = serde_json::to_vec(&c).expect("canonical form serializes");
    hex::encode(Sha256::digest(&bytes))
}
