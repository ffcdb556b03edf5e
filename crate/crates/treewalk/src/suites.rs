//! Verification suites: each turns estimator output into claims.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use treewalk_core::affine::{decompose, elem_norm, is_horocyclic, recompose, Cylinder};
use treewalk_core::renewal::{
    descend_sequence, estimate_m_misinv, invariance_residual_test, to_f64, verify_boundary_limit,
    verify_direction_invariance, verify_omega_limit, verify_renewal_identity, wald_mass_check, Claim, KernelOptions,
    KernelRow, MisinvOptions, OmegaRegime, RenewalOptions, Verdict,
};
use treewalk_core::rng::{label_of, RandomStream, StreamFamily};
use treewalk_core::runner::TrialRunner;
use treewalk_core::stats::{proportion, Estimate};
use treewalk_core::tree::{theta, AffineTree, End, Norm, NormBound, Point};
use treewalk_core::walk::{
    height_regime_report, local_contraction_statistic, prefix_drop_frequency, prefix_is_stable, sample_boundary_limit,
};
use treewalk_core::{Error, Result};

use crate::config::Setup;
use crate::realization::Realization;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Algebra,
    Regimes,
    Wald,
    Renewal,
    BoundaryLimit,
    OmegaLimit,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Algebra,
        Suite::Regimes,
        Suite::Wald,
        Suite::Renewal,
        Suite::BoundaryLimit,
        Suite::OmegaLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Regimes => "regimes",
            Suite::Wald => "wald",
            Suite::Renewal => "renewal",
            Suite::BoundaryLimit => "boundary-limit",
            Suite::OmegaLimit => "omega-limit",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A suite name, or `all`.
pub fn parse_suites(s: &str) -> std::result::Result<Vec<Suite>, String> {
    if s == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    s.split(',').map(|x| Suite::from_str(x.trim())).collect()
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// A named sequence of kernel estimates, one CSV block.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub rows: Vec<KernelRow>,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOutput {
    pub claims: Vec<Claim>,
    pub series: Vec<Series>,
    /// Suite-specific tables for the JSON report.
    pub data: BTreeMap<String, Value>,
}

pub fn family(seed: u64, suite: Suite) -> StreamFamily {
    StreamFamily::new(seed, label_of(suite.name()))
}

pub fn kernel_options(s: &crate::config::Params) -> KernelOptions {
    KernelOptions {
        trajectories: s.kernel_trajectories,
        horizon: s.kernel_horizon,
        stop_margin: s.stop_margin,
        min_steps: s.min_steps,
        tail_steps: s.tail_steps,
        tail_trajectories: s.tail_trajectories,
        tail_tolerance: None,
    }
}

pub fn run_suite<T: Realization>(setup: &Setup<T>, suite: Suite, runner: &impl TrialRunner) -> Result<SuiteOutput> {
    let fam = family(setup.params.seed, suite);
    match suite {
        Suite::Algebra => algebra(setup, runner, fam),
        Suite::Regimes => regimes(setup, runner, fam),
        Suite::Wald => wald(setup, runner, fam),
        Suite::Renewal => renewal(setup, runner, fam),
        Suite::BoundaryLimit => boundary_limit(setup, runner, fam),
        Suite::OmegaLimit => omega_limit(setup, runner, fam),
    }
}

const ALGEBRA_CHECKS: [(&str, &str); 6] = [
    (
        "algebra/group-axioms",
        "(gh)k = g(hk), g id = id g = g, g g^-1 = g^-1 g = id, phi(gh) = phi(g) + phi(h)",
    ),
    ("algebra/decomposition", "g = b(g) s^phi(g) with b(g) horocyclic"),
    ("algebra/meet-equivariance", "g(x ^ y) = gx ^ gy"),
    ("algebra/theta-scaling", "Theta(ga, gb) = q^-phi(g) Theta(a, b)"),
    ("algebra/norm", "|g^-1| = |g| and |gh| <= |g| + |h|"),
    ("algebra/isometry", "Theta(a, b) = |a - b|_p"),
];

/// Per-case failure flags with the first failing description.
type CaseOutcome = [Option<String>; 6];

fn algebra_case<T: Realization>(t: &T, s: &mut RandomStream) -> CaseOutcome {
    let g = t.random_element(s);
    let h = t.random_element(s);
    let k = t.random_element(s);
    let (a, b) = (t.random_end(s), t.random_end(s));
    let hx = s.below(13) as i64 - 4;
    let hy = s.below(13) as i64 - 4;
    let (ex, ey) = (t.random_end(s), t.random_end(s));
    let mut out: CaseOutcome = Default::default();
    let describe = |e: Error| e.to_string();
    out[0] = group_axioms(t, &g, &h, &k).err().map(describe);
    out[1] = (|| -> Result<Option<String>> {
        let (bg, n) = decompose(t, &g)?;
        let ok = is_horocyclic(t, &bg) && n == t.phi(&g) && t.same_element(&recompose(t, &bg, n)?, &g);
        Ok((!ok).then(|| format!("round trip fails for {g}")))
    })()
    .unwrap_or_else(|e| Some(e.to_string()));
    out[2] = (|| -> Result<Option<String>> {
        let x = t.boundary_vertex(&ex, hx)?;
        let y = t.boundary_vertex(&ey, hy)?;
        let lhs = t.act_vertex(&g, &t.meet_vertices(&x, &y))?;
        let rhs = t.meet_vertices(&t.act_vertex(&g, &x)?, &t.act_vertex(&g, &y)?);
        Ok((lhs != rhs).then(|| format!("g = {g}, x = {x}, y = {y}: {lhs} vs {rhs}")))
    })()
    .unwrap_or_else(|e| Some(e.to_string()));
    out[3] = (|| -> Result<Option<String>> {
        let end = |e: &T::Boundary| Point::End(End::Bottom(e.clone()));
        let before = theta(t, &end(&a), &end(&b))?;
        let after = theta(t, &end(&t.act_boundary(&g, &a)?), &end(&t.act_boundary(&g, &b)?))?;
        let ok = match (before, after) {
            (NormBound { value: Norm::Zero, .. }, NormBound { value: Norm::Zero, .. }) => true,
            (
                NormBound {
                    value: Norm::Power { exponent: e0, .. },
                    upper_bound: u0,
                },
                NormBound {
                    value: Norm::Power { exponent: e1, .. },
                    upper_bound: u1,
                },
            ) => e1 == e0 - t.phi(&g) && u0 == u1,
            _ => false,
        };
        Ok((!ok).then(|| format!("g = {g}: {} then {}", before.value, after.value)))
    })()
    .unwrap_or_else(|e| Some(e.to_string()));
    out[4] = (|| -> Result<Option<String>> {
        let ng = elem_norm(t, &g)?;
        let ok = elem_norm(t, &t.invert(&g)?)? == ng && elem_norm(t, &t.compose(&g, &h)?)? <= ng + elem_norm(t, &h)?;
        Ok((!ok).then(|| format!("g = {g}, h = {h}")))
    })()
    .unwrap_or_else(|e| Some(e.to_string()));
    out[5] = (|| -> Result<Option<String>> {
        let Some(d) = t.field_distance(&a, &b) else {
            return Ok(None);
        };
        let th = theta(
            t,
            &Point::End(End::Bottom(a.clone())),
            &Point::End(End::Bottom(b.clone())),
        )?;
        Ok((th != d).then(|| format!("{a} vs {b}: {} and {}", th.value, d.value)))
    })()
    .unwrap_or_else(|e| Some(e.to_string()));
    out
}

fn group_axioms<T: AffineTree>(t: &T, g: &T::Elem, h: &T::Elem, k: &T::Elem) -> Result<()> {
    let id = t.identity();
    let inv = t.invert(g)?;
    let gh = t.compose(g, h)?;
    let ok = t.same_element(&t.compose(&gh, k)?, &t.compose(g, &t.compose(h, k)?)?)
        && t.same_element(&t.compose(g, &id)?, g)
        && t.same_element(&t.compose(&id, g)?, g)
        && t.same_element(&t.compose(g, &inv)?, &id)
        && t.same_element(&t.compose(&inv, g)?, &id)
        && t.phi(&gh) == t.phi(g) + t.phi(h);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidLiteral(format!(
            "axioms fail for g = {g}, h = {h}, k = {k}"
        )))
    }
}

fn algebra<T: Realization>(setup: &Setup<T>, runner: &impl TrialRunner, fam: StreamFamily) -> Result<SuiteOutput> {
    let t = &setup.tree;
    let n = setup.params.algebra_cases;
    let cases = runner.map(n, |i| algebra_case(t, &mut fam.stream(i)));
    let mut out = SuiteOutput::default();
    for (j, (id, anchor)) in ALGEBRA_CHECKS.iter().enumerate() {
        if j == 5 && t.field_distance(&t.homothety_center(), &t.homothety_center()).is_none() {
            out.claims.push(Claim::skipped(
                id,
                anchor,
                "no field structure on the boundary of this realization",
            ));
            continue;
        }
        let failures: Vec<&String> = cases.iter().filter_map(|c| c[j].as_ref()).collect();
        let mut c = Claim::new(id, anchor);
        c.estimate = failures.len() as f64;
        c.verdict = Verdict::from_bool(failures.is_empty());
        c.detail = match failures.first() {
            None => format!("{n} randomized cases, no failures"),
            Some(first) => format!("{} of {n} cases fail; first: {first}", failures.len()),
        };
        out.claims.push(c);
    }
    Ok(out)
}

fn fraction_claim(id: &str, anchor: &str, value: f64, at_least: f64, n: u64) -> Claim {
    let mut c = Claim::new(id, anchor);
    c.estimate = value;
    c.stderr = proportion((value * n as f64).round() as u64, n).stderr;
    c.tolerance = at_least;
    c.verdict = Verdict::from_bool(value >= at_least);
    c.detail = format!("{value:.4} of {n} trajectories (required >= {at_least})");
    c
}

fn regimes<T: Realization>(setup: &Setup<T>, runner: &impl TrialRunner, fam: StreamFamily) -> Result<SuiteOutput> {
    let (law, p) = (&setup.law, &setup.params);
    let drift = law.drift();
    let rep = height_regime_report(
        law,
        p.trajectories,
        p.horizon,
        p.threshold,
        p.extreme,
        runner,
        fam.child(1),
    );
    let mut out = SuiteOutput::default();
    out.data.insert("regime".into(), regime_json(&rep));
    let mut c = Claim::new(
        "regimes/classification",
        "sign of E[phi(X)] determines the limit of R_n",
    );
    c.verdict = Verdict::from_bool(rep.consistent());
    c.detail = format!(
        "expected: {}; observed: {}",
        rep.expected.describe(),
        rep.observed.describe()
    );
    out.claims.push(c);
    if drift.is_negative() {
        out.claims.push(fraction_claim(
            "regimes/escape-below",
            "drift < 0: phi(R_N) -> -inf",
            rep.fraction_below,
            0.99,
            p.trajectories,
        ));
    } else if drift.is_positive() {
        out.claims.push(fraction_claim(
            "regimes/escape-above",
            "drift > 0: phi(R_N) -> +inf",
            rep.fraction_above,
            0.99,
            p.trajectories,
        ));
        out.claims.push(prefix_stability(setup, runner, fam.child(2))?);
        let drop = prefix_drop_frequency(law, p.margin, p.trajectories, p.prefix_extension, runner, fam.child(3));
        let mut c = Claim::new(
            "regimes/prefix-drop-bound",
            "P[height later falls below its maximum by the margin]",
        );
        c.estimate = drop.value;
        c.stderr = drop.stderr;
        c.verdict = Verdict::Trend;
        c.detail = format!(
            "empirical failure probability of the stopping rule, margin {}",
            p.margin
        );
        out.claims.push(c);
        let (claim, table) = non_atomicity(setup, runner, fam.child(4))?;
        out.claims.push(claim);
        out.data.insert("disc_masses".into(), table);
        let (claim, table) = boundary_invariance(setup, runner, fam.child(5))?;
        out.claims.push(claim);
        out.data.insert("invariance".into(), table);
    } else {
        out.claims.push(fraction_claim(
            "regimes/recurrent-extremes",
            "drift = 0: max and min of phi(R_n) both unbounded",
            rep.fraction_both_extremes,
            0.95,
            p.trajectories,
        ));
        out.claims.push(local_contraction(setup, runner, fam.child(6))?);
    }
    Ok(out)
}

fn regime_json(rep: &treewalk_core::walk::RegimeReport) -> Value {
    json!({
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

fn prefix_stability<T: Realization>(setup: &Setup<T>, runner: &impl TrialRunner, fam: StreamFamily) -> Result<Claim> {
    let p = &setup.params;
    let stable = runner.map(p.trajectories, |i| {
        prefix_is_stable(
            &setup.tree,
            &setup.law,
            p.depth,
            p.limit_options(),
            p.prefix_extension,
            &mut fam.stream(i),
        )
    });
    let mut k = 0u64;
    for s in stable {
        k += s? as u64;
    }
    let frac = k as f64 / p.trajectories as f64;
    let mut c = fraction_claim(
        "regimes/prefix-stable",
        "drift > 0: R_n o converges to a bottom end",
        frac,
        0.99,
        p.trajectories,
    );
    c.detail = format!(
        "{c_detail}; depth-{d} prefix unchanged {ext} steps after detection",
        c_detail = c.detail,
        d = p.depth,
        ext = p.prefix_extension
    );
    Ok(c)
}

fn boundary_samples<T: Realization>(
    setup: &Setup<T>,
    depth: i64,
    n: u64,
    runner: &impl TrialRunner,
    fam: StreamFamily,
) -> Result<Vec<T::Boundary>> {
    let opts = setup.params.limit_options();
    runner
        .map(n, |i| {
            sample_boundary_limit(&setup.tree, &setup.law, depth, opts, &mut fam.stream(i)).map(|b| b.end)
        })
        .into_iter()
        .collect()
}

fn disc_counts<T: Realization>(t: &T, ends: &[T::Boundary], depth: i64) -> Result<BTreeMap<String, u64>> {
    let mut counts = BTreeMap::new();
    for e in ends {
        *counts.entry(t.boundary_vertex(e, depth)?.to_string()).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Counts of the ends below the origin, by depth-`depth` disc.
fn disc_counts_below_origin<T: Realization>(t: &T, ends: &[T::Boundary], depth: i64) -> Result<BTreeMap<String, u64>> {
    let o = t.origin();
    let mut counts = BTreeMap::new();
    for e in ends {
        if t.boundary_vertex(e, 0)? == o {
            *counts.entry(t.boundary_vertex(e, depth)?.to_string()).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

fn non_atomicity<T: Realization>(
    setup: &Setup<T>,
    runner: &impl TrialRunner,
    fam: StreamFamily,
) -> Result<(Claim, Value)> {
    let n = setup.params.boundary_samples;
    let depths = [2i64, 4, 6];
    let ends = boundary_samples(setup, 6, n, runner, fam)?;
    let mut maxima = Vec::new();
    for d in depths {
        let counts = disc_counts(&setup.tree, &ends, d)?;
        let (disc, top) = counts
            .iter()
            .max_by_key(|(_, c)| **c)
            .map(|(k, c)| (k.clone(), *c))
            .unwrap_or_default();
        maxima.push((d, disc, top as f64 / n as f64));
    }
    let decreasing = maxima.windows(2).all(|w| w[1].2 < w[0].2);
    let mut c = Claim::new("regimes/non-atomic", "the law of the limit end carries no point mass");
    c.estimate = maxima.last().map(|m| m.2).unwrap_or(0.0);
    c.verdict = Verdict::from_bool(decreasing);
    c.detail = maxima
        .iter()
        .map(|(d, disc, m)| format!("depth {d}: {m:.4} at {disc}"))
        .collect::<Vec<_>>()
        .join("; ");
    let table = json!(maxima
        .iter()
        .map(|(d, disc, m)| json!({"depth": d, "disc": disc, "max_mass": m}))
        .collect::<Vec<_>>());
    Ok((c, table))
}

fn boundary_invariance<T: Realization>(
    setup: &Setup<T>,
    runner: &impl TrialRunner,
    fam: StreamFamily,
) -> Result<(Claim, Value)> {
    let (t, law, p) = (&setup.tree, &setup.law, &setup.params);
    let n = p.boundary_samples;
    let d = p.invariance_depth;
    let direct = boundary_samples(setup, d, n, runner, fam.child(1))?;
    let deeper = boundary_samples(setup, d - law.min_phi().min(0), n, runner, fam.child(2))?;
    let steps = fam.child(3);
    let moved = deeper
        .iter()
        .enumerate()
        .map(|(i, e)| t.act_boundary(&law.sample(&mut steps.stream(i as u64)).element, e))
        .collect::<Result<Vec<_>>>()?;
    let a = disc_counts_below_origin(t, &direct, d)?;
    let b = disc_counts_below_origin(t, &moved, d)?;
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut worst = (0.0f64, String::new());
    let mut rows = Vec::new();
    for k in keys {
        let pa = proportion(*a.get(k).unwrap_or(&0), n);
        let pb = proportion(*b.get(k).unwrap_or(&0), n);
        let z = pa.z_against(pb);
        let z = if z.is_finite() { z } else { 0.0 };
        if z > worst.0 {
            worst = (z, k.clone());
        }
        rows.push(json!({"disc": k, "law_of_end": pa.value, "law_of_moved_end": pb.value, "z": z}));
    }
    let mut c = Claim::new("regimes/invariance", "law of X xi equals law of xi on every disc");
    c.estimate = worst.0;
    c.tolerance = p.tol;
    c.verdict = Verdict::from_bool(worst.0 <= p.tol);
    c.detail = format!(
        "{} depth-{d} discs below o; largest z = {:.3} at {}",
        rows.len(),
        worst.0,
        worst.1
    );
    Ok((c, Value::Array(rows)))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    if xs.is_empty() {
        0.0
    } else {
        xs[xs.len() / 2]
    }
}

fn local_contraction<T: Realization>(setup: &Setup<T>, runner: &impl TrialRunner, fam: StreamFamily) -> Result<Claim> {
    let p = &setup.params;
    let n = p.contraction_trajectories;
    let stat = |horizon: u64, f: StreamFamily| -> Result<f64> {
        let xs = runner
            .map(n, |i| {
                local_contraction_statistic(&setup.tree, &setup.law, horizon, &mut f.stream(i))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(median(xs))
    };
    let m1 = stat(p.horizon, fam.child(1))?;
    let m2 = stat(2 * p.horizon, fam.child(2))?;
    let mut c = Claim::new("regimes/local-contraction", "Theta(L_n v, L_n w) 1_K(L_n v) -> 0");
    c.estimate = m2;
    c.verdict = Verdict::Trend;
    c.detail = format!(
        "median statistic {m1:.3e} at N = {}, {m2:.3e} at N = {}",
        p.horizon,
        2 * p.horizon
    );
    Ok(c)
}

fn wald<T: Realization>(setup: &Setup<T>, runner: &impl TrialRunner, fam: StreamFamily) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let drift = setup.law.drift();
    if !drift.is_positive() {
        out.claims.push(Claim::skipped(
            "wald/mass",
            "E[l] / E[S_l] = 1 / E[phi(X)]",
            "needs a positive drift",
        ));
        return Ok(out);
    }
    let p = &setup.params;
    let w = wald_mass_check(&setup.law, p.excursions, p.step_budget, runner, fam)?;
    let exact = Estimate::exact(to_f64(w.exact));
    let mut c = Claim::agreement(
        "wald/mass",
        "m(boundary) = E[l] / E[S_l] = 1 / E[phi(X)]",
        w.ratio,
        exact,
        p.tol,
    );
    c.detail = format!(
        "E[l]/E[S_l] = {:.6} +- {:.6}, exact {}; {}",
        w.ratio.value, w.ratio.stderr, w.exact, c.detail
    );
    out.claims.push(c);
    out.claims.push(Claim::agreement(
        "wald/residual",
        "E[S_l] - E[phi(X)] E[l] = 0",
        w.residual,
        Estimate::exact(0.0),
        p.tol,
    ));
    out.data.insert(
        "wald".into(),
        json!({
            "excursions": w.excursions,
            "mean_length": w.mean_length.value,
            "mean_length_stderr": w.mean_length.stderr,
            "mean_rise": w.mean_rise.value,
            "mean_rise_stderr": w.mean_rise.stderr,
            "ratio": w.ratio.value,
            "ratio_stderr": w.ratio.stderr,
            "exact": w.exact.to_string(),
            "z": w.z,
        }),
    );
    Ok(out)
}

fn misinv_options(p: &crate::config::Params) -> MisinvOptions {
    MisinvOptions {
        excursions: p.excursions,
        step_budget: p.step_budget,
        limit: p.limit_options(),
    }
}

/// Depth-2 discs below `s^-1 o`.
fn residual_discs<T: Realization>(t: &T) -> Result<Vec<T::Vertex>> {
    let mut layer = vec![t.main_branch(-1)?];
    for _ in 0..3 {
        layer = layer
            .iter()
            .map(|v| treewalk_core::tree::sons(t, v))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
    }
    Ok(layer)
}

fn default_products<T: Realization>(t: &T) -> Result<Vec<(T::Vertex, Vec<i64>)>> {
    Ok(vec![
        (t.main_branch(1)?, vec![0, 1]),
        (t.son(&t.origin(), 1)?, vec![0, 1]),
    ])
}

fn renewal<T: Realization>(setup: &Setup<T>, runner: &impl TrialRunner, fam: StreamFamily) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let (t, law, p) = (&setup.tree, &setup.law, &setup.params);
    if !law.drift().is_positive() {
        let reason = if law.drift().is_zero() {
            "drift 0: E[l] is infinite and the estimators have no variance control"
        } else {
            "needs a positive drift"
        };
        out.claims
            .push(Claim::skipped("renewal/identity", "U . p(f) = (m x m_Z)(f)", reason));
        return Ok(out);
    }
    let discs = residual_discs(t)?;
    let tests = discs
        .iter()
        .map(|d| invariance_residual_test(t, law, d))
        .collect::<Result<Vec<_>>>()?;
    let m = estimate_m_misinv(t, law, &tests, &misinv_options(p), runner, fam.child(1))?;
    let mut c = Claim::agreement(
        "renewal/misinv-mass",
        "m(boundary) = 1 / E[phi(X)]",
        m.total,
        Estimate::exact(to_f64(law.drift().recip())),
        p.tol,
    );
    if m.heavy_tail_warning {
        c.detail.push_str("; heavy-tailed ladder time");
    }
    out.claims.push(c);
    let mut rows = Vec::new();
    for (d, r) in discs.iter().zip(&m.values) {
        out.claims.push(Claim::agreement(
            &format!("renewal/invariance/{d}"),
            "(mu * m)(D) = m(D)",
            *r,
            Estimate::exact(0.0),
            p.tol,
        ));
        rows.push(json!({"disc": d.to_string(), "residual": r.value, "stderr": r.stderr}));
    }
    out.data.insert("invariance_residuals".into(), Value::Array(rows));
    let products = if setup.products.is_empty() {
        default_products(t)?
    } else {
        setup.products.clone()
    };
    let opts = RenewalOptions {
        misinv: misinv_options(p),
        z_max: p.z_max,
        max_truncation: p.max_truncation,
    };
    let mut rows = Vec::new();
    for (i, (disc, zs)) in products.iter().enumerate() {
        let r = verify_renewal_identity(t, law, disc, zs, &opts, p.tol, runner, fam.child(10 + i as u64))?;
        rows.push(json!({
            "disc": disc.to_string(),
            "z": zs,
            "lhs": r.lhs.value,
            "lhs_stderr": r.lhs.stderr,
            "rhs": r.rhs.value,
            "rhs_stderr": r.rhs.stderr,
            "truncation": r.truncation,
            "p_prime_mass": r.p_prime_mass.value,
            "mean_rise": r.mean_rise.value,
        }));
        for mut c in r.claims {
            c.id = format!("{}/{disc} x {zs:?}", c.id);
            out.claims.push(c);
        }
    }
    out.data.insert("renewal".into(), Value::Array(rows));
    Ok(out)
}

fn default_cylinders<T: Realization>(setup: &Setup<T>) -> Vec<Cylinder<T::Vertex>> {
    if setup.cylinders.is_empty() {
        vec![Cylinder::single(&setup.tree, setup.tree.origin(), setup.tree.origin())]
    } else {
        setup.cylinders.clone()
    }
}

fn cylinder_name<V: fmt::Display + Clone + PartialEq>(c: &Cylinder<V>) -> String {
    let join = |xs: &[V]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    format!("V({} -> {})", join(c.sources()), join(c.targets()))
}

fn boundary_limit<T: Realization>(
    setup: &Setup<T>,
    runner: &impl TrialRunner,
    fam: StreamFamily,
) -> Result<SuiteOutput> {
    let (t, law, p) = (&setup.tree, &setup.law, &setup.params);
    let drift = law.drift();
    let n_list = p.n_list.clone().unwrap_or_else(|| {
        if drift.is_negative() {
            vec![15, 20, 25]
        } else {
            vec![10, 20, 30]
        }
    });
    let kernel = kernel_options(p);
    let mut out = SuiteOutput::default();
    for (i, f) in default_cylinders(setup).iter().enumerate() {
        // Limits toward b(alpha) are limits toward alpha of the cylinder b^-1 f.
        let f = match &setup.direction {
            Some(b) => f.translate(t, &t.invert(b)?)?,
            None => f.clone(),
        };
        let name = cylinder_name(&f);
        let rep = verify_boundary_limit(
            t,
            law,
            &f,
            &n_list,
            &kernel,
            p.limit_samples,
            p.limit_options(),
            p.tol,
            runner,
            fam.child(2 * i as u64),
        )?;
        for mut c in rep.claims {
            c.id = format!("{}/{name}", c.id);
            out.claims.push(c);
        }
        if let Some(nu) = rep.limit {
            out.data
                .insert(format!("limit {name}"), json!({"value": nu.value, "stderr": nu.stderr}));
        }
        out.series.push(Series {
            name: format!("s^n {name}"),
            rows: rep.rows,
        });
        if drift.is_negative() {
            let (base, rows, claims) = verify_direction_invariance(
                t,
                law,
                &f,
                &setup.periods,
                p.period_n,
                &kernel,
                p.tol,
                runner,
                fam.child(2 * i as u64 + 1),
            )?;
            for mut c in claims {
                c.id = format!("{}/{name}", c.id);
                out.claims.push(c);
            }
            out.series.push(Series {
                name: format!("s^n {name} (period base)"),
                rows: vec![base],
            });
            for (j, row) in rows.into_iter().enumerate() {
                out.series.push(Series {
                    name: format!("b_{j} s^n {name}"),
                    rows: vec![row],
                });
            }
        } else {
            out.claims.push(Claim::skipped(
                &format!("boundary-limit/period/{name}"),
                "lim b s^n*U = lim s^n*U for horocyclic b fixing the center of s",
                "the limit is compared against only for negative drift",
            ));
        }
    }
    Ok(out)
}

fn omega_limit<T: Realization>(setup: &Setup<T>, runner: &impl TrialRunner, fam: StreamFamily) -> Result<SuiteOutput> {
    let (t, law, p) = (&setup.tree, &setup.law, &setup.params);
    let kernel = kernel_options(p);
    let mut out = SuiteOutput::default();
    for (i, f) in default_cylinders(setup).iter().enumerate() {
        let name = cylinder_name(f);
        let seq = descend_sequence(t, &p.omega_n_list)?;
        let rep = verify_omega_limit(
            t,
            law,
            f,
            OmegaRegime::Descend,
            &seq,
            &kernel,
            runner,
            fam.child(2 * i as u64),
        )?;
        for mut c in rep.claims {
            c.id = format!("{}/{name}", c.id);
            out.claims.push(c);
        }
        out.series.push(Series {
            name: format!("s^-n {name}"),
            rows: rep.rows,
        });
        let escape: Option<Vec<(i64, T::Elem)>> = p
            .omega_n_list
            .iter()
            .map(|&n| t.ascend_escape(n).map(|g| (n, g)))
            .collect();
        match escape {
            None => out.claims.push(Claim::skipped(
                &format!("omega-limit/ascend-escape/{name}"),
                "g_n*U -> 0 as g_n -> omega",
                "no ascending escape sequence for this realization",
            )),
            Some(seq) => {
                let rep = verify_omega_limit(
                    t,
                    law,
                    f,
                    OmegaRegime::AscendEscape,
                    &seq,
                    &kernel,
                    runner,
                    fam.child(2 * i as u64 + 1),
                )?;
                for mut c in rep.claims {
                    c.id = format!("{}/{name}", c.id);
                    out.claims.push(c);
                }
                if !rep.rows.is_empty() {
                    out.series.push(Series {
                        name: format!("(p^-n, p^n) {name}"),
                        rows: rep.rows,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Whether every applicable claim passed.
pub fn all_pass(claims: &[Claim]) -> bool {
    claims.iter().all(|c| c.verdict != Verdict::Fail)
}
