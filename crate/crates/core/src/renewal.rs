//! Potential-kernel estimation, invariant-measure estimators and the limit
//! and renewal checks built on them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::affine::Cylinder;
use crate::error::{Error, Result};
use crate::law::StepLaw;
use crate::rng::StreamFamily;
use crate::runner::TrialRunner;
use crate::stats::{combined, proportion, z_score, Estimate, Moments, PairedMoments};
use crate::tree::AffineTree;
use crate::walk::{
    first_ascending_excursion, height_step, sample_boundary_limit, sample_ladder_limit, BoundaryLimitOptions,
    DEFAULT_STEP_BUDGET,
};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelOptions {
    pub trajectories: u64,
    pub horizon: u64,
    /// Stop once the height is this far past the cylinder level in the drift direction.
    pub stop_margin: i64,
    /// No early stop before this many steps.
    pub min_steps: u64,
    /// Length of the post-stop extension used to measure the tail.
    pub tail_steps: u64,
    /// Number of trajectories whose extension is followed on the full group.
    pub tail_trajectories: u64,
    /// Tail bound above which the estimate is flagged; `None` uses the stderr.
    pub tail_tolerance: Option<f64>,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            trajectories: 100_000,
            horizon: 100_000,
            stop_margin: 15,
            min_steps: 50,
            tail_steps: 1000,
            tail_trajectories: 2000,
            tail_tolerance: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelEstimate {
    pub value: f64,
    pub stderr: f64,
    pub trajectories: u64,
    pub horizon: u64,
    /// Measured visits after the stopping point (mean plus three stderr).
    pub tail_bound: f64,
    /// Mean number of returns of the height alone to the cylinder level
    /// during the extension.
    pub level_returns: f64,
    /// Fraction of trajectories stopped early.
    pub stopped_early: f64,
    pub truncated: bool,
}

impl KernelEstimate {
    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.value,
            stderr: self.stderr,
        }
    }

    pub fn into_checked(self) -> Result<Self> {
        if self.truncated {
            Err(Error::HorizonTooSmall(format!(
                "tail bound {:.3e} exceeds tolerance at horizon {}",
                self.tail_bound, self.horizon
            )))
        } else {
            Ok(self)
        }
    }
}

struct KernelPath {
    visits: u64,
    tail_visits: u64,
    level_returns: u64,
    stopped: bool,
}

/// `g*U(f) = E[sum_n 1[g R_n in f]]`.
pub fn potential_kernel<T: AffineTree>(
    tree: &T,
    g: &T::Elem,
    f: &Cylinder<T::Vertex>,
    law: &StepLaw<T::Elem>,
    opts: &KernelOptions,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> Result<KernelEstimate> {
    if opts.trajectories == 0 {
        return Err(Error::HorizonTooSmall("at least one trajectory is required".into()));
    }
    let Some(level) = f.level() else {
        return Ok(KernelEstimate {
            value: 0.0,
            stderr: 0.0,
            trajectories: opts.trajectories,
            horizon: opts.horizon,
            tail_bound: 0.0,
            level_returns: 0.0,
            stopped_early: 0.0,
            truncated: false,
        });
    };
    let dir = if law.drift().is_positive() {
        1
    } else if law.drift().is_negative() {
        -1
    } else {
        0
    };
    let past = |h: i64| match dir {
        1 => h > level + opts.stop_margin,
        -1 => h < level - opts.stop_margin,
        _ => false,
    };
    let paths = runner.map(opts.trajectories, |i| -> Result<KernelPath> {
        let mut s = family.stream(i);
        let mut x = g.clone();
        let mut h = tree.phi(g);
        let mut visits = 0u64;
        let mut stopped = false;
        for n in 0..=opts.horizon {
            if h == level && f.contains(tree, &x)? {
                visits += 1;
            }
            if n == opts.horizon {
                break;
            }
            if n >= opts.min_steps && past(h) {
                stopped = true;
                break;
            }
            let a = law.sample(&mut s);
            x = tree.compose(&x, &a.element)?;
            h += a.phi;
        }
        let follow = i < opts.tail_trajectories;
        let mut tail_visits = 0u64;
        let mut level_returns = 0u64;
        for _ in 0..opts.tail_steps {
            if follow {
                let a = law.sample(&mut s);
                x = tree.compose(&x, &a.element)?;
                h += a.phi;
                if h == level && f.contains(tree, &x)? {
                    tail_visits += 1;
                }
            } else {
                h += height_step(law, &mut s);
            }
            if h == level {
                level_returns += 1;
            }
        }
        Ok(KernelPath {
            visits,
            tail_visits,
            level_returns,
            stopped,
        })
    });
    let mut main = Moments::default();
    let mut tail = Moments::default();
    let mut returns = Moments::default();
    let mut stopped = 0u64;
    for (i, p) in paths.into_iter().enumerate() {
        let p = p?;
        main.push(p.visits as f64);
        returns.push(p.level_returns as f64);
        if (i as u64) < opts.tail_trajectories {
            tail.push(p.tail_visits as f64);
        }
        stopped += p.stopped as u64;
    }
    let est = main.estimate();
    let t = tail.estimate();
    let tail_bound = if tail.n == 0 { 0.0 } else { t.value + 3.0 * t.stderr };
    let tolerance = opts.tail_tolerance.unwrap_or(est.stderr);
    Ok(KernelEstimate {
        value: est.value,
        stderr: est.stderr,
        trajectories: opts.trajectories,
        horizon: opts.horizon,
        tail_bound,
        level_returns: returns.mean(),
        stopped_early: stopped as f64 / opts.trajectories as f64,
        truncated: tail_bound > tolerance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaldReport {
    pub excursions: u64,
    pub mean_length: Estimate,
    pub mean_rise: Estimate,
    /// `E[l] / E[S_l]`.
    pub ratio: Estimate,
    /// `1 / drift`.
    pub exact: Rational,
    pub z: f64,
    /// `E[S_l] - drift * E[l]`.
    pub residual: Estimate,
}

/// Mass `E[l] / E[S_l]` of the invariant measure against `1 / drift`.
pub fn wald_mass_check<E: Clone + Sync>(
    law: &StepLaw<E>,
    excursions: u64,
    budget: u64,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> Result<WaldReport> {
    let drift = law.drift();
    if !drift.is_positive() {
        return Err(Error::NonPositiveDrift(format!("{drift}")));
    }
    let rows = runner.map(excursions, |i| {
        crate::walk::first_ascending_ladder_heights(law, &mut family.stream(i), budget)
    });
    let mut pm = PairedMoments::default();
    for r in rows {
        let (l, s) = r.ok_or(Error::StepBudgetExceeded { budget })?;
        pm.push(l as f64, s as f64);
    }
    let exact = drift.recip();
    let exact_f = to_f64(exact);
    let ratio = pm.ratio();
    let mu = to_f64(drift);
    let residual = {
        let flipped = PairedMoments {
            x: pm.y,
            y: pm.x,
            sum_xy: pm.sum_xy,
        };
        flipped.linear(mu)
    };
    Ok(WaldReport {
        excursions,
        mean_length: pm.x.estimate(),
        mean_rise: pm.y.estimate(),
        ratio,
        exact,
        z: z_score(ratio.value - exact_f, ratio.stderr),
        residual,
    })
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MisinvOptions {
    pub excursions: u64,
    pub step_budget: u64,
    pub limit: BoundaryLimitOptions,
}

impl Default for MisinvOptions {
    fn default() -> Self {
        Self {
            excursions: 100_000,
            step_budget: DEFAULT_STEP_BUDGET,
            limit: BoundaryLimitOptions::default(),
        }
    }
}

/// A finite combination `sum c_i 1_{D_i}` of disc indicators on the boundary.
pub type DiscCombination<V> = Vec<(V, f64)>;

#[derive(Clone, Debug, PartialEq)]
pub struct MisinvEstimate {
    /// One entry per test function.
    pub values: Vec<Estimate>,
    /// `E[l] / E[S_l]`: the mass of the whole boundary.
    pub total: Estimate,
    pub mean_rise: Estimate,
    pub excursions: u64,
    /// Set for centered laws, where `E[l]` is infinite.
    pub heavy_tail_warning: bool,
}

/// Per-excursion samples: test-function sums, `l`, `S_l`.
struct ExcursionSums {
    sums: Vec<f64>,
    length: u64,
    rise: i64,
}

fn in_disc<T: AffineTree>(tree: &T, e: &T::Boundary, d: &T::Vertex) -> Result<bool> {
    Ok(tree.boundary_vertex(e, tree.height(d))? == *d)
}

/// `m(f) = E[sum_{k<l} f(L_k v)] / E[S_l]` with `v ~ m_l` independent of the excursion.
pub fn estimate_m_misinv<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    tests: &[DiscCombination<T::Vertex>],
    opts: &MisinvOptions,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> Result<MisinvEstimate> {
    if law.drift().is_negative() {
        return Err(Error::NonPositiveDrift(format!("{}", law.drift())));
    }
    let deepest = tests
        .iter()
        .flat_map(|c| c.iter().map(|(d, _)| tree.height(d)))
        .max()
        .unwrap_or(0);
    let walks = family.child(1);
    let ends = family.child(2);
    let rows = runner.map(opts.excursions, |i| -> Result<ExcursionSums> {
        let exc = first_ascending_excursion(tree, law, &mut walks.stream(i), opts.step_budget, true)?;
        let depth = deepest - exc.lowest();
        let v = sample_ladder_limit(tree, law, depth, opts.limit, &mut ends.stream(i))?.end;
        let mut sums = alloc::vec![0.0; tests.len()];
        for (lk, _) in &exc.path {
            let e = tree.act_boundary(lk, &v)?;
            for (j, comb) in tests.iter().enumerate() {
                for (d, c) in comb {
                    if in_disc(tree, &e, d)? {
                        sums[j] += c;
                    }
                }
            }
        }
        Ok(ExcursionSums {
            sums,
            length: exc.length,
            rise: exc.rise,
        })
    });
    let mut per_test = alloc::vec![PairedMoments::default(); tests.len()];
    let mut total = PairedMoments::default();
    for r in rows {
        let r = r?;
        for (pm, x) in per_test.iter_mut().zip(&r.sums) {
            pm.push(*x, r.rise as f64);
        }
        total.push(r.length as f64, r.rise as f64);
    }
    Ok(MisinvEstimate {
        values: per_test.iter().map(PairedMoments::ratio).collect(),
        total: total.ratio(),
        mean_rise: total.y.estimate(),
        excursions: opts.excursions,
        heavy_tail_warning: law.drift().is_zero(),
    })
}

/// Test function for the residual `(mu * m)(D) - m(D) = sum_a w_a m(a^{-1} D) - m(D)`.
pub fn invariance_residual_test<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    disc: &T::Vertex,
) -> Result<DiscCombination<T::Vertex>> {
    let mut comb = Vec::new();
    for a in law.atoms() {
        let inv = tree.invert(&a.element)?;
        comb.push((tree.act_vertex(&inv, disc)?, to_f64(a.weight)));
    }
    comb.push((disc.clone(), -1.0));
    Ok(comb)
}

#[derive(Clone, Debug)]
pub struct BoundaryMeasureSample<E, B> {
    /// Horocyclic: the section of `end` times a random rotation.
    pub element: E,
    pub end: B,
    /// Total mass of the measure, `1 / drift` of the sampled law.
    pub mass_scale: Rational,
}

/// Sample from the normalized extension of the invariant measure of `law_hat`.
pub fn sample_mbar<T: AffineTree>(
    tree: &T,
    law_hat: &StepLaw<T::Elem>,
    depth: i64,
    opts: BoundaryLimitOptions,
    family: StreamFamily,
    index: u64,
) -> Result<BoundaryMeasureSample<T::Elem, T::Boundary>> {
    if !law_hat.drift().is_positive() {
        return Err(Error::NonPositiveDrift(format!("{}", law_hat.drift())));
    }
    let end = sample_boundary_limit(tree, law_hat, depth, opts, &mut family.child(1).stream(index))?.end;
    let r = tree.sample_rotation(&mut family.child(2).stream(index));
    let element = tree.compose(&tree.section(&end)?, &r)?;
    Ok(BoundaryMeasureSample {
        element,
        end,
        mass_scale: law_hat.drift().recip(),
    })
}

/// The limit of `s^n * U` on `f`: `mass * P[s^{h0} x^{-1} in f]` with `x ~ mbar`.
pub fn limit_measure_value<T: AffineTree>(
    tree: &T,
    f: &Cylinder<T::Vertex>,
    law: &StepLaw<T::Elem>,
    samples: u64,
    opts: BoundaryLimitOptions,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> Result<Estimate> {
    if !law.drift().is_negative() {
        return Err(Error::NonNegativeDrift(format!("{}", law.drift())));
    }
    let Some(h0) = f.level() else {
        return Ok(Estimate::exact(0.0));
    };
    let law_hat = law.inverse(tree)?;
    let depth = f.sources().iter().map(|x| tree.height(x)).max().unwrap_or(0).max(1);
    let s_h0 = tree.power(&tree.homothety(), h0)?;
    let hits = runner.map(samples, |i| -> Result<bool> {
        let x = sample_mbar(tree, &law_hat, depth, opts, family, i)?;
        let y = tree.compose(&s_h0, &tree.invert(&x.element)?)?;
        f.contains(tree, &y)
    });
    let mut k = 0u64;
    for h in hits {
        k += h? as u64;
    }
    Ok(proportion(k, samples).scale(to_f64(law_hat.drift().recip())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
    /// Reported without a pass/fail decision.
    Trend,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
            Verdict::Trend => "trend",
        }
    }
}

/// One checked statement with its evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct Claim {
    pub id: String,
    /// The statement being checked, as a formula.
    pub anchor: String,
    pub estimate: f64,
    pub stderr: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub detail: String,
}

impl Claim {
    pub fn new(id: &str, anchor: &str) -> Self {
        Self {
            id: id.into(),
            anchor: anchor.into(),
            estimate: 0.0,
            stderr: 0.0,
            tolerance: 0.0,
            verdict: Verdict::Skipped,
            detail: String::new(),
        }
    }

    /// Two estimates agree within `tol` combined standard errors.
    pub fn agreement(id: &str, anchor: &str, a: Estimate, b: Estimate, tol: f64) -> Self {
        let z = a.z_against(b);
        Self {
            estimate: a.value - b.value,
            stderr: combined(a.stderr, b.stderr),
            tolerance: tol,
            verdict: Verdict::from_bool(z <= tol),
            detail: format!("{:.6} vs {:.6}, z = {:.3}", a.value, b.value, z),
            ..Self::new(id, anchor)
        }
    }

    /// `value + slack < bound`.
    pub fn below(id: &str, anchor: &str, e: Estimate, slack: f64, bound: f64) -> Self {
        Self {
            estimate: e.value,
            stderr: e.stderr,
            tolerance: bound,
            verdict: Verdict::from_bool(e.value + slack < bound),
            detail: format!("{:.6} + tail {:.3e} against bound {bound}", e.value, slack),
            ..Self::new(id, anchor)
        }
    }

    pub fn skipped(id: &str, anchor: &str, reason: &str) -> Self {
        Self {
            detail: reason.into(),
            ..Self::new(id, anchor)
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelRow {
    pub n: i64,
    pub estimate: KernelEstimate,
}

#[derive(Clone, Debug)]
pub struct BoundaryLimitReport {
    pub drift: Rational,
    pub rows: Vec<KernelRow>,
    pub limit: Option<Estimate>,
    pub claims: Vec<Claim>,
}

pub const NULL_LIMIT_BOUND: f64 = 0.05;

/// Kernel estimates along `b s^n` for each `n`, each on its own stream family.
#[allow(clippy::too_many_arguments)]
pub fn kernel_along<T: AffineTree>(
    tree: &T,
    b: &T::Elem,
    n_list: &[i64],
    f: &Cylinder<T::Vertex>,
    law: &StepLaw<T::Elem>,
    opts: &KernelOptions,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> Result<Vec<KernelRow>> {
    n_list
        .iter()
        .map(|&n| {
            let g = tree.compose(b, &tree.power(&tree.homothety(), n)?)?;
            let estimate = potential_kernel(tree, &g, f, law, opts, runner, family.child(n as u64))?;
            Ok(KernelRow { n, estimate })
        })
        .collect()
}

/// Behaviour of `s^n * U(f)` as `n` grows, by drift sign.
#[allow(clippy::too_many_arguments)]
pub fn verify_boundary_limit<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    f: &Cylinder<T::Vertex>,
    n_list: &[i64],
    kernel: &KernelOptions,
    limit_samples: u64,
    limit_opts: BoundaryLimitOptions,
    tol: f64,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> Result<BoundaryLimitReport> {
    let rows = kernel_along(tree, &tree.identity(), n_list, f, law, kernel, runner, family.child(1))?;
    let drift = law.drift();
    let mut claims = Vec::new();
    let mut limit = None;
    for r in &rows {
        if r.estimate.truncated {
            return Err(Error::HorizonTooSmall(format!(
                "n = {}: tail bound {:.3e}",
                r.n, r.estimate.tail_bound
            )));
        }
    }
    if drift.is_negative() {
        let nu = limit_measure_value(tree, f, law, limit_samples, limit_opts, runner, family.child(2))?;
        limit = Some(nu);
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                claims.push(Claim::agreement(
                    &format!("boundary-limit/stable/{}-{}", a.n, b.n),
                    "s^n*U(f) converges as n -> +inf",
                    a.estimate.estimate(),
                    b.estimate.estimate(),
                    tol,
                ));
            }
            claims.push(Claim::agreement(
                &format!("boundary-limit/limit/{}", a.n),
                "lim s^n*U = m_<s> * mbar_hat, mass -1/drift",
                a.estimate.estimate(),
                nu,
                tol,
            ));
        }
    } else if drift.is_positive() {
        if let Some(last) = rows.last() {
            let decreasing = rows.windows(2).all(|w| {
                w[1].estimate.value <= w[0].estimate.value + tol * combined(w[0].estimate.stderr, w[1].estimate.stderr)
            });
            let mut c = Claim::below(
                &format!("boundary-limit/null/{}", last.n),
                "s^n*U -> 0 when drift > 0",
                last.estimate.estimate(),
                last.estimate.tail_bound,
                NULL_LIMIT_BOUND,
            );
            if !decreasing {
                c.verdict = Verdict::Fail;
                c.detail = format!("{}; estimates increase along n", c.detail);
            }
            claims.push(c);
        }
    } else {
        for r in &rows {
            let mut c = Claim::new(
                &format!("boundary-limit/centered/{}", r.n),
                "s^n*U(f) for drift 0 (heavy-tailed, reported only)",
            );
            c.estimate = r.estimate.value;
            c.stderr = r.estimate.stderr;
            c.verdict = Verdict::Trend;
            c.detail = "ladder time is not integrable; no variance control".into();
            claims.push(c);
        }
    }
    Ok(BoundaryLimitReport {
        drift,
        rows,
        limit,
        claims,
    })
}

/// Estimates along `b s^n` for each `b` against those along `s^n`.
#[allow(clippy::too_many_arguments)]
pub fn verify_direction_invariance<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    f: &Cylinder<T::Vertex>,
    periods: &[T::Elem],
    n: i64,
    kernel: &KernelOptions,
    tol: f64,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> Result<(KernelRow, Vec<KernelRow>, Vec<Claim>)> {
    let base = kernel_along(tree, &tree.identity(), &[n], f, law, kernel, runner, family.child(0))?.remove(0);
    let mut rows = Vec::new();
    let mut claims = Vec::new();
    for (i, b) in periods.iter().enumerate() {
        let row = kernel_along(tree, b, &[n], f, law, kernel, runner, family.child(i as u64 + 1))?.remove(0);
        claims.push(Claim::agreement(
            &format!("boundary-limit/period/{i}"),
            "lim b s^n*U = lim s^n*U for horocyclic b fixing the center of s",
            row.estimate.estimate(),
            base.estimate.estimate(),
            tol,
        ));
        rows.push(row);
    }
    Ok((base, rows, claims))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaRegime {
    /// `g_n = s^{-n}`.
    Descend,
    /// `g_n -> omega` with `phi(g_n) -> +inf`.
    AscendEscape,
}

#[derive(Clone, Debug)]
pub struct OmegaLimitReport {
    pub regime: OmegaRegime,
    pub rows: Vec<KernelRow>,
    pub claims: Vec<Claim>,
}

/// `g_n*U(f) -> 0` along the supplied sequence.
#[allow(clippy::too_many_arguments)]
pub fn verify_omega_limit<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    f: &Cylinder<T::Vertex>,
    regime: OmegaRegime,
    sequence: &[(i64, T::Elem)],
    kernel: &KernelOptions,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> Result<OmegaLimitReport> {
    let mut rows = Vec::new();
    let mut claims = Vec::new();
    if regime == OmegaRegime::AscendEscape && law.drift().is_zero() {
        claims.push(Claim::skipped(
            "omega-limit/ascend-escape",
            "g_n*U -> 0 as g_n -> omega",
            "needs a nonzero drift",
        ));
        return Ok(OmegaLimitReport { regime, rows, claims });
    }
    for (n, g) in sequence {
        let estimate = potential_kernel(tree, g, f, law, kernel, runner, family.child(*n as u64))?;
        rows.push(KernelRow { n: *n, estimate });
    }
    if let Some(last) = rows.last() {
        let tag = match regime {
            OmegaRegime::Descend => "descend",
            OmegaRegime::AscendEscape => "ascend-escape",
        };
        claims.push(Claim::below(
            &format!("omega-limit/{tag}/{}", last.n),
            "g_n*U -> 0 as g_n -> omega",
            last.estimate.estimate(),
            last.estimate.tail_bound,
            NULL_LIMIT_BOUND,
        ));
    }
    Ok(OmegaLimitReport { regime, rows, claims })
}

/// `s^{-n}` for each `n`.
pub fn descend_sequence<T: AffineTree>(tree: &T, n_list: &[i64]) -> Result<Vec<(i64, T::Elem)>> {
    n_list
        .iter()
        .map(|&n| Ok((n, tree.power(&tree.homothety(), -n)?)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct RenewalReport {
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// Measured mass dropped by truncating the `z` sum.
    pub truncation: f64,
    /// `E[min(S_l, z_max + 1)]`, the truncated total mass of `p'`.
    pub p_prime_mass: Estimate,
    /// `E[S_l]` from the right-hand side's excursions.
    pub mean_rise: Estimate,
    pub z_max: i64,
    pub claims: Vec<Claim>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenewalOptions {
    pub misinv: MisinvOptions,
    pub z_max: i64,
    /// Largest acceptable truncation mass.
    pub max_truncation: f64,
}

impl Default for RenewalOptions {
    fn default() -> Self {
        Self {
            misinv: MisinvOptions::default(),
            z_max: 64,
            max_truncation: 1e-3,
        }
    }
}

/// `U . p(f) = (m x m_Z)(f)` for `f = 1_D x 1_Z0`.
#[allow(clippy::too_many_arguments)]
pub fn verify_renewal_identity<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    disc: &T::Vertex,
    z_set: &[i64],
    opts: &RenewalOptions,
    tol: f64,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> Result<RenewalReport> {
    if !law.drift().is_positive() {
        return Err(Error::NonPositiveDrift(format!("{}", law.drift())));
    }
    if z_set.is_empty() || z_set.iter().any(|&z| z < 0) {
        return Err(Error::InvalidCylinder(
            "z-support must be a non-empty subset of Z_+".into(),
        ));
    }
    let hd = tree.height(disc);
    let walks = family.child(11);
    let ends = family.child(12);
    let m = opts.misinv;
    let rows = runner.map(m.excursions, |i| -> Result<(f64, f64, i64)> {
        let exc = first_ascending_excursion(tree, law, &mut walks.stream(i), m.step_budget, true)?;
        let v = sample_ladder_limit(tree, law, hd - exc.lowest(), m.limit, &mut ends.stream(i))?.end;
        let mut kept = 0.0;
        let mut dropped = 0.0;
        for (lk, sk) in &exc.path {
            if !in_disc(tree, &tree.act_boundary(lk, &v)?, disc)? {
                continue;
            }
            for z in 0..=opts.z_max {
                if z_set.contains(&(sk + z)) {
                    kept += 1.0;
                }
            }
            dropped += z_set.iter().filter(|&&z0| z0 - sk > opts.z_max).count() as f64;
        }
        Ok((kept, dropped, exc.rise))
    });
    let mut lhs_pm = PairedMoments::default();
    let mut dropped = Moments::default();
    let mut p_prime = Moments::default();
    for r in rows {
        let (kept, lost, rise) = r?;
        lhs_pm.push(kept, rise as f64);
        dropped.push(lost);
        let z1 = opts.z_max + 1;
        p_prime.push((z1 - (z1 - rise).max(0)) as f64);
    }
    let lhs = lhs_pm.ratio();
    let truncation = dropped.mean() / lhs_pm.y.mean();
    if truncation > opts.max_truncation {
        return Err(Error::TruncationTooCoarse(format!(
            "z-truncation at {} drops mass {truncation:.3e}",
            opts.z_max
        )));
    }
    let rhs_m = estimate_m_misinv(
        tree,
        law,
        &[alloc::vec![(disc.clone(), 1.0)]],
        &m,
        runner,
        family.child(13),
    )?;
    let rhs = rhs_m.values[0].scale(z_set.len() as f64);
    let mut claims = Vec::new();
    let z = lhs.z_against(rhs);
    claims.push(Claim {
        estimate: lhs.value - rhs.value,
        stderr: combined(lhs.stderr, rhs.stderr),
        tolerance: tol,
        verdict: Verdict::from_bool(
            (lhs.value - rhs.value).abs() <= tol * combined(lhs.stderr, rhs.stderr) + truncation,
        ),
        detail: format!(
            "LHS {:.6} vs RHS {:.6}, z = {z:.3}, truncation {truncation:.3e}",
            lhs.value, rhs.value
        ),
        ..Claim::new(
            &format!("renewal/identity/{}", tree.height(disc)),
            "U . p(f) = (m x m_Z)(f)",
        )
    });
    claims.push(Claim::agreement(
        "renewal/p-prime-mass",
        "total mass of p' = E[S_l]",
        p_prime.estimate(),
        rhs_m.mean_rise,
        tol,
    ));
    Ok(RenewalReport {
        lhs,
        rhs,
        truncation,
        p_prime_mass: p_prime.estimate(),
        mean_rise: rhs_m.mean_rise,
        z_max: opts.z_max,
        claims,
    })
}
