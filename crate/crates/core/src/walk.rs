//! Left and right random walks, ladder epochs, height regimes and boundary
//! limits.
//!
//! `R_n = X_1 ... X_n` grows by right multiplication and `L_n = X_n ... X_1`
//! by left multiplication; both consume one draw per step, so the two walks
//! driven by the same stream share their height path `S_n`.

use alloc::vec::Vec;
use core::ops::ControlFlow;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::law::StepLaw;
use crate::rng::{RandomStream, StreamFamily};
use crate::runner::TrialRunner;
use crate::stats::{proportion, Estimate};
use crate::tree::{AffineTree, EndComparison};
use crate::Rational;

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug)]
pub struct Observation<'a, E> {
    pub step: u64,
    pub element: &'a E,
    pub height: i64,
}

type Visit = Result<ControlFlow<()>>;

/// Feeds `(n, R_n)` for `n = 0..=horizon` until the visitor breaks; returns
/// the last step index seen.
pub fn run_right<T, F>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    horizon: u64,
    stream: &mut RandomStream,
    mut visit: F,
) -> Result<u64>
where
    T: AffineTree,
    F: FnMut(Observation<'_, T::Elem>) -> Visit,
{
    let mut g = tree.identity();
    let mut h = 0i64;
    for n in 0..=horizon {
        if visit(Observation {
            step: n,
            element: &g,
            height: h,
        })?
        .is_break()
            || n == horizon
        {
            return Ok(n);
        }
        let x = law.sample(stream);
        g = tree.compose(&g, &x.element)?;
        h += x.phi;
    }
    Ok(horizon)
}

/// Mirror of [`run_right`] with `L_n = X_n L_{n-1}`.
pub fn run_left<T, F>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    horizon: u64,
    stream: &mut RandomStream,
    mut visit: F,
) -> Result<u64>
where
    T: AffineTree,
    F: FnMut(Observation<'_, T::Elem>) -> Visit,
{
    let mut g = tree.identity();
    let mut h = 0i64;
    for n in 0..=horizon {
        if visit(Observation {
            step: n,
            element: &g,
            height: h,
        })?
        .is_break()
            || n == horizon
        {
            return Ok(n);
        }
        let x = law.sample(stream);
        g = tree.compose(&x.element, &g)?;
        h += x.phi;
    }
    Ok(horizon)
}

/// One step of the height process `S_n`, drawing exactly as the walks do.
pub fn height_step<E: Clone>(law: &StepLaw<E>, stream: &mut RandomStream) -> i64 {
    law.sample(stream).phi
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Ascending,
    Descending,
}

/// Ascending epochs record `L_{l_k}`; descending epochs record `R_{l-_k}`.
#[derive(Clone, Debug)]
pub struct LadderRecord<E> {
    pub direction: Direction,
    pub times: Vec<u64>,
    pub heights: Vec<i64>,
    pub elements: Vec<E>,
    pub steps: u64,
    /// False when the step budget ran out first.
    pub complete: bool,
}

impl<E> LadderRecord<E> {
    pub fn into_complete(self) -> Result<Self> {
        if self.complete {
            Ok(self)
        } else {
            Err(Error::StepBudgetExceeded { budget: self.steps })
        }
    }
}

pub fn ladder_times<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    count: usize,
    direction: Direction,
    stream: &mut RandomStream,
    budget: u64,
) -> Result<LadderRecord<T::Elem>> {
    let mut rec = LadderRecord {
        direction,
        times: Vec::with_capacity(count),
        heights: Vec::with_capacity(count),
        elements: Vec::with_capacity(count),
        steps: 0,
        complete: count == 0,
    };
    if count == 0 {
        return Ok(rec);
    }
    let mut best = 0i64;
    let mut g = tree.identity();
    let mut h = 0i64;
    for n in 1..=budget {
        let x = law.sample(stream);
        g = match direction {
            Direction::Ascending => tree.compose(&x.element, &g)?,
            Direction::Descending => tree.compose(&g, &x.element)?,
        };
        h += x.phi;
        rec.steps = n;
        let record = match direction {
            Direction::Ascending => h > best,
            Direction::Descending => h < best,
        };
        if record {
            best = h;
            rec.times.push(n);
            rec.heights.push(h);
            rec.elements.push(g.clone());
            if rec.times.len() == count {
                rec.complete = true;
                break;
            }
        }
    }
    Ok(rec)
}

/// The walk up to its first strict ascending ladder time `l`.
#[derive(Clone, Debug)]
pub struct Excursion<E> {
    pub length: u64,
    /// `S_l`.
    pub rise: i64,
    /// `L_l`.
    pub product: E,
    /// `(L_k, S_k)` for `k < l`; empty unless requested.
    pub path: Vec<(E, i64)>,
}

impl<E> Excursion<E> {
    pub fn lowest(&self) -> i64 {
        self.path.iter().map(|(_, s)| *s).min().unwrap_or(0)
    }
}

pub fn first_ascending_excursion<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    stream: &mut RandomStream,
    budget: u64,
    keep_path: bool,
) -> Result<Excursion<T::Elem>> {
    let mut g = tree.identity();
    let mut h = 0i64;
    let mut path = Vec::new();
    for n in 1..=budget {
        if keep_path {
            path.push((g.clone(), h));
        }
        let x = law.sample(stream);
        g = tree.compose(&x.element, &g)?;
        h += x.phi;
        if h > 0 {
            return Ok(Excursion {
                length: n,
                rise: h,
                product: g,
                path,
            });
        }
    }
    Err(Error::StepBudgetExceeded { budget })
}

/// `(l, S_l)` from the height process alone.
pub fn first_ascending_ladder_heights<E: Clone>(
    law: &StepLaw<E>,
    stream: &mut RandomStream,
    budget: u64,
) -> Option<(u64, i64)> {
    let mut h = 0i64;
    for n in 1..=budget {
        h += height_step(law, stream);
        if h > 0 {
            return Some((n, h));
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryLimitOptions {
    /// Consecutive ascending-ladder epochs showing the same prefix.
    pub stable_epochs: u32,
    /// Height above the prefix depth required before stopping.
    pub margin: i64,
    pub step_budget: u64,
}

impl Default for BoundaryLimitOptions {
    fn default() -> Self {
        Self {
            stable_epochs: 3,
            margin: 20,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundarySample<B> {
    /// Known down to the requested depth.
    pub end: B,
    pub steps: u64,
    pub final_height: i64,
    pub epochs: u64,
}

/// Right products `Y_1 Y_2 ...` and the depth-`d` ancestor of `Y_1 ... Y_n o`.
struct PrefixTracker<T: AffineTree> {
    depth: i64,
    opts: BoundaryLimitOptions,
    product: T::Elem,
    height: i64,
    best: i64,
    last: Option<T::Vertex>,
    stable: u32,
    epochs: u64,
}

impl<T: AffineTree> PrefixTracker<T> {
    fn new(tree: &T, depth: i64, opts: BoundaryLimitOptions) -> Self {
        Self {
            depth,
            opts,
            product: tree.identity(),
            height: 0,
            best: 0,
            last: None,
            stable: 0,
            epochs: 0,
        }
    }

    fn push(&mut self, tree: &T, x: &T::Elem, phi: i64) -> Result<bool> {
        self.product = tree.compose(&self.product, x)?;
        self.height += phi;
        if self.height <= self.best {
            return Ok(false);
        }
        self.best = self.height;
        self.epochs += 1;
        if self.height < self.depth + self.opts.margin {
            return Ok(false);
        }
        // Ancestor at `depth` of `product o`, without computing `product o` itself.
        let base = tree.main_branch(self.depth - self.height)?;
        let prefix = tree.act_vertex(&self.product, &base)?;
        if self.last.as_ref() == Some(&prefix) {
            self.stable += 1;
        } else {
            self.last = Some(prefix);
            self.stable = 1;
        }
        Ok(self.stable >= self.opts.stable_epochs)
    }

    fn finish(self, tree: &T, steps: u64) -> BoundarySample<T::Boundary> {
        let prefix = self.last.expect("stopped on a recorded prefix");
        BoundarySample {
            end: tree.vertex_end(&prefix),
            steps,
            final_height: self.height,
            epochs: self.epochs,
        }
    }
}

/// Limit end of `R_n`, determined down to `depth`.
pub fn sample_boundary_limit<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    depth: i64,
    opts: BoundaryLimitOptions,
    stream: &mut RandomStream,
) -> Result<BoundarySample<T::Boundary>> {
    if !law.drift().is_positive() {
        return Err(Error::NonPositiveDrift(alloc::format!("{}", law.drift())));
    }
    let mut tracker = PrefixTracker::new(tree, depth, opts);
    for n in 1..=opts.step_budget {
        let x = law.sample(stream);
        if tracker.push(tree, &x.element, x.phi)? {
            return Ok(tracker.finish(tree, n));
        }
    }
    Err(Error::StepBudgetExceeded {
        budget: opts.step_budget,
    })
}

/// Detects the depth-`depth` prefix as in [`sample_boundary_limit`], then
/// runs `extension` further steps and reports whether the prefix of `R_n o`
/// is unchanged.
pub fn prefix_is_stable<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    depth: i64,
    opts: BoundaryLimitOptions,
    extension: u64,
    stream: &mut RandomStream,
) -> Result<bool> {
    if !law.drift().is_positive() {
        return Err(Error::NonPositiveDrift(alloc::format!("{}", law.drift())));
    }
    let mut tracker = PrefixTracker::new(tree, depth, opts);
    let mut detected = false;
    for _ in 1..=opts.step_budget {
        let x = law.sample(stream);
        if tracker.push(tree, &x.element, x.phi)? {
            detected = true;
            break;
        }
    }
    if !detected {
        return Err(Error::StepBudgetExceeded {
            budget: opts.step_budget,
        });
    }
    let found = tracker.last.clone().expect("stopped on a recorded prefix");
    for _ in 0..extension {
        let x = law.sample(stream);
        tracker.product = tree.compose(&tracker.product, &x.element)?;
        tracker.height += x.phi;
    }
    if tracker.height < depth {
        return Ok(false);
    }
    let base = tree.main_branch(depth - tracker.height)?;
    Ok(tree.act_vertex(&tracker.product, &base)? == found)
}

/// A sample from `m_l`: the limit end of right products of independent
/// ladder increments `L_l`.
pub fn sample_ladder_limit<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    depth: i64,
    opts: BoundaryLimitOptions,
    stream: &mut RandomStream,
) -> Result<BoundarySample<T::Boundary>> {
    let mut tracker = PrefixTracker::new(tree, depth, opts);
    let mut steps = 0u64;
    loop {
        let exc = first_ascending_excursion(tree, law, stream, opts.step_budget, false)?;
        steps += exc.length;
        if tracker.push(tree, &exc.product, exc.rise)? {
            return Ok(tracker.finish(tree, steps));
        }
        if steps > opts.step_budget {
            return Err(Error::StepBudgetExceeded {
                budget: opts.step_budget,
            });
        }
    }
}

/// Fraction of height paths that fall `margin` below their start within
/// `horizon` steps: an empirical bound on a stabilized prefix changing later.
pub fn prefix_drop_frequency<E: Clone + Sync>(
    law: &StepLaw<E>,
    margin: i64,
    trials: u64,
    horizon: u64,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> Estimate {
    let dropped = runner.map(trials, |i| {
        let mut s = family.stream(i);
        let mut h = 0i64;
        for _ in 0..horizon {
            h += height_step(law, &mut s);
            if h <= -margin {
                return true;
            }
        }
        false
    });
    proportion(dropped.iter().filter(|&&d| d).count() as u64, trials)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Heights drift to `-inf` and `R_n` converges to `omega`.
    TowardOmega,
    /// Heights drift to `+inf` and `R_n` converges to a bottom end.
    TowardBoundary,
    /// Heights oscillate; `R_n` still converges to `omega`.
    Recurrent,
    Undetermined,
}

impl Regime {
    pub fn expected(drift: Rational) -> Self {
        if drift.is_negative() {
            Regime::TowardOmega
        } else if drift.is_zero() {
            Regime::Recurrent
        } else {
            Regime::TowardBoundary
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Regime::TowardOmega => "converges to ω",
            Regime::TowardBoundary => "converges to a bottom end",
            Regime::Recurrent => "height recurrent, converges to ω",
            Regime::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrajectorySummary {
    pub terminal: i64,
    pub min: i64,
    pub max: i64,
}

#[derive(Clone, Debug)]
pub struct RegimeReport {
    pub drift: Rational,
    pub horizon: u64,
    /// Escape threshold `H` for the one-sided fractions.
    pub threshold: i64,
    /// Running-extreme threshold `E` for the recurrent test.
    pub extreme: i64,
    pub summaries: Vec<TrajectorySummary>,
    pub fraction_below: f64,
    pub fraction_above: f64,
    pub fraction_both_extremes: f64,
    pub expected: Regime,
    pub observed: Regime,
}

impl RegimeReport {
    pub fn consistent(&self) -> bool {
        self.expected == self.observed
    }
}

pub fn height_regime_report<E: Clone + Sync>(
    law: &StepLaw<E>,
    trajectories: u64,
    horizon: u64,
    threshold: i64,
    extreme: i64,
    runner: &impl TrialRunner,
    family: StreamFamily,
) -> RegimeReport {
    let summaries = runner.map(trajectories, |i| {
        let mut s = family.stream(i);
        let (mut h, mut lo, mut hi) = (0i64, 0i64, 0i64);
        for _ in 0..horizon {
            h += height_step(law, &mut s);
            lo = lo.min(h);
            hi = hi.max(h);
        }
        TrajectorySummary {
            terminal: h,
            min: lo,
            max: hi,
        }
    });
    let n = trajectories.max(1) as f64;
    let frac = |pred: &dyn Fn(&TrajectorySummary) -> bool| summaries.iter().filter(|s| pred(s)).count() as f64 / n;
    let fraction_below = frac(&|s| s.terminal < -threshold);
    let fraction_above = frac(&|s| s.terminal > threshold);
    let fraction_both_extremes = frac(&|s| s.max > extreme && s.min < -extreme);
    let observed = if fraction_below >= 0.99 {
        Regime::TowardOmega
    } else if fraction_above >= 0.99 {
        Regime::TowardBoundary
    } else if fraction_both_extremes >= 0.95 {
        Regime::Recurrent
    } else {
        Regime::Undetermined
    };
    RegimeReport {
        drift: law.drift(),
        horizon,
        threshold,
        extreme,
        summaries,
        fraction_below,
        fraction_above,
        fraction_both_extremes,
        expected: Regime::expected(law.drift()),
        observed,
    }
}

/// `max { q^{-S_n} : N/2 <= n <= N, L_n v passes through o }` with `v` the
/// homothety's center, or 0 when the end never passes through `o`.
pub fn local_contraction_statistic<T: AffineTree>(
    tree: &T,
    law: &StepLaw<T::Elem>,
    horizon: u64,
    stream: &mut RandomStream,
) -> Result<f64> {
    let center = tree.homothety_center();
    let q = tree.degree() as f64;
    let mut best = 0.0f64;
    run_left(tree, law, horizon, stream, |obs| {
        if obs.step >= horizon / 2 {
            let end = tree.act_boundary(obs.element, &center)?;
            let inside = match tree.compare_ends(&end, &center) {
                EndComparison::Distinct { meet } => meet >= 0,
                EndComparison::Indistinguishable { .. } => true,
            };
            if inside {
                best = best.max(libm::pow(q, -(obs.height as f64)));
            }
        }
        Ok(ControlFlow::Continue(()))
    })?;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{PrecisionBudget, Qp};
    use crate::padic_tree::{Affine, PAdicTree};
    use crate::runner::Sequential;

    fn tree() -> PAdicTree {
        PAdicTree::new(Qp::new(2, PrecisionBudget::default()).unwrap())
    }

    fn law(t: &PAdicTree, up: (i128, i128)) -> StepLaw<Affine> {
        StepLaw::new(
            t,
            alloc::vec![
                (
                    t.element_from_rationals((0, 1), (2, 1)).unwrap(),
                    Rational::new(up.0, up.1)
                ),
                (
                    t.element_from_rationals((1, 1), (1, 2)).unwrap(),
                    Rational::new(up.1 - up.0, up.1)
                ),
            ],
            false,
        )
        .unwrap()
    }

    fn single(t: &PAdicTree) -> StepLaw<Affine> {
        StepLaw::new(t, alloc::vec![(t.homothety(), Rational::from_integer(1))], true).unwrap()
    }

    #[test]
    fn horizon_zero_sees_only_the_identity() {
        let t = tree();
        let l = law(&t, (3, 4));
        let mut seen = Vec::new();
        let mut s = StreamFamily::new(1, 1).stream(0);
        run_right(&t, &l, 0, &mut s, |o| {
            seen.push((o.step, o.height, t.same_element(o.element, &t.identity())));
            Ok(ControlFlow::Continue(()))
        })
        .unwrap();
        assert_eq!(seen, alloc::vec![(0, 0, true)]);
    }

    #[test]
    fn single_atom_walk_is_a_power_of_s() {
        let t = tree();
        let l = single(&t);
        let mut s = StreamFamily::new(1, 1).stream(0);
        run_right(&t, &l, 6, &mut s, |o| {
            assert_eq!(o.height, o.step as i64);
            assert!(t.same_element(o.element, &t.power(&t.homothety(), o.height).unwrap()));
            Ok(ControlFlow::Continue(()))
        })
        .unwrap();
        let rec = ladder_times(&t, &l, 4, Direction::Ascending, &mut s, 100).unwrap();
        assert_eq!(rec.times, alloc::vec![1, 2, 3, 4]);
    }

    #[test]
    fn left_and_right_walks_share_heights() {
        let t = tree();
        let l = law(&t, (1, 2));
        let fam = StreamFamily::new(5, 2);
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_right(&t, &l, 200, &mut fam.stream(3), |o| {
            assert_eq!(t.phi(o.element), o.height);
            a.push(o.height);
            Ok(ControlFlow::Continue(()))
        })
        .unwrap();
        run_left(&t, &l, 200, &mut fam.stream(3), |o| {
            b.push(o.height);
            Ok(ControlFlow::Continue(()))
        })
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ladder_heights_are_strictly_monotone() {
        let t = tree();
        let l = law(&t, (1, 2));
        let mut s = StreamFamily::new(9, 0).stream(0);
        let up = ladder_times(&t, &l, 20, Direction::Ascending, &mut s, 1_000_000).unwrap();
        assert!(up.complete);
        assert!(up.heights.windows(2).all(|w| w[1] > w[0]));
        let down = ladder_times(&t, &l, 20, Direction::Descending, &mut s, 1_000_000).unwrap();
        assert!(down.heights.windows(2).all(|w| w[1] < w[0]));
        for (g, h) in down.elements.iter().zip(&down.heights) {
            assert_eq!(t.phi(g), *h);
        }
    }

    #[test]
    fn exhausted_budget_keeps_the_partial_record() {
        let t = tree();
        let l = law(&t, (1, 4));
        let mut s = StreamFamily::new(2, 0).stream(0);
        let rec = ladder_times(&t, &l, 1000, Direction::Ascending, &mut s, 50).unwrap();
        assert!(!rec.complete);
        assert_eq!(rec.steps, 50);
        assert!(rec.into_complete().is_err());
    }

    #[test]
    fn single_atom_limit_is_the_center_of_s() {
        let t = tree();
        let l = single(&t);
        let mut s = StreamFamily::new(2, 0).stream(0);
        let b = sample_boundary_limit(&t, &l, 5, BoundaryLimitOptions::default(), &mut s).unwrap();
        assert!(b.end.is_zero());
        assert_eq!(b.end.absolute_precision(), Some(5));
    }

    #[test]
    fn boundary_limit_needs_positive_drift() {
        let t = tree();
        let l = law(&t, (1, 4));
        let mut s = StreamFamily::new(2, 0).stream(0);
        assert!(matches!(
            sample_boundary_limit(&t, &l, 5, BoundaryLimitOptions::default(), &mut s),
            Err(Error::NonPositiveDrift(_))
        ));
    }

    #[test]
    fn negative_drift_is_classified_toward_omega() {
        let t = tree();
        let l = law(&t, (1, 4));
        let rep = height_regime_report(&l, 200, 2000, 20, 10, &Sequential, StreamFamily::new(4, 0));
        assert_eq!(rep.observed, Regime::TowardOmega);
        assert!(rep.consistent());
    }
}
