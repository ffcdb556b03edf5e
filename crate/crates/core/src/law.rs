//! Finitely supported step laws.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::affine::{decompose, elem_norm};
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::tree::{AffineTree, EndComparison, FixedEnd};
use crate::Rational;

#[derive(Clone, Debug)]
pub struct Atom<E> {
    pub element: E,
    pub weight: Rational,
    pub phi: i64,
}

/// Outcome of the non-exceptionality checks on the support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// Some atom moves heights.
    pub not_horocyclic: bool,
    /// No bottom end is fixed by every atom.
    pub no_common_fixed_end: bool,
    /// `gcd` of the atoms' `phi`.
    pub phi_gcd: u64,
    pub reasons: Vec<String>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.not_horocyclic && self.no_common_fixed_end
    }

    /// Passing and generating all of `Z` in height.
    pub fn strict_pass(&self) -> bool {
        self.pass() && self.phi_gcd == 1
    }
}

pub fn validate_non_exceptional<T: AffineTree>(tree: &T, elements: &[T::Elem]) -> Result<ValidationReport> {
    let mut reasons = Vec::new();
    let phis: Vec<i64> = elements.iter().map(|g| tree.phi(g)).collect();
    let phi_gcd = phis.iter().fold(0i64, |g, &x| g.gcd(&x)) as u64;
    let not_horocyclic = phis.iter().any(|&x| x != 0);
    if !not_horocyclic {
        reasons.push("support is contained in Hor(T): every atom has phi = 0".to_string());
    }
    let mut ends = Vec::new();
    let mut moves_every_end = false;
    for g in elements {
        match tree.fixed_end(g)? {
            FixedEnd::All => {}
            FixedEnd::Nothing => moves_every_end = true,
            FixedEnd::Unique(e) => ends.push(e),
        }
    }
    let no_common_fixed_end = if moves_every_end {
        true
    } else if let Some(first) = ends.first() {
        ends.iter()
            .skip(1)
            .any(|e| matches!(tree.compare_ends(first, e), EndComparison::Distinct { .. }))
    } else {
        false
    };
    if !no_common_fixed_end {
        match ends.first() {
            Some(e) => reasons.push(format!("every atom fixes the bottom end {e}")),
            None => reasons.push("every atom acts trivially".to_string()),
        }
    }
    if phi_gcd != 1 {
        reasons.push(format!("gcd of phi over the support is {phi_gcd}, not 1"));
    }
    Ok(ValidationReport {
        not_horocyclic,
        no_common_fixed_end,
        phi_gcd,
        reasons,
    })
}

/// Informational moments; all finite for finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub mean_abs_phi: Rational,
    pub mean_norm: Rational,
    pub mean_phi_sq: Rational,
    pub epsilon: f64,
    /// `E[|b(X)|^{2 + epsilon}]`; not rational for fractional `epsilon`.
    pub mean_b_norm_pow: f64,
}

#[derive(Clone, Debug)]
pub struct StepLaw<E> {
    atoms: Vec<Atom<E>>,
    thresholds: Vec<u64>,
    drift: Rational,
    validation: ValidationReport,
}

impl<E: Clone> StepLaw<E> {
    /// Fails unless the support passes validation with `gcd(phi) = 1`,
    /// or `allow_exceptional` is set.
    pub fn new<T: AffineTree<Elem = E>>(tree: &T, atoms: Vec<(E, Rational)>, allow_exceptional: bool) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptySupport);
        }
        let total = atoms.iter().fold(Rational::zero(), |acc, (_, w)| acc + *w);
        if atoms.iter().any(|(_, w)| !w.is_positive()) || total != Rational::from_integer(1) {
            return Err(Error::WeightsNotNormalized(format!("{total}")));
        }
        let elements: Vec<E> = atoms.iter().map(|(e, _)| e.clone()).collect();
        let validation = validate_non_exceptional(tree, &elements)?;
        if !allow_exceptional && !validation.strict_pass() {
            return Err(Error::NonExceptional(validation.reasons.join("; ")));
        }
        let atoms: Vec<Atom<E>> = atoms
            .into_iter()
            .map(|(element, weight)| {
                let phi = tree.phi(&element);
                Atom { element, weight, phi }
            })
            .collect();
        let drift = atoms.iter().fold(Rational::zero(), |acc, a| {
            acc + a.weight * Rational::from_integer(a.phi as i128)
        });
        let thresholds = cumulative_thresholds(&atoms)?;
        Ok(Self {
            atoms,
            thresholds,
            drift,
            validation,
        })
    }

    pub fn atoms(&self) -> &[Atom<E>] {
        &self.atoms
    }

    pub fn drift(&self) -> Rational {
        self.drift
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.validation
    }

    pub fn max_phi(&self) -> i64 {
        self.atoms.iter().map(|a| a.phi).max().unwrap_or(0)
    }

    pub fn min_phi(&self) -> i64 {
        self.atoms.iter().map(|a| a.phi).min().unwrap_or(0)
    }

    /// Atom index by inverse CDF; exactly one draw.
    pub fn sample_index(&self, stream: &mut RandomStream) -> usize {
        let u = stream.next_u64();
        self.thresholds
            .iter()
            .position(|&t| u < t)
            .unwrap_or(self.atoms.len() - 1)
    }

    pub fn sample(&self, stream: &mut RandomStream) -> &Atom<E> {
        &self.atoms[self.sample_index(stream)]
    }

    /// The law of `X^{-1}`.
    pub fn inverse<T: AffineTree<Elem = E>>(&self, tree: &T) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok((tree.invert(&a.element)?, a.weight)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tree, atoms, true)
    }

    pub fn moment_report<T: AffineTree<Elem = E>>(&self, tree: &T, epsilon: f64) -> Result<MomentReport> {
        let mut mean_abs_phi = Rational::zero();
        let mut mean_norm = Rational::zero();
        let mut mean_phi_sq = Rational::zero();
        let mut mean_b_norm_pow = 0.0;
        for a in &self.atoms {
            let phi = Rational::from_integer(a.phi as i128);
            mean_abs_phi += a.weight * phi.abs();
            mean_phi_sq += a.weight * phi * phi;
            mean_norm += a.weight * Rational::from_integer(elem_norm(tree, &a.element)? as i128);
            let (b, _) = decompose(tree, &a.element)?;
            let nb = elem_norm(tree, &b)? as f64;
            let w = *a.weight.numer() as f64 / *a.weight.denom() as f64;
            mean_b_norm_pow += w * libm::pow(nb, 2.0 + epsilon);
        }
        Ok(MomentReport {
            mean_abs_phi,
            mean_norm,
            mean_phi_sq,
            epsilon,
            mean_b_norm_pow,
        })
    }
}

fn cumulative_thresholds<E>(atoms: &[Atom<E>]) -> Result<Vec<u64>> {
    let mut cum = Rational::zero();
    let mut out = Vec::with_capacity(atoms.len());
    for a in atoms {
        cum += a.weight;
        let (num, den) = (*cum.numer() as u128, *cum.denom() as u128);
        if den > 1u128 << 64 {
            return Err(Error::WeightsNotNormalized(format!(
                "denominator {den} exceeds the sampler's resolution"
            )));
        }
        // floor(cum * 2^64), saturating at the last atom.
        let t = if num >= den {
            u64::MAX
        } else {
            ((num << 64) / den) as u64
        };
        out.push(t);
    }
    Ok(out)
}
