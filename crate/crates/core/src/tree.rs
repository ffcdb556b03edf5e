//! The tree with a fixed end `omega`, its boundary and the affine group action.
//!
//! Heights follow the Busemann function: a father has height one less than
//! its sons, so heights decrease toward `omega`. Every vertex has `q` sons.

use core::fmt;
use core::hash::Hash;

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::Rational;

/// `base^exponent`, or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    Zero,
    Power { base: u64, exponent: i64 },
}

impl Norm {
    pub fn to_f64(self) -> f64 {
        match self {
            Norm::Zero => 0.0,
            Norm::Power { base, exponent } => libm::pow(base as f64, exponent as f64),
        }
    }

    /// Exact value when it fits in `i128`.
    pub fn to_rational(self) -> Option<Rational> {
        match self {
            Norm::Zero => Some(Rational::from_integer(0)),
            Norm::Power { base, exponent } => {
                let mut acc: i128 = 1;
                for _ in 0..exponent.unsigned_abs() {
                    acc = acc.checked_mul(base as i128)?;
                }
                Some(if exponent >= 0 {
                    Rational::from_integer(acc)
                } else {
                    Rational::new(1, acc)
                })
            }
        }
    }

    pub fn exponent(self) -> Option<i64> {
        match self {
            Norm::Zero => None,
            Norm::Power { exponent, .. } => Some(exponent),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Zero => write!(f, "0"),
            Norm::Power { base, exponent } => write!(f, "{base}^{exponent}"),
        }
    }
}

/// A norm-like value; `upper_bound` is set when only a bound is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormBound {
    pub value: Norm,
    pub upper_bound: bool,
}

/// An end of the tree.
#[derive(Clone, Debug, PartialEq)]
pub enum End<B> {
    Omega,
    Bottom(B),
}

/// Vertex or end.
#[derive(Clone, Debug, PartialEq)]
pub enum Point<V, B> {
    Vertex(V),
    End(End<B>),
}

/// Bottom ends fixed by a group element besides `omega`.
#[derive(Clone, Debug, PartialEq)]
pub enum FixedEnd<B> {
    /// The element acts trivially.
    All,
    /// A horocyclic translation: only `omega` is fixed.
    Nothing,
    Unique(B),
}

/// Whether two boundary points can be told apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndComparison {
    /// Height of their meet.
    Distinct { meet: i64 },
    /// Agree at every known level up to the given height.
    Indistinguishable { known_to: i64 },
}

/// A tree with a fixed end together with a closed subgroup of its affine group.
///
/// Elements, vertices and boundary points carry finite precision where the
/// realization needs it; anything that would need more raises
/// [`Error::PrecisionExhausted`].
pub trait AffineTree: Send + Sync {
    type Elem: Clone + fmt::Debug + fmt::Display + Send + Sync;
    type Vertex: Clone + PartialEq + Eq + Hash + fmt::Debug + fmt::Display + Send + Sync;
    type Boundary: Clone + fmt::Debug + fmt::Display + Send + Sync;

    /// Number of sons of every vertex.
    fn degree(&self) -> u64;

    fn identity(&self) -> Self::Elem;
    fn compose(&self, g: &Self::Elem, h: &Self::Elem) -> Result<Self::Elem>;
    fn invert(&self, g: &Self::Elem) -> Result<Self::Elem>;
    fn phi(&self, g: &Self::Elem) -> i64;
    /// Equal up to the available precision.
    fn same_element(&self, g: &Self::Elem, h: &Self::Elem) -> bool;

    /// Reference element `s` with `phi(s) = 1`.
    fn homothety(&self) -> Self::Elem;
    /// Bottom end fixed by `s`; its geodesic to `omega` is the main branch.
    fn homothety_center(&self) -> Self::Boundary;
    fn fixed_end(&self, g: &Self::Elem) -> Result<FixedEnd<Self::Boundary>>;
    /// Horocyclic element carrying the main branch's end to `e`.
    fn section(&self, e: &Self::Boundary) -> Result<Self::Elem>;
    /// Haar-distributed element of the stabilizer of the main branch.
    fn sample_rotation(&self, stream: &mut RandomStream) -> Self::Elem;

    fn origin(&self) -> Self::Vertex;
    fn height(&self, x: &Self::Vertex) -> i64;
    fn father(&self, x: &Self::Vertex) -> Result<Self::Vertex>;
    /// Son number `branch` in `0..degree`.
    fn son(&self, x: &Self::Vertex, branch: u64) -> Result<Self::Vertex>;
    /// Ancestor at `height`; requires `height <= height(x)`.
    fn ancestor(&self, x: &Self::Vertex, height: i64) -> Result<Self::Vertex>;
    fn act_vertex(&self, g: &Self::Elem, x: &Self::Vertex) -> Result<Self::Vertex>;
    fn act_boundary(&self, g: &Self::Elem, e: &Self::Boundary) -> Result<Self::Boundary>;
    /// `g x == y`; decidable even when `g x` itself is not representable.
    fn maps_to(&self, g: &Self::Elem, x: &Self::Vertex, y: &Self::Vertex) -> Result<bool> {
        Ok(self.act_vertex(g, x)? == *y)
    }

    /// Deepest height down to which the geodesic from `omega` to `e` is known.
    fn known_to(&self, e: &Self::Boundary) -> i64;
    /// Vertex at `height` on the geodesic from `e` to `omega`.
    fn boundary_vertex(&self, e: &Self::Boundary, height: i64) -> Result<Self::Vertex>;
    /// Some end below `x`, known down to `x`.
    fn vertex_end(&self, x: &Self::Vertex) -> Self::Boundary;

    fn meet_vertices(&self, x: &Self::Vertex, y: &Self::Vertex) -> Self::Vertex;
    fn meet_vertex_end(&self, x: &Self::Vertex, e: &Self::Boundary) -> Result<Self::Vertex>;
    fn compare_ends(&self, a: &Self::Boundary, b: &Self::Boundary) -> EndComparison;

    /// `g^n` by repeated squaring.
    fn power(&self, g: &Self::Elem, n: i64) -> Result<Self::Elem> {
        let mut base = if n < 0 { self.invert(g)? } else { g.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.compose(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.compose(&base, &base)?;
            }
        }
        Ok(acc)
    }

    /// Vertex of the main branch at `height`, that is `s^height o`.
    fn main_branch(&self, height: i64) -> Result<Self::Vertex> {
        self.boundary_vertex(&self.homothety_center(), height)
    }
}

/// Meet of two points; `omega` is not a valid operand.
pub fn meet<T: AffineTree>(
    tree: &T,
    a: &Point<T::Vertex, T::Boundary>,
    b: &Point<T::Vertex, T::Boundary>,
) -> Result<T::Vertex> {
    match (a, b) {
        (Point::End(End::Omega), _) | (_, Point::End(End::Omega)) => Err(Error::OmegaOperand),
        (Point::Vertex(x), Point::Vertex(y)) => Ok(tree.meet_vertices(x, y)),
        (Point::Vertex(x), Point::End(End::Bottom(e))) | (Point::End(End::Bottom(e)), Point::Vertex(x)) => {
            tree.meet_vertex_end(x, e)
        }
        (Point::End(End::Bottom(e)), Point::End(End::Bottom(f))) => match tree.compare_ends(e, f) {
            EndComparison::Distinct { meet } => tree.boundary_vertex(e, meet),
            EndComparison::Indistinguishable { known_to } => Err(Error::IndistinguishableAtPrecision { known_to }),
        },
    }
}

/// `q^{-phi(a ^ b)}`; zero for equal vertices, a flagged bound for ends
/// that agree at every known level.
pub fn theta<T: AffineTree>(
    tree: &T,
    a: &Point<T::Vertex, T::Boundary>,
    b: &Point<T::Vertex, T::Boundary>,
) -> Result<NormBound> {
    let base = tree.degree();
    let exact = |h: i64| NormBound {
        value: Norm::Power { base, exponent: -h },
        upper_bound: false,
    };
    match (a, b) {
        (Point::End(End::Omega), _) | (_, Point::End(End::Omega)) => Err(Error::OmegaOperand),
        (Point::Vertex(x), Point::Vertex(y)) if x == y => Ok(NormBound {
            value: Norm::Zero,
            upper_bound: false,
        }),
        (Point::End(End::Bottom(e)), Point::End(End::Bottom(f))) => match tree.compare_ends(e, f) {
            EndComparison::Distinct { meet } => Ok(exact(meet)),
            EndComparison::Indistinguishable { known_to } => {
                if known_to == i64::MAX {
                    Ok(NormBound {
                        value: Norm::Zero,
                        upper_bound: false,
                    })
                } else {
                    Ok(NormBound {
                        value: Norm::Power {
                            base,
                            exponent: -known_to,
                        },
                        upper_bound: true,
                    })
                }
            }
        },
        _ => Ok(exact(tree.height(&meet(tree, a, b)?))),
    }
}

pub fn graph_distance<T: AffineTree>(tree: &T, x: &T::Vertex, y: &T::Vertex) -> u64 {
    let m = tree.height(&tree.meet_vertices(x, y));
    (tree.height(x) + tree.height(y) - 2 * m) as u64
}

/// Sons of `x` in branch order.
pub fn sons<T: AffineTree>(tree: &T, x: &T::Vertex) -> Result<alloc::vec::Vec<T::Vertex>> {
    (0..tree.degree()).map(|b| tree.son(x, b)).collect()
}

/// All vertices at graph distance at most `radius` from `x`.
pub fn ball<T: AffineTree>(tree: &T, x: &T::Vertex, radius: u64) -> Result<alloc::vec::Vec<T::Vertex>> {
    let mut out = alloc::vec::Vec::new();
    let mut top = x.clone();
    for up in 0..=radius {
        // Descend from `top` without re-entering the branch we came from.
        let down_budget = radius - up;
        let mut frontier = alloc::vec![(top.clone(), 0u64)];
        let came_from = if up == 0 {
            None
        } else {
            Some(tree.ancestor(x, tree.height(&top) + 1)?)
        };
        while let Some((v, d)) = frontier.pop() {
            out.push(v.clone());
            if d < down_budget {
                for s in sons(tree, &v)? {
                    if d == 0 && Some(&s) == came_from.as_ref() {
                        continue;
                    }
                    frontier.push((s, d + 1));
                }
            }
        }
        if up < radius {
            top = tree.father(&top)?;
        }
    }
    Ok(out)
}
