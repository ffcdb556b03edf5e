//! The lamplighter group `Z_q wr Z` acting on the Diestel-Leader half-tree.
//!
//! An element is `(sigma, h)`: a finitely supported lamp configuration and a
//! shift. It acts on configurations by `tau -> sigma + shift_h(tau)`, where
//! `shift_h(tau)(n) = tau(n - h)`. The vertex at height `k` is a configuration
//! restricted to positions `<= k`; a bottom end is a configuration with support
//! bounded below.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::tree::{AffineTree, EndComparison, FixedEnd};

/// Sorted `(position, value)` pairs with nonzero values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lamps(Vec<(i64, u32)>);

impl Lamps {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Values are reduced mod `q`; repeated positions add up.
    pub fn from_pairs(q: u32, pairs: &[(i64, i64)]) -> Self {
        let mut v: Vec<(i64, u32)> = Vec::new();
        let mut sorted: Vec<(i64, i64)> = pairs.to_vec();
        sorted.sort_by_key(|&(p, _)| p);
        for (p, x) in sorted {
            let x = x.rem_euclid(q as i64) as u32;
            match v.last_mut() {
                Some((lp, lx)) if *lp == p => *lx = (*lx + x) % q,
                _ => v.push((p, x)),
            }
        }
        v.retain(|&(_, x)| x != 0);
        Self(v)
    }

    pub fn pairs(&self) -> &[(i64, u32)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, pos: i64) -> u32 {
        match self.0.binary_search_by_key(&pos, |&(p, _)| p) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn max_position(&self) -> Option<i64> {
        self.0.last().map(|&(p, _)| p)
    }

    pub fn min_position(&self) -> Option<i64> {
        self.0.first().map(|&(p, _)| p)
    }

    /// Positions `<= k` only.
    pub fn restrict(&self, k: i64) -> Self {
        let end = self.0.partition_point(|&(p, _)| p <= k);
        Self(self.0[..end].to_vec())
    }

    fn shifted(&self, h: i64) -> Self {
        Self(self.0.iter().map(|&(p, x)| (p + h, x)).collect())
    }

    fn negated(&self, q: u32) -> Self {
        Self(self.0.iter().map(|&(p, x)| (p, q - x)).collect())
    }

    fn add(&self, other: &Self, q: u32) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                let x = (a[i].1 + b[j].1) % q;
                if x != 0 {
                    out.push((a[i].0, x));
                }
                i += 1;
                j += 1;
            }
        }
        Self(out)
    }

    /// Lowest position `<= limit` where the two differ.
    fn first_difference(&self, other: &Self, limit: i64) -> Option<i64> {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            let pa = a.get(i).map(|e| e.0);
            let pb = b.get(j).map(|e| e.0);
            let pos = match (pa, pb) {
                (None, None) => return None,
                (Some(x), None) | (None, Some(x)) => x,
                (Some(x), Some(y)) if x != y => x.min(y),
                (Some(x), Some(_)) => {
                    if a[i].1 != b[j].1 {
                        x
                    } else {
                        i += 1;
                        j += 1;
                        continue;
                    }
                }
            };
            return (pos <= limit).then_some(pos);
        }
    }
}

impl fmt::Display for Lamps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (p, x)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}:{x}")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LampElem {
    pub lamps: Lamps,
    pub shift: i64,
}

impl fmt::Display for LampElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lamp(shift = {}, lamps = {})", self.shift, self.lamps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LampVertex {
    pub height: i64,
    pub lamps: Lamps,
}

impl fmt::Display for LampVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lamp:{}:[", self.height)?;
        for (i, (p, x)) in self.lamps.pairs().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}={x}")?;
        }
        write!(f, "]")
    }
}

/// A bottom end known at positions `<= known_to`; `i64::MAX` means exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LampEnd {
    pub lamps: Lamps,
    pub known_to: i64,
}

impl fmt::Display for LampEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.known_to == i64::MAX {
            write!(f, "{}", self.lamps)
        } else {
            write!(f, "{} (to {})", self.lamps, self.known_to)
        }
    }
}

pub const DEFAULT_WINDOW: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LampTree {
    q: u32,
    window: i64,
}

impl LampTree {
    pub fn new(q: u32) -> Result<Self> {
        Self::with_window(q, DEFAULT_WINDOW)
    }

    /// `window` is how far past the lamp support fixed ends are expanded.
    pub fn with_window(q: u32, window: i64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidDegree(q as u64));
        }
        Ok(Self {
            q,
            window: window.max(1),
        })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn element(&self, shift: i64, lamps: &[(i64, i64)]) -> LampElem {
        LampElem {
            lamps: Lamps::from_pairs(self.q, lamps),
            shift,
        }
    }
}

impl AffineTree for LampTree {
    type Elem = LampElem;
    type Vertex = LampVertex;
    type Boundary = LampEnd;

    fn degree(&self) -> u64 {
        self.q as u64
    }

    fn identity(&self) -> LampElem {
        LampElem {
            lamps: Lamps::empty(),
            shift: 0,
        }
    }

    fn compose(&self, g: &LampElem, h: &LampElem) -> Result<LampElem> {
        Ok(LampElem {
            lamps: g.lamps.add(&h.lamps.shifted(g.shift), self.q),
            shift: g.shift + h.shift,
        })
    }

    fn invert(&self, g: &LampElem) -> Result<LampElem> {
        Ok(LampElem {
            lamps: g.lamps.shifted(-g.shift).negated(self.q),
            shift: -g.shift,
        })
    }

    fn phi(&self, g: &LampElem) -> i64 {
        g.shift
    }

    fn same_element(&self, g: &LampElem, h: &LampElem) -> bool {
        g == h
    }

    fn homothety(&self) -> LampElem {
        LampElem {
            lamps: Lamps::empty(),
            shift: 1,
        }
    }

    fn homothety_center(&self) -> LampEnd {
        LampEnd {
            lamps: Lamps::empty(),
            known_to: i64::MAX,
        }
    }

    fn fixed_end(&self, g: &LampElem) -> Result<FixedEnd<LampEnd>> {
        let h = g.shift;
        if h == 0 {
            return Ok(if g.lamps.is_empty() {
                FixedEnd::All
            } else {
                FixedEnd::Nothing
            });
        }
        let Some(top) = g.lamps.max_position() else {
            return Ok(FixedEnd::Unique(self.homothety_center()));
        };
        let known_to = top + self.window + h.abs();
        let mut pairs: Vec<(i64, i64)> = Vec::new();
        for &(p, x) in g.lamps.pairs() {
            let (mut pos, step, val) = if h > 0 {
                (p, h, x as i64)
            } else {
                (p - h, -h, -(x as i64))
            };
            while pos <= known_to {
                pairs.push((pos, val));
                pos += step;
            }
        }
        Ok(FixedEnd::Unique(LampEnd {
            lamps: Lamps::from_pairs(self.q, &pairs),
            known_to,
        }))
    }

    fn section(&self, e: &LampEnd) -> Result<LampElem> {
        Ok(LampElem {
            lamps: e.lamps.clone(),
            shift: 0,
        })
    }

    fn sample_rotation(&self, _stream: &mut RandomStream) -> LampElem {
        self.identity()
    }

    fn origin(&self) -> LampVertex {
        LampVertex {
            height: 0,
            lamps: Lamps::empty(),
        }
    }

    fn height(&self, x: &LampVertex) -> i64 {
        x.height
    }

    fn father(&self, x: &LampVertex) -> Result<LampVertex> {
        self.ancestor(x, x.height - 1)
    }

    fn son(&self, x: &LampVertex, branch: u64) -> Result<LampVertex> {
        if branch >= self.degree() {
            return Err(Error::BranchOutOfRange {
                branch,
                degree: self.degree(),
            });
        }
        let mut lamps = x.lamps.clone();
        if branch != 0 {
            lamps.0.push((x.height + 1, branch as u32));
        }
        Ok(LampVertex {
            height: x.height + 1,
            lamps,
        })
    }

    fn ancestor(&self, x: &LampVertex, height: i64) -> Result<LampVertex> {
        debug_assert!(height <= x.height);
        Ok(LampVertex {
            height,
            lamps: x.lamps.restrict(height),
        })
    }

    fn act_vertex(&self, g: &LampElem, x: &LampVertex) -> Result<LampVertex> {
        let height = x.height + g.shift;
        let lamps = g.lamps.restrict(height).add(&x.lamps.shifted(g.shift), self.q);
        Ok(LampVertex { height, lamps })
    }

    fn act_boundary(&self, g: &LampElem, e: &LampEnd) -> Result<LampEnd> {
        let known_to = if e.known_to == i64::MAX {
            i64::MAX
        } else {
            e.known_to + g.shift
        };
        let lamps = g.lamps.restrict(known_to).add(&e.lamps.shifted(g.shift), self.q);
        Ok(LampEnd { lamps, known_to })
    }

    fn known_to(&self, e: &LampEnd) -> i64 {
        e.known_to
    }

    fn boundary_vertex(&self, e: &LampEnd, height: i64) -> Result<LampVertex> {
        if e.known_to < height {
            return Err(Error::PrecisionExhausted {
                available: e.known_to,
                required: height,
            });
        }
        Ok(LampVertex {
            height,
            lamps: e.lamps.restrict(height),
        })
    }

    fn vertex_end(&self, x: &LampVertex) -> LampEnd {
        LampEnd {
            lamps: x.lamps.clone(),
            known_to: x.height,
        }
    }

    fn meet_vertices(&self, x: &LampVertex, y: &LampVertex) -> LampVertex {
        let m = x.height.min(y.height);
        let h = match x.lamps.first_difference(&y.lamps, m) {
            Some(j) => j - 1,
            None => m,
        };
        LampVertex {
            height: h,
            lamps: x.lamps.restrict(h),
        }
    }

    fn meet_vertex_end(&self, x: &LampVertex, e: &LampEnd) -> Result<LampVertex> {
        let limit = x.height.min(e.known_to);
        match x.lamps.first_difference(&e.lamps, limit) {
            Some(j) => self.ancestor(x, j - 1),
            None if e.known_to >= x.height => Ok(x.clone()),
            None => Err(Error::PrecisionExhausted {
                available: e.known_to,
                required: x.height,
            }),
        }
    }

    fn compare_ends(&self, a: &LampEnd, b: &LampEnd) -> EndComparison {
        let limit = a.known_to.min(b.known_to);
        match a.lamps.first_difference(&b.lamps, limit) {
            Some(j) => EndComparison::Distinct { meet: j - 1 },
            None => EndComparison::Indistinguishable { known_to: limit },
        }
    }
}
