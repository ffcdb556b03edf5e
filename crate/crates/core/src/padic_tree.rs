//! The Bruhat-Tits tree of `Q_p` and the action of `Aff(Q_p)` on it.
//!
//! The vertex at height `h` with center `c` is the closed disc
//! `{x : v(x - c) >= h}`; the origin is `Z_p`. A bottom end is a point of
//! `Q_p`, known down to its absolute precision.

use core::fmt;

use crate::error::{Error, Result};
use crate::padic::{DigitAgreement, PAdic, Qp};
use crate::rng::RandomStream;
use crate::tree::{AffineTree, EndComparison, FixedEnd};

/// A disc; the center is canonical, reduced modulo `p^height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Disc {
    height: i64,
    center: PAdic,
}

impl Disc {
    pub fn height(&self) -> i64 {
        self.height
    }

    pub fn center(&self) -> &PAdic {
        &self.center
    }
}

impl fmt::Display for Disc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:", self.center.prime(), self.height)?;
        match self.center.valuation() {
            None => write!(f, "0"),
            Some(v) => {
                write!(f, "{v}/")?;
                for (i, d) in self.center.digits().iter().enumerate() {
                    if i > 0 {
                        write!(f, ".")?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}

/// `u -> a u + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub t: PAdic,
    pub a: PAdic,
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "affine(t = {}, a = {})", self.t, self.a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAdicTree {
    field: Qp,
}

impl PAdicTree {
    pub fn new(field: Qp) -> Self {
        Self { field }
    }

    pub fn field(&self) -> &Qp {
        &self.field
    }

    pub fn element(&self, t: PAdic, a: PAdic) -> Result<Affine> {
        for x in [&t, &a] {
            if x.prime() != self.field.prime() {
                return Err(Error::PrimeMismatch {
                    left: self.field.prime(),
                    right: x.prime(),
                });
            }
        }
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Affine { t, a })
    }

    pub fn element_from_rationals(&self, t: (i128, i128), a: (i128, i128)) -> Result<Affine> {
        let t = self.field.from_rational(t.0, t.1)?;
        let a = self.field.from_rational(a.0, a.1)?;
        self.element(t, a)
    }

    /// The disc of `center` at `height`; the center must be known to `height`.
    pub fn disc(&self, center: &PAdic, height: i64) -> Result<Disc> {
        match center.absolute_precision() {
            Some(k) if k < height => Err(Error::PrecisionExhausted {
                available: k,
                required: height,
            }),
            _ => Ok(Disc {
                height,
                center: self.field.truncate(center, height),
            }),
        }
    }
}

impl AffineTree for PAdicTree {
    type Elem = Affine;
    type Vertex = Disc;
    type Boundary = PAdic;

    fn degree(&self) -> u64 {
        self.field.prime() as u64
    }

    fn identity(&self) -> Affine {
        Affine {
            t: self.field.zero(),
            a: self.field.one(),
        }
    }

    fn compose(&self, g: &Affine, h: &Affine) -> Result<Affine> {
        let f = &self.field;
        let at = f.mul_raw(&g.a, &h.t);
        let t = f.guard(f.add_raw(&g.t, &at), &[&g.t, &at])?;
        let a = f.guard(f.mul_raw(&g.a, &h.a), &[&g.a, &h.a])?;
        Ok(Affine { t, a })
    }

    fn invert(&self, g: &Affine) -> Result<Affine> {
        let f = &self.field;
        let a = f.inv_raw(&g.a)?;
        let t = f.neg(&f.mul_raw(&g.t, &a));
        Ok(Affine { t, a })
    }

    fn phi(&self, g: &Affine) -> i64 {
        g.a.valuation().expect("multiplier is a unit times a power of p")
    }

    fn same_element(&self, g: &Affine, h: &Affine) -> bool {
        self.field.agree(&g.t, &h.t) && self.field.agree(&g.a, &h.a)
    }

    fn homothety(&self) -> Affine {
        Affine {
            t: self.field.zero(),
            a: self.field.unit_power(1),
        }
    }

    fn homothety_center(&self) -> PAdic {
        self.field.zero()
    }

    fn fixed_end(&self, g: &Affine) -> Result<FixedEnd<PAdic>> {
        let f = &self.field;
        let d = f.sub_raw(&f.one(), &g.a);
        if d.is_zero() {
            return Ok(if g.t.is_zero() {
                FixedEnd::All
            } else {
                FixedEnd::Nothing
            });
        }
        Ok(FixedEnd::Unique(f.div_raw(&g.t, &d)?))
    }

    fn section(&self, e: &PAdic) -> Result<Affine> {
        Ok(Affine {
            t: *e,
            a: self.field.one(),
        })
    }

    fn sample_rotation(&self, stream: &mut RandomStream) -> Affine {
        Affine {
            t: self.field.zero(),
            a: self.field.random_unit(stream),
        }
    }

    fn origin(&self) -> Disc {
        Disc {
            height: 0,
            center: self.field.zero_mod(0),
        }
    }

    fn height(&self, x: &Disc) -> i64 {
        x.height
    }

    fn father(&self, x: &Disc) -> Result<Disc> {
        self.ancestor(x, x.height - 1)
    }

    fn son(&self, x: &Disc, branch: u64) -> Result<Disc> {
        if branch >= self.degree() {
            return Err(Error::BranchOutOfRange {
                branch,
                degree: self.degree(),
            });
        }
        let center = self.field.append_digit(&x.center, x.height, branch as u32)?;
        Ok(Disc {
            height: x.height + 1,
            center,
        })
    }

    fn ancestor(&self, x: &Disc, height: i64) -> Result<Disc> {
        debug_assert!(height <= x.height);
        Ok(Disc {
            height,
            center: self.field.truncate(&x.center, height),
        })
    }

    fn act_vertex(&self, g: &Affine, x: &Disc) -> Result<Disc> {
        let f = &self.field;
        let height = x.height + self.phi(g);
        let center = f.add_raw(&f.mul_raw(&g.a, &x.center), &g.t);
        self.disc(&center, height)
    }

    fn maps_to(&self, g: &Affine, x: &Disc, y: &Disc) -> Result<bool> {
        if x.height + self.phi(g) != y.height {
            return Ok(false);
        }
        let f = &self.field;
        let image = f.add_raw(&f.mul_raw(&g.a, &x.center), &g.t);
        let diff = f.sub_raw(&image, &y.center);
        match (diff.valuation(), diff.absolute_precision()) {
            (Some(v), _) => Ok(v >= y.height),
            (None, None) => Ok(true),
            (None, Some(k)) if k >= y.height => Ok(true),
            (None, Some(k)) => Err(Error::PrecisionExhausted {
                available: k,
                required: y.height,
            }),
        }
    }

    fn act_boundary(&self, g: &Affine, e: &PAdic) -> Result<PAdic> {
        let f = &self.field;
        Ok(f.add_raw(&f.mul_raw(&g.a, e), &g.t))
    }

    fn known_to(&self, e: &PAdic) -> i64 {
        e.absolute_precision().unwrap_or(i64::MAX)
    }

    fn boundary_vertex(&self, e: &PAdic, height: i64) -> Result<Disc> {
        self.disc(e, height)
    }

    fn vertex_end(&self, x: &Disc) -> PAdic {
        x.center
    }

    fn meet_vertices(&self, x: &Disc, y: &Disc) -> Disc {
        let m = x.height.min(y.height);
        let h = match self.field.compare_digits(&x.center, &y.center) {
            Ok(DigitAgreement::DifferAt(j)) => j.min(m),
            _ => m,
        };
        Disc {
            height: h,
            center: self.field.truncate(&x.center, h),
        }
    }

    fn meet_vertex_end(&self, x: &Disc, e: &PAdic) -> Result<Disc> {
        let h = match self.field.compare_digits(&x.center, e)? {
            DigitAgreement::DifferAt(j) => j.min(x.height),
            DigitAgreement::AgreeTo(k) if k >= x.height => x.height,
            DigitAgreement::AgreeTo(k) => {
                return Err(Error::PrecisionExhausted {
                    available: k,
                    required: x.height,
                })
            }
            DigitAgreement::Identical => x.height,
        };
        self.ancestor(x, h)
    }

    fn compare_ends(&self, a: &PAdic, b: &PAdic) -> EndComparison {
        match self.field.compare_digits(a, b) {
            Ok(DigitAgreement::DifferAt(j)) => EndComparison::Distinct { meet: j },
            Ok(DigitAgreement::AgreeTo(k)) => EndComparison::Indistinguishable { known_to: k },
            _ => EndComparison::Indistinguishable { known_to: i64::MAX },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PrecisionBudget;
    use crate::tree::{graph_distance, meet, theta, End, Norm, Point};

    fn tree(p: u32) -> PAdicTree {
        PAdicTree::new(Qp::new(p, PrecisionBudget::new(24, 8).unwrap()).unwrap())
    }

    #[test]
    fn homothety_moves_origin_down_one_level() {
        let t = tree(2);
        let so = t.act_vertex(&t.homothety(), &t.origin()).unwrap();
        assert_eq!(so.height(), 1);
        assert_eq!(t.father(&so).unwrap(), t.origin());
        assert_eq!(alloc::format!("{}", t.origin()), "2:0:0");
    }

    #[test]
    fn maps_to_decides_where_the_image_is_unknown() {
        let t = tree(2);
        let f = t.field();
        let o = t.origin();
        let far = Affine {
            t: f.unit_power(-100),
            a: f.one(),
        };
        assert!(t.act_vertex(&far, &o).is_err());
        assert!(!t.maps_to(&far, &o, &o).unwrap());
        let near = Affine {
            t: f.unit_power(3),
            a: f.one(),
        };
        assert!(t.maps_to(&near, &o, &o).unwrap());
        let fuzzy = Affine {
            t: f.zero_mod(-2),
            a: f.one(),
        };
        assert!(t.maps_to(&fuzzy, &o, &o).is_err());
    }

    #[test]
    fn sons_are_distinct_and_share_the_father() {
        let t = tree(3);
        let o = t.origin();
        let sons: alloc::vec::Vec<_> = (0..3).map(|b| t.son(&o, b).unwrap()).collect();
        assert_ne!(sons[0], sons[1]);
        assert_ne!(sons[1], sons[2]);
        for s in &sons {
            assert_eq!(t.father(s).unwrap(), o);
        }
        assert!(t.son(&o, 3).is_err());
        assert_eq!(graph_distance(&t, &sons[0], &sons[2]), 2);
    }

    #[test]
    fn meet_of_ends_is_the_disc_of_their_first_common_digits() {
        let t = tree(2);
        let f = t.field().clone();
        let a = f.from_int(5);
        let b = f.from_int(1);
        let m = meet(&t, &Point::End(End::Bottom(a)), &Point::End(End::Bottom(b))).unwrap();
        assert_eq!(m.height(), 2);
        let th = theta(&t, &Point::End(End::Bottom(a)), &Point::End(End::Bottom(b))).unwrap();
        assert_eq!(th.value, Norm::Power { base: 2, exponent: -2 });
        assert_eq!(
            meet(&t, &Point::End(End::Omega), &Point::Vertex(t.origin())),
            Err(Error::OmegaOperand)
        );
    }

    #[test]
    fn fixed_end_of_a_homothety_centered_at_one() {
        let t = tree(3);
        // u -> 3u - 2 fixes 1.
        let g = t.element_from_rationals((-2, 1), (3, 1)).unwrap();
        match t.fixed_end(&g).unwrap() {
            FixedEnd::Unique(y) => assert!(t.field().agree(&y, &t.field().one())),
            other => panic!("{other:?}"),
        }
        let tr = t.element_from_rationals((1, 1), (1, 1)).unwrap();
        assert_eq!(t.fixed_end(&tr).unwrap(), FixedEnd::Nothing);
        assert_eq!(t.fixed_end(&t.identity()).unwrap(), FixedEnd::All);
    }

    #[test]
    fn acting_on_a_shallow_translation_needs_precision() {
        let t = tree(2);
        let f = t.field().clone();
        let g = t.element(f.zero_mod(3), f.one()).unwrap();
        assert!(t.act_vertex(&g, &t.origin()).is_ok());
        let deep = t.main_branch(5).unwrap();
        assert!(matches!(t.act_vertex(&g, &deep), Err(Error::PrecisionExhausted { .. })));
    }
}
