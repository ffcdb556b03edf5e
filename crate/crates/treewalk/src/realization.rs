//! What the experiment layer needs from a concrete tree beyond [`AffineTree`].

use treewalk_core::lamplighter::{LampElem, LampEnd, LampTree, Lamps};
use treewalk_core::padic::PAdic;
use treewalk_core::padic_tree::{Affine, PAdicTree};
use treewalk_core::rng::RandomStream;
use treewalk_core::tree::{AffineTree, NormBound};

use crate::literal::{self, LiteralResult};

pub trait Realization: AffineTree {
    fn kind(&self) -> &'static str;
    fn parse_element(&self, s: &str) -> LiteralResult<Self::Elem>;
    fn parse_vertex(&self, s: &str) -> LiteralResult<Self::Vertex>;
    /// Element with `|phi| <= 3` and a non-trivial horocyclic part.
    fn random_element(&self, stream: &mut RandomStream) -> Self::Elem;
    /// Bottom end known exactly or to working precision.
    fn random_end(&self, stream: &mut RandomStream) -> Self::Boundary;
    /// `||a - b||` computed by field arithmetic; `None` without a field.
    fn field_distance(&self, a: &Self::Boundary, b: &Self::Boundary) -> Option<NormBound>;
    /// `g_n -> omega` with `phi(g_n) = n`; `None` when not available.
    fn ascend_escape(&self, n: i64) -> Option<Self::Elem>;
    /// Horocyclic elements fixing the center of the homothety.
    fn default_periods(&self) -> Vec<Self::Elem>;
}

fn random_digits(p: u32, n: u32, stream: &mut RandomStream) -> Vec<u32> {
    (0..n).map(|_| stream.below(p as u64) as u32).collect()
}

impl Realization for PAdicTree {
    fn kind(&self) -> &'static str {
        "padic"
    }

    fn parse_element(&self, s: &str) -> LiteralResult<Affine> {
        literal::parse_affine(self, s)
    }

    fn parse_vertex(&self, s: &str) -> LiteralResult<Self::Vertex> {
        literal::parse_disc(self, s)
    }

    fn random_element(&self, stream: &mut RandomStream) -> Affine {
        let f = self.field();
        let t = self.random_end(stream);
        let k = stream.below(7) as i64 - 3;
        let unit = f.random_unit(stream);
        let a = f.mul_raw(&f.unit_power(k), &unit);
        self.element(t, a).expect("non-zero multiplier")
    }

    fn random_end(&self, stream: &mut RandomStream) -> PAdic {
        let f = self.field();
        let v = stream.below(7) as i64 - 3;
        let digits = random_digits(f.prime(), f.precision(), stream);
        f.from_digits(v, &digits).expect("digits in range")
    }

    fn field_distance(&self, a: &PAdic, b: &PAdic) -> Option<NormBound> {
        let f = self.field();
        Some(f.norm(&f.sub_raw(a, b)))
    }

    fn ascend_escape(&self, n: i64) -> Option<Affine> {
        let f = self.field();
        Some(Affine {
            t: f.unit_power(-n),
            a: f.unit_power(n),
        })
    }

    fn default_periods(&self) -> Vec<Affine> {
        let f = self.field();
        let p = f.prime() as i128;
        [p + 1, p * p + 1, -1]
            .into_iter()
            .map(|u| Affine {
                t: f.zero(),
                a: f.from_int(u),
            })
            .collect()
    }
}

impl Realization for LampTree {
    fn kind(&self) -> &'static str {
        "lamplighter"
    }

    fn parse_element(&self, s: &str) -> LiteralResult<LampElem> {
        literal::parse_lamp_elem(self, s)
    }

    fn parse_vertex(&self, s: &str) -> LiteralResult<Self::Vertex> {
        literal::parse_lamp_vertex(self, s)
    }

    fn random_element(&self, stream: &mut RandomStream) -> LampElem {
        let shift = stream.below(7) as i64 - 3;
        let count = stream.below(5);
        let lamps: Vec<(i64, i64)> = (0..count)
            .map(|_| {
                (
                    stream.below(13) as i64 - 6,
                    1 + stream.below(self.q() as u64 - 1) as i64,
                )
            })
            .collect();
        self.element(shift, &lamps)
    }

    fn random_end(&self, stream: &mut RandomStream) -> LampEnd {
        let pairs: Vec<(i64, i64)> = (-6..12)
            .map(|pos| (pos, stream.below(self.q() as u64) as i64))
            .collect();
        LampEnd {
            lamps: Lamps::from_pairs(self.q(), &pairs),
            known_to: i64::MAX,
        }
    }

    fn field_distance(&self, _: &LampEnd, _: &LampEnd) -> Option<NormBound> {
        None
    }

    fn ascend_escape(&self, _: i64) -> Option<LampElem> {
        None
    }

    /// The rotation group at the zero configuration is trivial.
    fn default_periods(&self) -> Vec<LampElem> {
        vec![self.identity()]
    }
}
