//! Bounded-precision arithmetic in `Q_p`.
//!
//! A nonzero value is `p^v * u` with `u` a unit known modulo `p^n`, so its
//! absolute precision is `v + n`. Zero is either exact or known only modulo
//! `p^k`. Every operation propagates absolute precision; public operations in
//! [`Qp`] additionally refuse results whose relative precision collapses below
//! the configured budget.

use alloc::vec::Vec;
use core::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::tree::{Norm, NormBound};

pub const DEFAULT_WORKING_PRECISION: u32 = 48;
pub const DEFAULT_MIN_ACCEPTABLE: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionBudget {
    pub working_precision: u32,
    pub min_acceptable: u32,
}

impl PrecisionBudget {
    pub fn new(working_precision: u32, min_acceptable: u32) -> Result<Self> {
        if working_precision == 0 || min_acceptable > working_precision {
            return Err(Error::InvalidBudget(alloc::format!(
                "working precision {working_precision} with minimum {min_acceptable}"
            )));
        }
        Ok(Self {
            working_precision,
            min_acceptable,
        })
    }
}

impl Default for PrecisionBudget {
    fn default() -> Self {
        Self {
            working_precision: DEFAULT_WORKING_PRECISION,
            min_acceptable: DEFAULT_MIN_ACCEPTABLE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Repr {
    /// `None` is the exact zero.
    Zero {
        known_to: Option<i64>,
    },
    Unit {
        valuation: i64,
        unit: u128,
        precision: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PAdic {
    prime: u32,
    repr: Repr,
}

/// Outcome of comparing two p-adic numbers digit by digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DigitAgreement {
    /// Lowest position at which the digits differ.
    DifferAt(i64),
    /// Digits agree at every position below the given one, nothing more is known.
    AgreeTo(i64),
    /// Both are the exact zero.
    Identical,
}

impl PAdic {
    pub fn prime(&self) -> u32 {
        self.prime
    }

    /// `None` for zero (exact or to precision).
    pub fn valuation(&self) -> Option<i64> {
        match self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { valuation, .. } => Some(valuation),
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { known_to: None })
    }

    /// True for the exact zero and for values known to vanish modulo some `p^k`.
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// Number of known unit digits; `None` for zero.
    pub fn relative_precision(&self) -> Option<u32> {
        match self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { precision, .. } => Some(precision),
        }
    }

    /// `None` means infinite (the exact zero).
    pub fn absolute_precision(&self) -> Option<i64> {
        match self.repr {
            Repr::Zero { known_to } => known_to,
            Repr::Unit {
                valuation, precision, ..
            } => Some(valuation + precision as i64),
        }
    }

    /// The unit part, reduced modulo `p^precision`.
    pub fn unit(&self) -> Option<u128> {
        match self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { unit, .. } => Some(unit),
        }
    }

    /// Known unit digits, least significant first.
    pub fn digits(&self) -> Vec<u32> {
        let mut out = Vec::new();
        if let Repr::Unit {
            mut unit, precision, ..
        } = self.repr
        {
            let p = self.prime as u128;
            for _ in 0..precision {
                out.push((unit % p) as u32);
                unit /= p;
            }
        }
        out
    }

    /// Digit at absolute position `k`; `None` past the known precision.
    pub fn digit(&self, k: i64) -> Option<u32> {
        match self.repr {
            Repr::Zero { known_to } => match known_to {
                Some(limit) if k >= limit => None,
                _ => Some(0),
            },
            Repr::Unit {
                valuation,
                unit,
                precision,
            } => {
                if k < valuation {
                    Some(0)
                } else if k >= valuation + precision as i64 {
                    None
                } else {
                    let p = self.prime as u128;
                    let mut u = unit;
                    for _ in 0..(k - valuation) {
                        u /= p;
                    }
                    Some((u % p) as u32)
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self.repr {
            Repr::Zero { .. } => 0.0,
            Repr::Unit { valuation, unit, .. } => libm::pow(self.prime as f64, valuation as f64) * unit as f64,
        }
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr {
            Repr::Zero { known_to: None } => write!(f, "0"),
            Repr::Zero { known_to: Some(k) } => write!(f, "0 (mod {}^{})", self.prime, k),
            Repr::Unit { valuation, .. } => {
                write!(f, "{}^{} * (", self.prime, valuation)?;
                let digits = self.digits();
                let len = digits.iter().rposition(|&d| d != 0).map_or(1, |i| i + 1);
                for (i, d) in digits[..len].iter().enumerate() {
                    if i > 0 {
                        write!(f, ".")?;
                    }
                    write!(f, "{d}")?;
                }
                write!(f, ")_{}", self.prime)
            }
        }
    }
}

/// Largest `n` with `p^n < 2^127`.
pub fn max_precision(prime: u32) -> u32 {
    let p = prime as u128;
    let mut n = 0u32;
    let mut acc: u128 = 1;
    while let Some(next) = acc.checked_mul(p) {
        if next >= 1u128 << 127 {
            break;
        }
        acc = next;
        n += 1;
    }
    n
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Arithmetic context: a prime, a budget and a table of powers of `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qp {
    prime: u32,
    budget: PrecisionBudget,
    powers: Vec<u128>,
}

impl Qp {
    /// The working precision is clamped to what fits in `u128` arithmetic.
    pub fn new(prime: u32, budget: PrecisionBudget) -> Result<Self> {
        if !is_prime(prime as u64) || prime > 1 << 20 {
            return Err(Error::InvalidPrime(prime as u64));
        }
        let cap = max_precision(prime);
        let working = budget.working_precision.min(cap);
        let budget = PrecisionBudget::new(working, budget.min_acceptable.min(working))?;
        let mut powers = Vec::with_capacity(working as usize + 1);
        let mut acc: u128 = 1;
        for _ in 0..=working {
            powers.push(acc);
            acc = acc.saturating_mul(prime as u128);
        }
        Ok(Self { prime, budget, powers })
    }

    pub fn with_default_budget(prime: u32) -> Result<Self> {
        Self::new(prime, PrecisionBudget::default())
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn budget(&self) -> PrecisionBudget {
        self.budget
    }

    pub fn precision(&self) -> u32 {
        self.budget.working_precision
    }

    fn pow(&self, k: u32) -> u128 {
        self.powers[k as usize]
    }

    fn check_prime(&self, x: &PAdic) -> Result<()> {
        if x.prime != self.prime {
            return Err(Error::PrimeMismatch {
                left: self.prime,
                right: x.prime,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> PAdic {
        PAdic {
            prime: self.prime,
            repr: Repr::Zero { known_to: None },
        }
    }

    /// Zero known modulo `p^k`.
    pub fn zero_mod(&self, k: i64) -> PAdic {
        PAdic {
            prime: self.prime,
            repr: Repr::Zero { known_to: Some(k) },
        }
    }

    pub fn one(&self) -> PAdic {
        self.unit_power(0)
    }

    /// `p^k` at full working precision.
    pub fn unit_power(&self, k: i64) -> PAdic {
        PAdic {
            prime: self.prime,
            repr: Repr::Unit {
                valuation: k,
                unit: 1,
                precision: self.precision(),
            },
        }
    }

    pub fn from_int(&self, n: i128) -> PAdic {
        self.from_rational(n, 1).expect("denominator is one")
    }

    pub fn from_rational(&self, num: i128, den: i128) -> Result<PAdic> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        if num == 0 {
            return Ok(self.zero());
        }
        let negative = (num < 0) != (den < 0);
        let (vn, un) = self.split_int(num.unsigned_abs());
        let (vd, ud) = self.split_int(den.unsigned_abs());
        let n = self.precision();
        let m = self.pow(n);
        let mut unit = self.mulmod(un % m, self.inv_mod(ud % m, n), m);
        if negative {
            unit = m - unit;
        }
        Ok(PAdic {
            prime: self.prime,
            repr: Repr::Unit {
                valuation: vn - vd,
                unit,
                precision: n,
            },
        })
    }

    /// `p^valuation * sum d_i p^i`; leading zero digits shift into the valuation.
    pub fn from_digits(&self, valuation: i64, digits: &[u32]) -> Result<PAdic> {
        let p = self.prime;
        if digits.iter().any(|&d| d >= p) {
            return Err(Error::InvalidLiteral(alloc::format!("digit out of range for p = {p}")));
        }
        let skip = digits.iter().take_while(|&&d| d == 0).count();
        let rest = &digits[skip..];
        let v = valuation + skip as i64;
        if rest.is_empty() {
            return Ok(self.zero_mod(valuation + digits.len() as i64));
        }
        let n = (rest.len() as u32).min(self.precision());
        let mut unit: u128 = 0;
        for (i, &d) in rest.iter().take(n as usize).enumerate() {
            unit += d as u128 * self.pow(i as u32);
        }
        Ok(PAdic {
            prime: p,
            repr: Repr::Unit {
                valuation: v,
                unit,
                precision: n,
            },
        })
    }

    fn split_int(&self, mut x: u128) -> (i64, u128) {
        let p = self.prime as u128;
        let mut v = 0i64;
        while x.is_multiple_of(p) {
            x /= p;
            v += 1;
        }
        (v, x)
    }

    fn unit_valuation(&self, x: u128) -> u32 {
        if self.prime == 2 {
            return x.trailing_zeros();
        }
        let (v, _) = self.split_int(x);
        v as u32
    }

    fn mulmod(&self, a: u128, b: u128, m: u128) -> u128 {
        if self.prime == 2 {
            return a.wrapping_mul(b) & (m - 1);
        }
        if a < 1 << 64 && b < 1 << 64 {
            return (a * b) % m;
        }
        let (mut a, mut b) = (a % m, b % m);
        let mut acc: u128 = 0;
        while b > 0 {
            if b & 1 == 1 {
                acc += a;
                if acc >= m {
                    acc -= m;
                }
            }
            a += a;
            if a >= m {
                a -= m;
            }
            b >>= 1;
        }
        acc
    }

    fn inv_mod(&self, u: u128, n: u32) -> u128 {
        let m = self.pow(n);
        if m == 1 {
            return 0;
        }
        let g = (u as i128).extended_gcd(&(m as i128));
        debug_assert_eq!(g.gcd, 1);
        g.x.rem_euclid(m as i128) as u128
    }

    /// Reduces `x` to absolute precision at most `k`.
    pub fn truncate(&self, x: &PAdic, k: i64) -> PAdic {
        match x.repr {
            Repr::Zero { known_to } => match known_to {
                Some(j) if j <= k => *x,
                _ => self.zero_mod(k),
            },
            Repr::Unit {
                valuation,
                unit,
                precision,
            } => {
                if valuation + precision as i64 <= k {
                    *x
                } else if k <= valuation {
                    self.zero_mod(k)
                } else {
                    let n = (k - valuation) as u32;
                    PAdic {
                        prime: x.prime,
                        repr: Repr::Unit {
                            valuation,
                            unit: unit % self.pow(n),
                            precision: n,
                        },
                    }
                }
            }
        }
    }

    /// Appends `digit` at absolute position `k`; `x` must be known exactly to `k`.
    pub fn append_digit(&self, x: &PAdic, k: i64, digit: u32) -> Result<PAdic> {
        debug_assert_eq!(x.absolute_precision(), Some(k));
        match x.repr {
            Repr::Zero { .. } if digit == 0 => Ok(self.zero_mod(k + 1)),
            Repr::Zero { .. } => Ok(PAdic {
                prime: self.prime,
                repr: Repr::Unit {
                    valuation: k,
                    unit: digit as u128,
                    precision: 1,
                },
            }),
            Repr::Unit {
                valuation,
                unit,
                precision,
            } => {
                if precision >= self.precision() {
                    return Err(Error::PrecisionExhausted {
                        available: precision as i64,
                        required: precision as i64 + 1,
                    });
                }
                Ok(PAdic {
                    prime: self.prime,
                    repr: Repr::Unit {
                        valuation,
                        unit: unit + digit as u128 * self.pow(precision),
                        precision: precision + 1,
                    },
                })
            }
        }
    }

    /// Uniform element of `Z_p^x` at full working precision.
    pub fn random_unit(&self, stream: &mut crate::rng::RandomStream) -> PAdic {
        let p = self.prime as u64;
        let mut unit = 1 + stream.below(p - 1) as u128;
        for i in 1..self.precision() {
            unit += stream.below(p) as u128 * self.pow(i);
        }
        PAdic {
            prime: self.prime,
            repr: Repr::Unit {
                valuation: 0,
                unit,
                precision: self.precision(),
            },
        }
    }

    /// Addition without the budget check.
    pub fn add_raw(&self, x: &PAdic, y: &PAdic) -> PAdic {
        match (x.repr, y.repr) {
            (Repr::Zero { known_to: kx }, Repr::Zero { known_to: ky }) => {
                let k = match (kx, ky) {
                    (None, k) | (k, None) => k,
                    (Some(a), Some(b)) => Some(a.min(b)),
                };
                PAdic {
                    prime: self.prime,
                    repr: Repr::Zero { known_to: k },
                }
            }
            (Repr::Zero { known_to: None }, _) => *y,
            (_, Repr::Zero { known_to: None }) => *x,
            (Repr::Zero { known_to: Some(k) }, _) => self.truncate(y, k),
            (_, Repr::Zero { known_to: Some(k) }) => self.truncate(x, k),
            (
                Repr::Unit {
                    valuation: vx,
                    unit: ux,
                    precision: nx,
                },
                Repr::Unit {
                    valuation: vy,
                    unit: uy,
                    precision: ny,
                },
            ) => {
                let ((lv, lu, _), (hv, hu, _)) = if vx <= vy {
                    ((vx, ux, nx), (vy, uy, ny))
                } else {
                    ((vy, uy, ny), (vx, ux, nx))
                };
                let abs = (vx + nx as i64).min(vy + ny as i64);
                let r = (abs - lv) as u32;
                let m = self.pow(r);
                let shift = hv - lv;
                let a = lu % m;
                let b = if shift >= r as i64 {
                    0
                } else {
                    let s = shift as u32;
                    (hu % self.pow(r - s)) * self.pow(s)
                };
                let mut sum = a + b;
                if sum >= m {
                    sum -= m;
                }
                if sum == 0 {
                    return self.zero_mod(abs);
                }
                let k = self.unit_valuation(sum);
                PAdic {
                    prime: self.prime,
                    repr: Repr::Unit {
                        valuation: lv + k as i64,
                        unit: sum / self.pow(k),
                        precision: r - k,
                    },
                }
            }
        }
    }

    pub fn neg(&self, x: &PAdic) -> PAdic {
        match x.repr {
            Repr::Zero { .. } => *x,
            Repr::Unit {
                valuation,
                unit,
                precision,
            } => PAdic {
                prime: x.prime,
                repr: Repr::Unit {
                    valuation,
                    unit: self.pow(precision) - unit,
                    precision,
                },
            },
        }
    }

    pub fn sub_raw(&self, x: &PAdic, y: &PAdic) -> PAdic {
        self.add_raw(x, &self.neg(y))
    }

    pub fn mul_raw(&self, x: &PAdic, y: &PAdic) -> PAdic {
        match (x.repr, y.repr) {
            (Repr::Zero { known_to: None }, _) | (_, Repr::Zero { known_to: None }) => self.zero(),
            (Repr::Zero { known_to: Some(a) }, Repr::Zero { known_to: Some(b) }) => self.zero_mod(a + b),
            (Repr::Zero { known_to: Some(k) }, Repr::Unit { valuation, .. })
            | (Repr::Unit { valuation, .. }, Repr::Zero { known_to: Some(k) }) => self.zero_mod(k + valuation),
            (
                Repr::Unit {
                    valuation: vx,
                    unit: ux,
                    precision: nx,
                },
                Repr::Unit {
                    valuation: vy,
                    unit: uy,
                    precision: ny,
                },
            ) => {
                let n = nx.min(ny);
                let m = self.pow(n);
                PAdic {
                    prime: self.prime,
                    repr: Repr::Unit {
                        valuation: vx + vy,
                        unit: self.mulmod(ux % m, uy % m, m),
                        precision: n,
                    },
                }
            }
        }
    }

    pub fn inv_raw(&self, x: &PAdic) -> Result<PAdic> {
        match x.repr {
            Repr::Zero { .. } => Err(Error::DivisionByZero),
            Repr::Unit {
                valuation,
                unit,
                precision,
            } => Ok(PAdic {
                prime: x.prime,
                repr: Repr::Unit {
                    valuation: -valuation,
                    unit: self.inv_mod(unit, precision),
                    precision,
                },
            }),
        }
    }

    pub fn div_raw(&self, x: &PAdic, y: &PAdic) -> Result<PAdic> {
        Ok(self.mul_raw(x, &self.inv_raw(y)?))
    }

    /// Rejects results that lost relative precision below the budget.
    pub fn guard(&self, result: PAdic, inputs: &[&PAdic]) -> Result<PAdic> {
        if let Some(n) = result.relative_precision() {
            let inherited = inputs
                .iter()
                .filter_map(|x| x.relative_precision())
                .min()
                .unwrap_or(self.precision());
            if n < self.budget.min_acceptable && n < inherited {
                return Err(Error::PrecisionExhausted {
                    available: n as i64,
                    required: self.budget.min_acceptable as i64,
                });
            }
        }
        Ok(result)
    }

    pub fn add(&self, x: &PAdic, y: &PAdic) -> Result<PAdic> {
        self.check_prime(x)?;
        self.check_prime(y)?;
        self.guard(self.add_raw(x, y), &[x, y])
    }

    pub fn sub(&self, x: &PAdic, y: &PAdic) -> Result<PAdic> {
        self.check_prime(x)?;
        self.check_prime(y)?;
        self.guard(self.sub_raw(x, y), &[x, y])
    }

    pub fn mul(&self, x: &PAdic, y: &PAdic) -> Result<PAdic> {
        self.check_prime(x)?;
        self.check_prime(y)?;
        self.guard(self.mul_raw(x, y), &[x, y])
    }

    pub fn inv(&self, x: &PAdic) -> Result<PAdic> {
        self.check_prime(x)?;
        self.inv_raw(x)
    }

    pub fn div(&self, x: &PAdic, y: &PAdic) -> Result<PAdic> {
        self.check_prime(x)?;
        self.check_prime(y)?;
        self.guard(self.div_raw(x, y)?, &[x, y])
    }

    /// `||x||_p`; for zero-to-precision values the bound `p^{-k}` is flagged.
    pub fn norm(&self, x: &PAdic) -> NormBound {
        let base = self.prime as u64;
        match x.repr {
            Repr::Zero { known_to: None } => NormBound {
                value: Norm::Zero,
                upper_bound: false,
            },
            Repr::Zero { known_to: Some(k) } => NormBound {
                value: Norm::Power { base, exponent: -k },
                upper_bound: true,
            },
            Repr::Unit { valuation, .. } => NormBound {
                value: Norm::Power {
                    base,
                    exponent: -valuation,
                },
                upper_bound: false,
            },
        }
    }

    /// Digit comparison; independent of subtraction.
    pub fn compare_digits(&self, x: &PAdic, y: &PAdic) -> Result<DigitAgreement> {
        self.check_prime(x)?;
        self.check_prime(y)?;
        let limit = match (x.absolute_precision(), y.absolute_precision()) {
            (None, None) => return Ok(DigitAgreement::Identical),
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => a.min(b),
        };
        let lo = match (x.valuation(), y.valuation()) {
            (None, None) => return Ok(DigitAgreement::AgreeTo(limit)),
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => a.min(b),
        };
        if lo >= limit {
            return Ok(DigitAgreement::AgreeTo(limit));
        }
        let width = (limit - lo) as u32;
        let window = |z: &PAdic| -> u128 {
            match z.repr {
                Repr::Zero { .. } => 0,
                Repr::Unit { valuation, unit, .. } => {
                    let shift = valuation - lo;
                    if shift >= width as i64 {
                        0
                    } else {
                        let s = shift as u32;
                        (unit % self.pow(width - s)) * self.pow(s)
                    }
                }
            }
        };
        let (mut a, mut b) = (window(x), window(y));
        if a == b {
            return Ok(DigitAgreement::AgreeTo(limit));
        }
        if self.prime == 2 {
            return Ok(DigitAgreement::DifferAt(lo + (a ^ b).trailing_zeros() as i64));
        }
        let p = self.prime as u128;
        let mut i = 0i64;
        while a % p == b % p {
            a /= p;
            b /= p;
            i += 1;
        }
        Ok(DigitAgreement::DifferAt(lo + i))
    }

    /// True when `x - y` vanishes to the available precision.
    pub fn agree(&self, x: &PAdic, y: &PAdic) -> bool {
        self.sub_raw(x, y).is_zero()
    }
}
