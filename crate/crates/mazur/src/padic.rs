//! p-adic numbers with explicit precision tracking.
//!
//! A [`PadicNumber`] is an element of Q_p known to finite precision: a
//! valuation together with `rel_prec` base-p digits of its unit part.  The
//! absolute precision (valuation + relative precision) is the exponent up to
//! which the value is pinned down, and every arithmetic operation propagates
//! the honest bound.  Subtracting two nearby values therefore produces a
//! "zero to precision" result, which is distinct from the exact zero and is
//! never silently promoted to it.
//!
//! The module also provides:
//!
//! * canonical representatives of directions (a : b) in P^1(Z_p), normalized
//!   so the smaller valuation is 0, with the chart recording which coordinate
//!   is the unit;
//! * generalized binomial coefficients C(c, k) for c in Z_p;
//! * Kronecker symbols and Euler phi on prime powers.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;

/// Relative precision used when a caller does not request one.
pub const DEFAULT_REL_PREC: u32 = 20;

/// Valuation of a p-adic number: finite, or infinite for anything without a
/// certified nonzero digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    /// Exact zero, or zero to the full absolute precision.
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// The exact zero of Q_p.
    ExactZero,
    /// Indistinguishable from zero below p^abs_prec: the valuation is only
    /// known to be at least `abs_prec`.
    ZeroToPrecision { abs_prec: i64 },
    /// p^valuation * unit with unit a p-adic unit known modulo p^rel_prec.
    Unit {
        valuation: i64,
        unit: BigUint,
        rel_prec: u32,
    },
}

/// An element of Q_p carried at explicit finite precision.
#[derive(Debug, Clone)]
pub struct PadicNumber {
    prime: u64,
    repr: Repr,
}

fn big(p: u64) -> BigUint {
    BigUint::from(p)
}

fn p_pow(p: u64, k: u32) -> BigUint {
    big(p).pow(k)
}

/// Multiplicity of p in n; n must be nonzero.
fn val_in_biguint(n: &BigUint, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let bp = big(p);
    let mut v = 0u32;
    let mut cur = n.clone();
    loop {
        let (q, r) = cur.div_rem(&bp);
        if !r.is_zero() {
            return v;
        }
        v += 1;
        cur = q;
    }
}

fn val_in_i64(n: i64, p: u64) -> u32 {
    debug_assert!(n != 0);
    let mut v = 0;
    let mut n = n.unsigned_abs();
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Inverse of `u` modulo `m`; `u` must be coprime to `m`.
fn inv_mod(u: &BigUint, m: &BigUint) -> BigUint {
    let e = BigInt::from(u.clone()).extended_gcd(&BigInt::from(m.clone()));
    debug_assert!(e.gcd.is_one(), "inverse of a non-unit requested");
    e.x.mod_floor(&BigInt::from(m.clone()))
        .to_biguint()
        .expect("mod_floor of a positive modulus is nonnegative")
}

/// Trial-division primality for the small odd primes this toolkit works over.
pub fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn check_prime(p: u64) -> Result<()> {
    if is_odd_prime(p) {
        Ok(())
    } else {
        Err(Error::NotOddPrime(p))
    }
}

impl PadicNumber {
    /// Canonicalizing constructor: reduces `raw` modulo p^rel_prec, strips
    /// p-powers into the valuation, and collapses to zero-to-precision when
    /// nothing survives.  The absolute precision is `valuation + rel_prec`.
    fn make(prime: u64, valuation: i64, raw: BigUint, rel_prec: u32) -> Self {
        debug_assert!(rel_prec >= 1);
        let modulus = p_pow(prime, rel_prec);
        let r = raw % &modulus;
        if r.is_zero() {
            return PadicNumber {
                prime,
                repr: Repr::ZeroToPrecision {
                    abs_prec: valuation + i64::from(rel_prec),
                },
            };
        }
        let e = val_in_biguint(&r, prime);
        debug_assert!(e < rel_prec);
        PadicNumber {
            prime,
            repr: Repr::Unit {
                valuation: valuation + i64::from(e),
                unit: r / p_pow(prime, e),
                rel_prec: rel_prec - e,
            },
        }
    }

    fn make_signed(prime: u64, valuation: i64, raw: BigInt, rel_prec: u32) -> Self {
        let modulus = BigInt::from(p_pow(prime, rel_prec));
        let r = raw
            .mod_floor(&modulus)
            .to_biguint()
            .expect("mod_floor of a positive modulus is nonnegative");
        Self::make(prime, valuation, r, rel_prec)
    }

    /// The exact zero of Q_p.
    pub fn zero(prime: u64) -> Self {
        PadicNumber {
            prime,
            repr: Repr::ExactZero,
        }
    }

    /// A value known only to vanish modulo p^abs_prec.
    pub fn zero_to_precision(prime: u64, abs_prec: i64) -> Self {
        PadicNumber {
            prime,
            repr: Repr::ZeroToPrecision { abs_prec },
        }
    }

    /// The unit 1 carried at `rel_prec` digits.
    pub fn one(prime: u64, rel_prec: u32) -> Self {
        PadicNumber {
            prime,
            repr: Repr::Unit {
                valuation: 0,
                unit: BigUint::one(),
                rel_prec: rel_prec.max(1),
            },
        }
    }

    /// Builds num/den in Q_p at `rel_prec` digits of relative precision.
    ///
    /// The prime must be an odd prime and the denominator nonzero.  A
    /// denominator divisible by p is fine as long as the quotient is the
    /// intended element of Q_p; the valuation simply comes out negative when
    /// the numerator does not compensate.
    pub fn from_rational(prime: u64, num: i64, den: i64, rel_prec: u32) -> Result<Self> {
        check_prime(prime)?;
        if rel_prec == 0 {
            return Err(Error::CoeffPrecTooSmall);
        }
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        if num == 0 {
            return Ok(Self::zero(prime));
        }
        let va = val_in_i64(num, prime);
        let vb = val_in_i64(den, prime);
        let pa = p_pow(prime, va).to_i64().expect("p^v fits i64 for i64 input");
        let pb = p_pow(prime, vb).to_i64().expect("p^v fits i64 for i64 input");
        let n = BigInt::from(num / pa);
        let d = BigInt::from(den / pb);
        let modulus = p_pow(prime, rel_prec);
        let d_inv = inv_mod(
            &d.mod_floor(&BigInt::from(modulus.clone()))
                .to_biguint()
                .expect("positive residue"),
            &modulus,
        );
        let raw = n * BigInt::from(d_inv);
        Ok(Self::make_signed(
            prime,
            i64::from(va) - i64::from(vb),
            raw,
            rel_prec,
        ))
    }

    /// Same as [`from_rational`](Self::from_rational) with arbitrarily large
    /// integer inputs.
    pub fn from_bigint_rational(
        prime: u64,
        num: &BigInt,
        den: &BigInt,
        rel_prec: u32,
    ) -> Result<Self> {
        check_prime(prime)?;
        if rel_prec == 0 {
            return Err(Error::CoeffPrecTooSmall);
        }
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero(prime));
        }
        let bp = BigInt::from(prime);
        let mut n = num.clone();
        let mut va = 0i64;
        while n.mod_floor(&bp).is_zero() {
            n /= &bp;
            va += 1;
        }
        let mut d = den.clone();
        let mut vb = 0i64;
        while d.mod_floor(&bp).is_zero() {
            d /= &bp;
            vb += 1;
        }
        let modulus = p_pow(prime, rel_prec);
        let d_inv = inv_mod(
            &d.mod_floor(&BigInt::from(modulus.clone()))
                .to_biguint()
                .expect("positive residue"),
            &modulus,
        );
        let raw = n * BigInt::from(d_inv);
        Ok(Self::make_signed(prime, va - vb, raw, rel_prec))
    }

    /// An integer reduced modulo p^abs_prec, as used for series coefficients:
    /// the result has absolute precision `abs_prec`, so a multiple of
    /// p^abs_prec comes back as zero-to-precision rather than exact zero.
    pub fn from_integer_mod(prime: u64, n: &BigInt, abs_prec: u32) -> Result<Self> {
        check_prime(prime)?;
        if abs_prec == 0 {
            return Err(Error::CoeffPrecTooSmall);
        }
        Ok(Self::make_signed(prime, 0, n.clone(), abs_prec))
    }

    /// Convenience constructor for small nonnegative integers at `rel_prec`
    /// relative digits.
    pub fn from_u64(prime: u64, n: u64, rel_prec: u32) -> Self {
        if n == 0 {
            return Self::zero(prime);
        }
        Self::make(prime, 0, BigUint::from(n), rel_prec.max(1))
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Finite for a value with a certified leading digit, infinite otherwise.
    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Unit { valuation, .. } => Valuation::Finite(*valuation),
            _ => Valuation::Infinite,
        }
    }

    /// Best certified lower bound on the valuation; `None` means the value is
    /// the exact zero (valuation +infinity).
    pub fn valuation_lower_bound(&self) -> Option<i64> {
        match &self.repr {
            Repr::ExactZero => None,
            Repr::ZeroToPrecision { abs_prec } => Some(*abs_prec),
            Repr::Unit { valuation, .. } => Some(*valuation),
        }
    }

    /// Exponent up to which the value is determined; `None` for the exact
    /// zero, which is known to infinite precision.
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::ExactZero => None,
            Repr::ZeroToPrecision { abs_prec } => Some(*abs_prec),
            Repr::Unit {
                valuation,
                rel_prec,
                ..
            } => Some(valuation + i64::from(*rel_prec)),
        }
    }

    /// Number of known digits of the unit part (0 for either kind of zero).
    pub fn rel_prec(&self) -> u32 {
        match &self.repr {
            Repr::Unit { rel_prec, .. } => *rel_prec,
            _ => 0,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::ExactZero)
    }

    /// True when no nonzero digit is certified (exact zero included).
    pub fn is_zero_to_precision(&self) -> bool {
        !matches!(self.repr, Repr::Unit { .. })
    }

    /// True when a leading nonzero digit is resolved, which certifies the
    /// value is nonzero in Q_p.
    pub fn certified_nonzero(&self) -> bool {
        matches!(self.repr, Repr::Unit { .. })
    }

    /// True when the value is certified nonzero modulo p^bound, i.e. has a
    /// resolved digit at an exponent below `bound`.
    pub fn certified_nonzero_below(&self, bound: i64) -> bool {
        match &self.repr {
            Repr::Unit { valuation, .. } => *valuation < bound,
            _ => false,
        }
    }

    /// Little-endian base-p digits of the unit part, one per known digit.
    pub fn unit_digits(&self) -> Vec<u64> {
        match &self.repr {
            Repr::Unit {
                unit, rel_prec, ..
            } => {
                let bp = big(self.prime);
                let mut digits = Vec::with_capacity(*rel_prec as usize);
                let mut cur = unit.clone();
                for _ in 0..*rel_prec {
                    let (q, r) = cur.div_rem(&bp);
                    digits.push(r.to_u64().expect("digit below p fits u64"));
                    cur = q;
                }
                digits
            }
            _ => Vec::new(),
        }
    }

    fn check_same_prime(&self, other: &Self) -> Result<()> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.prime, other.prime))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        let p = self.prime;
        Ok(match (&self.repr, &other.repr) {
            (Repr::ExactZero, _) => other.clone(),
            (_, Repr::ExactZero) => self.clone(),
            (Repr::ZeroToPrecision { abs_prec: n }, Repr::ZeroToPrecision { abs_prec: k }) => {
                Self::zero_to_precision(p, (*n).min(*k))
            }
            (Repr::ZeroToPrecision { abs_prec: n }, Repr::Unit { .. }) => {
                other.truncate_abs(*n)
            }
            (Repr::Unit { .. }, Repr::ZeroToPrecision { abs_prec: n }) => {
                self.truncate_abs(*n)
            }
            (
                Repr::Unit {
                    valuation: v1,
                    unit: u1,
                    rel_prec: r1,
                },
                Repr::Unit {
                    valuation: v2,
                    unit: u2,
                    rel_prec: r2,
                },
            ) => {
                let ap = (v1 + i64::from(*r1)).min(v2 + i64::from(*r2));
                let v = (*v1).min(*v2);
                debug_assert!(ap > v);
                let rel = u32::try_from(ap - v).expect("relative precision fits u32");
                let s1 = u1 * p_pow(p, u32::try_from(v1 - v).expect("shift fits u32"));
                let s2 = u2 * p_pow(p, u32::try_from(v2 - v).expect("shift fits u32"));
                Self::make(p, v, s1 + s2, rel)
            }
        })
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Unit {
                valuation,
                unit,
                rel_prec,
            } => PadicNumber {
                prime: self.prime,
                repr: Repr::Unit {
                    valuation: *valuation,
                    unit: p_pow(self.prime, *rel_prec) - unit,
                    rel_prec: *rel_prec,
                },
            },
            _ => self.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        let p = self.prime;
        Ok(match (&self.repr, &other.repr) {
            (Repr::ExactZero, _) | (_, Repr::ExactZero) => Self::zero(p),
            (Repr::ZeroToPrecision { abs_prec: n }, Repr::ZeroToPrecision { abs_prec: k }) => {
                Self::zero_to_precision(p, n + k)
            }
            (Repr::ZeroToPrecision { abs_prec: n }, Repr::Unit { valuation, .. })
            | (Repr::Unit { valuation, .. }, Repr::ZeroToPrecision { abs_prec: n }) => {
                Self::zero_to_precision(p, n + valuation)
            }
            (
                Repr::Unit {
                    valuation: v1,
                    unit: u1,
                    rel_prec: r1,
                },
                Repr::Unit {
                    valuation: v2,
                    unit: u2,
                    rel_prec: r2,
                },
            ) => {
                let rel = (*r1).min(*r2);
                Self::make(p, v1 + v2, u1 * u2, rel)
            }
        })
    }

    /// Division; fails on an exact-zero divisor and, with a dedicated error,
    /// on a divisor that is merely indistinguishable from zero at its
    /// precision (the quotient would be a guess, so none is made).
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        let p = self.prime;
        match &other.repr {
            Repr::ExactZero => Err(Error::DivisionByZero),
            Repr::ZeroToPrecision { abs_prec } => Err(Error::IndeterminateDivisor {
                abs_prec: *abs_prec,
            }),
            Repr::Unit {
                valuation: v2,
                unit: u2,
                rel_prec: r2,
            } => Ok(match &self.repr {
                Repr::ExactZero => Self::zero(p),
                Repr::ZeroToPrecision { abs_prec: n } => Self::zero_to_precision(p, n - v2),
                Repr::Unit {
                    valuation: v1,
                    unit: u1,
                    rel_prec: r1,
                } => {
                    let rel = (*r1).min(*r2);
                    let modulus = p_pow(p, rel);
                    let inv = inv_mod(&(u2 % &modulus), &modulus);
                    Self::make(p, v1 - v2, u1 * inv, rel)
                }
            }),
        }
    }

    /// Multiplies by the exact power p^k (k may be negative).
    pub fn scale_by_p_power(&self, k: i64) -> Self {
        let mut out = self.clone();
        match &mut out.repr {
            Repr::ExactZero => {}
            Repr::ZeroToPrecision { abs_prec } => *abs_prec += k,
            Repr::Unit { valuation, .. } => *valuation += k,
        }
        out
    }

    /// Forgets digits above absolute precision `abs_prec`.
    pub fn truncate_abs(&self, abs_prec: i64) -> Self {
        match &self.repr {
            Repr::ExactZero => Self::zero_to_precision(self.prime, abs_prec),
            Repr::ZeroToPrecision { abs_prec: n } => {
                Self::zero_to_precision(self.prime, (*n).min(abs_prec))
            }
            Repr::Unit {
                valuation,
                unit,
                rel_prec,
            } => {
                if valuation + i64::from(*rel_prec) <= abs_prec {
                    self.clone()
                } else if *valuation >= abs_prec {
                    Self::zero_to_precision(self.prime, abs_prec)
                } else {
                    let rel = u32::try_from(abs_prec - valuation).expect("positive, fits u32");
                    Self::make(self.prime, *valuation, unit.clone(), rel)
                }
            }
        }
    }

    /// The residue of the value modulo p^k, for values of valuation >= 0 with
    /// absolute precision >= k.
    pub fn residue_mod(&self, k: u32) -> Result<BigUint> {
        match &self.repr {
            Repr::ExactZero => Ok(BigUint::zero()),
            Repr::ZeroToPrecision { abs_prec } => {
                if *abs_prec >= i64::from(k) {
                    Ok(BigUint::zero())
                } else {
                    Err(Error::InsufficientPrecision {
                        bound: *abs_prec,
                        needed: format!("a residue modulo p^{k}"),
                    })
                }
            }
            Repr::Unit {
                valuation,
                unit,
                rel_prec,
            } => {
                if *valuation < 0 {
                    return Err(Error::NegativeValuation(*valuation));
                }
                if valuation + i64::from(*rel_prec) < i64::from(k) {
                    return Err(Error::InsufficientPrecision {
                        bound: valuation + i64::from(*rel_prec),
                        needed: format!("a residue modulo p^{k}"),
                    });
                }
                if *valuation >= i64::from(k) {
                    return Ok(BigUint::zero());
                }
                let v = u32::try_from(*valuation).expect("0 <= valuation < k");
                Ok(unit * p_pow(self.prime, v) % p_pow(self.prime, k))
            }
        }
    }

    /// Serialized coefficient form: `v:digits` for a resolved value (digits
    /// little-endian, one per known digit), `v:` for zero-to-precision v.
    /// The exact zero has no serialized form; series simply omit it.
    pub fn to_coeff_string(&self) -> String {
        match &self.repr {
            Repr::ExactZero => "0:".to_string(),
            Repr::ZeroToPrecision { abs_prec } => format!("{abs_prec}:"),
            Repr::Unit { valuation, .. } => {
                let digits = self.unit_digits();
                let body = if self.prime < 10 {
                    digits.iter().map(|d| d.to_string()).collect::<String>()
                } else {
                    digits
                        .iter()
                        .map(|d| d.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                };
                format!("{valuation}:{body}")
            }
        }
    }

    /// Parses a coefficient string: either a plain base-10 integer, reduced
    /// modulo p^abs_prec, or the `v:digits` form emitted by
    /// [`to_coeff_string`](Self::to_coeff_string).
    pub fn parse_coeff_string(prime: u64, s: &str, abs_prec: u32) -> Result<Self> {
        check_prime(prime)?;
        let bad = |message: String| Error::InvalidInput {
            field: "coefficient".to_string(),
            message,
        };
        if let Some((v_part, d_part)) = s.split_once(':') {
            let v: i64 = v_part
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad valuation in {s:?}")))?;
            let d_part = d_part.trim();
            if d_part.is_empty() {
                return Ok(Self::zero_to_precision(prime, v));
            }
            let digits: Vec<u64> = if d_part.contains(',') {
                d_part
                    .split(',')
                    .map(|t| t.trim().parse().map_err(|_| bad(format!("bad digit in {s:?}"))))
                    .collect::<Result<_>>()?
            } else {
                d_part
                    .chars()
                    .map(|c| {
                        c.to_digit(10)
                            .map(u64::from)
                            .ok_or_else(|| bad(format!("bad digit in {s:?}")))
                    })
                    .collect::<Result<_>>()?
            };
            if digits.iter().any(|&d| d >= prime) {
                return Err(bad(format!("digit not below p in {s:?}")));
            }
            let mut value = BigUint::zero();
            for &d in digits.iter().rev() {
                value = value * big(prime) + BigUint::from(d);
            }
            let rel = u32::try_from(digits.len()).expect("digit count fits u32");
            Ok(Self::make(prime, v, value, rel))
        } else {
            let n: BigInt = s
                .trim()
                .parse()
                .map_err(|_| bad(format!("not an integer: {s:?}")))?;
            Self::from_integer_mod(prime, &n, abs_prec)
        }
    }
}

/// Equality modulo p^(minimum of the two absolute precisions): both values
/// are reduced to the exponent range where both are determined and compared
/// there.  Values at different primes are never equal.
impl PartialEq for PadicNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.prime != other.prime {
            return false;
        }
        let cap = match (self.absolute_precision(), other.absolute_precision()) {
            (None, None) => return true,
            (Some(c), None) | (None, Some(c)) => c,
            (Some(a), Some(b)) => a.min(b),
        };
        let part = |x: &PadicNumber| -> Option<(i64, BigUint, i64)> {
            match &x.repr {
                Repr::Unit {
                    valuation, unit, ..
                } if *valuation < cap => Some((*valuation, unit.clone(), cap - valuation)),
                _ => None,
            }
        };
        match (part(self), part(other)) {
            (None, None) => true,
            (Some(_), None) | (None, Some(_)) => false,
            (Some((v1, u1, w1)), Some((v2, u2, _))) => {
                if v1 != v2 {
                    return false;
                }
                let w = u32::try_from(w1).expect("window fits u32");
                let m = p_pow(self.prime, w);
                u1 % &m == u2 % &m
            }
        }
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::ExactZero => write!(f, "0"),
            Repr::ZeroToPrecision { abs_prec } => write!(f, "O({}^{})", self.prime, abs_prec),
            Repr::Unit {
                valuation,
                unit,
                rel_prec,
            } => {
                let ap = valuation + i64::from(*rel_prec);
                if *valuation >= 0 {
                    let v = u32::try_from(*valuation).expect("nonnegative");
                    write!(f, "{} + O({}^{})", unit * p_pow(self.prime, v), self.prime, ap)
                } else {
                    write!(
                        f,
                        "{}^{}*{} + O({}^{})",
                        self.prime, valuation, unit, self.prime, ap
                    )
                }
            }
        }
    }
}

/// Generalized binomial coefficient C(c, k) = c(c-1)...(c-k+1)/k! for a
/// p-adic integer c.  The result is again a p-adic integer; that its
/// valuation is nonnegative is a theorem, and the implementation asserts it.
pub fn binomial_coefficient(c: &PadicNumber, k: u32) -> Result<PadicNumber> {
    let p = c.prime();
    match c.valuation_lower_bound() {
        None => {}
        Some(v) if v >= 0 => {}
        Some(v) => {
            if c.certified_nonzero() {
                return Err(Error::NegativeValuation(v));
            }
            return Err(Error::InsufficientPrecision {
                bound: v,
                needed: "a p-adic integer".to_string(),
            });
        }
    }
    let work_rel = c.rel_prec().max(1);
    if k == 0 {
        return Ok(PadicNumber::one(p, work_rel));
    }
    if c.is_exact_zero() {
        return Ok(PadicNumber::zero(p));
    }
    // k! and its p-part; constants enter exactly, at enough extra digits that
    // they never limit the tracked precision.
    let mut fact = BigUint::one();
    for i in 2..=u64::from(k) {
        fact *= BigUint::from(i);
    }
    let e_fact = val_in_biguint(&fact, p);
    let const_rel = work_rel + e_fact + 1;
    let mut prod = PadicNumber::one(p, const_rel);
    for i in 0..k {
        let term = c.sub(&PadicNumber::from_u64(p, u64::from(i), const_rel))?;
        prod = prod.mul(&term)?;
    }
    let quotient = prod.div(&PadicNumber::make(p, 0, fact, const_rel))?;
    if let Valuation::Finite(v) = quotient.valuation() {
        assert!(v >= 0, "binomial coefficient left Z_p: valuation {v}");
    }
    Ok(quotient)
}

/// Which homogeneous coordinate of a canonical direction is the unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// b is a unit; the stored pair is (a/b : 1).
    BUnit,
    /// v(b) > 0, so a is a unit; the stored pair is (1 : b/a).
    AUnit,
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chart::BUnit => write!(f, "B_UNIT"),
            Chart::AUnit => write!(f, "A_UNIT"),
        }
    }
}

/// A direction (a : b) in P^1(Z_p) in canonical form: the pair is scaled so
/// min(v(a), v(b)) = 0 and then by the unit coordinate, leaving either
/// (a/b : 1) or (1 : b/a).
#[derive(Debug, Clone)]
pub struct Direction {
    a: PadicNumber,
    b: PadicNumber,
    chart: Chart,
}

impl Direction {
    /// Canonicalizes (a : b).  Fails on (0 : 0), and reports an indeterminate
    /// direction when the precision of the inputs cannot certify which
    /// coordinate attains the minimal valuation (or whether b is a unit).
    pub fn canonical(a: &PadicNumber, b: &PadicNumber) -> Result<Self> {
        if a.prime() != b.prime() {
            return Err(Error::PrimeMismatch(a.prime(), b.prime()));
        }
        let p = a.prime();
        check_prime(p)?;
        if a.is_exact_zero() && b.is_exact_zero() {
            return Err(Error::ZeroDirection);
        }
        for c in [a, b] {
            if let Some(v) = c.valuation_lower_bound() {
                if v < 0 {
                    return Err(Error::NegativeValuation(v));
                }
            }
        }
        // Certified minimum of the two valuations, if the precision allows one.
        let m = match (&a.repr, &b.repr) {
            (Repr::Unit { valuation: va, .. }, Repr::Unit { valuation: vb, .. }) => {
                (*va).min(*vb)
            }
            (Repr::Unit { valuation: va, .. }, other) => match lower_bound_of(other) {
                None => *va,
                Some(n) if n > *va => *va,
                Some(_) => return Err(Error::IndeterminateDirection),
            },
            (other, Repr::Unit { valuation: vb, .. }) => match lower_bound_of(other) {
                None => *vb,
                Some(n) if n > *vb => *vb,
                Some(_) => return Err(Error::IndeterminateDirection),
            },
            _ => return Err(Error::IndeterminateDirection),
        };
        let a = a.scale_by_p_power(-m);
        let b = b.scale_by_p_power(-m);
        match b.valuation() {
            Valuation::Finite(0) => {
                let ratio = a.div(&b)?;
                let one = PadicNumber::one(p, b.rel_prec());
                Ok(Direction {
                    a: ratio,
                    b: one,
                    chart: Chart::BUnit,
                })
            }
            _ => {
                // b is not a certified unit; the chart is only determined if
                // v(b) >= 1 is certified, in which case a must be the unit.
                let b_away_from_zero = match b.valuation_lower_bound() {
                    None => true,
                    Some(n) => n >= 1,
                };
                if !b_away_from_zero {
                    return Err(Error::IndeterminateDirection);
                }
                match a.valuation() {
                    Valuation::Finite(0) => {
                        let ratio = b.div(&a)?;
                        let one = PadicNumber::one(p, a.rel_prec());
                        Ok(Direction {
                            a: one,
                            b: ratio,
                            chart: Chart::AUnit,
                        })
                    }
                    _ => Err(Error::IndeterminateDirection),
                }
            }
        }
    }

    /// Parses a direction from the `"a:b"` form with base-10 integer entries.
    pub fn parse(prime: u64, s: &str, rel_prec: u32) -> Result<Self> {
        let bad = |message: String| Error::InvalidInput {
            field: "direction".to_string(),
            message,
        };
        let (a_part, b_part) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("expected \"a:b\", got {s:?}")))?;
        let a: BigInt = a_part
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad integer {a_part:?} in {s:?}")))?;
        let b: BigInt = b_part
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad integer {b_part:?} in {s:?}")))?;
        let one = BigInt::one();
        let pa = if a.is_zero() {
            PadicNumber::zero(prime)
        } else {
            PadicNumber::from_bigint_rational(prime, &a, &one, rel_prec)?
        };
        let pb = if b.is_zero() {
            PadicNumber::zero(prime)
        } else {
            PadicNumber::from_bigint_rational(prime, &b, &one, rel_prec)?
        };
        Self::canonical(&pa, &pb)
    }

    pub fn prime(&self) -> u64 {
        self.a.prime()
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    /// First canonical coordinate (a/b in the B chart, 1 in the A chart).
    pub fn a(&self) -> &PadicNumber {
        &self.a
    }

    /// Second canonical coordinate (1 in the B chart, b/a in the A chart).
    pub fn b(&self) -> &PadicNumber {
        &self.b
    }

    /// The non-unit coordinate: a/b in the B chart, b/a in the A chart.
    pub fn ratio(&self) -> &PadicNumber {
        match self.chart {
            Chart::BUnit => &self.a,
            Chart::AUnit => &self.b,
        }
    }

    /// Whether this is the anticyclotomic direction (0 : 1); `None` when the
    /// first coordinate vanishes to precision without being the exact zero.
    pub fn is_anticyclotomic(&self) -> Option<bool> {
        match self.chart {
            Chart::AUnit => Some(false),
            Chart::BUnit => {
                if self.a.is_exact_zero() {
                    Some(true)
                } else if self.a.certified_nonzero() {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }

    /// Whether this is the cyclotomic direction (1 : 0); `None` when the
    /// second coordinate vanishes to precision without being the exact zero.
    pub fn is_cyclotomic(&self) -> Option<bool> {
        match self.chart {
            Chart::BUnit => Some(false),
            Chart::AUnit => {
                if self.b.is_exact_zero() {
                    Some(true)
                } else if self.b.certified_nonzero() {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }
}

fn lower_bound_of(r: &Repr) -> Option<i64> {
    match r {
        Repr::ExactZero => None,
        Repr::ZeroToPrecision { abs_prec } => Some(*abs_prec),
        Repr::Unit { valuation, .. } => Some(*valuation),
    }
}

impl PartialEq for Direction {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.ratio() == other.ratio()
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.chart {
            Chart::BUnit => write!(f, "({} : 1)", self.a),
            Chart::AUnit => write!(f, "(1 : {})", self.b),
        }
    }
}

fn kronecker_at_prime(d: i64, l: u64) -> i64 {
    if l == 2 {
        return if d % 2 == 0 {
            0
        } else {
            match d.rem_euclid(8) {
                1 | 7 => 1,
                _ => -1,
            }
        };
    }
    let r = d.rem_euclid(i64::try_from(l).expect("prime fits i64")) as u64;
    if r == 0 {
        return 0;
    }
    // Euler's criterion.
    let e = (l - 1) / 2;
    let mut acc = 1u64;
    let mut base = r % l;
    let mut exp = e;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % l;
        }
        base = base * base % l;
        exp >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// Kronecker symbol (d / q) for positive q, with the standard convention at
/// the prime 2; fully multiplicative in q.
pub fn kronecker_symbol(d: i64, q: u64) -> i64 {
    if q == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut result = 1i64;
    let mut q = q;
    let mut l = 2u64;
    while l * l <= q || (q > 1 && l <= q) {
        if q % l == 0 {
            let s = kronecker_at_prime(d, l);
            while q % l == 0 {
                q /= l;
                result *= s;
                if result == 0 {
                    return 0;
                }
            }
        }
        l = if l == 2 { 3 } else { l + 2 };
        if l * l > q {
            break;
        }
    }
    if q > 1 {
        result *= kronecker_at_prime(d, q);
    }
    result
}

/// Euler phi on the prime power p^k (with phi(p^0) = 1).
pub fn euler_phi_ppower(p: u64, k: u32) -> u64 {
    if k == 0 {
        return 1;
    }
    let v = u128::from(p).pow(k - 1) * u128::from(p - 1);
    u64::try_from(v).expect("phi(p^k) fits u64 at desk scale")
}
