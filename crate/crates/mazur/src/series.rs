//! Truncated power series over Z_p with per-coefficient precision.
//!
//! [`PowerSeries2`] models an element of Z_p[[X, Y]] (tensored with Q_p via a
//! tracked denominator exponent) known modulo total degree `degree_bound` and
//! with each coefficient carried at its own p-adic precision.  [`PowerSeries1`]
//! is the univariate counterpart used for restrictions to a single direction.
//!
//! Coefficient storage distinguishes three states:
//!
//! * an absent key is the structural (exact) zero;
//! * a stored zero-to-precision value records genuine uncertainty, typically
//!   from cancellation, and is never dropped;
//! * a stored unit certifies a nonzero coefficient.
//!
//! The distinction is what lets downstream verdicts separate "vanishes as far
//! as this precision can see" from "certified nonzero" without guessing.
//!
//! The key maps are the specialization maps: for a direction (a : b) the
//! series f_{a,b} = (1+X)^a (1+Y)^b - 1 generates the kernel of
//! [`PowerSeries2::project`], which sends a two-variable series to its image
//! in the one-variable algebra of that direction.

use crate::error::{Error, Result};
use crate::padic::{binomial_coefficient, Chart, Direction, PadicNumber};
use std::collections::BTreeMap;
use std::fmt;

/// Working precision for a computation: coefficients are carried modulo
/// p^coeff_prec and series modulo total degree `degree_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionPolicy {
    coeff_prec: u32,
    degree_bound: u32,
}

impl PrecisionPolicy {
    /// Requires at least one coefficient digit and degree bound at least 2,
    /// so that linear terms survive.
    pub fn new(coeff_prec: u32, degree_bound: u32) -> Result<Self> {
        if coeff_prec < 1 {
            return Err(Error::CoeffPrecTooSmall);
        }
        if degree_bound < 2 {
            return Err(Error::DegreeBoundTooSmall(degree_bound));
        }
        Ok(PrecisionPolicy {
            coeff_prec,
            degree_bound,
        })
    }

    /// Internal constructor for derived policies (a derivative lowers the
    /// degree bound to 1 without that being a user error).
    pub(crate) fn unchecked(coeff_prec: u32, degree_bound: u32) -> Self {
        debug_assert!(coeff_prec >= 1 && degree_bound >= 1);
        PrecisionPolicy {
            coeff_prec,
            degree_bound,
        }
    }

    pub fn coeff_prec(&self) -> u32 {
        self.coeff_prec
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    /// Coarser of two policies: the precision a binary operation can honestly
    /// promise.
    pub fn meet(&self, other: &Self) -> Self {
        PrecisionPolicy::unchecked(
            self.coeff_prec.min(other.coeff_prec),
            self.degree_bound.min(other.degree_bound),
        )
    }
}

/// Variable name attached to a univariate series; purely presentational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesVar {
    X,
    Y,
    Z,
    T,
}

impl SeriesVar {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(SeriesVar::X),
            "Y" | "y" => Ok(SeriesVar::Y),
            "Z" | "z" => Ok(SeriesVar::Z),
            "T" | "t" => Ok(SeriesVar::T),
            _ => Err(Error::InvalidInput {
                field: "variable".to_string(),
                message: format!("unknown variable {s:?}"),
            }),
        }
    }
}

impl fmt::Display for SeriesVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            SeriesVar::X => "X",
            SeriesVar::Y => "Y",
            SeriesVar::Z => "Z",
            SeriesVar::T => "T",
        };
        write!(f, "{c}")
    }
}

/// A truncated two-variable power series p^(-denom_exp) * sum c_ij X^i Y^j
/// with stored coefficients in Z_p and total degree below the policy bound.
#[derive(Debug, Clone)]
pub struct PowerSeries2 {
    prime: u64,
    policy: PrecisionPolicy,
    denom_exp: u32,
    coeffs: BTreeMap<(u32, u32), PadicNumber>,
}

/// A truncated one-variable power series with the same coefficient
/// conventions as [`PowerSeries2`].
#[derive(Debug, Clone)]
pub struct PowerSeries1 {
    prime: u64,
    policy: PrecisionPolicy,
    variable: SeriesVar,
    denom_exp: u32,
    coeffs: BTreeMap<u32, PadicNumber>,
}

/// Digits to give the exact constants 1 and small integers so they never
/// limit tracked precision.
fn exact_rel(policy: &PrecisionPolicy) -> u32 {
    policy.coeff_prec + 40
}

fn min_stored_bound<'a, I: Iterator<Item = &'a PadicNumber>>(vals: I) -> Option<i64> {
    vals.map(|c| c.valuation_lower_bound().unwrap_or(i64::MAX))
        .min()
}

impl PowerSeries2 {
    pub fn zero(prime: u64, policy: PrecisionPolicy) -> Self {
        PowerSeries2 {
            prime,
            policy,
            denom_exp: 0,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds a series from (degree, coefficient) entries interpreted
    /// relative to `denom_exp`.  Entries of negative valuation are legal;
    /// the denominator exponent absorbs them.  Exact zeros are dropped,
    /// zero-to-precision entries are kept.
    pub fn from_entries<I>(
        prime: u64,
        policy: PrecisionPolicy,
        denom_exp: u32,
        entries: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = ((u32, u32), PadicNumber)>,
    {
        let mut coeffs = BTreeMap::new();
        for ((i, j), c) in entries {
            if c.prime() != prime {
                return Err(Error::PrimeMismatch(prime, c.prime()));
            }
            let degree = i
                .checked_add(j)
                .ok_or(Error::DegreeOutOfRange {
                    degree: u32::MAX,
                    bound: policy.degree_bound,
                })?;
            if degree >= policy.degree_bound {
                return Err(Error::DegreeOutOfRange {
                    degree,
                    bound: policy.degree_bound,
                });
            }
            if c.is_exact_zero() {
                continue;
            }
            coeffs.insert((i, j), c);
        }
        Ok(PowerSeries2 {
            prime,
            policy,
            denom_exp,
            coeffs,
        }
        .canonicalized())
    }

    /// Minimal-denominator normal form: exact zeros dropped, stored
    /// coefficients integral (negative valuations pushed into the
    /// denominator), and any p-power common to all of them pulled out of it.
    fn canonicalized(mut self) -> Self {
        self.coeffs.retain(|_, c| !c.is_exact_zero());
        let min_bound = min_stored_bound(self.coeffs.values()).unwrap_or(i64::MAX);
        if min_bound < 0 {
            let d = -min_bound;
            for c in self.coeffs.values_mut() {
                *c = c.scale_by_p_power(d);
            }
            self.denom_exp += u32::try_from(d).expect("small shift");
        } else if self.denom_exp > 0 {
            let k = min_bound.min(i64::from(self.denom_exp));
            if k > 0 {
                for c in self.coeffs.values_mut() {
                    *c = c.scale_by_p_power(-k);
                }
                self.denom_exp -= u32::try_from(k).expect("bounded by denom_exp");
            }
        }
        self
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn policy(&self) -> PrecisionPolicy {
        self.policy
    }

    pub fn denom_exp(&self) -> u32 {
        self.denom_exp
    }

    /// Stored (integral) coefficient of X^i Y^j, if any.
    pub fn stored_coefficient(&self, i: u32, j: u32) -> Option<&PadicNumber> {
        self.coeffs.get(&(i, j))
    }

    /// Value of the coefficient of X^i Y^j as an element of Q_p, with the
    /// denominator exponent applied; structural zeros come back exact.
    pub fn coefficient(&self, i: u32, j: u32) -> PadicNumber {
        match self.coeffs.get(&(i, j)) {
            Some(c) => c.scale_by_p_power(-i64::from(self.denom_exp)),
            None => PadicNumber::zero(self.prime),
        }
    }

    /// Iterates stored entries in lexicographic key order.
    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &PadicNumber)> {
        self.coeffs.iter()
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every coefficient vanishes as far as the working precision
    /// can see: each stored value has valuation bound at least coeff_prec
    /// after the denominator is applied.
    pub fn is_zero_to_working_precision(&self) -> bool {
        self.coeffs.values().all(|c| {
            c.valuation_lower_bound()
                .map(|v| v - i64::from(self.denom_exp) >= i64::from(self.policy.coeff_prec))
                .unwrap_or(true)
        })
    }

    /// True when some coefficient is certified nonzero at working precision.
    pub fn has_certified_nonzero_coefficient(&self) -> bool {
        self.coeffs.values().any(|c| {
            c.certified_nonzero_below(i64::from(self.policy.coeff_prec) + i64::from(self.denom_exp))
        })
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.prime, other.prime))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let policy = self.policy.meet(&other.policy);
        let e = self.denom_exp.max(other.denom_exp);
        let lift_l = i64::from(e - self.denom_exp);
        let lift_r = i64::from(e - other.denom_exp);
        let mut coeffs: BTreeMap<(u32, u32), PadicNumber> = BTreeMap::new();
        for (k, c) in &self.coeffs {
            if k.0 + k.1 < policy.degree_bound {
                coeffs.insert(*k, c.scale_by_p_power(lift_l));
            }
        }
        for (k, c) in &other.coeffs {
            if k.0 + k.1 >= policy.degree_bound {
                continue;
            }
            let c = c.scale_by_p_power(lift_r);
            match coeffs.remove(k) {
                None => {
                    coeffs.insert(*k, c);
                }
                Some(prev) => {
                    coeffs.insert(*k, prev.add(&c)?);
                }
            }
        }
        Ok(PowerSeries2 {
            prime: self.prime,
            policy,
            denom_exp: e,
            coeffs,
        }
        .canonicalized())
    }

    pub fn negate(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.negate())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let policy = self.policy.meet(&other.policy);
        let mut coeffs: BTreeMap<(u32, u32), PadicNumber> = BTreeMap::new();
        for ((i1, j1), c1) in &self.coeffs {
            for ((i2, j2), c2) in &other.coeffs {
                let i = i1 + i2;
                let j = j1 + j2;
                if i + j >= policy.degree_bound {
                    continue;
                }
                let term = c1.mul(c2)?;
                match coeffs.remove(&(i, j)) {
                    None => {
                        coeffs.insert((i, j), term);
                    }
                    Some(prev) => {
                        coeffs.insert((i, j), prev.add(&term)?);
                    }
                }
            }
        }
        Ok(PowerSeries2 {
            prime: self.prime,
            policy,
            denom_exp: self.denom_exp + other.denom_exp,
            coeffs,
        }
        .canonicalized())
    }

    /// Multiplies every coefficient by a scalar from Q_p.
    pub fn scalar_mul(&self, s: &PadicNumber) -> Result<Self> {
        if s.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime, s.prime()));
        }
        if s.is_exact_zero() {
            return Ok(Self::zero(self.prime, self.policy));
        }
        // Shift the scalar into Z_p and absorb the shift into the denominator.
        let d = (-s.valuation_lower_bound().unwrap_or(0)).max(0);
        let s = s.scale_by_p_power(d);
        let mut coeffs = BTreeMap::new();
        for (k, c) in &self.coeffs {
            coeffs.insert(*k, c.mul(&s)?);
        }
        Ok(PowerSeries2 {
            prime: self.prime,
            policy: self.policy,
            denom_exp: self.denom_exp + u32::try_from(d).expect("small shift"),
            coeffs,
        }
        .canonicalized())
    }

    /// Drops all terms of total degree >= n and lowers the degree bound to n.
    pub fn truncated(&self, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::DegreeBoundTooSmall(n));
        }
        let n = n.min(self.policy.degree_bound);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|((i, j), _)| i + j < n)
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        Ok(PowerSeries2 {
            prime: self.prime,
            policy: PrecisionPolicy::unchecked(self.policy.coeff_prec, n),
            denom_exp: self.denom_exp,
            coeffs,
        }
        .canonicalized())
    }

    /// Partial derivative with respect to X or Y.  The result is reliable
    /// only below degree N-1, and its degree bound says so.
    pub fn partial_derivative(&self, var: SeriesVar) -> Result<Self> {
        if self.policy.degree_bound < 2 {
            return Err(Error::DegreeBoundTooSmall(self.policy.degree_bound - 1));
        }
        let policy = PrecisionPolicy::unchecked(self.policy.coeff_prec, self.policy.degree_bound - 1);
        let mut coeffs = BTreeMap::new();
        for ((i, j), c) in &self.coeffs {
            let (key, mult) = match var {
                SeriesVar::X => {
                    if *i == 0 {
                        continue;
                    }
                    ((*i - 1, *j), *i)
                }
                SeriesVar::Y => {
                    if *j == 0 {
                        continue;
                    }
                    ((*i, *j - 1), *j)
                }
                other => {
                    return Err(Error::VariableMismatch(
                        other.to_string(),
                        "X or Y".to_string(),
                    ))
                }
            };
            if key.0 + key.1 >= policy.degree_bound {
                continue;
            }
            let factor = PadicNumber::from_u64(self.prime, u64::from(mult), c.rel_prec().max(1));
            coeffs.insert(key, c.mul(&factor)?);
        }
        Ok(PowerSeries2 {
            prime: self.prime,
            policy,
            denom_exp: self.denom_exp,
            coeffs,
        }
        .canonicalized())
    }

    /// Checks the constant term is the structural zero; a certified nonzero
    /// constant and a merely-fuzzy one get different errors.
    pub fn require_zero_constant_term(&self) -> Result<()> {
        match self.coeffs.get(&(0, 0)) {
            None => Ok(()),
            Some(c) if c.certified_nonzero() => Err(Error::NonzeroConstantTerm),
            Some(c) => Err(Error::Indeterminate(format!(
                "constant term vanishes only to precision (valuation >= {})",
                c.valuation_lower_bound().unwrap_or(0)
            ))),
        }
    }

    /// The restriction L(X, 0): the series of (i, 0) coefficients.
    pub fn restrict_y_zero(&self) -> PowerSeries1 {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|((_, j), _)| *j == 0)
            .map(|((i, _), c)| (*i, c.clone()))
            .collect();
        PowerSeries1 {
            prime: self.prime,
            policy: self.policy,
            variable: SeriesVar::X,
            denom_exp: self.denom_exp,
            coeffs,
        }
        .canonicalized()
    }

    /// Substitutes univariate series with zero constant term for X and Y.
    /// Both substituted series must be integral (denominator exponent 0);
    /// the receiver's denominator is carried through to the result.
    pub fn substitute(&self, sx: &PowerSeries1, sy: &PowerSeries1) -> Result<PowerSeries1> {
        self_prime_matches(self.prime, sx)?;
        self_prime_matches(self.prime, sy)?;
        if sx.variable != sy.variable {
            return Err(Error::VariableMismatch(
                sx.variable.to_string(),
                sy.variable.to_string(),
            ));
        }
        for s in [sx, sy] {
            if s.denom_exp != 0 {
                return Err(Error::DenominatorNotCleared(s.denom_exp));
            }
            s.require_zero_constant_term()?;
        }
        let policy = self.policy.meet(&sx.policy).meet(&sy.policy);
        let n = policy.degree_bound;
        let variable = sx.variable;
        let one = PowerSeries1::constant_one(self.prime, policy, variable);

        // Powers of sy up to the largest Y-degree that occurs.
        let max_j = self.coeffs.keys().map(|(_, j)| *j).max().unwrap_or(0);
        let mut sy_pows: Vec<PowerSeries1> = Vec::with_capacity(max_j as usize + 1);
        sy_pows.push(one.clone());
        for _ in 1..=max_j {
            let next = sy_pows.last().expect("nonempty").mul(sy)?;
            sy_pows.push(next);
        }

        // Row polynomials T_i(Z) = sum_j c_ij sy(Z)^j, then a Horner pass in sx.
        let max_i = self.coeffs.keys().map(|(i, _)| *i).max().unwrap_or(0);
        let mut rows: Vec<PowerSeries1> =
            vec![PowerSeries1::zero(self.prime, policy, variable); max_i as usize + 1];
        for ((i, j), c) in &self.coeffs {
            let term = sy_pows[*j as usize].scalar_mul(c)?;
            rows[*i as usize] = rows[*i as usize].add(&term)?;
        }
        let mut acc = PowerSeries1::zero(self.prime, policy, variable);
        for row in rows.iter().rev() {
            acc = acc.mul(sx)?.add(row)?;
        }
        let _ = n;
        acc.denom_exp += self.denom_exp;
        Ok(acc.canonicalized())
    }

    /// Image of the series in the one-variable algebra of a direction.
    ///
    /// In the B chart (canonical (rho : 1)) the map sends X to Z and 1+Y to
    /// (1+Z)^(-rho); in the A chart (canonical (1 : s)) it sends Y to Z and
    /// 1+X to (1+Z)^(-s).  Either way f_{a,b} maps to zero, to precision.
    pub fn project(&self, dir: &Direction) -> Result<PowerSeries1> {
        if dir.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime, dir.prime()));
        }
        let identity = PowerSeries1::identity(self.prime, self.policy, SeriesVar::Z);
        match dir.chart() {
            Chart::BUnit => {
                let sy = one_plus_power(
                    self.prime,
                    self.policy,
                    SeriesVar::Z,
                    &dir.ratio().neg(),
                )?;
                self.substitute(&identity, &sy)
            }
            Chart::AUnit => {
                let sx = one_plus_power(
                    self.prime,
                    self.policy,
                    SeriesVar::Z,
                    &dir.ratio().neg(),
                )?;
                self.substitute(&sx, &identity)
            }
        }
    }
}

fn self_prime_matches(prime: u64, s: &PowerSeries1) -> Result<()> {
    if prime == s.prime {
        Ok(())
    } else {
        Err(Error::PrimeMismatch(prime, s.prime))
    }
}

impl PartialEq for PowerSeries2 {
    fn eq(&self, other: &Self) -> bool {
        if self.prime != other.prime
            || self.policy.degree_bound != other.policy.degree_bound
        {
            return false;
        }
        let keys: std::collections::BTreeSet<_> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .collect();
        keys.into_iter()
            .all(|(i, j)| self.coefficient(i, j) == other.coefficient(i, j))
    }
}

impl fmt::Display for PowerSeries2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        if self.denom_exp > 0 {
            write!(f, "{}^-{} * (", self.prime, self.denom_exp)?;
        }
        let mut first = true;
        for ((i, j), c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{}]", c.to_coeff_string())?;
            if *i > 0 {
                write!(f, "*X^{i}")?;
            }
            if *j > 0 {
                write!(f, "*Y^{j}")?;
            }
        }
        if self.denom_exp > 0 {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl PowerSeries1 {
    pub fn zero(prime: u64, policy: PrecisionPolicy, variable: SeriesVar) -> Self {
        PowerSeries1 {
            prime,
            policy,
            variable,
            denom_exp: 0,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant series 1, carried with digits to spare.
    pub fn constant_one(prime: u64, policy: PrecisionPolicy, variable: SeriesVar) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, PadicNumber::one(prime, exact_rel(&policy)));
        PowerSeries1 {
            prime,
            policy,
            variable,
            denom_exp: 0,
            coeffs,
        }
    }

    /// The identity substitution: the bare variable.
    pub fn identity(prime: u64, policy: PrecisionPolicy, variable: SeriesVar) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1, PadicNumber::one(prime, exact_rel(&policy)));
        PowerSeries1 {
            prime,
            policy,
            variable,
            denom_exp: 0,
            coeffs,
        }
    }

    pub fn from_entries<I>(
        prime: u64,
        policy: PrecisionPolicy,
        variable: SeriesVar,
        denom_exp: u32,
        entries: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, PadicNumber)>,
    {
        let mut coeffs = BTreeMap::new();
        for (i, c) in entries {
            if c.prime() != prime {
                return Err(Error::PrimeMismatch(prime, c.prime()));
            }
            if i >= policy.degree_bound {
                return Err(Error::DegreeOutOfRange {
                    degree: i,
                    bound: policy.degree_bound,
                });
            }
            if c.is_exact_zero() {
                continue;
            }
            coeffs.insert(i, c);
        }
        Ok(PowerSeries1 {
            prime,
            policy,
            variable,
            denom_exp,
            coeffs,
        }
        .canonicalized())
    }

    fn canonicalized(mut self) -> Self {
        self.coeffs.retain(|_, c| !c.is_exact_zero());
        let min_bound = min_stored_bound(self.coeffs.values()).unwrap_or(i64::MAX);
        if min_bound < 0 {
            let d = -min_bound;
            for c in self.coeffs.values_mut() {
                *c = c.scale_by_p_power(d);
            }
            self.denom_exp += u32::try_from(d).expect("small shift");
        } else if self.denom_exp > 0 {
            let k = min_bound.min(i64::from(self.denom_exp));
            if k > 0 {
                for c in self.coeffs.values_mut() {
                    *c = c.scale_by_p_power(-k);
                }
                self.denom_exp -= u32::try_from(k).expect("bounded by denom_exp");
            }
        }
        self
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn policy(&self) -> PrecisionPolicy {
        self.policy
    }

    pub fn variable(&self) -> SeriesVar {
        self.variable
    }

    /// Returns the same series relabeled in another variable.
    pub fn with_variable(&self, variable: SeriesVar) -> Self {
        let mut out = self.clone();
        out.variable = variable;
        out
    }

    pub fn denom_exp(&self) -> u32 {
        self.denom_exp
    }

    pub fn stored_coefficient(&self, i: u32) -> Option<&PadicNumber> {
        self.coeffs.get(&i)
    }

    /// Coefficient of the i-th power as an element of Q_p.
    pub fn coefficient(&self, i: u32) -> PadicNumber {
        match self.coeffs.get(&i) {
            Some(c) => c.scale_by_p_power(-i64::from(self.denom_exp)),
            None => PadicNumber::zero(self.prime),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&u32, &PadicNumber)> {
        self.coeffs.iter()
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero_to_working_precision(&self) -> bool {
        self.coeffs.values().all(|c| {
            c.valuation_lower_bound()
                .map(|v| v - i64::from(self.denom_exp) >= i64::from(self.policy.coeff_prec))
                .unwrap_or(true)
        })
    }

    pub fn has_certified_nonzero_coefficient(&self) -> bool {
        self.coeffs.values().any(|c| {
            c.certified_nonzero_below(i64::from(self.policy.coeff_prec) + i64::from(self.denom_exp))
        })
    }

    pub fn require_zero_constant_term(&self) -> Result<()> {
        match self.coeffs.get(&0) {
            None => Ok(()),
            Some(c) if c.certified_nonzero() => Err(Error::NonzeroConstantTerm),
            Some(c) => Err(Error::Indeterminate(format!(
                "constant term vanishes only to precision (valuation >= {})",
                c.valuation_lower_bound().unwrap_or(0)
            ))),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        if self.variable != other.variable {
            return Err(Error::VariableMismatch(
                self.variable.to_string(),
                other.variable.to_string(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let policy = self.policy.meet(&other.policy);
        let e = self.denom_exp.max(other.denom_exp);
        let lift_l = i64::from(e - self.denom_exp);
        let lift_r = i64::from(e - other.denom_exp);
        let mut coeffs: BTreeMap<u32, PadicNumber> = BTreeMap::new();
        for (k, c) in &self.coeffs {
            if *k < policy.degree_bound {
                coeffs.insert(*k, c.scale_by_p_power(lift_l));
            }
        }
        for (k, c) in &other.coeffs {
            if *k >= policy.degree_bound {
                continue;
            }
            let c = c.scale_by_p_power(lift_r);
            match coeffs.remove(k) {
                None => {
                    coeffs.insert(*k, c);
                }
                Some(prev) => {
                    coeffs.insert(*k, prev.add(&c)?);
                }
            }
        }
        Ok(PowerSeries1 {
            prime: self.prime,
            policy,
            variable: self.variable,
            denom_exp: e,
            coeffs,
        }
        .canonicalized())
    }

    pub fn negate(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.negate())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let policy = self.policy.meet(&other.policy);
        let mut coeffs: BTreeMap<u32, PadicNumber> = BTreeMap::new();
        for (i1, c1) in &self.coeffs {
            for (i2, c2) in &other.coeffs {
                let i = i1 + i2;
                if i >= policy.degree_bound {
                    continue;
                }
                let term = c1.mul(c2)?;
                match coeffs.remove(&i) {
                    None => {
                        coeffs.insert(i, term);
                    }
                    Some(prev) => {
                        coeffs.insert(i, prev.add(&term)?);
                    }
                }
            }
        }
        Ok(PowerSeries1 {
            prime: self.prime,
            policy,
            variable: self.variable,
            denom_exp: self.denom_exp + other.denom_exp,
            coeffs,
        }
        .canonicalized())
    }

    pub fn scalar_mul(&self, s: &PadicNumber) -> Result<Self> {
        if s.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime, s.prime()));
        }
        if s.is_exact_zero() {
            return Ok(Self::zero(self.prime, self.policy, self.variable));
        }
        let d = (-s.valuation_lower_bound().unwrap_or(0)).max(0);
        let s = s.scale_by_p_power(d);
        let mut coeffs = BTreeMap::new();
        for (k, c) in &self.coeffs {
            coeffs.insert(*k, c.mul(&s)?);
        }
        Ok(PowerSeries1 {
            prime: self.prime,
            policy: self.policy,
            variable: self.variable,
            denom_exp: self.denom_exp + u32::try_from(d).expect("small shift"),
            coeffs,
        }
        .canonicalized())
    }

    pub fn truncated(&self, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::DegreeBoundTooSmall(n));
        }
        let n = n.min(self.policy.degree_bound);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(i, _)| **i < n)
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        Ok(PowerSeries1 {
            prime: self.prime,
            policy: PrecisionPolicy::unchecked(self.policy.coeff_prec, n),
            variable: self.variable,
            denom_exp: self.denom_exp,
            coeffs,
        }
        .canonicalized())
    }

    pub fn derivative(&self) -> Result<Self> {
        if self.policy.degree_bound < 2 {
            return Err(Error::DegreeBoundTooSmall(self.policy.degree_bound - 1));
        }
        let policy = PrecisionPolicy::unchecked(self.policy.coeff_prec, self.policy.degree_bound - 1);
        let mut coeffs = BTreeMap::new();
        for (i, c) in &self.coeffs {
            if *i == 0 || *i - 1 >= policy.degree_bound {
                continue;
            }
            let factor = PadicNumber::from_u64(self.prime, u64::from(*i), c.rel_prec().max(1));
            coeffs.insert(*i - 1, c.mul(&factor)?);
        }
        Ok(PowerSeries1 {
            prime: self.prime,
            policy,
            variable: self.variable,
            denom_exp: self.denom_exp,
            coeffs,
        }
        .canonicalized())
    }

    /// Divides by the k-th power of the variable.  Coefficients below k must
    /// not be certified nonzero; zero-to-precision ones are discarded, which
    /// is exactly the precision loss the operation entails.  The quotient is
    /// known only below degree_bound - k, and its degree bound says so.
    pub fn divide_by_var_power(&self, k: u32) -> Result<Self> {
        if self.policy.degree_bound <= k {
            return Err(Error::DegreeBoundTooSmall(0));
        }
        for (i, c) in &self.coeffs {
            if *i < k && c.certified_nonzero() {
                return Err(Error::Indeterminate(format!(
                    "coefficient of degree {i} is certified nonzero; not divisible by {}^{k}",
                    self.variable
                )));
            }
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(i, _)| **i >= k)
            .map(|(i, c)| (*i - k, c.clone()))
            .collect();
        Ok(PowerSeries1 {
            prime: self.prime,
            policy: PrecisionPolicy::unchecked(self.policy.coeff_prec, self.policy.degree_bound - k),
            variable: self.variable,
            denom_exp: self.denom_exp,
            coeffs,
        }
        .canonicalized())
    }

    /// Multiplies by the k-th power of the variable, truncating at the bound.
    pub fn times_var_power(&self, k: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(i, _)| **i + k < self.policy.degree_bound)
            .map(|(i, c)| (*i + k, c.clone()))
            .collect();
        PowerSeries1 {
            prime: self.prime,
            policy: self.policy,
            variable: self.variable,
            denom_exp: self.denom_exp,
            coeffs,
        }
        .canonicalized()
    }

    /// The monomial c = 1 times the k-th power of the variable.
    pub fn monomial(prime: u64, policy: PrecisionPolicy, variable: SeriesVar, k: u32) -> Result<Self> {
        if k >= policy.degree_bound {
            return Err(Error::DegreeOutOfRange {
                degree: k,
                bound: policy.degree_bound,
            });
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert(k, PadicNumber::one(prime, exact_rel(&policy)));
        Ok(PowerSeries1 {
            prime,
            policy,
            variable,
            denom_exp: 0,
            coeffs,
        })
    }

    /// Reinterprets the series at another degree bound, dropping entries
    /// when lowering.  Raising the bound treats the unknown tail as zero and
    /// is for internal iteration schemes whose convergence does not depend
    /// on it.
    pub(crate) fn with_degree_bound(&self, n: u32) -> Self {
        debug_assert!(n >= 1);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(i, _)| **i < n)
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        PowerSeries1 {
            prime: self.prime,
            policy: PrecisionPolicy::unchecked(self.policy.coeff_prec, n),
            variable: self.variable,
            denom_exp: self.denom_exp,
            coeffs,
        }
    }

    /// Discards all entries below k and shifts the rest down, whatever the
    /// dropped entries were.  The forget-low-part operator of the division
    /// iteration; for exact division by a power of the variable use
    /// [`divide_by_var_power`](Self::divide_by_var_power).
    pub(crate) fn shift_down_lossy(&self, k: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(i, _)| **i >= k)
            .map(|(i, c)| (*i - k, c.clone()))
            .collect();
        PowerSeries1 {
            prime: self.prime,
            policy: self.policy,
            variable: self.variable,
            denom_exp: self.denom_exp,
            coeffs,
        }
        .canonicalized()
    }

    /// Multiplies the whole series by the exact power p^k.  Unlike
    /// [`scalar_mul`](Self::scalar_mul) this costs no precision; a negative k
    /// that the coefficients cannot absorb shows up in the denominator
    /// exponent rather than being rounded away.
    pub fn scale_stored(&self, k: i64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.scale_by_p_power(k);
        }
        out.canonicalized()
    }

    /// Caps every stored coefficient at absolute precision m (relative to the
    /// denominator), stating no more than the computation that produced the
    /// series can guarantee.
    pub fn truncate_coeff_prec(&self, m: u32) -> Self {
        let cap = i64::from(m) + i64::from(self.denom_exp);
        let coeffs = self
            .coeffs
            .iter()
            .map(|(i, c)| (*i, c.truncate_abs(cap)))
            .collect();
        PowerSeries1 {
            prime: self.prime,
            policy: self.policy,
            variable: self.variable,
            denom_exp: self.denom_exp,
            coeffs,
        }
        .canonicalized()
    }

    /// Multiplicative inverse modulo the degree bound.  Requires an integral
    /// series whose constant term is a certified unit.
    pub fn invert(&self) -> Result<Self> {
        if self.denom_exp != 0 {
            return Err(Error::DenominatorNotCleared(self.denom_exp));
        }
        let c0 = match self.coeffs.get(&0) {
            Some(c) if c.certified_nonzero() => c.clone(),
            Some(c) => {
                return Err(Error::Indeterminate(format!(
                    "constant term is zero to precision {:?}; invertibility undecidable",
                    c.valuation_lower_bound()
                )))
            }
            None => return Err(Error::NotInvertible(i64::MAX)),
        };
        if let Some(v) = c0.valuation_lower_bound() {
            if v > 0 {
                return Err(Error::NotInvertible(v));
            }
        }
        let n = self.policy.degree_bound;
        let one = PadicNumber::one(self.prime, c0.rel_prec().max(1));
        let b0 = one.div(&c0)?;
        let mut inv: Vec<PadicNumber> = vec![b0.clone()];
        for d in 1..n {
            let mut s = PadicNumber::zero(self.prime);
            for k in 1..=d {
                if let Some(ck) = self.coeffs.get(&k) {
                    s = s.add(&ck.mul(&inv[(d - k) as usize])?)?;
                }
            }
            inv.push(b0.mul(&s)?.neg());
        }
        let coeffs = inv
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_exact_zero())
            .map(|(i, c)| (u32::try_from(i).expect("below degree bound"), c))
            .collect();
        Ok(PowerSeries1 {
            prime: self.prime,
            policy: self.policy,
            variable: self.variable,
            denom_exp: 0,
            coeffs,
        }
        .canonicalized())
    }

    /// Same series viewed in two variables, powers of X.
    pub fn embed_x(&self, policy: PrecisionPolicy) -> Result<PowerSeries2> {
        PowerSeries2::from_entries(
            self.prime,
            policy.meet(&self.policy),
            self.denom_exp,
            self.coeffs.iter().map(|(i, c)| ((*i, 0), c.clone())),
        )
    }

    /// Same series viewed in two variables, powers of Y.
    pub fn embed_y(&self, policy: PrecisionPolicy) -> Result<PowerSeries2> {
        PowerSeries2::from_entries(
            self.prime,
            policy.meet(&self.policy),
            self.denom_exp,
            self.coeffs.iter().map(|(i, c)| ((0, *i), c.clone())),
        )
    }
}

impl PartialEq for PowerSeries1 {
    fn eq(&self, other: &Self) -> bool {
        if self.prime != other.prime
            || self.variable != other.variable
            || self.policy.degree_bound != other.policy.degree_bound
        {
            return false;
        }
        let keys: std::collections::BTreeSet<_> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .collect();
        keys.into_iter()
            .all(|i| self.coefficient(i) == other.coefficient(i))
    }
}

impl fmt::Display for PowerSeries1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        if self.denom_exp > 0 {
            write!(f, "{}^-{} * (", self.prime, self.denom_exp)?;
        }
        let mut first = true;
        for (i, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{}]", c.to_coeff_string())?;
            if *i > 0 {
                write!(f, "*{}^{}", self.variable, i)?;
            }
        }
        if self.denom_exp > 0 {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// The series (1+T)^c - 1 = sum_{k>=1} C(c, k) T^k for a p-adic integer c,
/// truncated at the policy's degree bound.
pub fn one_plus_power(
    prime: u64,
    policy: PrecisionPolicy,
    variable: SeriesVar,
    c: &PadicNumber,
) -> Result<PowerSeries1> {
    if c.prime() != prime {
        return Err(Error::PrimeMismatch(prime, c.prime()));
    }
    let mut entries = Vec::new();
    for k in 1..policy.degree_bound {
        let b = binomial_coefficient(c, k)?;
        if !b.is_exact_zero() {
            entries.push((k, b));
        }
    }
    PowerSeries1::from_entries(prime, policy, variable, 0, entries)
}

/// The kernel generator f_{a,b} = (1+X)^a (1+Y)^b - 1 of the projection to a
/// direction, computed from the direction's canonical coordinates.  The unit
/// coordinate is exactly 1 in canonical form, so that factor is the bare
/// variable; only the ratio goes through the binomial series.
pub fn direction_kernel_generator(
    dir: &Direction,
    policy: PrecisionPolicy,
) -> Result<PowerSeries2> {
    let p = dir.prime();
    let (sa, sb) = match dir.chart() {
        Chart::BUnit => (
            one_plus_power(p, policy, SeriesVar::X, dir.ratio())?.embed_x(policy)?,
            PowerSeries1::identity(p, policy, SeriesVar::Y).embed_y(policy)?,
        ),
        Chart::AUnit => (
            PowerSeries1::identity(p, policy, SeriesVar::X).embed_x(policy)?,
            one_plus_power(p, policy, SeriesVar::Y, dir.ratio())?.embed_y(policy)?,
        ),
    };
    sa.add(&sb)?.add(&sa.mul(&sb)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Valuation;
    use proptest::prelude::*;

    fn q5(num: i64, den: i64, prec: u32) -> PadicNumber {
        PadicNumber::from_rational(5, num, den, prec).unwrap()
    }

    fn policy(m: u32, n: u32) -> PrecisionPolicy {
        PrecisionPolicy::new(m, n).unwrap()
    }

    fn dir(a: i64, b: i64) -> Direction {
        let pa = if a == 0 {
            PadicNumber::zero(5)
        } else {
            q5(a, 1, 12)
        };
        let pb = if b == 0 {
            PadicNumber::zero(5)
        } else {
            q5(b, 1, 12)
        };
        Direction::canonical(&pa, &pb).unwrap()
    }

    /// Series X + Y + XY used in several tests: the kernel generator of (1:1).
    fn x_plus_y_plus_xy(pol: PrecisionPolicy) -> PowerSeries2 {
        PowerSeries2::from_entries(
            5,
            pol,
            0,
            vec![
                ((1, 0), q5(1, 1, 8)),
                ((0, 1), q5(1, 1, 8)),
                ((1, 1), q5(1, 1, 8)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn policy_rejects_degenerate_bounds() {
        assert_eq!(
            PrecisionPolicy::new(0, 4).unwrap_err(),
            Error::CoeffPrecTooSmall
        );
        assert_eq!(
            PrecisionPolicy::new(3, 1).unwrap_err(),
            Error::DegreeBoundTooSmall(1)
        );
    }

    #[test]
    fn entries_beyond_degree_bound_are_rejected() {
        let err = PowerSeries2::from_entries(5, policy(3, 4), 0, vec![((2, 2), q5(1, 1, 3))])
            .unwrap_err();
        assert_eq!(
            err,
            Error::DegreeOutOfRange {
                degree: 4,
                bound: 4
            }
        );
    }

    #[test]
    fn exact_zero_entries_are_dropped_but_fuzzy_zeros_stay() {
        let fuzzy = q5(7, 1, 3).sub(&q5(7, 1, 3)).unwrap();
        let s = PowerSeries2::from_entries(
            5,
            policy(3, 4),
            0,
            vec![((1, 0), PadicNumber::zero(5)), ((0, 1), fuzzy)],
        )
        .unwrap();
        assert!(s.stored_coefficient(1, 0).is_none());
        assert!(s.stored_coefficient(0, 1).is_some());
        assert!(s.is_zero_to_working_precision());
        assert!(!s.is_structurally_zero());
    }

    #[test]
    fn denominators_align_under_addition() {
        // 5^-1 * (1) + 1  =  5^-1 * (1 + 5).
        let a = PowerSeries2::from_entries(5, policy(4, 4), 1, vec![((0, 0), q5(1, 1, 6))])
            .unwrap();
        let b = PowerSeries2::from_entries(5, policy(4, 4), 0, vec![((0, 0), q5(1, 1, 6))])
            .unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.denom_exp(), 1);
        assert_eq!(s.coefficient(0, 0), q5(6, 5, 6));
    }

    #[test]
    fn negative_valuation_entry_bumps_denominator() {
        let s = PowerSeries2::from_entries(5, policy(4, 4), 0, vec![((1, 0), q5(1, 5, 6))])
            .unwrap();
        assert_eq!(s.denom_exp(), 1);
        assert_eq!(s.coefficient(1, 0), q5(1, 5, 6));
    }

    #[test]
    fn canonical_form_strips_shared_p_powers() {
        let s = PowerSeries2::from_entries(5, policy(4, 4), 2, vec![((1, 0), q5(25, 1, 8))])
            .unwrap();
        assert_eq!(s.denom_exp(), 0);
        assert_eq!(s.coefficient(1, 0), q5(1, 1, 8));
    }

    #[test]
    fn product_matches_hand_expansion() {
        let pol = policy(6, 4);
        // (X + Y)(X - Y) = X^2 - Y^2.
        let a = PowerSeries2::from_entries(
            5,
            pol,
            0,
            vec![((1, 0), q5(1, 1, 6)), ((0, 1), q5(1, 1, 6))],
        )
        .unwrap();
        let b = PowerSeries2::from_entries(
            5,
            pol,
            0,
            vec![((1, 0), q5(1, 1, 6)), ((0, 1), q5(-1, 1, 6))],
        )
        .unwrap();
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.coefficient(2, 0), q5(1, 1, 6));
        assert_eq!(prod.coefficient(0, 2), q5(-1, 1, 6));
        // The cross terms cancel to precision, not structurally.
        let cross = prod.stored_coefficient(1, 1).unwrap();
        assert!(cross.is_zero_to_precision());
        assert!(!cross.is_exact_zero());
    }

    #[test]
    fn partial_derivative_drops_degree_bound() {
        let pol = policy(4, 4);
        let l = x_plus_y_plus_xy(pol);
        let dx = l.partial_derivative(SeriesVar::X).unwrap();
        assert_eq!(dx.policy().degree_bound(), 3);
        assert_eq!(dx.coefficient(0, 0), q5(1, 1, 4));
        assert_eq!(dx.coefficient(0, 1), q5(1, 1, 4));
    }

    #[test]
    fn one_plus_power_of_minus_one_is_alternating() {
        let s = one_plus_power(5, policy(3, 4), SeriesVar::Z, &q5(-1, 1, 3)).unwrap();
        assert_eq!(s.coefficient(1), q5(-1, 1, 3));
        assert_eq!(s.coefficient(2), q5(1, 1, 3));
        assert_eq!(s.coefficient(3), q5(-1, 1, 3));
        assert!(s.coefficient(0).is_exact_zero());
    }

    #[test]
    fn one_plus_power_of_p_starts_at_valuation_one() {
        let s = one_plus_power(5, policy(3, 4), SeriesVar::Z, &q5(5, 1, 5)).unwrap();
        // (1+Z)^5 - 1 = 5Z + 10Z^2 + 10Z^3 + ...
        assert_eq!(s.coefficient(1), q5(5, 1, 5));
        assert_eq!(s.coefficient(2), q5(10, 1, 5));
        assert_eq!(s.coefficient(3), q5(10, 1, 5));
    }

    #[test]
    fn one_plus_power_of_half_matches_rational_oracle() {
        let s = one_plus_power(5, policy(4, 4), SeriesVar::Z, &q5(1, 2, 6)).unwrap();
        assert_eq!(s.coefficient(1), q5(1, 2, 6));
        assert_eq!(s.coefficient(2), q5(-1, 8, 6), "C(1/2,2) = -1/8");
        assert_eq!(s.coefficient(3), q5(1, 16, 6), "C(1/2,3) = 1/16");
    }

    #[test]
    fn kernel_generator_of_1_1_is_x_plus_y_plus_xy() {
        let pol = policy(4, 5);
        let f = direction_kernel_generator(&dir(1, 1), pol).unwrap();
        assert_eq!(f, x_plus_y_plus_xy(pol));
    }

    #[test]
    fn kernel_generator_of_axes_are_the_bare_variables() {
        let pol = policy(4, 5);
        let fx = direction_kernel_generator(&dir(1, 0), pol).unwrap();
        assert_eq!(fx.coefficient(1, 0), q5(1, 1, 4));
        assert_eq!(fx.entries().count(), 1, "(1:0) gives exactly X");
        let fy = direction_kernel_generator(&dir(0, 1), pol).unwrap();
        assert_eq!(fy.coefficient(0, 1), q5(1, 1, 4));
        assert_eq!(fy.entries().count(), 1, "(0:1) gives exactly Y");
    }

    #[test]
    fn substitute_on_monomials_matches_hand_computation() {
        let pol = policy(4, 5);
        // L = X + Y^2, substitute X -> Z^2, Y -> -Z: result Z^2 + Z^2 = 2Z^2.
        let l = PowerSeries2::from_entries(
            5,
            pol,
            0,
            vec![((1, 0), q5(1, 1, 6)), ((0, 2), q5(1, 1, 6))],
        )
        .unwrap();
        let sx = PowerSeries1::from_entries(5, pol, SeriesVar::Z, 0, vec![(2, q5(1, 1, 6))])
            .unwrap();
        let sy = PowerSeries1::from_entries(5, pol, SeriesVar::Z, 0, vec![(1, q5(-1, 1, 6))])
            .unwrap();
        let r = l.substitute(&sx, &sy).unwrap();
        assert_eq!(r.coefficient(2), q5(2, 1, 6));
        assert!(r.coefficient(1).is_exact_zero());
    }

    #[test]
    fn substitute_rejects_nonzero_constant_terms() {
        let pol = policy(4, 5);
        let l = x_plus_y_plus_xy(pol);
        let bad = PowerSeries1::from_entries(5, pol, SeriesVar::Z, 0, vec![(0, q5(1, 1, 6))])
            .unwrap();
        let idz = PowerSeries1::identity(5, pol, SeriesVar::Z);
        assert_eq!(
            l.substitute(&bad, &idz).unwrap_err(),
            Error::NonzeroConstantTerm
        );
        let fuzzy_const = PowerSeries1::from_entries(
            5,
            pol,
            SeriesVar::Z,
            0,
            vec![(0, q5(7, 1, 3).sub(&q5(7, 1, 3)).unwrap())],
        )
        .unwrap();
        assert!(matches!(
            l.substitute(&fuzzy_const, &idz).unwrap_err(),
            Error::Indeterminate(_)
        ));
    }

    #[test]
    fn projection_of_y_times_one_plus_x_at_1_1_is_minus_z() {
        let pol = policy(4, 5);
        // L = Y(1+X) = Y + XY.
        let l = PowerSeries2::from_entries(
            5,
            pol,
            0,
            vec![((0, 1), q5(1, 1, 8)), ((1, 1), q5(1, 1, 8))],
        )
        .unwrap();
        let r = l.project(&dir(1, 1)).unwrap();
        assert_eq!(r.coefficient(1), q5(-1, 1, 8));
        for k in [0u32, 2, 3, 4] {
            assert!(
                r.coefficient(k).is_zero_to_precision(),
                "coefficient of Z^{k} should vanish, got {}",
                r.coefficient(k)
            );
        }
    }

    #[test]
    fn projection_at_cyclotomic_direction_keeps_y_as_z() {
        let pol = policy(4, 5);
        let l = PowerSeries2::from_entries(5, pol, 0, vec![((0, 1), q5(1, 1, 8))]).unwrap();
        let r = l.project(&dir(1, 0)).unwrap();
        assert_eq!(r.coefficient(1), q5(1, 1, 8), "at (1:0) the map is Y -> Z");
    }

    #[test]
    fn projection_at_anticyclotomic_direction_is_restriction_to_x() {
        let pol = policy(4, 5);
        let l = PowerSeries2::from_entries(
            5,
            pol,
            0,
            vec![((2, 0), q5(3, 1, 8)), ((0, 1), q5(1, 1, 8)), ((1, 1), q5(2, 1, 8))],
        )
        .unwrap();
        let r = l.project(&dir(0, 1)).unwrap();
        let restricted = l.restrict_y_zero();
        assert_eq!(r.coefficient(2), q5(3, 1, 8));
        assert!(r.coefficient(1).is_exact_zero());
        assert_eq!(restricted.coefficient(2), q5(3, 1, 8));
        assert_eq!(
            r,
            restricted.with_variable(SeriesVar::Z),
            "projection at (0:1) is the restriction L(Z, 0)"
        );
    }

    #[test]
    fn projection_kills_the_kernel_generator() {
        let pol = policy(6, 6);
        for (a, b) in [(1i64, 1i64), (2, 1), (0, 1), (1, 0), (5, 1), (1, 5), (7, 3)] {
            let d = dir(a, b);
            let f = direction_kernel_generator(&d, pol).unwrap();
            let img = f.project(&d).unwrap();
            assert!(
                img.is_zero_to_working_precision(),
                "f_({a}:{b}) should project to 0, got {img}"
            );
        }
    }

    #[test]
    fn inversion_matches_geometric_series() {
        let pol = policy(4, 5);
        // (1 - Z)^-1 = 1 + Z + Z^2 + Z^3.
        let s = PowerSeries1::from_entries(
            5,
            pol,
            SeriesVar::Z,
            0,
            vec![(0, q5(1, 1, 6)), (1, q5(-1, 1, 6))],
        )
        .unwrap();
        let inv = s.invert().unwrap();
        for k in 0..4 {
            assert_eq!(inv.coefficient(k), q5(1, 1, 6));
        }
        let check = s.mul(&inv).unwrap();
        assert_eq!(check.coefficient(0), q5(1, 1, 6));
        assert!(check.coefficient(1).is_zero_to_precision());
    }

    #[test]
    fn inversion_requires_certified_unit_constant_term() {
        let pol = policy(4, 5);
        let s = PowerSeries1::from_entries(5, pol, SeriesVar::T, 0, vec![(0, q5(5, 1, 6))])
            .unwrap();
        assert_eq!(s.invert().unwrap_err(), Error::NotInvertible(1));
        let empty = PowerSeries1::zero(5, pol, SeriesVar::T);
        assert!(matches!(empty.invert().unwrap_err(), Error::NotInvertible(_)));
    }

    #[test]
    fn divide_by_var_power_discards_only_fuzzy_heads() {
        let pol = policy(4, 5);
        let fuzzy = q5(7, 1, 4).sub(&q5(7, 1, 4)).unwrap();
        let s = PowerSeries1::from_entries(
            5,
            pol,
            SeriesVar::T,
            0,
            vec![(0, fuzzy), (2, q5(3, 1, 6))],
        )
        .unwrap();
        let q = s.divide_by_var_power(2).unwrap();
        assert_eq!(q.coefficient(0), q5(3, 1, 6));
        let bad = PowerSeries1::from_entries(5, pol, SeriesVar::T, 0, vec![(0, q5(1, 1, 6))])
            .unwrap();
        assert!(matches!(
            bad.divide_by_var_power(1).unwrap_err(),
            Error::Indeterminate(_)
        ));
    }

    #[test]
    fn truncation_commutes_with_multiplication() {
        let pol = policy(5, 6);
        let a = x_plus_y_plus_xy(pol);
        let b = PowerSeries2::from_entries(
            5,
            pol,
            0,
            vec![((1, 0), q5(2, 1, 8)), ((0, 2), q5(3, 1, 8)), ((2, 1), q5(-1, 1, 8))],
        )
        .unwrap();
        for n in 2..=5u32 {
            let lhs = a.mul(&b).unwrap().truncated(n).unwrap();
            let rhs = a.truncated(n).unwrap().mul(&b.truncated(n).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "truncation at {n} should commute with product");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn projection_is_a_ring_homomorphism(
            entries_a in prop::collection::vec(((0u32..3, 0u32..3), -40i64..40), 1..5),
            entries_b in prop::collection::vec(((0u32..3, 0u32..3), -40i64..40), 1..5),
            da in -6i64..7,
            db in -6i64..7,
        ) {
            prop_assume!(da != 0 || db != 0);
            let pol = policy(5, 6);
            let build = |entries: &[((u32, u32), i64)]| {
                let mut acc = PowerSeries2::zero(5, pol);
                for ((i, j), v) in entries {
                    let single = PowerSeries2::from_entries(
                        5, pol, 0, vec![((*i, *j), q5(*v, 1, 10))],
                    ).unwrap();
                    acc = acc.add(&single).unwrap();
                }
                acc
            };
            let a = build(&entries_a);
            let b = build(&entries_b);
            let d = dir(da, db);
            let lhs = a.mul(&b).unwrap().project(&d).unwrap();
            let rhs = a.project(&d).unwrap().mul(&b.project(&d).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn kernel_generator_projects_to_zero(da in -20i64..21, db in -20i64..21) {
            prop_assume!(da != 0 || db != 0);
            let pol = policy(5, 5);
            let d = dir(da, db);
            let f = direction_kernel_generator(&d, pol).unwrap();
            let img = f.project(&d).unwrap();
            prop_assert!(img.is_zero_to_working_precision(), "got {}", img);
        }

        #[test]
        fn addition_of_series_commutes(
            entries_a in prop::collection::vec(((0u32..4, 0u32..4), -50i64..50), 0..6),
            entries_b in prop::collection::vec(((0u32..4, 0u32..4), -50i64..50), 0..6),
        ) {
            let pol = policy(4, 6);
            let build = |entries: &[((u32, u32), i64)]| {
                let mut acc = PowerSeries2::zero(5, pol);
                for ((i, j), v) in entries {
                    if i + j < 6 {
                        let single = PowerSeries2::from_entries(
                            5, pol, 0, vec![((*i, *j), q5(*v, 1, 8))],
                        ).unwrap();
                        acc = acc.add(&single).unwrap();
                    }
                }
                acc
            };
            let a = build(&entries_a);
            let b = build(&entries_b);
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        }
    }
}
