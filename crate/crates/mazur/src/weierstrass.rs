//! Weierstrass preparation and corank growth along a Z_p-tower.
//!
//! Over Z_p[[T]] every nonzero series factors as p^mu times a distinguished
//! polynomial times a unit.  This module computes that factorization for
//! truncated series with precision-tracked coefficients, together with the
//! division algorithm behind it, and uses it to count how often the
//! cyclotomic factors of (1+T)^(p^n) - 1 divide a given series.  Those
//! multiplicities feed the level-by-level corank formula
//!
//!   corank(n) = r * p^n + sum over k <= n of phi(p^k) * [Phi_k divides f],
//!
//! whose leading coefficient r is the growth number of the tower.
//!
//! Everything here certifies what it claims or refuses: a lambda-invariant
//! read off coefficients that are zero only to precision is an error, not a
//! guess, and a division chain that exhausts its precision reports so.

use crate::error::{Error, Result};
use crate::padic::{euler_phi_ppower, PadicNumber, Valuation};
use crate::series::{PowerSeries1, PrecisionPolicy, SeriesVar};
use num_bigint::{BigInt, BigUint};
use num_traits::One;

/// Result of Weierstrass preparation: f = p^mu * distinguished * unit, with
/// the distinguished polynomial monic of degree lambda and every lower
/// coefficient divisible by p.
#[derive(Debug, Clone)]
pub struct DistinguishedData {
    pub mu: u32,
    pub lambda: u32,
    /// Monic distinguished polynomial of degree lambda.
    pub distinguished: PowerSeries1,
    /// Unit-part cofactor, known below degree_bound - lambda.
    pub unit: PowerSeries1,
}

/// The mu-invariant: the minimal valuation over all coefficients, when the
/// precision certifies it.  A coefficient that vanishes only to a precision
/// below every resolved valuation leaves mu undecidable.
pub fn mu_invariant(f: &PowerSeries1) -> Result<u32> {
    if f.denom_exp() != 0 {
        return Err(Error::DenominatorNotCleared(f.denom_exp()));
    }
    let mut best_unit: Option<i64> = None;
    let mut weakest_bound: Option<i64> = None;
    for (_, c) in f.entries() {
        match c.valuation() {
            Valuation::Finite(v) => {
                best_unit = Some(best_unit.map_or(v, |b| b.min(v)));
            }
            Valuation::Infinite => {
                if let Some(n) = c.valuation_lower_bound() {
                    weakest_bound = Some(weakest_bound.map_or(n, |b| b.min(n)));
                }
            }
        }
    }
    match best_unit {
        None => Err(Error::SeriesZeroToPrecision),
        Some(v) => {
            if let Some(n) = weakest_bound {
                if n < v {
                    return Err(Error::Indeterminate(format!(
                        "a coefficient vanishes only to valuation >= {n}, below the best resolved valuation {v}; mu undecidable"
                    )));
                }
            }
            Ok(u32::try_from(v).expect("cleared series has nonnegative valuations"))
        }
    }
}

/// The lambda-invariant of a series with mu = 0: the least degree whose
/// coefficient is a certified unit, all lower coefficients being certified
/// divisible by p.
pub fn lambda_invariant(f: &PowerSeries1) -> Result<u32> {
    if f.denom_exp() != 0 {
        return Err(Error::DenominatorNotCleared(f.denom_exp()));
    }
    for (i, c) in f.entries() {
        match c.valuation() {
            Valuation::Finite(0) => return Ok(*i),
            Valuation::Finite(_) => continue,
            Valuation::Infinite => {
                let bound = c.valuation_lower_bound().unwrap_or(i64::MAX);
                if bound < 1 {
                    return Err(Error::Indeterminate(format!(
                        "coefficient of degree {i} carries no certified digit; lambda undecidable"
                    )));
                }
            }
        }
    }
    Err(Error::NoUnitCoefficient)
}

/// Division with remainder by a series of lambda-invariant lambda:
/// g = q * f + r with deg r < lambda.  The quotient is returned at degree
/// bound N - lambda and all output coefficients are capped at the working
/// precision, which is what the fixed-point iteration guarantees.
///
/// The pair is the unique solution of the degree-truncated problem; the
/// identity holds modulo (p^m, T^(N - lambda)) for the meet policy (m, N).
/// Reducing past the truncation gains one power of p per lambda degrees,
/// so when the remainder must agree with the division in the full power
/// series ring to the stated precision, run with N larger than
/// (m + 1) * lambda.
pub fn weierstrass_divide(
    g: &PowerSeries1,
    f: &PowerSeries1,
) -> Result<(PowerSeries1, PowerSeries1)> {
    if g.denom_exp() != 0 {
        return Err(Error::DenominatorNotCleared(g.denom_exp()));
    }
    if f.denom_exp() != 0 {
        return Err(Error::DenominatorNotCleared(f.denom_exp()));
    }
    let policy = g.policy().meet(&f.policy());
    let m = policy.coeff_prec();
    let n = policy.degree_bound();
    let lam = lambda_invariant(f)?;
    if lam >= n {
        return Err(Error::LambdaExceedsTruncation {
            lambda: lam,
            bound: n,
        });
    }
    let g = g.with_degree_bound(n);
    let f = f.with_degree_bound(n);

    // f = low + T^lam * u with v(low coefficients) >= 1 and u(0) a unit.
    let low = f.truncated(lam.max(1))?.with_degree_bound(n);
    let u = f.shift_down_lossy(lam).with_degree_bound(n - lam);
    let u_inv = u.invert()?;

    let mut q = PowerSeries1::zero(g.prime(), PrecisionPolicy::unchecked(m, n - lam), g.variable());
    for _ in 0..=m {
        let d = if lam == 0 {
            g.clone()
        } else {
            g.sub(&q.with_degree_bound(n).mul(&low)?)?
        };
        q = u_inv.mul(&d.shift_down_lossy(lam).with_degree_bound(n - lam))?;
    }
    let q = q.truncate_coeff_prec(m);

    let diff = g.sub(&q.with_degree_bound(n).mul(&f)?)?;
    for (i, c) in diff.entries() {
        if *i >= lam && c.certified_nonzero_below(i64::from(m)) {
            return Err(Error::Indeterminate(format!(
                "division residue has a certified nonzero coefficient at degree {i}; iteration did not converge at this precision"
            )));
        }
    }
    let r = diff.truncated(lam.max(1))?.truncate_coeff_prec(m);
    Ok((q, r))
}

/// Weierstrass preparation of a nonzero integral series.
///
/// The factors solve the degree-truncated problem exactly; they match the
/// classical factors of the untruncated series to the stated precision
/// only when the degree bound N exceeds (m + 1) * lambda, as for division.
pub fn weierstrass_prepare(f: &PowerSeries1) -> Result<DistinguishedData> {
    let mu = mu_invariant(f)?;
    let cleared = f.scale_stored(-i64::from(mu));
    let lambda = lambda_invariant(&cleared)?;
    let policy = cleared.policy();
    if lambda >= policy.degree_bound() {
        return Err(Error::LambdaExceedsTruncation {
            lambda,
            bound: policy.degree_bound(),
        });
    }
    let t_lam = PowerSeries1::monomial(f.prime(), policy, f.variable(), lambda)?;
    let (q, r) = weierstrass_divide(&t_lam, &cleared)?;
    let distinguished = t_lam
        .truncated((lambda + 1).max(2))?
        .sub(&r.with_degree_bound((lambda + 1).max(2)))?;
    let unit = q.invert()?;
    Ok(DistinguishedData {
        mu,
        lambda,
        distinguished,
        unit,
    })
}

fn bigint_binomial(n: u64, k: u32) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..u64::from(k) {
        num *= BigUint::from(n - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

/// The k-th cyclotomic factor of the tower polynomials, written in the
/// variable T = (generator - 1): T itself for k = 0, and for k >= 1 the
/// degree-phi(p^k) polynomial sum_{j=0}^{p-1} (1+T)^(j p^(k-1)).
pub fn cyclotomic_factor(
    prime: u64,
    policy: PrecisionPolicy,
    variable: SeriesVar,
    k: u32,
) -> Result<PowerSeries1> {
    if k == 0 {
        return PowerSeries1::monomial(prime, policy, variable, 1);
    }
    let phi = u32::try_from(euler_phi_ppower(prime, k)).map_err(|_| Error::DegreeOutOfRange {
        degree: u32::MAX,
        bound: policy.degree_bound(),
    })?;
    if phi >= policy.degree_bound() {
        return Err(Error::DegreeOutOfRange {
            degree: phi,
            bound: policy.degree_bound(),
        });
    }
    let step = u64::from(prime).pow(k - 1);
    let mut entries: Vec<(u32, PadicNumber)> = Vec::new();
    for i in 0..=phi {
        let mut c = BigUint::ZERO;
        for j in 0..prime {
            let n = j * step;
            if u64::from(i) <= n {
                c += bigint_binomial(n, i);
            }
        }
        if i == 0 {
            // The constant terms sum to p; the series form keeps each
            // coefficient exact at generous relative precision.
            debug_assert_eq!(c, BigUint::from(prime));
        }
        let value = PadicNumber::from_bigint_rational(
            prime,
            &BigInt::from(c),
            &BigInt::one(),
            policy.coeff_prec() + 40,
        )?;
        if !value.is_exact_zero() {
            entries.push((i, value));
        }
    }
    PowerSeries1::from_entries(prime, policy, variable, 0, entries)
}

/// How often the k-th cyclotomic factor divides f, decided by repeated
/// Weierstrass division at the working precision.  The mu-part of f is
/// stripped first (it carries no cyclotomic factors).  Divisibility that the
/// precision cannot decide is an error, never a silent zero.
pub fn cyclotomic_multiplicity(f: &PowerSeries1, k: u32) -> Result<u32> {
    let mu = mu_invariant(f)?;
    let mut cur = f.scale_stored(-i64::from(mu));
    let prime = f.prime();
    let phi_deg = u32::try_from(euler_phi_ppower(prime, k)).expect("phi fits u32 at usable k");
    let mut mult = 0u32;
    loop {
        let lam = lambda_invariant(&cur)?;
        if lam < phi_deg {
            return Ok(mult);
        }
        let phi = cyclotomic_factor(prime, cur.policy(), cur.variable(), k)?;
        let (q, r) = weierstrass_divide(&cur, &phi)?;
        if r.has_certified_nonzero_coefficient() {
            return Ok(mult);
        }
        if !r.is_zero_to_working_precision() {
            return Err(Error::Indeterminate(format!(
                "remainder after dividing by the level-{k} cyclotomic factor is neither certified nonzero nor zero to working precision"
            )));
        }
        if q.is_zero_to_working_precision() {
            return Err(Error::Indeterminate(
                "quotient lost all certified digits; precision exhausted in the division chain"
                    .to_string(),
            ));
        }
        mult += 1;
        cur = q;
    }
}

/// Predicted Selmer corank at level n of the tower:
/// r * p^n plus phi(p^k) for each k <= n whose cyclotomic factor divides f.
/// `f = None` means no algebraic factor contributes beyond the free part.
pub fn corank_at_level(r: u64, f: Option<&PowerSeries1>, n: u32) -> Result<u64> {
    let mut total = match f {
        None => 0,
        Some(f) => {
            let mut s = 0u64;
            for k in 0..=n {
                if cyclotomic_multiplicity(f, k)? >= 1 {
                    s += euler_phi_ppower(f.prime(), k);
                }
            }
            s
        }
    };
    let p_pow = match f {
        Some(f) => u64::from(f.prime()).pow(n),
        // Without a series there is no prime in sight; the caller supplies
        // levels only through `corank_table`, which carries the prime.
        None => return Err(Error::InvalidInput {
            field: "corank".to_string(),
            message: "corank_at_level without a series needs corank_table".to_string(),
        }),
    };
    total += r * p_pow;
    Ok(total)
}

/// The corank prediction for levels 0..=n_max, for a free rank r and an
/// optional torsion characteristic series.
pub fn corank_table(
    prime: u64,
    r: u64,
    f: Option<&PowerSeries1>,
    n_max: u32,
) -> Result<Vec<u64>> {
    if let Some(f) = f {
        if f.prime() != prime {
            return Err(Error::PrimeMismatch(prime, f.prime()));
        }
    }
    let mut out = Vec::with_capacity(n_max as usize + 1);
    // The cyclotomic-divisibility indicator at each k is shared by every
    // level n >= k; compute the multiplicities once.
    let mut contributions = Vec::new();
    if let Some(f) = f {
        for k in 0..=n_max {
            let phi = euler_phi_ppower(prime, k);
            if phi >= u64::from(f.policy().degree_bound()) && k > 0 {
                // The factor's degree exceeds every lambda the series can
                // hold, so it cannot divide; skip building it.
                contributions.push(0);
                continue;
            }
            contributions.push(if cyclotomic_multiplicity(f, k)? >= 1 {
                phi
            } else {
                0
            });
        }
    }
    for n in 0..=n_max {
        let mut total = r * u64::from(prime).pow(n);
        if f.is_some() {
            total += contributions[..=(n as usize)].iter().sum::<u64>();
        }
        out.push(total);
    }
    Ok(out)
}
