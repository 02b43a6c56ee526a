//! Corank growth predictions from a two-variable L-function.
//!
//! The input is a two-variable p-adic L-function that vanishes along the
//! line Y = 0, the rank-one shape: one cyclotomic zero is built in.  For a
//! direction other than the anticyclotomic one, the projected one-variable
//! series then starts at order at least one, and its linear coefficient has
//! a closed form in the Y-partial of the L-function at the origin.  A
//! certified nonzero there pins the projected lambda-invariant down to the
//! built-in zero and bounds the Selmer corank along that direction.  Along
//! the anticyclotomic direction the projection dies identically and the
//! prediction falls back to sign and CM-class bookkeeping.
//!
//! Everything here reasons about characteristic ideals through the
//! L-function; reports carry that identification as an explicit caveat
//! rather than silently assuming it.

use crate::error::{Error, Result};
use crate::homology::TorsionVerdict;
use crate::padic::{
    is_odd_prime, kronecker_symbol, Chart, Direction, PadicNumber, Valuation,
};
use crate::series::{PowerSeries1, PowerSeries2};
use std::fmt;

/// Sign of the functional equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if *self == Sign::Plus { "+1" } else { "-1" })
    }
}

/// Whether the anticyclotomic setting is generic or exceptional for the
/// growth count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmClass {
    Generic,
    Exceptional,
}

impl fmt::Display for CmClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            if *self == CmClass::Generic {
                "generic"
            } else {
                "exceptional"
            }
        )
    }
}

/// The sign and class data feeding the growth-number case table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MazurSetting {
    pub sign: Sign,
    pub cm_class: CmClass,
}

/// How the height input to the derivative criterion is supplied.
#[derive(Debug, Clone)]
pub enum HeightValue {
    /// A computed or tabulated value.
    Explicit(PadicNumber),
    /// Read the quantity off the linear coefficient of the projected
    /// L-function itself.
    DeriveFromL,
    /// Assume nonvanishing without a witness; reports flag the assumption.
    AssertedNonzero,
}

/// Predicted growth coefficient c in corank ~ c * p^n + O(1) from the case
/// table alone.
pub fn mazur_predicted_growth(anticyclotomic: bool, setting: &MazurSetting) -> u64 {
    if !anticyclotomic {
        return 0;
    }
    match (setting.sign, setting.cm_class) {
        (Sign::Plus, _) => 0,
        (Sign::Minus, CmClass::Generic) => 1,
        (Sign::Minus, CmClass::Exceptional) => 2,
    }
}

/// A two-variable L-function normalized to vanish along Y = 0.
#[derive(Debug, Clone)]
pub struct TwoVarLFunction {
    series: PowerSeries2,
    exact_cyclotomic_vanishing: bool,
}

impl TwoVarLFunction {
    /// Wraps a series after checking the built-in cyclotomic zero: any
    /// certified nonzero coefficient on the Y = 0 line is rejected.
    pub fn new(series: PowerSeries2) -> Result<Self> {
        let line = series.restrict_y_zero();
        if line.has_certified_nonzero_coefficient() {
            return Err(Error::InvalidInput {
                field: "series".to_string(),
                message: "a certified nonzero coefficient sits on the line Y = 0; \
                          the rank-one normalization requires L(X, 0) = 0"
                    .to_string(),
            });
        }
        let exact = line.is_structurally_zero();
        Ok(TwoVarLFunction {
            series,
            exact_cyclotomic_vanishing: exact,
        })
    }

    pub fn series(&self) -> &PowerSeries2 {
        &self.series
    }

    /// True when the Y = 0 line is structurally zero; false when it merely
    /// vanishes to working precision.
    pub fn exact_cyclotomic_vanishing(&self) -> bool {
        self.exact_cyclotomic_vanishing
    }

    /// The Y-partial at the origin as a mathematical value, denominator
    /// included.
    pub fn linear_y_coefficient(&self) -> PadicNumber {
        self.series
            .coefficient(0, 1)
            .scale_by_p_power(-i64::from(self.series.denom_exp()))
    }
}

/// Linear coefficient of the projection of the L-function along a
/// direction, computed by actually substituting.
pub fn derivative_at_origin(l: &TwoVarLFunction, dir: &Direction) -> Result<PadicNumber> {
    let projected = l.series().project(dir)?;
    Ok(projected
        .coefficient(1)
        .scale_by_p_power(-i64::from(projected.denom_exp())))
}

/// The same linear coefficient in closed form: -(a/b) times the Y-partial
/// at the origin in the chart where b is a unit, and the Y-partial itself
/// in the other chart.  The anticyclotomic direction is excluded because
/// the projection vanishes identically there.
pub fn closed_form_derivative(l: &TwoVarLFunction, dir: &Direction) -> Result<PadicNumber> {
    if dir.prime() != l.series().prime() {
        return Err(Error::PrimeMismatch(l.series().prime(), dir.prime()));
    }
    match dir.is_anticyclotomic() {
        Some(true) => Err(Error::AnticyclotomicExcluded),
        None => Err(Error::IndeterminateDirection),
        Some(false) => {
            let c01 = l.linear_y_coefficient();
            match dir.chart() {
                Chart::BUnit => dir.ratio().neg().mul(&c01),
                Chart::AUnit => Ok(c01),
            }
        }
    }
}

/// Outcome of scanning a one-variable series for a nonzero coefficient
/// within its working precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NonvanishingCertificate {
    /// The lowest degree carrying a certified nonzero coefficient, with the
    /// mathematical valuation of that coefficient.
    Certified { degree: u32, valuation: i64 },
    /// Every stored coefficient vanishes to the working precision.
    ZeroToPrecision,
    /// Some coefficient can be neither certified below the working
    /// precision nor declared zero at it.
    Indeterminate,
}

/// Scans ascending degrees for a coefficient certified nonzero within the
/// working precision.  A coefficient known nonzero only beyond that
/// precision yields Indeterminate, never a silent zero.
pub fn nonvanishing_certificate(f: &PowerSeries1) -> NonvanishingCertificate {
    let cutoff = i64::from(f.policy().coeff_prec()) + i64::from(f.denom_exp());
    let e = i64::from(f.denom_exp());
    let mut unresolved = false;
    for (i, c) in f.entries() {
        if c.certified_nonzero_below(cutoff) {
            let Valuation::Finite(v) = c.valuation() else {
                unreachable!("a certified nonzero coefficient has finite valuation");
            };
            return NonvanishingCertificate::Certified {
                degree: *i,
                valuation: v - e,
            };
        }
        match c.valuation_lower_bound() {
            None => {}
            Some(bound) if bound >= cutoff => {
                if c.certified_nonzero() {
                    // Nonzero, but only beyond working precision.
                    unresolved = true;
                }
            }
            Some(_) => unresolved = true,
        }
    }
    if unresolved {
        NonvanishingCertificate::Indeterminate
    } else {
        NonvanishingCertificate::ZeroToPrecision
    }
}

/// Torsion verdict for the Selmer coinvariants along a direction, read off
/// the projected L-function under the characteristic-ideal identification.
pub fn selmer_coinvariants_torsion(
    l: &TwoVarLFunction,
    dir: &Direction,
) -> Result<TorsionVerdict> {
    let projected = l.series().project(dir)?;
    if projected.is_structurally_zero() {
        return Ok(TorsionVerdict::NotTorsion);
    }
    Ok(match nonvanishing_certificate(&projected) {
        NonvanishingCertificate::Certified { .. } => TorsionVerdict::Torsion,
        NonvanishingCertificate::ZeroToPrecision => TorsionVerdict::NotConcluded,
        NonvanishingCertificate::Indeterminate => TorsionVerdict::Indeterminate,
    })
}

/// Arithmetic hypotheses on (p, N, D) and the quadratic splitting data they
/// produce.  Only a non-fundamental discriminant or bad reduction at p are
/// hard errors; everything else is reported as flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisReport {
    pub prime: u64,
    pub conductor: u64,
    pub discriminant: i64,
    pub n_plus: u64,
    pub n_minus: u64,
    pub split_primes: Vec<u64>,
    pub inert_primes: Vec<u64>,
    pub ramified_primes: Vec<u64>,
    pub n_minus_squarefree: bool,
    /// N- squarefree with an even number of inert primes and no ramified
    /// ones: the Heegner-type hypothesis behind the sign -1 setup.
    pub heegner_hypothesis_holds: bool,
    pub p_splits_in_k: bool,
    pub p_at_least_5: bool,
}

fn is_squarefree(mut x: u64) -> bool {
    let mut d = 2;
    while d * d <= x {
        if x % d == 0 {
            x /= d;
            if x % d == 0 {
                return false;
            }
        }
        d += 1;
    }
    true
}

fn is_fundamental_discriminant(d: i64) -> bool {
    if d >= 0 {
        return false;
    }
    let abs = d.unsigned_abs();
    match d.rem_euclid(4) {
        1 => is_squarefree(abs),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

fn factorize(mut x: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= x {
        if x % d == 0 {
            let mut e = 0;
            while x % d == 0 {
                x /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if x > 1 {
        out.push((x, 1));
    }
    out
}

/// Checks the standing hypotheses for conductor N and imaginary quadratic
/// discriminant D at p, splitting N by the behavior of each prime factor
/// in the quadratic field.
pub fn check_hypotheses(prime: u64, conductor: u64, discriminant: i64) -> Result<HypothesisReport> {
    if !is_odd_prime(prime) {
        return Err(Error::NotOddPrime(prime));
    }
    if conductor == 0 {
        return Err(Error::InvalidInput {
            field: "conductor".to_string(),
            message: "the conductor must be a positive integer".to_string(),
        });
    }
    if !is_fundamental_discriminant(discriminant) {
        return Err(Error::NotFundamental(discriminant));
    }
    if conductor % prime == 0 {
        return Err(Error::BadReductionAtP {
            p: prime,
            n: conductor,
        });
    }
    let mut n_plus = 1u64;
    let mut n_minus = 1u64;
    let mut split_primes = Vec::new();
    let mut inert_primes = Vec::new();
    let mut ramified_primes = Vec::new();
    for (ell, e) in factorize(conductor) {
        match kronecker_symbol(discriminant, ell) {
            1 => {
                n_plus *= ell.pow(e);
                split_primes.push(ell);
            }
            -1 => {
                n_minus *= ell.pow(e);
                inert_primes.push(ell);
            }
            _ => {
                n_plus *= ell.pow(e);
                ramified_primes.push(ell);
            }
        }
    }
    let n_minus_squarefree = is_squarefree(n_minus);
    let heegner_hypothesis_holds =
        n_minus_squarefree && inert_primes.len() % 2 == 0 && ramified_primes.is_empty();
    Ok(HypothesisReport {
        prime,
        conductor,
        discriminant,
        n_plus,
        n_minus,
        split_primes,
        inert_primes,
        ramified_primes,
        n_minus_squarefree,
        heegner_hypothesis_holds,
        p_splits_in_k: kronecker_symbol(discriminant, prime) == 1,
        p_at_least_5: prime >= 5,
    })
}

/// Outcome of the growth analysis along one direction.
#[derive(Debug, Clone)]
pub struct DirectionGrowth {
    pub direction: Direction,
    pub anticyclotomic: bool,
    /// Linear coefficient of the projected L-function; absent along the
    /// anticyclotomic direction where the projection dies identically.
    pub derivative: Option<PadicNumber>,
    pub certificate: NonvanishingCertificate,
    pub torsion: TorsionVerdict,
    /// Predicted growth coefficient c in corank ~ c * p^n + O(1); absent
    /// when the evidence does not settle it.
    pub predicted_growth_coefficient: Option<u64>,
    pub notes: Vec<String>,
}

impl DirectionGrowth {
    /// Whether this row reached a definite conclusion.
    pub fn concluded(&self) -> bool {
        self.predicted_growth_coefficient.is_some()
            && !matches!(
                self.torsion,
                TorsionVerdict::NotConcluded | TorsionVerdict::Indeterminate
            )
    }
}

enum ValueClass {
    CertifiedNonzero,
    ExactZero,
    Unsettled,
}

fn classify_at(x: &PadicNumber, working_prec: u32) -> ValueClass {
    if x.is_exact_zero() {
        return ValueClass::ExactZero;
    }
    if x.certified_nonzero_below(i64::from(working_prec)) {
        return ValueClass::CertifiedNonzero;
    }
    ValueClass::Unsettled
}

/// Runs the derivative criterion for every requested direction.
///
/// ac_free_rank supplies the predicted growth coefficient along the
/// anticyclotomic direction (where the L-function is silent), and
/// ac_torsion an externally known torsion verdict there; when a setting is
/// given, the case table serves as a cross-check and as the fallback.
pub fn analyze(
    l: &TwoVarLFunction,
    directions: &[Direction],
    height: &HeightValue,
    setting: Option<&MazurSetting>,
    ac_free_rank: Option<u64>,
    ac_torsion: Option<bool>,
) -> Result<Vec<DirectionGrowth>> {
    let working_prec = l.series().policy().coeff_prec();
    let mut out = Vec::with_capacity(directions.len());
    for dir in directions {
        if dir.prime() != l.series().prime() {
            return Err(Error::PrimeMismatch(l.series().prime(), dir.prime()));
        }
        let mut notes = Vec::new();
        if !l.exact_cyclotomic_vanishing() {
            notes.push(
                "the Y = 0 line vanishes only to working precision, not structurally"
                    .to_string(),
            );
        }
        notes.push(
            "characteristic ideals are identified with the L-function; conclusions are \
             conditional on that identification"
                .to_string(),
        );
        let row = match dir.is_anticyclotomic() {
            None => {
                notes.push(
                    "the direction cannot be certified away from the anticyclotomic one at \
                     this precision"
                        .to_string(),
                );
                DirectionGrowth {
                    direction: dir.clone(),
                    anticyclotomic: false,
                    derivative: None,
                    certificate: NonvanishingCertificate::Indeterminate,
                    torsion: TorsionVerdict::Indeterminate,
                    predicted_growth_coefficient: None,
                    notes,
                }
            }
            Some(true) => {
                let table = setting.map(|s| mazur_predicted_growth(true, s));
                let c = ac_free_rank.or(table);
                if let (Some(given), Some(tab)) = (ac_free_rank, table) {
                    if given != tab {
                        notes.push(format!(
                            "supplied anticyclotomic free rank {given} disagrees with the \
                             case-table value {tab}"
                        ));
                    }
                }
                if c.is_none() {
                    notes.push(
                        "no anticyclotomic free rank or case-table setting supplied"
                            .to_string(),
                    );
                }
                notes.push(
                    "the projection vanishes identically along this direction; the \
                     prediction comes from sign and class data"
                        .to_string(),
                );
                let torsion = match ac_torsion {
                    Some(true) => TorsionVerdict::Torsion,
                    Some(false) => TorsionVerdict::NotTorsion,
                    None => TorsionVerdict::NotConcluded,
                };
                DirectionGrowth {
                    direction: dir.clone(),
                    anticyclotomic: true,
                    derivative: None,
                    certificate: NonvanishingCertificate::ZeroToPrecision,
                    torsion,
                    predicted_growth_coefficient: c,
                    notes,
                }
            }
            Some(false) => {
                let delta = closed_form_derivative(l, dir)?;
                let projected = l.series().project(dir)?;
                let certificate = nonvanishing_certificate(&projected);
                let effective = match height {
                    HeightValue::AssertedNonzero => {
                        notes.push(
                            "height nonvanishing asserted by the caller, not computed"
                                .to_string(),
                        );
                        ValueClass::CertifiedNonzero
                    }
                    HeightValue::Explicit(h) => {
                        if h.certified_nonzero_below(i64::from(working_prec))
                            && !delta.certified_nonzero()
                        {
                            notes.push(
                                "the explicit height is nonzero but the derivative \
                                 vanishes to working precision"
                                    .to_string(),
                            );
                        }
                        classify_at(h, working_prec)
                    }
                    HeightValue::DeriveFromL => classify_at(&delta, working_prec),
                };
                let (c, torsion) = match effective {
                    ValueClass::CertifiedNonzero => {
                        notes.push(
                            "the projected series has a simple zero at the origin"
                                .to_string(),
                        );
                        (Some(0), TorsionVerdict::Torsion)
                    }
                    ValueClass::ExactZero => {
                        notes.push(
                            "the height input is exactly zero; boundedness cannot follow \
                             from the derivative criterion"
                                .to_string(),
                        );
                        (None, selmer_coinvariants_torsion(l, dir)?)
                    }
                    ValueClass::Unsettled => match &certificate {
                        NonvanishingCertificate::Certified { degree, .. } => {
                            notes.push(format!(
                                "the derivative is not certified, but the projection is \
                                 nonzero from degree {degree} on"
                            ));
                            (Some(0), TorsionVerdict::Torsion)
                        }
                        NonvanishingCertificate::ZeroToPrecision => {
                            (None, TorsionVerdict::NotConcluded)
                        }
                        NonvanishingCertificate::Indeterminate => {
                            (None, TorsionVerdict::Indeterminate)
                        }
                    },
                };
                DirectionGrowth {
                    direction: dir.clone(),
                    anticyclotomic: false,
                    derivative: Some(delta),
                    certificate,
                    torsion,
                    predicted_growth_coefficient: c,
                    notes,
                }
            }
        };
        out.push(row);
    }
    Ok(out)
}
