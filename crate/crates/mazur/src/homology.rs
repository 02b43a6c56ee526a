//! Finite-level models of Iwasawa modules and pseudo-nullity checks.
//!
//! Truncating the two-variable algebra at level (m, n) gives the group ring
//! (Z/p^m)[(Z/p^n)^2], with 1+X and 1+Y the two generators.  A cyclic module
//! presented by relations maps to its finite quotient there, where kernels
//! and cokernels of multiplication operators become computable subgroup
//! sizes.  These finite snapshots are the independent oracle against which
//! the Weierstrass-theoretic corank predictions can be checked, and also the
//! engine behind growth comparisons of kernels across levels.
//!
//! Subgroup sizes over Z/p^m are computed through a Howell-style row basis:
//! every inserted generator either reduces to zero or contributes a pivot of
//! known valuation, and companion rows keep the basis closed under
//! multiplication by p, which is what makes the size formula
//! prod p^(m - e_i) exact over a non-field coefficient ring.

use crate::error::{Error, Result};
use crate::padic::{Direction, PadicNumber, Valuation};
use crate::series::{direction_kernel_generator, PowerSeries1, PowerSeries2};
use num_traits::ToPrimitive;
use std::fmt;

/// Hard cap on the group order p^(vars * n) of a finite level.
pub const LEVEL_SIZE_CAP: u64 = 4096;

/// Verdict on whether coinvariants along a direction are torsion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorsionVerdict {
    /// Some relation projects to a certified nonzero series.
    Torsion,
    /// Every relation projects to the structural zero, so the coinvariants
    /// have a free summand.
    NotTorsion,
    /// All projections vanish to working precision without a certificate
    /// either way; more precision might settle it.
    NotConcluded,
    /// Some projected coefficient is neither certified nonzero nor zero to
    /// working precision.
    Indeterminate,
}

impl TorsionVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            TorsionVerdict::Torsion => "torsion",
            TorsionVerdict::NotTorsion => "not_torsion",
            TorsionVerdict::NotConcluded => "not_concluded",
            TorsionVerdict::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for TorsionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

/// Outcome of the sufficient-condition catalog for pseudo-nullity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PseudoNullVerdict {
    /// One of the sufficient criteria applies; the reason names it.
    Established { reason: String },
    /// No criterion in the catalog applies.  Says nothing in the negative.
    Unknown,
}

impl PseudoNullVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            PseudoNullVerdict::Established { .. } => "yes",
            PseudoNullVerdict::Unknown => "unknown",
        }
    }
}

/// A cyclic module Lambda/(relations) over the two-variable algebra.
#[derive(Debug, Clone)]
pub struct CyclicModulePresentation {
    prime: u64,
    relations: Vec<PowerSeries2>,
}

impl CyclicModulePresentation {
    /// Presentation with at least one relation.
    pub fn new(prime: u64, relations: Vec<PowerSeries2>) -> Result<Self> {
        if relations.is_empty() {
            return Err(Error::EmptyPresentation);
        }
        for r in &relations {
            if r.prime() != prime {
                return Err(Error::PrimeMismatch(prime, r.prime()));
            }
        }
        Ok(CyclicModulePresentation { prime, relations })
    }

    /// The free rank-one module, presented by no relations at all.  Kept as
    /// a separate constructor so that an accidentally empty relation list
    /// stays an error.
    pub fn free(prime: u64) -> Self {
        CyclicModulePresentation {
            prime,
            relations: Vec::new(),
        }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn relations(&self) -> &[PowerSeries2] {
        &self.relations
    }
}

/// Whether the coinvariants of the module along a direction are torsion over
/// the one-variable algebra of that direction: project every relation and
/// look for a certified nonzero one.
pub fn coinvariants_torsion(
    pres: &CyclicModulePresentation,
    dir: &Direction,
) -> Result<TorsionVerdict> {
    let mut saw_precision_zero = false;
    let mut saw_unsettled = false;
    for rel in &pres.relations {
        let image = rel.project(dir)?;
        if image.has_certified_nonzero_coefficient() {
            return Ok(TorsionVerdict::Torsion);
        }
        if image.is_structurally_zero() {
            continue;
        }
        if image.is_zero_to_working_precision() {
            saw_precision_zero = true;
        } else {
            saw_unsettled = true;
        }
    }
    Ok(if saw_unsettled {
        TorsionVerdict::Indeterminate
    } else if saw_precision_zero {
        TorsionVerdict::NotConcluded
    } else {
        TorsionVerdict::NotTorsion
    })
}

/// Sufficient-condition catalog for pseudo-nullity of Lambda/(relations).
/// Every criterion errs on the side of Unknown; an Established verdict is a
/// proof sketch, subject only to the stated precision of the inputs.
pub fn pseudo_null_sufficient(pres: &CyclicModulePresentation) -> Result<PseudoNullVerdict> {
    let rels = &pres.relations;

    // A relation that is a unit power series kills the whole module.
    for r in rels {
        if let Some(c) = r.stored_coefficient(0, 0) {
            if r.denom_exp() == 0 && matches!(c.valuation(), Valuation::Finite(0)) {
                return Ok(PseudoNullVerdict::Established {
                    reason: "a relation is a unit power series, so the module vanishes"
                        .to_string(),
                });
            }
        }
    }

    let is_certified_constant = |r: &PowerSeries2| -> bool {
        r.denom_exp() == 0
            && r.entries().count() == 1
            && r.stored_coefficient(0, 0)
                .map(|c| c.certified_nonzero())
                .unwrap_or(false)
    };
    let has_unit_coefficient = |r: &PowerSeries2| -> bool {
        r.denom_exp() == 0
            && r.entries()
                .any(|(_, c)| matches!(c.valuation(), Valuation::Finite(0)))
    };

    // p^k together with anything nonzero mod p cuts the support down to
    // a one-dimensional set.
    if rels.iter().any(is_certified_constant) && rels.iter().any(has_unit_coefficient) {
        return Ok(PseudoNullVerdict::Established {
            reason: "a relation is a nonzero constant p-power and another is nonzero mod p"
                .to_string(),
        });
    }

    // A distinguished-type relation purely in X and one purely in Y bound
    // the support by a pair of transverse hypersurfaces.
    let pure_unit_in = |r: &PowerSeries2, want_x: bool| -> bool {
        r.denom_exp() == 0
            && !r.is_structurally_zero()
            && r.entries().all(|((i, j), _)| if want_x { *j == 0 } else { *i == 0 })
            && r.entries().any(|((i, j), c)| {
                let deg = if want_x { *i } else { *j };
                deg >= 1 && matches!(c.valuation(), Valuation::Finite(0))
            })
    };
    if rels.iter().any(|r| pure_unit_in(r, true)) && rels.iter().any(|r| pure_unit_in(r, false)) {
        return Ok(PseudoNullVerdict::Established {
            reason: "one relation is distinguished purely in X and another purely in Y"
                .to_string(),
        });
    }

    // Two relations that are kernel generators of distinct directions.
    let mut found: Vec<Direction> = Vec::new();
    for r in rels {
        if r.denom_exp() != 0 {
            continue;
        }
        let a = r.coefficient(1, 0);
        let b = r.coefficient(0, 1);
        let Ok(dir) = Direction::canonical(&a, &b) else {
            continue;
        };
        let Ok(expected) = direction_kernel_generator(&dir, r.policy()) else {
            continue;
        };
        if *r == expected {
            found.push(dir);
        }
    }
    for i in 0..found.len() {
        for j in (i + 1)..found.len() {
            if found[i] != found[j] {
                return Ok(PseudoNullVerdict::Established {
                    reason:
                        "two relations match the kernel generators of distinct directions at working precision"
                            .to_string(),
                });
            }
        }
    }

    Ok(PseudoNullVerdict::Unknown)
}

fn val_u64(mut x: u64, p: u64) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn inv_unit_mod(u: u64, pm: u64) -> u64 {
    // Extended Euclid on machine words; u is a unit mod the prime power pm.
    let (mut r0, mut r1) = (pm as i128, u as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "inverse of a non-unit requested");
    t0.rem_euclid(pm as i128) as u64
}

/// Row basis of a subgroup of (Z/p^m)^width, closed under the operations
/// that make prod p^(m - e_i) the exact subgroup size.
#[derive(Debug, Clone)]
struct HowellBasis {
    p: u64,
    pm: u64,
    m: u32,
    width: usize,
    /// lead column -> (lead valuation, row with row[lead] = p^val and zeros
    /// to the left of lead).
    rows: std::collections::BTreeMap<usize, (u32, Vec<u64>)>,
}

impl HowellBasis {
    fn new(p: u64, m: u32, width: usize) -> Self {
        let pm = p.pow(m);
        HowellBasis {
            p,
            pm,
            m,
            width,
            rows: std::collections::BTreeMap::new(),
        }
    }

    fn scale_row(&self, v: &mut [u64], by: u64) {
        for x in v.iter_mut() {
            *x = *x * by % self.pm;
        }
    }

    fn insert(&mut self, v: Vec<u64>) {
        let mut queue = vec![v];
        while let Some(mut v) = queue.pop() {
            let mut c = 0;
            'reduce: while c < self.width {
                if v[c] == 0 {
                    c += 1;
                    continue;
                }
                let vv = val_u64(v[c], self.p);
                match self.rows.get(&c) {
                    None => {
                        let unit = v[c] / self.p.pow(vv);
                        let inv = inv_unit_mod(unit, self.pm);
                        self.scale_row(&mut v, inv);
                        if vv > 0 {
                            let factor = self.p.pow(self.m - vv);
                            let companion: Vec<u64> =
                                v.iter().map(|x| x * factor % self.pm).collect();
                            queue.push(companion);
                        }
                        self.rows.insert(c, (vv, v));
                        break 'reduce;
                    }
                    Some((e, _)) if vv >= *e => {
                        let e = *e;
                        let row = &self.rows[&c].1;
                        let q = v[c] / self.p.pow(e);
                        for i in c..self.width {
                            let sub = q * row[i] % self.pm;
                            v[i] = (v[i] + self.pm - sub) % self.pm;
                        }
                        debug_assert_eq!(v[c], 0);
                    }
                    Some(_) => {
                        // The incoming row is the better pivot; swap and
                        // keep reducing the displaced one.
                        let unit = v[c] / self.p.pow(vv);
                        let inv = inv_unit_mod(unit, self.pm);
                        self.scale_row(&mut v, inv);
                        let (_, old) = self
                            .rows
                            .insert(c, (vv, v.clone()))
                            .expect("occupied in this branch");
                        if vv > 0 {
                            let factor = self.p.pow(self.m - vv);
                            let companion: Vec<u64> =
                                v.iter().map(|x| x * factor % self.pm).collect();
                            queue.push(companion);
                        }
                        v = old;
                    }
                }
            }
        }
    }

    /// log_p of the subgroup size.
    fn size_exponent(&self) -> u64 {
        self.rows
            .values()
            .map(|(e, _)| u64::from(self.m - e))
            .sum()
    }
}

/// The finite quotient ring (Z/p^m)[(Z/p^n)^vars] with its generators
/// g = 1+X (and h = 1+Y when vars = 2).
#[derive(Debug, Clone)]
pub struct FiniteLevelRing {
    prime: u64,
    m: u32,
    n: u32,
    vars: u8,
    side: u64,
    d: usize,
    pm: u64,
}

impl FiniteLevelRing {
    fn new(prime: u64, m: u32, n: u32, vars: u8) -> Result<Self> {
        if m < 1 {
            return Err(Error::CoeffPrecTooSmall);
        }
        let side = u64::from(prime)
            .checked_pow(n)
            .ok_or(Error::SizeCapExceeded(u64::MAX, LEVEL_SIZE_CAP))?;
        let d = side
            .checked_pow(u32::from(vars))
            .ok_or(Error::SizeCapExceeded(u64::MAX, LEVEL_SIZE_CAP))?;
        if d > LEVEL_SIZE_CAP {
            return Err(Error::SizeCapExceeded(d, LEVEL_SIZE_CAP));
        }
        let pm = u64::from(prime)
            .checked_pow(m)
            .filter(|&x| x <= 1 << 31)
            .ok_or(Error::SizeCapExceeded(u64::MAX, LEVEL_SIZE_CAP))?;
        Ok(FiniteLevelRing {
            prime,
            m,
            n,
            vars,
            side,
            d: usize::try_from(d).expect("capped"),
            pm,
        })
    }

    /// One-variable level: (Z/p^m)[T]/((1+T)^(p^n) - 1).
    pub fn one_variable(prime: u64, m: u32, n: u32) -> Result<Self> {
        Self::new(prime, m, n, 1)
    }

    /// Two-variable level: (Z/p^m)[X, Y] modulo both tower polynomials.
    pub fn two_variable(prime: u64, m: u32, n: u32) -> Result<Self> {
        Self::new(prime, m, n, 2)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn coeff_modulus_exponent(&self) -> u32 {
        self.m
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    /// Number of group-ring coordinates, p^(vars * n).
    pub fn rank(&self) -> usize {
        self.d
    }

    fn index2(&self, a: u64, b: u64) -> usize {
        usize::try_from(a * self.side + b).expect("within rank")
    }

    fn zero_elem(&self) -> Vec<u64> {
        vec![0; self.d]
    }

    fn delta(&self, idx: usize) -> Vec<u64> {
        let mut v = self.zero_elem();
        v[idx] = 1;
        v
    }

    fn add_index(&self, i: usize, j: usize) -> usize {
        match self.vars {
            1 => {
                let s = (i as u64 + j as u64) % self.side;
                usize::try_from(s).expect("within rank")
            }
            _ => {
                let (ia, ib) = (i as u64 / self.side, i as u64 % self.side);
                let (ja, jb) = (j as u64 / self.side, j as u64 % self.side);
                self.index2((ia + ja) % self.side, (ib + jb) % self.side)
            }
        }
    }

    /// Group-convolution product of two elements.
    pub fn mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let mut out = self.zero_elem();
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0 {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if *yj == 0 {
                    continue;
                }
                let k = self.add_index(i, j);
                out[k] = (out[k] + xi * yj) % self.pm;
            }
        }
        out
    }

    /// Translate of an element by the t-th group element (multiplication by
    /// the corresponding monomial in 1+X, 1+Y).
    pub fn translate(&self, x: &[u64], t: usize) -> Vec<u64> {
        let mut out = self.zero_elem();
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0 {
                out[self.add_index(i, t)] = *xi;
            }
        }
        out
    }

    fn coeff_residue(&self, c: &PadicNumber) -> Result<u64> {
        let r = c.residue_mod(self.m)?;
        Ok(r.to_u64().expect("residue below p^m fits u64"))
    }

    /// Image of a two-variable series under Lambda -> this ring
    /// (X -> g - 1, Y -> h - 1).  The series is reduced as the polynomial
    /// its stored entries spell out; callers choose a degree bound that
    /// carries everything they mean.
    pub fn reduce2(&self, s: &PowerSeries2) -> Result<Vec<u64>> {
        if self.vars != 1 && s.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime, s.prime()));
        }
        if self.vars == 1 {
            return Err(Error::InvalidInput {
                field: "finite level".to_string(),
                message: "two-variable series reduced in a one-variable level".to_string(),
            });
        }
        if s.denom_exp() != 0 {
            return Err(Error::DenominatorNotCleared(s.denom_exp()));
        }
        let xbar = {
            let mut v = self.zero_elem();
            let idx = self.index2(1 % self.side, 0);
            v[idx] = (v[idx] + 1) % self.pm;
            v[0] = (v[0] + self.pm - 1) % self.pm;
            v
        };
        let ybar = {
            let mut v = self.zero_elem();
            let idx = self.index2(0, 1 % self.side);
            v[idx] = (v[idx] + 1) % self.pm;
            v[0] = (v[0] + self.pm - 1) % self.pm;
            v
        };
        let max_i = s.entries().map(|((i, _), _)| *i).max().unwrap_or(0) as usize;
        let max_j = s.entries().map(|((_, j), _)| *j).max().unwrap_or(0) as usize;
        let mut xp = vec![self.delta(0)];
        for _ in 0..max_i {
            let next = self.mul(xp.last().expect("nonempty"), &xbar);
            xp.push(next);
        }
        let mut yp = vec![self.delta(0)];
        for _ in 0..max_j {
            let next = self.mul(yp.last().expect("nonempty"), &ybar);
            yp.push(next);
        }
        let mut acc = self.zero_elem();
        for ((i, j), c) in s.entries() {
            let r = self.coeff_residue(c)?;
            if r == 0 {
                continue;
            }
            let term = self.mul(&xp[*i as usize], &yp[*j as usize]);
            for (k, t) in term.iter().enumerate() {
                acc[k] = (acc[k] + r * t) % self.pm;
            }
        }
        Ok(acc)
    }

    /// Image of a one-variable series under T -> g - 1.
    pub fn reduce1(&self, s: &PowerSeries1) -> Result<Vec<u64>> {
        if s.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime, s.prime()));
        }
        if self.vars != 1 {
            return Err(Error::InvalidInput {
                field: "finite level".to_string(),
                message: "one-variable series reduced in a two-variable level".to_string(),
            });
        }
        if s.denom_exp() != 0 {
            return Err(Error::DenominatorNotCleared(s.denom_exp()));
        }
        let tbar = {
            let mut v = self.zero_elem();
            let one_idx = usize::try_from(1 % self.side).expect("small");
            v[one_idx] = (v[one_idx] + 1) % self.pm;
            v[0] = (v[0] + self.pm - 1) % self.pm;
            v
        };
        let max_i = s.entries().map(|(i, _)| *i).max().unwrap_or(0) as usize;
        let mut tp = vec![self.delta(0)];
        for _ in 0..max_i {
            let next = self.mul(tp.last().expect("nonempty"), &tbar);
            tp.push(next);
        }
        let mut acc = self.zero_elem();
        for (i, c) in s.entries() {
            let r = self.coeff_residue(c)?;
            if r == 0 {
                continue;
            }
            for (k, t) in tp[*i as usize].iter().enumerate() {
                acc[k] = (acc[k] + r * t) % self.pm;
            }
        }
        Ok(acc)
    }

    /// The exact image of the kernel generator of a direction: the group
    /// element g^a h^b minus the identity, with a, b the canonical
    /// coordinates reduced modulo p^n.  No series truncation is involved.
    pub fn direction_generator(&self, dir: &Direction) -> Result<Vec<u64>> {
        if dir.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime, dir.prime()));
        }
        if self.vars != 2 {
            return Err(Error::InvalidInput {
                field: "finite level".to_string(),
                message: "direction generator needs the two-variable level".to_string(),
            });
        }
        let a = dir
            .a()
            .residue_mod(self.n)?
            .to_u64()
            .expect("residue below p^n fits u64");
        let b = dir
            .b()
            .residue_mod(self.n)?
            .to_u64()
            .expect("residue below p^n fits u64");
        let mut v = self.zero_elem();
        let idx = self.index2(a % self.side, b % self.side);
        v[idx] = (v[idx] + 1) % self.pm;
        v[0] = (v[0] + self.pm - 1) % self.pm;
        Ok(v)
    }

    /// Sums coefficients over the fibers of the group surjection onto a
    /// coarser level of the same shape.
    pub fn coarsen(&self, x: &[u64], target: &FiniteLevelRing) -> Result<Vec<u64>> {
        if target.prime != self.prime || target.vars != self.vars || target.n > self.n {
            return Err(Error::InvalidInput {
                field: "finite level".to_string(),
                message: "coarsening needs the same shape at a lower level".to_string(),
            });
        }
        let mut out = target.zero_elem();
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0 {
                continue;
            }
            let k = match self.vars {
                1 => usize::try_from(i as u64 % target.side).expect("small"),
                _ => {
                    let (a, b) = (i as u64 / self.side, i as u64 % self.side);
                    target.index2(a % target.side, b % target.side)
                }
            };
            out[k] = (out[k] + xi % target.pm) % target.pm;
        }
        Ok(out)
    }
}

/// A module's relation ideal realized inside one finite level, with its
/// Howell basis precomputed so many directions can be tested against it.
#[derive(Debug, Clone)]
pub struct FiniteLevelIdeal {
    ring: FiniteLevelRing,
    basis: HowellBasis,
}

/// Builds the finite-level image of the relation ideal of a presentation.
pub fn ideal_at_level(
    pres: &CyclicModulePresentation,
    m: u32,
    n: u32,
) -> Result<FiniteLevelIdeal> {
    let ring = FiniteLevelRing::two_variable(pres.prime(), m, n)?;
    let mut basis = HowellBasis::new(pres.prime(), m, ring.d);
    for rel in pres.relations() {
        let x = ring.reduce2(rel)?;
        for t in 0..ring.d {
            basis.insert(ring.translate(&x, t));
        }
    }
    Ok(FiniteLevelIdeal { ring, basis })
}

impl FiniteLevelIdeal {
    pub fn ring(&self) -> &FiniteLevelRing {
        &self.ring
    }

    /// log_p of the size of the finite-level module R/I.
    pub fn module_size_exponent(&self) -> u64 {
        u64::from(self.ring.m) * self.ring.d as u64 - self.basis.size_exponent()
    }

    fn kernel_exponent_of_element(&self, f: &[u64]) -> u64 {
        let mut basis = self.basis.clone();
        for t in 0..self.ring.d {
            basis.insert(self.ring.translate(f, t));
        }
        // |ker(f on R/I)| = |R/I| / |f(R/I)| = p^(mD) / |fR + I|.
        u64::from(self.ring.m) * self.ring.d as u64 - basis.size_exponent()
    }

    /// log_p of the kernel size of multiplication by the direction's kernel
    /// generator on the finite-level module.
    pub fn direction_kernel_exponent(&self, dir: &Direction) -> Result<u64> {
        let f = self.ring.direction_generator(dir)?;
        Ok(self.kernel_exponent_of_element(&f))
    }

    /// log_p of the kernel size of multiplication by an arbitrary series.
    pub fn series_kernel_exponent(&self, f: &PowerSeries2) -> Result<u64> {
        let x = self.ring.reduce2(f)?;
        Ok(self.kernel_exponent_of_element(&x))
    }
}

/// Diagonal valuations of the Smith normal form of a matrix over Z/p^m,
/// given row-major.  Returned valuations are those of the pivots found
/// (all below m); rows times columns minus pivots is what is left free.
fn smith_exponents(mut a: Vec<Vec<u64>>, p: u64, m: u32) -> Vec<u32> {
    let pm = p.pow(m);
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut used_row = vec![false; rows];
    let mut used_col = vec![false; cols];
    let mut out = Vec::new();
    loop {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, row) in a.iter().enumerate() {
            if used_row[i] {
                continue;
            }
            for (j, &x) in row.iter().enumerate() {
                if used_col[j] || x == 0 {
                    continue;
                }
                let v = val_u64(x, p);
                if best.map_or(true, |(_, _, bv)| v < bv) {
                    best = Some((i, j, v));
                }
            }
            if matches!(best, Some((_, _, 0))) {
                break;
            }
        }
        let Some((r0, c0, v)) = best else { break };
        let unit = a[r0][c0] / p.pow(v);
        let inv = inv_unit_mod(unit, pm);
        // Clear the pivot column with row operations; every entry is
        // divisible by p^v because the pivot valuation is minimal.
        for i in 0..rows {
            if i == r0 || used_row[i] || a[i][c0] == 0 {
                continue;
            }
            let q = (a[i][c0] / p.pow(v)) * inv % pm;
            for j in 0..cols {
                let sub = q * a[r0][j] % pm;
                a[i][j] = (a[i][j] + pm - sub) % pm;
            }
        }
        // Then the pivot row with column operations (only row r0 changes).
        for j in 0..cols {
            if j == c0 || used_col[j] || a[r0][j] == 0 {
                continue;
            }
            let q = (a[r0][j] / p.pow(v)) * inv % pm;
            for i in 0..rows {
                let sub = q * a[i][c0] % pm;
                a[i][j] = (a[i][j] + pm - sub) % pm;
            }
        }
        used_row[r0] = true;
        used_col[c0] = true;
        out.push(v);
    }
    out
}

/// Invariants of the one-variable finite quotient (Z/p^m)[T]/(omega_n, f):
/// free rank over Z/p^m and the elementary-divisor valuations of the
/// relation matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneVarQuotientInvariants {
    pub free_rank: u64,
    pub pivot_valuations: Vec<u32>,
}

/// Computes the finite-level invariants of f at level (m, n) by Smith
/// normal form of the multiplication matrix of f on the group ring.
pub fn one_var_quotient_invariants(
    prime: u64,
    m: u32,
    n: u32,
    f: &PowerSeries1,
) -> Result<OneVarQuotientInvariants> {
    let ring = FiniteLevelRing::one_variable(prime, m, n)?;
    let x = ring.reduce1(f)?;
    let mut rows = vec![vec![0u64; ring.d]; ring.d];
    for t in 0..ring.d {
        let col = ring.translate(&x, t);
        for (s, v) in col.iter().enumerate() {
            rows[s][t] = *v;
        }
    }
    let pivots = smith_exponents(rows, prime, m);
    Ok(OneVarQuotientInvariants {
        free_rank: ring.d as u64 - pivots.len() as u64,
        pivot_valuations: pivots,
    })
}
