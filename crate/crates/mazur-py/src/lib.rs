//! Python bindings for the p-adic growth toolkit.
//!
//! The module mirrors the core value types (p-adic numbers, directions in
//! P^1(Z_p), truncated power series in one and two variables) and the main
//! operations built on them: projection to a direction, Weierstrass
//! preparation, the corank growth table, the quadratic-field hypothesis
//! check, and the full per-direction analysis pipeline driven by the same
//! JSON documents the command-line front end reads and writes.
//!
//! Everything is a thin wrapper: values are immutable, arithmetic returns
//! new objects, and any precision shortfall surfaces as a `ValueError`
//! rather than a silently wrong answer.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mazur::growth::{CmClass, MazurSetting, Sign, TwoVarLFunction};
use mazur::input::{AnalysisConfig, SeriesDocument1, SeriesDocument2};
use mazur::padic::{Direction as CoreDirection, PadicNumber, Valuation};
use mazur::series::{PowerSeries1, PowerSeries2};
use mazur::weierstrass;

fn err(e: mazur::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An element of Q_p carried at explicit finite precision.
#[pyclass(frozen)]
struct Padic {
    inner: PadicNumber,
}

#[pymethods]
impl Padic {
    /// Embeds num/den into Q_p with `rel_prec` known unit digits.
    #[staticmethod]
    fn from_rational(p: u64, num: i64, den: i64, rel_prec: u32) -> PyResult<Self> {
        Ok(Padic {
            inner: PadicNumber::from_rational(p, num, den, rel_prec).map_err(err)?,
        })
    }

    /// Parses a coefficient string: a base-10 integer reduced modulo
    /// p^abs_prec, or "valuation:digits" with little-endian base-p digits
    /// (comma-separated when p > 9).
    #[staticmethod]
    fn parse(p: u64, s: &str, abs_prec: u32) -> PyResult<Self> {
        Ok(Padic {
            inner: PadicNumber::parse_coeff_string(p, s, abs_prec).map_err(err)?,
        })
    }

    fn prime(&self) -> u64 {
        self.inner.prime()
    }

    /// The valuation when a nonzero digit is certified, None otherwise.
    fn valuation(&self) -> Option<i64> {
        match self.inner.valuation() {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    fn is_zero_to_precision(&self) -> bool {
        self.inner.is_zero_to_precision()
    }

    fn certified_nonzero(&self) -> bool {
        self.inner.certified_nonzero()
    }

    /// The "valuation:digits" coefficient string, round-trippable through
    /// `parse`.
    fn coeff_string(&self) -> String {
        self.inner.to_coeff_string()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Padic({})", self.inner)
    }

    fn __add__(&self, other: &Padic) -> PyResult<Padic> {
        Ok(Padic {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn __sub__(&self, other: &Padic) -> PyResult<Padic> {
        Ok(Padic {
            inner: self.inner.sub(&other.inner).map_err(err)?,
        })
    }

    fn __mul__(&self, other: &Padic) -> PyResult<Padic> {
        Ok(Padic {
            inner: self.inner.mul(&other.inner).map_err(err)?,
        })
    }

    fn __truediv__(&self, other: &Padic) -> PyResult<Padic> {
        Ok(Padic {
            inner: self.inner.div(&other.inner).map_err(err)?,
        })
    }

    fn __neg__(&self) -> Padic {
        Padic {
            inner: self.inner.neg(),
        }
    }
}

/// A direction (a : b) in P^1(Z_p), stored in its canonical chart.
#[pyclass(frozen)]
struct Direction {
    inner: CoreDirection,
}

#[pymethods]
impl Direction {
    /// Parses "a:b" with integer or rational entries, e.g. "1:0" or "2:1".
    #[staticmethod]
    fn parse(p: u64, s: &str, rel_prec: u32) -> PyResult<Self> {
        Ok(Direction {
            inner: CoreDirection::parse(p, s, rel_prec).map_err(err)?,
        })
    }

    fn prime(&self) -> u64 {
        self.inner.prime()
    }

    /// "A_UNIT" when the direction is stored as (1 : b/a), "B_UNIT" for
    /// (a/b : 1).
    fn chart(&self) -> String {
        match self.inner.chart() {
            mazur::padic::Chart::AUnit => "A_UNIT".to_string(),
            mazur::padic::Chart::BUnit => "B_UNIT".to_string(),
        }
    }

    /// True or False when the precision settles whether this is the
    /// anticyclotomic direction (0 : 1); None when it cannot.
    fn is_anticyclotomic(&self) -> Option<bool> {
        self.inner.is_anticyclotomic()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Direction({})", self.inner)
    }
}

/// A one-variable truncated power series over Z_p.
#[pyclass(frozen)]
struct Series1 {
    inner: PowerSeries1,
}

fn wrap1(inner: PowerSeries1) -> Series1 {
    Series1 { inner }
}

#[pymethods]
impl Series1 {
    /// Builds a series from (degree, coefficient-string) pairs, with
    /// coefficients read modulo p^coeff_prec and degrees below
    /// `degree_bound`.
    #[staticmethod]
    #[pyo3(signature = (p, coeff_prec, degree_bound, entries, variable = String::from("T")))]
    fn from_entries(
        p: u64,
        coeff_prec: u32,
        degree_bound: u32,
        entries: Vec<(u32, String)>,
        variable: String,
    ) -> PyResult<Self> {
        let doc = SeriesDocument1 {
            p,
            coeff_prec,
            degree_bound,
            variable,
            denom_exp: 0,
            series: entries,
        };
        Ok(wrap1(doc.build(None, None).map_err(err)?))
    }

    fn prime(&self) -> u64 {
        self.inner.prime()
    }

    fn coeff_prec(&self) -> u32 {
        self.inner.policy().coeff_prec()
    }

    fn degree_bound(&self) -> u32 {
        self.inner.policy().degree_bound()
    }

    fn coefficient(&self, i: u32) -> Padic {
        Padic {
            inner: self.inner.coefficient(i),
        }
    }

    /// The stored (degree, coefficient-string) pairs in degree order.
    fn entries(&self) -> Vec<(u32, String)> {
        self.inner
            .entries()
            .map(|(i, c)| (*i, c.to_coeff_string()))
            .collect()
    }

    fn is_zero_to_working_precision(&self) -> bool {
        self.inner.is_zero_to_working_precision()
    }

    fn __add__(&self, other: &Series1) -> PyResult<Series1> {
        Ok(wrap1(self.inner.add(&other.inner).map_err(err)?))
    }

    fn __sub__(&self, other: &Series1) -> PyResult<Series1> {
        Ok(wrap1(self.inner.sub(&other.inner).map_err(err)?))
    }

    fn __mul__(&self, other: &Series1) -> PyResult<Series1> {
        Ok(wrap1(self.inner.mul(&other.inner).map_err(err)?))
    }

    /// Weierstrass preparation: u * p^mu * (distinguished polynomial), as a
    /// dict with keys "mu", "lambda", "distinguished", and "unit".
    fn prepare<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let data = weierstrass::weierstrass_prepare(&self.inner).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("mu", data.mu)?;
        out.set_item("lambda", data.lambda)?;
        out.set_item("distinguished", wrap1(data.distinguished))?;
        out.set_item("unit", wrap1(data.unit))?;
        Ok(out)
    }

    /// The JSON series document, identical to what the command-line tool
    /// emits and re-ingests.
    fn to_json(&self) -> String {
        mazur::report::to_json(&SeriesDocument1::from_series(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!(
            "Series1(p={}, entries={})",
            self.inner.prime(),
            self.inner.entries().count()
        )
    }
}

/// A two-variable truncated power series over Z_p[[X, Y]].
#[pyclass(frozen)]
struct Series2 {
    inner: PowerSeries2,
}

#[pymethods]
impl Series2 {
    /// Builds a series from (i, j, coefficient-string) triples for the
    /// monomials X^i Y^j.
    #[staticmethod]
    fn from_entries(
        p: u64,
        coeff_prec: u32,
        degree_bound: u32,
        entries: Vec<(u32, u32, String)>,
    ) -> PyResult<Self> {
        let doc = SeriesDocument2 {
            p,
            coeff_prec,
            degree_bound,
            denom_exp: 0,
            series: entries,
        };
        Ok(Series2 {
            inner: doc.build(None, None).map_err(err)?,
        })
    }

    fn prime(&self) -> u64 {
        self.inner.prime()
    }

    fn coefficient(&self, i: u32, j: u32) -> Padic {
        Padic {
            inner: self.inner.coefficient(i, j),
        }
    }

    /// Substitutes the one-variable parametrization of the given direction,
    /// producing the series of the corresponding Z_p-extension.
    fn project(&self, dir: &Direction) -> PyResult<Series1> {
        Ok(wrap1(self.inner.project(&dir.inner).map_err(err)?))
    }

    fn to_json(&self) -> String {
        mazur::report::to_json(&SeriesDocument2::from_series(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!(
            "Series2(p={}, entries={})",
            self.inner.prime(),
            self.inner.entries().count()
        )
    }
}

/// The Kronecker symbol (d | q) for q a prime or 1.
#[pyfunction]
fn kronecker_symbol(d: i64, q: u64) -> i64 {
    mazur::padic::kronecker_symbol(d, q)
}

/// Euler phi of p^k.
#[pyfunction]
fn euler_phi_ppower(p: u64, k: u32) -> u64 {
    mazur::padic::euler_phi_ppower(p, k)
}

/// Checks the quadratic-field hypotheses for (p, conductor, discriminant)
/// and returns the full report as a dict; a failed hypothesis is a finding,
/// not an exception.
#[pyfunction]
fn check_hypotheses<'py>(
    py: Python<'py>,
    p: u64,
    conductor: u64,
    discriminant: i64,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = mazur::growth::check_hypotheses(p, conductor, discriminant).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("prime", rep.prime)?;
    out.set_item("conductor", rep.conductor)?;
    out.set_item("discriminant", rep.discriminant)?;
    out.set_item("n_plus", rep.n_plus)?;
    out.set_item("n_minus", rep.n_minus)?;
    out.set_item("split_primes", rep.split_primes)?;
    out.set_item("inert_primes", rep.inert_primes)?;
    out.set_item("ramified_primes", rep.ramified_primes)?;
    out.set_item("n_minus_squarefree", rep.n_minus_squarefree)?;
    out.set_item("heegner_hypothesis_holds", rep.heegner_hypothesis_holds)?;
    out.set_item("p_splits_in_k", rep.p_splits_in_k)?;
    out.set_item("p_at_least_5", rep.p_at_least_5)?;
    Ok(out)
}

/// The case-table growth coefficient: sign is +1 or -1, and exceptional
/// marks the non-generic anticyclotomic case.
#[pyfunction]
#[pyo3(signature = (anticyclotomic, sign, exceptional = false))]
fn predicted_growth(anticyclotomic: bool, sign: i64, exceptional: bool) -> PyResult<u64> {
    let sign = match sign {
        1 => Sign::Plus,
        -1 => Sign::Minus,
        other => {
            return Err(PyValueError::new_err(format!(
                "sign must be 1 or -1, got {other}"
            )))
        }
    };
    let cm_class = if exceptional {
        CmClass::Exceptional
    } else {
        CmClass::Generic
    };
    Ok(mazur::growth::mazur_predicted_growth(
        anticyclotomic,
        &MazurSetting { sign, cm_class },
    ))
}

/// Predicted Selmer coranks at levels 0..=n_max for a free rank and an
/// optional torsion characteristic series.
#[pyfunction]
#[pyo3(signature = (p, rank, n_max, factor = None))]
fn corank_table(p: u64, rank: u64, n_max: u32, factor: Option<&Series1>) -> PyResult<Vec<u64>> {
    weierstrass::corank_table(p, rank, factor.map(|f| &f.inner), n_max).map_err(err)
}

/// Runs the full analysis pipeline on a JSON analysis configuration and
/// returns the structured report, byte-identical to the command-line
/// output for the same input.
#[pyfunction]
fn analyze_document(json: &str) -> PyResult<String> {
    let cfg = AnalysisConfig::parse(json).map_err(err)?;
    let built = cfg.build(None, None).map_err(err)?;
    let rows = mazur::growth::analyze(
        &built.l,
        &built.directions,
        &built.height,
        built.setting.as_ref(),
        built.ac_free_rank,
        built.ac_torsion,
    )
    .map_err(err)?;
    let hypotheses = built
        .hypotheses
        .as_ref()
        .map(|h| mazur::growth::check_hypotheses(built.prime, h.conductor, h.discriminant))
        .transpose()
        .map_err(err)?;
    let policy = built.l.series().policy();
    Ok(mazur::report::to_json(&mazur::report::growth_document(
        built.prime,
        policy.coeff_prec(),
        policy.degree_bound(),
        hypotheses.as_ref(),
        &built.direction_labels,
        &rows,
    )))
}

/// Derivative of the projected L-function at the origin, for a two-variable
/// series with L(X, 0) = 0 and a non-anticyclotomic direction.
#[pyfunction]
fn derivative_at_origin(l: &Series2, dir: &Direction) -> PyResult<Padic> {
    let lfun = TwoVarLFunction::new(l.inner.clone()).map_err(err)?;
    Ok(Padic {
        inner: mazur::growth::derivative_at_origin(&lfun, &dir.inner).map_err(err)?,
    })
}

/// The height-ratio closed form for the same derivative; agreement with
/// `derivative_at_origin` is the criterion's consistency check.
#[pyfunction]
fn closed_form_derivative(l: &Series2, dir: &Direction) -> PyResult<Padic> {
    let lfun = TwoVarLFunction::new(l.inner.clone()).map_err(err)?;
    Ok(Padic {
        inner: mazur::growth::closed_form_derivative(&lfun, &dir.inner).map_err(err)?,
    })
}

/// Exact p-adic toolkit: p-adic numbers, directions, truncated power
/// series, Weierstrass preparation, and Selmer corank growth prediction.
#[pymodule]
fn mazur_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Padic>()?;
    m.add_class::<Direction>()?;
    m.add_class::<Series1>()?;
    m.add_class::<Series2>()?;
    m.add_function(wrap_pyfunction!(kronecker_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(euler_phi_ppower, m)?)?;
    m.add_function(wrap_pyfunction!(check_hypotheses, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_growth, m)?)?;
    m.add_function(wrap_pyfunction!(corank_table, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_document, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_at_origin, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_derivative, m)?)?;
    Ok(())
}
