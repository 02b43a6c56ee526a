//! JSON input documents for the command-line tools.
//!
//! Every document names its prime, working precision, and degree bound
//! explicitly; coefficients travel as strings, either plain base-10
//! integers or the `v:digits` form a previous run emitted.  Building the
//! typed values re-canonicalizes everything, so feeding a tool its own
//! output is stable byte for byte.

use crate::error::{Error, Result};
use crate::growth::{CmClass, HeightValue, MazurSetting, Sign, TwoVarLFunction};
use crate::homology::CyclicModulePresentation;
use crate::padic::{is_odd_prime, Direction, PadicNumber};
use crate::series::{PowerSeries1, PowerSeries2, PrecisionPolicy, SeriesVar};
use serde::{Deserialize, Serialize};

fn invalid(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::InvalidInput {
        field: field.into(),
        message: message.into(),
    }
}

fn refield(err: Error, field: String) -> Error {
    let message = match err {
        Error::InvalidInput { message, .. } => message,
        other => other.to_string(),
    };
    Error::InvalidInput { field, message }
}

/// Extra relative precision given to direction coordinates beyond the
/// coefficient precision, so chart ratios stay sharp through binomials.
pub const DIRECTION_PRECISION_MARGIN: u32 = 8;

fn parse_variable(s: &str) -> Result<SeriesVar> {
    match s {
        "X" => Ok(SeriesVar::X),
        "Y" => Ok(SeriesVar::Y),
        "Z" => Ok(SeriesVar::Z),
        "T" => Ok(SeriesVar::T),
        other => Err(invalid(
            "variable",
            format!("unknown variable {other:?}; expected X, Y, Z, or T"),
        )),
    }
}

fn parse_json<'a, T: Deserialize<'a>>(json: &'a str) -> Result<T> {
    serde_json::from_str(json).map_err(|e| invalid("json", e.to_string()))
}

/// A one-variable power series as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDocument1 {
    pub p: u64,
    pub coeff_prec: u32,
    pub degree_bound: u32,
    pub variable: String,
    #[serde(default)]
    pub denom_exp: u32,
    pub series: Vec<(u32, String)>,
}

impl SeriesDocument1 {
    pub fn parse(json: &str) -> Result<Self> {
        parse_json(json)
    }

    /// Builds the series, with optional overrides for precision and degree
    /// bound from the command line.
    pub fn build(
        &self,
        coeff_prec: Option<u32>,
        degree_bound: Option<u32>,
    ) -> Result<PowerSeries1> {
        if !is_odd_prime(self.p) {
            return Err(Error::NotOddPrime(self.p));
        }
        let m = coeff_prec.unwrap_or(self.coeff_prec);
        let n = degree_bound.unwrap_or(self.degree_bound);
        let policy = PrecisionPolicy::new(m, n)?;
        let variable = parse_variable(&self.variable)?;
        let abs = m + self.denom_exp;
        let mut entries = Vec::with_capacity(self.series.len());
        for (idx, (i, s)) in self.series.iter().enumerate() {
            let c = PadicNumber::parse_coeff_string(self.p, s, abs)
                .map_err(|e| refield(e, format!("series[{idx}]")))?;
            entries.push((*i, c));
        }
        PowerSeries1::from_entries(self.p, policy, variable, self.denom_exp, entries)
    }

    /// Canonical document for a series, ready to serialize.
    pub fn from_series(s: &PowerSeries1) -> Self {
        SeriesDocument1 {
            p: s.prime(),
            coeff_prec: s.policy().coeff_prec(),
            degree_bound: s.policy().degree_bound(),
            variable: s.variable().to_string(),
            denom_exp: s.denom_exp(),
            series: s
                .entries()
                .map(|(i, c)| (*i, c.to_coeff_string()))
                .collect(),
        }
    }
}

/// A two-variable power series as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDocument2 {
    pub p: u64,
    pub coeff_prec: u32,
    pub degree_bound: u32,
    #[serde(default)]
    pub denom_exp: u32,
    pub series: Vec<(u32, u32, String)>,
}

impl SeriesDocument2 {
    pub fn parse(json: &str) -> Result<Self> {
        parse_json(json)
    }

    pub fn build(
        &self,
        coeff_prec: Option<u32>,
        degree_bound: Option<u32>,
    ) -> Result<PowerSeries2> {
        if !is_odd_prime(self.p) {
            return Err(Error::NotOddPrime(self.p));
        }
        let m = coeff_prec.unwrap_or(self.coeff_prec);
        let n = degree_bound.unwrap_or(self.degree_bound);
        let policy = PrecisionPolicy::new(m, n)?;
        let abs = m + self.denom_exp;
        let mut entries = Vec::with_capacity(self.series.len());
        for (idx, (i, j, s)) in self.series.iter().enumerate() {
            let c = PadicNumber::parse_coeff_string(self.p, s, abs)
                .map_err(|e| refield(e, format!("series[{idx}]")))?;
            entries.push(((*i, *j), c));
        }
        PowerSeries2::from_entries(self.p, policy, self.denom_exp, entries)
    }

    pub fn from_series(s: &PowerSeries2) -> Self {
        SeriesDocument2 {
            p: s.prime(),
            coeff_prec: s.policy().coeff_prec(),
            degree_bound: s.policy().degree_bound(),
            denom_exp: s.denom_exp(),
            series: s
                .entries()
                .map(|((i, j), c)| (*i, *j, c.to_coeff_string()))
                .collect(),
        }
    }
}

/// The sign and CM-class pair in a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingConfig {
    pub sign: i64,
    pub cm_class: String,
}

/// Conductor and discriminant for the hypothesis checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesesConfig {
    #[serde(rename = "N")]
    pub conductor: u64,
    #[serde(rename = "D")]
    pub discriminant: i64,
}

/// Full configuration for the growth analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub p: u64,
    pub coeff_prec: u32,
    pub degree_bound: u32,
    #[serde(default)]
    pub denom_exp: u32,
    pub series: Vec<(u32, u32, String)>,
    pub directions: Vec<String>,
    pub height: String,
    #[serde(default)]
    pub ac_free_rank: Option<u64>,
    #[serde(default)]
    pub ac_torsion: Option<bool>,
    #[serde(default)]
    pub setting: Option<SettingConfig>,
    #[serde(default)]
    pub hypotheses: Option<HypothesesConfig>,
}

/// Typed values built from an [`AnalysisConfig`].
#[derive(Debug, Clone)]
pub struct AnalysisInput {
    pub prime: u64,
    pub l: TwoVarLFunction,
    pub directions: Vec<Direction>,
    pub direction_labels: Vec<String>,
    pub height: HeightValue,
    pub setting: Option<MazurSetting>,
    pub ac_free_rank: Option<u64>,
    pub ac_torsion: Option<bool>,
    pub hypotheses: Option<HypothesesConfig>,
}

fn parse_height(prime: u64, s: &str, rel_prec: u32) -> Result<HeightValue> {
    match s {
        "nonzero" => Ok(HeightValue::AssertedNonzero),
        "derive" => Ok(HeightValue::DeriveFromL),
        other => {
            let (num, den) = match other.split_once('/') {
                Some((n, d)) => (n.trim(), d.trim()),
                None => (other.trim(), "1"),
            };
            let num: i64 = num
                .parse()
                .map_err(|_| invalid("height", format!("not a rational: {other:?}")))?;
            let den: i64 = den
                .parse()
                .map_err(|_| invalid("height", format!("not a rational: {other:?}")))?;
            let h = PadicNumber::from_rational(prime, num, den, rel_prec)
                .map_err(|e| refield(e, "height".to_string()))?;
            Ok(HeightValue::Explicit(h))
        }
    }
}

fn parse_setting(cfg: &SettingConfig) -> Result<MazurSetting> {
    let sign = match cfg.sign {
        1 => Sign::Plus,
        -1 => Sign::Minus,
        other => {
            return Err(invalid(
                "setting.sign",
                format!("expected 1 or -1, got {other}"),
            ))
        }
    };
    let cm_class = match cfg.cm_class.as_str() {
        "generic" => CmClass::Generic,
        "exceptional" => CmClass::Exceptional,
        other => {
            return Err(invalid(
                "setting.cm_class",
                format!("expected \"generic\" or \"exceptional\", got {other:?}"),
            ))
        }
    };
    Ok(MazurSetting { sign, cm_class })
}

impl AnalysisConfig {
    pub fn parse(json: &str) -> Result<Self> {
        parse_json(json)
    }

    /// Validates every field and assembles the typed inputs for the
    /// analysis, with optional precision and degree-bound overrides.
    pub fn build(
        &self,
        coeff_prec: Option<u32>,
        degree_bound: Option<u32>,
    ) -> Result<AnalysisInput> {
        if !is_odd_prime(self.p) {
            return Err(Error::NotOddPrime(self.p));
        }
        let doc = SeriesDocument2 {
            p: self.p,
            coeff_prec: self.coeff_prec,
            degree_bound: self.degree_bound,
            denom_exp: self.denom_exp,
            series: self.series.clone(),
        };
        let series = doc.build(coeff_prec, degree_bound)?;
        let m = series.policy().coeff_prec();
        let l = TwoVarLFunction::new(series)?;
        if self.directions.is_empty() {
            return Err(invalid("directions", "at least one direction is required"));
        }
        let rel = m + DIRECTION_PRECISION_MARGIN;
        let mut directions = Vec::with_capacity(self.directions.len());
        for (idx, s) in self.directions.iter().enumerate() {
            let d = Direction::parse(self.p, s, rel)
                .map_err(|e| refield(e, format!("directions[{idx}]")))?;
            directions.push(d);
        }
        let height = parse_height(self.p, &self.height, rel)?;
        let setting = self.setting.as_ref().map(parse_setting).transpose()?;
        if let Some(h) = &self.hypotheses {
            crate::growth::check_hypotheses(self.p, h.conductor, h.discriminant)?;
        }
        Ok(AnalysisInput {
            prime: self.p,
            l,
            directions,
            direction_labels: self.directions.clone(),
            height,
            setting,
            ac_free_rank: self.ac_free_rank,
            ac_torsion: self.ac_torsion,
            hypotheses: self.hypotheses.clone(),
        })
    }
}

/// Configuration for the finite-level oracle run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub p: u64,
    pub coeff_prec: u32,
    pub degree_bound: u32,
    /// Relations of one cyclic module, each a list of [i, j, coefficient]
    /// entries.
    pub generators: Vec<Vec<(u32, u32, String)>>,
    pub directions: Vec<String>,
    /// Pairs [m, n]: coefficient modulus exponent and tower level.
    pub levels: Vec<(u32, u32)>,
    /// Optional one-variable series to run the finite-level free-rank
    /// computation on at every listed level.
    #[serde(default)]
    pub selmer_factors: Option<Vec<Vec<(u32, String)>>>,
}

/// Typed values built from an [`OracleConfig`].
#[derive(Debug, Clone)]
pub struct OracleInput {
    pub prime: u64,
    pub presentation: CyclicModulePresentation,
    pub directions: Vec<Direction>,
    pub direction_labels: Vec<String>,
    pub levels: Vec<(u32, u32)>,
    pub selmer_factors: Vec<PowerSeries1>,
}

impl OracleConfig {
    pub fn parse(json: &str) -> Result<Self> {
        parse_json(json)
    }

    pub fn build(&self) -> Result<OracleInput> {
        if !is_odd_prime(self.p) {
            return Err(Error::NotOddPrime(self.p));
        }
        let policy = PrecisionPolicy::new(self.coeff_prec, self.degree_bound)?;
        if self.generators.is_empty() {
            return Err(Error::EmptyPresentation);
        }
        let abs = self.coeff_prec;
        let mut relations = Vec::with_capacity(self.generators.len());
        for (gi, entries) in self.generators.iter().enumerate() {
            let mut parsed = Vec::with_capacity(entries.len());
            for (idx, (i, j, s)) in entries.iter().enumerate() {
                let c = PadicNumber::parse_coeff_string(self.p, s, abs)
                    .map_err(|e| refield(e, format!("generators[{gi}][{idx}]")))?;
                parsed.push(((*i, *j), c));
            }
            relations.push(PowerSeries2::from_entries(self.p, policy, 0, parsed)?);
        }
        let presentation = CyclicModulePresentation::new(self.p, relations)?;
        let rel = self.coeff_prec + DIRECTION_PRECISION_MARGIN;
        let mut directions = Vec::with_capacity(self.directions.len());
        for (idx, s) in self.directions.iter().enumerate() {
            let d = Direction::parse(self.p, s, rel)
                .map_err(|e| refield(e, format!("directions[{idx}]")))?;
            directions.push(d);
        }
        if self.levels.is_empty() {
            return Err(invalid("levels", "at least one [m, n] level is required"));
        }
        for (idx, (m, _)) in self.levels.iter().enumerate() {
            if *m < 1 {
                return Err(invalid(
                    format!("levels[{idx}]"),
                    "the coefficient modulus exponent m must be at least 1",
                ));
            }
        }
        let mut selmer_factors = Vec::new();
        if let Some(factors) = &self.selmer_factors {
            for (fi, entries) in factors.iter().enumerate() {
                let mut parsed = Vec::with_capacity(entries.len());
                for (idx, (i, s)) in entries.iter().enumerate() {
                    let c = PadicNumber::parse_coeff_string(self.p, s, abs)
                        .map_err(|e| refield(e, format!("selmer_factors[{fi}][{idx}]")))?;
                    parsed.push((*i, c));
                }
                selmer_factors.push(PowerSeries1::from_entries(
                    self.p,
                    policy,
                    SeriesVar::T,
                    0,
                    parsed,
                )?);
            }
        }
        Ok(OracleInput {
            prime: self.p,
            presentation,
            directions,
            direction_labels: self.directions.clone(),
            levels: self.levels.clone(),
            selmer_factors,
        })
    }
}
