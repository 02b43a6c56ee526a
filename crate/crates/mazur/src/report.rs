//! Structured output documents and plain-text table rendering.
//!
//! Everything serialized here is deterministic: field order is fixed by
//! the struct definitions, collections are emitted in the order they were
//! computed, and coefficients use the same string form the input layer
//! parses, so a document can be fed back in unchanged.

use crate::growth::{DirectionGrowth, HypothesisReport, NonvanishingCertificate};
use crate::homology::{OneVarQuotientInvariants, PseudoNullVerdict, TorsionVerdict};
use crate::input::SeriesDocument1;
use crate::padic::Chart;
use crate::weierstrass::DistinguishedData;
use serde::Serialize;
use std::fmt::Write as _;

/// Serializes any document as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize infallibly");
    s.push('\n');
    s
}

/// JSON form of a nonvanishing certificate.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateJson {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valuation: Option<i64>,
}

impl From<&NonvanishingCertificate> for CertificateJson {
    fn from(c: &NonvanishingCertificate) -> Self {
        match c {
            NonvanishingCertificate::Certified { degree, valuation } => CertificateJson {
                status: "certified".to_string(),
                degree: Some(*degree),
                valuation: Some(*valuation),
            },
            NonvanishingCertificate::ZeroToPrecision => CertificateJson {
                status: "zero_to_precision".to_string(),
                degree: None,
                valuation: None,
            },
            NonvanishingCertificate::Indeterminate => CertificateJson {
                status: "indeterminate".to_string(),
                degree: None,
                valuation: None,
            },
        }
    }
}

/// One direction's analysis outcome, in serializable form.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthRowJson {
    pub direction: String,
    pub chart: String,
    pub anticyclotomic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivative: Option<String>,
    pub certificate: CertificateJson,
    pub torsion: String,
    pub predicted_growth_coefficient: Option<u64>,
    pub notes: Vec<String>,
}

/// JSON form of the hypothesis checks.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisJson {
    pub prime: u64,
    pub conductor: u64,
    pub discriminant: i64,
    pub n_plus: u64,
    pub n_minus: u64,
    pub split_primes: Vec<u64>,
    pub inert_primes: Vec<u64>,
    pub ramified_primes: Vec<u64>,
    pub n_minus_squarefree: bool,
    pub heegner_hypothesis_holds: bool,
    pub p_splits_in_k: bool,
    pub p_at_least_5: bool,
}

impl From<&HypothesisReport> for HypothesisJson {
    fn from(r: &HypothesisReport) -> Self {
        HypothesisJson {
            prime: r.prime,
            conductor: r.conductor,
            discriminant: r.discriminant,
            n_plus: r.n_plus,
            n_minus: r.n_minus,
            split_primes: r.split_primes.clone(),
            inert_primes: r.inert_primes.clone(),
            ramified_primes: r.ramified_primes.clone(),
            n_minus_squarefree: r.n_minus_squarefree,
            heegner_hypothesis_holds: r.heegner_hypothesis_holds,
            p_splits_in_k: r.p_splits_in_k,
            p_at_least_5: r.p_at_least_5,
        }
    }
}

/// The full analysis document.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthDocument {
    pub p: u64,
    pub coeff_prec: u32,
    pub degree_bound: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<HypothesisJson>,
    pub directions: Vec<GrowthRowJson>,
}

fn chart_name(chart: Chart) -> String {
    chart.to_string()
}

/// Assembles the analysis document from computed rows, labeling each row
/// with the direction string the caller supplied.
pub fn growth_document(
    p: u64,
    coeff_prec: u32,
    degree_bound: u32,
    hypotheses: Option<&HypothesisReport>,
    labels: &[String],
    rows: &[DirectionGrowth],
) -> GrowthDocument {
    let directions = rows
        .iter()
        .zip(labels.iter())
        .map(|(row, label)| GrowthRowJson {
            direction: label.clone(),
            chart: chart_name(row.direction.chart()),
            anticyclotomic: row.anticyclotomic,
            derivative: row.derivative.as_ref().map(|d| d.to_coeff_string()),
            certificate: CertificateJson::from(&row.certificate),
            torsion: row.torsion.as_str().to_string(),
            predicted_growth_coefficient: row.predicted_growth_coefficient,
            notes: row.notes.clone(),
        })
        .collect();
    GrowthDocument {
        p,
        coeff_prec,
        degree_bound,
        hypotheses: hypotheses.map(HypothesisJson::from),
        directions,
    }
}

/// True when every row reached a definite verdict; drives the exit code.
pub fn all_concluded(rows: &[DirectionGrowth]) -> bool {
    rows.iter().all(|r| r.concluded())
}

fn push_row(out: &mut String, cells: &[&str], widths: &[usize]) {
    for (i, (cell, w)) in cells.iter().zip(widths.iter()).enumerate() {
        if i > 0 {
            out.push_str("  ");
        }
        let _ = write!(out, "{cell:<w$}", w = *w);
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out.push('\n');
}

/// Fixed-width table rendering of the analysis document.
pub fn render_growth_table(doc: &GrowthDocument) -> String {
    let mut rows: Vec<[String; 5]> = Vec::with_capacity(doc.directions.len());
    for d in &doc.directions {
        rows.push([
            d.direction.clone(),
            if d.anticyclotomic {
                "anticyclotomic".to_string()
            } else {
                d.chart.clone()
            },
            d.derivative.clone().unwrap_or_else(|| "-".to_string()),
            d.torsion.clone(),
            d.predicted_growth_coefficient
                .map(|c| c.to_string())
                .unwrap_or_else(|| "?".to_string()),
        ]);
    }
    let header = ["direction", "type", "derivative", "torsion", "c"];
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "p = {}, coefficient precision = {}, degree bound = {}",
        doc.p, doc.coeff_prec, doc.degree_bound
    );
    if let Some(h) = &doc.hypotheses {
        let _ = writeln!(
            out,
            "N = {} (N+ = {}, N- = {}), D = {}, heegner = {}, p splits = {}",
            h.conductor, h.n_plus, h.n_minus, h.discriminant,
            h.heegner_hypothesis_holds, h.p_splits_in_k
        );
    }
    push_row(&mut out, &header.map(|h| h), &widths);
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        push_row(&mut out, &cells, &widths);
    }
    for d in &doc.directions {
        for note in &d.notes {
            let _ = writeln!(out, "note [{}]: {}", d.direction, note);
        }
    }
    out
}

/// Weierstrass preparation output: the invariants plus both factors as
/// series documents.
#[derive(Debug, Clone, Serialize)]
pub struct WeierstrassDocument {
    pub p: u64,
    pub mu: u32,
    pub lambda: u32,
    pub distinguished: SeriesDocument1,
    pub unit: SeriesDocument1,
}

pub fn weierstrass_document(p: u64, data: &DistinguishedData) -> WeierstrassDocument {
    WeierstrassDocument {
        p,
        mu: data.mu,
        lambda: data.lambda,
        distinguished: SeriesDocument1::from_series(&data.distinguished),
        unit: SeriesDocument1::from_series(&data.unit),
    }
}

/// Corank predictions over a range of tower levels.
#[derive(Debug, Clone, Serialize)]
pub struct CorankTableDocument {
    pub p: u64,
    pub rank: u64,
    pub coranks: Vec<u64>,
}

pub fn render_corank_table(doc: &CorankTableDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p = {}, base rank = {}", doc.p, doc.rank);
    let _ = writeln!(
        out,
        "{:>5}  {:>12}  {:>12}  {:>12}  {:>14}",
        "n", "p^n", "phi(p^n)", "corank", "corank - r*p^n"
    );
    for (n, c) in doc.coranks.iter().enumerate() {
        let pn = doc.p.pow(n as u32);
        let phi = if n == 0 { 1 } else { pn - pn / doc.p };
        let excess = *c as i128 - (doc.rank as i128) * (pn as i128);
        let _ = writeln!(out, "{n:>5}  {pn:>12}  {phi:>12}  {c:>12}  {excess:>14}");
    }
    out
}

/// Finite-level kernel size of one direction at one level.
#[derive(Debug, Clone, Serialize)]
pub struct KernelCell {
    pub m: u32,
    pub n: u32,
    /// log_p of the kernel size.
    pub exponent: u64,
}

/// Oracle outcome for one direction.
#[derive(Debug, Clone, Serialize)]
pub struct OracleDirectionJson {
    pub direction: String,
    pub torsion: String,
    pub kernel_exponents: Vec<KernelCell>,
}

/// Finite-level free ranks of one supplied one-variable factor.
#[derive(Debug, Clone, Serialize)]
pub struct SelmerFactorJson {
    pub index: usize,
    pub levels: Vec<SelmerFactorLevelJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelmerFactorLevelJson {
    pub m: u32,
    pub n: u32,
    pub free_rank: u64,
    pub pivot_valuations: Vec<u32>,
}

impl SelmerFactorLevelJson {
    pub fn new(m: u32, n: u32, inv: &OneVarQuotientInvariants) -> Self {
        SelmerFactorLevelJson {
            m,
            n,
            free_rank: inv.free_rank,
            pivot_valuations: inv.pivot_valuations.clone(),
        }
    }
}

/// JSON form of the pseudo-nullity verdict.
#[derive(Debug, Clone, Serialize)]
pub struct PseudoNullJson {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl From<&PseudoNullVerdict> for PseudoNullJson {
    fn from(v: &PseudoNullVerdict) -> Self {
        match v {
            PseudoNullVerdict::Established { reason } => PseudoNullJson {
                status: "yes".to_string(),
                reason: Some(reason.clone()),
            },
            PseudoNullVerdict::Unknown => PseudoNullJson {
                status: "unknown".to_string(),
                reason: None,
            },
        }
    }
}

/// The full oracle document.
#[derive(Debug, Clone, Serialize)]
pub struct OracleDocument {
    pub p: u64,
    pub coeff_prec: u32,
    pub degree_bound: u32,
    pub pseudo_null: PseudoNullJson,
    pub directions: Vec<OracleDirectionJson>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub selmer_factors: Vec<SelmerFactorJson>,
}

/// True when no oracle verdict was left open; drives the exit code.
pub fn oracle_concluded(doc: &OracleDocument) -> bool {
    doc.directions.iter().all(|d| {
        d.torsion != TorsionVerdict::NotConcluded.as_str()
            && d.torsion != TorsionVerdict::Indeterminate.as_str()
    })
}

pub fn render_oracle_table(doc: &OracleDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "p = {}, pseudo-null: {}{}",
        doc.p,
        doc.pseudo_null.status,
        doc.pseudo_null
            .reason
            .as_ref()
            .map(|r| format!(" ({r})"))
            .unwrap_or_default()
    );
    for d in &doc.directions {
        let cells: Vec<String> = d
            .kernel_exponents
            .iter()
            .map(|k| format!("(m={}, n={}): p^{}", k.m, k.n, k.exponent))
            .collect();
        let _ = writeln!(
            out,
            "{}  torsion = {}  kernels: {}",
            d.direction,
            d.torsion,
            cells.join(", ")
        );
    }
    for f in &doc.selmer_factors {
        for level in &f.levels {
            let _ = writeln!(
                out,
                "factor[{}] at (m={}, n={}): free rank {}",
                f.index, level.m, level.n, level.free_rank
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::{analyze, HeightValue, TwoVarLFunction};
    use crate::padic::{Direction, PadicNumber};
    use crate::series::{PowerSeries2, PrecisionPolicy};

    fn sample_rows() -> (Vec<String>, Vec<DirectionGrowth>) {
        let policy = PrecisionPolicy::new(6, 6).unwrap();
        let series = PowerSeries2::from_entries(
            5,
            policy,
            0,
            vec![
                ((0, 1), PadicNumber::from_rational(5, 1, 1, 12).unwrap()),
                ((1, 1), PadicNumber::from_rational(5, 1, 1, 12).unwrap()),
            ],
        )
        .unwrap();
        let l = TwoVarLFunction::new(series).unwrap();
        let labels = vec!["1:1".to_string(), "0:1".to_string()];
        let dirs: Vec<Direction> = labels
            .iter()
            .map(|s| Direction::parse(5, s, 12).unwrap())
            .collect();
        let rows = analyze(&l, &dirs, &HeightValue::DeriveFromL, None, Some(1), None).unwrap();
        (labels, rows)
    }

    #[test]
    fn growth_document_serializes_deterministically() {
        let (labels, rows) = sample_rows();
        let doc = growth_document(5, 6, 6, None, &labels, &rows);
        let a = to_json(&doc);
        let b = to_json(&growth_document(5, 6, 6, None, &labels, &rows));
        assert_eq!(a, b, "same inputs must serialize identically");
        assert!(a.contains("\"direction\": \"1:1\""));
        assert!(a.contains("\"torsion\": \"torsion\""));
        assert!(a.ends_with('\n'));
    }

    #[test]
    fn growth_table_lists_every_direction_and_note() {
        let (labels, rows) = sample_rows();
        let doc = growth_document(5, 6, 6, None, &labels, &rows);
        let table = render_growth_table(&doc);
        assert!(table.contains("direction"));
        assert!(table.contains("1:1"));
        assert!(table.contains("anticyclotomic"));
        assert!(table.contains("note [1:1]"));
    }

    #[test]
    fn concluded_detection_matches_rows() {
        let (_, rows) = sample_rows();
        assert!(rows[0].concluded());
        assert!(
            !all_concluded(&rows),
            "the anticyclotomic row has no torsion input, so it stays open"
        );
    }
}
