//! Batch front end: reads series and module files, runs the analysis
//! pipeline, and emits structured or tabular reports on standard output.
//!
//! Exit status: 0 when every verdict is settled, 2 when any verdict is
//! left indeterminate or not concluded, 1 on error.

use clap::{Parser, Subcommand, ValueEnum};
use mazur::growth::{analyze, check_hypotheses};
use mazur::homology::{
    coinvariants_torsion, ideal_at_level, one_var_quotient_invariants, pseudo_null_sufficient,
};
use mazur::input::{
    AnalysisConfig, OracleConfig, SeriesDocument1, SeriesDocument2, DIRECTION_PRECISION_MARGIN,
};
use mazur::padic::Direction;
use mazur::report::{
    all_concluded, growth_document, oracle_concluded, render_corank_table, render_growth_table,
    render_oracle_table, to_json, weierstrass_document, CorankTableDocument, HypothesisJson,
    KernelCell, OracleDirectionJson, OracleDocument, SelmerFactorJson, SelmerFactorLevelJson,
    WeierstrassDocument,
};
use mazur::weierstrass::{corank_table, weierstrass_prepare};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mazur",
    version,
    about = "Exact p-adic analysis of Selmer corank growth over the directions of a two-variable Iwasawa algebra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Deterministic JSON document
    Structured,
    /// Fixed-width human-readable table
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Run the derivative criterion along every configured direction
    Analyze {
        /// Analysis configuration file (JSON)
        input: PathBuf,
        /// Override the working coefficient precision from the file
        #[arg(long)]
        precision: Option<u32>,
        /// Override the series degree bound from the file
        #[arg(long = "degree-bound")]
        degree_bound: Option<u32>,
        #[arg(long, value_enum, default_value = "structured")]
        output: OutputFormat,
    },
    /// Project a two-variable series to a single direction
    Project {
        /// Two-variable series file (JSON)
        input: PathBuf,
        /// Direction as "a:b" with base-10 integer coordinates
        #[arg(long)]
        direction: String,
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long = "degree-bound")]
        degree_bound: Option<u32>,
    },
    /// Weierstrass data (mu, lambda, distinguished factor) of a one-variable series
    Weierstrass {
        /// One-variable series file (JSON)
        input: PathBuf,
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long = "degree-bound")]
        degree_bound: Option<u32>,
        #[arg(long, value_enum, default_value = "structured")]
        output: OutputFormat,
    },
    /// Predicted coranks level by level from a base rank and a torsion factor
    GrowthTable {
        /// Optional one-variable characteristic factor file (JSON)
        input: Option<PathBuf>,
        /// Prime, required when no input series supplies it
        #[arg(long)]
        p: Option<u64>,
        /// Base corank carried by the free part
        #[arg(long, default_value_t = 0)]
        rank: u64,
        /// Largest level in the table
        #[arg(long, default_value_t = 6)]
        nmax: u32,
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long = "degree-bound")]
        degree_bound: Option<u32>,
        #[arg(long, value_enum, default_value = "structured")]
        output: OutputFormat,
    },
    /// Arithmetic hypothesis report for a prime, conductor, and discriminant
    Hypotheses {
        #[arg(long)]
        p: u64,
        /// Conductor N
        #[arg(long)]
        conductor: u64,
        /// Fundamental imaginary quadratic discriminant D
        #[arg(long, allow_hyphen_values = true)]
        discriminant: i64,
        #[arg(long, value_enum, default_value = "structured")]
        output: OutputFormat,
    },
    /// Finite-level module checks for a cyclic presentation
    Oracle {
        /// Presentation and level configuration file (JSON)
        input: PathBuf,
        #[arg(long, value_enum, default_value = "structured")]
        output: OutputFormat,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn read_input(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Analyze {
            input,
            precision,
            degree_bound,
            output,
        } => {
            let text = read_input(&input)?;
            let cfg = AnalysisConfig::parse(&text).map_err(|e| e.to_string())?;
            let built = cfg
                .build(precision, degree_bound)
                .map_err(|e| e.to_string())?;
            let rows = analyze(
                &built.l,
                &built.directions,
                &built.height,
                built.setting.as_ref(),
                built.ac_free_rank,
                built.ac_torsion,
            )
            .map_err(|e| e.to_string())?;
            let hypotheses = built
                .hypotheses
                .as_ref()
                .map(|h| check_hypotheses(built.prime, h.conductor, h.discriminant))
                .transpose()
                .map_err(|e| e.to_string())?;
            let policy = built.l.series().policy();
            let doc = growth_document(
                built.prime,
                policy.coeff_prec(),
                policy.degree_bound(),
                hypotheses.as_ref(),
                &built.direction_labels,
                &rows,
            );
            match output {
                OutputFormat::Structured => print!("{}", to_json(&doc)),
                OutputFormat::Table => print!("{}", render_growth_table(&doc)),
            }
            Ok(if all_concluded(&rows) { 0 } else { 2 })
        }
        Command::Project {
            input,
            direction,
            precision,
            degree_bound,
        } => {
            let text = read_input(&input)?;
            let doc = SeriesDocument2::parse(&text).map_err(|e| e.to_string())?;
            let series = doc
                .build(precision, degree_bound)
                .map_err(|e| e.to_string())?;
            let rel = series.policy().coeff_prec() + DIRECTION_PRECISION_MARGIN;
            let dir = Direction::parse(series.prime(), &direction, rel)
                .map_err(|e| e.to_string())?;
            let projected = series.project(&dir).map_err(|e| e.to_string())?;
            print!("{}", to_json(&SeriesDocument1::from_series(&projected)));
            Ok(0)
        }
        Command::Weierstrass {
            input,
            precision,
            degree_bound,
            output,
        } => {
            let text = read_input(&input)?;
            let doc = SeriesDocument1::parse(&text).map_err(|e| e.to_string())?;
            let f = doc
                .build(precision, degree_bound)
                .map_err(|e| e.to_string())?;
            let data = weierstrass_prepare(&f).map_err(|e| e.to_string())?;
            let out_doc = weierstrass_document(f.prime(), &data);
            match output {
                OutputFormat::Structured => print!("{}", to_json(&out_doc)),
                OutputFormat::Table => print!("{}", render_weierstrass_table(&out_doc)),
            }
            Ok(0)
        }
        Command::GrowthTable {
            input,
            p,
            rank,
            nmax,
            precision,
            degree_bound,
            output,
        } => {
            let (prime, factor) = match input {
                Some(path) => {
                    let text = read_input(&path)?;
                    let doc = SeriesDocument1::parse(&text).map_err(|e| e.to_string())?;
                    let f = doc
                        .build(precision, degree_bound)
                        .map_err(|e| e.to_string())?;
                    if let Some(flag) = p {
                        if flag != f.prime() {
                            return Err(format!(
                                "--p {flag} disagrees with the input file's prime {}",
                                f.prime()
                            ));
                        }
                    }
                    (f.prime(), Some(f))
                }
                None => (
                    p.ok_or_else(|| "either an input series or --p is required".to_string())?,
                    None,
                ),
            };
            let coranks =
                corank_table(prime, rank, factor.as_ref(), nmax).map_err(|e| e.to_string())?;
            let doc = CorankTableDocument {
                p: prime,
                rank,
                coranks,
            };
            match output {
                OutputFormat::Structured => print!("{}", to_json(&doc)),
                OutputFormat::Table => print!("{}", render_corank_table(&doc)),
            }
            Ok(0)
        }
        Command::Hypotheses {
            p,
            conductor,
            discriminant,
            output,
        } => {
            let report =
                check_hypotheses(p, conductor, discriminant).map_err(|e| e.to_string())?;
            let doc = HypothesisJson::from(&report);
            match output {
                OutputFormat::Structured => print!("{}", to_json(&doc)),
                OutputFormat::Table => print!("{}", render_hypothesis_table(&doc)),
            }
            // A failed hypothesis is a finding, not an error.
            Ok(0)
        }
        Command::Oracle { input, output } => {
            let text = read_input(&input)?;
            let cfg = OracleConfig::parse(&text).map_err(|e| e.to_string())?;
            let built = cfg.build().map_err(|e| e.to_string())?;
            let pseudo =
                pseudo_null_sufficient(&built.presentation).map_err(|e| e.to_string())?;
            let mut ideals = Vec::new();
            for (m, n) in &built.levels {
                let ideal = ideal_at_level(&built.presentation, *m, *n)
                    .map_err(|e| e.to_string())?;
                ideals.push(((*m, *n), ideal));
            }
            let mut directions = Vec::new();
            for (dir, label) in built.directions.iter().zip(built.direction_labels.iter()) {
                let torsion =
                    coinvariants_torsion(&built.presentation, dir).map_err(|e| e.to_string())?;
                let mut kernel_exponents = Vec::new();
                for ((m, n), ideal) in &ideals {
                    let exponent =
                        ideal.direction_kernel_exponent(dir).map_err(|e| e.to_string())?;
                    kernel_exponents.push(KernelCell {
                        m: *m,
                        n: *n,
                        exponent,
                    });
                }
                directions.push(OracleDirectionJson {
                    direction: label.clone(),
                    torsion: torsion.as_str().to_string(),
                    kernel_exponents,
                });
            }
            let mut selmer_factors = Vec::new();
            for (index, f) in built.selmer_factors.iter().enumerate() {
                let mut levels = Vec::new();
                for (m, n) in &built.levels {
                    let inv = one_var_quotient_invariants(built.prime, *m, *n, f)
                        .map_err(|e| e.to_string())?;
                    levels.push(SelmerFactorLevelJson::new(*m, *n, &inv));
                }
                selmer_factors.push(SelmerFactorJson { index, levels });
            }
            let doc = OracleDocument {
                p: built.prime,
                coeff_prec: cfg.coeff_prec,
                degree_bound: cfg.degree_bound,
                pseudo_null: (&pseudo).into(),
                directions,
                selmer_factors,
            };
            let concluded = oracle_concluded(&doc);
            match output {
                OutputFormat::Structured => print!("{}", to_json(&doc)),
                OutputFormat::Table => print!("{}", render_oracle_table(&doc)),
            }
            Ok(if concluded { 0 } else { 2 })
        }
    }
}

fn render_weierstrass_table(doc: &WeierstrassDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p = {}", doc.p);
    let _ = writeln!(out, "mu = {}", doc.mu);
    let _ = writeln!(out, "lambda = {}", doc.lambda);
    let _ = writeln!(out, "distinguished factor ({}):", doc.distinguished.variable);
    for (k, c) in &doc.distinguished.series {
        let _ = writeln!(out, "  [{k}] {c}");
    }
    let _ = writeln!(out, "unit factor ({}):", doc.unit.variable);
    for (k, c) in &doc.unit.series {
        let _ = writeln!(out, "  [{k}] {c}");
    }
    out
}

fn render_hypothesis_table(doc: &HypothesisJson) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "p = {}, N = {}, D = {}",
        doc.prime, doc.conductor, doc.discriminant
    );
    let _ = writeln!(out, "N+ = {}, N- = {}", doc.n_plus, doc.n_minus);
    let _ = writeln!(out, "split primes:    {:?}", doc.split_primes);
    let _ = writeln!(out, "inert primes:    {:?}", doc.inert_primes);
    let _ = writeln!(out, "ramified primes: {:?}", doc.ramified_primes);
    let _ = writeln!(out, "N- squarefree:          {}", doc.n_minus_squarefree);
    let _ = writeln!(out, "Heegner hypothesis:     {}", doc.heegner_hypothesis_holds);
    let _ = writeln!(out, "p splits in K:          {}", doc.p_splits_in_k);
    let _ = writeln!(out, "p at least 5:           {}", doc.p_at_least_5);
    out
}
