//! The full analysis pipeline and its report.
//!
//! redundancy -> esoteric verdicts -> facial set -> reduced models -> fits,
//! then a three-way classification:
//!
//! * `case-i`: no redundancy (`d = 0`), the MLE exists;
//! * `case-ii`: redundancy and no MLE; nonestimable cells behave as
//!   structural zeros;
//! * `case-iii`: redundancy but the MLE exists, pinned down by esoteric
//!   constraints.

use crate::emle::{facial_set, EmleReport};
use crate::error::{Error, Result};
use crate::esoteric::{
    augmented_identifiability, derive_constraint, linear_residual, score_form, DerivedConstraint,
    DirectionKind, DirectionVerdict, EsotericConstraint,
};
use crate::fitting::{fit_exact, standard_errors, to_real, FitResult, StandardErrors};
use crate::linalg::Matrix;
use crate::model::{build_design_matrix, parse_model_formula_with, DesignMatrix};
use crate::redundancy::{
    analyze_redundancy, directly_estimable, estimable_cells, estimable_combinations,
    nonestimable_parameters, reduce_model, LinearCombination, ReducedModel,
};
use crate::scalar::rational_to_string;
use crate::table::{Table, VariableSpec};
use crate::Rational;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "case-i")]
    NotRedundant,
    #[serde(rename = "case-ii")]
    RedundantNoMle,
    #[serde(rename = "case-iii")]
    RedundantWithConstraint,
}

impl Classification {
    pub fn classify(deficiency: usize, mle_exists: bool) -> Self {
        match (deficiency, mle_exists) {
            (0, _) => Classification::NotRedundant,
            (_, false) => Classification::RedundantNoMle,
            (_, true) => Classification::RedundantWithConstraint,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Classification::NotRedundant => 0,
            Classification::RedundantNoMle => 10,
            Classification::RedundantWithConstraint => 11,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::NotRedundant => "case-i",
            Classification::RedundantNoMle => "case-ii",
            Classification::RedundantWithConstraint => "case-iii",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub fit: bool,
    pub intercept: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            fit: true,
            intercept: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRef {
    /// 1-based linear rank.
    pub index: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSummary {
    pub variables: Vec<VariableSpec>,
    pub n_cells: usize,
    pub total: u64,
    pub zero_cells: Vec<CellRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub formula: String,
    pub hierarchical: bool,
    pub n_params: usize,
    pub parameters: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedundancySection {
    pub rank: usize,
    pub deficiency: usize,
    pub parameter_redundant: bool,
    /// Canonical integer nullspace basis of `A_+`.
    pub alpha: Vec<Vec<String>>,
    pub directly_estimable: Vec<String>,
    pub nonestimable_parameters: Vec<String>,
    pub theta_prime: Vec<LinearCombination>,
    pub estimable_cells: Vec<CellRef>,
    pub nonestimable_cells: Vec<CellRef>,
    pub a_prime: Vec<Vec<i64>>,
    pub df: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroCellCoefficient {
    pub cell: CellRef,
    pub coefficient: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictEntry {
    /// `basis` for a nullspace basis vector, `lp` for the facial-set witness.
    pub source: String,
    pub alpha: Vec<String>,
    pub kind: DirectionKind,
    pub zero_cell_coefficients: Vec<ZeroCellCoefficient>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintEntry {
    pub exp_form: String,
    pub linear: Option<String>,
    pub linear_coefficients: Option<Vec<String>>,
    pub source_alpha: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EsotericSection {
    pub verdicts: Vec<VerdictEntry>,
    pub esoteric_constraints: Vec<ConstraintEntry>,
    /// Rank of `A_+` stacked with the linear constraint rows.
    pub augmented_rank: Option<usize>,
    pub identifiable_under_constraints: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmleSection {
    pub mle_exists: bool,
    pub facial_set: Vec<CellRef>,
    pub co_facial_set: Vec<CellRef>,
    pub zeta: Option<Vec<String>>,
    pub kept_parameters: Vec<String>,
    pub a_star_f: Vec<Vec<i64>>,
    pub p_f: usize,
    pub df: i64,
    pub lp_rounds: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEstimate {
    pub name: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedCell {
    pub cell: CellRef,
    pub observed: u64,
    /// `None` for cells outside the fitted model ("not estimable").
    pub fitted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSection {
    /// `a_prime` or `a_star_f`.
    pub design: String,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub score_norm: f64,
    pub non_identifiable_at_optimum: bool,
    pub parameters: Vec<ParameterEstimate>,
    pub cells: Vec<FittedCell>,
    /// `g^T theta_hat` for each linear esoteric constraint, when the fit
    /// carries the full parameter vector.
    pub constraint_residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub table_sha256: String,
    pub model_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub classification: Classification,
    pub summary: String,
    pub table: TableSummary,
    pub model: ModelSummary,
    pub redundancy: RedundancySection,
    pub esoteric: EsotericSection,
    pub emle: EmleSection,
    pub fits: Vec<FitSection>,
    pub provenance: Provenance,
}

/// Everything computed by [`analyze`], in exact form, for callers that
/// need more than the serialized report.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub design: DesignMatrix,
    pub reduced: ReducedModel,
    pub basis_verdicts: Vec<DirectionVerdict>,
    pub lp_verdict: Option<DirectionVerdict>,
    pub constraints: Vec<EsotericConstraint>,
    pub emle: EmleReport,
    pub classification: Classification,
    pub fits: Vec<(String, FitResult<f64>)>,
    pub report: AnalysisReport,
}

fn cell_ref(table: &Table, i: usize) -> CellRef {
    CellRef {
        index: i + 1,
        label: table.cell_label(i),
    }
}

fn cell_refs(table: &Table, cells: &[usize]) -> Vec<CellRef> {
    cells.iter().map(|&i| cell_ref(table, i)).collect()
}

fn int_strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn rat_strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational_to_string).collect()
}

fn integer_rows(m: &Matrix<Rational>) -> Result<Vec<Vec<i64>>> {
    m.rows()
        .map(|r| {
            r.iter()
                .map(|v| {
                    v.to_integer()
                        .to_i64()
                        .filter(|_| v.is_integer())
                        .ok_or_else(|| Error::Internal("non-integer design entry".into()))
                })
                .collect()
        })
        .collect()
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn verdict_entry(source: &str, v: &DirectionVerdict, table: &Table) -> VerdictEntry {
    VerdictEntry {
        source: source.to_string(),
        alpha: rat_strings(&v.alpha),
        kind: v.kind,
        zero_cell_coefficients: v
            .coeffs
            .iter()
            .map(|(i, c)| ZeroCellCoefficient {
                cell: cell_ref(table, *i),
                coefficient: rational_to_string(c),
            })
            .collect(),
    }
}

fn fit_section(
    name: &str,
    design: &Matrix<Rational>,
    rows: &[usize],
    names: Vec<String>,
    table: &Table,
    constraints: &[EsotericConstraint],
    full_parameters: bool,
) -> Result<(FitSection, FitResult<f64>)> {
    let counts: Vec<u64> = rows.iter().map(|&i| table.counts()[i]).collect();
    let fit = fit_exact(design, &counts)?;
    let se = if fit.converged {
        standard_errors(&fit, &to_real(design))?
    } else {
        StandardErrors::NonIdentifiable
    };
    let (ses, singular) = match se {
        StandardErrors::Finite(v) => (v.into_iter().map(Some).collect(), false),
        StandardErrors::NonIdentifiable => (vec![None; names.len()], true),
    };
    let parameters = names
        .into_iter()
        .zip(&fit.theta_hat)
        .zip(ses)
        .map(|((name, &estimate), std_error)| ParameterEstimate {
            name,
            estimate,
            std_error,
        })
        .collect();
    let cells = (0..table.n_cells())
        .map(|i| FittedCell {
            cell: cell_ref(table, i),
            observed: table.counts()[i],
            fitted: rows.iter().position(|&r| r == i).map(|k| fit.mu_hat[k]),
        })
        .collect();
    let constraint_residuals = if full_parameters {
        constraints
            .iter()
            .filter_map(|c| linear_residual(c, &fit.theta_hat))
            .collect()
    } else {
        Vec::new()
    };
    let section = FitSection {
        design: name.to_string(),
        converged: fit.converged,
        iterations: fit.iterations,
        log_likelihood: fit.log_likelihood,
        score_norm: fit.score_norm,
        non_identifiable_at_optimum: singular,
        parameters,
        cells,
        constraint_residuals,
    };
    Ok((section, fit))
}

pub fn summary_line(
    class: Classification,
    deficiency: usize,
    structural: usize,
    constraints: usize,
) -> String {
    match class {
        Classification::NotRedundant => "not parameter redundant; MLE exists".to_string(),
        Classification::RedundantNoMle => format!(
            "parameter redundant (d = {deficiency}); MLE does not exist; \
             {structural} nonestimable cell(s) treated as structural zeros"
        ),
        Classification::RedundantWithConstraint => format!(
            "parameter redundant (d = {deficiency}) with {constraints} esoteric constraint(s); \
             MLE exists"
        ),
    }
}

/// Runs the whole pipeline on a table and a model formula.
pub fn analyze(table: &Table, formula: &str, opts: AnalysisOptions) -> Result<AnalysisReport> {
    Ok(analyze_full(table, formula, opts)?.report)
}

pub fn analyze_full(table: &Table, formula: &str, opts: AnalysisOptions) -> Result<Analysis> {
    let spec = parse_model_formula_with(formula, table.variables(), opts.intercept)?;
    let a = build_design_matrix(&spec, table.variables())?;
    let labels = a.labels();
    let ds = analyze_redundancy(&a, table)?;
    let combos = estimable_combinations(&a, &ds);
    let est_cells = estimable_cells(&a, &ds);
    let reduced = reduce_model(&a, &ds, &combos, &est_cells)?;

    let basis_verdicts: Vec<DirectionVerdict> = ds
        .alpha
        .rational_vectors()
        .iter()
        .map(|al| score_form(al, &a, table))
        .collect::<Result<_>>()?;
    let emle = facial_set(&a, table)?;
    let lp_verdict = match &emle.zeta {
        Some(z) => {
            let z: Vec<Rational> = z.iter().cloned().map(Rational::from_integer).collect();
            Some(score_form(&z, &a, table)?)
        }
        None => None,
    };
    if let Some(v) = &lp_verdict {
        if v.kind != DirectionKind::Divergent {
            return Err(Error::Internal("facial-set witness is not divergent".into()));
        }
    }
    let classification = Classification::classify(ds.deficiency, emle.mle_exists);

    let mut constraints = Vec::new();
    if classification == Classification::RedundantWithConstraint {
        for v in basis_verdicts.iter().filter(|v| v.kind == DirectionKind::Constraint) {
            if let DerivedConstraint::Constraint(c) = derive_constraint(v, &a)? {
                constraints.push(c);
            }
        }
    }
    let has_linear = constraints.iter().any(|c| c.linear_form.is_some());
    let (augmented_rank, identifiable) = if has_linear {
        let (ok, rank) = augmented_identifiability(&constraints, &ds);
        (Some(rank), Some(ok))
    } else {
        (None, None)
    };

    let mut fits = Vec::new();
    let mut fit_sections = Vec::new();
    if opts.fit {
        if ds.deficiency > 0 {
            let names = reduced.theta_prime.iter().map(|c| c.display.clone()).collect();
            let (s, f) = fit_section("a_prime", &reduced.a_prime, &est_cells, names, table, &constraints, false)?;
            fit_sections.push(s);
            fits.push(("a_prime".to_string(), f));
        }
        let names = emle.kept_columns.iter().map(|&s| labels[s].clone()).collect();
        let full = emle.p_f == a.n_params();
        let (s, f) = fit_section("a_star_f", &emle.a_star, &emle.facial_set, names, table, &constraints, full)?;
        fit_sections.push(s);
        fits.push(("a_star_f".to_string(), f));
    }

    let nonest_cells: Vec<usize> = (0..table.n_cells()).filter(|i| !est_cells.contains(i)).collect();
    let summary = summary_line(
        classification,
        ds.deficiency,
        emle.co_facial_set.len(),
        constraints.len(),
    );
    let note = (!emle.co_facial_set.is_empty()).then(|| {
        format!(
            "cells {} are treated as structural zeros and omitted from the reduced model",
            emle.co_facial_set
                .iter()
                .map(|&i| table.cell_label(i))
                .collect::<Vec<_>>()
                .join(", ")
        )
    });

    let report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        classification,
        summary,
        table: TableSummary {
            variables: table.variables().to_vec(),
            n_cells: table.n_cells(),
            total: table.total(),
            zero_cells: cell_refs(table, &ds.zero_cells),
        },
        model: ModelSummary {
            formula: formula.to_string(),
            hierarchical: spec.is_hierarchical(),
            n_params: a.n_params(),
            parameters: labels.clone(),
        },
        redundancy: RedundancySection {
            rank: ds.rank,
            deficiency: ds.deficiency,
            parameter_redundant: ds.is_redundant(),
            alpha: ds.alpha.vectors.iter().map(|v| int_strings(v)).collect(),
            directly_estimable: directly_estimable(&ds).iter().map(|&s| labels[s].clone()).collect(),
            nonestimable_parameters: nonestimable_parameters(&ds)
                .iter()
                .map(|&s| labels[s].clone())
                .collect(),
            theta_prime: reduced.theta_prime.clone(),
            estimable_cells: cell_refs(table, &est_cells),
            nonestimable_cells: cell_refs(table, &nonest_cells),
            a_prime: integer_rows(&reduced.a_prime)?,
            df: reduced.df,
        },
        esoteric: EsotericSection {
            verdicts: basis_verdicts
                .iter()
                .map(|v| verdict_entry("basis", v, table))
                .chain(lp_verdict.iter().map(|v| verdict_entry("lp", v, table)))
                .collect(),
            esoteric_constraints: constraints
                .iter()
                .map(|c| ConstraintEntry {
                    exp_form: c.exp_display(table),
                    linear: c.linear_display(&a),
                    linear_coefficients: c.linear_form.as_deref().map(rat_strings),
                    source_alpha: rat_strings(&c.source_alpha),
                })
                .collect(),
            augmented_rank,
            identifiable_under_constraints: identifiable,
        },
        emle: EmleSection {
            mle_exists: emle.mle_exists,
            facial_set: cell_refs(table, &emle.facial_set),
            co_facial_set: cell_refs(table, &emle.co_facial_set),
            zeta: emle.zeta.as_deref().map(int_strings),
            kept_parameters: emle.kept_columns.iter().map(|&s| labels[s].clone()).collect(),
            a_star_f: integer_rows(&emle.a_star)?,
            p_f: emle.p_f,
            df: emle.df,
            lp_rounds: emle.lp_rounds,
            note,
        },
        fits: fit_sections,
        provenance: Provenance {
            tool: "loglin".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            schema_version: SCHEMA_VERSION,
            table_sha256: sha256_hex(&serde_json::to_vec(table)?),
            model_sha256: sha256_hex(formula.as_bytes()),
        },
    };

    Ok(Analysis {
        design: a,
        reduced,
        basis_verdicts,
        lp_verdict,
        constraints,
        emle,
        classification,
        fits,
        report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Text,
}

pub fn emit_report(report: &AnalysisReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Text => Ok(render_text(report)),
    }
}

pub fn parse_report(json: &str) -> Result<AnalysisReport> {
    Ok(serde_json::from_str(json)?)
}

fn join_cells(cells: &[CellRef]) -> String {
    if cells.is_empty() {
        return "none".to_string();
    }
    cells
        .iter()
        .map(|c| format!("{} ({})", c.label, c.index))
        .collect::<Vec<_>>()
        .join(", ")
}

fn write_matrix(out: &mut String, title: &str, rows: &[Vec<i64>]) {
    let _ = writeln!(out, "{title}:");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:>2}")).collect();
        let _ = writeln!(out, "  [{}]", cells.join(" "));
    }
}

fn render_text(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let w = &mut out;
    let vars: Vec<String> = r
        .table
        .variables
        .iter()
        .map(|v| format!("{}({})", v.name, v.levels))
        .collect();
    let _ = writeln!(w, "classification: {}", r.classification.as_str());
    let _ = writeln!(w, "{}", r.summary);
    let _ = writeln!(w);
    let _ = writeln!(
        w,
        "table: {} ; {} cells, total {}, zero cells: {}",
        vars.join(" x "),
        r.table.n_cells,
        r.table.total,
        join_cells(&r.table.zero_cells)
    );
    let _ = writeln!(w, "model: {} ; p = {}", r.model.formula, r.model.n_params);
    let _ = writeln!(w, "parameters: {}", r.model.parameters.join(", "));
    let _ = writeln!(w);

    let red = &r.redundancy;
    let _ = writeln!(w, "rank r = {}, deficiency d = {}", red.rank, red.deficiency);
    for (k, a) in red.alpha.iter().enumerate() {
        let _ = writeln!(w, "alpha_{} = ({})", k + 1, a.join(", "));
    }
    if red.parameter_redundant {
        let direct = if red.directly_estimable.is_empty() {
            "none".to_string()
        } else {
            red.directly_estimable.join(", ")
        };
        let _ = writeln!(w, "directly estimable: {direct}");
        let shown: Vec<&str> = red.theta_prime.iter().map(|c| c.display.as_str()).collect();
        let _ = writeln!(w, "θ' = ({})", shown.join(", "));
        let _ = writeln!(w, "estimable cells: {}", join_cells(&red.estimable_cells));
        let _ = writeln!(w, "nonestimable cells: {}", join_cells(&red.nonestimable_cells));
        write_matrix(w, "A'", &red.a_prime);
        let _ = writeln!(w, "df = {}", red.df);
    }
    let _ = writeln!(w);

    if !r.esoteric.verdicts.is_empty() {
        for v in &r.esoteric.verdicts {
            let _ = writeln!(
                w,
                "direction [{}] ({}): {}",
                v.source,
                v.alpha.join(", "),
                v.kind.as_str()
            );
        }
    }
    for c in &r.esoteric.esoteric_constraints {
        let _ = writeln!(w, "esoteric constraint: {}", c.exp_form);
        if let Some(l) = &c.linear {
            let _ = writeln!(w, "  linear form: {l}");
        }
    }
    if let Some(rank) = r.esoteric.augmented_rank {
        let _ = writeln!(
            w,
            "augmented rank {} of {} ({})",
            rank,
            r.model.n_params,
            if r.esoteric.identifiable_under_constraints == Some(true) {
                "identifiable under the constraints"
            } else {
                "still not identifiable"
            }
        );
    }
    let _ = writeln!(w);

    let e = &r.emle;
    let _ = writeln!(w, "MLE exists: {}", if e.mle_exists { "yes" } else { "no" });
    let _ = writeln!(w, "facial set F: {}", join_cells(&e.facial_set));
    let _ = writeln!(w, "co-facial set F^c: {}", join_cells(&e.co_facial_set));
    if let Some(z) = &e.zeta {
        let _ = writeln!(w, "zeta = ({})", z.join(", "));
    }
    if let Some(note) = &e.note {
        let _ = writeln!(w, "{note}");
    }
    if !e.mle_exists {
        let _ = writeln!(w, "A*_F columns: {}", e.kept_parameters.join(", "));
        write_matrix(w, "A*_F", &e.a_star_f);
        let _ = writeln!(w, "p_F = {}, df = {}", e.p_f, e.df);
    }

    for f in &r.fits {
        let _ = writeln!(w);
        let _ = writeln!(
            w,
            "fit on {}: converged = {}, iterations = {}, log-likelihood = {:.6}",
            f.design, f.converged, f.iterations, f.log_likelihood
        );
        for p in &f.parameters {
            let se = p
                .std_error
                .map_or_else(|| "n/a".to_string(), |s| format!("{s:.6}"));
            let _ = writeln!(w, "  {:<24} {:>14.6}  se {}", p.name, p.estimate, se);
        }
        for c in &f.cells {
            let fitted = c
                .fitted
                .map_or_else(|| "not estimable".to_string(), |m| format!("{m:.6}"));
            let _ = writeln!(w, "  μ({}) observed {:>6}  fitted {}", c.cell.label, c.observed, fitted);
        }
        for res in &f.constraint_residuals {
            let _ = writeln!(w, "  constraint residual {res:.3e}");
        }
    }
    out
}
