//! Single-zero nonestimability in saturated models.
//!
//! In a saturated model each cell has a corresponding parameter: the active
//! term with the most variables. A lone zero at that cell makes exactly that
//! parameter and its higher-order relatives (supersets of its variables that
//! keep its levels) nonestimable. [`verify_theorem1`] checks the rule against
//! the exact nullspace computation.

use crate::error::{Error, Result};
use crate::model::{build_design_matrix, ModelSpec, ModelTerm};
use crate::redundancy::{analyze_redundancy, nonestimable_parameters};
use crate::table::{cell_digits, default_variables, digits_label, Table};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub type SaturatedParam = ModelTerm;

/// Largest table the harness accepts.
pub const MAX_VERIFY_CELLS: usize = 256;

pub fn corresponding_parameter(digits: &[usize]) -> SaturatedParam {
    let (variables, levels) = digits
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0)
        .map(|(j, &d)| (j, d))
        .unzip();
    ModelTerm { variables, levels }
}

/// Strict supersets of `param` in the saturated model, with the levels of
/// the original variables held fixed.
pub fn higher_order_closure(param: &SaturatedParam, shape: &[usize]) -> BTreeSet<SaturatedParam> {
    let others: Vec<usize> = (0..shape.len())
        .filter(|j| !param.variables.contains(j))
        .collect();
    let mut out = BTreeSet::new();
    for mask in 1..(1usize << others.len()) {
        let extra: Vec<usize> = (0..others.len())
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| others[k])
            .collect();
        let radices: Vec<usize> = extra.iter().map(|&j| shape[j] - 1).collect();
        let count: usize = radices.iter().product();
        for idx in 0..count {
            let mut rest = idx;
            let mut digits = vec![0; shape.len()];
            for (&v, &l) in param.variables.iter().zip(&param.levels) {
                digits[v] = l;
            }
            for (&j, &r) in extra.iter().zip(&radices) {
                digits[j] = rest % r + 1;
                rest /= r;
            }
            out.insert(corresponding_parameter(&digits));
        }
    }
    out
}

pub fn nonestimable_set_single_zero(digits: &[usize], shape: &[usize]) -> BTreeSet<SaturatedParam> {
    let param = corresponding_parameter(digits);
    let mut set = higher_order_closure(&param, shape);
    set.insert(param);
    set
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem1Discrepancy {
    /// 1-based linear cell rank.
    pub cell: usize,
    pub label: String,
    pub combinatorial: Vec<String>,
    pub exact: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub shape: Vec<usize>,
    pub cells_checked: usize,
    pub cells_agreeing: usize,
    /// Cells whose zero does not leave exactly one redundant direction.
    pub deficiency_mismatches: Vec<usize>,
    pub discrepancies: Vec<Theorem1Discrepancy>,
}

impl Theorem1Report {
    pub fn passed(&self) -> bool {
        self.discrepancies.is_empty() && self.deficiency_mismatches.is_empty()
    }
}

/// Cell rank, rule agreement, `d == 1`, and the discrepancy if any.
type CellOutcome = (usize, bool, bool, Option<Theorem1Discrepancy>);

/// Zeroes each cell of a saturated table in turn and compares the
/// combinatorial nonestimable set with the exact one.
pub fn verify_theorem1(shape: &[usize]) -> Result<Theorem1Report> {
    let vars = default_variables(shape);
    let n: usize = shape.iter().product();
    if shape.is_empty() || shape.iter().any(|&l| l < 2) {
        return Err(Error::domain("every variable needs at least two levels"));
    }
    if n > MAX_VERIFY_CELLS {
        return Err(Error::domain(format!(
            "{n} cells exceeds the harness limit of {MAX_VERIFY_CELLS}"
        )));
    }
    let a = build_design_matrix(&ModelSpec::saturated(shape.len()), &vars)?;
    let outcomes: Vec<Result<CellOutcome>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut counts = vec![1u64; n];
            counts[i] = 0;
            let table = Table::new(vars.clone(), counts)?;
            let ds = analyze_redundancy(&a, &table)?;
            let exact: BTreeSet<ModelTerm> = nonestimable_parameters(&ds)
                .into_iter()
                .map(|s| a.terms[s].clone())
                .collect();
            let digits = cell_digits(i + 1, shape)?;
            let rule = nonestimable_set_single_zero(&digits, shape);
            let agree = exact == rule;
            let d_ok = ds.deficiency == 1;
            let show = |s: &BTreeSet<ModelTerm>| s.iter().map(|t| t.label(&vars)).collect();
            let disc = (!agree).then(|| Theorem1Discrepancy {
                cell: i + 1,
                label: digits_label(&digits, shape),
                combinatorial: show(&rule),
                exact: show(&exact),
            });
            Ok((i + 1, agree, d_ok, disc))
        })
        .collect();
    let mut report = Theorem1Report {
        shape: shape.to_vec(),
        cells_checked: n,
        cells_agreeing: 0,
        deficiency_mismatches: Vec::new(),
        discrepancies: Vec::new(),
    };
    for o in outcomes {
        let (cell, agree, d_ok, disc) = o?;
        report.cells_agreeing += usize::from(agree);
        if !d_ok {
            report.deficiency_mismatches.push(cell);
        }
        report.discrepancies.extend(disc);
    }
    Ok(report)
}
